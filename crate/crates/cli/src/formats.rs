//! File formats: CI vectors (JSON), occupation spectra (text), CSV scan output.

use std::collections::BTreeSet;

use gpc_core::fock::{BasisSpec, SlaterDeterminant};
use gpc_core::rdm::CIVector;
use gpc_core::toyci::ScanResult;
use num_complex::Complex64;
use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

use crate::CliError;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct CiFile {
    pub n: usize,
    pub m: usize,
    pub terms: Vec<CiTerm>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct CiTerm {
    pub orbitals: Vec<usize>,
    pub re: f64,
    #[serde(default)]
    pub im: f64,
}

impl CiFile {
    pub fn parse(text: &str) -> Result<Self, CliError> {
        serde_json::from_str(text).map_err(|e| CliError::Input(format!("CI file: {e}")))
    }

    /// Validates orbital lists and duplicate keys; does not normalize.
    pub fn to_civector(&self) -> Result<CIVector, CliError> {
        let basis = BasisSpec::new(self.n, self.m)?;
        let mut terms = Vec::with_capacity(self.terms.len());
        for t in &self.terms {
            let det = SlaterDeterminant::in_basis(&basis, &t.orbitals)?;
            terms.push((det, Complex64::new(t.re, t.im)));
        }
        Ok(CIVector::from_terms(basis, terms)?)
    }

    pub fn from_civector(psi: &CIVector) -> Self {
        Self {
            n: psi.basis().n(),
            m: psi.basis().m(),
            terms: psi
                .terms()
                .map(|(d, c)| CiTerm {
                    orbitals: d.orbitals(),
                    re: c.re,
                    im: c.im,
                })
                .collect(),
        }
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("plain data serializes")
    }
}

pub fn sha256_hex(bytes: &[u8]) -> String {
    hex::encode(Sha256::digest(bytes))
}

/// One spectrum as read from a line, plus whether it had to be sorted.
#[derive(Debug, Clone, PartialEq)]
pub struct SpectrumLine {
    pub line: usize,
    pub values: Vec<f64>,
    pub was_sorted: bool,
}

/// Whitespace-separated decimals, one spectrum per line; `#` starts a comment.
pub fn parse_spectra(text: &str) -> Result<Vec<SpectrumLine>, CliError> {
    let mut out = Vec::new();
    for (idx, raw) in text.lines().enumerate() {
        let line = raw.split('#').next().unwrap_or("").trim();
        if line.is_empty() {
            continue;
        }
        let values = line
            .split_whitespace()
            .map(|tok| {
                tok.parse::<f64>()
                    .ok()
                    .filter(|x| x.is_finite())
                    .ok_or_else(|| {
                        CliError::Input(format!("line {}: cannot parse {tok:?}", idx + 1))
                    })
            })
            .collect::<Result<Vec<f64>, _>>()?;
        let was_sorted = values.windows(2).all(|w| w[0] >= w[1]);
        out.push(SpectrumLine {
            line: idx + 1,
            values,
            was_sorted,
        });
    }
    if out.is_empty() {
        return Err(CliError::Input("no spectra in file".into()));
    }
    Ok(out)
}

/// Comma-separated 1-based indices, e.g. `1,2,3`.
pub fn parse_index_list(text: &str) -> Result<Vec<usize>, CliError> {
    let mut seen = BTreeSet::new();
    text.split(',')
        .map(str::trim)
        .filter(|s| !s.is_empty())
        .map(|s| {
            let mu: usize = s
                .parse()
                .map_err(|_| CliError::Input(format!("bad constraint index {s:?}")))?;
            if !seen.insert(mu) {
                return Err(CliError::Input(format!("constraint index {mu} repeated")));
            }
            Ok(mu)
        })
        .collect()
}

/// `n,m`, as in `3,8`.
pub fn parse_shape(text: &str) -> Result<(usize, usize), CliError> {
    let bad = || CliError::Input(format!("expected `n,m`, got {text:?}"));
    let (n, m) = text.split_once(',').ok_or_else(bad)?;
    Ok((
        n.trim().parse().map_err(|_| bad())?,
        m.trim().parse().map_err(|_| bad())?,
    ))
}

pub fn csv_header(result: &ScanResult) -> String {
    let k = result.labels.len();
    let mut cols = vec!["param".to_string(), "energy".to_string()];
    cols.extend((1..=result.m).map(|i| format!("n{i}")));
    cols.extend((1..=k).map(|mu| format!("D{mu}")));
    cols.extend((1..=k).map(|mu| format!("status{mu}")));
    cols.join(",")
}

/// CSV with the fixed column layout; failed points keep their parameter and
/// carry `FAILED` in every status column.
pub fn scan_csv(result: &ScanResult) -> String {
    let k = result.labels.len();
    let mut out = csv_header(result);
    out.push('\n');
    for row in &result.rows {
        let mut cols = vec![row.param.to_string()];
        match &row.outcome {
            Ok(point) => {
                cols.push(point.energy.to_string());
                cols.extend(point.spectrum.values.iter().map(f64::to_string));
                cols.extend(point.values.iter().map(f64::to_string));
                cols.extend(point.statuses.iter().map(|s| s.as_str().to_string()));
            }
            Err(_) => {
                cols.extend(std::iter::repeat_n(String::new(), 1 + result.m + k));
                cols.extend(std::iter::repeat_n("FAILED".to_string(), k));
            }
        }
        out.push_str(&cols.join(","));
        out.push('\n');
    }
    out
}

/// Parsed CSV row, for consumers and tests.
#[derive(Debug, Clone, PartialEq)]
pub struct CsvRow {
    pub param: f64,
    pub energy: Option<f64>,
    pub occupations: Vec<f64>,
    pub values: Vec<f64>,
    pub statuses: Vec<String>,
}

pub fn parse_scan_csv(text: &str) -> Result<(usize, usize, Vec<CsvRow>), CliError> {
    let mut lines = text.lines();
    let header: Vec<&str> = lines
        .next()
        .ok_or_else(|| CliError::Input("empty CSV".into()))?
        .split(',')
        .collect();
    let m = header
        .iter()
        .filter(|h| h.starts_with('n') && h[1..].parse::<usize>().is_ok())
        .count();
    let k = header.iter().filter(|h| h.starts_with("status")).count();
    let bad = |n: usize| CliError::Input(format!("CSV row {n} is malformed"));
    let mut rows = Vec::new();
    for (i, line) in lines.enumerate() {
        let cols: Vec<&str> = line.split(',').collect();
        if cols.len() != header.len() {
            return Err(bad(i + 2));
        }
        let num = |s: &str| s.parse::<f64>().map_err(|_| bad(i + 2));
        let param = num(cols[0])?;
        let energy = if cols[1].is_empty() {
            None
        } else {
            Some(num(cols[1])?)
        };
        let (occupations, values) = if energy.is_some() {
            (
                cols[2..2 + m]
                    .iter()
                    .map(|s| num(s))
                    .collect::<Result<_, _>>()?,
                cols[2 + m..2 + m + k]
                    .iter()
                    .map(|s| num(s))
                    .collect::<Result<_, _>>()?,
            )
        } else {
            (Vec::new(), Vec::new())
        };
        rows.push(CsvRow {
            param,
            energy,
            occupations,
            values,
            statuses: cols[2 + m + k..].iter().map(|s| s.to_string()).collect(),
        });
    }
    Ok((m, k, rows))
}
