//! Generalized Pauli constraints `D(n) = κ0 + Σ κ_i n_i ≥ 0` on descending
//! natural occupation numbers, their pinning analysis, and the selection
//! rule that restricts CI expansions of pinned states.

use std::fmt;
use std::ops::Add;

use crate::error::{Error, Result};
use crate::fock::{enumerate_determinants, enumerate_sector, BasisSpec, SlaterDeterminant};
use crate::rdm::OccupationSpectrum;

/// An integer linear inequality on the sorted occupation numbers.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct GPConstraint {
    pub label: String,
    pub kappa0: i64,
    pub kappa: Vec<i64>,
}

impl GPConstraint {
    pub fn new(label: impl Into<String>, kappa0: i64, kappa: Vec<i64>) -> Self {
        Self {
            label: label.into(),
            kappa0,
            kappa,
        }
    }

    /// `c0 + Σ c_i n_i` given as `(orbital, coefficient)` pairs on rank `m`.
    pub fn sparse(label: impl Into<String>, m: usize, kappa0: i64, terms: &[(usize, i64)]) -> Self {
        let mut kappa = vec![0; m];
        for &(i, c) in terms {
            kappa[i - 1] += c;
        }
        Self::new(label, kappa0, kappa)
    }

    pub fn m(&self) -> usize {
        self.kappa.len()
    }

    pub fn evaluate(&self, values: &[f64]) -> Result<f64> {
        if values.len() != self.m() {
            return Err(Error::DimensionMismatch {
                expected: self.m(),
                found: values.len(),
            });
        }
        Ok(self.kappa0 as f64
            + self
                .kappa
                .iter()
                .zip(values)
                .map(|(&k, &x)| k as f64 * x)
                .sum::<f64>())
    }

    /// Eigenvalue of `κ0 + Σ κ_i a†_i a_i` on a determinant.
    pub fn selection_eigenvalue(&self, det: &SlaterDeterminant) -> i64 {
        self.kappa0
            + det
                .iter()
                .map(|p| self.kappa.get(p - 1).copied().unwrap_or(0))
                .sum::<i64>()
    }

    /// The same inequality on the slice `n_m = 0`, one rank lower.
    pub fn drop_last(&self) -> GPConstraint {
        let mut kappa = self.kappa.clone();
        kappa.pop();
        GPConstraint::new(self.label.clone(), self.kappa0, kappa)
    }
}

impl Add for &GPConstraint {
    type Output = GPConstraint;

    fn add(self, rhs: &GPConstraint) -> GPConstraint {
        let m = self.m().max(rhs.m());
        let kappa = (0..m)
            .map(|i| self.kappa.get(i).unwrap_or(&0) + rhs.kappa.get(i).unwrap_or(&0))
            .collect();
        GPConstraint::new(
            format!("{}+{}", self.label, rhs.label),
            self.kappa0 + rhs.kappa0,
            kappa,
        )
    }
}

impl fmt::Display for GPConstraint {
    /// Renders e.g. `2 - n1 - n2 - n4 - n7 >= 0`.
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let mut out = String::new();
        if self.kappa0 != 0 {
            out.push_str(&self.kappa0.to_string());
        }
        for (i, &k) in self.kappa.iter().enumerate() {
            if k == 0 {
                continue;
            }
            let mag = k.unsigned_abs();
            let coeff = if mag == 1 {
                String::new()
            } else {
                mag.to_string()
            };
            if out.is_empty() {
                out.push_str(if k < 0 { "-" } else { "" });
            } else {
                out.push_str(if k < 0 { " - " } else { " + " });
            }
            out.push_str(&format!("{coeff}n{}", i + 1));
        }
        if out.is_empty() {
            out.push('0');
        }
        write!(f, "{}: {out} >= 0", self.label)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Completeness {
    /// The constraints characterize the polytope.
    Complete,
    /// A subset only; membership verdicts are necessary conditions.
    Partial,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct GPCTable {
    pub n: usize,
    pub m: usize,
    pub constraints: Vec<GPConstraint>,
    pub completeness: Completeness,
}

impl GPCTable {
    pub fn len(&self) -> usize {
        self.constraints.len()
    }

    pub fn is_empty(&self) -> bool {
        self.constraints.is_empty()
    }

    /// Constraint by 1-based position.
    pub fn get(&self, mu: usize) -> Option<&GPConstraint> {
        mu.checked_sub(1).and_then(|i| self.constraints.get(i))
    }

    /// Constraints at the given 1-based positions.
    pub fn select(&self, mus: &[usize]) -> Result<Vec<GPConstraint>> {
        mus.iter()
            .map(|&mu| {
                self.get(mu).cloned().ok_or_else(|| {
                    Error::InvalidParams(format!(
                        "constraint index {mu} outside 1..={}",
                        self.len()
                    ))
                })
            })
            .collect()
    }

    pub fn custom(n: usize, m: usize, constraints: Vec<GPConstraint>) -> Result<Self> {
        for c in &constraints {
            if c.m() != m {
                return Err(Error::RankMismatch {
                    expected: m,
                    found: c.m(),
                });
            }
        }
        Ok(Self {
            n,
            m,
            constraints,
            completeness: Completeness::Partial,
        })
    }
}

/// The transcribed constraint tables: (3,6), (3,7), the first ten of (3,8),
/// and the single four-electron inequality for (4, m ≥ 4).
pub fn builtin_table(n: usize, m: usize) -> Result<GPCTable> {
    let s = GPConstraint::sparse;
    let (constraints, completeness) = match (n, m) {
        (3, 6) => (
            vec![
                s("D1_3_6", m, 1, &[(1, -1), (6, -1)]),
                s("D2_3_6", m, 1, &[(2, -1), (5, -1)]),
                s("D3_3_6", m, 1, &[(3, -1), (4, -1)]),
                s("D4_3_6", m, 0, &[(4, -1), (5, 1), (6, 1)]),
            ],
            Completeness::Complete,
        ),
        (3, 7) => (
            vec![
                s("D1_3_7", m, 2, &[(1, -1), (2, -1), (4, -1), (7, -1)]),
                s("D2_3_7", m, 2, &[(1, -1), (2, -1), (5, -1), (6, -1)]),
                s("D3_3_7", m, 2, &[(2, -1), (3, -1), (4, -1), (5, -1)]),
                s("D4_3_7", m, 2, &[(1, -1), (3, -1), (4, -1), (6, -1)]),
            ],
            Completeness::Complete,
        ),
        (3, 8) => (
            vec![
                s("D1_3_8", m, 2, &[(1, -1), (2, -1), (4, -1), (7, -1)]),
                s("D2_3_8", m, 2, &[(1, -1), (2, -1), (5, -1), (6, -1)]),
                s("D3_3_8", m, 2, &[(2, -1), (3, -1), (4, -1), (5, -1)]),
                s("D4_3_8", m, 2, &[(1, -1), (3, -1), (4, -1), (6, -1)]),
                s("D5_3_8", m, 1, &[(1, -1), (2, -1), (3, 1)]),
                s("D6_3_8", m, 1, &[(2, -1), (5, -1), (7, 1)]),
                s("D7_3_8", m, 1, &[(1, -1), (6, -1), (7, 1)]),
                s("D8_3_8", m, 1, &[(2, -1), (4, -1), (6, 1)]),
                s("D9_3_8", m, 1, &[(1, -1), (4, -1), (5, 1)]),
                s("D10_3_8", m, 1, &[(3, -1), (4, -1), (7, 1)]),
            ],
            Completeness::Partial,
        ),
        (4, m) if m >= 4 => (
            vec![s(
                &format!("D1_4_{m}"),
                m,
                2,
                &[(1, -1), (2, -1), (3, -1), (4, 1)],
            )],
            Completeness::Partial,
        ),
        _ => return Err(Error::UnsupportedTable { n, m }),
    };
    Ok(GPCTable {
        n,
        m,
        constraints,
        completeness,
    })
}

/// `D^μ` for every constraint, in table order.
pub fn evaluate_gpc(spectrum: &OccupationSpectrum, table: &GPCTable) -> Result<Vec<f64>> {
    if spectrum.m() != table.m {
        return Err(Error::DimensionMismatch {
            expected: table.m,
            found: spectrum.m(),
        });
    }
    table
        .constraints
        .iter()
        .map(|c| c.evaluate(&spectrum.values))
        .collect()
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum PinningStatus {
    Pinned,
    Quasipinned,
    Slack,
    Violated,
}

impl PinningStatus {
    pub fn as_str(self) -> &'static str {
        match self {
            PinningStatus::Pinned => "pinned",
            PinningStatus::Quasipinned => "quasipinned",
            PinningStatus::Slack => "slack",
            PinningStatus::Violated => "violated",
        }
    }
}

impl fmt::Display for PinningStatus {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PinningTolerances {
    pub pin: f64,
    pub quasi: f64,
    pub violation: f64,
}

impl Default for PinningTolerances {
    fn default() -> Self {
        Self {
            pin: 1e-9,
            quasi: 1e-3,
            violation: 1e-9,
        }
    }
}

impl PinningTolerances {
    pub fn classify(&self, value: f64) -> PinningStatus {
        if value < -self.violation {
            PinningStatus::Violated
        } else if value.abs() <= self.pin {
            PinningStatus::Pinned
        } else if value <= self.quasi {
            PinningStatus::Quasipinned
        } else {
            PinningStatus::Slack
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct ConstraintPinning {
    pub label: String,
    pub value: f64,
    pub status: PinningStatus,
    /// `floor(log10 D)` for positive `D`.
    pub scale: Option<i32>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct PinningReport {
    pub entries: Vec<ConstraintPinning>,
    pub completeness: Completeness,
    pub degeneracy_warning: bool,
}

impl PinningReport {
    pub fn any_violated(&self) -> bool {
        self.entries
            .iter()
            .any(|e| e.status == PinningStatus::Violated)
    }

    pub fn status(&self, mu: usize) -> PinningStatus {
        self.entries[mu - 1].status
    }

    pub fn value(&self, mu: usize) -> f64 {
        self.entries[mu - 1].value
    }

    /// 1-based indices of pinned constraints.
    pub fn pinned(&self) -> Vec<usize> {
        self.entries
            .iter()
            .enumerate()
            .filter(|(_, e)| e.status == PinningStatus::Pinned)
            .map(|(i, _)| i + 1)
            .collect()
    }
}

pub fn decimal_scale(value: f64) -> Option<i32> {
    (value > 0.0).then(|| value.log10().floor() as i32)
}

pub fn pinning_report(
    spectrum: &OccupationSpectrum,
    table: &GPCTable,
    tolerances: &PinningTolerances,
    degeneracy_warning: bool,
) -> Result<PinningReport> {
    let values = evaluate_gpc(spectrum, table)?;
    let entries = table
        .constraints
        .iter()
        .zip(values)
        .map(|(c, value)| ConstraintPinning {
            label: c.label.clone(),
            value,
            status: tolerances.classify(value),
            scale: decimal_scale(value),
        })
        .collect();
    Ok(PinningReport {
        entries,
        completeness: table.completeness,
        degeneracy_warning,
    })
}

pub fn selection_eigenvalue(constraint: &GPConstraint, det: &SlaterDeterminant) -> i64 {
    constraint.selection_eigenvalue(det)
}

fn check_ranks(constraints: &[GPConstraint], m: usize) -> Result<()> {
    for c in constraints {
        if c.m() != m {
            return Err(Error::RankMismatch {
                expected: m,
                found: c.m(),
            });
        }
    }
    Ok(())
}

/// Determinants in the common kernel of the selection operators.
pub fn effective_configurations(
    constraints: &[GPConstraint],
    basis: &BasisSpec,
) -> Result<Vec<SlaterDeterminant>> {
    check_ranks(constraints, basis.m())?;
    Ok(filter_effective(constraints, enumerate_determinants(basis)))
}

/// As [`effective_configurations`], restricted to a fixed-S_z sector.
pub fn effective_configurations_in_sector(
    constraints: &[GPConstraint],
    basis: &BasisSpec,
    twice_sz: i32,
) -> Result<Vec<SlaterDeterminant>> {
    check_ranks(constraints, basis.m())?;
    Ok(filter_effective(
        constraints,
        enumerate_sector(basis, twice_sz)?,
    ))
}

fn filter_effective(
    constraints: &[GPConstraint],
    dets: Vec<SlaterDeterminant>,
) -> Vec<SlaterDeterminant> {
    dets.into_iter()
        .filter(|d| constraints.iter().all(|c| c.selection_eigenvalue(d) == 0))
        .collect()
}

/// A certificate `t·L = Σ c_μ D_μ + Σ w_i O_i + λ (Σ n_i − n)` on the
/// `n_m = 0` slice, with `O_i = n_i − n_{i+1}` and `O_{m−1} = n_{m−1}` the
/// ordering inequalities.
#[derive(Debug, Clone, PartialEq)]
pub struct Derivation {
    pub target: GPConstraint,
    pub certified: bool,
    pub multiple: i64,
    /// `(label, coefficient)` for each high-rank constraint used.
    pub combination: Vec<(String, i64)>,
    /// `(i, w_i)` for the ordering inequalities used (1-based `i`).
    pub ordering: Vec<(usize, i64)>,
    pub sum_rule_multiplier: i64,
}

impl fmt::Display for Derivation {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if !self.certified {
            return write!(f, "{}: not derived", self.target.label);
        }
        let mut parts: Vec<String> = self
            .combination
            .iter()
            .map(|(l, c)| {
                if *c == 1 {
                    l.clone()
                } else {
                    format!("{c}*{l}")
                }
            })
            .collect();
        parts.extend(self.ordering.iter().map(|(i, w)| {
            let name = format!("(n{i} - n{})", i + 1);
            if *w == 1 {
                name
            } else {
                format!("{w}*{name}")
            }
        }));
        let lhs = if self.multiple == 1 {
            self.target.label.clone()
        } else {
            format!("{}*{}", self.multiple, self.target.label)
        };
        write!(
            f,
            "{lhs} = {} (sum rule x{})",
            parts.join(" + "),
            self.sum_rule_multiplier
        )
    }
}

const MAX_COEFF: i64 = 2;
const MAX_MULTIPLE: i64 = 2;
const MAX_SEARCH_GENERATORS: usize = 12;

/// `(t, c, w, λ)` of a found certificate.
type Certificate = (i64, Vec<i64>, Vec<i64>, i64);

fn certificate(
    target: &GPConstraint,
    generators: &[GPConstraint],
    n: usize,
) -> Option<Certificate> {
    let m = target.m();
    let k = generators.len();
    let total = (MAX_COEFF as usize + 1).pow(k as u32);
    let mut best: Option<(i64, Certificate)> = None;
    let mut coeffs = vec![0i64; k];
    for code in 0..total {
        let mut rem = code;
        for c in coeffs.iter_mut() {
            *c = (rem % (MAX_COEFF as usize + 1)) as i64;
            rem /= MAX_COEFF as usize + 1;
        }
        let s0: i64 = coeffs
            .iter()
            .zip(generators)
            .map(|(c, g)| c * g.kappa0)
            .sum();
        let s: Vec<i64> = (0..m)
            .map(|i| {
                coeffs
                    .iter()
                    .zip(generators)
                    .map(|(c, g)| c * g.kappa[i])
                    .sum()
            })
            .collect();
        for t in 1..=MAX_MULTIPLE {
            let num = s0 - t * target.kappa0;
            if num % n as i64 != 0 {
                continue;
            }
            let lambda = num / n as i64;
            // partial sums of the residual give the ordering weights
            let mut acc = 0i64;
            let mut weights = Vec::with_capacity(m);
            let mut ok = true;
            for (&k, &si) in target.kappa.iter().zip(&s) {
                acc += t * k - si - lambda;
                if !(0..=MAX_COEFF).contains(&acc) {
                    ok = false;
                    break;
                }
                weights.push(acc);
            }
            if !ok {
                continue;
            }
            let cost = coeffs.iter().sum::<i64>() + weights.iter().sum::<i64>() + t;
            if best.as_ref().is_none_or(|(c, _)| cost < *c) {
                best = Some((cost, (t, coeffs.clone(), weights, lambda)));
            }
        }
    }
    best.map(|(_, cert)| cert)
}

/// Tries to derive `target` (rank m) from `high` (rank m + 1) on `n_{m+1} = 0`.
pub fn derive_constraint(high: &GPCTable, target: &GPConstraint) -> Result<Derivation> {
    if high.m != target.m() + 1 {
        return Err(Error::RankMismatch {
            expected: high.m - 1,
            found: target.m(),
        });
    }
    let generators: Vec<GPConstraint> = high
        .constraints
        .iter()
        .map(GPConstraint::drop_last)
        .collect();
    if generators.len() > MAX_SEARCH_GENERATORS {
        return Err(Error::InvalidParams(format!(
            "{} constraints exceed the search budget of {MAX_SEARCH_GENERATORS}",
            generators.len()
        )));
    }
    let found = certificate(target, &generators, high.n);
    Ok(match found {
        Some((multiple, coeffs, weights, lambda)) => Derivation {
            target: target.clone(),
            certified: true,
            multiple,
            combination: generators
                .iter()
                .zip(&coeffs)
                .filter(|(_, &c)| c != 0)
                .map(|(g, &c)| (g.label.clone(), c))
                .collect(),
            ordering: weights
                .iter()
                .enumerate()
                .filter(|(_, &w)| w != 0)
                .map(|(i, &w)| (i + 1, w))
                .collect(),
            sum_rule_multiplier: lambda,
        },
        None => Derivation {
            target: target.clone(),
            certified: false,
            multiple: 0,
            combination: Vec::new(),
            ordering: Vec::new(),
            sum_rule_multiplier: 0,
        },
    })
}

/// Derivation attempt for every constraint of `low` from `high`.
pub fn check_rank_consistency(high: &GPCTable, low: &GPCTable) -> Result<Vec<Derivation>> {
    if high.m != low.m + 1 || high.n != low.n {
        return Err(Error::RankMismatch {
            expected: high.m - 1,
            found: low.m,
        });
    }
    low.constraints
        .iter()
        .map(|c| derive_constraint(high, c))
        .collect()
}

/// `1 + n3 − n1 − n2`, which vanishes when D1 and D2 of (3,7) are both saturated.
pub fn joint_saturation_implies_bd(spectrum: &OccupationSpectrum) -> f64 {
    1.0 + spectrum.n(3) - spectrum.n(1) - spectrum.n(2)
}

/// `|D1| + |D2| + |Σ n_i − 3|` for a rank-7 spectrum; bounds
/// [`joint_saturation_implies_bd`] since `1 + n3 − n1 − n2 = D1 + D2 + Σ n_i − 3`.
pub fn joint_saturation_bound(spectrum: &OccupationSpectrum) -> Result<f64> {
    let table = builtin_table(3, 7)?;
    let d = evaluate_gpc(spectrum, &table)?;
    Ok(d[0].abs() + d[1].abs() + (spectrum.sum() - 3.0).abs())
}

/// Parses `label kappa0 kappa1 ... kappam` lines; `#` starts a comment.
pub fn parse_constraints(text: &str, m: usize) -> Result<Vec<GPConstraint>> {
    let mut out = Vec::new();
    for (idx, raw) in text.lines().enumerate() {
        let line = raw.split('#').next().unwrap_or("").trim();
        if line.is_empty() {
            continue;
        }
        let fields: Vec<&str> = line.split_whitespace().collect();
        if fields.len() != m + 2 {
            return Err(Error::Parse {
                line: idx + 1,
                message: format!("expected {} fields, found {}", m + 2, fields.len()),
            });
        }
        let ints = fields[1..]
            .iter()
            .map(|f| {
                f.parse::<i64>().map_err(|_| Error::Parse {
                    line: idx + 1,
                    message: format!("{f:?} is not an integer"),
                })
            })
            .collect::<Result<Vec<_>>>()?;
        out.push(GPConstraint::new(fields[0], ints[0], ints[1..].to_vec()));
    }
    Ok(out)
}

pub fn format_constraints(constraints: &[GPConstraint]) -> String {
    let mut out = String::new();
    for c in constraints {
        out.push_str(&c.label);
        out.push(' ');
        out.push_str(&c.kappa0.to_string());
        for k in &c.kappa {
            out.push(' ');
            out.push_str(&k.to_string());
        }
        out.push('\n');
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;

    fn det(o: &[usize]) -> SlaterDeterminant {
        SlaterDeterminant::new(o).unwrap()
    }

    fn spectrum(v: &[f64]) -> OccupationSpectrum {
        OccupationSpectrum::from_unsorted(v)
    }

    #[test]
    fn table_shapes() {
        let t = builtin_table(3, 6).unwrap();
        assert_eq!(t.len(), 4);
        assert_eq!(t.completeness, Completeness::Complete);
        assert_eq!(t.constraints[3].kappa0, 0);
        assert_eq!(t.constraints[3].kappa, vec![0, 0, 0, -1, 1, 1]);

        let t = builtin_table(3, 7).unwrap();
        assert_eq!(t.len(), 4);
        assert_eq!(t.constraints[1].kappa0, 2);
        assert_eq!(t.constraints[1].kappa, vec![-1, -1, 0, 0, -1, -1, 0]);

        let t = builtin_table(3, 8).unwrap();
        assert_eq!(t.len(), 10);
        assert_eq!(t.completeness, Completeness::Partial);
        assert_eq!(t.constraints[4].kappa0, 1);
        assert_eq!(t.constraints[4].kappa, vec![-1, -1, 1, 0, 0, 0, 0, 0]);

        let t = builtin_table(4, 8).unwrap();
        assert_eq!(t.len(), 1);
        assert_eq!(t.constraints[0].kappa, vec![-1, -1, -1, 1, 0, 0, 0, 0]);
        assert_eq!(t.constraints[0].kappa0, 2);

        assert!(matches!(
            builtin_table(3, 9),
            Err(Error::UnsupportedTable { .. })
        ));
        assert!(builtin_table(2, 6).is_err());
    }

    #[test]
    fn rendering() {
        let t = builtin_table(3, 7).unwrap();
        assert_eq!(
            t.constraints[0].to_string(),
            "D1_3_7: 2 - n1 - n2 - n4 - n7 >= 0"
        );
        let t = builtin_table(3, 6).unwrap();
        assert_eq!(t.constraints[3].to_string(), "D4_3_6: -n4 + n5 + n6 >= 0");
    }

    #[test]
    fn single_determinant_is_fully_pinned() {
        let t = builtin_table(3, 6).unwrap();
        let s = spectrum(&[1.0, 1.0, 1.0, 0.0, 0.0, 0.0]);
        assert_eq!(evaluate_gpc(&s, &t).unwrap(), vec![0.0; 4]);
        let r = pinning_report(&s, &t, &PinningTolerances::default(), false).unwrap();
        assert_eq!(r.pinned(), vec![1, 2, 3, 4]);
        assert!(r.entries.iter().all(|e| e.scale.is_none()));
    }

    #[test]
    fn length_mismatch() {
        let t = builtin_table(3, 6).unwrap();
        assert!(evaluate_gpc(&spectrum(&[1.0, 1.0, 1.0]), &t).is_err());
    }

    #[test]
    fn infeasible_is_violated() {
        let t = builtin_table(3, 6).unwrap();
        let s = spectrum(&[1.1, 0.95, 0.9, 0.05, 0.0, 0.0]);
        let r = pinning_report(&s, &t, &PinningTolerances::default(), false).unwrap();
        assert_eq!(r.status(1), PinningStatus::Violated);
        assert!(r.any_violated());
    }

    #[test]
    fn classification_boundaries() {
        let tol = PinningTolerances::default();
        assert_eq!(tol.classify(1e-9), PinningStatus::Pinned);
        assert_eq!(tol.classify(-1e-9), PinningStatus::Pinned);
        assert_eq!(tol.classify(-2e-9), PinningStatus::Violated);
        assert_eq!(tol.classify(2e-9), PinningStatus::Quasipinned);
        assert_eq!(tol.classify(1e-3), PinningStatus::Quasipinned);
        assert_eq!(tol.classify(1.1e-3), PinningStatus::Slack);
        let loose = PinningTolerances {
            violation: 1e-6,
            ..tol
        };
        assert_eq!(loose.classify(-1e-7), PinningStatus::Quasipinned);
        assert_eq!(decimal_scale(2.41e-6), Some(-6));
        assert_eq!(decimal_scale(0.0), None);
    }

    #[test]
    fn rank_eight_selection_values() {
        let t = builtin_table(3, 8).unwrap();
        let d5 = &t.constraints[4];
        assert_eq!(selection_eigenvalue(d5, &det(&[1, 4, 5])), 0);
        assert_eq!(selection_eigenvalue(d5, &det(&[3, 4, 7])), 2);
        assert_eq!(selection_eigenvalue(d5, &det(&[1, 2, 3])), 0);
    }

    #[test]
    fn rank_six_kernels() {
        let t = builtin_table(3, 6).unwrap();
        let b = BasisSpec::new(3, 6).unwrap();
        let all = effective_configurations(&t.constraints, &b).unwrap();
        assert_eq!(all, vec![det(&[1, 2, 3]), det(&[1, 4, 5]), det(&[2, 4, 6])]);
        let pairs = effective_configurations(&t.constraints[..3], &b).unwrap();
        assert_eq!(pairs.len(), 8);
    }

    #[test]
    fn rank_mismatch_is_rejected() {
        let t = builtin_table(3, 6).unwrap();
        let b = BasisSpec::new(3, 7).unwrap();
        assert!(matches!(
            effective_configurations(&t.constraints, &b),
            Err(Error::RankMismatch { .. })
        ));
    }

    #[test]
    fn select_validates_indices() {
        let t = builtin_table(3, 6).unwrap();
        assert!(t.select(&[0]).is_err());
        assert!(t.select(&[5]).is_err());
        assert_eq!(t.select(&[4]).unwrap()[0].label, "D4_3_6");
    }

    #[test]
    fn joint_saturation_identity() {
        // D1 = D2 = 0 and Σ = 3
        let s = OccupationSpectrum {
            values: vec![0.95, 0.9, 0.85, 0.1, 0.1, 0.05, 0.05],
            permutation: (1..=7).collect(),
        };
        let t = builtin_table(3, 7).unwrap();
        let d = evaluate_gpc(&s, &t).unwrap();
        assert!(d[0].abs() < 1e-15 && d[1].abs() < 1e-15);
        assert!(joint_saturation_implies_bd(&s).abs() < 1e-15);
    }

    #[test]
    fn constraint_file_round_trip() {
        let t = builtin_table(3, 7).unwrap();
        let text = format!("# rank seven\n{}", format_constraints(&t.constraints));
        let parsed = parse_constraints(&text, 7).unwrap();
        assert_eq!(parsed, t.constraints);
    }

    #[test]
    fn constraint_file_errors() {
        assert!(matches!(
            parse_constraints("A 1 -1 -1", 3),
            Err(Error::Parse { line: 1, .. })
        ));
        assert!(matches!(
            parse_constraints("\nA 1 -1 x 0", 3),
            Err(Error::Parse { line: 2, .. })
        ));
        let ok = parse_constraints("A 1 -1 0 0 # pauli\n", 3).unwrap();
        assert_eq!(ok[0].kappa, vec![-1, 0, 0]);
    }

    #[test]
    fn pauli_bound_from_rank_seven() {
        let high = builtin_table(3, 7).unwrap();
        let pauli = GPConstraint::sparse("pauli", 6, 1, &[(1, -1)]);
        let d = derive_constraint(&high, &pauli).unwrap();
        assert!(d.certified, "{d}");
    }

    #[test]
    fn underivable_target() {
        // n1 <= 1/3 style nonsense: 1 - 3 n1 >= 0 cannot follow
        let high = builtin_table(3, 7).unwrap();
        let bogus = GPConstraint::sparse("bogus", 6, 1, &[(1, -3)]);
        assert!(!derive_constraint(&high, &bogus).unwrap().certified);
    }
}
