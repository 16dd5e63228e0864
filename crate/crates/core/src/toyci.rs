//! Full CI over the determinant basis for user-supplied integrals.
//!
//! The Hamiltonian is
//! `H = Σ h_pq a†_p a_q + ½ Σ V_pqrs a†_p a†_q a_s a_r`
//! with `V_pqrs = ⟨pq|V|rs⟩` in physicist order and 1-based indices.

use std::collections::HashMap;
use std::fmt::Write as _;

use num_complex::Complex64;
use rayon::prelude::*;

use crate::error::{Error, Result};
use crate::fock::{
    enumerate_determinants, enumerate_sector, BasisSpec, Ladder, SlaterDeterminant, Spin,
};
use crate::gpc::{pinning_report, GPCTable, PinningStatus, PinningTolerances};
use crate::linalg::{self, CMatrix};
use crate::rdm::{self, CIVector, OccupationSpectrum};

/// Largest determinant space handled by the dense solver.
pub const MAX_DENSE_DIMENSION: usize = 5000;
pub const GROUND_DEGENERACY_TOL: f64 = 1e-10;

type Key = [usize; 4];

fn exchange([p, q, r, s]: Key) -> Key {
    [q, p, s, r]
}

fn hermitian([p, q, r, s]: Key) -> Key {
    [r, s, p, q]
}

#[derive(Debug, Clone, PartialEq)]
pub struct Hamiltonian {
    basis: BasisSpec,
    one_body: CMatrix,
    two_body: HashMap<Key, Complex64>,
}

impl Hamiltonian {
    /// Builds a Hamiltonian and symmetrizes it.
    ///
    /// Each symmetry orbit `{pqrs, qpsr, (rspq)*, (srqp)*}` takes the mean of
    /// the values implied by its listed members, so listing one member fills
    /// the orbit. `h` is symmetrized the same way: `h_qp` defaults to `h_pq*`.
    pub fn new<I>(basis: BasisSpec, one_body: CMatrix, two_body: I) -> Result<Self>
    where
        I: IntoIterator<Item = (Key, Complex64)>,
    {
        let m = basis.m();
        if one_body.nrows() != m || one_body.ncols() != m {
            return Err(Error::DimensionMismatch {
                expected: m,
                found: one_body.nrows(),
            });
        }
        let mut raw: HashMap<Key, Complex64> = HashMap::new();
        for (key, v) in two_body {
            if let Some(&bad) = key.iter().find(|&&p| p == 0 || p > m) {
                return Err(Error::OrbitalOutOfRange { orbital: bad, m });
            }
            *raw.entry(key).or_default() += v;
        }
        Ok(Self {
            basis,
            one_body: symmetrize_one_body(&one_body),
            two_body: symmetrize_two_body(&raw),
        })
    }

    /// One-body only.
    pub fn non_interacting(basis: BasisSpec, one_body: CMatrix) -> Result<Self> {
        Self::new(basis, one_body, std::iter::empty())
    }

    pub fn basis(&self) -> &BasisSpec {
        &self.basis
    }

    pub fn one_body(&self) -> &CMatrix {
        &self.one_body
    }

    /// `h_pq`, 1-based.
    pub fn h(&self, p: usize, q: usize) -> Complex64 {
        self.one_body[(p - 1, q - 1)]
    }

    /// `⟨pq|V|rs⟩`, 1-based.
    pub fn v(&self, p: usize, q: usize, r: usize, s: usize) -> Complex64 {
        self.two_body
            .get(&[p, q, r, s])
            .copied()
            .unwrap_or_default()
    }

    /// `⟨pq||rs⟩ = ⟨pq|V|rs⟩ − ⟨pq|V|sr⟩`.
    pub fn antisymmetrized(&self, p: usize, q: usize, r: usize, s: usize) -> Complex64 {
        self.v(p, q, r, s) - self.v(p, q, s, r)
    }

    pub fn two_body_entries(&self) -> impl Iterator<Item = (&Key, &Complex64)> {
        self.two_body.iter()
    }

    /// `(1 − t) self + t other`.
    pub fn interpolate(&self, other: &Hamiltonian, t: f64) -> Result<Hamiltonian> {
        if self.basis.n() != other.basis.n() || self.basis.m() != other.basis.m() {
            return Err(Error::InvalidBasis(
                "interpolating between different bases".into(),
            ));
        }
        let one = &self.one_body * Complex64::new(1.0 - t, 0.0)
            + &other.one_body * Complex64::new(t, 0.0);
        let mut two: HashMap<Key, Complex64> = HashMap::new();
        for (k, v) in &self.two_body {
            *two.entry(*k).or_default() += v * (1.0 - t);
        }
        for (k, v) in &other.two_body {
            *two.entry(*k).or_default() += v * t;
        }
        Ok(Hamiltonian {
            basis: self.basis.clone(),
            one_body: one,
            two_body: two,
        })
    }

    /// Integrals in the orbital basis given by the columns of `u`.
    pub fn transform(&self, u: &CMatrix) -> Result<Hamiltonian> {
        let m = self.basis.m();
        if u.nrows() != m || u.ncols() != m {
            return Err(Error::DimensionMismatch {
                expected: m,
                found: u.nrows(),
            });
        }
        let one = u.adjoint() * &self.one_body * u;
        // quarter transformations over a dense m^4 tensor
        let idx = |a: usize, b: usize, c: usize, d: usize| ((a * m + b) * m + c) * m + d;
        let mut t = vec![Complex64::default(); m * m * m * m];
        for (&[p, q, r, s], &v) in &self.two_body {
            t[idx(p - 1, q - 1, r - 1, s - 1)] = v;
        }
        let mut next = vec![Complex64::default(); t.len()];
        // slot 0 and 1 take conj(U), slots 2 and 3 take U
        for slot in 0..4 {
            next.iter_mut().for_each(|z| *z = Complex64::default());
            for a in 0..m {
                for b in 0..m {
                    for c in 0..m {
                        for d in 0..m {
                            let v = t[idx(a, b, c, d)];
                            if v.norm_sqr() == 0.0 {
                                continue;
                            }
                            let old = [a, b, c, d][slot];
                            for new in 0..m {
                                let coeff = if slot < 2 {
                                    u[(old, new)].conj()
                                } else {
                                    u[(old, new)]
                                };
                                let mut key = [a, b, c, d];
                                key[slot] = new;
                                next[idx(key[0], key[1], key[2], key[3])] += coeff * v;
                            }
                        }
                    }
                }
            }
            std::mem::swap(&mut t, &mut next);
        }
        let mut two = HashMap::new();
        for a in 0..m {
            for b in 0..m {
                for c in 0..m {
                    for d in 0..m {
                        let v = t[idx(a, b, c, d)];
                        if v.norm_sqr() != 0.0 {
                            two.insert([a + 1, b + 1, c + 1, d + 1], v);
                        }
                    }
                }
            }
        }
        Ok(Hamiltonian {
            basis: self.basis.clone(),
            one_body: one,
            two_body: two,
        })
    }

    /// Text form readable by [`parse_hamiltonian`].
    pub fn to_text(&self) -> String {
        let m = self.basis.m();
        let mut out = format!("m {} n {}\n", m, self.basis.n());
        for p in 1..=m {
            for q in 1..=m {
                let v = self.h(p, q);
                if v.norm_sqr() != 0.0 {
                    let _ = writeln!(out, "h {p} {q} {:e} {:e}", v.re, v.im);
                }
            }
        }
        let mut keys: Vec<&Key> = self.two_body.keys().collect();
        keys.sort();
        for k in keys {
            let v = self.two_body[k];
            if v.norm_sqr() != 0.0 {
                let _ = writeln!(
                    out,
                    "V {} {} {} {} {:e} {:e}",
                    k[0], k[1], k[2], k[3], v.re, v.im
                );
            }
        }
        out
    }
}

fn symmetrize_one_body(h: &CMatrix) -> CMatrix {
    let m = h.nrows();
    let mut out = CMatrix::zeros(m, m);
    for p in 0..m {
        for q in 0..m {
            let a = h[(p, q)];
            let b = h[(q, p)].conj();
            out[(p, q)] = match (a.norm_sqr() != 0.0, b.norm_sqr() != 0.0) {
                (true, true) => (a + b) * 0.5,
                (true, false) => a,
                (false, true) => b,
                (false, false) => Complex64::default(),
            };
        }
        out[(p, p)] = Complex64::new(out[(p, p)].re, 0.0);
    }
    out
}

fn symmetrize_two_body(raw: &HashMap<Key, Complex64>) -> HashMap<Key, Complex64> {
    let mut implied: HashMap<Key, Vec<Complex64>> = HashMap::new();
    let mut done: std::collections::HashSet<Key> = std::collections::HashSet::new();
    let mut keys: Vec<&Key> = raw.keys().collect();
    keys.sort();
    for &k0 in keys {
        if done.contains(&k0) {
            continue;
        }
        let e = exchange(k0);
        let h = hermitian(k0);
        let b = exchange(h);
        let mut members = vec![k0, e, h, b];
        members.sort();
        members.dedup();
        // value at k0 implied by each listed member
        let mut votes = Vec::new();
        for &member in &members {
            if let Some(&v) = raw.get(&member) {
                if member == k0 || member == e {
                    votes.push(v);
                }
                if member == h || member == b {
                    votes.push(v.conj());
                }
            }
            done.insert(member);
        }
        let mean = votes.iter().sum::<Complex64>() / votes.len() as f64;
        for (key, val) in [(k0, mean), (e, mean), (h, mean.conj()), (b, mean.conj())] {
            implied.entry(key).or_default().push(val);
        }
    }
    implied
        .into_iter()
        .map(|(k, vals)| (k, vals.iter().sum::<Complex64>() / vals.len() as f64))
        .filter(|(_, v)| v.norm_sqr() != 0.0)
        .collect()
}

/// `⟨d1|H|d2⟩` by the Slater–Condon rules.
pub fn matrix_element(
    h: &Hamiltonian,
    d1: &SlaterDeterminant,
    d2: &SlaterDeterminant,
) -> Complex64 {
    let created = d1.difference(d2);
    let annihilated = d2.difference(d1);
    match created.len() {
        0 => {
            let occ = d1.orbitals();
            let mut e: Complex64 = occ.iter().map(|&i| h.h(i, i)).sum();
            for &i in &occ {
                for &j in &occ {
                    e += h.antisymmetrized(i, j, i, j) * 0.5;
                }
            }
            e
        }
        1 => {
            let (p, r) = (created[0], annihilated[0]);
            let out = d2.apply_excitation(p, r);
            let mut e = h.h(p, r);
            for j in d1.intersection(d2) {
                e += h.antisymmetrized(p, j, r, j);
            }
            e * out.phase()
        }
        2 => {
            let (p, q) = (created[0], created[1]);
            let (r, s) = (annihilated[0], annihilated[1]);
            let out = d2.apply_string(&[
                Ladder::Create(p),
                Ladder::Create(q),
                Ladder::Annihilate(s),
                Ladder::Annihilate(r),
            ]);
            h.antisymmetrized(p, q, r, s) * out.phase()
        }
        _ => Complex64::default(),
    }
}

pub fn hamiltonian_matrix(h: &Hamiltonian, dets: &[SlaterDeterminant]) -> CMatrix {
    let d = dets.len();
    let mut out = CMatrix::zeros(d, d);
    for i in 0..d {
        for j in i..d {
            let v = matrix_element(h, &dets[i], &dets[j]);
            out[(i, j)] = v;
            out[(j, i)] = v.conj();
        }
        out[(i, i)] = Complex64::new(out[(i, i)].re, 0.0);
    }
    out
}

/// `⟨ψ|H|ψ⟩`.
pub fn energy(h: &Hamiltonian, psi: &CIVector) -> f64 {
    let terms: Vec<(SlaterDeterminant, Complex64)> = psi
        .terms()
        .filter(|(_, c)| c.norm_sqr() != 0.0)
        .map(|(d, c)| (*d, *c))
        .collect();
    let mut e = Complex64::default();
    for (d1, c1) in &terms {
        for (d2, c2) in &terms {
            e += c1.conj() * matrix_element(h, d1, d2) * c2;
        }
    }
    e.re
}

/// Fixed-S_z subspace selector.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct SpinSector {
    pub labels: Vec<Spin>,
    pub twice_sz: i32,
}

fn sector_dets(h: &Hamiltonian, sector: Option<&SpinSector>) -> Result<Vec<SlaterDeterminant>> {
    let dets = match sector {
        None => enumerate_determinants(h.basis()),
        Some(s) => {
            let labelled = BasisSpec::with_spins(h.basis().n(), h.basis().m(), s.labels.clone())?;
            enumerate_sector(&labelled, s.twice_sz)?
        }
    };
    if dets.is_empty() {
        return Err(Error::EmptySector);
    }
    if dets.len() > MAX_DENSE_DIMENSION {
        return Err(Error::InvalidParams(format!(
            "{} determinants exceed the dense limit of {MAX_DENSE_DIMENSION}",
            dets.len()
        )));
    }
    Ok(dets)
}

#[derive(Debug, Clone)]
pub struct Eigenpair {
    pub energy: f64,
    pub state: CIVector,
}

#[derive(Debug, Clone)]
pub struct GroundState {
    pub energy: f64,
    pub state: CIVector,
    /// Gap to the next eigenvalue, if there is one.
    pub gap: Option<f64>,
    pub degenerate: bool,
}

/// The `k` lowest eigenpairs, ascending.
pub fn solve_lowest(
    h: &Hamiltonian,
    k: usize,
    sector: Option<&SpinSector>,
) -> Result<Vec<Eigenpair>> {
    let dets = sector_dets(h, sector)?;
    let matrix = hamiltonian_matrix(h, &dets);
    let eig = linalg::hermitian_jacobi(&matrix, linalg::JACOBI_TOL, linalg::JACOBI_MAX_SWEEPS)?;
    let basis = h.basis().without_spins();
    (0..k.min(dets.len()))
        .map(|col| {
            let values: Vec<Complex64> = eig.vectors.column(col).iter().copied().collect();
            let mut state = CIVector::from_dense(basis.clone(), &dets, &values)?;
            state.normalize()?;
            Ok(Eigenpair {
                energy: eig.values[col],
                state,
            })
        })
        .collect()
}

pub fn solve_ground(h: &Hamiltonian, sector: Option<&SpinSector>) -> Result<GroundState> {
    let mut pairs = solve_lowest(h, 2, sector)?;
    let gap = (pairs.len() > 1).then(|| pairs[1].energy - pairs[0].energy);
    let ground = pairs.swap_remove(0);
    Ok(GroundState {
        energy: ground.energy,
        state: ground.state,
        gap,
        degenerate: gap.is_some_and(|g| g < GROUND_DEGENERACY_TOL),
    })
}

#[derive(Debug, Clone)]
pub struct ScanPoint {
    pub energy: f64,
    pub spectrum: OccupationSpectrum,
    pub values: Vec<f64>,
    pub statuses: Vec<PinningStatus>,
    /// Degenerate ground state or degenerate occupations.
    pub degenerate: bool,
}

#[derive(Debug, Clone)]
pub struct ScanRow {
    pub param: f64,
    pub outcome: std::result::Result<ScanPoint, String>,
}

#[derive(Debug, Clone)]
pub struct ScanResult {
    pub m: usize,
    pub labels: Vec<String>,
    pub rows: Vec<ScanRow>,
}

fn scan_point(
    h: &Hamiltonian,
    table: &GPCTable,
    tolerances: &PinningTolerances,
) -> Result<ScanPoint> {
    let ground = solve_ground(h, None)?;
    let gamma = rdm::compute_1rdm(&ground.state)?;
    let frame = rdm::diagonalize(&gamma, rdm::DEGENERACY_TOL)?;
    let degenerate = ground.degenerate || frame.any_degenerate();
    let report = pinning_report(&frame.spectrum, table, tolerances, degenerate)?;
    Ok(ScanPoint {
        energy: ground.energy,
        spectrum: frame.spectrum,
        values: report.entries.iter().map(|e| e.value).collect(),
        statuses: report.entries.iter().map(|e| e.status).collect(),
        degenerate,
    })
}

/// Ground state → natural occupations → constraint values at every point.
/// Points are solved in parallel; failures are recorded per row.
pub fn scan(
    family: &[(f64, Hamiltonian)],
    table: &GPCTable,
    tolerances: &PinningTolerances,
) -> Result<ScanResult> {
    let Some((_, first)) = family.first() else {
        return Ok(ScanResult {
            m: table.m,
            labels: table.constraints.iter().map(|c| c.label.clone()).collect(),
            rows: Vec::new(),
        });
    };
    let (n, m) = (first.basis().n(), first.basis().m());
    for (_, h) in family {
        if h.basis().n() != n || h.basis().m() != m {
            return Err(Error::InvalidBasis("scan family mixes bases".into()));
        }
    }
    if table.m != m || table.n != n {
        return Err(Error::RankMismatch {
            expected: m,
            found: table.m,
        });
    }
    let mut rows: Vec<ScanRow> = family
        .par_iter()
        .map(|(param, h)| ScanRow {
            param: *param,
            outcome: scan_point(h, table, tolerances).map_err(|e| e.to_string()),
        })
        .collect();
    rows.sort_by(|a, b| a.param.total_cmp(&b.param));
    Ok(ScanResult {
        m,
        labels: table.constraints.iter().map(|c| c.label.clone()).collect(),
        rows,
    })
}

fn parse_err(line: usize, message: impl Into<String>) -> Error {
    Error::Parse {
        line,
        message: message.into(),
    }
}

fn field<T: std::str::FromStr>(tok: &str, line: usize) -> Result<T> {
    tok.parse()
        .map_err(|_| parse_err(line, format!("cannot parse {tok:?}")))
}

/// Reads `m <m> n <n>` followed by `h p q re im` and `V p q r s re im` lines.
pub fn parse_hamiltonian(text: &str) -> Result<Hamiltonian> {
    let mut basis: Option<BasisSpec> = None;
    let mut one: Option<CMatrix> = None;
    let mut two: Vec<(Key, Complex64)> = Vec::new();
    for (idx, raw) in text.lines().enumerate() {
        let line_no = idx + 1;
        let line = raw.split('#').next().unwrap_or("").trim();
        if line.is_empty() {
            continue;
        }
        let tok: Vec<&str> = line.split_whitespace().collect();
        match (tok[0], &basis) {
            ("m", None) => {
                if tok.len() != 4 || tok[2] != "n" {
                    return Err(parse_err(line_no, "header must read `m <m> n <n>`"));
                }
                let m: usize = field(tok[1], line_no)?;
                let n: usize = field(tok[3], line_no)?;
                let b = BasisSpec::new(n, m).map_err(|e| parse_err(line_no, e.to_string()))?;
                one = Some(CMatrix::zeros(m, m));
                basis = Some(b);
            }
            (_, None) => return Err(parse_err(line_no, "missing `m <m> n <n>` header")),
            ("h", Some(b)) => {
                if tok.len() != 5 {
                    return Err(parse_err(line_no, "expected `h p q re im`"));
                }
                let p: usize = field(tok[1], line_no)?;
                let q: usize = field(tok[2], line_no)?;
                for x in [p, q] {
                    if x == 0 || x > b.m() {
                        return Err(parse_err(
                            line_no,
                            format!("orbital {x} outside 1..={}", b.m()),
                        ));
                    }
                }
                let v = Complex64::new(field(tok[3], line_no)?, field(tok[4], line_no)?);
                one.as_mut().expect("header seen")[(p - 1, q - 1)] += v;
            }
            ("V", Some(b)) => {
                if tok.len() != 7 {
                    return Err(parse_err(line_no, "expected `V p q r s re im`"));
                }
                let mut key = [0usize; 4];
                for (slot, t) in key.iter_mut().zip(&tok[1..5]) {
                    *slot = field(t, line_no)?;
                    if *slot == 0 || *slot > b.m() {
                        return Err(parse_err(
                            line_no,
                            format!("orbital {slot} outside 1..={}", b.m()),
                        ));
                    }
                }
                let v = Complex64::new(field(tok[5], line_no)?, field(tok[6], line_no)?);
                two.push((key, v));
            }
            ("m", Some(_)) => return Err(parse_err(line_no, "duplicate header")),
            (other, Some(_)) => {
                return Err(parse_err(line_no, format!("unknown record {other:?}")))
            }
        }
    }
    let basis = basis.ok_or_else(|| parse_err(0, "empty Hamiltonian file"))?;
    Hamiltonian::new(basis, one.expect("header seen"), two)
}

/// Reads `param_value path` lines.
pub fn parse_manifest(text: &str) -> Result<Vec<(f64, String)>> {
    let mut out = Vec::new();
    for (idx, raw) in text.lines().enumerate() {
        let line = raw.split('#').next().unwrap_or("").trim();
        if line.is_empty() {
            continue;
        }
        let mut parts = line.splitn(2, char::is_whitespace);
        let param = parts.next().expect("non-empty");
        let path = parts
            .next()
            .map(str::trim)
            .filter(|p| !p.is_empty())
            .ok_or_else(|| parse_err(idx + 1, "expected `param_value path`"))?;
        out.push((field(param, idx + 1)?, path.to_string()));
    }
    Ok(out)
}
