//! Pinned three-electron wavefunctions and the odd-excitation check.
//!
//! All amplitudes are attached to operator strings acting on `|123>`:
//! `c_1jk a†_j a_2 a†_k a_3 |123>` and `c_j2k a†_j a_1 a†_k a_3 |123>`, so the
//! only sign convention in play is the one in [`crate::fock`].

use std::collections::BTreeMap;

use num_complex::Complex64;

use crate::error::{Error, Result};
use crate::fock::{BasisSpec, Ladder, SlaterDeterminant};
use crate::rdm::{self, CIVector};

pub const PARAM_NORM_TOL: f64 = 1e-12;

fn check_norm(values: &[Complex64]) -> Result<()> {
    let norm: f64 = values.iter().map(|c| c.norm_sqr()).sum();
    if (norm - 1.0).abs() > PARAM_NORM_TOL {
        return Err(Error::NotNormalized(norm));
    }
    Ok(())
}

/// `a|123> + b|145> + c|246>` on rank six.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct BDAnsatzParams {
    pub a: Complex64,
    pub b: Complex64,
    pub c: Complex64,
}

impl BDAnsatzParams {
    pub fn new(a: Complex64, b: Complex64, c: Complex64) -> Result<Self> {
        check_norm(&[a, b, c])?;
        Ok(Self { a, b, c })
    }

    /// `|a|² ≥ |b|² + |c|²` and `|b|² ≥ |c|²`: the labels of the closed form
    /// then follow the descending order.
    pub fn ordering_satisfied(&self) -> bool {
        let (a, b, c) = (self.a.norm_sqr(), self.b.norm_sqr(), self.c.norm_sqr());
        a >= b + c && b >= c
    }

    /// `(n1, ..., n6)` with orbital labels as in the ansatz.
    pub fn closed_form_occupations(&self) -> [f64; 6] {
        let (a, b, c) = (self.a.norm_sqr(), self.b.norm_sqr(), self.c.norm_sqr());
        [a + b, a + c, a, b + c, b, c]
    }
}

/// Which fourth determinant completes the rank-seven ansatz.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum GordianoVariant {
    /// `d|167>`
    #[default]
    Orbitals167,
    /// `d|257>`
    Orbitals257,
}

/// `a|123> + b|145> + c|246> + d|167>` (or `d|257>`) on rank seven.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct GordianoParams {
    pub a: Complex64,
    pub b: Complex64,
    pub c: Complex64,
    pub d: Complex64,
    pub variant: GordianoVariant,
}

impl GordianoParams {
    pub fn new(
        a: Complex64,
        b: Complex64,
        c: Complex64,
        d: Complex64,
        variant: GordianoVariant,
    ) -> Result<Self> {
        check_norm(&[a, b, c, d])?;
        Ok(Self {
            a,
            b,
            c,
            d,
            variant,
        })
    }

    pub fn ordering_satisfied(&self) -> bool {
        let n = self.closed_form_occupations();
        n.windows(2).all(|w| w[0] >= w[1])
    }

    pub fn closed_form_occupations(&self) -> [f64; 7] {
        let (a, b, c, d) = (
            self.a.norm_sqr(),
            self.b.norm_sqr(),
            self.c.norm_sqr(),
            self.d.norm_sqr(),
        );
        match self.variant {
            GordianoVariant::Orbitals167 => [a + b + d, a + c, a, b + c, b, c + d, d],
            GordianoVariant::Orbitals257 => [a + b, a + c + d, a, b + c, b + d, c, d],
        }
    }
}

/// Amplitudes of the general pinned ansatz on rank `m ≥ 6`.
#[derive(Debug, Clone, PartialEq)]
pub struct PinnedGeneralParams {
    pub m: usize,
    pub c123: Complex64,
    /// `c_1jk`, keyed by `(j, k)` with `4 ≤ j < k ≤ m`.
    pub c1: BTreeMap<(usize, usize), Complex64>,
    /// `c_j2k`, keyed by `(j, k)` with `4 ≤ j < k ≤ m`.
    pub c2: BTreeMap<(usize, usize), Complex64>,
}

impl PinnedGeneralParams {
    pub fn new(
        m: usize,
        c123: Complex64,
        c1: BTreeMap<(usize, usize), Complex64>,
        c2: BTreeMap<(usize, usize), Complex64>,
    ) -> Result<Self> {
        if m < 6 {
            return Err(Error::InvalidParams(format!("rank {m} below 6")));
        }
        for &(j, k) in c1.keys().chain(c2.keys()) {
            if !(4 <= j && j < k && k <= m) {
                return Err(Error::InvalidParams(format!(
                    "pair ({j}, {k}) outside 4 <= j < k <= {m}"
                )));
            }
        }
        let all: Vec<Complex64> = std::iter::once(c123)
            .chain(c1.values().copied())
            .chain(c2.values().copied())
            .collect();
        check_norm(&all)?;
        Ok(Self { m, c123, c1, c2 })
    }

    /// All index pairs `4 ≤ j < k ≤ m`.
    pub fn pairs(m: usize) -> Vec<(usize, usize)> {
        (4..=m)
            .flat_map(|j| ((j + 1)..=m).map(move |k| (j, k)))
            .collect()
    }
}

fn reference() -> SlaterDeterminant {
    SlaterDeterminant::new(&[1, 2, 3]).expect("valid")
}

/// Adds `c · a†_j a_h a†_k a_3 |123>`, `h` being the vacated orbital 1 or 2.
fn add_double(psi: &mut CIVector, c: Complex64, j: usize, hole: usize, k: usize) -> Result<()> {
    let out = reference().apply_string(&[
        Ladder::Create(j),
        Ladder::Annihilate(hole),
        Ladder::Create(k),
        Ladder::Annihilate(3),
    ]);
    let det = out.det.ok_or_else(|| {
        Error::InvalidParams(format!("a†_{j} a_{hole} a†_{k} a_3 annihilates |123>"))
    })?;
    psi.add(det, c * f64::from(out.sign))
}

pub fn build_pinned_general(params: &PinnedGeneralParams) -> Result<CIVector> {
    let basis = BasisSpec::new(3, params.m)?;
    let mut psi = CIVector::new(basis);
    psi.add(reference(), params.c123)?;
    for (&(j, k), &c) in &params.c1 {
        add_double(&mut psi, c, j, 2, k)?;
    }
    for (&(j, k), &c) in &params.c2 {
        add_double(&mut psi, c, j, 1, k)?;
    }
    Ok(psi)
}

pub fn build_bd_state(params: &BDAnsatzParams) -> Result<CIVector> {
    let general = PinnedGeneralParams {
        m: 6,
        c123: params.a,
        c1: BTreeMap::from([((4, 5), params.b)]),
        c2: BTreeMap::from([((4, 6), params.c)]),
    };
    build_pinned_general(&general)
}

pub fn build_gordiano_state(params: &GordianoParams) -> Result<CIVector> {
    let mut c1 = BTreeMap::from([((4, 5), params.b)]);
    let mut c2 = BTreeMap::from([((4, 6), params.c)]);
    match params.variant {
        GordianoVariant::Orbitals167 => {
            c1.insert((6, 7), params.d);
        }
        GordianoVariant::Orbitals257 => {
            c2.insert((5, 7), params.d);
        }
    }
    build_pinned_general(&PinnedGeneralParams {
        m: 7,
        c123: params.a,
        c1,
        c2,
    })
}

#[derive(Debug, Clone, PartialEq)]
pub struct OddSuppressionReport {
    /// `1 + n3 − n1 − n2` on the descending spectrum.
    pub bd_residual: f64,
    /// Weight of odd excitations of `{1,2,3}` in the natural-orbital basis.
    pub odd_norm: f64,
    /// Degenerate occupations among `n1..n4`.
    pub degenerate: bool,
    /// `Some(odd_norm ≤ tol)` when the residual is within `tol` and the
    /// spectrum is nondegenerate; otherwise no claim is made.
    pub theorem_holds: Option<bool>,
    pub occupations: Vec<f64>,
    /// The state expressed in its natural orbitals.
    pub natural: CIVector,
}

/// Rotates `psi` to natural orbitals and measures the odd-excitation weight.
pub fn verify_odd_suppression(psi: &CIVector, tol: f64) -> Result<OddSuppressionReport> {
    verify_odd_suppression_with(psi, tol, rdm::DEGENERACY_TOL)
}

pub fn verify_odd_suppression_with(
    psi: &CIVector,
    tol: f64,
    degeneracy_tol: f64,
) -> Result<OddSuppressionReport> {
    if psi.basis().n() != 3 {
        return Err(Error::ElectronCountMismatch {
            expected: 3,
            found: psi.basis().n(),
        });
    }
    let gamma = rdm::compute_1rdm(psi)?;
    let frame = rdm::diagonalize(&gamma, degeneracy_tol)?;
    let natural = rdm::rotate_to_natural_basis(psi, &frame)?;
    let n = &frame.spectrum;
    let bd_residual = 1.0 + n.n(3) - n.n(1) - n.n(2);
    let norms = natural.excitation_norms();
    let odd_norm = norms[1] + norms[3];
    let degenerate = (1..=3).any(|i| frame.degenerate_after(i));
    let theorem_holds = (!degenerate && bd_residual.abs() <= tol).then_some(odd_norm <= tol);
    Ok(OddSuppressionReport {
        bd_residual,
        odd_norm,
        degenerate,
        theorem_holds,
        occupations: n.values.clone(),
        natural,
    })
}

/// Amplitude magnitudes forbidden by a saturated `1 + n3 = n1 + n2`:
/// determinants `{1,2,x}` with `x ≠ 3`, and those containing 3 without both 1 and 2.
pub fn forbidden_amplitude(psi_natural: &CIVector) -> f64 {
    psi_natural
        .terms()
        .filter(|(d, _)| {
            let (has1, has2, has3) = (d.contains(1), d.contains(2), d.contains(3));
            (has1 && has2 && !has3) || (has3 && !(has1 && has2))
        })
        .map(|(_, c)| c.norm())
        .fold(0.0, f64::max)
}
