//! CI vectors, one-body reduced density matrices and natural orbitals.

use std::collections::BTreeMap;

use num_complex::Complex64;

use crate::error::{Error, Result};
use crate::fock::{enumerate_determinants, BasisSpec, SlaterDeterminant};
use crate::linalg::{self, CMatrix};

/// Tolerance on `|Σ|c|² - 1|` accepted by [`compute_1rdm`].
pub const NORM_TOL: f64 = 1e-10;
pub const DEGENERACY_TOL: f64 = 1e-10;

/// Complex amplitudes over the determinants of a fixed basis.
#[derive(Debug, Clone, PartialEq)]
pub struct CIVector {
    basis: BasisSpec,
    amplitudes: BTreeMap<SlaterDeterminant, Complex64>,
}

impl CIVector {
    pub fn new(basis: BasisSpec) -> Self {
        Self {
            basis,
            amplitudes: BTreeMap::new(),
        }
    }

    /// Builds a vector from `(determinant, amplitude)` pairs; duplicates are an error.
    pub fn from_terms<I>(basis: BasisSpec, terms: I) -> Result<Self>
    where
        I: IntoIterator<Item = (SlaterDeterminant, Complex64)>,
    {
        let mut psi = Self::new(basis);
        for (det, c) in terms {
            psi.basis.check(&det)?;
            if psi.amplitudes.insert(det, c).is_some() {
                return Err(Error::DuplicateDeterminant(det.to_string()));
            }
        }
        Ok(psi)
    }

    /// Single determinant with unit amplitude.
    pub fn determinant(basis: BasisSpec, det: SlaterDeterminant) -> Result<Self> {
        Self::from_terms(basis, [(det, Complex64::new(1.0, 0.0))])
    }

    /// Amplitudes in [`enumerate_determinants`] order.
    pub fn from_dense(
        basis: BasisSpec,
        dets: &[SlaterDeterminant],
        values: &[Complex64],
    ) -> Result<Self> {
        if dets.len() != values.len() {
            return Err(Error::DimensionMismatch {
                expected: dets.len(),
                found: values.len(),
            });
        }
        Self::from_terms(basis, dets.iter().copied().zip(values.iter().copied()))
    }

    pub fn basis(&self) -> &BasisSpec {
        &self.basis
    }

    pub fn get(&self, det: &SlaterDeterminant) -> Complex64 {
        self.amplitudes.get(det).copied().unwrap_or_default()
    }

    /// Adds `c` to the amplitude of `det`.
    pub fn add(&mut self, det: SlaterDeterminant, c: Complex64) -> Result<()> {
        self.basis.check(&det)?;
        *self.amplitudes.entry(det).or_default() += c;
        Ok(())
    }

    pub fn terms(&self) -> impl Iterator<Item = (&SlaterDeterminant, &Complex64)> {
        self.amplitudes.iter()
    }

    /// Determinants carrying a nonzero amplitude.
    pub fn support(&self) -> Vec<SlaterDeterminant> {
        self.amplitudes
            .iter()
            .filter(|(_, c)| c.norm_sqr() > 0.0)
            .map(|(d, _)| *d)
            .collect()
    }

    pub fn len(&self) -> usize {
        self.amplitudes.len()
    }

    pub fn is_empty(&self) -> bool {
        self.amplitudes.is_empty()
    }

    pub fn norm_sqr(&self) -> f64 {
        self.amplitudes.values().map(|c| c.norm_sqr()).sum()
    }

    pub fn is_normalized(&self, tol: f64) -> bool {
        (self.norm_sqr() - 1.0).abs() <= tol
    }

    pub fn normalize(&mut self) -> Result<()> {
        let norm = self.norm_sqr().sqrt();
        if norm == 0.0 {
            return Err(Error::NotNormalized(0.0));
        }
        for c in self.amplitudes.values_mut() {
            *c /= norm;
        }
        Ok(())
    }

    /// Multiplies every amplitude by `z`.
    pub fn scale(&mut self, z: Complex64) {
        for c in self.amplitudes.values_mut() {
            *c *= z;
        }
    }

    /// Dense amplitude vector in colexicographic determinant order.
    pub fn to_dense(&self) -> Vec<Complex64> {
        enumerate_determinants(&self.basis)
            .iter()
            .map(|d| self.get(d))
            .collect()
    }

    /// Norm squared of the components at each excitation order w.r.t. `{1..n}`.
    pub fn excitation_norms(&self) -> Vec<f64> {
        let reference = self.basis.reference();
        let mut norms = vec![0.0; self.basis.n() + 1];
        for (det, c) in &self.amplitudes {
            let k = det.excitation_order(&reference).expect("basis-checked");
            norms[k] += c.norm_sqr();
        }
        norms
    }

    /// `⟨self|other⟩`.
    pub fn overlap(&self, other: &CIVector) -> Complex64 {
        self.amplitudes
            .iter()
            .map(|(d, c)| c.conj() * other.get(d))
            .sum()
    }
}

/// `γ_pq = ⟨Ψ| a†_q a_p |Ψ⟩`, stored 0-based.
#[derive(Debug, Clone, PartialEq)]
pub struct OneBodyRDM {
    pub matrix: CMatrix,
}

impl OneBodyRDM {
    pub fn m(&self) -> usize {
        self.matrix.nrows()
    }

    pub fn trace(&self) -> f64 {
        (0..self.m()).map(|i| self.matrix[(i, i)].re).sum()
    }

    /// `γ_pp` for 1-based orbital `p`.
    pub fn occupation(&self, orbital: usize) -> f64 {
        self.matrix[(orbital - 1, orbital - 1)].re
    }

    pub fn diagonal(&self) -> Vec<f64> {
        (0..self.m()).map(|i| self.matrix[(i, i)].re).collect()
    }

    /// Largest off-diagonal magnitude.
    pub fn max_off_diagonal(&self) -> f64 {
        let m = self.m();
        let mut worst: f64 = 0.0;
        for i in 0..m {
            for j in 0..m {
                if i != j {
                    worst = worst.max(self.matrix[(i, j)].norm());
                }
            }
        }
        worst
    }

    pub fn hermiticity_defect(&self) -> f64 {
        linalg::hermiticity_defect(&self.matrix)
    }
}

/// Assembles the one-body reduced density matrix of a normalized vector.
pub fn compute_1rdm(psi: &CIVector) -> Result<OneBodyRDM> {
    let norm = psi.norm_sqr();
    if (norm - 1.0).abs() > NORM_TOL {
        return Err(Error::NotNormalized(norm));
    }
    let m = psi.basis().m();
    let mut gamma = CMatrix::zeros(m, m);
    for (det, &c) in psi.terms() {
        if c.norm_sqr() == 0.0 {
            continue;
        }
        for p in det.iter() {
            gamma[(p - 1, p - 1)] += Complex64::new(c.norm_sqr(), 0.0);
            for q in 1..=m {
                if det.contains(q) {
                    continue;
                }
                // a†_q a_p |det> = sign |target>
                let out = det.apply_excitation(q, p);
                if let Some(target) = out.det {
                    let ct = psi.get(&target);
                    if ct.norm_sqr() != 0.0 {
                        gamma[(p - 1, q - 1)] += ct.conj() * c * f64::from(out.sign);
                    }
                }
            }
        }
    }
    Ok(OneBodyRDM { matrix: gamma })
}

/// Natural occupation numbers in descending order.
#[derive(Debug, Clone, PartialEq)]
pub struct OccupationSpectrum {
    pub values: Vec<f64>,
    /// `permutation[i]` is the 1-based source slot of `values[i]`.
    pub permutation: Vec<usize>,
}

impl OccupationSpectrum {
    /// Sorts descending (stable); `permutation` records the original positions.
    pub fn from_unsorted(values: &[f64]) -> Self {
        let mut order: Vec<usize> = (0..values.len()).collect();
        order.sort_by(|&i, &j| values[j].total_cmp(&values[i]));
        Self {
            values: order.iter().map(|&i| values[i]).collect(),
            permutation: order.iter().map(|&i| i + 1).collect(),
        }
    }

    pub fn is_sorted(values: &[f64]) -> bool {
        values.windows(2).all(|w| w[0] >= w[1])
    }

    pub fn m(&self) -> usize {
        self.values.len()
    }

    pub fn sum(&self) -> f64 {
        self.values.iter().sum()
    }

    /// `n_i`, 1-based.
    pub fn n(&self, i: usize) -> f64 {
        self.values[i - 1]
    }

    /// Gap flags: entry `i` is set when `n_{i+1} - n_{i+2} < tol` (0-based).
    pub fn degeneracy_flags(&self, tol: f64) -> Vec<bool> {
        self.values.windows(2).map(|w| w[0] - w[1] < tol).collect()
    }
}

/// Natural orbitals (columns of `unitary`, descending occupation).
#[derive(Debug, Clone)]
pub struct NaturalOrbitalFrame {
    pub unitary: CMatrix,
    pub spectrum: OccupationSpectrum,
    pub degeneracy_flags: Vec<bool>,
}

impl NaturalOrbitalFrame {
    pub fn any_degenerate(&self) -> bool {
        self.degeneracy_flags.iter().any(|&f| f)
    }

    /// Whether `n_i` and `n_{i+1}` are flagged degenerate (1-based `i`).
    pub fn degenerate_after(&self, i: usize) -> bool {
        self.degeneracy_flags.get(i - 1).copied().unwrap_or(false)
    }
}

/// Spectral decomposition of γ with descending occupations.
pub fn diagonalize(gamma: &OneBodyRDM, degeneracy_tol: f64) -> Result<NaturalOrbitalFrame> {
    let eig =
        linalg::hermitian_jacobi(&gamma.matrix, linalg::JACOBI_TOL, linalg::JACOBI_MAX_SWEEPS)?;
    let m = gamma.m();
    // Jacobi leaves eigenvalue slot k attached to orbital k for already
    // diagonal input; recover that slot from the dominant component.
    let slots: Vec<f64> = eig.values.clone();
    let mut order: Vec<usize> = (0..m).collect();
    let dominant: Vec<usize> = (0..m)
        .map(|col| {
            let column = eig.vectors.column(col);
            let big = column.iter().map(|z| z.norm()).fold(0.0, f64::max);
            column
                .iter()
                .position(|z| z.norm() >= big - 1e-12 * big)
                .unwrap_or(0)
        })
        .collect();
    order.sort_by(|&i, &j| {
        slots[j]
            .total_cmp(&slots[i])
            .then(dominant[i].cmp(&dominant[j]))
    });
    let mut unitary = CMatrix::zeros(m, m);
    for (col, &src) in order.iter().enumerate() {
        unitary.set_column(col, &eig.vectors.column(src));
    }
    let spectrum = OccupationSpectrum {
        values: order.iter().map(|&i| slots[i]).collect(),
        permutation: order.iter().map(|&i| dominant[i] + 1).collect(),
    };
    let degeneracy_flags = spectrum.degeneracy_flags(degeneracy_tol);
    Ok(NaturalOrbitalFrame {
        unitary,
        spectrum,
        degeneracy_flags,
    })
}

/// Expresses `psi` in the orbital basis given by the columns of `u`:
/// `c'_I = Σ_P conj(det U[P, I]) c_P`.
pub fn rotate(psi: &CIVector, u: &CMatrix) -> Result<CIVector> {
    let m = psi.basis().m();
    if u.nrows() != m || u.ncols() != m {
        return Err(Error::DimensionMismatch {
            expected: m,
            found: u.nrows().max(u.ncols()),
        });
    }
    let defect = linalg::unitarity_defect(u);
    if defect > 1e-10 {
        return Err(Error::NotUnitary(defect));
    }
    let support: Vec<(Vec<usize>, Complex64)> = psi
        .terms()
        .filter(|(_, c)| c.norm_sqr() != 0.0)
        .map(|(d, c)| (d.iter().map(|p| p - 1).collect(), *c))
        .collect();
    let mut out = CIVector::new(psi.basis().clone());
    for target in enumerate_determinants(psi.basis()) {
        let cols: Vec<usize> = target.iter().map(|p| p - 1).collect();
        let c: Complex64 = support
            .iter()
            .map(|(rows, c)| linalg::minor(u, rows, &cols).conj() * c)
            .sum();
        if c.norm_sqr() != 0.0 {
            out.amplitudes.insert(target, c);
        }
    }
    Ok(out)
}

pub fn rotate_to_natural_basis(psi: &CIVector, frame: &NaturalOrbitalFrame) -> Result<CIVector> {
    rotate(psi, &frame.unitary)
}

/// `U† γ U`.
pub fn transform_rdm(gamma: &OneBodyRDM, u: &CMatrix) -> OneBodyRDM {
    OneBodyRDM {
        matrix: u.adjoint() * &gamma.matrix * u,
    }
}
