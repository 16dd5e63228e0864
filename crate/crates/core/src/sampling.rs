//! Random states, unitaries and ansatz parameters for the test harnesses.

use std::collections::BTreeMap;

use num_complex::Complex64;
use rand::Rng;
use rand_distr::StandardNormal;

use crate::ansatz::{BDAnsatzParams, GordianoParams, GordianoVariant, PinnedGeneralParams};
use crate::error::Result;
use crate::fock::{enumerate_determinants, BasisSpec};
use crate::linalg::CMatrix;
use crate::rdm::CIVector;

pub fn complex_gaussian<R: Rng + ?Sized>(rng: &mut R) -> Complex64 {
    Complex64::new(rng.sample(StandardNormal), rng.sample(StandardNormal))
}

/// Haar-distributed-ish dense state: normalized complex Gaussian amplitudes.
pub fn random_civector<R: Rng + ?Sized>(basis: &BasisSpec, rng: &mut R) -> Result<CIVector> {
    let dets = enumerate_determinants(basis);
    let values: Vec<Complex64> = dets.iter().map(|_| complex_gaussian(rng)).collect();
    let mut psi = CIVector::from_dense(basis.clone(), &dets, &values)?;
    psi.normalize()?;
    Ok(psi)
}

/// Random unitary from Gram–Schmidt on a complex Gaussian matrix.
pub fn random_unitary<R: Rng + ?Sized>(m: usize, rng: &mut R) -> CMatrix {
    let mut u = CMatrix::from_fn(m, m, |_, _| complex_gaussian(rng));
    for j in 0..m {
        for _pass in 0..2 {
            for k in 0..j {
                let proj: Complex64 = (0..m).map(|i| u[(i, k)].conj() * u[(i, j)]).sum();
                for i in 0..m {
                    let sub = proj * u[(i, k)];
                    u[(i, j)] -= sub;
                }
            }
        }
        let norm = (0..m).map(|i| u[(i, j)].norm_sqr()).sum::<f64>().sqrt();
        for i in 0..m {
            u[(i, j)] /= norm;
        }
    }
    u
}

/// Random pinned-general parameters with `|c123|²` drawn from `[0.55, 0.95]`,
/// which keeps `n3 = |c123|²` third in the descending spectrum.
pub fn random_pinned_general<R: Rng + ?Sized>(
    m: usize,
    rng: &mut R,
) -> Result<PinnedGeneralParams> {
    let weight = rng.random_range(0.55..0.95);
    let pairs = PinnedGeneralParams::pairs(m);
    let mut c1: BTreeMap<(usize, usize), Complex64> =
        pairs.iter().map(|&p| (p, complex_gaussian(rng))).collect();
    let mut c2: BTreeMap<(usize, usize), Complex64> =
        pairs.iter().map(|&p| (p, complex_gaussian(rng))).collect();
    let rest: f64 = c1.values().chain(c2.values()).map(|c| c.norm_sqr()).sum();
    let scale = ((1.0 - weight) / rest).sqrt();
    for c in c1.values_mut().chain(c2.values_mut()) {
        *c *= scale;
    }
    let phase = complex_gaussian(rng);
    let c123 = phase / phase.norm() * weight.sqrt();
    // renormalize against rounding
    let all: f64 = c123.norm_sqr()
        + c1.values()
            .chain(c2.values())
            .map(|c| c.norm_sqr())
            .sum::<f64>();
    let fix = all.sqrt();
    for c in c1.values_mut().chain(c2.values_mut()) {
        *c /= fix;
    }
    PinnedGeneralParams::new(m, c123 / fix, c1, c2)
}

fn random_phase<R: Rng + ?Sized>(rng: &mut R) -> Complex64 {
    let z = complex_gaussian(rng);
    z / z.norm()
}

/// Weights `w` on the simplex, as `(w_1, ..., w_k)`.
fn simplex<R: Rng + ?Sized>(k: usize, rng: &mut R) -> Vec<f64> {
    let raw: Vec<f64> = (0..k)
        .map(|_| -rng.random::<f64>().max(1e-300).ln())
        .collect();
    let total: f64 = raw.iter().sum();
    raw.iter().map(|x| x / total).collect()
}

fn amplitudes<R: Rng + ?Sized>(weights: &[f64], rng: &mut R) -> Vec<Complex64> {
    let mut amps: Vec<Complex64> = weights
        .iter()
        .map(|w| random_phase(rng) * w.sqrt())
        .collect();
    let norm = amps.iter().map(|c| c.norm_sqr()).sum::<f64>().sqrt();
    for a in &mut amps {
        *a /= norm;
    }
    amps
}

/// Rank-six ansatz parameters satisfying the ordering conditions.
pub fn random_bd_params<R: Rng + ?Sized>(rng: &mut R) -> Result<BDAnsatzParams> {
    loop {
        let w = simplex(3, rng);
        if w[0] >= w[1] + w[2] && w[1] >= w[2] {
            let a = amplitudes(&w, rng);
            return BDAnsatzParams::new(a[0], a[1], a[2]);
        }
    }
}

/// Rank-seven ansatz parameters satisfying the ordering conditions.
pub fn random_gordiano_params<R: Rng + ?Sized>(
    variant: GordianoVariant,
    rng: &mut R,
) -> Result<GordianoParams> {
    loop {
        let w = simplex(4, rng);
        let a = amplitudes(&w, rng);
        let p = GordianoParams::new(a[0], a[1], a[2], a[3], variant)?;
        if p.ordering_satisfied() {
            return Ok(p);
        }
    }
}
