//! Dense complex linear algebra: cyclic Jacobi for Hermitian matrices and
//! small determinants.

use nalgebra::DMatrix;
use num_complex::Complex64;

use crate::error::{Error, Result};

pub type CMatrix = DMatrix<Complex64>;

/// Default off-diagonal Frobenius tolerance, relative to `max(1, ||A||_F)`.
pub const JACOBI_TOL: f64 = 1e-13;
pub const JACOBI_MAX_SWEEPS: usize = 100;

/// Eigenvalues in ascending order with eigenvectors as matching columns.
#[derive(Debug, Clone)]
pub struct HermitianEigen {
    pub values: Vec<f64>,
    pub vectors: CMatrix,
    pub sweeps: usize,
}

fn off_diagonal_norm(a: &CMatrix) -> f64 {
    let n = a.nrows();
    let mut acc = 0.0;
    for j in 0..n {
        for i in 0..n {
            if i != j {
                acc += a[(i, j)].norm_sqr();
            }
        }
    }
    acc.sqrt()
}

pub fn frobenius_norm(a: &CMatrix) -> f64 {
    a.iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt()
}

/// Largest elementwise deviation of `a` from `a†`.
pub fn hermiticity_defect(a: &CMatrix) -> f64 {
    let n = a.nrows();
    let mut worst: f64 = 0.0;
    for i in 0..n {
        for j in 0..n {
            worst = worst.max((a[(i, j)] - a[(j, i)].conj()).norm());
        }
    }
    worst
}

/// Largest elementwise deviation of `U†U` from the identity.
pub fn unitarity_defect(u: &CMatrix) -> f64 {
    let g = u.adjoint() * u;
    let n = g.nrows();
    let mut worst: f64 = 0.0;
    for i in 0..n {
        for j in 0..n {
            let target = if i == j { 1.0 } else { 0.0 };
            worst = worst.max((g[(i, j)] - Complex64::new(target, 0.0)).norm());
        }
    }
    worst
}

/// Cyclic Jacobi eigensolver for a Hermitian matrix.
///
/// Only the Hermitian part of `a` is used. Eigenvector phases are fixed so the
/// largest-magnitude component is real and positive, ties going to the lowest
/// index.
pub fn hermitian_jacobi(a: &CMatrix, tol: f64, max_sweeps: usize) -> Result<HermitianEigen> {
    let n = a.nrows();
    if a.ncols() != n {
        return Err(Error::DimensionMismatch {
            expected: n,
            found: a.ncols(),
        });
    }
    let mut m = (a + a.adjoint()) * Complex64::new(0.5, 0.0);
    for i in 0..n {
        m[(i, i)] = Complex64::new(m[(i, i)].re, 0.0);
    }
    let mut v = CMatrix::identity(n, n);
    let target = tol * frobenius_norm(&m).max(1.0);

    let mut sweeps = 0;
    loop {
        let off = off_diagonal_norm(&m);
        if off <= target {
            break;
        }
        if sweeps == max_sweeps {
            return Err(Error::NoConvergence {
                sweeps,
                off_norm: off,
            });
        }
        sweeps += 1;
        let mut rotated = false;
        for p in 0..n {
            for q in (p + 1)..n {
                let apq = m[(p, q)];
                let mag = apq.norm();
                if mag == 0.0 {
                    continue;
                }
                let app = m[(p, p)].re;
                let aqq = m[(q, q)].re;
                // below round-off relative to the diagonal: drop it
                if mag <= f64::EPSILON * 0.5 * (app.abs() * aqq.abs()).sqrt() {
                    m[(p, q)] = Complex64::new(0.0, 0.0);
                    m[(q, p)] = Complex64::new(0.0, 0.0);
                    continue;
                }
                rotated = true;
                let phase = apq / mag;
                let tau = (aqq - app) / (2.0 * mag);
                let t = if tau >= 0.0 {
                    1.0 / (tau + (1.0 + tau * tau).sqrt())
                } else {
                    -1.0 / (-tau + (1.0 + tau * tau).sqrt())
                };
                let c = 1.0 / (1.0 + t * t).sqrt();
                let s = t * c;
                // J = [[c, s], [-s e^{-iφ}, c e^{-iφ}]] on (p, q)
                let jpp = Complex64::new(c, 0.0);
                let jpq = Complex64::new(s, 0.0);
                let jqp = -phase.conj() * s;
                let jqq = phase.conj() * c;
                // m <- m J
                for k in 0..n {
                    let mkp = m[(k, p)];
                    let mkq = m[(k, q)];
                    m[(k, p)] = mkp * jpp + mkq * jqp;
                    m[(k, q)] = mkp * jpq + mkq * jqq;
                }
                // m <- J† m
                for k in 0..n {
                    let mpk = m[(p, k)];
                    let mqk = m[(q, k)];
                    m[(p, k)] = jpp.conj() * mpk + jqp.conj() * mqk;
                    m[(q, k)] = jpq.conj() * mpk + jqq.conj() * mqk;
                }
                m[(p, q)] = Complex64::new(0.0, 0.0);
                m[(q, p)] = Complex64::new(0.0, 0.0);
                m[(p, p)] = Complex64::new(m[(p, p)].re, 0.0);
                m[(q, q)] = Complex64::new(m[(q, q)].re, 0.0);
                // v <- v J
                for k in 0..n {
                    let vkp = v[(k, p)];
                    let vkq = v[(k, q)];
                    v[(k, p)] = vkp * jpp + vkq * jqp;
                    v[(k, q)] = vkp * jpq + vkq * jqq;
                }
            }
        }
        if !rotated {
            break;
        }
    }

    let mut order: Vec<usize> = (0..n).collect();
    order.sort_by(|&i, &j| m[(i, i)].re.total_cmp(&m[(j, j)].re));
    let values = order.iter().map(|&i| m[(i, i)].re).collect();
    let mut vectors = CMatrix::zeros(n, n);
    for (col, &i) in order.iter().enumerate() {
        vectors.set_column(col, &v.column(i));
        fix_phase(&mut vectors, col);
    }
    Ok(HermitianEigen {
        values,
        vectors,
        sweeps,
    })
}

/// Rotates column `col` so its largest-magnitude entry is real positive.
pub fn fix_phase(u: &mut CMatrix, col: usize) {
    let largest = u.column(col).iter().map(|z| z.norm()).fold(0.0, f64::max);
    if largest == 0.0 {
        return;
    }
    let slack = 1e-12 * largest;
    let pivot = u
        .column(col)
        .iter()
        .position(|z| z.norm() >= largest - slack)
        .unwrap_or(0);
    let z = u[(pivot, col)];
    let rot = z.conj() / z.norm();
    for k in 0..u.nrows() {
        u[(k, col)] *= rot;
    }
    u[(pivot, col)] = Complex64::new(u[(pivot, col)].re, 0.0);
}

/// Determinant by Gaussian elimination with partial pivoting.
pub fn determinant(mut a: Vec<Vec<Complex64>>) -> Complex64 {
    let n = a.len();
    let mut det = Complex64::new(1.0, 0.0);
    for col in 0..n {
        let pivot = (col..n)
            .max_by(|&i, &j| a[i][col].norm().total_cmp(&a[j][col].norm()))
            .unwrap();
        if a[pivot][col].norm() == 0.0 {
            return Complex64::new(0.0, 0.0);
        }
        if pivot != col {
            a.swap(pivot, col);
            det = -det;
        }
        let d = a[col][col];
        det *= d;
        for row in (col + 1)..n {
            let f = a[row][col] / d;
            if f.norm() == 0.0 {
                continue;
            }
            let (upper, lower) = a.split_at_mut(row);
            for (x, &p) in lower[0][col..].iter_mut().zip(&upper[col][col..]) {
                *x -= f * p;
            }
        }
    }
    det
}

/// `det U[rows, cols]` for 0-based index lists.
pub fn minor(u: &CMatrix, rows: &[usize], cols: &[usize]) -> Complex64 {
    match rows.len() {
        0 => Complex64::new(1.0, 0.0),
        1 => u[(rows[0], cols[0])],
        2 => {
            u[(rows[0], cols[0])] * u[(rows[1], cols[1])]
                - u[(rows[0], cols[1])] * u[(rows[1], cols[0])]
        }
        3 => {
            let e = |i: usize, j: usize| u[(rows[i], cols[j])];
            e(0, 0) * (e(1, 1) * e(2, 2) - e(1, 2) * e(2, 1))
                - e(0, 1) * (e(1, 0) * e(2, 2) - e(1, 2) * e(2, 0))
                + e(0, 2) * (e(1, 0) * e(2, 1) - e(1, 1) * e(2, 0))
        }
        _ => determinant(
            rows.iter()
                .map(|&r| cols.iter().map(|&c| u[(r, c)]).collect())
                .collect(),
        ),
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn c(re: f64, im: f64) -> Complex64 {
        Complex64::new(re, im)
    }

    #[test]
    fn two_by_two_closed_form() {
        let a =
            CMatrix::from_row_slice(2, 2, &[c(0.5, 0.0), c(0.1, 0.0), c(0.1, 0.0), c(0.5, 0.0)]);
        let e = hermitian_jacobi(&a, JACOBI_TOL, JACOBI_MAX_SWEEPS).unwrap();
        assert!((e.values[0] - 0.4).abs() < 1e-14);
        assert!((e.values[1] - 0.6).abs() < 1e-14);
    }

    #[test]
    fn complex_hermitian_reconstruction() {
        let a = CMatrix::from_row_slice(
            3,
            3,
            &[
                c(2.0, 0.0),
                c(0.3, 0.4),
                c(-0.1, 0.2),
                c(0.3, -0.4),
                c(1.0, 0.0),
                c(0.0, -0.7),
                c(-0.1, -0.2),
                c(0.0, 0.7),
                c(-1.5, 0.0),
            ],
        );
        let e = hermitian_jacobi(&a, JACOBI_TOL, JACOBI_MAX_SWEEPS).unwrap();
        assert!(unitarity_defect(&e.vectors) < 1e-13);
        let d = CMatrix::from_diagonal(&nalgebra::DVector::from_iterator(
            3,
            e.values.iter().map(|&x| c(x, 0.0)),
        ));
        let back = &e.vectors * d * e.vectors.adjoint();
        assert!(frobenius_norm(&(back - &a)) < 1e-13);
        assert!(e.values.windows(2).all(|w| w[0] <= w[1]));
        let trace: f64 = e.values.iter().sum();
        assert!((trace - 1.5).abs() < 1e-13);
        for col in 0..3 {
            let column = e.vectors.column(col);
            let big = column.iter().map(|z| z.norm()).fold(0.0, f64::max);
            let pivot = column.iter().position(|z| z.norm() >= big - 1e-12).unwrap();
            assert!(column[pivot].im == 0.0 && column[pivot].re > 0.0);
        }
    }

    #[test]
    fn sweep_cap_is_reported() {
        let a =
            CMatrix::from_row_slice(2, 2, &[c(1.0, 0.0), c(1.0, 0.0), c(1.0, 0.0), c(0.0, 0.0)]);
        match hermitian_jacobi(&a, JACOBI_TOL, 0) {
            Err(Error::NoConvergence { sweeps: 0, .. }) => {}
            other => panic!("unexpected {other:?}"),
        }
    }

    #[test]
    fn minors_match_elimination() {
        let u = CMatrix::from_fn(4, 4, |i, j| {
            c(
                (i * 4 + j) as f64 * 0.37 - 1.0,
                (i as f64 - j as f64) * 0.11,
            )
        });
        let rows = [0, 1, 3];
        let cols = [1, 2, 3];
        let direct = minor(&u, &rows, &cols);
        let elim = determinant(
            rows.iter()
                .map(|&r| cols.iter().map(|&c| u[(r, c)]).collect())
                .collect(),
        );
        assert!((direct - elim).norm() < 1e-12);
        let all = [0, 1, 2, 3];
        let four = minor(&u, &all, &all);
        let expect = u.clone().determinant();
        assert!((four - expect).norm() < 1e-10);
    }
}
