//! Cyclic Jacobi eigensolver for dense real symmetric matrices.
//!
//! Each sweep visits every `(p, q)` pair with `p < q` in row order and
//! applies the plane rotation that zeroes `a[p][q]`. Rotations are
//! accumulated into `V`, so on exit `A = V diag(lambda) V^T`.
//!
//! Convergence: off-diagonal Frobenius norm below `1e-12 * n * scale`, where
//! `scale = max(1, ||A||_F / sqrt(n))` keeps the test meaningful for inputs
//! that are not unit-diagonal. At most [`MAX_SWEEPS`] sweeps.

use nalgebra::DMatrix;

use crate::error::{Error, Result};

pub const MAX_SWEEPS: usize = 100;
const TOLERANCE: f64 = 1e-12;

fn off_norm(a: &DMatrix<f64>) -> f64 {
    let n = a.nrows();
    let mut s = 0.0;
    for p in 0..n {
        for q in p + 1..n {
            s += a[(p, q)] * a[(p, q)];
        }
    }
    (2.0 * s).sqrt()
}

/// Eigenvalues (ascending) and orthonormal eigenvectors (columns) of the
/// symmetric part of `input`. Eigenvectors are sign-fixed: positive
/// component sum, or when the sum is within 1e-12 of zero, positive first
/// nonzero component.
pub fn symmetric_eigen(input: &DMatrix<f64>) -> Result<(Vec<f64>, DMatrix<f64>)> {
    let n = input.nrows();
    if input.ncols() != n {
        return Err(Error::DimensionMismatch(format!("{}x{} matrix is not square", n, input.ncols())));
    }
    if input.iter().any(|x| !x.is_finite()) {
        return Err(Error::InvalidArgument("matrix has non-finite entries".into()));
    }
    if n == 0 {
        return Ok((Vec::new(), DMatrix::zeros(0, 0)));
    }
    let mut a = (input + input.transpose()) * 0.5;
    let mut v = DMatrix::<f64>::identity(n, n);
    let scale = (a.norm() / (n as f64).sqrt()).max(1.0);
    let tol = TOLERANCE * n as f64 * scale;

    let mut converged = false;
    for _ in 0..MAX_SWEEPS {
        if off_norm(&a) < tol {
            converged = true;
            break;
        }
        for p in 0..n {
            for q in p + 1..n {
                let apq = a[(p, q)];
                if apq == 0.0 {
                    continue;
                }
                let theta = (a[(q, q)] - a[(p, p)]) / (2.0 * apq);
                let t = if theta.abs() > 1e150 {
                    0.5 / theta
                } else {
                    theta.signum() / (theta.abs() + (theta * theta + 1.0).sqrt())
                };
                let c = 1.0 / (t * t + 1.0).sqrt();
                let s = t * c;
                rotate(&mut a, &mut v, p, q, c, s);
            }
        }
    }
    if !converged {
        let off = off_norm(&a);
        if off >= tol {
            return Err(Error::NoConvergence { sweeps: MAX_SWEEPS, off_norm: off });
        }
    }

    let mut order: Vec<usize> = (0..n).collect();
    order.sort_by(|&i, &j| a[(i, i)].total_cmp(&a[(j, j)]).then(i.cmp(&j)));
    let values = order.iter().map(|&i| a[(i, i)]).collect();
    let mut vectors = v.select_columns(&order);
    for mut col in vectors.column_iter_mut() {
        sign_fix(col.as_mut_slice());
    }
    Ok((values, vectors))
}

/// Orient a vector so its component sum is positive; when the sum is within
/// 1e-12 of zero, so that its first nonzero component is positive.
pub fn sign_fix(v: &mut [f64]) {
    let sum: f64 = v.iter().sum();
    let flip = if sum.abs() > 1e-12 { sum < 0.0 } else { v.iter().find(|x| x.abs() > 1e-12).is_some_and(|&x| x < 0.0) };
    if flip {
        v.iter_mut().for_each(|x| *x = -*x);
    }
}

/// `A <- J^T A J`, `V <- V J` for the rotation in the `(p, q)` plane.
fn rotate(a: &mut DMatrix<f64>, v: &mut DMatrix<f64>, p: usize, q: usize, c: f64, s: f64) {
    let n = a.nrows();
    for k in 0..n {
        let (akp, akq) = (a[(k, p)], a[(k, q)]);
        a[(k, p)] = c * akp - s * akq;
        a[(k, q)] = s * akp + c * akq;
    }
    for k in 0..n {
        let (apk, aqk) = (a[(p, k)], a[(q, k)]);
        a[(p, k)] = c * apk - s * aqk;
        a[(q, k)] = s * apk + c * aqk;
    }
    a[(p, q)] = 0.0;
    a[(q, p)] = 0.0;
    for k in 0..n {
        let (vkp, vkq) = (v[(k, p)], v[(k, q)]);
        v[(k, p)] = c * vkp - s * vkq;
        v[(k, q)] = s * vkp + c * vkq;
    }
}
