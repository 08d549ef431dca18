//! Cyclic Jacobi diagonalization for small dense symmetric matrices.

use ndarray::Array2;

use crate::error::{Error, Result};

/// Off-diagonal Frobenius norm at which the sweep loop stops.
pub const OFF_DIAGONAL_TOLERANCE: f64 = 1e-12;
/// Hard cap on the number of full sweeps.
pub const MAX_SWEEPS: usize = 100;
/// Largest accepted |a_ij - a_ji|.
pub const SYMMETRY_TOLERANCE: f64 = 1e-10;

/// Maximum entrywise asymmetry of a square matrix.
pub fn asymmetry(a: &Array2<f64>) -> f64 {
    let n = a.nrows();
    let mut worst = 0.0_f64;
    for i in 0..n {
        for j in (i + 1)..n {
            worst = worst.max((a[[i, j]] - a[[j, i]]).abs());
        }
    }
    worst
}

fn off_diagonal_norm(a: &Array2<f64>) -> f64 {
    let n = a.nrows();
    let mut sum = 0.0;
    for i in 0..n {
        for j in 0..n {
            if i != j {
                sum += a[[i, j]] * a[[i, j]];
            }
        }
    }
    sum.sqrt()
}

/// Eigenvalues of a symmetric matrix, sorted ascending.
///
/// The input is symmetrized as `(A + Aᵀ)/2` after the symmetry check, then
/// reduced by cyclic Jacobi rotations until the off-diagonal norm falls
/// below [`OFF_DIAGONAL_TOLERANCE`] (relative to the Frobenius norm for
/// large-scale inputs) or [`MAX_SWEEPS`] is reached.
pub fn symmetric_eigenvalues(a: &Array2<f64>) -> Result<Vec<f64>> {
    let n = a.nrows();
    if a.ncols() != n {
        return Err(Error::arg(format!(
            "eigensolver needs a square matrix, got {}x{}",
            n,
            a.ncols()
        )));
    }
    if a.iter().any(|v| !v.is_finite()) {
        return Err(Error::arg("matrix has non-finite entries"));
    }
    let asym = asymmetry(a);
    if asym > SYMMETRY_TOLERANCE {
        return Err(Error::arg(format!(
            "matrix is not symmetric (max |a_ij - a_ji| = {asym:e})"
        )));
    }
    let mut m = (a + &a.t()) * 0.5;
    let scale = m.iter().map(|v| v * v).sum::<f64>().sqrt().max(1.0);
    let tol = OFF_DIAGONAL_TOLERANCE * scale;

    for _ in 0..MAX_SWEEPS {
        if off_diagonal_norm(&m) <= tol {
            break;
        }
        for p in 0..n {
            for q in (p + 1)..n {
                let apq = m[[p, q]];
                if apq == 0.0 {
                    continue;
                }
                let app = m[[p, p]];
                let aqq = m[[q, q]];
                // rotation angle that annihilates m[p][q]
                let theta = (aqq - app) / (2.0 * apq);
                let t = theta.signum() / (theta.abs() + (theta * theta + 1.0).sqrt());
                let t = if theta == 0.0 { 1.0 } else { t };
                let c = 1.0 / (t * t + 1.0).sqrt();
                let s = t * c;

                for k in 0..n {
                    let akp = m[[k, p]];
                    let akq = m[[k, q]];
                    m[[k, p]] = c * akp - s * akq;
                    m[[k, q]] = s * akp + c * akq;
                }
                for k in 0..n {
                    let apk = m[[p, k]];
                    let aqk = m[[q, k]];
                    m[[p, k]] = c * apk - s * aqk;
                    m[[q, k]] = s * apk + c * aqk;
                }
                m[[p, q]] = 0.0;
                m[[q, p]] = 0.0;
            }
        }
    }

    let mut eig: Vec<f64> = (0..n).map(|i| m[[i, i]]).collect();
    eig.sort_by(|x, y| x.total_cmp(y));
    Ok(eig)
}
