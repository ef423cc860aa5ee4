//! Dense and iterative linear algebra for grounded Laplacian systems.
//!
//! Everything here is deliberately dependency-free: the systems the solver
//! produces are symmetric positive definite, so a dense Cholesky factorization
//! covers small truncations and a Jacobi-preconditioned conjugate gradient
//! covers large sparse ones. A cyclic Jacobi eigensolver handles the small
//! symmetric matrices of the Gaussian-field and rank-estimation code.
//!
//! Matrices are row-major `Vec<f64>` slices of size `n * n`.

use crate::error::{Error, Result};

/// In-place Cholesky factorization `A = L L^T`, lower triangle of `a`
/// overwritten by `L`. Fails on a non-positive pivot.
pub fn cholesky_factor(a: &mut [f64], n: usize) -> Result<()> {
    debug_assert_eq!(a.len(), n * n);
    for j in 0..n {
        let mut d = a[j * n + j];
        for k in 0..j {
            d -= a[j * n + k] * a[j * n + k];
        }
        if d <= 0.0 || !d.is_finite() {
            return Err(Error::Singular(format!("non-positive pivot {d:e} at row {j}")));
        }
        let d = d.sqrt();
        a[j * n + j] = d;
        for i in (j + 1)..n {
            let mut s = a[i * n + j];
            for k in 0..j {
                s -= a[i * n + k] * a[j * n + k];
            }
            a[i * n + j] = s / d;
        }
    }
    Ok(())
}

/// Solves `L L^T x = b` in place given the factor from [`cholesky_factor`].
pub fn cholesky_solve(l: &[f64], n: usize, b: &mut [f64]) {
    debug_assert_eq!(b.len(), n);
    for i in 0..n {
        let mut s = b[i];
        for k in 0..i {
            s -= l[i * n + k] * b[k];
        }
        b[i] = s / l[i * n + i];
    }
    for i in (0..n).rev() {
        let mut s = b[i];
        for k in (i + 1)..n {
            s -= l[k * n + i] * b[k];
        }
        b[i] = s / l[i * n + i];
    }
}

/// Symmetric sparse matrix in split diagonal / off-diagonal form.
pub struct SparseSym {
    pub n: usize,
    pub diag: Vec<f64>,
    /// Off-diagonal entries per row, `(column, value)`, each stored once per row.
    pub off: Vec<Vec<(usize, f64)>>,
}

impl SparseSym {
    pub fn apply(&self, x: &[f64], out: &mut [f64]) {
        for i in 0..self.n {
            let mut s = self.diag[i] * x[i];
            for &(j, v) in &self.off[i] {
                s += v * x[j];
            }
            out[i] = s;
        }
    }
}

/// Jacobi-preconditioned conjugate gradient for SPD systems.
///
/// Iterates from `x0` until the relative residual `|b - Ax| / |b|` drops
/// below `rel_tol`. Returns the iteration count alongside the solution.
pub fn cg_jacobi(
    a: &SparseSym,
    b: &[f64],
    x0: Vec<f64>,
    rel_tol: f64,
    max_iter: usize,
) -> Result<(Vec<f64>, usize)> {
    let n = a.n;
    let norm_b = b.iter().map(|v| v * v).sum::<f64>().sqrt();
    if norm_b == 0.0 {
        return Ok((vec![0.0; n], 0));
    }
    let inv_diag: Vec<f64> = a
        .diag
        .iter()
        .map(|&d| if d > 0.0 { 1.0 / d } else { 1.0 })
        .collect();
    let mut x = x0;
    let mut r = vec![0.0; n];
    a.apply(&x, &mut r);
    for i in 0..n {
        r[i] = b[i] - r[i];
    }
    let mut z: Vec<f64> = r.iter().zip(&inv_diag).map(|(ri, di)| ri * di).collect();
    let mut p = z.clone();
    let mut rz: f64 = r.iter().zip(&z).map(|(a, b)| a * b).sum();
    let mut ap = vec![0.0; n];
    for it in 0..max_iter {
        let rnorm = r.iter().map(|v| v * v).sum::<f64>().sqrt();
        if rnorm <= rel_tol * norm_b {
            return Ok((x, it));
        }
        a.apply(&p, &mut ap);
        let pap: f64 = p.iter().zip(&ap).map(|(a, b)| a * b).sum();
        if pap <= 0.0 || !pap.is_finite() {
            return Err(Error::Singular(format!(
                "conjugate gradient met curvature {pap:e}"
            )));
        }
        let alpha = rz / pap;
        for i in 0..n {
            x[i] += alpha * p[i];
            r[i] -= alpha * ap[i];
        }
        for i in 0..n {
            z[i] = r[i] * inv_diag[i];
        }
        let rz_next: f64 = r.iter().zip(&z).map(|(a, b)| a * b).sum();
        let beta = rz_next / rz;
        rz = rz_next;
        for i in 0..n {
            p[i] = z[i] + beta * p[i];
        }
    }
    Err(Error::SolveFailed(format!(
        "conjugate gradient did not reach {rel_tol:e} in {max_iter} iterations"
    )))
}

/// Eigendecomposition of a symmetric matrix by cyclic Jacobi rotations.
///
/// Returns `(eigenvalues, v)` with `A = V diag(l) V^T`, `V` row-major with
/// eigenvectors in columns, eigenvalues sorted descending. Intended for the
/// small matrices of Gram and covariance work (n up to a few hundred).
pub fn jacobi_eigen(a: &[f64], n: usize) -> (Vec<f64>, Vec<f64>) {
    debug_assert_eq!(a.len(), n * n);
    let mut m = a.to_vec();
    let mut v = vec![0.0; n * n];
    for i in 0..n {
        v[i * n + i] = 1.0;
    }
    let off = |m: &[f64]| -> f64 {
        let mut s = 0.0;
        for i in 0..n {
            for j in (i + 1)..n {
                s += m[i * n + j] * m[i * n + j];
            }
        }
        s
    };
    let scale: f64 = (0..n).map(|i| m[i * n + i].abs()).fold(1e-300, f64::max);
    let tol = (1e-15 * scale) * (1e-15 * scale) * n as f64 * n as f64;
    for _sweep in 0..100 {
        if off(&m) <= tol {
            break;
        }
        for p in 0..n {
            for q in (p + 1)..n {
                let apq = m[p * n + q];
                if apq.abs() <= 1e-300 {
                    continue;
                }
                let app = m[p * n + p];
                let aqq = m[q * n + q];
                let theta = (aqq - app) / (2.0 * apq);
                let t = theta.signum() / (theta.abs() + (theta * theta + 1.0).sqrt());
                let c = 1.0 / (t * t + 1.0).sqrt();
                let s = t * c;
                for k in 0..n {
                    let mkp = m[k * n + p];
                    let mkq = m[k * n + q];
                    m[k * n + p] = c * mkp - s * mkq;
                    m[k * n + q] = s * mkp + c * mkq;
                }
                for k in 0..n {
                    let mpk = m[p * n + k];
                    let mqk = m[q * n + k];
                    m[p * n + k] = c * mpk - s * mqk;
                    m[q * n + k] = s * mpk + c * mqk;
                }
                for k in 0..n {
                    let vkp = v[k * n + p];
                    let vkq = v[k * n + q];
                    v[k * n + p] = c * vkp - s * vkq;
                    v[k * n + q] = s * vkp + c * vkq;
                }
            }
        }
    }
    let mut order: Vec<usize> = (0..n).collect();
    let eig: Vec<f64> = (0..n).map(|i| m[i * n + i]).collect();
    order.sort_by(|&a, &b| eig[b].partial_cmp(&eig[a]).unwrap());
    let vals: Vec<f64> = order.iter().map(|&i| eig[i]).collect();
    let mut vec_sorted = vec![0.0; n * n];
    for (new, &old) in order.iter().enumerate() {
        for k in 0..n {
            vec_sorted[k * n + new] = v[k * n + old];
        }
    }
    (vals, vec_sorted)
}
