use serde::{Deserialize, Serialize};

use super::matrix::dot;
use super::DenseMatrix;
use crate::error::{dim_err, Error, Result};

/// Maximum number of cyclic Jacobi sweeps before giving up.
pub const JACOBI_MAX_SWEEPS: usize = 100;
/// Sweeps stop once the off-diagonal Frobenius mass falls below this
/// fraction of the Gram matrix's Frobenius norm.
pub const JACOBI_TOLERANCE: f64 = 1e-12;

/// Truncated singular value decomposition `A ≈ U·diag(s)·Vᵀ`.
///
/// Singular values are sorted non-increasing. Each singular pair is signed
/// so that the largest-magnitude entry of every column of `U` is positive
/// (first such entry on ties).
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SvdResult {
    pub u: DenseMatrix,
    pub s: Vec<f64>,
    pub vt: DenseMatrix,
}

impl SvdResult {
    pub fn rank(&self) -> usize {
        self.s.len()
    }

    /// `U·diag(s)·Vᵀ`.
    pub fn reconstruct(&self) -> DenseMatrix {
        let mut us = self.u.clone();
        for i in 0..us.rows() {
            for (v, s) in us.row_mut(i).iter_mut().zip(&self.s) {
                *v *= s;
            }
        }
        us.matmul(&self.vt).expect("factor shapes agree")
    }

    /// Apply the sign convention in place.
    pub(crate) fn normalize_signs(&mut self) {
        for j in 0..self.s.len() {
            let mut best = 0.0;
            let mut best_val = 0.0;
            for i in 0..self.u.rows() {
                let v = self.u.get(i, j);
                if v.abs() > best {
                    best = v.abs();
                    best_val = v;
                }
            }
            if best_val < 0.0 {
                for i in 0..self.u.rows() {
                    let v = self.u.get(i, j);
                    self.u.set(i, j, -v);
                }
                for v in self.vt.row_mut(j) {
                    *v = -*v;
                }
            }
        }
    }
}

/// Symmetric eigendecomposition by cyclic Jacobi rotations.
///
/// Returns eigenvalues sorted descending (stable on ties) and the matching
/// eigenvectors as the columns of the returned matrix.
pub fn symmetric_eigen(g: &DenseMatrix) -> Result<(Vec<f64>, DenseMatrix)> {
    let n = g.rows();
    if g.cols() != n {
        return dim_err(format!(
            "eigendecomposition needs a square matrix, got {:?}",
            g.shape()
        ));
    }
    let mut a: Vec<f64> = g.as_slice().to_vec();
    let mut v = vec![0.0; n * n];
    for i in 0..n {
        v[i * n + i] = 1.0;
    }

    let norm = a.iter().map(|x| x * x).sum::<f64>().sqrt();
    let threshold = JACOBI_TOLERANCE * norm;
    let off = |a: &[f64]| -> f64 {
        let mut s = 0.0;
        for p in 0..n {
            for q in 0..n {
                if p != q {
                    s += a[p * n + q] * a[p * n + q];
                }
            }
        }
        s.sqrt()
    };

    let mut converged = false;
    for _ in 0..JACOBI_MAX_SWEEPS {
        if off(&a) <= threshold {
            converged = true;
            break;
        }
        for p in 0..n {
            for q in p + 1..n {
                let apq = a[p * n + q];
                if apq == 0.0 {
                    continue;
                }
                let app = a[p * n + p];
                let aqq = a[q * n + q];
                let theta = (aqq - app) / (2.0 * apq);
                let t = theta.signum() / (theta.abs() + (theta * theta + 1.0).sqrt());
                let c = 1.0 / (t * t + 1.0).sqrt();
                let s = t * c;

                // A ← Jᵀ A J with J the (p, q) rotation.
                for k in 0..n {
                    let akp = a[k * n + p];
                    let akq = a[k * n + q];
                    a[k * n + p] = c * akp - s * akq;
                    a[k * n + q] = s * akp + c * akq;
                }
                for k in 0..n {
                    let apk = a[p * n + k];
                    let aqk = a[q * n + k];
                    a[p * n + k] = c * apk - s * aqk;
                    a[q * n + k] = s * apk + c * aqk;
                }
                a[p * n + q] = 0.0;
                a[q * n + p] = 0.0;
                for k in 0..n {
                    let vkp = v[k * n + p];
                    let vkq = v[k * n + q];
                    v[k * n + p] = c * vkp - s * vkq;
                    v[k * n + q] = s * vkp + c * vkq;
                }
            }
        }
    }
    if !converged && off(&a) > threshold {
        return Err(Error::Convergence(format!(
            "Jacobi eigensolver on a {n}x{n} matrix exceeded {JACOBI_MAX_SWEEPS} sweeps"
        )));
    }

    let mut order: Vec<usize> = (0..n).collect();
    order.sort_by(|&i, &j| a[j * n + j].total_cmp(&a[i * n + i]));
    let values = order.iter().map(|&i| a[i * n + i]).collect();
    let mut vectors = DenseMatrix::zeros(n, n);
    for (col, &src) in order.iter().enumerate() {
        for k in 0..n {
            vectors.set(k, col, v[k * n + src]);
        }
    }
    Ok((values, vectors))
}

/// Top-`k` singular triplets of `a`.
///
/// Eigendecomposes the smaller Gram matrix (`AᵀA` or `AAᵀ`) by cyclic Jacobi
/// and recovers the other factor by projection, re-orthonormalising it so
/// that columns attached to (near-)zero singular values stay orthonormal.
pub fn exact_svd(a: &DenseMatrix, k: usize) -> Result<SvdResult> {
    let (m, n) = a.shape();
    let max_rank = m.min(n);
    if k == 0 || k > max_rank {
        return dim_err(format!(
            "rank {k} outside 1..={max_rank} for a {m}x{n} matrix"
        ));
    }

    let mut result = if n <= m {
        let gram = a.t_matmul(a)?;
        let (values, v) = symmetric_eigen(&gram)?;
        let s = singular_values(&values[..k]);
        let v = v.leading_columns(k);
        let u = recover_factor(a, &v, k)?;
        SvdResult {
            u,
            s,
            vt: v.transpose(),
        }
    } else {
        let gram = a.matmul_t(a)?;
        let (values, u) = symmetric_eigen(&gram)?;
        let s = singular_values(&values[..k]);
        let u = u.leading_columns(k);
        let v = recover_factor(&a.transpose(), &u, k)?;
        SvdResult {
            u,
            s,
            vt: v.transpose(),
        }
    };
    result.normalize_signs();
    Ok(result)
}

fn singular_values(eigenvalues: &[f64]) -> Vec<f64> {
    eigenvalues.iter().map(|&l| l.max(0.0).sqrt()).collect()
}

/// Columns of `a·basis`, orthonormalised in order (two Gram-Schmidt passes).
/// Columns that vanish are replaced by a completion of the basis.
fn recover_factor(a: &DenseMatrix, basis: &DenseMatrix, k: usize) -> Result<DenseMatrix> {
    let projected = a.matmul(basis)?;
    let m = projected.rows();
    let mut cols: Vec<Vec<f64>> = Vec::with_capacity(k);
    for j in 0..k {
        let mut w = projected.column(j);
        let before = norm(&w);
        project_out(&mut w, &cols);
        project_out(&mut w, &cols);
        let after = norm(&w);
        if before > 0.0 && after > 1e-3 * before {
            w.iter_mut().for_each(|x| *x /= after);
            cols.push(w);
        } else {
            cols.push(completion_vector(m, &cols));
        }
    }
    let mut out = DenseMatrix::zeros(m, k);
    for (j, col) in cols.iter().enumerate() {
        for (i, &v) in col.iter().enumerate() {
            out.set(i, j, v);
        }
    }
    Ok(out)
}

fn norm(v: &[f64]) -> f64 {
    dot(v, v).sqrt()
}

fn project_out(w: &mut [f64], basis: &[Vec<f64>]) {
    for b in basis {
        let c = dot(w, b);
        for (x, y) in w.iter_mut().zip(b) {
            *x -= c * y;
        }
    }
}

/// Unit vector orthogonal to `basis`: the standard basis vector with the
/// largest residual after projection.
fn completion_vector(m: usize, basis: &[Vec<f64>]) -> Vec<f64> {
    let mut best: Option<(f64, Vec<f64>)> = None;
    for i in 0..m {
        let mut e = vec![0.0; m];
        e[i] = 1.0;
        project_out(&mut e, basis);
        project_out(&mut e, basis);
        let r = norm(&e);
        if best.as_ref().is_none_or(|(b, _)| r > *b) {
            best = Some((r, e));
        }
    }
    let (r, mut e) = best.expect("m >= 1");
    e.iter_mut().for_each(|x| *x /= r);
    e
}

/// Largest principal angle (radians) between the row spaces of two
/// matrices with orthonormal rows.
///
/// Computed from the sine side, `σ_max((I − AᵀA)Bᵀ)`, which stays accurate
/// for tiny angles.
pub fn max_principal_angle(a: &DenseMatrix, b: &DenseMatrix) -> Result<f64> {
    if a.cols() != b.cols() {
        return dim_err(format!(
            "subspaces live in R^{} and R^{}",
            a.cols(),
            b.cols()
        ));
    }
    let coeffs = b.matmul_t(a)?;
    let residual = b.sub(&coeffs.matmul(a)?)?;
    let rank = residual.rows().min(residual.cols());
    if rank == 0 {
        return Ok(0.0);
    }
    let sine = exact_svd(&residual, 1)?.s[0];
    Ok(sine.min(1.0).asin())
}
