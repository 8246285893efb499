use super::DenseMatrix;
use crate::error::{dim_err, Result};

/// Thin Householder QR of an `m × n` matrix with `m ≥ n`.
///
/// Returns `Q` (`m × n`, orthonormal columns) and upper-triangular `R`
/// (`n × n`). Rank-deficient input is fine: a column that is already zero
/// below the diagonal gets no reflection and its `R` diagonal is zero.
pub fn householder_qr(a: &DenseMatrix) -> Result<(DenseMatrix, DenseMatrix)> {
    let (m, n) = a.shape();
    if m < n {
        return dim_err(format!("QR needs rows >= cols, got {m}x{n}"));
    }

    // Work column-major: each reflection touches whole columns.
    let mut cols: Vec<Vec<f64>> = (0..n).map(|j| a.column(j)).collect();
    let mut reflectors: Vec<(Vec<f64>, f64)> = Vec::with_capacity(n);
    let mut r = DenseMatrix::zeros(n, n);

    for k in 0..n {
        let x = &cols[k][k..];
        let norm = x.iter().map(|v| v * v).sum::<f64>().sqrt();
        if norm == 0.0 {
            reflectors.push((Vec::new(), 0.0));
        } else {
            let alpha = if x[0] >= 0.0 { -norm } else { norm };
            let mut v = x.to_vec();
            v[0] -= alpha;
            let v_norm_sq: f64 = v.iter().map(|t| t * t).sum();
            let tau = if v_norm_sq == 0.0 {
                0.0
            } else {
                2.0 / v_norm_sq
            };
            for col in cols.iter_mut().skip(k) {
                apply_reflector(&v, tau, &mut col[k..]);
            }
            reflectors.push((v, tau));
        }
        for (i, col) in cols.iter().enumerate().skip(k) {
            r.set(k, i, col[k]);
        }
    }

    // Q = H_0 H_1 ... H_{n-1} applied to the first n columns of I.
    let mut q_cols: Vec<Vec<f64>> = (0..n)
        .map(|j| {
            let mut e = vec![0.0; m];
            e[j] = 1.0;
            e
        })
        .collect();
    for (k, (v, tau)) in reflectors.iter().enumerate().rev() {
        if *tau == 0.0 {
            continue;
        }
        for col in q_cols.iter_mut() {
            apply_reflector(v, *tau, &mut col[k..]);
        }
    }

    let mut q = DenseMatrix::zeros(m, n);
    for (j, col) in q_cols.iter().enumerate() {
        for (i, &v) in col.iter().enumerate() {
            q.set(i, j, v);
        }
    }
    Ok((q, r))
}

/// Orthonormal basis (`Q` factor) of the column space.
pub(crate) fn orthonormalize(a: &DenseMatrix) -> Result<DenseMatrix> {
    householder_qr(a).map(|(q, _)| q)
}

#[inline]
fn apply_reflector(v: &[f64], tau: f64, x: &mut [f64]) {
    let s: f64 = v.iter().zip(x.iter()).map(|(a, b)| a * b).sum();
    let f = tau * s;
    for (xi, vi) in x.iter_mut().zip(v) {
        *xi -= f * vi;
    }
}
