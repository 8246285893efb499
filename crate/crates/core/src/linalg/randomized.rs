//! Randomized range finder and randomized SVD.
//!
//! Stage A draws a Gaussian test matrix `Ω`, forms `Y = AΩ` and runs `q`
//! rounds of subspace iteration, re-orthonormalising after every product
//! with `A` or `Aᵀ`. Stage B factors the small projection `B = QᵀA` exactly.

use serde::{Deserialize, Serialize};

use super::qr::orthonormalize;
use super::svd::exact_svd;
use super::{DenseMatrix, SvdResult};
use crate::error::{dim_err, domain_err, Result};
use crate::rng::Rng;

pub const DEFAULT_OVERSAMPLING: usize = 10;
pub const DEFAULT_POWER_ITERATIONS: usize = 2;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct RandomizedSvdParams {
    /// Target rank.
    pub k: usize,
    pub oversampling: usize,
    pub power_iterations: usize,
    pub seed: u64,
}

impl RandomizedSvdParams {
    pub fn new(k: usize, seed: u64) -> Self {
        Self {
            k,
            oversampling: DEFAULT_OVERSAMPLING,
            power_iterations: DEFAULT_POWER_ITERATIONS,
            seed,
        }
    }

    pub fn with_oversampling(mut self, p: usize) -> Self {
        self.oversampling = p;
        self
    }

    pub fn with_power_iterations(mut self, q: usize) -> Self {
        self.power_iterations = q;
        self
    }

    /// Sketch width `k + p`.
    pub fn sketch_width(&self) -> usize {
        self.k + self.oversampling
    }

    pub fn validate(&self, rows: usize, cols: usize) -> Result<()> {
        if self.k == 0 {
            return domain_err("randomized SVD target rank must be at least 1");
        }
        let limit = rows.min(cols);
        if self.sketch_width() > limit {
            return dim_err(format!(
                "k + p = {} exceeds min(rows, cols) = {limit}",
                self.sketch_width()
            ));
        }
        Ok(())
    }
}

/// Orthonormal `m × l` basis approximating the range of `a`.
pub fn randomized_range_finder(
    a: &DenseMatrix,
    l: usize,
    q: usize,
    seed: u64,
) -> Result<DenseMatrix> {
    let (m, n) = a.shape();
    if l == 0 || l > m.min(n) {
        return dim_err(format!(
            "sketch width {l} outside 1..={} for a {m}x{n} matrix",
            m.min(n)
        ));
    }
    let mut omega = vec![0.0; n * l];
    Rng::new(seed).fill_normal(&mut omega);
    let omega = DenseMatrix::from_vec(n, l, omega);

    let mut basis = orthonormalize(&a.matmul(&omega)?)?;
    for _ in 0..q {
        let z = orthonormalize(&a.t_matmul(&basis)?)?;
        basis = orthonormalize(&a.matmul(&z)?)?;
    }
    Ok(basis)
}

/// Rank-`k` approximate SVD from a `(k + p)`-column sketch.
pub fn randomized_svd(a: &DenseMatrix, params: &RandomizedSvdParams) -> Result<SvdResult> {
    params.validate(a.rows(), a.cols())?;
    let q = randomized_range_finder(
        a,
        params.sketch_width(),
        params.power_iterations,
        params.seed,
    )?;
    let b = q.t_matmul(a)?;
    let small = exact_svd(&b, params.k)?;
    let mut result = SvdResult {
        u: q.matmul(&small.u)?,
        s: small.s,
        vt: small.vt,
    };
    result.normalize_signs();
    Ok(result)
}
