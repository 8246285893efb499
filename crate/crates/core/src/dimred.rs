//! Exact and randomized PCA over pixel-by-band matrices.
//!
//! Data are centered by per-band means but not rescaled: reflectance bands
//! share units, so PCA runs on the covariance matrix. Standardise beforehand
//! if a correlation-matrix PCA is wanted. Explained variances use the
//! sample-covariance denominator `n − 1`.

use serde::{Deserialize, Serialize};

use crate::error::{dim_err, domain_err, Error, Result};
use crate::linalg::{exact_svd, randomized_svd, DenseMatrix, RandomizedSvdParams, SvdResult};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum PcaMethod {
    Exact,
    Randomized {
        seed: u64,
        oversampling: usize,
        power_iterations: usize,
    },
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PcaModel {
    /// Per-band mean of the fit data.
    pub mean: Vec<f64>,
    /// `k × B`, orthonormal rows (principal axes).
    pub components: DenseMatrix,
    /// Variance along each axis, non-increasing.
    pub explained_variance: Vec<f64>,
    pub method: PcaMethod,
    pub n_fit_samples: usize,
}

/// Exact PCA with `k` components.
pub fn fit_pca(x: &DenseMatrix, k: usize) -> Result<PcaModel> {
    let centered = prepare(x, k)?;
    let svd = exact_svd(&centered.data, k)?;
    Ok(centered.into_model(svd, PcaMethod::Exact))
}

/// PCA whose factorization is a randomized SVD; `params.k` is the component
/// count.
pub fn fit_rpca(x: &DenseMatrix, params: &RandomizedSvdParams) -> Result<PcaModel> {
    let centered = prepare(x, params.k)?;
    params.validate(x.rows(), x.cols())?;
    let svd = randomized_svd(&centered.data, params)?;
    Ok(centered.into_model(
        svd,
        PcaMethod::Randomized {
            seed: params.seed,
            oversampling: params.oversampling,
            power_iterations: params.power_iterations,
        },
    ))
}

struct Centered {
    data: DenseMatrix,
    mean: Vec<f64>,
}

impl Centered {
    fn into_model(self, svd: SvdResult, method: PcaMethod) -> PcaModel {
        let denom = (self.data.rows() - 1) as f64;
        PcaModel {
            explained_variance: svd.s.iter().map(|s| s * s / denom).collect(),
            components: svd.vt,
            mean: self.mean,
            method,
            n_fit_samples: self.data.rows(),
        }
    }
}

fn prepare(x: &DenseMatrix, k: usize) -> Result<Centered> {
    let (n, b) = x.shape();
    if n < 2 {
        return Err(Error::Degenerate(format!(
            "PCA needs at least 2 samples, got {n}"
        )));
    }
    if k == 0 || k > n.min(b) {
        return dim_err(format!(
            "{k} components outside 1..={} for {n} samples of {b} bands",
            n.min(b)
        ));
    }
    let mean = x.column_means();
    let data = x.sub_row_vector(&mean)?;
    Ok(Centered { data, mean })
}

/// Sum of per-band sample variances (trace of the covariance matrix).
pub fn total_variance(x: &DenseMatrix) -> f64 {
    let n = x.rows();
    if n < 2 {
        return 0.0;
    }
    let mean = x.column_means();
    let mut ss = 0.0;
    for r in x.row_iter() {
        for (v, m) in r.iter().zip(&mean) {
            ss += (v - m).powi(2);
        }
    }
    ss / (n - 1) as f64
}

impl PcaModel {
    pub fn n_components(&self) -> usize {
        self.components.rows()
    }

    pub fn n_bands(&self) -> usize {
        self.mean.len()
    }

    /// Project rows of `x` onto the principal axes: `(x − mean)·Cᵀ`.
    pub fn transform(&self, x: &DenseMatrix) -> Result<DenseMatrix> {
        if x.cols() != self.n_bands() {
            return dim_err(format!(
                "model fitted on {} bands, input has {}",
                self.n_bands(),
                x.cols()
            ));
        }
        x.sub_row_vector(&self.mean)?.matmul_t(&self.components)
    }

    /// Map scores back to band space: `z·C + mean`.
    pub fn inverse_transform(&self, z: &DenseMatrix) -> Result<DenseMatrix> {
        if z.cols() != self.n_components() {
            return dim_err(format!(
                "model has {} components, input has {}",
                self.n_components(),
                z.cols()
            ));
        }
        let mut out = z.matmul(&self.components)?;
        for i in 0..out.rows() {
            for (v, m) in out.row_mut(i).iter_mut().zip(&self.mean) {
                *v += m;
            }
        }
        Ok(out)
    }

    pub fn explained_variance_ratio(&self, total_variance: f64) -> Result<Vec<f64>> {
        if !(total_variance > 0.0) {
            return domain_err(format!(
                "total variance must be positive, got {total_variance}"
            ));
        }
        Ok(self
            .explained_variance
            .iter()
            .map(|v| (v / total_variance).clamp(0.0, 1.0))
            .collect())
    }
}
