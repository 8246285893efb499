//! Pixel classifiers: RBF-kernel SVM (SMO, one-vs-one) and a leaf-wise
//! histogram GBDT with gradient-based one-side sampling.
//!
//! Ties are always broken toward the smallest class id.

mod gbdt;
mod grid;
mod svm;

pub use gbdt::{
    gbdt_train, gbdt_train_traced, goss_sample, softmax_cross_entropy, softmax_gradients,
    BinMapper, GbdtModel, GbdtParams, SplitEvent, Tree, TreeNode, LEAF_L2,
};
pub use grid::{
    grid_search_cv, stratified_folds, CvCell, GridSearchResult, DEFAULT_C_GRID, DEFAULT_FOLDS,
    DEFAULT_GAMMA_GRID,
};
pub use svm::{
    smo_solve, svm_train, BinaryMachine, FeatureScaling, SmoSolution, SvmModel, SvmParams,
};

use crate::error::{dim_err, Result};
use crate::linalg::DenseMatrix;

/// `exp(−γ‖x − y‖²)`.
pub fn rbf_kernel(x: &[f64], y: &[f64], gamma: f64) -> Result<f64> {
    if x.len() != y.len() {
        return dim_err(format!("vectors of length {} and {}", x.len(), y.len()));
    }
    if !(gamma > 0.0) {
        return crate::error::domain_err(format!("gamma must be positive, got {gamma}"));
    }
    Ok(rbf(x, y, gamma))
}

#[inline]
pub(crate) fn rbf(x: &[f64], y: &[f64], gamma: f64) -> f64 {
    let d2: f64 = x.iter().zip(y).map(|(a, b)| (a - b) * (a - b)).sum();
    (-gamma * d2).exp()
}

/// Anything that maps feature rows to class ids.
pub trait Classifier {
    fn predict(&self, x: &DenseMatrix) -> Result<Vec<u16>>;

    fn n_features(&self) -> usize;
}

/// Index of the largest score; ties go to the lowest index.
pub(crate) fn argmax_first(values: &[f64]) -> usize {
    let mut best = 0;
    for (i, &v) in values.iter().enumerate().skip(1) {
        if v > values[best] {
            best = i;
        }
    }
    best
}
