//! Spectral dimensionality reduction and pixel classification for
//! hyperspectral scenes.
//!
//! The crate is organised around the stages of a classification run:
//!
//! * [`linalg`]: dense matrices, Householder QR, Jacobi-based exact SVD and
//!   the randomized range finder / randomized SVD.
//! * [`dimred`]: exact PCA and randomized PCA over pixel-by-band matrices.
//! * [`hsi_data`]: band-sequential cube and ground-truth containers, labeled
//!   pixel extraction and stratified splitting.
//! * [`classify`]: RBF-kernel SVM trained by SMO (with grid-search CV) and a
//!   leaf-wise histogram GBDT with gradient-based one-side sampling.
//! * [`eval`]: confusion matrices, McNemar's test and classification maps.
//!
//! All randomness flows through [`rng::Rng`], so a seed fixes every output.

// Parameter checks are written `!(x > 0.0)` on purpose so NaN is rejected.
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod classify;
pub mod dimred;
pub mod error;
pub mod eval;
pub mod hsi_data;
pub mod linalg;
pub mod rng;
pub mod synthetic;

pub use classify::{
    gbdt_train, grid_search_cv, rbf_kernel, svm_train, Classifier, GbdtModel, GbdtParams,
    GridSearchResult, SvmModel, SvmParams,
};
pub use dimred::{fit_pca, fit_rpca, PcaMethod, PcaModel};
pub use error::{Error, Result};
pub use eval::{evaluate, mcnemar, render_map, EvalReport, McNemarMethod, McNemarResult, RgbImage};
pub use hsi_data::{extract_labeled, stratified_split, GroundTruth, HsiCube, SampleSet};
pub use linalg::{
    exact_svd, householder_qr, randomized_range_finder, randomized_svd, DenseMatrix,
    RandomizedSvdParams, SvdResult,
};
