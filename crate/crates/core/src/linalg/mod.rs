//! Dense linear algebra: matrices, QR, exact and randomized SVD.

mod matrix;
mod qr;
mod randomized;
mod svd;

pub use matrix::DenseMatrix;
pub use qr::householder_qr;
pub use randomized::{
    randomized_range_finder, randomized_svd, RandomizedSvdParams, DEFAULT_OVERSAMPLING,
    DEFAULT_POWER_ITERATIONS,
};
pub use svd::{
    exact_svd, max_principal_angle, symmetric_eigen, SvdResult, JACOBI_MAX_SWEEPS, JACOBI_TOLERANCE,
};
