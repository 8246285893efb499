//! Fixtures shared by the criterion benchmarks.

use hsikit::hsi_data::{extract_labeled, stratified_split, SampleSet};
use hsikit::linalg::DenseMatrix;
use hsikit::synthetic::{gaussian_scene, matrix_with_spectrum, SceneSpec};

/// `rows × cols` matrix with slowly decaying singular values `1 / (1 + i)`.
pub fn decaying_matrix(rows: usize, cols: usize, seed: u64) -> DenseMatrix {
    let sigma: Vec<f64> = (0..rows.min(cols))
        .map(|i| 1.0 / (1.0 + i as f64))
        .collect();
    matrix_with_spectrum(rows, cols, &sigma, seed).expect("valid spectrum")
}

/// Training and test pixels of a synthetic scene split 70 / 30.
pub fn scene_split(
    height: usize,
    width: usize,
    bands: usize,
    classes: usize,
) -> (SampleSet, SampleSet) {
    let spec = SceneSpec {
        height,
        width,
        bands,
        classes,
        noise: 0.1,
        ..SceneSpec::default()
    };
    let (cube, gt) = gaussian_scene(&spec).expect("valid scene");
    let samples = extract_labeled(&cube, &gt).expect("matching shapes");
    stratified_split(&samples, 0.7, 0).expect("valid fraction")
}
