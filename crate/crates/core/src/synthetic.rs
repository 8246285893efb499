//! Generators for test matrices and synthetic scenes.

use crate::error::{dim_err, domain_err, Result};
use crate::hsi_data::{GroundTruth, HsiCube};
use crate::linalg::{householder_qr, DenseMatrix};
use crate::rng::Rng;

/// `m × n` matrix `U·diag(sigma)·Vᵀ` with Haar-like random orthonormal
/// factors, so its singular values are exactly `sigma` (up to rounding).
pub fn matrix_with_spectrum(m: usize, n: usize, sigma: &[f64], seed: u64) -> Result<DenseMatrix> {
    let r = sigma.len();
    if r == 0 || r > m.min(n) {
        return dim_err(format!("{r} singular values do not fit a {m}x{n} matrix"));
    }
    let mut rng = Rng::new(seed);
    let mut gaussian = |rows: usize| {
        let mut data = vec![0.0; rows * r];
        rng.fill_normal(&mut data);
        DenseMatrix::from_vec(rows, r, data)
    };
    let (u, _) = householder_qr(&gaussian(m))?;
    let (v, _) = householder_qr(&gaussian(n))?;
    let mut us = u;
    for i in 0..m {
        for (x, s) in us.row_mut(i).iter_mut().zip(sigma) {
            *x *= s;
        }
    }
    us.matmul_t(&v)
}

/// Layout of a synthetic labeled scene.
#[derive(Debug, Clone)]
pub struct SceneSpec {
    pub height: usize,
    pub width: usize,
    pub bands: usize,
    pub classes: usize,
    /// Per-band standard deviation of the pixel noise around class means.
    pub noise: f64,
    /// Fraction of pixels left unlabeled (label 0).
    pub unlabeled_fraction: f64,
    pub seed: u64,
}

impl Default for SceneSpec {
    fn default() -> Self {
        Self {
            height: 40,
            width: 40,
            bands: 60,
            classes: 5,
            noise: 0.03,
            unlabeled_fraction: 0.1,
            seed: 1,
        }
    }
}

/// Scene of vertical class stripes. Each class has a smooth random mean
/// spectrum in `[0.1, 0.9]`; pixels are the class mean plus Gaussian noise.
pub fn gaussian_scene(spec: &SceneSpec) -> Result<(HsiCube, GroundTruth)> {
    if spec.classes == 0 || spec.classes > u16::MAX as usize {
        return domain_err(format!("class count {} out of range", spec.classes));
    }
    if !(0.0..1.0).contains(&spec.unlabeled_fraction) || !(spec.noise >= 0.0) {
        return domain_err("unlabeled fraction must lie in [0, 1) and noise must be non-negative");
    }
    let mut rng = Rng::new(spec.seed);
    let (h, w, b) = (spec.height, spec.width, spec.bands);

    let means: Vec<Vec<f64>> = (0..spec.classes)
        .map(|_| {
            // A few random bumps give a reflectance-like curve.
            let bumps: Vec<(f64, f64, f64)> = (0..4)
                .map(|_| {
                    (
                        rng.uniform(),
                        0.05 + 0.2 * rng.uniform(),
                        rng.uniform() - 0.5,
                    )
                })
                .collect();
            let base = 0.3 + 0.4 * rng.uniform();
            (0..b)
                .map(|band| {
                    let t = band as f64 / b.max(1) as f64;
                    let v = bumps.iter().fold(base, |acc, &(c, width, amp)| {
                        acc + amp * (-((t - c) / width).powi(2)).exp()
                    });
                    v.clamp(0.1, 0.9)
                })
                .collect()
        })
        .collect();

    let mut labels = vec![0u16; h * w];
    let mut values = vec![0f32; h * w * b];
    let mut noise = vec![0.0; b];
    for row in 0..h {
        for col in 0..w {
            let pixel = row * w + col;
            let class = col * spec.classes / w.max(1);
            rng.fill_normal(&mut noise);
            for band in 0..b {
                let v = means[class][band] + spec.noise * noise[band];
                values[band * h * w + pixel] = v as f32;
            }
            if rng.uniform() >= spec.unlabeled_fraction {
                labels[pixel] = (class + 1) as u16;
            }
        }
    }
    let cube = HsiCube::new(h, w, b, values)?;
    let names = (1..=spec.classes).map(|c| format!("class {c}")).collect();
    let gt = GroundTruth::new(h, w, labels, names)?;
    Ok((cube, gt))
}

/// Ground truth whose per-class label counts match `counts` exactly,
/// with labeled pixels scattered over an `h × w` raster.
pub fn ground_truth_with_counts(
    height: usize,
    width: usize,
    counts: &[usize],
    seed: u64,
) -> Result<GroundTruth> {
    let total: usize = counts.iter().sum();
    if total > height * width {
        return dim_err(format!(
            "{total} labels do not fit a {height}x{width} raster"
        ));
    }
    let mut labels = vec![0u16; height * width];
    let mut slots: Vec<usize> = (0..height * width).collect();
    Rng::new(seed).shuffle(&mut slots);
    let mut it = slots.into_iter();
    for (c, &count) in counts.iter().enumerate() {
        for pixel in it.by_ref().take(count) {
            labels[pixel] = (c + 1) as u16;
        }
    }
    let names = (1..=counts.len()).map(|c| format!("class {c}")).collect();
    GroundTruth::new(height, width, labels, names)
}
