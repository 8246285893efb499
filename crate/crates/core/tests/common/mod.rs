//! Independent reference computations shared by the integration and
//! acceptance suites.
#![allow(dead_code)]

use hsikit::classify::rbf_kernel;
use hsikit::linalg::DenseMatrix;

/// Dense RBF Gram matrix.
pub fn gram(x: &DenseMatrix, gamma: f64) -> Vec<Vec<f64>> {
    (0..x.rows())
        .map(|i| {
            (0..x.rows())
                .map(|j| rbf_kernel(x.row(i), x.row(j), gamma).unwrap())
                .collect()
        })
        .collect()
}

/// SVM dual objective `Σα − ½ Σ α_i α_j y_i y_j K_ij`.
pub fn dual_objective(k: &[Vec<f64>], y: &[f64], alpha: &[f64]) -> f64 {
    let n = alpha.len();
    let mut quad = 0.0;
    for i in 0..n {
        for j in 0..n {
            quad += alpha[i] * alpha[j] * y[i] * y[j] * k[i][j];
        }
    }
    alpha.iter().sum::<f64>() - 0.5 * quad
}

/// Maximise the dual over the feasible set by brute-force lattice search.
///
/// The last multiplier is fixed by `Σ y_i α_i = 0`; the others are searched
/// on an 11-point-per-axis lattice that is re-centred on the best feasible
/// point and shrunk until its spacing is negligible.
pub fn lattice_dual_max(k: &[Vec<f64>], y: &[f64], c: f64) -> f64 {
    let n = y.len();
    let free = n - 1;
    const STEPS: usize = 11;
    let mut centre = vec![c / 2.0; free];
    let mut radius = c / 2.0;
    let mut best = f64::NEG_INFINITY;
    let mut alpha = vec![0.0; n];
    let mut counter = vec![0usize; free];
    while radius > 1e-11 * c {
        let mut best_point = centre.clone();
        let total = STEPS.pow(free as u32);
        for code in 0..total {
            let mut rest = code;
            for slot in counter.iter_mut() {
                *slot = rest % STEPS;
                rest /= STEPS;
            }
            let mut balance = 0.0;
            for i in 0..free {
                let offset = radius * (2.0 * counter[i] as f64 / (STEPS - 1) as f64 - 1.0);
                alpha[i] = (centre[i] + offset).clamp(0.0, c);
                balance += y[i] * alpha[i];
            }
            let last = -y[free] * balance;
            if !(-1e-12..=c + 1e-12).contains(&last) {
                continue;
            }
            alpha[free] = last.clamp(0.0, c);
            let w = dual_objective(k, y, &alpha);
            if w > best {
                best = w;
                best_point.copy_from_slice(&alpha[..free]);
            }
        }
        centre = best_point;
        radius *= 0.6;
    }
    best
}

/// Five-point central difference of `f` at 0.
pub fn central_difference(f: impl Fn(f64) -> f64, h: f64) -> f64 {
    (-f(2.0 * h) + 8.0 * f(h) - 8.0 * f(-h) + f(-2.0 * h)) / (12.0 * h)
}

/// Relative agreement with a small absolute floor for values near zero.
pub fn close_relative(a: f64, b: f64, rel: f64) -> bool {
    (a - b).abs() <= rel * a.abs().max(b.abs()).max(1e-6)
}

/// Chi-square(1) upper tail `P(X > x)` by Simpson integration of the
/// standard normal density over `|Z| > √x`.
pub fn chi2_sf_by_integration(x: f64) -> f64 {
    let (a, b) = (x.sqrt(), 40.0);
    let steps = 200_000;
    let h = (b - a) / steps as f64;
    let f = |t: f64| (-t * t / 2.0).exp();
    let mut s = f(a) + f(b);
    for i in 1..steps {
        s += if i % 2 == 1 { 4.0 } else { 2.0 } * f(a + i as f64 * h);
    }
    s * h / 3.0 * (2.0 / std::f64::consts::PI).sqrt()
}

/// Two-sided exact McNemar p-value by enumerating all `2^(b+c)` ways the
/// discordant pairs could have fallen.
pub fn enumerated_mcnemar_p(b: u64, c: u64) -> f64 {
    let n = b + c;
    let observed = b.min(c);
    let extreme = (0u64..1 << n)
        .filter(|mask| {
            let k = mask.count_ones() as u64;
            k.min(n - k) <= observed
        })
        .count();
    extreme as f64 / (1u64 << n) as f64
}
