//! `bench`: wall-clock comparison of exact and randomized SVD.

use std::time::Instant;

use hsikit::linalg::{exact_svd, randomized_svd, RandomizedSvdParams, DEFAULT_OVERSAMPLING};
use hsikit::synthetic::matrix_with_spectrum;
use serde::Serialize;

use crate::error::usage;

#[derive(Debug, Clone)]
pub struct BenchSpec {
    pub rows: usize,
    pub cols: usize,
    pub ranks: Vec<usize>,
    pub seeds: Vec<u64>,
    pub repeats: usize,
}

#[derive(Debug, Clone, Serialize)]
pub struct BenchRow {
    pub rows: usize,
    pub cols: usize,
    pub k: usize,
    pub seed: u64,
    pub exact_ms: f64,
    pub randomized_ms: f64,
    /// Largest relative gap between the two sets of top-k singular values.
    pub max_relative_gap: f64,
}

fn median(mut v: Vec<f64>) -> f64 {
    v.sort_by(f64::total_cmp);
    let n = v.len();
    if n % 2 == 1 {
        v[n / 2]
    } else {
        (v[n / 2 - 1] + v[n / 2]) / 2.0
    }
}

/// Median-of-`repeats` timings for every `(k, seed)` cell on a test matrix
/// with singular values `1 / (1 + i)`. Oversampling shrinks near the full
/// rank so `k = min(rows, cols)` is still valid.
pub fn cmd_bench(spec: &BenchSpec) -> anyhow::Result<Vec<BenchRow>> {
    if spec.ranks.is_empty() {
        return usage("bench needs at least one k");
    }
    if spec.seeds.is_empty() || spec.repeats == 0 {
        return usage("bench needs at least one seed and one repeat");
    }
    let full = spec.rows.min(spec.cols);
    if full == 0 {
        return usage("bench matrix must be non-empty");
    }
    if let Some(&k) = spec.ranks.iter().find(|&&k| k == 0 || k > full) {
        return usage(format!("k = {k} outside 1..={full}"));
    }
    let sigma: Vec<f64> = (0..full).map(|i| 1.0 / (1.0 + i as f64)).collect();
    let mut rows = Vec::new();
    for &seed in &spec.seeds {
        let a = matrix_with_spectrum(spec.rows, spec.cols, &sigma, seed)?;
        for &k in &spec.ranks {
            let params = RandomizedSvdParams::new(k, seed)
                .with_oversampling(DEFAULT_OVERSAMPLING.min(full - k));
            let mut exact_t = Vec::new();
            let mut rand_t = Vec::new();
            let mut gap = 0.0f64;
            for _ in 0..spec.repeats {
                let t = Instant::now();
                let exact = exact_svd(&a, k)?;
                exact_t.push(t.elapsed().as_secs_f64() * 1e3);
                let t = Instant::now();
                let approx = randomized_svd(&a, &params)?;
                rand_t.push(t.elapsed().as_secs_f64() * 1e3);
                for (e, r) in exact.s.iter().zip(&approx.s) {
                    gap = gap.max((e - r).abs() / e);
                }
            }
            rows.push(BenchRow {
                rows: spec.rows,
                cols: spec.cols,
                k,
                seed,
                exact_ms: median(exact_t),
                randomized_ms: median(rand_t),
                max_relative_gap: gap,
            });
        }
    }
    Ok(rows)
}

pub fn render_table(rows: &[BenchRow]) -> String {
    let mut out = format!(
        "{:>6} {:>6} {:>5} {:>6} {:>12} {:>14} {:>10}\n",
        "rows", "cols", "k", "seed", "exact_ms", "randomized_ms", "max_gap"
    );
    for r in rows {
        out.push_str(&format!(
            "{:>6} {:>6} {:>5} {:>6} {:>12.3} {:>14.3} {:>10.2e}\n",
            r.rows, r.cols, r.k, r.seed, r.exact_ms, r.randomized_ms, r.max_relative_gap
        ));
    }
    out
}
