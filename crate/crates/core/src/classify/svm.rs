//! RBF-kernel support vector machine.
//!
//! Each class pair gets a binary machine trained by SMO on the dual
//!
//! ```text
//! min_α  ½ αᵀQα − eᵀα   s.t.  0 ≤ α_i ≤ C,  yᵀα = 0,   Q_ij = y_i y_j K(x_i, x_j)
//! ```
//!
//! The first working-set index is the maximal KKT violator; the second is
//! picked among violators by second-order gain. Training stops when the
//! maximal violation `m(α) − M(α)` drops below `tolerance`.
//!
//! Features are rescaled to `[0, 1]` per band with the training min/max
//! before training; the scaling is stored in the model and reapplied at
//! prediction time.

use std::collections::VecDeque;
use std::rc::Rc;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::{argmax_first, rbf, Classifier};
use crate::error::{dim_err, domain_err, Error, Result};
use crate::hsi_data::SampleSet;
use crate::linalg::DenseMatrix;

const TAU: f64 = 1e-12;
/// Kernel-row cache budget per binary problem.
const CACHE_BYTES: usize = 512 << 20;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct SvmParams {
    pub c: f64,
    pub gamma: f64,
    /// KKT violation at which SMO stops.
    pub tolerance: f64,
    pub max_iterations: usize,
}

impl Default for SvmParams {
    fn default() -> Self {
        Self {
            c: 600.0,
            gamma: 0.5,
            tolerance: 1e-3,
            max_iterations: 10_000_000,
        }
    }
}

impl SvmParams {
    pub fn new(c: f64, gamma: f64) -> Self {
        Self {
            c,
            gamma,
            ..Self::default()
        }
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.c > 0.0 && self.c.is_finite()) {
            return domain_err(format!("C must be positive, got {}", self.c));
        }
        if !(self.gamma > 0.0 && self.gamma.is_finite()) {
            return domain_err(format!("gamma must be positive, got {}", self.gamma));
        }
        if !(self.tolerance > 0.0) {
            return domain_err(format!(
                "tolerance must be positive, got {}",
                self.tolerance
            ));
        }
        if self.max_iterations == 0 {
            return domain_err("max_iterations must be at least 1");
        }
        Ok(())
    }
}

/// Per-band min/max rescaling to `[0, 1]`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FeatureScaling {
    pub min: Vec<f64>,
    /// `max − min`, or 1 for constant bands.
    pub range: Vec<f64>,
}

impl FeatureScaling {
    pub fn fit(x: &DenseMatrix) -> Self {
        let cols = x.cols();
        let mut min = vec![f64::INFINITY; cols];
        let mut max = vec![f64::NEG_INFINITY; cols];
        for r in x.row_iter() {
            for j in 0..cols {
                min[j] = min[j].min(r[j]);
                max[j] = max[j].max(r[j]);
            }
        }
        let range = min
            .iter()
            .zip(&max)
            .map(|(lo, hi)| if hi > lo { hi - lo } else { 1.0 })
            .collect();
        if x.rows() == 0 {
            min.iter_mut().for_each(|m| *m = 0.0);
        }
        Self { min, range }
    }

    pub fn apply_row(&self, row: &[f64], out: &mut [f64]) {
        for (((o, v), lo), r) in out.iter_mut().zip(row).zip(&self.min).zip(&self.range) {
            *o = (v - lo) / r;
        }
    }

    pub fn apply(&self, x: &DenseMatrix) -> DenseMatrix {
        let mut data = vec![0.0; x.rows() * x.cols()];
        if x.cols() > 0 {
            for (out, row) in data.chunks_mut(x.cols()).zip(x.row_iter()) {
                self.apply_row(row, out);
            }
        }
        DenseMatrix::from_vec(x.rows(), x.cols(), data)
    }
}

/// Result of one SMO run.
#[derive(Debug, Clone, PartialEq)]
pub struct SmoSolution {
    pub alpha: Vec<f64>,
    /// Offset: the decision function is `Σ α_i y_i K(x_i, x) − rho`.
    pub rho: f64,
    pub iterations: usize,
    /// `m(α) − M(α)` at termination.
    pub kkt_violation: f64,
    pub converged: bool,
    /// Dual objective in maximisation form, `eᵀα − ½ αᵀQα`.
    pub objective: f64,
}

/// LRU-ish cache of kernel rows.
struct KernelRows<'a> {
    x: &'a DenseMatrix,
    gamma: f64,
    rows: Vec<Option<Rc<Vec<f64>>>>,
    order: VecDeque<usize>,
    capacity: usize,
}

impl<'a> KernelRows<'a> {
    fn new(x: &'a DenseMatrix, gamma: f64) -> Self {
        let n = x.rows();
        let capacity = (CACHE_BYTES / (8 * n.max(1))).clamp(2, n.max(2));
        Self {
            x,
            gamma,
            rows: vec![None; n],
            order: VecDeque::new(),
            capacity,
        }
    }

    fn row(&mut self, i: usize) -> Rc<Vec<f64>> {
        if let Some(r) = &self.rows[i] {
            return Rc::clone(r);
        }
        if self.order.len() >= self.capacity {
            if let Some(old) = self.order.pop_front() {
                self.rows[old] = None;
            }
        }
        let xi = self.x.row(i);
        let r: Rc<Vec<f64>> = Rc::new(
            self.x
                .row_iter()
                .map(|xt| rbf(xi, xt, self.gamma))
                .collect(),
        );
        self.rows[i] = Some(Rc::clone(&r));
        self.order.push_back(i);
        r
    }
}

/// Solve one binary SVM dual. `y` holds ±1 labels.
pub fn smo_solve(
    x: &DenseMatrix,
    y: &[f64],
    c: f64,
    gamma: f64,
    tolerance: f64,
    max_iterations: usize,
) -> Result<SmoSolution> {
    let n = x.rows();
    if y.len() != n {
        return dim_err(format!("{n} rows but {} labels", y.len()));
    }
    if y.iter().any(|&v| v != 1.0 && v != -1.0) {
        return domain_err("binary labels must be +1 or -1");
    }
    let mut alpha = vec![0.0; n];
    let mut grad = vec![-1.0; n];
    let mut cache = KernelRows::new(x, gamma);
    // RBF: K(x, x) = 1.
    let qd = 1.0;

    let mut iterations = 0;
    let mut converged = false;
    while iterations < max_iterations {
        let Some((i, j)) = select_working_set(&alpha, &grad, y, c, tolerance, &mut cache) else {
            converged = true;
            break;
        };
        iterations += 1;

        let ki = cache.row(i);
        let kj = cache.row(j);
        let (old_i, old_j) = (alpha[i], alpha[j]);
        let kij = ki[j];

        if y[i] != y[j] {
            let quad = {
                let q = qd + qd + 2.0 * (y[i] * y[j] * kij);
                if q <= 0.0 {
                    TAU
                } else {
                    q
                }
            };
            let delta = (-grad[i] - grad[j]) / quad;
            let diff = alpha[i] - alpha[j];
            alpha[i] += delta;
            alpha[j] += delta;
            if diff > 0.0 {
                if alpha[j] < 0.0 {
                    alpha[j] = 0.0;
                    alpha[i] = diff;
                }
            } else if alpha[i] < 0.0 {
                alpha[i] = 0.0;
                alpha[j] = -diff;
            }
            if diff > 0.0 {
                if alpha[i] > c {
                    alpha[i] = c;
                    alpha[j] = c - diff;
                }
            } else if alpha[j] > c {
                alpha[j] = c;
                alpha[i] = c + diff;
            }
        } else {
            let quad = {
                let q = qd + qd - 2.0 * (y[i] * y[j] * kij);
                if q <= 0.0 {
                    TAU
                } else {
                    q
                }
            };
            let delta = (grad[i] - grad[j]) / quad;
            let sum = alpha[i] + alpha[j];
            alpha[i] -= delta;
            alpha[j] += delta;
            if sum > c {
                if alpha[i] > c {
                    alpha[i] = c;
                    alpha[j] = sum - c;
                }
            } else if alpha[j] < 0.0 {
                alpha[j] = 0.0;
                alpha[i] = sum;
            }
            if sum > c {
                if alpha[j] > c {
                    alpha[j] = c;
                    alpha[i] = sum - c;
                }
            } else if alpha[i] < 0.0 {
                alpha[i] = 0.0;
                alpha[j] = sum;
            }
        }

        let di = (alpha[i] - old_i) * y[i];
        let dj = (alpha[j] - old_j) * y[j];
        for t in 0..n {
            grad[t] += y[t] * (ki[t] * di + kj[t] * dj);
        }
    }

    let kkt_violation = max_violation(&alpha, &grad, y, c);
    let rho = offset(&alpha, &grad, y, c);
    let objective = alpha
        .iter()
        .zip(&grad)
        .map(|(a, g)| 0.5 * a - 0.5 * a * g)
        .sum();
    Ok(SmoSolution {
        alpha,
        rho,
        iterations,
        kkt_violation,
        converged,
        objective,
    })
}

#[inline]
fn in_up(alpha: f64, y: f64, c: f64) -> bool {
    if y > 0.0 {
        alpha < c
    } else {
        alpha > 0.0
    }
}

#[inline]
fn in_low(alpha: f64, y: f64, c: f64) -> bool {
    if y > 0.0 {
        alpha > 0.0
    } else {
        alpha < c
    }
}

/// Maximal violating `i`, second-order `j`. `None` once optimal within `tol`.
fn select_working_set(
    alpha: &[f64],
    grad: &[f64],
    y: &[f64],
    c: f64,
    tol: f64,
    cache: &mut KernelRows<'_>,
) -> Option<(usize, usize)> {
    let mut gmax = f64::NEG_INFINITY;
    let mut best_i = None;
    for t in 0..alpha.len() {
        if in_up(alpha[t], y[t], c) && -y[t] * grad[t] > gmax {
            gmax = -y[t] * grad[t];
            best_i = Some(t);
        }
    }
    let i = best_i?;
    let ki = cache.row(i);

    let mut gmin = f64::INFINITY;
    let mut best_j = None;
    let mut best_obj = f64::INFINITY;
    for t in 0..alpha.len() {
        if !in_low(alpha[t], y[t], c) {
            continue;
        }
        let yg = -y[t] * grad[t];
        gmin = gmin.min(yg);
        let grad_diff = gmax - yg;
        if grad_diff > 0.0 {
            let quad = 2.0 - 2.0 * ki[t];
            let quad = if quad > 0.0 { quad } else { TAU };
            let obj = -(grad_diff * grad_diff) / quad;
            if obj < best_obj {
                best_obj = obj;
                best_j = Some(t);
            }
        }
    }
    if gmax - gmin < tol {
        return None;
    }
    best_j.map(|j| (i, j))
}

fn max_violation(alpha: &[f64], grad: &[f64], y: &[f64], c: f64) -> f64 {
    let mut up = f64::NEG_INFINITY;
    let mut low = f64::INFINITY;
    for t in 0..alpha.len() {
        let yg = -y[t] * grad[t];
        if in_up(alpha[t], y[t], c) {
            up = up.max(yg);
        }
        if in_low(alpha[t], y[t], c) {
            low = low.min(yg);
        }
    }
    if up.is_finite() && low.is_finite() {
        (up - low).max(0.0)
    } else {
        0.0
    }
}

fn offset(alpha: &[f64], grad: &[f64], y: &[f64], c: f64) -> f64 {
    let mut ub = f64::INFINITY;
    let mut lb = f64::NEG_INFINITY;
    let mut free = 0usize;
    let mut free_sum = 0.0;
    for t in 0..alpha.len() {
        let yg = y[t] * grad[t];
        if alpha[t] >= c {
            if y[t] < 0.0 {
                ub = ub.min(yg)
            } else {
                lb = lb.max(yg)
            }
        } else if alpha[t] <= 0.0 {
            if y[t] > 0.0 {
                ub = ub.min(yg)
            } else {
                lb = lb.max(yg)
            }
        } else {
            free += 1;
            free_sum += yg;
        }
    }
    if free > 0 {
        free_sum / free as f64
    } else {
        (ub + lb) / 2.0
    }
}

/// Binary machine for the pair `(positive, negative)`; positive is the
/// smaller class id.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BinaryMachine {
    pub positive: u16,
    pub negative: u16,
    /// Support vectors in scaled feature space.
    pub support_vectors: DenseMatrix,
    /// `α_i · y_i` per support vector.
    pub dual_coef: Vec<f64>,
    pub rho: f64,
    pub iterations: usize,
    pub kkt_violation: f64,
    pub converged: bool,
}

impl BinaryMachine {
    pub fn decision(&self, scaled_row: &[f64], gamma: f64) -> f64 {
        let mut sum = 0.0;
        for (sv, coef) in self.support_vectors.row_iter().zip(&self.dual_coef) {
            sum += coef * rbf(sv, scaled_row, gamma);
        }
        sum - self.rho
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SvmModel {
    pub params: SvmParams,
    /// Class ids, ascending.
    pub classes: Vec<u16>,
    pub scaling: FeatureScaling,
    pub machines: Vec<BinaryMachine>,
    /// Non-fatal training notes (e.g. iteration cap reached).
    pub warnings: Vec<String>,
}

/// One-vs-one SMO training.
pub fn svm_train(train: &SampleSet, params: &SvmParams) -> Result<SvmModel> {
    params.validate()?;
    let classes = train.classes();
    if classes.len() < 2 {
        return Err(Error::Degenerate(format!(
            "SVM training needs at least 2 classes, got {}",
            classes.len()
        )));
    }
    let scaling = FeatureScaling::fit(&train.features);
    let scaled = scaling.apply(&train.features);
    let groups = train.rows_by_class();

    let pairs: Vec<(usize, usize)> = (0..groups.len())
        .flat_map(|a| (a + 1..groups.len()).map(move |b| (a, b)))
        .collect();
    let machines: Vec<BinaryMachine> = pairs
        .par_iter()
        .map(|&(a, b)| {
            let (pos, pos_rows) = &groups[a];
            let (neg, neg_rows) = &groups[b];
            let rows: Vec<usize> = pos_rows.iter().chain(neg_rows).copied().collect();
            let x = scaled.select_rows(&rows);
            if x.row_iter().all(|r| r == x.row(0)) {
                return Err(Error::Degenerate(format!(
                    "classes {pos} and {neg} share a single identical feature row"
                )));
            }
            let y: Vec<f64> = (0..rows.len())
                .map(|i| if i < pos_rows.len() { 1.0 } else { -1.0 })
                .collect();
            let sol = smo_solve(
                &x,
                &y,
                params.c,
                params.gamma,
                params.tolerance,
                params.max_iterations,
            )?;
            let sv: Vec<usize> = (0..rows.len()).filter(|&i| sol.alpha[i] > 0.0).collect();
            Ok(BinaryMachine {
                positive: *pos,
                negative: *neg,
                support_vectors: x.select_rows(&sv),
                dual_coef: sv.iter().map(|&i| sol.alpha[i] * y[i]).collect(),
                rho: sol.rho,
                iterations: sol.iterations,
                kkt_violation: sol.kkt_violation,
                converged: sol.converged,
            })
        })
        .collect::<Result<_>>()?;

    let warnings = machines
        .iter()
        .filter(|m| !m.converged)
        .map(|m| {
            format!(
                "machine {}-vs-{} stopped at the iteration cap ({}) with KKT violation {:.3e}",
                m.positive, m.negative, m.iterations, m.kkt_violation
            )
        })
        .collect::<Vec<_>>();
    for w in &warnings {
        log::warn!("{w}");
    }

    Ok(SvmModel {
        params: *params,
        classes,
        scaling,
        machines,
        warnings,
    })
}

impl SvmModel {
    /// One-vs-one votes for a raw (unscaled) feature row.
    pub fn votes(&self, row: &[f64]) -> Vec<u32> {
        let mut scaled = vec![0.0; row.len()];
        self.scaling.apply_row(row, &mut scaled);
        let mut votes = vec![0u32; self.classes.len()];
        for m in &self.machines {
            let winner = if m.decision(&scaled, self.params.gamma) >= 0.0 {
                m.positive
            } else {
                m.negative
            };
            let slot = self
                .classes
                .binary_search(&winner)
                .expect("machine classes are model classes");
            votes[slot] += 1;
        }
        votes
    }
}

impl Classifier for SvmModel {
    fn predict(&self, x: &DenseMatrix) -> Result<Vec<u16>> {
        if x.cols() != self.n_features() {
            return dim_err(format!(
                "model trained on {} features, input has {}",
                self.n_features(),
                x.cols()
            ));
        }
        Ok((0..x.rows())
            .into_par_iter()
            .map(|i| {
                let votes: Vec<f64> = self.votes(x.row(i)).into_iter().map(f64::from).collect();
                self.classes[argmax_first(&votes)]
            })
            .collect())
    }

    fn n_features(&self) -> usize {
        self.scaling.min.len()
    }
}
