//! Leaf-wise histogram gradient boosting with gradient-based one-side
//! sampling (GOSS).
//!
//! Multiclass boosting on softmax cross-entropy: every round fits one
//! regression tree per class to the per-sample gradients `p_k − [y = k]`
//! and hessians `p_k(1 − p_k)`. Trees grow leaf-wise: the open leaf with
//! the largest histogram split gain is always split next, until
//! `max_leaves` is reached or no split has positive gain. Leaf weights are
//! the Newton step `−G / (H + λ)` shrunk by the learning rate.
//!
//! When GOSS is on (`0 < a` and `a + b < 1`), each round keeps the `a·n`
//! samples with the largest summed `|gradient|`, draws `b·n` of the rest
//! uniformly, and multiplies the drawn samples' gradients and hessians by
//! `(1 − a) / b`.

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::{argmax_first, Classifier};
use crate::error::{dim_err, domain_err, Error, Result};
use crate::hsi_data::SampleSet;
use crate::linalg::DenseMatrix;
use crate::rng::Rng;

/// L2 penalty `λ` in the leaf-weight and gain formulas.
pub const LEAF_L2: f64 = 1.0;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct GbdtParams {
    /// Boosting rounds (one tree per class per round).
    pub num_trees: usize,
    pub learning_rate: f64,
    pub max_leaves: usize,
    pub min_samples_leaf: usize,
    /// Histogram bins per feature (at most 256).
    pub num_bins: usize,
    /// GOSS `a`: fraction of largest-gradient samples always kept.
    pub goss_top_rate: f64,
    /// GOSS `b`: fraction sampled from the remainder.
    pub goss_other_rate: f64,
    pub seed: u64,
}

impl Default for GbdtParams {
    fn default() -> Self {
        Self {
            num_trees: 200,
            learning_rate: 0.1,
            max_leaves: 31,
            min_samples_leaf: 20,
            num_bins: 64,
            goss_top_rate: 0.2,
            goss_other_rate: 0.1,
            seed: 0,
        }
    }
}

impl GbdtParams {
    pub fn goss_enabled(&self) -> bool {
        self.goss_top_rate > 0.0 && self.goss_top_rate + self.goss_other_rate < 1.0
    }

    /// Same parameters with one-side sampling switched off.
    pub fn without_goss(mut self) -> Self {
        self.goss_top_rate = 1.0;
        self.goss_other_rate = 0.0;
        self
    }

    pub fn validate(&self) -> Result<()> {
        if self.num_trees == 0 {
            return domain_err("num_trees must be at least 1");
        }
        if !(self.learning_rate > 0.0 && self.learning_rate <= 1.0) {
            return domain_err(format!(
                "learning rate {} outside (0, 1]",
                self.learning_rate
            ));
        }
        if self.max_leaves < 2 {
            return domain_err("max_leaves must be at least 2");
        }
        if !(2..=256).contains(&self.num_bins) {
            return domain_err(format!("num_bins {} outside 2..=256", self.num_bins));
        }
        let (a, b) = (self.goss_top_rate, self.goss_other_rate);
        if !(0.0..=1.0).contains(&a) || !(0.0..=1.0).contains(&b) || a + b > 1.0 {
            return domain_err(format!(
                "GOSS rates a = {a}, b = {b} need a, b in [0, 1] and a + b <= 1"
            ));
        }
        if self.goss_enabled() && b <= 0.0 {
            return domain_err("GOSS with a < 1 needs a positive sampling rate b");
        }
        Ok(())
    }
}

/// Per-feature split thresholds from training-set quantiles.
///
/// A value `x` falls in bin `#{t : t < x}`; a split after bin `s` sends
/// `x ≤ thresholds[s]` left.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BinMapper {
    pub thresholds: Vec<Vec<f64>>,
}

impl BinMapper {
    pub fn fit(x: &DenseMatrix, num_bins: usize) -> Self {
        let thresholds = (0..x.cols())
            .map(|j| {
                let mut v = x.column(j);
                v.sort_by(f64::total_cmp);
                feature_thresholds(&v, num_bins)
            })
            .collect();
        Self { thresholds }
    }

    pub fn bins(&self, feature: usize) -> usize {
        self.thresholds[feature].len() + 1
    }

    #[inline]
    pub fn bin(&self, feature: usize, value: f64) -> u8 {
        self.thresholds[feature].partition_point(|&t| t < value) as u8
    }
}

fn midpoint(a: f64, b: f64) -> f64 {
    let m = a + (b - a) / 2.0;
    if m >= b {
        a
    } else {
        m
    }
}

fn feature_thresholds(sorted: &[f64], num_bins: usize) -> Vec<f64> {
    let mut unique = sorted.to_vec();
    unique.dedup();
    if unique.len() <= num_bins {
        return unique.windows(2).map(|w| midpoint(w[0], w[1])).collect();
    }
    let n = sorted.len();
    let mut out: Vec<f64> = Vec::with_capacity(num_bins - 1);
    for q in 1..num_bins {
        let lower = sorted[(q * n / num_bins).max(1) - 1];
        // Cut between this quantile value and the next distinct value.
        let next = unique.partition_point(|&u| u <= lower);
        if next < unique.len() {
            let t = midpoint(lower, unique[next]);
            if out.last().is_none_or(|&last| t > last) {
                out.push(t);
            }
        }
    }
    out
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum TreeNode {
    Split {
        feature: usize,
        threshold: f64,
        left: usize,
        right: usize,
    },
    Leaf {
        value: f64,
    },
}

/// Binary regression tree; node 0 is the root.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Tree {
    pub nodes: Vec<TreeNode>,
}

impl Tree {
    pub fn predict_row(&self, row: &[f64]) -> f64 {
        let mut at = 0;
        loop {
            match self.nodes[at] {
                TreeNode::Leaf { value } => return value,
                TreeNode::Split {
                    feature,
                    threshold,
                    left,
                    right,
                } => {
                    at = if row[feature] <= threshold {
                        left
                    } else {
                        right
                    };
                }
            }
        }
    }

    pub fn num_leaves(&self) -> usize {
        self.nodes
            .iter()
            .filter(|n| matches!(n, TreeNode::Leaf { .. }))
            .count()
    }
}

/// One leaf-wise split decision, recorded for inspection.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SplitEvent {
    pub gain: f64,
    pub feature: usize,
    pub threshold: f64,
    /// Best gain among the other open leaves at that moment.
    pub best_other_gain: Option<f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GbdtModel {
    pub params: GbdtParams,
    /// Class ids, ascending.
    pub classes: Vec<u16>,
    /// Initial score per class: log of the training class frequency.
    pub priors: Vec<f64>,
    /// `rounds[r][k]` is round `r`'s tree for class `classes[k]`.
    pub rounds: Vec<Vec<Tree>>,
    pub n_features: usize,
    /// Mean training cross-entropy before boosting and after every round.
    pub train_loss: Vec<f64>,
}

/// `−log softmax(scores)[label]`.
pub fn softmax_cross_entropy(scores: &[f64], label: usize) -> f64 {
    let max = scores.iter().cloned().fold(f64::NEG_INFINITY, f64::max);
    let lse = max + scores.iter().map(|s| (s - max).exp()).sum::<f64>().ln();
    lse - scores[label]
}

/// Per-class gradient `p_k − [k = label]` and diagonal hessian `p_k(1 − p_k)`.
pub fn softmax_gradients(scores: &[f64], label: usize) -> (Vec<f64>, Vec<f64>) {
    let max = scores.iter().cloned().fold(f64::NEG_INFINITY, f64::max);
    let exps: Vec<f64> = scores.iter().map(|s| (s - max).exp()).collect();
    let total: f64 = exps.iter().sum();
    let mut grad = Vec::with_capacity(scores.len());
    let mut hess = Vec::with_capacity(scores.len());
    for (k, e) in exps.iter().enumerate() {
        let p = e / total;
        grad.push(if k == label { p - 1.0 } else { p });
        hess.push(p * (1.0 - p));
    }
    (grad, hess)
}

/// GOSS row selection. Returns ascending sample indices and their weights.
pub fn goss_sample(
    magnitude: &[f64],
    top_rate: f64,
    other_rate: f64,
    rng: &mut Rng,
) -> (Vec<usize>, Vec<f64>) {
    let n = magnitude.len();
    let top_n = ((top_rate * n as f64).round() as usize).min(n);
    let other_n = ((other_rate * n as f64).round() as usize).min(n - top_n);
    let mut order: Vec<usize> = (0..n).collect();
    order.sort_by(|&i, &j| magnitude[j].total_cmp(&magnitude[i]));
    let amplify = (1.0 - top_rate) / other_rate;

    let mut picked: Vec<(usize, f64)> = order[..top_n].iter().map(|&i| (i, 1.0)).collect();
    let rest = &order[top_n..];
    for pos in rng.sample_indices(rest.len(), other_n) {
        picked.push((rest[pos], amplify));
    }
    picked.sort_unstable_by_key(|&(i, _)| i);
    picked.into_iter().unzip()
}

struct Binned {
    n: usize,
    /// Column-major bin codes.
    codes: Vec<u8>,
}

impl Binned {
    fn new(x: &DenseMatrix, mapper: &BinMapper) -> Self {
        let n = x.rows();
        let mut codes = vec![0u8; n * x.cols()];
        for (i, row) in x.row_iter().enumerate() {
            for (f, &v) in row.iter().enumerate() {
                codes[f * n + i] = mapper.bin(f, v);
            }
        }
        Self { n, codes }
    }

    #[inline]
    fn code(&self, feature: usize, sample: usize) -> usize {
        self.codes[feature * self.n + sample] as usize
    }
}

#[derive(Clone, Copy)]
struct Candidate {
    gain: f64,
    feature: usize,
    bin: usize,
}

struct OpenLeaf {
    node: usize,
    /// Positions into the round's sampled row list.
    members: Vec<usize>,
    grad: f64,
    hess: f64,
    best: Option<Candidate>,
}

/// Inputs shared by every tree of one boosting round.
struct TreeInputs<'a> {
    binned: &'a Binned,
    mapper: &'a BinMapper,
    rows: &'a [usize],
    weights: &'a [f64],
    params: &'a GbdtParams,
}

impl TreeInputs<'_> {
    fn leaf(&self, node: usize, members: Vec<usize>, grad: &[f64], hess: &[f64]) -> OpenLeaf {
        let mut g = 0.0;
        let mut h = 0.0;
        for &m in &members {
            let s = self.rows[m];
            g += self.weights[m] * grad[s];
            h += self.weights[m] * hess[s];
        }
        let best = self.best_split(&members, g, h, grad, hess);
        OpenLeaf {
            node,
            members,
            grad: g,
            hess: h,
            best,
        }
    }

    fn best_split(
        &self,
        members: &[usize],
        g: f64,
        h: f64,
        grad: &[f64],
        hess: &[f64],
    ) -> Option<Candidate> {
        let min_leaf = self.params.min_samples_leaf.max(1);
        if members.len() < 2 * min_leaf {
            return None;
        }
        let parent = g * g / (h + LEAF_L2);
        let mut best: Option<Candidate> = None;
        let mut hist_g = [0.0f64; 256];
        let mut hist_h = [0.0f64; 256];
        let mut hist_c = [0usize; 256];
        for f in 0..self.mapper.thresholds.len() {
            let bins = self.mapper.bins(f);
            if bins < 2 {
                continue;
            }
            hist_g[..bins].fill(0.0);
            hist_h[..bins].fill(0.0);
            hist_c[..bins].fill(0);
            for &m in members {
                let s = self.rows[m];
                let b = self.binned.code(f, s);
                hist_g[b] += self.weights[m] * grad[s];
                hist_h[b] += self.weights[m] * hess[s];
                hist_c[b] += 1;
            }
            let (mut gl, mut hl, mut cl) = (0.0, 0.0, 0usize);
            for b in 0..bins - 1 {
                gl += hist_g[b];
                hl += hist_h[b];
                cl += hist_c[b];
                if cl < min_leaf {
                    continue;
                }
                if members.len() - cl < min_leaf {
                    break;
                }
                let (gr, hr) = (g - gl, h - hl);
                let gain = 0.5 * (gl * gl / (hl + LEAF_L2) + gr * gr / (hr + LEAF_L2) - parent);
                if gain > best.map_or(0.0, |c| c.gain) {
                    best = Some(Candidate {
                        gain,
                        feature: f,
                        bin: b,
                    });
                }
            }
        }
        best
    }

    fn grow(&self, grad: &[f64], hess: &[f64]) -> (Tree, Vec<SplitEvent>) {
        let mut nodes = vec![TreeNode::Leaf { value: 0.0 }];
        let mut leaves = vec![self.leaf(0, (0..self.rows.len()).collect(), grad, hess)];
        let mut events = Vec::new();

        while leaves.len() < self.params.max_leaves {
            let mut pick: Option<usize> = None;
            for (i, leaf) in leaves.iter().enumerate() {
                if let Some(c) = leaf.best {
                    if pick.is_none_or(|p| c.gain > leaves[p].best.unwrap().gain) {
                        pick = Some(i);
                    }
                }
            }
            let Some(idx) = pick else { break };
            let cand = leaves[idx].best.unwrap();
            let best_other_gain = leaves
                .iter()
                .enumerate()
                .filter(|&(i, _)| i != idx)
                .filter_map(|(_, l)| l.best.map(|c| c.gain))
                .reduce(f64::max);
            let threshold = self.mapper.thresholds[cand.feature][cand.bin];
            events.push(SplitEvent {
                gain: cand.gain,
                feature: cand.feature,
                threshold,
                best_other_gain,
            });

            let leaf = leaves.swap_remove(idx);
            let (left_members, right_members): (Vec<usize>, Vec<usize>) = leaf
                .members
                .iter()
                .partition(|&&m| self.binned.code(cand.feature, self.rows[m]) <= cand.bin);
            let left = nodes.len();
            nodes.push(TreeNode::Leaf { value: 0.0 });
            nodes.push(TreeNode::Leaf { value: 0.0 });
            nodes[leaf.node] = TreeNode::Split {
                feature: cand.feature,
                threshold,
                left,
                right: left + 1,
            };
            let l = self.leaf(left, left_members, grad, hess);
            let r = self.leaf(left + 1, right_members, grad, hess);
            // Keep open leaves ordered by node id so gain ties resolve the
            // same way regardless of removal order.
            leaves.push(l);
            leaves.push(r);
            leaves.sort_by_key(|l| l.node);
        }

        for leaf in &leaves {
            let value = -leaf.grad / (leaf.hess + LEAF_L2) * self.params.learning_rate;
            nodes[leaf.node] = TreeNode::Leaf { value };
        }
        (Tree { nodes }, events)
    }
}

/// Train a multiclass GBDT.
pub fn gbdt_train(train: &SampleSet, params: &GbdtParams) -> Result<GbdtModel> {
    gbdt_train_traced(train, params).map(|(model, _)| model)
}

/// [`gbdt_train`] that also returns every split decision, in order.
pub fn gbdt_train_traced(
    train: &SampleSet,
    params: &GbdtParams,
) -> Result<(GbdtModel, Vec<SplitEvent>)> {
    params.validate()?;
    let classes = train.classes();
    if classes.len() < 2 {
        return Err(Error::Degenerate(format!(
            "boosting needs at least 2 classes, got {}: all gradients vanish",
            classes.len()
        )));
    }
    let k = classes.len();
    let n = train.len();
    let x = &train.features;
    let target: Vec<usize> = train
        .labels
        .iter()
        .map(|l| classes.binary_search(l).expect("label is a class"))
        .collect();
    let mut counts = vec![0usize; k];
    target.iter().for_each(|&t| counts[t] += 1);
    let priors: Vec<f64> = counts.iter().map(|&c| (c as f64 / n as f64).ln()).collect();

    let mapper = BinMapper::fit(x, params.num_bins);
    let binned = Binned::new(x, &mapper);
    let mut scores: Vec<f64> = (0..n).flat_map(|_| priors.iter().copied()).collect();
    let mean_loss = |scores: &[f64]| -> f64 {
        (0..n)
            .map(|i| softmax_cross_entropy(&scores[i * k..(i + 1) * k], target[i]))
            .sum::<f64>()
            / n as f64
    };

    let mut rng = Rng::new(params.seed);
    let mut train_loss = vec![mean_loss(&scores)];
    let mut rounds = Vec::with_capacity(params.num_trees);
    let mut events = Vec::new();
    let mut grad = vec![vec![0.0; n]; k];
    let mut hess = vec![vec![0.0; n]; k];
    let mut magnitude = vec![0.0; n];

    for round in 0..params.num_trees {
        for i in 0..n {
            let (g, h) = softmax_gradients(&scores[i * k..(i + 1) * k], target[i]);
            magnitude[i] = g.iter().map(|v| v.abs()).sum();
            for c in 0..k {
                grad[c][i] = g[c];
                hess[c][i] = h[c];
            }
        }
        if round == 0 && magnitude.iter().all(|&m| m == 0.0) {
            return Err(Error::Degenerate(
                "all gradients are zero at the first round".into(),
            ));
        }

        let (rows, weights) = if params.goss_enabled() {
            goss_sample(
                &magnitude,
                params.goss_top_rate,
                params.goss_other_rate,
                &mut rng,
            )
        } else {
            ((0..n).collect(), vec![1.0; n])
        };
        let inputs = TreeInputs {
            binned: &binned,
            mapper: &mapper,
            rows: &rows,
            weights: &weights,
            params,
        };

        let grown: Vec<(Tree, Vec<SplitEvent>)> = (0..k)
            .into_par_iter()
            .map(|c| inputs.grow(&grad[c], &hess[c]))
            .collect();
        let mut trees = Vec::with_capacity(k);
        for (c, (tree, ev)) in grown.into_iter().enumerate() {
            for (i, row) in x.row_iter().enumerate() {
                scores[i * k + c] += tree.predict_row(row);
            }
            events.extend(ev);
            trees.push(tree);
        }
        rounds.push(trees);
        train_loss.push(mean_loss(&scores));
    }

    let model = GbdtModel {
        params: *params,
        classes,
        priors,
        rounds,
        n_features: x.cols(),
        train_loss,
    };
    Ok((model, events))
}

impl GbdtModel {
    /// Accumulated per-class scores for one row.
    pub fn raw_scores(&self, row: &[f64]) -> Vec<f64> {
        let mut s = self.priors.clone();
        for trees in &self.rounds {
            for (acc, tree) in s.iter_mut().zip(trees) {
                *acc += tree.predict_row(row);
            }
        }
        s
    }
}

impl Classifier for GbdtModel {
    fn predict(&self, x: &DenseMatrix) -> Result<Vec<u16>> {
        if x.cols() != self.n_features {
            return dim_err(format!(
                "model trained on {} features, input has {}",
                self.n_features,
                x.cols()
            ));
        }
        Ok((0..x.rows())
            .into_par_iter()
            .map(|i| self.classes[argmax_first(&self.raw_scores(x.row(i)))])
            .collect())
    }

    fn n_features(&self) -> usize {
        self.n_features
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn set_from(rows: Vec<Vec<f64>>, labels: Vec<u16>) -> SampleSet {
        let n = labels.len();
        SampleSet::new(
            DenseMatrix::from_rows(&rows).unwrap(),
            labels,
            (0..n).collect(),
        )
        .unwrap()
    }

    fn two_gaussians(n: usize, seed: u64) -> SampleSet {
        let mut rng = Rng::new(seed);
        let mut rows = Vec::new();
        let mut labels = Vec::new();
        for i in 0..n {
            let class = 1 + (i % 2) as u16;
            let centre = if class == 1 { -2.0 } else { 2.0 };
            let (a, b) = rng.normal_pair();
            rows.push(vec![centre + 0.5 * a, 0.5 * b]);
            labels.push(class);
        }
        set_from(rows, labels)
    }

    #[test]
    fn single_class_is_degenerate() {
        let set = set_from(vec![vec![0.0], vec![1.0]], vec![3, 3]);
        assert!(matches!(
            gbdt_train(&set, &GbdtParams::default()),
            Err(Error::Degenerate(_))
        ));
    }

    #[test]
    fn params_validation() {
        let bad = [
            GbdtParams {
                num_trees: 0,
                ..Default::default()
            },
            GbdtParams {
                learning_rate: 0.0,
                ..Default::default()
            },
            GbdtParams {
                max_leaves: 1,
                ..Default::default()
            },
            GbdtParams {
                num_bins: 1,
                ..Default::default()
            },
            GbdtParams {
                num_bins: 300,
                ..Default::default()
            },
            GbdtParams {
                goss_top_rate: 0.7,
                goss_other_rate: 0.5,
                ..Default::default()
            },
            GbdtParams {
                goss_top_rate: 0.5,
                goss_other_rate: 0.0,
                ..Default::default()
            },
        ];
        for p in bad {
            assert!(p.validate().is_err(), "{p:?}");
        }
        assert!(GbdtParams::default().goss_enabled());
        assert!(!GbdtParams::default().without_goss().goss_enabled());
        assert!(!GbdtParams {
            goss_top_rate: 0.3,
            goss_other_rate: 0.7,
            ..Default::default()
        }
        .goss_enabled());
    }

    #[test]
    fn threshold_split_matches_exhaustive_search() {
        // One feature, labels switch between x = 0.45 and x = 0.55.
        let xs: Vec<f64> = (0..40).map(|i| i as f64 / 40.0 + 0.0125).collect();
        let labels: Vec<u16> = xs.iter().map(|&x| if x < 0.5 { 1 } else { 2 }).collect();
        let set = set_from(xs.iter().map(|&x| vec![x]).collect(), labels.clone());
        let params = GbdtParams {
            num_trees: 1,
            max_leaves: 2,
            min_samples_leaf: 1,
            num_bins: 64,
            ..GbdtParams::default().without_goss()
        };
        let (model, events) = gbdt_train_traced(&set, &params).unwrap();
        assert_eq!(events.len(), 2); // one split per class tree

        // Oracle: gain of every boundary between consecutive distinct values,
        // computed from the initial gradients of class 1.
        let p1 = 0.5;
        let g: Vec<f64> = labels
            .iter()
            .map(|&l| if l == 1 { p1 - 1.0 } else { p1 })
            .collect();
        let h = p1 * (1.0 - p1);
        let total_g: f64 = g.iter().sum();
        let total_h = h * g.len() as f64;
        let mut best = (f64::MIN, 0.0);
        for cut in 1..xs.len() {
            let gl: f64 = g[..cut].iter().sum();
            let hl = h * cut as f64;
            let gain = 0.5
                * (gl * gl / (hl + LEAF_L2) + (total_g - gl).powi(2) / (total_h - hl + LEAF_L2)
                    - total_g * total_g / (total_h + LEAF_L2));
            if gain > best.0 {
                best = (gain, (xs[cut - 1] + xs[cut]) / 2.0);
            }
        }
        assert!((events[0].gain - best.0).abs() < 1e-12);
        assert!((events[0].threshold - best.1).abs() < 1e-12);
        assert!(events[0].threshold > xs[19] && events[0].threshold < xs[20]);
        assert_eq!(model.predict(&set.features).unwrap(), labels);
    }

    #[test]
    fn goss_and_full_data_both_fit_two_gaussians() {
        let set = two_gaussians(500, 4);
        for params in [
            GbdtParams {
                num_trees: 30,
                seed: 9,
                ..Default::default()
            },
            GbdtParams {
                num_trees: 30,
                seed: 9,
                ..GbdtParams::default().without_goss()
            },
        ] {
            let model = gbdt_train(&set, &params).unwrap();
            let pred = model.predict(&set.features).unwrap();
            let acc = pred.iter().zip(&set.labels).filter(|(a, b)| a == b).count() as f64 / 500.0;
            assert!(
                acc >= 0.95,
                "accuracy {acc} with GOSS {}",
                params.goss_enabled()
            );
        }
    }

    #[test]
    fn loss_monotone_without_goss() {
        let mut rng = Rng::new(8);
        let mut rows = Vec::new();
        let mut labels = Vec::new();
        for i in 0..300 {
            let class = 1 + (i % 3) as u16;
            let (a, b) = rng.normal_pair();
            rows.push(vec![class as f64 + a, b, (a * b).sin()]);
            labels.push(class);
        }
        let set = set_from(rows, labels);
        let params = GbdtParams {
            num_trees: 40,
            min_samples_leaf: 5,
            ..GbdtParams::default().without_goss()
        };
        let model = gbdt_train(&set, &params).unwrap();
        assert_eq!(model.train_loss.len(), 41);
        for w in model.train_loss.windows(2) {
            assert!(w[1] <= w[0] + 1e-9, "{} -> {}", w[0], w[1]);
        }
    }

    #[test]
    fn leaf_wise_order() {
        let set = two_gaussians(200, 6);
        let params = GbdtParams {
            num_trees: 5,
            max_leaves: 8,
            min_samples_leaf: 3,
            ..Default::default()
        };
        let (_, events) = gbdt_train_traced(&set, &params).unwrap();
        assert!(!events.is_empty());
        for e in &events {
            if let Some(other) = e.best_other_gain {
                assert!(e.gain >= other);
            }
        }
    }

    #[test]
    fn prior_only_and_single_leaf_models() {
        let mut model = GbdtModel {
            params: GbdtParams::default(),
            classes: vec![1, 2, 4],
            priors: vec![(0.2f64).ln(), (0.5f64).ln(), (0.3f64).ln()],
            rounds: vec![],
            n_features: 2,
            train_loss: vec![],
        };
        let x = DenseMatrix::from_rows(&[[0.0, 1.0], [5.0, -3.0]]).unwrap();
        assert_eq!(model.predict(&x).unwrap(), vec![2, 2]);

        let leaf = |v: f64| Tree {
            nodes: vec![TreeNode::Leaf { value: v }],
        };
        model.rounds.push(vec![leaf(0.0), leaf(0.0), leaf(10.0)]);
        assert_eq!(model.predict(&x).unwrap(), vec![4, 4]);
        assert!(model.predict(&DenseMatrix::zeros(1, 3)).is_err());
    }

    #[test]
    fn equal_scores_pick_smallest_class() {
        let model = GbdtModel {
            params: GbdtParams::default(),
            classes: vec![2, 5],
            priors: vec![0.0, 0.0],
            rounds: vec![],
            n_features: 1,
            train_loss: vec![],
        };
        assert_eq!(model.predict(&DenseMatrix::zeros(1, 1)).unwrap(), vec![2]);
    }

    #[test]
    fn serialization_preserves_predictions() {
        let set = two_gaussians(200, 11);
        let model = gbdt_train(
            &set,
            &GbdtParams {
                num_trees: 10,
                ..Default::default()
            },
        )
        .unwrap();
        let json = serde_json::to_string(&model).unwrap();
        let back: GbdtModel = serde_json::from_str(&json).unwrap();
        assert_eq!(back, model);
        let mut rng = Rng::new(5);
        let mut data = vec![0.0; 2000];
        rng.fill_normal(&mut data);
        let probe = DenseMatrix::new(1000, 2, data.iter().map(|v| v * 3.0).collect()).unwrap();
        assert_eq!(
            back.predict(&probe).unwrap(),
            model.predict(&probe).unwrap()
        );
    }

    #[test]
    fn bin_mapper_quantiles() {
        let x = DenseMatrix::from_fn(1000, 1, |i, _| (i % 500) as f64).unwrap();
        let mapper = BinMapper::fit(&x, 16);
        assert!(mapper.bins(0) <= 16 && mapper.bins(0) >= 15);
        let t = &mapper.thresholds[0];
        assert!(t.windows(2).all(|w| w[0] < w[1]));
        for v in [0.0, 31.2, 250.0, 499.0] {
            let b = mapper.bin(0, v) as usize;
            if b > 0 {
                assert!(v > t[b - 1]);
            }
            if b < t.len() {
                assert!(v <= t[b]);
            }
        }
        // Few distinct values: one bin each.
        let y = DenseMatrix::from_fn(50, 1, |i, _| (i % 3) as f64).unwrap();
        assert_eq!(BinMapper::fit(&y, 64).thresholds[0], vec![0.5, 1.5]);
    }

    #[test]
    fn gradients_match_finite_differences() {
        let mut rng = Rng::new(21);
        let stencil = |f: &dyn Fn(f64) -> f64, h: f64| {
            (-f(2.0 * h) + 8.0 * f(h) - 8.0 * f(-h) + f(-2.0 * h)) / (12.0 * h)
        };
        for _ in 0..20 {
            let scores: Vec<f64> = (0..4).map(|_| 4.0 * rng.uniform() - 2.0).collect();
            let label = (rng.uniform() * 4.0) as usize;
            let (g, h) = softmax_gradients(&scores, label);
            for k in 0..4 {
                let shifted = |d: f64| {
                    let mut s = scores.clone();
                    s[k] += d;
                    s
                };
                let fd_g = stencil(&|d| softmax_cross_entropy(&shifted(d), label), 1e-3);
                let fd_h = stencil(&|d| softmax_gradients(&shifted(d), label).0[k], 1e-3);
                assert!(
                    (g[k] - fd_g).abs() <= 1e-5 * fd_g.abs().max(1e-6),
                    "g {} vs {}",
                    g[k],
                    fd_g
                );
                assert!(
                    (h[k] - fd_h).abs() <= 1e-5 * fd_h.abs().max(1e-6),
                    "h {} vs {}",
                    h[k],
                    fd_h
                );
            }
        }
    }

    #[test]
    fn goss_keeps_largest_gradients() {
        let mag: Vec<f64> = (0..100).map(|i| i as f64).collect();
        let (rows, weights) = goss_sample(&mag, 0.2, 0.1, &mut Rng::new(0));
        assert_eq!(rows.len(), 30);
        for r in 80..100 {
            let pos = rows.iter().position(|&x| x == r).unwrap();
            assert_eq!(weights[pos], 1.0);
        }
        assert_eq!(
            weights.iter().filter(|&&w| (w - 8.0).abs() < 1e-12).count(),
            10
        );
        assert!(rows.windows(2).all(|w| w[0] < w[1]));
    }
}
