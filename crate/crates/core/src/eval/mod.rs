//! Accuracy metrics, McNemar's paired significance test and
//! classification-map rendering.

mod map;
mod mcnemar;

pub use map::{palette_color, render_map, RgbImage, PALETTE};
pub use mcnemar::{
    chi2_sf_1dof, exact_binomial_p_value, mcnemar, McNemarMethod, McNemarResult, EXACT_THRESHOLD,
};

use serde::{Deserialize, Serialize};

use crate::error::{dim_err, domain_err, Result};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EvalReport {
    /// `confusion[t][p]` counts pixels of true class `t + 1` predicted as `p + 1`.
    pub confusion: Vec<Vec<u64>>,
    pub overall_accuracy: f64,
    /// Recall per class; 0 for classes absent from the truth.
    pub per_class_recall: Vec<f64>,
    pub n_test: u64,
}

impl EvalReport {
    pub fn num_classes(&self) -> usize {
        self.confusion.len()
    }

    /// Number of truth samples per class (confusion row sums).
    pub fn support(&self) -> Vec<u64> {
        self.confusion.iter().map(|row| row.iter().sum()).collect()
    }
}

/// Confusion matrix and accuracy for labels in `1..=num_classes`.
pub fn evaluate(predicted: &[u16], truth: &[u16], num_classes: usize) -> Result<EvalReport> {
    if predicted.len() != truth.len() {
        return dim_err(format!(
            "{} predictions for {} truth labels",
            predicted.len(),
            truth.len()
        ));
    }
    if predicted.is_empty() {
        return domain_err("cannot evaluate an empty test set");
    }
    if num_classes == 0 {
        return domain_err("num_classes must be at least 1");
    }
    let mut confusion = vec![vec![0u64; num_classes]; num_classes];
    for (&p, &t) in predicted.iter().zip(truth) {
        for label in [p, t] {
            if label == 0 || label as usize > num_classes {
                return domain_err(format!("label {label} outside 1..={num_classes}"));
            }
        }
        confusion[t as usize - 1][p as usize - 1] += 1;
    }
    let n_test = predicted.len() as u64;
    let trace: u64 = (0..num_classes).map(|i| confusion[i][i]).sum();
    let per_class_recall = confusion
        .iter()
        .enumerate()
        .map(|(i, row)| {
            let total: u64 = row.iter().sum();
            if total == 0 {
                0.0
            } else {
                row[i] as f64 / total as f64
            }
        })
        .collect();
    Ok(EvalReport {
        confusion,
        overall_accuracy: trace as f64 / n_test as f64,
        per_class_recall,
        n_test,
    })
}
