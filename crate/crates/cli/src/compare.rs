//! `compare`: McNemar's test between two runs on the same test pixels.

use std::fmt;

use hsikit::eval::{mcnemar, McNemarResult};
use serde::Serialize;

use crate::error::CliError;
use crate::record::RunRecord;

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct TableRow {
    pub run: String,
    pub method: String,
    pub overall_accuracy: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Comparison {
    pub rows: [TableRow; 2],
    pub mcnemar: McNemarResult,
}

fn mismatch<T>(msg: String) -> anyhow::Result<T> {
    Err(CliError::MismatchedSplit(msg).into())
}

/// McNemar's test between two runs. Both must come from the same dataset,
/// split seed and train fraction, and hold identical test pixels.
pub fn cmd_compare(names: [&str; 2], a: &RunRecord, b: &RunRecord) -> anyhow::Result<Comparison> {
    let (ca, cb) = (&a.config, &b.config);
    if ca.cube != cb.cube || ca.ground_truth != cb.ground_truth {
        return mismatch(format!(
            "datasets differ ({} + {} vs {} + {})",
            ca.cube.display(),
            ca.ground_truth.display(),
            cb.cube.display(),
            cb.ground_truth.display()
        ));
    }
    if ca.seed != cb.seed {
        return mismatch(format!("split seeds differ ({} vs {})", ca.seed, cb.seed));
    }
    if ca.train_fraction != cb.train_fraction {
        return mismatch(format!(
            "train fractions differ ({} vs {})",
            ca.train_fraction, cb.train_fraction
        ));
    }
    let (pa, pb) = (&a.predictions, &b.predictions);
    if pa.pixel_indices != pb.pixel_indices || pa.truth != pb.truth {
        return mismatch("test pixel sets differ".into());
    }
    let result = mcnemar(&pa.predicted, &pb.predicted, &pa.truth)?;
    let row = |name: &str, r: &RunRecord| TableRow {
        run: name.to_owned(),
        method: r.report.method.clone(),
        overall_accuracy: r.report.eval.overall_accuracy,
    };
    Ok(Comparison {
        rows: [row(names[0], a), row(names[1], b)],
        mcnemar: result,
    })
}

impl fmt::Display for Comparison {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let width = self
            .rows
            .iter()
            .map(|r| r.method.len())
            .max()
            .unwrap_or(6)
            .max(6);
        writeln!(f, "{:<w$}  {:>8}  run", "method", "OA", w = width)?;
        for r in &self.rows {
            writeln!(
                f,
                "{:<w$}  {:>8.4}  {}",
                r.method,
                r.overall_accuracy,
                r.run,
                w = width
            )?;
        }
        let m = &self.mcnemar;
        writeln!(
            f,
            "McNemar: b = {}, c = {}, statistic = {:.4}, p = {:.4e} ({:?}), {} at the 0.05 level",
            m.b,
            m.c,
            m.statistic,
            m.p_value,
            m.method,
            if m.significant_at_05 {
                "significant"
            } else {
                "not significant"
            }
        )
    }
}
