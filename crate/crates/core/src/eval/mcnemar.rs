use serde::{Deserialize, Serialize};

use crate::error::{dim_err, Result};

/// Below this many discordant pairs the exact binomial test is used.
pub const EXACT_THRESHOLD: u64 = 25;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum McNemarMethod {
    /// No discordant pairs: statistic 0, p = 1.
    NoDiscordant,
    ExactBinomial,
    ChiSquare,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct McNemarResult {
    /// Pairs where A is correct and B is wrong.
    pub b: u64,
    /// Pairs where A is wrong and B is correct.
    pub c: u64,
    /// Continuity-corrected chi-square statistic.
    pub statistic: f64,
    pub p_value: f64,
    pub significant_at_05: bool,
    pub method: McNemarMethod,
}

/// Survival function of the chi-square distribution with one degree of
/// freedom: `P(X > x) = erfc(√(x/2))`.
pub fn chi2_sf_1dof(x: f64) -> f64 {
    if x <= 0.0 {
        return 1.0;
    }
    libm::erfc((x / 2.0).sqrt())
}

/// Two-sided exact binomial(b + c, ½) p-value.
pub fn exact_binomial_p_value(b: u64, c: u64) -> f64 {
    let n = b + c;
    if n == 0 {
        return 1.0;
    }
    let m = b.min(c);
    // Sum C(n, i) / 2^n term by term so large n stays finite.
    let mut term = 0.5f64.powi(n as i32);
    let mut tail = term;
    for i in 1..=m {
        term *= (n - i + 1) as f64 / i as f64;
        tail += term;
    }
    (2.0 * tail).min(1.0)
}

fn continuity_corrected(b: u64, c: u64) -> f64 {
    if b + c == 0 {
        return 0.0;
    }
    let diff = (b.abs_diff(c) as f64 - 1.0).max(0.0);
    diff * diff / (b + c) as f64
}

impl McNemarResult {
    /// Chooses the exact path below [`EXACT_THRESHOLD`] discordant pairs and
    /// the chi-square path otherwise.
    pub fn from_counts(b: u64, c: u64) -> Self {
        if b + c == 0 {
            Self::build(b, c, 1.0, McNemarMethod::NoDiscordant)
        } else if b + c < EXACT_THRESHOLD {
            Self::exact(b, c)
        } else {
            Self::chi_square(b, c)
        }
    }

    /// Chi-square path regardless of the number of discordant pairs.
    pub fn chi_square(b: u64, c: u64) -> Self {
        let p = chi2_sf_1dof(continuity_corrected(b, c));
        Self::build(b, c, p, McNemarMethod::ChiSquare)
    }

    /// Exact binomial path regardless of the number of discordant pairs.
    pub fn exact(b: u64, c: u64) -> Self {
        Self::build(
            b,
            c,
            exact_binomial_p_value(b, c),
            McNemarMethod::ExactBinomial,
        )
    }

    fn build(b: u64, c: u64, p_value: f64, method: McNemarMethod) -> Self {
        Self {
            b,
            c,
            statistic: continuity_corrected(b, c),
            p_value,
            significant_at_05: p_value < 0.05,
            method,
        }
    }
}

/// McNemar's test on two classifiers' predictions over the same samples.
pub fn mcnemar(pred_a: &[u16], pred_b: &[u16], truth: &[u16]) -> Result<McNemarResult> {
    if pred_a.len() != truth.len() || pred_b.len() != truth.len() {
        return dim_err(format!(
            "prediction lengths {} and {} against {} truth labels",
            pred_a.len(),
            pred_b.len(),
            truth.len()
        ));
    }
    if truth.is_empty() {
        return dim_err("McNemar's test needs at least one sample");
    }
    let (mut b, mut c) = (0u64, 0u64);
    for ((&a, &bb), &t) in pred_a.iter().zip(pred_b).zip(truth) {
        match (a == t, bb == t) {
            (true, false) => b += 1,
            (false, true) => c += 1,
            _ => {}
        }
    }
    Ok(McNemarResult::from_counts(b, c))
}
