//! Run configuration, stored as TOML.
//!
//! ```toml
//! cube = "data/indian_pines.hsih"
//! ground_truth = "data/indian_pines_gt.hsih"
//! train_fraction = 0.7
//! seed = 42
//!
//! [reduction]
//! method = "rpca"        # "none" | "pca" | "rpca"
//! k = 20
//! oversampling = 10      # rpca only
//! power_iterations = 2   # rpca only
//!
//! [classifier]
//! kind = "svm"           # "svm" | "gbdt"
//! c = 600.0
//! gamma = 0.5
//! [classifier.grid]      # optional cross-validated search over (C, γ)
//! c = [1.0, 10.0, 100.0, 600.0, 1000.0]
//! gamma = [0.01, 0.1, 0.5, 1.0, 2.0]
//! folds = 5
//! ```

use std::fs;
use std::path::{Path, PathBuf};

use hsikit::classify::{DEFAULT_C_GRID, DEFAULT_FOLDS, DEFAULT_GAMMA_GRID};
use hsikit::linalg::RandomizedSvdParams;
use hsikit::{GbdtParams, SvmParams};
use serde::{Deserialize, Serialize};

use crate::error::CliError;

pub const DEFAULT_TRAIN_FRACTION: f64 = 0.7;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RunConfig {
    pub cube: PathBuf,
    pub ground_truth: PathBuf,
    #[serde(default = "default_train_fraction")]
    pub train_fraction: f64,
    /// Drives the split, the randomized sketch, grid-search folds and GOSS.
    #[serde(default)]
    pub seed: u64,
    /// Run directory. Omitted from the snapshot stored inside a run.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub output: Option<PathBuf>,
    #[serde(default)]
    pub reduction: Reduction,
    #[serde(default)]
    pub classifier: ClassifierConfig,
}

fn default_train_fraction() -> f64 {
    DEFAULT_TRAIN_FRACTION
}

#[derive(Debug, Clone, Copy, PartialEq, Default, Serialize, Deserialize)]
#[serde(tag = "method", rename_all = "lowercase")]
pub enum Reduction {
    #[default]
    None,
    Pca {
        k: usize,
    },
    Rpca {
        k: usize,
        #[serde(default = "default_oversampling")]
        oversampling: usize,
        #[serde(default = "default_power_iterations")]
        power_iterations: usize,
    },
}

fn default_oversampling() -> usize {
    hsikit::linalg::DEFAULT_OVERSAMPLING
}

fn default_power_iterations() -> usize {
    hsikit::linalg::DEFAULT_POWER_ITERATIONS
}

impl Reduction {
    pub fn width(&self) -> Option<usize> {
        match *self {
            Reduction::None => None,
            Reduction::Pca { k } | Reduction::Rpca { k, .. } => Some(k),
        }
    }

    pub fn label(&self) -> String {
        match *self {
            Reduction::None => "original".into(),
            Reduction::Pca { k } => format!("PCA-{k}"),
            Reduction::Rpca { k, .. } => format!("RPCA-{k}"),
        }
    }

    pub fn randomized_params(&self, seed: u64) -> Option<RandomizedSvdParams> {
        match *self {
            Reduction::Rpca {
                k,
                oversampling,
                power_iterations,
            } => Some(
                RandomizedSvdParams::new(k, seed)
                    .with_oversampling(oversampling)
                    .with_power_iterations(power_iterations),
            ),
            _ => None,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "lowercase")]
pub enum ClassifierConfig {
    Svm(SvmSection),
    Gbdt(GbdtParams),
}

impl Default for ClassifierConfig {
    fn default() -> Self {
        ClassifierConfig::Svm(SvmSection::default())
    }
}

impl ClassifierConfig {
    pub fn label(&self) -> &'static str {
        match self {
            ClassifierConfig::Svm(_) => "SVM",
            ClassifierConfig::Gbdt(_) => "GBDT",
        }
    }
}

#[derive(Debug, Clone, PartialEq, Default, Serialize, Deserialize)]
pub struct SvmSection {
    #[serde(flatten)]
    pub params: SvmParams,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub grid: Option<GridSpec>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct GridSpec {
    pub c: Vec<f64>,
    pub gamma: Vec<f64>,
    pub folds: usize,
}

impl Default for GridSpec {
    fn default() -> Self {
        Self {
            c: DEFAULT_C_GRID.to_vec(),
            gamma: DEFAULT_GAMMA_GRID.to_vec(),
            folds: DEFAULT_FOLDS,
        }
    }
}

impl RunConfig {
    pub fn new(cube: PathBuf, ground_truth: PathBuf) -> Self {
        Self {
            cube,
            ground_truth,
            train_fraction: DEFAULT_TRAIN_FRACTION,
            seed: 0,
            output: None,
            reduction: Reduction::None,
            classifier: ClassifierConfig::default(),
        }
    }

    pub fn load(path: &Path) -> Result<Self, CliError> {
        let text = fs::read_to_string(path).map_err(|e| CliError::Config {
            path: path.to_owned(),
            reason: e.to_string(),
        })?;
        Self::from_toml(&text).map_err(|reason| CliError::Config {
            path: path.to_owned(),
            reason,
        })
    }

    pub fn from_toml(text: &str) -> Result<Self, String> {
        toml::from_str(text).map_err(|e| e.to_string())
    }

    pub fn to_toml(&self) -> String {
        toml::to_string(self).expect("run configuration serializes to TOML")
    }

    /// The configuration as recorded inside a run directory.
    pub fn snapshot(&self) -> Self {
        Self {
            output: None,
            ..self.clone()
        }
    }

    pub fn validate(&self) -> Result<(), String> {
        if !(self.train_fraction > 0.0 && self.train_fraction < 1.0) {
            return Err(format!(
                "train_fraction {} must lie in (0, 1)",
                self.train_fraction
            ));
        }
        // TOML integers are signed 64-bit.
        if self.seed > i64::MAX as u64 {
            return Err(format!("seed {} exceeds {}", self.seed, i64::MAX));
        }
        if self.reduction.width() == Some(0) {
            return Err("reduction width k must be at least 1".into());
        }
        match &self.classifier {
            ClassifierConfig::Svm(s) => {
                s.params.validate().map_err(|e| e.to_string())?;
                if let Some(g) = &s.grid {
                    if g.c.is_empty() || g.gamma.is_empty() {
                        return Err("grid needs at least one C and one gamma".into());
                    }
                    if g.folds < 2 {
                        return Err("grid search needs at least 2 folds".into());
                    }
                }
            }
            ClassifierConfig::Gbdt(p) => p.validate().map_err(|e| e.to_string())?,
        }
        Ok(())
    }
}
