//! On-disk layout of a run directory.
//!
//! | file               | contents                                       |
//! |--------------------|------------------------------------------------|
//! | `config.toml`      | configuration snapshot (without `output`)      |
//! | `report.json`      | evaluation report and run metadata             |
//! | `predictions.json` | test pixel indices, truth and predicted labels |
//! | `model.json`       | fitted reduction and classifier                |
//! | `map.ppm`          | classification map of the test pixels          |
//! | `timings.json`     | wall-clock stage timings in milliseconds       |
//!
//! Every file except `timings.json` is a deterministic function of the
//! configuration; comparing two runs byte-for-byte means comparing all files
//! but that one.

use std::fs;
use std::path::{Path, PathBuf};

use anyhow::Context;
use hsikit::classify::GridSearchResult;
use hsikit::{EvalReport, GbdtModel, PcaModel, SvmModel};
use serde::{Deserialize, Serialize};

use crate::config::RunConfig;
use crate::error::CliError;

pub const CONFIG_FILE: &str = "config.toml";
pub const REPORT_FILE: &str = "report.json";
pub const PREDICTIONS_FILE: &str = "predictions.json";
pub const MODEL_FILE: &str = "model.json";
pub const MAP_FILE: &str = "map.ppm";
pub const TIMINGS_FILE: &str = "timings.json";

/// Files whose bytes are fixed by the configuration alone.
pub const DETERMINISTIC_FILES: [&str; 5] = [
    CONFIG_FILE,
    REPORT_FILE,
    PREDICTIONS_FILE,
    MODEL_FILE,
    MAP_FILE,
];

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Report {
    pub version: String,
    /// For example `"SVM / RPCA-20"`.
    pub method: String,
    pub n_bands: usize,
    pub n_features: usize,
    pub n_train: usize,
    pub n_test: usize,
    pub eval: EvalReport,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub grid: Option<GridSearchResult>,
    #[serde(default)]
    pub warnings: Vec<String>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Predictions {
    pub pixel_indices: Vec<usize>,
    pub truth: Vec<u16>,
    pub predicted: Vec<u16>,
}

#[derive(Debug, Clone, Copy, PartialEq, Default, Serialize, Deserialize)]
pub struct Timings {
    pub load_ms: f64,
    pub reduce_ms: f64,
    pub train_ms: f64,
    pub predict_ms: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum StoredClassifier {
    Svm(SvmModel),
    Gbdt(GbdtModel),
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct StoredModel {
    pub reduction: Option<PcaModel>,
    pub classifier: StoredClassifier,
}

/// Everything about a finished run except the model and the map image.
#[derive(Debug, Clone, PartialEq)]
pub struct RunRecord {
    pub config: RunConfig,
    pub report: Report,
    pub predictions: Predictions,
    pub timings: Timings,
}

fn read_json<T: for<'de> Deserialize<'de>>(dir: &Path, name: &str) -> anyhow::Result<T> {
    let path = dir.join(name);
    let text = fs::read_to_string(&path).with_context(|| format!("reading {}", path.display()))?;
    serde_json::from_str(&text).with_context(|| format!("parsing {}", path.display()))
}

/// Indented JSON for small human-read files.
pub(crate) fn to_json<T: Serialize>(value: &T) -> Vec<u8> {
    let mut bytes = serde_json::to_vec_pretty(value).expect("run artifacts serialize to JSON");
    bytes.push(b'\n');
    bytes
}

/// Single-line JSON for bulky machine-read files.
pub(crate) fn to_compact_json<T: Serialize>(value: &T) -> Vec<u8> {
    let mut bytes = serde_json::to_vec(value).expect("run artifacts serialize to JSON");
    bytes.push(b'\n');
    bytes
}

impl RunRecord {
    pub fn load(dir: &Path) -> anyhow::Result<Self> {
        Ok(Self {
            config: RunConfig::load(&dir.join(CONFIG_FILE))?,
            report: read_json(dir, REPORT_FILE)?,
            predictions: read_json(dir, PREDICTIONS_FILE)?,
            timings: read_json(dir, TIMINGS_FILE)?,
        })
    }

    pub fn load_model(dir: &Path) -> anyhow::Result<StoredModel> {
        read_json(dir, MODEL_FILE)
    }
}

/// Write `files` into `dir` all at once: they are staged in a sibling
/// temporary directory which is renamed into place only after every file is
/// written, so a failure never leaves a partial run directory behind.
pub fn commit_directory(dir: &Path, files: &[(&str, Vec<u8>)], force: bool) -> anyhow::Result<()> {
    let parent: PathBuf = match dir.parent() {
        Some(p) if !p.as_os_str().is_empty() => p.to_owned(),
        _ => PathBuf::from("."),
    };
    fs::create_dir_all(&parent).with_context(|| format!("creating {}", parent.display()))?;
    let occupied = dir.exists() && fs::read_dir(dir)?.next().is_some();
    if occupied && !force {
        return Err(CliError::OutputExists(dir.to_owned()).into());
    }

    let stage = tempfile::Builder::new()
        .prefix(".hsikit-stage-")
        .tempdir_in(&parent)
        .with_context(|| format!("creating a staging directory in {}", parent.display()))?;
    for (name, bytes) in files {
        fs::write(stage.path().join(name), bytes).with_context(|| format!("writing {name}"))?;
    }
    if dir.exists() {
        fs::remove_dir_all(dir).with_context(|| format!("removing {}", dir.display()))?;
    }
    let staged = stage.keep();
    fs::rename(&staged, dir).with_context(|| format!("moving the run into {}", dir.display()))?;
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn commit_refuses_occupied_directory() {
        let root = tempfile::tempdir().unwrap();
        let dir = root.path().join("run");
        commit_directory(&dir, &[("a.txt", b"one".to_vec())], false).unwrap();
        assert_eq!(fs::read(dir.join("a.txt")).unwrap(), b"one");
        let err = commit_directory(&dir, &[("b.txt", b"two".to_vec())], false).unwrap_err();
        assert!(matches!(
            err.downcast_ref::<CliError>(),
            Some(CliError::OutputExists(_))
        ));
        commit_directory(&dir, &[("b.txt", b"two".to_vec())], true).unwrap();
        assert!(!dir.join("a.txt").exists());
        assert_eq!(fs::read(dir.join("b.txt")).unwrap(), b"two");
        // Only the run directory remains; no staging leftovers.
        assert_eq!(fs::read_dir(root.path()).unwrap().count(), 1);
    }

    #[test]
    fn empty_existing_directory_is_reused() {
        let root = tempfile::tempdir().unwrap();
        let dir = root.path().join("run");
        fs::create_dir(&dir).unwrap();
        commit_directory(&dir, &[("a.txt", vec![1, 2])], false).unwrap();
        assert_eq!(fs::read(dir.join("a.txt")).unwrap(), vec![1, 2]);
    }
}
