//! The `run` pipeline: load, split, reduce, train, predict, evaluate.

use std::path::Path;
use std::time::Instant;

use anyhow::Context;
use hsikit::classify::{gbdt_train, grid_search_cv, svm_train, Classifier};
use hsikit::dimred::{fit_pca, fit_rpca, PcaModel};
use hsikit::eval::{evaluate, render_map, RgbImage};
use hsikit::hsi_data::{extract_labeled, load_cube, load_ground_truth, stratified_split};

use crate::config::{ClassifierConfig, Reduction, RunConfig};
use crate::error::CliError;
use crate::record::{
    commit_directory, to_compact_json, to_json, Predictions, Report, RunRecord, StoredClassifier,
    StoredModel, Timings, CONFIG_FILE, MAP_FILE, MODEL_FILE, PREDICTIONS_FILE, REPORT_FILE,
    TIMINGS_FILE,
};

pub const VERSION: &str = env!("CARGO_PKG_VERSION");

/// A finished run held in memory.
pub struct RunOutcome {
    pub record: RunRecord,
    pub model: StoredModel,
    pub map: RgbImage,
}

fn elapsed_ms(start: Instant) -> f64 {
    start.elapsed().as_secs_f64() * 1e3
}

/// Execute the pipeline without touching the filesystem beyond reading
/// the inputs.
pub fn execute(config: &RunConfig) -> anyhow::Result<RunOutcome> {
    config.validate().map_err(|reason| CliError::Config {
        path: "<run config>".into(),
        reason,
    })?;
    let mut timings = Timings::default();

    let start = Instant::now();
    let cube = load_cube(&config.cube)
        .with_context(|| format!("stage load: cube {}", config.cube.display()))?;
    let gt = load_ground_truth(&config.ground_truth)
        .with_context(|| format!("stage load: ground truth {}", config.ground_truth.display()))?;
    let samples = extract_labeled(&cube, &gt).context("stage load: extracting labeled pixels")?;
    drop(cube);
    let (train, test) = stratified_split(&samples, config.train_fraction, config.seed)
        .context("stage load: splitting")?;
    timings.load_ms = elapsed_ms(start);

    let start = Instant::now();
    let pca: Option<PcaModel> = match config.reduction {
        Reduction::None => None,
        Reduction::Pca { k } => Some(fit_pca(&train.features, k).context("stage reduce: PCA")?),
        Reduction::Rpca { .. } => {
            let params = config
                .reduction
                .randomized_params(config.seed)
                .expect("randomized reduction");
            Some(fit_rpca(&train.features, &params).context("stage reduce: randomized PCA")?)
        }
    };
    let (train, test) = match &pca {
        None => (train, test),
        Some(model) => {
            let project = |set: &hsikit::SampleSet| -> anyhow::Result<hsikit::SampleSet> {
                let z = model.transform(&set.features)?;
                Ok(set.with_features(z)?)
            };
            (
                project(&train).context("stage reduce: projecting training pixels")?,
                project(&test).context("stage reduce: projecting test pixels")?,
            )
        }
    };
    timings.reduce_ms = elapsed_ms(start);

    let start = Instant::now();
    let mut grid = None;
    let mut warnings = Vec::new();
    let classifier = match &config.classifier {
        ClassifierConfig::Svm(section) => {
            let mut params = section.params;
            if let Some(spec) = &section.grid {
                let result = grid_search_cv(
                    &train,
                    &spec.c,
                    &spec.gamma,
                    spec.folds,
                    config.seed,
                    &params,
                )
                .context("stage train: grid search")?;
                params.c = result.best_c;
                params.gamma = result.best_gamma;
                grid = Some(result);
            }
            let model = svm_train(&train, &params).context("stage train: SVM")?;
            warnings.extend(model.warnings.iter().cloned());
            StoredClassifier::Svm(model)
        }
        ClassifierConfig::Gbdt(params) => {
            let params = hsikit::GbdtParams {
                seed: config.seed,
                ..*params
            };
            StoredClassifier::Gbdt(gbdt_train(&train, &params).context("stage train: GBDT")?)
        }
    };
    timings.train_ms = elapsed_ms(start);

    let start = Instant::now();
    let predicted = match &classifier {
        StoredClassifier::Svm(m) => m.predict(&test.features),
        StoredClassifier::Gbdt(m) => m.predict(&test.features),
    }
    .context("stage predict")?;
    timings.predict_ms = elapsed_ms(start);

    let eval = evaluate(&predicted, &test.labels, gt.num_classes()).context("stage evaluate")?;
    let map = render_map(&gt, &predicted, &test.pixel_indices).context("stage evaluate: map")?;

    let report = Report {
        version: VERSION.into(),
        method: format!(
            "{} / {}",
            config.classifier.label(),
            config.reduction.label()
        ),
        n_bands: samples.n_features(),
        n_features: train.n_features(),
        n_train: train.len(),
        n_test: test.len(),
        eval,
        grid,
        warnings,
    };
    let predictions = Predictions {
        pixel_indices: test.pixel_indices.clone(),
        truth: test.labels.clone(),
        predicted,
    };
    let snapshot = match &config.classifier {
        ClassifierConfig::Gbdt(p) => RunConfig {
            classifier: ClassifierConfig::Gbdt(hsikit::GbdtParams {
                seed: config.seed,
                ..*p
            }),
            ..config.snapshot()
        },
        _ => config.snapshot(),
    };
    Ok(RunOutcome {
        record: RunRecord {
            config: snapshot,
            report,
            predictions,
            timings,
        },
        model: StoredModel {
            reduction: pca,
            classifier,
        },
        map,
    })
}

/// Run the pipeline and persist the run directory.
pub fn cmd_run(config: &RunConfig, output: &Path, force: bool) -> anyhow::Result<RunRecord> {
    if output.exists() && !force && std::fs::read_dir(output)?.next().is_some() {
        return Err(CliError::OutputExists(output.to_owned()).into());
    }
    let outcome = execute(config)?;
    let files = [
        (CONFIG_FILE, outcome.record.config.to_toml().into_bytes()),
        (REPORT_FILE, to_json(&outcome.record.report)),
        (
            PREDICTIONS_FILE,
            to_compact_json(&outcome.record.predictions),
        ),
        (MODEL_FILE, to_compact_json(&outcome.model)),
        (MAP_FILE, outcome.map.to_ppm()),
        (TIMINGS_FILE, to_json(&outcome.record.timings)),
    ];
    commit_directory(output, &files, force)?;
    Ok(outcome.record)
}
