//! Acceptance suite: one PASS/FAIL line per criterion, non-zero exit if a
//! gating criterion fails. Criterion 7 needs the real scenes and never
//! gates.

#[path = "../../core/tests/common/mod.rs"]
mod common;

use std::fs;
use std::path::Path;
use std::process::Command;
use std::time::Instant;

use common::{
    central_difference, chi2_sf_by_integration, close_relative, dual_objective,
    enumerated_mcnemar_p, gram, lattice_dual_max,
};
use hsikit::classify::{
    gbdt_train, smo_solve, softmax_cross_entropy, softmax_gradients, svm_train, Classifier,
    GbdtParams, SvmParams,
};
use hsikit::dimred::{fit_pca, fit_rpca};
use hsikit::eval::{evaluate, exact_binomial_p_value, McNemarResult};
use hsikit::hsi_data::{
    extract_labeled, load_cube, load_ground_truth, stratified_split, SampleSet,
};
use hsikit::linalg::{
    exact_svd, max_principal_angle, randomized_svd, DenseMatrix, RandomizedSvdParams,
};
use hsikit::rng::Rng;
use hsikit::synthetic::{gaussian_scene, matrix_with_spectrum, SceneSpec};
use hsikit_cli::record::DETERMINISTIC_FILES;
use proptest::prelude::*;
use proptest::test_runner::{Config as ProptestConfig, TestRunner};

type Outcome = Result<String, String>;
type Criterion<'a> = (u32, &'static str, Box<dyn Fn() -> Outcome + 'a>);

fn geometric_matrices() -> Vec<DenseMatrix> {
    let sigma: Vec<f64> = (0..200).map(|i| 10.0 * 0.8f64.powi(i)).collect();
    (0..20)
        .map(|seed| matrix_with_spectrum(500, 200, &sigma, 1000 + seed).unwrap())
        .collect()
}

fn randomized_fidelity(matrices: &[DenseMatrix]) -> Outcome {
    let mut worst = 0.0f64;
    for (i, a) in matrices.iter().enumerate() {
        let exact = exact_svd(a, 30).map_err(|e| e.to_string())?;
        let params = RandomizedSvdParams::new(30, i as u64)
            .with_oversampling(10)
            .with_power_iterations(2);
        let approx = randomized_svd(a, &params).map_err(|e| e.to_string())?;
        for (e, r) in exact.s.iter().zip(&approx.s) {
            worst = worst.max((e - r).abs() / e);
        }
    }
    let detail = format!("worst relative gap {worst:.2e} over 20 x 30 values (tolerance 1e-2)");
    if worst <= 1e-2 {
        Ok(detail)
    } else {
        Err(detail)
    }
}

fn subspace_agreement(matrices: &[DenseMatrix]) -> Outcome {
    let mut worst = 0.0f64;
    for (i, a) in matrices.iter().enumerate() {
        let pca = fit_pca(a, 20).map_err(|e| e.to_string())?;
        let rpca =
            fit_rpca(a, &RandomizedSvdParams::new(20, i as u64)).map_err(|e| e.to_string())?;
        worst = worst.max(
            max_principal_angle(&pca.components, &rpca.components).map_err(|e| e.to_string())?,
        );
    }
    let detail = format!("largest principal angle {worst:.2e} rad (tolerance 1e-2)");
    if worst <= 1e-2 {
        Ok(detail)
    } else {
        Err(detail)
    }
}

fn smo_optimality() -> Outcome {
    let (c, gamma) = (10.0, 0.5);
    let mut rng = Rng::new(31);
    let mut worst = 0.0f64;
    let mut solved = 0;
    while solved < 50 {
        let x = DenseMatrix::from_fn(5, 2, |_, _| 2.0 * rng.uniform() - 1.0).unwrap();
        let y: Vec<f64> = (0..5)
            .map(|_| if rng.uniform() < 0.5 { 1.0 } else { -1.0 })
            .collect();
        if !(y.contains(&1.0) && y.contains(&-1.0)) {
            continue;
        }
        let sol = smo_solve(&x, &y, c, gamma, 1e-8, 1_000_000).map_err(|e| e.to_string())?;
        let k = gram(&x, gamma);
        let gap = (dual_objective(&k, &y, &sol.alpha) - lattice_dual_max(&k, &y, c)).abs();
        worst = worst.max(gap);
        solved += 1;
    }
    let detail =
        format!("largest |W_smo - W_lattice| {worst:.2e} over 50 problems (tolerance 1e-4)");
    if worst <= 1e-4 {
        Ok(detail)
    } else {
        Err(detail)
    }
}

fn gradient_check() -> Outcome {
    let mut rng = Rng::new(4);
    let mut worst = 0.0f64;
    for _ in 0..20 {
        let classes = 2 + (rng.uniform() * 8.0) as usize;
        let scores: Vec<f64> = (0..classes).map(|_| 6.0 * rng.uniform() - 3.0).collect();
        let label = (rng.uniform() * classes as f64) as usize;
        let (g, h) = softmax_gradients(&scores, label);
        for k in 0..classes {
            let shifted = |d: f64| {
                let mut s = scores.clone();
                s[k] += d;
                s
            };
            let fd_g = central_difference(|d| softmax_cross_entropy(&shifted(d), label), 1e-3);
            let fd_h = central_difference(|d| softmax_gradients(&shifted(d), label).0[k], 1e-3);
            for (analytic, numeric) in [(g[k], fd_g), (h[k], fd_h)] {
                if !close_relative(analytic, numeric, 1e-5) {
                    return Err(format!(
                        "analytic {analytic} vs finite difference {numeric}"
                    ));
                }
                worst = worst.max((analytic - numeric).abs() / numeric.abs().max(1e-6));
            }
        }
    }
    Ok(format!(
        "20 points, worst relative error {worst:.2e} (tolerance 1e-5)"
    ))
}

fn mcnemar_exactness() -> Outcome {
    let mut worst = 0.0f64;
    for n in 0..=12u64 {
        for b in 0..=n {
            worst = worst
                .max((exact_binomial_p_value(b, n - b) - enumerated_mcnemar_p(b, n - b)).abs());
        }
    }
    let chi = McNemarResult::chi_square(10, 0);
    let oracle = chi2_sf_by_integration(chi.statistic);
    let ok = worst <= 1e-12
        && (chi.statistic - 8.1).abs() < 1e-12
        && (chi.p_value - oracle).abs() < 1e-9
        && chi.significant_at_05;
    let detail = format!(
        "enumeration gap {worst:.1e} (tolerance 1e-12); b=10, c=0 statistic {} p {:.6} vs integrated {:.6}",
        chi.statistic, chi.p_value, oracle
    );
    if ok {
        Ok(detail)
    } else {
        Err(detail)
    }
}

fn accuracy_of(model: &dyn Classifier, test: &SampleSet, classes: usize) -> Result<f64, String> {
    let pred = model.predict(&test.features).map_err(|e| e.to_string())?;
    Ok(evaluate(&pred, &test.labels, classes)
        .map_err(|e| e.to_string())?
        .overall_accuracy)
}

fn pipeline_sanity() -> Outcome {
    let start = Instant::now();
    let (cube, gt) = gaussian_scene(&SceneSpec::default()).map_err(|e| e.to_string())?;
    let samples = extract_labeled(&cube, &gt).map_err(|e| e.to_string())?;
    let (train, test) = stratified_split(&samples, 0.7, 42).map_err(|e| e.to_string())?;
    let classes = gt.num_classes();
    let pca = fit_pca(&train.features, 10).map_err(|e| e.to_string())?;
    let rpca =
        fit_rpca(&train.features, &RandomizedSvdParams::new(10, 42)).map_err(|e| e.to_string())?;
    let project = |m: &hsikit::PcaModel, s: &SampleSet| {
        s.with_features(m.transform(&s.features).unwrap()).unwrap()
    };
    let variants = [
        ("original", train.clone(), test.clone(), 0.98),
        ("PCA-10", project(&pca, &train), project(&pca, &test), 0.95),
        (
            "RPCA-10",
            project(&rpca, &train),
            project(&rpca, &test),
            0.95,
        ),
    ];
    let mut parts = Vec::new();
    let mut ok = true;
    for (name, tr, te, floor) in &variants {
        let svm = svm_train(tr, &SvmParams::default()).map_err(|e| e.to_string())?;
        let gbdt = gbdt_train(
            tr,
            &GbdtParams {
                seed: 42,
                ..Default::default()
            },
        )
        .map_err(|e| e.to_string())?;
        let (s, g) = (
            accuracy_of(&svm, te, classes)?,
            accuracy_of(&gbdt, te, classes)?,
        );
        ok &= s >= *floor && g >= *floor;
        parts.push(format!("{name}: SVM {s:.4} GBDT {g:.4} (>= {floor})"));
    }
    let secs = start.elapsed().as_secs_f64();
    ok &= secs < 60.0;
    let detail = format!("{}; {secs:.1} s", parts.join(", "));
    if ok {
        Ok(detail)
    } else {
        Err(detail)
    }
}

/// Stretch check against the published SVM column for Pavia University.
/// Runs only when `HSIKIT_PAVIA_CUBE` and `HSIKIT_PAVIA_GT` point at
/// converted containers.
fn paper_reproduction() -> Option<Outcome> {
    let cube_path = std::env::var_os("HSIKIT_PAVIA_CUBE")?;
    let gt_path = std::env::var_os("HSIKIT_PAVIA_GT")?;
    let run = || -> Result<String, String> {
        let cube = load_cube(Path::new(&cube_path)).map_err(|e| e.to_string())?;
        let gt = load_ground_truth(Path::new(&gt_path)).map_err(|e| e.to_string())?;
        let samples = extract_labeled(&cube, &gt).map_err(|e| e.to_string())?;
        let (train, test) = stratified_split(&samples, 0.7, 0).map_err(|e| e.to_string())?;
        let pca = fit_pca(&train.features, 30).map_err(|e| e.to_string())?;
        let rpca = fit_rpca(&train.features, &RandomizedSvdParams::new(30, 0))
            .map_err(|e| e.to_string())?;
        let project = |m: &hsikit::PcaModel, s: &SampleSet| {
            s.with_features(m.transform(&s.features).unwrap()).unwrap()
        };
        let published = [0.9760, 0.9565, 0.9327];
        let sets = [
            (train.clone(), test.clone()),
            (project(&pca, &train), project(&pca, &test)),
            (project(&rpca, &train), project(&rpca, &test)),
        ];
        let mut acc = Vec::new();
        for (tr, te) in &sets {
            let svm = svm_train(tr, &SvmParams::default()).map_err(|e| e.to_string())?;
            acc.push(accuracy_of(&svm, te, gt.num_classes())?);
        }
        let ordered = acc[0] >= acc[1] && acc[1] >= acc[2];
        let within = acc
            .iter()
            .zip(&published)
            .all(|(a, p)| (a - p).abs() <= 0.05);
        let detail = format!(
            "SVM original/PCA-30/RPCA-30 = {:.4}/{:.4}/{:.4}, published 0.9760/0.9565/0.9327",
            acc[0], acc[1], acc[2]
        );
        if ordered && within {
            Ok(detail)
        } else {
            Err(detail)
        }
    };
    Some(run())
}

fn determinism() -> Outcome {
    let dir = tempfile::tempdir().map_err(|e| e.to_string())?;
    let p = dir.path();
    let spec = SceneSpec {
        height: 30,
        width: 30,
        bands: 50,
        ..Default::default()
    };
    hsikit_cli::synth::cmd_synth(p, "scene", &spec).map_err(|e| e.to_string())?;
    let bin = env!("CARGO_BIN_EXE_hsikit");
    let configs = [
        ("svm", "[reduction]\nmethod = \"rpca\"\nk = 20\n\n[classifier]\nkind = \"svm\"\n"),
        ("gbdt", "[reduction]\nmethod = \"pca\"\nk = 10\n\n[classifier]\nkind = \"gbdt\"\nnum_trees = 30\n"),
    ];
    for (name, body) in configs {
        let cfg =
            format!("cube = \"scene.hsih\"\nground_truth = \"scene_gt.hsih\"\nseed = 42\n\n{body}");
        fs::write(p.join(format!("{name}.toml")), cfg).map_err(|e| e.to_string())?;
        for run in ["first", "second"] {
            let out_dir = format!("{name}-{run}");
            let output = Command::new(bin)
                .args([
                    "run",
                    "--config",
                    &format!("{name}.toml"),
                    "--output",
                    &out_dir,
                ])
                .current_dir(p)
                .output()
                .map_err(|e| e.to_string())?;
            if !output.status.success() {
                return Err(format!(
                    "{name} run exited with {}: {}",
                    output.status,
                    String::from_utf8_lossy(&output.stderr)
                ));
            }
        }
        for file in DETERMINISTIC_FILES {
            let a =
                fs::read(p.join(format!("{name}-first")).join(file)).map_err(|e| e.to_string())?;
            let b =
                fs::read(p.join(format!("{name}-second")).join(file)).map_err(|e| e.to_string())?;
            if a != b {
                return Err(format!("{name}: {file} differs between runs"));
            }
        }
    }
    Ok(format!(
        "SVM and GBDT runs identical in {} (timings excluded)",
        DETERMINISTIC_FILES.join(", ")
    ))
}

fn ordering_invariants() -> Outcome {
    let mut runner = TestRunner::new(ProptestConfig {
        cases: 1000,
        failure_persistence: None,
        ..ProptestConfig::default()
    });
    let matrix = (2usize..=12, 2usize..=8).prop_flat_map(|(m, n)| {
        proptest::collection::vec(-10.0f64..10.0, m * n)
            .prop_map(move |d| DenseMatrix::new(m, n, d).unwrap())
    });
    let ordered = |v: &[f64]| v.windows(2).all(|w| w[0] >= w[1]) && v.iter().all(|&x| x >= 0.0);

    runner
        .run(&(matrix.clone(), any::<u64>()), |(a, seed)| {
            let r = a.rows().min(a.cols());
            prop_assert!(ordered(&exact_svd(&a, r).unwrap().s));
            let params = RandomizedSvdParams::new(1, seed).with_oversampling(r - 1);
            prop_assert!(ordered(&randomized_svd(&a, &params).unwrap().s));
            Ok(())
        })
        .map_err(|e| format!("singular values: {e}"))?;
    runner
        .run(&matrix, |a| {
            let k = (a.rows() - 1).min(a.cols());
            prop_assert!(ordered(&fit_pca(&a, k).unwrap().explained_variance));
            Ok(())
        })
        .map_err(|e| format!("explained variance: {e}"))?;
    runner
        .run(
            &proptest::collection::vec((1u16..=6, 1u16..=6), 1..150),
            |pairs| {
                let (pred, truth): (Vec<u16>, Vec<u16>) = pairs.into_iter().unzip();
                let r = evaluate(&pred, &truth, 6).unwrap();
                prop_assert_eq!(r.confusion.iter().flatten().sum::<u64>(), r.n_test);
                Ok(())
            },
        )
        .map_err(|e| format!("confusion totals: {e}"))?;
    runner
        .run(
            &(
                proptest::collection::vec(1u16..=4, 2..150),
                0.05f64..0.95,
                any::<u64>(),
            ),
            |(labels, frac, seed)| {
                let n = labels.len();
                let set = SampleSet::new(
                    DenseMatrix::from_fn(n, 1, |i, _| i as f64).unwrap(),
                    labels,
                    (0..n).collect(),
                )
                .unwrap();
                let (train, test) = stratified_split(&set, frac, seed).unwrap();
                let mut all: Vec<usize> = train
                    .pixel_indices
                    .iter()
                    .chain(&test.pixel_indices)
                    .copied()
                    .collect();
                all.sort_unstable();
                prop_assert_eq!(all, (0..n).collect::<Vec<_>>());
                Ok(())
            },
        )
        .map_err(|e| format!("split partition: {e}"))?;
    Ok(
        "singular values, explained variance, confusion totals, split partition: 1000 cases each"
            .into(),
    )
}

fn main() {
    let matrices = geometric_matrices();
    let criteria: Vec<Criterion> = vec![
        (
            1,
            "randomized vs exact singular values",
            Box::new(|| randomized_fidelity(&matrices)),
        ),
        (
            2,
            "R-PCA vs PCA subspace angle",
            Box::new(|| subspace_agreement(&matrices)),
        ),
        (
            3,
            "SMO dual optimality vs lattice search",
            Box::new(smo_optimality),
        ),
        (
            4,
            "softmax gradient and hessian vs finite differences",
            Box::new(gradient_check),
        ),
        (
            5,
            "McNemar exact path and chi-square statistic",
            Box::new(mcnemar_exactness),
        ),
        (
            6,
            "synthetic scene pipeline accuracy",
            Box::new(pipeline_sanity),
        ),
        (8, "run determinism", Box::new(determinism)),
        (
            9,
            "ordering invariants under property tests",
            Box::new(ordering_invariants),
        ),
    ];

    let mut failed = 0;
    for (id, name, check) in &criteria {
        match check() {
            Ok(detail) => println!("PASS criterion {id}: {name}: {detail}"),
            Err(detail) => {
                failed += 1;
                println!("FAIL criterion {id}: {name}: {detail}");
            }
        }
    }
    match paper_reproduction() {
        None => println!(
            "SKIP criterion 7: published accuracy ordering (not gating; set HSIKIT_PAVIA_CUBE and HSIKIT_PAVIA_GT to run)"
        ),
        Some(Ok(detail)) => println!("PASS criterion 7: published accuracy ordering (not gating): {detail}"),
        Some(Err(detail)) => println!("FAIL criterion 7: published accuracy ordering (not gating): {detail}"),
    }
    if failed > 0 {
        println!("{failed} gating criteria failed");
        std::process::exit(1);
    }
}
