//! Argument parsing and subcommand dispatch.

use std::io::Write;
use std::path::PathBuf;

use clap::{Args, Parser, Subcommand, ValueEnum};
use hsikit::synthetic::SceneSpec;
use hsikit::{GbdtParams, SvmParams};

use crate::bench::{cmd_bench, render_table, BenchSpec};
use crate::compare::cmd_compare;
use crate::config::{ClassifierConfig, GridSpec, Reduction, RunConfig, SvmSection};
use crate::convert::{
    cmd_convert, sidecar_path, ByteOrder, DatasetKind, Interleave, LayoutSpec, RawDtype,
};
use crate::error::{exit_code, usage, CliError, EXIT_OK, EXIT_USAGE};
use crate::inspect::cmd_inspect;
use crate::record::RunRecord;
use crate::run::cmd_run;
use crate::synth::cmd_synth;

#[derive(Debug, Parser)]
#[command(
    name = "hsikit",
    version,
    about = "Hyperspectral dimensionality reduction and pixel classification"
)]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Run the full pipeline and write a run directory.
    Run(RunArgs),
    /// McNemar's test between two run directories.
    Compare(CompareArgs),
    /// Time exact against randomized SVD.
    Bench(BenchArgs),
    /// Convert a flat binary dump into a container.
    Convert(ConvertArgs),
    /// Summarize containers.
    Inspect(InspectArgs),
    /// Write a synthetic labeled scene.
    Synth(SynthArgs),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum ReductionKind {
    None,
    Pca,
    Rpca,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum ClassifierKind {
    Svm,
    Gbdt,
}

#[derive(Debug, Args)]
pub struct RunArgs {
    /// TOML run configuration; flags override its values.
    #[arg(long)]
    pub config: Option<PathBuf>,
    #[arg(long)]
    pub cube: Option<PathBuf>,
    #[arg(long)]
    pub ground_truth: Option<PathBuf>,
    /// Run directory (must be absent or empty unless --force).
    #[arg(long)]
    pub output: Option<PathBuf>,
    #[arg(long)]
    pub seed: Option<u64>,
    #[arg(long)]
    pub train_fraction: Option<f64>,
    #[arg(long, value_enum)]
    pub reduction: Option<ReductionKind>,
    /// Number of retained components.
    #[arg(long)]
    pub k: Option<usize>,
    #[arg(long, value_enum)]
    pub classifier: Option<ClassifierKind>,
    /// SVM penalty C.
    #[arg(long)]
    pub c: Option<f64>,
    /// RBF kernel width γ.
    #[arg(long)]
    pub gamma: Option<f64>,
    /// Select C and γ by cross-validated grid search (default grid).
    #[arg(long)]
    pub grid: bool,
    /// GBDT boosting rounds.
    #[arg(long)]
    pub num_trees: Option<usize>,
    /// Replace an existing non-empty output directory.
    #[arg(long)]
    pub force: bool,
}

#[derive(Debug, Args)]
pub struct CompareArgs {
    pub run_a: PathBuf,
    pub run_b: PathBuf,
    /// Print JSON instead of a table.
    #[arg(long)]
    pub json: bool,
}

#[derive(Debug, Args)]
pub struct BenchArgs {
    #[arg(long, default_value_t = 1000)]
    pub rows: usize,
    #[arg(long, default_value_t = 200)]
    pub cols: usize,
    /// Target ranks, comma separated.
    #[arg(long, value_delimiter = ',', num_args = 0..)]
    pub k: Vec<usize>,
    #[arg(long, value_delimiter = ',', default_value = "0")]
    pub seeds: Vec<u64>,
    #[arg(long, default_value_t = 5)]
    pub repeats: usize,
    #[arg(long)]
    pub json: bool,
}

#[derive(Debug, Args)]
pub struct ConvertArgs {
    /// Raw input file.
    pub input: PathBuf,
    /// Output header path (`.hsih`); the payload goes next to it.
    #[arg(long, short)]
    pub output: PathBuf,
    /// Layout sidecar (defaults to the input path with extension `.dims`).
    #[arg(long)]
    pub dims: Option<PathBuf>,
    #[arg(long)]
    pub height: Option<usize>,
    #[arg(long)]
    pub width: Option<usize>,
    #[arg(long)]
    pub bands: Option<usize>,
    #[arg(long, value_enum)]
    pub dtype: Option<RawDtype>,
    #[arg(long, value_enum)]
    pub interleave: Option<Interleave>,
    #[arg(long, value_enum)]
    pub byteorder: Option<ByteOrder>,
    #[arg(long, value_enum)]
    pub kind: Option<DatasetKind>,
    /// Ground-truth class names, comma separated.
    #[arg(long, value_delimiter = ',')]
    pub class_names: Option<Vec<String>>,
}

#[derive(Debug, Args)]
pub struct InspectArgs {
    #[arg(required = true)]
    pub paths: Vec<PathBuf>,
    #[arg(long)]
    pub json: bool,
}

#[derive(Debug, Args)]
pub struct SynthArgs {
    /// Directory receiving `<name>.hsih` and `<name>_gt.hsih`.
    #[arg(long)]
    pub output_dir: PathBuf,
    #[arg(long, default_value = "scene")]
    pub name: String,
    #[arg(long, default_value_t = 40)]
    pub height: usize,
    #[arg(long, default_value_t = 40)]
    pub width: usize,
    #[arg(long, default_value_t = 60)]
    pub bands: usize,
    #[arg(long, default_value_t = 5)]
    pub classes: usize,
    #[arg(long, default_value_t = 0.03)]
    pub noise: f64,
    #[arg(long, default_value_t = 0.1)]
    pub unlabeled_fraction: f64,
    #[arg(long, default_value_t = 1)]
    pub seed: u64,
}

/// Build the effective configuration: the file (if any), then flags.
pub fn resolve_run_config(args: &RunArgs) -> anyhow::Result<RunConfig> {
    let mut cfg = match &args.config {
        Some(path) => RunConfig::load(path)?,
        None => match (&args.cube, &args.ground_truth) {
            (Some(c), Some(g)) => RunConfig::new(c.clone(), g.clone()),
            _ => return usage("run needs --config or both --cube and --ground-truth"),
        },
    };
    if let Some(c) = &args.cube {
        cfg.cube = c.clone();
    }
    if let Some(g) = &args.ground_truth {
        cfg.ground_truth = g.clone();
    }
    if let Some(o) = &args.output {
        cfg.output = Some(o.clone());
    }
    if let Some(s) = args.seed {
        cfg.seed = s;
    }
    if let Some(f) = args.train_fraction {
        cfg.train_fraction = f;
    }

    let k = args.k.or(cfg.reduction.width());
    cfg.reduction = match (args.reduction, cfg.reduction) {
        (Some(ReductionKind::None), _) => Reduction::None,
        (Some(ReductionKind::Pca), _) => Reduction::Pca {
            k: k.ok_or_else(|| needs_k("pca"))?,
        },
        (
            Some(ReductionKind::Rpca),
            Reduction::Rpca {
                oversampling,
                power_iterations,
                ..
            },
        ) => Reduction::Rpca {
            k: k.expect("existing width"),
            oversampling,
            power_iterations,
        },
        (Some(ReductionKind::Rpca), _) => Reduction::Rpca {
            k: k.ok_or_else(|| needs_k("rpca"))?,
            oversampling: hsikit::linalg::DEFAULT_OVERSAMPLING,
            power_iterations: hsikit::linalg::DEFAULT_POWER_ITERATIONS,
        },
        (None, Reduction::None) if args.k.is_some() => {
            return usage("--k needs --reduction pca or rpca")
        }
        (None, Reduction::Pca { .. }) => Reduction::Pca {
            k: k.expect("existing width"),
        },
        (
            None,
            Reduction::Rpca {
                oversampling,
                power_iterations,
                ..
            },
        ) => Reduction::Rpca {
            k: k.expect("existing width"),
            oversampling,
            power_iterations,
        },
        (None, r) => r,
    };

    match args.classifier {
        Some(ClassifierKind::Svm) if !matches!(cfg.classifier, ClassifierConfig::Svm(_)) => {
            cfg.classifier = ClassifierConfig::Svm(SvmSection {
                params: SvmParams::default(),
                grid: None,
            });
        }
        Some(ClassifierKind::Gbdt) if !matches!(cfg.classifier, ClassifierConfig::Gbdt(_)) => {
            cfg.classifier = ClassifierConfig::Gbdt(GbdtParams::default());
        }
        _ => {}
    }
    match &mut cfg.classifier {
        ClassifierConfig::Svm(section) => {
            if let Some(c) = args.c {
                section.params.c = c;
            }
            if let Some(g) = args.gamma {
                section.params.gamma = g;
            }
            if args.grid && section.grid.is_none() {
                section.grid = Some(GridSpec::default());
            }
            if args.num_trees.is_some() {
                return usage("--num-trees applies to the gbdt classifier");
            }
        }
        ClassifierConfig::Gbdt(params) => {
            if args.c.is_some() || args.gamma.is_some() || args.grid {
                return usage("--c, --gamma and --grid apply to the svm classifier");
            }
            if let Some(n) = args.num_trees {
                params.num_trees = n;
            }
        }
    }
    cfg.validate().map_err(|reason| CliError::Config {
        path: args.config.clone().unwrap_or_else(|| "<flags>".into()),
        reason,
    })?;
    Ok(cfg)
}

fn needs_k(method: &str) -> CliError {
    CliError::Usage(format!("--reduction {method} needs --k"))
}

fn print(out: &mut dyn Write, text: &str) -> anyhow::Result<()> {
    out.write_all(text.as_bytes())?;
    Ok(())
}

fn json_line<T: serde::Serialize>(value: &T) -> String {
    let mut s = serde_json::to_string_pretty(value).expect("summaries serialize to JSON");
    s.push('\n');
    s
}

/// Execute a parsed command, writing human output to `out`.
pub fn dispatch(cli: Cli, out: &mut dyn Write) -> anyhow::Result<()> {
    match cli.command {
        Command::Run(args) => {
            let cfg = resolve_run_config(&args)?;
            let Some(output) = cfg.output.clone() else {
                return usage("run needs an output directory (--output or `output` in the config)");
            };
            let record = cmd_run(&cfg, &output, args.force)?;
            let r = &record.report;
            print(
                out,
                &format!(
                    "{}: overall accuracy {:.4} on {} test pixels ({} training); run written to {}\n",
                    r.method,
                    r.eval.overall_accuracy,
                    r.n_test,
                    r.n_train,
                    output.display()
                ),
            )
        }
        Command::Compare(args) => {
            let a = RunRecord::load(&args.run_a)?;
            let b = RunRecord::load(&args.run_b)?;
            let names = [
                args.run_a.display().to_string(),
                args.run_b.display().to_string(),
            ];
            let cmp = cmd_compare([&names[0], &names[1]], &a, &b)?;
            print(
                out,
                &if args.json {
                    json_line(&cmp)
                } else {
                    cmp.to_string()
                },
            )
        }
        Command::Bench(args) => {
            let spec = BenchSpec {
                rows: args.rows,
                cols: args.cols,
                ranks: args.k,
                seeds: args.seeds,
                repeats: args.repeats,
            };
            let rows = cmd_bench(&spec)?;
            print(
                out,
                &if args.json {
                    json_line(&rows)
                } else {
                    render_table(&rows)
                },
            )
        }
        Command::Convert(args) => {
            let sidecar = args
                .dims
                .clone()
                .unwrap_or_else(|| sidecar_path(&args.input));
            let from_file = if sidecar.exists() {
                let text = std::fs::read_to_string(&sidecar)?;
                LayoutSpec::parse_sidecar(&text).map_err(|reason| CliError::Config {
                    path: sidecar.clone(),
                    reason,
                })?
            } else if args.dims.is_some() {
                return usage(format!("sidecar {} does not exist", sidecar.display()));
            } else {
                LayoutSpec::default()
            };
            let flags = LayoutSpec {
                height: args.height,
                width: args.width,
                bands: args.bands,
                dtype: args.dtype,
                interleave: args.interleave,
                byteorder: args.byteorder,
                kind: args.kind,
                class_names: args.class_names,
            };
            let layout = from_file
                .overridden_by(flags)
                .resolve()
                .map_err(CliError::Usage)?;
            let done = cmd_convert(&args.input, &layout, &args.output)?;
            print(
                out,
                &format!(
                    "wrote {} ({:?}, {} x {} x {})\n",
                    done.header.display(),
                    done.kind,
                    done.height,
                    done.width,
                    done.bands
                ),
            )
        }
        Command::Inspect(args) => {
            for path in &args.paths {
                let summary = cmd_inspect(path)?;
                if args.json {
                    print(out, &json_line(&summary))?;
                } else {
                    print(out, &format!("{}\n{summary}", path.display()))?;
                }
            }
            Ok(())
        }
        Command::Synth(args) => {
            let spec = SceneSpec {
                height: args.height,
                width: args.width,
                bands: args.bands,
                classes: args.classes,
                noise: args.noise,
                unlabeled_fraction: args.unlabeled_fraction,
                seed: args.seed,
            };
            let (cube, gt) = cmd_synth(&args.output_dir, &args.name, &spec)?;
            print(
                out,
                &format!("wrote {} and {}\n", cube.display(), gt.display()),
            )
        }
    }
}

/// Parse `args`, run, report errors on stderr and return the exit code.
pub fn main_with_args<I, T>(args: I, out: &mut dyn Write) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<std::ffi::OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(cli) => cli,
        Err(e) => {
            let _ = e.print();
            return if e.use_stderr() { EXIT_USAGE } else { EXIT_OK };
        }
    };
    match dispatch(cli, out) {
        Ok(()) => EXIT_OK,
        Err(e) => {
            eprintln!("error: {e:#}");
            exit_code(&e)
        }
    }
}
