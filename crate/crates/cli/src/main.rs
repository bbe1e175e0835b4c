//! `gnncl` command-line front end.
//!
//! Exit codes: 0 on success, 1 on a flag or configuration error, 2 on a
//! runtime failure. `GNNCL_OUTPUT_ROOT` sets the default output root.

mod analyze;
mod config;
mod error;
mod run;

use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};
use gnncl::graph::{downsample_minority, write_graph_bundle, DatasetSpec};
use gnncl::trainer::Variant;
use rand_chacha::rand_core::SeedableRng;

use crate::config::{DatasetSource, ExperimentConfig};
use crate::error::CliError;

#[derive(Parser)]
#[command(
    name = "gnncl",
    version,
    about = "Imbalanced node classification with curriculum oversampling"
)]
struct Cli {
    /// Default root for outputs when neither --out nor output_dir is given.
    #[arg(long, env = "GNNCL_OUTPUT_ROOT", default_value = "runs", global = true)]
    output_root: PathBuf,
    #[command(subcommand)]
    command: Command,
}

#[derive(Args)]
struct RunArgs {
    /// Experiment configuration (JSON).
    #[arg(long)]
    config: PathBuf,
    /// Overrides train.seed; repeats use seed, seed + 1, ...
    #[arg(long)]
    seed: Option<u64>,
    /// Overrides train.variant.
    #[arg(long)]
    variant: Option<String>,
    /// Overrides output_dir.
    #[arg(long)]
    out: Option<PathBuf>,
    /// Concurrent training runs.
    #[arg(long, default_value_t = 1)]
    jobs: usize,
}

#[derive(Subcommand)]
enum Command {
    /// Train `repeats` seeds and summarize.
    Train(RunArgs),
    /// Train once per value of the sweep parameter.
    Sweep(RunArgs),
    /// Report class sizes, imbalance ratio and homophily of a dataset.
    Analyze {
        #[arg(long, conflicts_with = "spec", required_unless_present = "spec")]
        bundle: Option<PathBuf>,
        /// DatasetSpec (JSON) of a synthetic graph.
        #[arg(long)]
        spec: Option<PathBuf>,
        /// Downsample minority training classes before reporting.
        #[arg(long)]
        imbalance_ratio: Option<f64>,
        #[arg(long, default_value_t = 0.5)]
        minority_fraction: f64,
        /// Seed of the downsampling draw.
        #[arg(long, default_value_t = 0)]
        seed: u64,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Write a graph bundle sampled from a DatasetSpec.
    GenData {
        #[arg(long)]
        spec: PathBuf,
        #[arg(long)]
        out: PathBuf,
    },
}

fn output_dir(
    root: &Path,
    config_path: &Path,
    config: &ExperimentConfig,
    out: Option<PathBuf>,
) -> PathBuf {
    out.or_else(|| config.output_dir.clone())
        .unwrap_or_else(|| {
            let stem = config_path
                .file_stem()
                .map_or("experiment".into(), |s| s.to_string_lossy().into_owned());
            root.join(stem)
        })
}

fn prepare(args: RunArgs, root: &Path) -> Result<(ExperimentConfig, PathBuf, usize), CliError> {
    let mut config = ExperimentConfig::load(&args.config)?;
    if let Some(seed) = args.seed {
        config.train.seed = seed;
    }
    if let Some(v) = &args.variant {
        config.train.variant = v
            .parse::<Variant>()
            .map_err(|e| CliError::Config(format!("--variant: {e}")))?;
    }
    if args.jobs == 0 {
        return Err(CliError::Config("--jobs must be >= 1".into()));
    }
    config.validate()?;
    let out = output_dir(root, &args.config, &config, args.out);
    std::fs::create_dir_all(&out)
        .map_err(|e| CliError::Runtime(format!("cannot create {}: {e}", out.display())))?;
    Ok((config, out, args.jobs))
}

fn load_spec(path: &Path) -> Result<DatasetSpec, CliError> {
    let text = std::fs::read_to_string(path)
        .map_err(|e| CliError::Config(format!("cannot read {}: {e}", path.display())))?;
    let de = &mut serde_json::Deserializer::from_str(&text);
    let spec: DatasetSpec = serde_path_to_error::deserialize(de).map_err(|e| {
        CliError::Config(format!(
            "{}: at `{}`: {}",
            path.display(),
            e.path(),
            e.inner()
        ))
    })?;
    spec.validate()
        .map_err(|e| CliError::Config(format!("{}: {e}", path.display())))?;
    Ok(spec)
}

fn execute(cli: Cli) -> Result<(), CliError> {
    let root = cli.output_root;
    match cli.command {
        Command::Train(args) => {
            let (config, out, jobs) = prepare(args, &root)?;
            let s = run::cmd_train(&config, &out, jobs)?;
            println!(
                "{}: cmA {:.4} ± {:.4}, AUC {:.4} ± {:.4} over {} seeds -> {}",
                s.variant,
                s.cma.mean,
                s.cma.std,
                s.auc_macro.mean,
                s.auc_macro.std,
                s.seeds.len(),
                out.display()
            );
        }
        Command::Sweep(args) => {
            let (config, out, jobs) = prepare(args, &root)?;
            if config.sweep.is_none() {
                return Err(CliError::Config("`sweep`: missing sweep block".into()));
            }
            let rows = run::cmd_sweep(&config, &out, jobs)?;
            println!("{} runs -> {}", rows.len(), out.display());
        }
        Command::Analyze {
            bundle,
            spec,
            imbalance_ratio,
            minority_fraction,
            seed,
            out,
        } => {
            let source = match (bundle, spec) {
                (Some(b), _) if !b.is_dir() => {
                    return Err(CliError::Config(format!(
                        "--bundle: {} is not a directory",
                        b.display()
                    )))
                }
                (Some(b), _) => DatasetSource::Bundle(b),
                (None, Some(s)) => DatasetSource::Synthetic(load_spec(&s)?),
                (None, None) => {
                    return Err(CliError::Config(
                        "one of --bundle or --spec is required".into(),
                    ))
                }
            };
            let (graph, mut masks) = run::load_dataset(&source)?;
            if let Some(r) = imbalance_ratio {
                let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(seed + run::SPLIT_SEED_OFFSET);
                masks = downsample_minority(&masks, &graph, r, minority_fraction, &mut rng)
                    .map_err(|e| {
                        CliError::Config(format!("--imbalance-ratio / --minority-fraction: {e}"))
                    })?;
            }
            let report = analyze::analyze(&graph, &masks);
            let out = out.unwrap_or_else(|| root.join("analyze"));
            analyze::write_report(&report, &out)?;
            println!("{}", serde_json::to_string_pretty(&report)?);
        }
        Command::GenData { spec, out } => {
            let spec = load_spec(&spec)?;
            let (graph, masks) = gnncl::graph::generate_synthetic_graph(&spec)?;
            write_graph_bundle(&out, &graph, &masks)?;
            println!(
                "{} nodes, {} edges, {} classes -> {}",
                graph.num_nodes(),
                graph.num_edges(),
                graph.num_classes(),
                out.display()
            );
        }
    }
    Ok(())
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            let code = if e.use_stderr() { 1 } else { 0 };
            let _ = e.print();
            return ExitCode::from(code);
        }
    };
    match execute(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("{e}");
            ExitCode::from(e.exit_code() as u8)
        }
    }
}
