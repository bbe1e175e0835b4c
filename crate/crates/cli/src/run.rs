//! `train` and `sweep`.
//!
//! Layout of a `train` output directory:
//!
//! ```text
//! summary.json
//! seed_0/metrics.json      test MetricsReport
//! seed_0/checkpoint.json
//! seed_0/history.json      one record per epoch
//! seed_0/debug/epoch_00000.json   (with debug_every)
//! ```
//!
//! A sweep writes one such directory per value and variant under
//! `<parameter>=<value>/<variant>/`, plus `<variant>/sweep.csv` and `sweep.json`.

use std::fs;
use std::path::{Path, PathBuf};

use gnncl::graph::{
    downsample_minority, generate_synthetic_graph, load_graph_bundle, Graph, SplitMasks,
};
use gnncl::metrics::MetricsReport;
use gnncl::trainer::{
    train_with_observer, Checkpoint, EpochPlan, EpochRecord, TrainObserver, Variant,
};
use rand_chacha::rand_core::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use serde_json::Value;

use crate::config::{value_label, DatasetSource, ExperimentConfig};
use crate::error::CliError;

/// Downsampling for run `seed` draws from a generator seeded with `seed + SPLIT_SEED_OFFSET`.
pub const SPLIT_SEED_OFFSET: u64 = 1000;

pub fn load_dataset(source: &DatasetSource) -> Result<(Graph, SplitMasks), CliError> {
    Ok(match source {
        DatasetSource::Bundle(dir) => load_graph_bundle(dir)?,
        DatasetSource::Synthetic(spec) => generate_synthetic_graph(spec)?,
    })
}

pub fn write_json(path: &Path, value: &impl Serialize) -> Result<(), CliError> {
    let text = serde_json::to_string_pretty(value)?;
    fs::write(path, text + "\n")
        .map_err(|e| CliError::Runtime(format!("cannot write {}: {e}", path.display())))
}

/// Sample mean and sample standard deviation (0 for a single value).
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Stat {
    pub mean: f64,
    pub std: f64,
    pub values: Vec<f64>,
}

impl Stat {
    pub fn of(values: &[f64]) -> Self {
        let n = values.len() as f64;
        let mean = values.iter().sum::<f64>() / n;
        let std = if values.len() > 1 {
            (values.iter().map(|x| (x - mean).powi(2)).sum::<f64>() / (n - 1.0)).sqrt()
        } else {
            0.0
        };
        Self {
            mean,
            std,
            values: values.to_vec(),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Summary {
    pub variant: Variant,
    pub seeds: Vec<u64>,
    pub cma: Stat,
    pub auc_macro: Stat,
}

#[derive(Debug, Clone)]
pub struct RunResult {
    pub seed: u64,
    pub metrics: MetricsReport,
}

struct DebugDumper {
    dir: PathBuf,
    every: usize,
}

#[derive(Serialize)]
struct DebugDump<'a> {
    record: &'a EpochRecord,
    plan: &'a EpochPlan,
}

impl TrainObserver for DebugDumper {
    fn on_epoch(&mut self, record: &EpochRecord, plan: &EpochPlan) -> gnncl::Result<()> {
        if !record.epoch.is_multiple_of(self.every) {
            return Ok(());
        }
        let path = self.dir.join(format!("epoch_{:05}.json", record.epoch));
        let text = serde_json::to_string_pretty(&DebugDump { record, plan })?;
        fs::write(&path, text + "\n").map_err(|e| {
            gnncl::Error::InvalidArgument(format!("cannot write {}: {e}", path.display()))
        })
    }
}

/// Trains one seed of `config` and writes its files into `dir`.
pub fn run_one(
    config: &ExperimentConfig,
    graph: &Graph,
    masks: &SplitMasks,
    seed: u64,
    dir: &Path,
) -> Result<RunResult, CliError> {
    fs::create_dir_all(dir)?;
    let split = match config.imbalance_ratio {
        Some(r) => {
            let mut rng = ChaCha8Rng::seed_from_u64(seed + SPLIT_SEED_OFFSET);
            downsample_minority(masks, graph, r, config.minority_fraction, &mut rng)?
        }
        None => masks.clone(),
    };
    let train = gnncl::trainer::TrainConfig {
        seed,
        ..config.train.clone()
    };
    let outcome = match config.debug_every {
        Some(every) => {
            let debug = dir.join("debug");
            fs::create_dir_all(&debug)?;
            train_with_observer(
                &train,
                graph,
                &split,
                &mut DebugDumper { dir: debug, every },
            )?
        }
        None => train_with_observer(&train, graph, &split, &mut ())?,
    };
    write_json(&dir.join("metrics.json"), &outcome.test)?;
    write_json(&dir.join("history.json"), &outcome.state.history)?;
    Checkpoint::from_outcome(&outcome).save(dir.join("checkpoint.json"))?;
    Ok(RunResult {
        seed,
        metrics: outcome.test,
    })
}

fn seeds(config: &ExperimentConfig) -> Vec<u64> {
    (0..config.repeats as u64)
        .map(|i| config.train.seed + i)
        .collect()
}

fn summarize(variant: Variant, runs: &[RunResult]) -> Summary {
    let cma: Vec<f64> = runs.iter().map(|r| r.metrics.cma).collect();
    let auc: Vec<f64> = runs.iter().map(|r| r.metrics.auc_macro).collect();
    Summary {
        variant,
        seeds: runs.iter().map(|r| r.seed).collect(),
        cma: Stat::of(&cma),
        auc_macro: Stat::of(&auc),
    }
}

fn pool(jobs: usize) -> Result<rayon::ThreadPool, CliError> {
    rayon::ThreadPoolBuilder::new()
        .num_threads(jobs.max(1))
        .build()
        .map_err(|e| CliError::Runtime(e.to_string()))
}

/// Runs every repeat and writes `summary.json`.
pub fn cmd_train(config: &ExperimentConfig, out: &Path, jobs: usize) -> Result<Summary, CliError> {
    let (graph, masks) = load_dataset(&config.dataset)?;
    let seeds = seeds(config);
    let runs: Vec<RunResult> = pool(jobs)?.install(|| {
        seeds
            .par_iter()
            .map(|&s| run_one(config, &graph, &masks, s, &out.join(format!("seed_{s}"))))
            .collect::<Result<_, _>>()
    })?;
    let summary = summarize(config.train.variant, &runs);
    write_json(&out.join("summary.json"), &summary)?;
    Ok(summary)
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SweepRow {
    pub param: String,
    pub value: Value,
    pub variant: Variant,
    pub seed: u64,
    pub cma: f64,
    pub auc: f64,
}

/// One training per sweep value, variant and seed.
pub fn cmd_sweep(
    config: &ExperimentConfig,
    out: &Path,
    jobs: usize,
) -> Result<Vec<SweepRow>, CliError> {
    let sweep = config
        .sweep
        .as_ref()
        .ok_or_else(|| CliError::Config("`sweep`: missing sweep block".into()))?;
    let variants = if sweep.variants.is_empty() {
        vec![config.train.variant]
    } else {
        sweep.variants.clone()
    };
    let (graph, masks) = load_dataset(&config.dataset)?;

    let mut points = Vec::new();
    for value in &sweep.values {
        for &variant in &variants {
            let mut c = config.with_parameter(&sweep.parameter, value)?;
            if sweep.parameter != "variant" {
                c.train.variant = variant;
            }
            c.sweep = None;
            let dir = out
                .join(format!("{}={}", sweep.parameter, value_label(value)))
                .join(c.train.variant.name());
            points.push((value.clone(), c, dir));
            if sweep.parameter == "variant" {
                break;
            }
        }
    }
    let jobs_list: Vec<(usize, u64)> = points
        .iter()
        .enumerate()
        .flat_map(|(i, (_, c, _))| seeds(c).into_iter().map(move |s| (i, s)))
        .collect();
    let results: Vec<(usize, RunResult)> = pool(jobs)?.install(|| {
        jobs_list
            .par_iter()
            .map(|&(i, s)| {
                let (_, c, dir) = &points[i];
                run_one(c, &graph, &masks, s, &dir.join(format!("seed_{s}"))).map(|r| (i, r))
            })
            .collect::<Result<_, _>>()
    })?;

    let mut rows = Vec::new();
    for (i, (value, c, dir)) in points.iter().enumerate() {
        let runs: Vec<RunResult> = results
            .iter()
            .filter(|(j, _)| *j == i)
            .map(|(_, r)| r.clone())
            .collect();
        write_json(
            &dir.join("summary.json"),
            &summarize(c.train.variant, &runs),
        )?;
        rows.extend(runs.iter().map(|r| SweepRow {
            param: sweep.parameter.clone(),
            value: value.clone(),
            variant: c.train.variant,
            seed: r.seed,
            cma: r.metrics.cma,
            auc: r.metrics.auc_macro,
        }));
    }

    let mut by_variant: Vec<Variant> = rows.iter().map(|r| r.variant).collect();
    by_variant.dedup();
    by_variant.sort_by_key(|v| Variant::ALL.iter().position(|x| x == v));
    by_variant.dedup();
    for v in by_variant {
        let dir = out.join(v.name());
        fs::create_dir_all(&dir)?;
        let mut csv = String::from("param,value,seed,cma,auc\n");
        for r in rows.iter().filter(|r| r.variant == v) {
            csv.push_str(&format!(
                "{},{},{},{},{}\n",
                r.param,
                value_label(&r.value),
                r.seed,
                r.cma,
                r.auc
            ));
        }
        fs::write(dir.join("sweep.csv"), csv)?;
    }
    write_json(&out.join("sweep.json"), &rows)?;
    Ok(rows)
}
