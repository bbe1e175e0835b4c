//! Experiment configuration files.
//!
//! ```json
//! {
//!   "dataset": { "synthetic": { "num_nodes": 1500, "num_classes": 7, ... } },
//!   "imbalance_ratio": 0.1,
//!   "minority_fraction": 0.5,
//!   "train": { "variant": "GNN-CL", "max_epochs": 400 },
//!   "repeats": 5,
//!   "output_dir": "runs/table3",
//!   "sweep": { "parameter": "imbalance_ratio", "values": [0.1, 0.5, 0.9], "variants": ["origin", "GNN-CL"] }
//! }
//! ```

use std::path::{Path, PathBuf};

use gnncl::graph::DatasetSpec;
use gnncl::nn::LayerKind;
use gnncl::trainer::{TrainConfig, Variant};
use serde::{Deserialize, Serialize};
use serde_json::Value;

use crate::error::CliError;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case", deny_unknown_fields)]
pub enum DatasetSource {
    /// Directory with `edges.tsv`, `features.tsv`, `labels.tsv`, `splits.json`.
    Bundle(PathBuf),
    Synthetic(DatasetSpec),
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SweepSpec {
    pub parameter: String,
    pub values: Vec<Value>,
    /// Variants to run at every value; empty means `train.variant` only.
    #[serde(default)]
    pub variants: Vec<Variant>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ExperimentConfig {
    pub dataset: DatasetSource,
    /// Minority training counts are scaled by this factor; `None` keeps the splits.
    #[serde(default)]
    pub imbalance_ratio: Option<f64>,
    #[serde(default = "default_minority_fraction")]
    pub minority_fraction: f64,
    #[serde(default)]
    pub train: TrainConfig,
    #[serde(default = "default_repeats")]
    pub repeats: usize,
    #[serde(default)]
    pub output_dir: Option<PathBuf>,
    #[serde(default)]
    pub sweep: Option<SweepSpec>,
    /// Write oversample plans, added edges and triplets every this many epochs.
    #[serde(default)]
    pub debug_every: Option<usize>,
}

fn default_minority_fraction() -> f64 {
    0.5
}

fn default_repeats() -> usize {
    1
}

pub const SWEEP_PARAMETERS: [&str; 10] = [
    "imbalance_ratio",
    "mu",
    "beta_plus",
    "beta_minus",
    "lambda",
    "gamma",
    "epsilon",
    "k",
    "base_model",
    "variant",
];

impl ExperimentConfig {
    pub fn load(path: &Path) -> Result<Self, CliError> {
        let text = std::fs::read_to_string(path)
            .map_err(|e| CliError::Config(format!("cannot read {}: {e}", path.display())))?;
        let de = &mut serde_json::Deserializer::from_str(&text);
        let config: Self = serde_path_to_error::deserialize(de).map_err(|e| {
            let key = e.path().to_string();
            CliError::Config(format!("{}: at `{key}`: {}", path.display(), e.inner()))
        })?;
        Ok(config)
    }

    pub fn validate(&self) -> Result<(), CliError> {
        let bad = |key: &str, msg: String| Err(CliError::Config(format!("`{key}`: {msg}")));
        match &self.dataset {
            DatasetSource::Bundle(p) if !p.is_dir() => {
                return bad(
                    "dataset.bundle",
                    format!("{} is not a directory", p.display()),
                );
            }
            DatasetSource::Synthetic(spec) => {
                if let Err(e) = spec.validate() {
                    return bad("dataset.synthetic", e.to_string());
                }
            }
            _ => {}
        }
        if let Some(r) = self.imbalance_ratio {
            if !(r > 0.0 && r <= 1.0) {
                return bad("imbalance_ratio", format!("{r} outside (0, 1]"));
            }
        }
        if !(0.0..=1.0).contains(&self.minority_fraction) {
            return bad(
                "minority_fraction",
                format!("{} outside [0, 1]", self.minority_fraction),
            );
        }
        if self.repeats == 0 {
            return bad("repeats", "must be >= 1".into());
        }
        if self.debug_every == Some(0) {
            return bad("debug_every", "must be >= 1".into());
        }
        if let Err(e) = self.train.validate() {
            return bad("train", e.to_string());
        }
        if let Some(s) = &self.sweep {
            if !SWEEP_PARAMETERS.contains(&s.parameter.as_str()) {
                return bad(
                    "sweep.parameter",
                    format!(
                        "{:?} is not one of {}",
                        s.parameter,
                        SWEEP_PARAMETERS.join(", ")
                    ),
                );
            }
            if s.values.is_empty() {
                return bad("sweep.values", "empty value list".into());
            }
            for (i, v) in s.values.iter().enumerate() {
                let applied = self.with_parameter(&s.parameter, v);
                if let Err(CliError::Config(m)) = applied.and_then(|c| c.validate_point()) {
                    return bad(&format!("sweep.values[{i}]"), m);
                }
            }
        }
        Ok(())
    }

    fn validate_point(&self) -> Result<(), CliError> {
        let mut c = self.clone();
        c.sweep = None;
        c.validate()
    }

    /// A copy with one whitelisted parameter replaced by `value`.
    pub fn with_parameter(&self, name: &str, value: &Value) -> Result<Self, CliError> {
        let mut c = self.clone();
        let number = || {
            value
                .as_f64()
                .ok_or_else(|| CliError::Config(format!("{name} expects a number, got {value}")))
        };
        match name {
            "imbalance_ratio" => c.imbalance_ratio = Some(number()?),
            "mu" => c.train.mu = number()?,
            "beta_plus" => c.train.beta_plus = number()?,
            "beta_minus" => c.train.beta_minus = number()?,
            "lambda" => c.train.lambda = number()?,
            "gamma" => c.train.gamma = number()?,
            "epsilon" => c.train.epsilon = number()?,
            "k" => {
                c.train.k = value.as_u64().ok_or_else(|| {
                    CliError::Config(format!("k expects a positive integer, got {value}"))
                })? as usize
            }
            "base_model" => {
                c.train.base_model = serde_json::from_value::<LayerKind>(value.clone())
                    .map_err(|e| CliError::Config(format!("base_model: {e}")))?
            }
            "variant" => {
                c.train.variant = serde_json::from_value::<Variant>(value.clone())
                    .map_err(|e| CliError::Config(format!("variant: {e}")))?
            }
            other => {
                return Err(CliError::Config(format!(
                    "unknown sweep parameter {other:?}"
                )))
            }
        }
        Ok(c)
    }
}

/// Text for a sweep value in CSV rows and directory names.
pub fn value_label(value: &Value) -> String {
    match value {
        Value::String(s) => s.clone(),
        other => other.to_string(),
    }
}
