//! JSON checkpoints.
//!
//! ```json
//! {
//!   "format_version": 1,
//!   "config": { ...TrainConfig... },
//!   "epoch": 412,
//!   "best_epoch": 311,
//!   "best_val_cma": 0.71,
//!   "params": [{ "name": "encoder.weight", "rows": 32, "cols": 64, "data": [...] }, ...]
//! }
//! ```
//!
//! `data` is row-major. Parameters appear in creation order.

use std::path::Path;

use ndarray::Array2;
use serde::{Deserialize, Serialize};

use super::config::TrainConfig;
use super::model::Model;
use super::train::TrainOutcome;
use crate::error::{Error, Result};
use crate::nn::ParamSet;

pub const CHECKPOINT_FORMAT_VERSION: u32 = 1;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ParamRecord {
    pub name: String,
    pub rows: usize,
    pub cols: usize,
    pub data: Vec<f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Checkpoint {
    pub format_version: u32,
    pub config: TrainConfig,
    pub epoch: usize,
    pub best_epoch: Option<usize>,
    pub best_val_cma: Option<f64>,
    pub params: Vec<ParamRecord>,
}

impl Checkpoint {
    pub fn new(config: &TrainConfig, epoch: usize, params: &ParamSet) -> Self {
        Self {
            format_version: CHECKPOINT_FORMAT_VERSION,
            config: config.clone(),
            epoch,
            best_epoch: None,
            best_val_cma: None,
            params: params
                .iter()
                .map(|p| ParamRecord {
                    name: p.name.clone(),
                    rows: p.value.nrows(),
                    cols: p.value.ncols(),
                    data: p.value.iter().copied().collect(),
                })
                .collect(),
        }
    }

    pub fn from_outcome(outcome: &TrainOutcome) -> Self {
        let s = &outcome.state;
        Self {
            best_epoch: s.best_epoch,
            best_val_cma: s.best_val_cma.is_finite().then_some(s.best_val_cma),
            ..Self::new(&outcome.config, s.epoch, &s.params)
        }
    }

    pub fn save(&self, path: impl AsRef<Path>) -> Result<()> {
        let path = path.as_ref();
        let text = serde_json::to_string_pretty(self)?;
        std::fs::write(path, text + "\n").map_err(|e| Error::io(path, e))
    }

    pub fn load(path: impl AsRef<Path>) -> Result<Self> {
        let path = path.as_ref();
        let text = std::fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
        let ckpt: Self = serde_json::from_str(&text)?;
        if ckpt.format_version != CHECKPOINT_FORMAT_VERSION {
            return Err(Error::InvalidArgument(format!(
                "checkpoint format {} (supported: {CHECKPOINT_FORMAT_VERSION})",
                ckpt.format_version
            )));
        }
        Ok(ckpt)
    }

    /// Copies stored values into `params`, which must match by name and shape.
    pub fn restore_into(&self, params: &mut ParamSet) -> Result<()> {
        if params.len() != self.params.len() {
            return Err(Error::DimensionMismatch(format!(
                "checkpoint has {} parameters, model has {}",
                self.params.len(),
                params.len()
            )));
        }
        for (p, r) in params.iter_mut().zip(&self.params) {
            if p.name != r.name || p.value.dim() != (r.rows, r.cols) {
                return Err(Error::DimensionMismatch(format!(
                    "checkpoint entry {} {}x{} does not match {} {:?}",
                    r.name,
                    r.rows,
                    r.cols,
                    p.name,
                    p.value.dim()
                )));
            }
            p.value = Array2::from_shape_vec((r.rows, r.cols), r.data.clone())
                .map_err(|e| Error::DimensionMismatch(e.to_string()))?;
        }
        Ok(())
    }

    /// Rebuilds the model for a graph with the given dimensions.
    pub fn build_model(&self, feature_dim: usize, num_classes: usize) -> Result<(Model, ParamSet)> {
        let mut params = ParamSet::new();
        let mut rng = super::train::init_rng(self.config.seed);
        let model = Model::new(
            &self.config,
            feature_dim,
            num_classes,
            &mut params,
            &mut rng,
        )?;
        self.restore_into(&mut params)?;
        Ok((model, params))
    }
}
