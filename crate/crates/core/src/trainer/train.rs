use ndarray::Array2;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use super::config::TrainConfig;
use super::epoch::{forward_epoch, predict, Decisions, EpochPlan, LossBundle, TrainingData};
use super::model::Model;
use crate::error::{Error, Result};
use crate::graph::{Graph, SplitMasks};
use crate::metrics::{argmax_rows, cma, MetricsReport};
use crate::nn::{AdamState, ParamSet};

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct EpochRecord {
    pub epoch: usize,
    pub losses: LossBundle,
    pub val_cma: f64,
    pub best_val_cma: f64,
    pub num_synthetic: usize,
    pub num_added_edges: usize,
    pub num_triplets: usize,
}

#[derive(Debug, Clone)]
pub struct TrainState {
    /// Epochs completed.
    pub epoch: usize,
    pub params: ParamSet,
    pub adam: AdamState,
    pub best_val_cma: f64,
    pub best_epoch: Option<usize>,
    pub epochs_since_improvement: usize,
    pub history: Vec<EpochRecord>,
    pub stopped_early: bool,
}

/// Per-epoch callback, e.g. for debug dumps.
pub trait TrainObserver {
    fn on_epoch(&mut self, record: &EpochRecord, plan: &EpochPlan) -> Result<()>;
}

impl TrainObserver for () {
    fn on_epoch(&mut self, _: &EpochRecord, _: &EpochPlan) -> Result<()> {
        Ok(())
    }
}

/// Trained model with best-validation parameters restored.
#[derive(Debug, Clone)]
pub struct TrainOutcome {
    pub config: TrainConfig,
    pub model: Model,
    pub state: TrainState,
    pub data: TrainingData,
    pub validation: MetricsReport,
    pub test: MetricsReport,
}

impl TrainOutcome {
    /// Class probabilities for every real node under the restored parameters.
    pub fn probabilities(&self) -> Array2<f64> {
        predict(&self.model, &self.state.params, &self.data)
    }
}

/// Generator for initialization; epochs use [`epoch_rng`].
pub fn init_rng(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

pub fn epoch_rng(seed: u64, epoch: usize) -> ChaCha8Rng {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(epoch as u64 + 1);
    rng
}

/// Builds the model and its parameters for `data`.
pub fn init_model(config: &TrainConfig, data: &TrainingData) -> Result<(Model, ParamSet)> {
    let mut params = ParamSet::new();
    let mut rng = init_rng(config.seed);
    let model = Model::new(
        config,
        data.graph.feature_dim(),
        data.graph.num_classes(),
        &mut params,
        &mut rng,
    )?;
    Ok((model, params))
}

fn validation_cma(model: &Model, params: &ParamSet, data: &TrainingData) -> Result<f64> {
    let probs = predict(model, params, data);
    let nodes = &data.masks.validation;
    let pred = argmax_rows(&probs.select(ndarray::Axis(0), nodes));
    let truth: Vec<usize> = nodes.iter().map(|&v| data.graph.label(v)).collect();
    cma(&pred, &truth, data.graph.num_classes())
}

pub fn train(config: &TrainConfig, graph: &Graph, masks: &SplitMasks) -> Result<TrainOutcome> {
    train_with_observer(config, graph, masks, &mut ())
}

/// Full-graph training with early stopping on validation cmA.
pub fn train_with_observer(
    config: &TrainConfig,
    graph: &Graph,
    masks: &SplitMasks,
    observer: &mut dyn TrainObserver,
) -> Result<TrainOutcome> {
    config.validate()?;
    let data = TrainingData::new(config, graph, masks)?;
    let (model, params) = init_model(config, &data)?;
    let adam = AdamState::new(&params, config.adam);
    let mut state = TrainState {
        epoch: 0,
        params,
        adam,
        best_val_cma: f64::NEG_INFINITY,
        best_epoch: None,
        epochs_since_improvement: 0,
        history: Vec::new(),
        stopped_early: false,
    };
    let mut best = state.params.snapshot();

    for epoch in 0..config.max_epochs {
        let mut rng = epoch_rng(config.seed, epoch);
        let fwd = forward_epoch(
            config,
            &data,
            &model,
            &state.params,
            epoch,
            Decisions::Record(&mut rng),
        )?;
        let l = &fwd.losses;
        for (name, v) in [
            ("total", l.total),
            ("l_node", l.l_node),
            ("l_edge", l.l_edge),
            ("l_ntl", l.l_ntl),
        ] {
            if !v.is_finite() {
                return Err(Error::Divergence {
                    epoch,
                    reason: format!("{name} = {v}"),
                });
            }
        }
        let grads = fwd.tape.backward(fwd.total);
        state.params.zero_grad();
        grads.accumulate_into(&fwd.tape, &mut state.params);
        state
            .adam
            .step(&mut state.params)
            .map_err(|e| Error::Divergence {
                epoch,
                reason: e.to_string(),
            })?;
        state.epoch = epoch + 1;

        let val = validation_cma(&model, &state.params, &data)?;
        if val > state.best_val_cma {
            state.best_val_cma = val;
            state.best_epoch = Some(epoch);
            state.epochs_since_improvement = 0;
            best = state.params.snapshot();
        } else {
            state.epochs_since_improvement += 1;
        }
        let record = EpochRecord {
            epoch,
            losses: fwd.losses,
            val_cma: val,
            best_val_cma: state.best_val_cma,
            num_synthetic: fwd.plan.synthetic.len(),
            num_added_edges: fwd.plan.added_edges.len(),
            num_triplets: fwd.plan.triplets.len(),
        };
        observer.on_epoch(&record, &fwd.plan)?;
        state.history.push(record);
        if state.epochs_since_improvement > config.patience {
            state.stopped_early = true;
            break;
        }
    }

    state.params.restore(&best);
    let probs = predict(&model, &state.params, &data);
    let c = data.graph.num_classes();
    let validation =
        MetricsReport::evaluate(&probs, data.graph.labels(), &data.masks.validation, c)?;
    let test = MetricsReport::evaluate(&probs, data.graph.labels(), &data.masks.test, c)?;
    Ok(TrainOutcome {
        config: config.clone(),
        model,
        state,
        data,
        validation,
        test,
    })
}
