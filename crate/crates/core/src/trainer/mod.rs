//! Training loop, ablations and baselines.
//!
//! One epoch runs the encoder, samples and interpolates danger seeds, scores
//! edges for the synthetic nodes, classifies the augmented graph and mines
//! triplets; the total `L_node + λ L_edge + γ L_NTL` is then backpropagated
//! and Adam takes one full-graph step. Validation cmA drives early stopping.
//!
//! Every random or discrete choice of an epoch lands in an [`EpochPlan`], so a
//! forward pass can be replayed with [`Decisions::Replay`] for gradient checks.

mod baseline;
mod checkpoint;
mod config;
mod epoch;
mod model;
mod train;

pub use baseline::{class_weights, duplicate_minority, run_baseline};
pub use checkpoint::{Checkpoint, ParamRecord, CHECKPOINT_FORMAT_VERSION};
pub use config::{TrainConfig, Variant};
pub use epoch::{
    forward_epoch, predict, thresholds, total_loss, Decisions, EpochForward, EpochPlan, LossBundle,
    TrainingData,
};
pub use model::Model;
pub use train::{
    epoch_rng, init_model, init_rng, train, train_with_observer, EpochRecord, TrainObserver,
    TrainOutcome, TrainState,
};
