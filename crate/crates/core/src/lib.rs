//! Class-imbalanced semi-supervised node classification with curriculum
//! oversampling, generated edges and neighbor triplet learning.
//!
//! The crate is organised bottom-up:
//!
//! * [`graph`]: CSR graphs, bundle I/O, statistics, split downsampling, synthetic data;
//! * [`nn`]: reverse-mode tape, message-passing layers, Adam, gradient checks;
//! * [`curriculum`], [`oversample`], [`edge_gen`], [`metric_learning`]: the per-epoch components;
//! * [`trainer`]: the training loop, ablations and baselines;
//! * [`metrics`]: cmA, macro AUC and reports.

pub mod curriculum;
pub mod edge_gen;
pub mod error;
pub mod graph;
pub mod metric_learning;
pub mod metrics;
pub mod nn;
pub mod oversample;
pub mod trainer;

pub use error::{Error, Result};

#[cfg(doctest)]
mod book {
    #[doc = include_str!("../../../book/src/introduction.md")]
    mod introduction {}
    #[doc = include_str!("../../../book/src/graphs.md")]
    mod graphs {}
    #[doc = include_str!("../../../book/src/autodiff.md")]
    mod autodiff {}
    #[doc = include_str!("../../../book/src/curriculum.md")]
    mod curriculum {}
    #[doc = include_str!("../../../book/src/oversampling.md")]
    mod oversampling {}
    #[doc = include_str!("../../../book/src/edge-generation.md")]
    mod edge_generation {}
    #[doc = include_str!("../../../book/src/triplets.md")]
    mod triplets {}
    #[doc = include_str!("../../../book/src/training.md")]
    mod training {}
    #[doc = include_str!("../../../book/src/metrics.md")]
    mod metrics {}
    #[doc = include_str!("../../../book/src/cli.md")]
    mod cli {}
}
