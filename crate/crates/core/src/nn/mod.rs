//! A small differentiable kernel: parameters, sparse propagation, message-passing
//! layers, losses, Adam, and finite-difference gradient checks.
//!
//! Everything is `f64`.

mod adam;
mod gradcheck;
mod layers;
mod loss;
mod params;
mod sparse;
pub mod tape;

pub use adam::{AdamConfig, AdamState};
pub use gradcheck::{finite_difference_check, CoordError, GradCheckOptions, GradCheckReport};
pub use layers::{gnn_forward, Activation, GnnLayer, LayerConfig, LayerKind, NormalizedAdjacency};
pub use loss::{cross_entropy, softmax_linear, softmax_rows, CrossEntropy};
pub use params::{ParamId, ParamSet, Parameter};
pub use sparse::SparseMatrix;
pub use tape::{logistic, Gradients, Tape, Var};
