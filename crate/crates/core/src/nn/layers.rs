use std::sync::Arc;

use ndarray::Array2;
use rand::Rng;
use serde::{Deserialize, Serialize};

use super::params::{ParamId, ParamSet};
use super::sparse::SparseMatrix;
use super::tape::{Tape, Var};
use crate::error::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum LayerKind {
    /// Symmetric-normalized graph convolution over `A + I`.
    #[serde(alias = "GCN")]
    Gcn,
    /// GraphSAGE with a mean neighbor aggregator, concatenated with the node itself.
    #[serde(alias = "SAGE-mean", alias = "sage")]
    SageMean,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Activation {
    Relu,
    Identity,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct LayerConfig {
    pub kind: LayerKind,
    pub in_dim: usize,
    pub out_dim: usize,
    pub activation: Activation,
}

/// Propagation matrix matched to a layer kind.
#[derive(Debug, Clone)]
pub struct NormalizedAdjacency {
    kind: LayerKind,
    matrix: Arc<SparseMatrix>,
}

impl NormalizedAdjacency {
    /// Normalizes a symmetric CSR adjacency (no self-loops) for `kind`.
    pub fn new(
        kind: LayerKind,
        num_nodes: usize,
        row_offsets: &[usize],
        col_indices: &[usize],
    ) -> Self {
        let matrix = match kind {
            LayerKind::Gcn => SparseMatrix::gcn_normalized(num_nodes, row_offsets, col_indices),
            LayerKind::SageMean => {
                SparseMatrix::mean_aggregation(num_nodes, row_offsets, col_indices)
            }
        };
        Self {
            kind,
            matrix: Arc::new(matrix),
        }
    }

    pub fn for_graph(kind: LayerKind, graph: &crate::graph::Graph) -> Self {
        Self::new(
            kind,
            graph.num_nodes(),
            graph.row_offsets(),
            graph.col_indices(),
        )
    }

    pub fn kind(&self) -> LayerKind {
        self.kind
    }

    pub fn num_nodes(&self) -> usize {
        self.matrix.nrows()
    }

    pub fn matrix(&self) -> &Arc<SparseMatrix> {
        &self.matrix
    }
}

/// One message-passing layer with weight and bias parameters.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct GnnLayer {
    pub config: LayerConfig,
    pub weight: ParamId,
    pub bias: ParamId,
}

impl GnnLayer {
    pub fn new<R: Rng + ?Sized>(
        config: LayerConfig,
        params: &mut ParamSet,
        name: &str,
        rng: &mut R,
    ) -> Result<Self> {
        if config.in_dim == 0 || config.out_dim == 0 {
            return Err(Error::InvalidArgument(
                "layer dimensions must be >= 1".into(),
            ));
        }
        let fan_in = match config.kind {
            LayerKind::Gcn => config.in_dim,
            LayerKind::SageMean => 2 * config.in_dim,
        };
        let weight = params.add_glorot(format!("{name}.weight"), fan_in, config.out_dim, rng);
        let bias = params.add(format!("{name}.bias"), Array2::zeros((1, config.out_dim)));
        Ok(Self {
            config,
            weight,
            bias,
        })
    }

    /// Records the layer on `tape`. GCN: `σ(Ã H W + b)`; SAGE-mean: `σ([H ‖ M H] W + b)`.
    pub fn forward(
        &self,
        tape: &mut Tape,
        params: &ParamSet,
        adjacency: &NormalizedAdjacency,
        h: Var,
    ) -> Var {
        debug_assert_eq!(adjacency.kind(), self.config.kind);
        let w = tape.param(params, self.weight);
        let b = tape.param(params, self.bias);
        let z = match self.config.kind {
            LayerKind::Gcn => {
                let hw = tape.matmul(h, w);
                tape.spmm(adjacency.matrix().clone(), hw)
            }
            LayerKind::SageMean => {
                let agg = tape.spmm(adjacency.matrix().clone(), h);
                let cat = tape.concat_cols(h, agg);
                tape.matmul(cat, w)
            }
        };
        let z = tape.add_row_bias(z, b);
        match self.config.activation {
            Activation::Relu => tape.relu(z),
            Activation::Identity => z,
        }
    }
}

/// Value-level forward of one layer, with shape and finiteness checks.
pub fn gnn_forward(
    layer: &GnnLayer,
    params: &ParamSet,
    adjacency: &NormalizedAdjacency,
    h: &Array2<f64>,
) -> Result<Array2<f64>> {
    if adjacency.kind() != layer.config.kind {
        return Err(Error::InvalidArgument(format!(
            "adjacency normalized for {:?}, layer is {:?}",
            adjacency.kind(),
            layer.config.kind
        )));
    }
    if h.ncols() != layer.config.in_dim || h.nrows() != adjacency.num_nodes() {
        return Err(Error::DimensionMismatch(format!(
            "input {}x{} for layer expecting {}x{}",
            h.nrows(),
            h.ncols(),
            adjacency.num_nodes(),
            layer.config.in_dim
        )));
    }
    if h.iter().any(|x| !x.is_finite()) {
        return Err(Error::NonFinite("layer input".into()));
    }
    let mut tape = Tape::new();
    let x = tape.constant(h.clone());
    let out = layer.forward(&mut tape, params, adjacency, x);
    Ok(tape.value(out).clone())
}
