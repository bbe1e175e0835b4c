//! Learned edge generator for synthetic nodes.
//!
//! A pair `(i, j)` is scored as `s = σ(e_i · (e_i − f_j))` with projections
//! `e = h W₁`, `f = h W₂`. The link probability is `logistic(s)`; over a fixed
//! neighborhood the coefficients are `softmax_j(s)`. The generator is trained to
//! reconstruct the observed adjacency among labeled nodes and its same-class
//! (homophily) part, and a synthetic node `v′` is linked to candidate `u` when
//! its probability reaches `ε`.

use std::collections::BTreeSet;

use ndarray::{Array2, ArrayView1};
use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::graph::{csr_from_edges, Graph};
use crate::nn::{logistic, ParamId, ParamSet, Tape, Var};
use crate::oversample::OversamplePlan;

/// The `σ` applied to the raw attention product.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum ScoreActivation {
    #[default]
    Identity,
    Relu,
}

impl ScoreActivation {
    fn apply(self, x: f64) -> f64 {
        match self {
            ScoreActivation::Identity => x,
            ScoreActivation::Relu => x.max(0.0),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct EdgeScore {
    pub raw: f64,
    pub probability: f64,
}

/// Scores one pair from raw weights; rows are projected as `h W`.
pub fn edge_score(
    w1: &Array2<f64>,
    w2: &Array2<f64>,
    h_i: ArrayView1<f64>,
    h_j: ArrayView1<f64>,
    activation: ScoreActivation,
) -> Result<EdgeScore> {
    if w1.dim() != w2.dim() || w1.nrows() != h_i.len() || h_i.len() != h_j.len() {
        return Err(Error::DimensionMismatch(format!(
            "weights {:?}/{:?} with embeddings of length {} and {}",
            w1.dim(),
            w2.dim(),
            h_i.len(),
            h_j.len()
        )));
    }
    let e = h_i.dot(w1);
    let f = h_j.dot(w2);
    let raw = activation.apply(e.dot(&(&e - &f)));
    Ok(EdgeScore {
        raw,
        probability: logistic(raw),
    })
}

/// Softmax of raw scores over a neighborhood.
pub fn neighborhood_coefficients(raw_scores: &[f64]) -> Vec<f64> {
    let max = raw_scores.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    let exps: Vec<f64> = raw_scores.iter().map(|s| (s - max).exp()).collect();
    let sum: f64 = exps.iter().sum();
    exps.into_iter().map(|e| e / sum).collect()
}

/// Holds the generator's two square projection matrices.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct EdgeGenerator {
    pub w1: ParamId,
    pub w2: ParamId,
    pub activation: ScoreActivation,
}

impl EdgeGenerator {
    pub fn new<R: Rng + ?Sized>(
        hidden_dim: usize,
        activation: ScoreActivation,
        params: &mut ParamSet,
        rng: &mut R,
    ) -> Self {
        let w1 = params.add_glorot("edge_gen.w1", hidden_dim, hidden_dim, rng);
        let w2 = params.add_glorot("edge_gen.w2", hidden_dim, hidden_dim, rng);
        Self { w1, w2, activation }
    }

    /// Records link probabilities for `pairs` of rows of `embeddings`; returns
    /// a `pairs.len() × 1` column.
    pub fn pair_probabilities(
        &self,
        tape: &mut Tape,
        params: &ParamSet,
        embeddings: Var,
        pairs: Vec<(usize, usize)>,
    ) -> Var {
        let w1 = tape.param(params, self.w1);
        let w2 = tape.param(params, self.w2);
        let left = tape.matmul(embeddings, w1);
        let right = tape.matmul(embeddings, w2);
        let raw = tape.pair_scores(left, right, pairs);
        let raw = match self.activation {
            ScoreActivation::Identity => raw,
            ScoreActivation::Relu => tape.relu(raw),
        };
        tape.sigmoid(raw)
    }

    /// Value-only probabilities for `pairs`.
    pub fn probabilities(
        &self,
        params: &ParamSet,
        embeddings: &Array2<f64>,
        pairs: &[(usize, usize)],
    ) -> Vec<f64> {
        let w1 = &params.get(self.w1).value;
        let w2 = &params.get(self.w2).value;
        let left = embeddings.dot(w1);
        let right = embeddings.dot(w2);
        pairs
            .iter()
            .map(|&(i, j)| {
                let e = left.row(i);
                logistic(self.activation.apply(e.dot(&e) - e.dot(&right.row(j))))
            })
            .collect()
    }
}

/// `‖A′ − A‖_F + ‖M′ − M‖_F` over the scored supports.
pub fn edge_loss(a_pred: &[f64], a_true: &[f64], m_pred: &[f64], m_true: &[f64]) -> Result<f64> {
    if a_pred.len() != a_true.len() || m_pred.len() != m_true.len() {
        return Err(Error::SupportMismatch(format!(
            "A: {} predicted vs {} true; M: {} predicted vs {} true",
            a_pred.len(),
            a_true.len(),
            m_pred.len(),
            m_true.len()
        )));
    }
    let fro = |p: &[f64], t: &[f64]| {
        p.iter()
            .zip(t)
            .map(|(a, b)| (a - b) * (a - b))
            .sum::<f64>()
            .sqrt()
    };
    Ok(fro(a_pred, a_true) + fro(m_pred, m_true))
}

/// Scored pairs for the reconstruction loss, with their targets.
#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
pub struct EdgeTrainingPairs {
    pub pairs: Vec<(usize, usize)>,
    /// 1 for an observed edge, 0 for a sampled non-edge.
    pub adjacency_target: Vec<f64>,
    /// 1 for an observed edge whose endpoints share a label.
    pub homophily_target: Vec<f64>,
}

/// Every edge with both endpoints in `labeled`, plus as many sampled non-edges.
pub fn sample_training_pairs<R: Rng + ?Sized>(
    graph: &Graph,
    labeled: &[usize],
    rng: &mut R,
) -> EdgeTrainingPairs {
    let mut in_set = vec![false; graph.num_nodes()];
    for &v in labeled {
        in_set[v] = true;
    }
    let mut out = EdgeTrainingPairs::default();
    for &v in labeled {
        for &u in graph.neighbors(v) {
            if v < u && in_set[u] {
                out.pairs.push((v, u));
                out.adjacency_target.push(1.0);
                out.homophily_target
                    .push(if graph.label(v) == graph.label(u) {
                        1.0
                    } else {
                        0.0
                    });
            }
        }
    }
    let positives = out.pairs.len();
    let max_pairs = labeled.len() * labeled.len().saturating_sub(1) / 2;
    let wanted = positives.min(max_pairs - positives);
    let mut seen: BTreeSet<(usize, usize)> = BTreeSet::new();
    let mut attempts = 0usize;
    while seen.len() < wanted && attempts < 100 * (wanted + 1) {
        attempts += 1;
        let a = labeled[rng.random_range(0..labeled.len())];
        let b = labeled[rng.random_range(0..labeled.len())];
        let pair = (a.min(b), a.max(b));
        if a == b || graph.has_edge(a, b) || !seen.insert(pair) {
            continue;
        }
        out.pairs.push(pair);
        out.adjacency_target.push(0.0);
        out.homophily_target.push(0.0);
    }
    out
}

/// Candidate link targets for a synthetic node: its parent's same-class
/// neighbor set `P` and their one-hop neighbors, sorted and deduplicated.
pub fn candidate_pairs(
    synthetic_id: usize,
    parent: usize,
    graph: &Graph,
    plan: &OversamplePlan,
) -> Vec<(usize, usize)> {
    let mut targets = BTreeSet::new();
    if let Some(members) = plan.neighbor_sets.get(&parent) {
        for &p in members {
            targets.insert(p);
            targets.extend(graph.neighbors(p).iter().copied());
        }
    }
    targets.into_iter().map(|u| (synthetic_id, u)).collect()
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct AddedEdge {
    pub synthetic: usize,
    pub target: usize,
    pub probability: f64,
}

/// Keeps candidates whose probability is at least `epsilon`.
pub fn augment(scored: &[((usize, usize), f64)], epsilon: f64) -> Vec<AddedEdge> {
    scored
        .iter()
        .filter(|(_, p)| *p >= epsilon)
        .map(|&((synthetic, target), probability)| AddedEdge {
            synthetic,
            target,
            probability,
        })
        .collect()
}

/// Scores, targets and accepted edges of one epoch.
#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
pub struct EdgeGenOutput {
    pub training: EdgeTrainingPairs,
    pub a_pred: Vec<f64>,
    /// Predicted homophily over the same (labeled) pairs as `a_pred`.
    pub m_pred: Vec<f64>,
    pub a_hat_edges: Vec<AddedEdge>,
    pub epsilon: f64,
}

/// Base graph extended with synthetic nodes (ids `N..N+S`) and accepted edges.
#[derive(Debug, Clone, PartialEq)]
pub struct AugmentedGraph {
    num_real: usize,
    labels: Vec<usize>,
    row_offsets: Vec<usize>,
    col_indices: Vec<usize>,
    added_edges: Vec<AddedEdge>,
}

impl AugmentedGraph {
    pub fn new(base: &Graph, synthetic_labels: &[usize], added_edges: Vec<AddedEdge>) -> Self {
        let num_real = base.num_nodes();
        let total = num_real + synthetic_labels.len();
        let mut labels = base.labels().to_vec();
        labels.extend_from_slice(synthetic_labels);
        let (row_offsets, col_indices) = if added_edges.is_empty() && synthetic_labels.is_empty() {
            (base.row_offsets().to_vec(), base.col_indices().to_vec())
        } else {
            let mut edges = base.edge_list();
            edges.extend(added_edges.iter().map(|e| (e.synthetic, e.target)));
            csr_from_edges(total, &edges)
        };
        Self {
            num_real,
            labels,
            row_offsets,
            col_indices,
            added_edges,
        }
    }

    pub fn num_real(&self) -> usize {
        self.num_real
    }

    pub fn num_nodes(&self) -> usize {
        self.labels.len()
    }

    pub fn num_synthetic(&self) -> usize {
        self.labels.len() - self.num_real
    }

    pub fn is_synthetic(&self, v: usize) -> bool {
        v >= self.num_real
    }

    /// True labels for real nodes, parent labels for synthetic ones.
    pub fn labels(&self) -> &[usize] {
        &self.labels
    }

    pub fn neighbors(&self, v: usize) -> &[usize] {
        &self.col_indices[self.row_offsets[v]..self.row_offsets[v + 1]]
    }

    pub fn row_offsets(&self) -> &[usize] {
        &self.row_offsets
    }

    pub fn col_indices(&self) -> &[usize] {
        &self.col_indices
    }

    pub fn added_edges(&self) -> &[AddedEdge] {
        &self.added_edges
    }
}
