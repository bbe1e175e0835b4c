//! Neighbor-based triplet mining and the triplet loss.
//!
//! Anchors are nodes confidently predicted (or labeled) as a minority class
//! `j`. Among an anchor's 1-hop neighbors, those with `P[·, j] ≥ α₊` act as
//! positives and those with `P[·, j] ≤ α₋` as negatives. The loss is the mean
//! hinge `max(0, m + d(a, p) − d(a, n))` under cosine distance on final-layer
//! hidden representations.

use ndarray::{Array2, ArrayView1};
use serde::{Deserialize, Serialize};

use crate::edge_gen::AugmentedGraph;
use crate::error::{Error, Result};
use crate::nn::tape::RowTriple;

/// `1 − cos(h1, h2)`, in `[0, 2]`.
pub fn cosine_distance(h1: ArrayView1<f64>, h2: ArrayView1<f64>) -> Result<f64> {
    if h1.len() != h2.len() {
        return Err(Error::DimensionMismatch(format!(
            "{} vs {}",
            h1.len(),
            h2.len()
        )));
    }
    let n1 = h1.dot(&h1).sqrt();
    let n2 = h2.dot(&h2).sqrt();
    if n1 <= 1e-12 || n2 <= 1e-12 {
        return Err(Error::DegenerateEmbedding);
    }
    Ok((1.0 - h1.dot(&h2) / (n1 * n2)).clamp(0.0, 2.0))
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct Triple {
    pub anchor: usize,
    pub positive: usize,
    pub negative: usize,
    pub class: usize,
}

#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
pub struct TripletBatch {
    pub triples: Vec<Triple>,
    pub margin: f64,
}

impl TripletBatch {
    pub fn is_empty(&self) -> bool {
        self.triples.is_empty()
    }

    pub fn len(&self) -> usize {
        self.triples.len()
    }

    pub fn row_triples(&self) -> Vec<RowTriple> {
        self.triples
            .iter()
            .map(|t| (t.anchor, t.positive, t.negative))
            .collect()
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct MiningConfig {
    pub alpha_plus: f64,
    pub alpha_minus: f64,
    pub margin: f64,
    pub max_per_anchor: usize,
}

impl Default for MiningConfig {
    fn default() -> Self {
        Self {
            alpha_plus: 0.9,
            alpha_minus: 0.1,
            margin: 0.5,
            max_per_anchor: 16,
        }
    }
}

/// Mines triples on `graph`.
///
/// `known` holds the label of nodes whose class is given (labeled training
/// nodes and synthetic nodes). Those qualify as anchors iff their label is a
/// minority class; every other node qualifies through its largest
/// minority-class probability. When an anchor has more than
/// `max_per_anchor` combinations, pairs of closer positives and closer
/// negatives are kept first.
pub fn mine_triplets(
    probabilities: &Array2<f64>,
    known: &[Option<usize>],
    minority_classes: &[usize],
    graph: &AugmentedGraph,
    embeddings: &Array2<f64>,
    config: &MiningConfig,
) -> Result<TripletBatch> {
    let n = graph.num_nodes();
    if probabilities.nrows() != n || known.len() != n || embeddings.nrows() != n {
        return Err(Error::DimensionMismatch(format!(
            "graph has {n} nodes; probabilities {}, status {}, embeddings {}",
            probabilities.nrows(),
            known.len(),
            embeddings.nrows()
        )));
    }
    let mut is_minority = vec![false; probabilities.ncols()];
    for &c in minority_classes {
        is_minority[c] = true;
    }
    let mut batch = TripletBatch {
        triples: Vec::new(),
        margin: config.margin,
    };
    for a in 0..n {
        let Some(class) = anchor_class(
            probabilities,
            known[a],
            minority_classes,
            &is_minority,
            a,
            config.alpha_plus,
        ) else {
            continue;
        };
        let ha = embeddings.row(a);
        let mut positives = Vec::new();
        let mut negatives = Vec::new();
        for &u in graph.neighbors(a) {
            let p = probabilities[[u, class]];
            let Ok(d) = cosine_distance(ha, embeddings.row(u)) else {
                continue;
            };
            if p >= config.alpha_plus {
                positives.push((d, u));
            } else if p <= config.alpha_minus {
                negatives.push((d, u));
            }
        }
        if positives.is_empty() || negatives.is_empty() {
            continue;
        }
        positives.sort_by(|x, y| x.0.total_cmp(&y.0).then(x.1.cmp(&y.1)));
        negatives.sort_by(|x, y| x.0.total_cmp(&y.0).then(x.1.cmp(&y.1)));
        let mut taken = 0;
        'outer: for s in 0..positives.len() + negatives.len() - 1 {
            for i in s.saturating_sub(negatives.len() - 1)..=s.min(positives.len() - 1) {
                if taken == config.max_per_anchor {
                    break 'outer;
                }
                batch.triples.push(Triple {
                    anchor: a,
                    positive: positives[i].1,
                    negative: negatives[s - i].1,
                    class,
                });
                taken += 1;
            }
        }
    }
    Ok(batch)
}

fn anchor_class(
    probabilities: &Array2<f64>,
    known: Option<usize>,
    minority_classes: &[usize],
    is_minority: &[bool],
    node: usize,
    alpha_plus: f64,
) -> Option<usize> {
    if let Some(y) = known {
        return is_minority[y].then_some(y);
    }
    let (mut best, mut best_p) = (None, f64::NEG_INFINITY);
    for &c in minority_classes {
        let p = probabilities[[node, c]];
        if p > best_p {
            best = Some(c);
            best_p = p;
        }
    }
    best.filter(|_| best_p >= alpha_plus)
}

/// Mean hinge over the batch; 0 for an empty batch.
pub fn ntl_loss(batch: &TripletBatch, embeddings: &Array2<f64>) -> Result<f64> {
    if batch.is_empty() {
        return Ok(0.0);
    }
    let mut total = 0.0;
    for t in &batch.triples {
        let ha = embeddings.row(t.anchor);
        let dp = cosine_distance(ha, embeddings.row(t.positive))?;
        let dn = cosine_distance(ha, embeddings.row(t.negative))?;
        total += (batch.margin + dp - dn).max(0.0);
    }
    Ok(total / batch.len() as f64)
}
