//! Embedding-space oversampling of minority nodes.
//!
//! Each epoch, minority training nodes are drawn as seeds with the curriculum
//! probability `δ(l)`. For every seed we look up its `k` nearest training nodes
//! (any class) in the encoder's embedding space. With `k′` of them sharing the
//! seed's label, the seed is
//!
//! * **safe** when `k′ = k`,
//! * **noise** when `k′ = 0`,
//! * **danger** when `0 < k′ < k`.
//!
//! Only danger seeds spawn synthetic nodes: one per same-class neighbor `u`, at
//! `h + r (h_u − h)` for a fresh `r ∈ (0, 1)`.

use std::collections::BTreeMap;

use ndarray::{Array2, ArrayView1};
use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum NodeRole {
    Safe,
    Danger,
    Noise,
}

/// Seeds, their neighborhood verdicts, and the same-class neighbor sets `P`.
#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
pub struct OversamplePlan {
    pub seeds: Vec<usize>,
    pub danger_nodes: Vec<usize>,
    pub neighbor_sets: BTreeMap<usize, Vec<usize>>,
    pub k: usize,
    pub k_prime: BTreeMap<usize, usize>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SyntheticNode {
    pub embedding: Vec<f64>,
    pub label: usize,
    pub parent: usize,
    pub partner: usize,
    pub r: f64,
}

fn squared_distance(a: ArrayView1<f64>, b: ArrayView1<f64>) -> f64 {
    a.iter().zip(b.iter()).map(|(x, y)| (x - y) * (x - y)).sum()
}

/// The `k` candidates closest to `query` by Euclidean distance, excluding the
/// query; equal distances resolve to the lower node index.
pub fn knn_same_space(
    embeddings: &Array2<f64>,
    query: usize,
    k: usize,
    candidates: &[usize],
) -> Result<Vec<usize>> {
    let q = embeddings.row(query);
    let mut scored: Vec<(f64, usize)> = candidates
        .iter()
        .filter(|&&c| c != query)
        .map(|&c| (squared_distance(q, embeddings.row(c)), c))
        .collect();
    if scored.len() < k {
        return Err(Error::CandidateSetTooSmall {
            needed: k,
            available: scored.len(),
        });
    }
    if scored.iter().any(|(d, _)| !d.is_finite()) {
        return Err(Error::NonFinite("embeddings".into()));
    }
    scored.sort_by(|a, b| a.0.total_cmp(&b.0).then(a.1.cmp(&b.1)));
    Ok(scored.into_iter().take(k).map(|(_, c)| c).collect())
}

/// Role of a seed from its neighbors' labels, plus `k′`.
pub fn classify_danger(knn_labels: &[usize], query_label: usize, k: usize) -> (NodeRole, usize) {
    let same = knn_labels.iter().filter(|&&y| y == query_label).count();
    let role = if same == k {
        NodeRole::Safe
    } else if same == 0 {
        NodeRole::Noise
    } else {
        NodeRole::Danger
    };
    (role, same)
}

/// Draws from the open interval `(0, 1)`.
pub fn open_unit<R: Rng + ?Sized>(rng: &mut R) -> f64 {
    loop {
        let r: f64 = rng.random();
        if r > 0.0 {
            return r;
        }
    }
}

/// One synthetic node per partner, each on the open segment from the parent.
pub fn interpolate<R: Rng + ?Sized>(
    parent: usize,
    parent_embedding: ArrayView1<f64>,
    label: usize,
    partners: &[(usize, ArrayView1<f64>)],
    rng: &mut R,
) -> Vec<SyntheticNode> {
    partners
        .iter()
        .map(|&(partner, h)| {
            let r = open_unit(rng);
            let embedding = parent_embedding
                .iter()
                .zip(h.iter())
                .map(|(&a, &b)| a + r * (b - a))
                .collect();
            SyntheticNode {
                embedding,
                label,
                parent,
                partner,
                r,
            }
        })
        .collect()
}

/// Keeps each node independently with probability `delta`.
pub fn sample_seeds<R: Rng + ?Sized>(
    minority_train_nodes: &[usize],
    delta: f64,
    rng: &mut R,
) -> Vec<usize> {
    minority_train_nodes
        .iter()
        .copied()
        .filter(|_| rng.random::<f64>() < delta)
        .collect()
}

/// Runs one epoch of seed sampling, danger detection and interpolation.
///
/// `k` is clamped to the number of other training nodes when the training set
/// is smaller than `k + 1`.
pub fn plan_oversampling<R: Rng + ?Sized>(
    embeddings: &Array2<f64>,
    labels: &[usize],
    train: &[usize],
    minority_train: &[usize],
    k: usize,
    delta: f64,
    rng: &mut R,
) -> Result<(OversamplePlan, Vec<SyntheticNode>)> {
    let seeds = sample_seeds(minority_train, delta, rng);
    let k = k.min(train.len().saturating_sub(1));
    let mut plan = OversamplePlan {
        seeds: seeds.clone(),
        k,
        ..OversamplePlan::default()
    };
    let mut synthetic = Vec::new();
    if k == 0 {
        return Ok((plan, synthetic));
    }
    for &seed in &seeds {
        let knn = knn_same_space(embeddings, seed, k, train)?;
        let knn_labels: Vec<usize> = knn.iter().map(|&u| labels[u]).collect();
        let (role, k_prime) = classify_danger(&knn_labels, labels[seed], k);
        if role != NodeRole::Danger {
            continue;
        }
        let same: Vec<usize> = knn
            .into_iter()
            .filter(|&u| labels[u] == labels[seed])
            .collect();
        let partners: Vec<(usize, ArrayView1<f64>)> =
            same.iter().map(|&u| (u, embeddings.row(u))).collect();
        synthetic.extend(interpolate(
            seed,
            embeddings.row(seed),
            labels[seed],
            &partners,
            rng,
        ));
        plan.danger_nodes.push(seed);
        plan.k_prime.insert(seed, k_prime);
        plan.neighbor_sets.insert(seed, same);
    }
    Ok((plan, synthetic))
}
