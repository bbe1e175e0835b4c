use ndarray::Array2;
use rand::RngCore;
use serde::{Deserialize, Serialize};

use super::baseline::{class_weights, duplicate_minority};
use super::config::{TrainConfig, Variant};
use super::model::Model;
use crate::edge_gen::{
    augment, candidate_pairs, sample_training_pairs, AddedEdge, AugmentedGraph, EdgeTrainingPairs,
};
use crate::error::{Error, Result};
use crate::graph::{minority_classes, Graph, SplitMasks};
use crate::metric_learning::{mine_triplets, MiningConfig, TripletBatch};
use crate::nn::{softmax_rows, NormalizedAdjacency, ParamSet, Tape, Var};
use crate::oversample::{plan_oversampling, OversamplePlan, SyntheticNode};

/// The loss terms of one epoch.
#[derive(Debug, Clone, Copy, PartialEq, Default, Serialize, Deserialize)]
pub struct LossBundle {
    pub l_node: f64,
    pub l_edge: f64,
    pub l_gcl: f64,
    pub l_ntl: f64,
    pub total: f64,
}

/// Combines loss terms; terms a variant does not use are reported as 0.
pub fn total_loss(l_node: f64, l_edge: f64, l_ntl: f64, config: &TrainConfig) -> LossBundle {
    let l_edge = if config.variant.uses_edge_generator() {
        l_edge
    } else {
        0.0
    };
    let l_ntl = if config.variant.uses_triplet_loss() {
        l_ntl
    } else {
        0.0
    };
    let l_gcl = l_node + config.lambda * l_edge;
    LossBundle {
        l_node,
        l_edge,
        l_gcl,
        l_ntl,
        total: l_gcl + config.gamma * l_ntl,
    }
}

/// Everything random or discrete decided during one epoch.
#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
pub struct EpochPlan {
    pub epoch: usize,
    pub delta: f64,
    pub alpha_plus: f64,
    pub alpha_minus: f64,
    pub oversample: OversamplePlan,
    pub synthetic: Vec<SyntheticNode>,
    pub edge_training: EdgeTrainingPairs,
    pub added_edges: Vec<AddedEdge>,
    pub triplets: TripletBatch,
}

/// Where an epoch's discrete decisions come from.
pub enum Decisions<'a> {
    /// Draw fresh decisions from the generator.
    Record(&'a mut dyn RngCore),
    /// Reuse a previous epoch's decisions verbatim.
    Replay(&'a EpochPlan),
}

/// Graph, splits and derived quantities fixed for a whole run.
#[derive(Debug, Clone)]
pub struct TrainingData {
    pub graph: Graph,
    pub masks: SplitMasks,
    pub base_adjacency: NormalizedAdjacency,
    pub minority_classes: Vec<usize>,
    pub minority_train: Vec<usize>,
    pub class_weights: Option<Vec<f64>>,
}

impl TrainingData {
    /// Validates the splits and applies baseline preprocessing.
    pub fn new(config: &TrainConfig, graph: &Graph, masks: &SplitMasks) -> Result<Self> {
        masks.validate(graph)?;
        if masks.validation.is_empty() {
            return Err(Error::InvalidArgument("validation split is empty".into()));
        }
        let (graph, masks) = if config.variant == Variant::Oversampling {
            duplicate_minority(graph, masks, config.n_s)?
        } else {
            (graph.clone(), masks.clone())
        };
        let minority = minority_classes(&graph, &masks);
        let minority_train = masks
            .train
            .iter()
            .copied()
            .filter(|&v| minority.contains(&graph.label(v)))
            .collect();
        let class_weights = (config.variant == Variant::Reweighting)
            .then(|| class_weights(&crate::graph::training_class_counts(&graph, &masks)));
        Ok(Self {
            base_adjacency: NormalizedAdjacency::for_graph(config.base_model, &graph),
            graph,
            masks,
            minority_classes: minority,
            minority_train,
            class_weights,
        })
    }
}

/// A recorded forward pass, ready for backward.
pub struct EpochForward {
    pub tape: Tape,
    pub total: Var,
    pub losses: LossBundle,
    pub plan: EpochPlan,
    pub augmented: AugmentedGraph,
    /// Softmax outputs for real and synthetic nodes.
    pub probabilities: Array2<f64>,
}

fn column(values: &[f64]) -> Array2<f64> {
    Array2::from_shape_vec((values.len(), 1), values.to_vec()).expect("column shape")
}

/// `(δ, α₊, α₋)` used at `epoch`.
pub fn thresholds(config: &TrainConfig, epoch: usize) -> Result<(f64, f64, f64)> {
    if config.variant == Variant::GnnClC {
        return Ok((config.mu, 1.0 - config.beta_plus, config.beta_minus));
    }
    let s = config.schedule()?;
    let l = epoch.min(s.total_epochs);
    Ok((s.delta(l)?, s.alpha_plus(l)?, s.alpha_minus(l)?))
}

/// Encoder, oversampling, edge generation, classifier and losses of one epoch.
pub fn forward_epoch(
    config: &TrainConfig,
    data: &TrainingData,
    model: &Model,
    params: &ParamSet,
    epoch: usize,
    mut decisions: Decisions<'_>,
) -> Result<EpochForward> {
    let variant = config.variant;
    let graph = &data.graph;
    let n = graph.num_nodes();
    let (delta, alpha_plus, alpha_minus) = thresholds(config, epoch)?;
    let mut plan = EpochPlan {
        epoch,
        delta,
        alpha_plus,
        alpha_minus,
        ..EpochPlan::default()
    };

    let mut tape = Tape::new();
    let x = tape.constant(graph.features().clone());
    let h1 = model
        .encoder
        .forward(&mut tape, params, &data.base_adjacency, x);

    if variant.uses_embedding_oversampling() {
        match &mut decisions {
            Decisions::Record(rng) => {
                let (os, synthetic) = plan_oversampling(
                    tape.value(h1),
                    graph.labels(),
                    &data.masks.train,
                    &data.minority_train,
                    config.k,
                    delta,
                    &mut **rng,
                )?;
                plan.oversample = os;
                plan.synthetic = synthetic;
            }
            Decisions::Replay(p) => {
                plan.oversample = p.oversample.clone();
                plan.synthetic = p.synthetic.clone();
            }
        }
    }
    let s = plan.synthetic.len();
    let synthetic_labels: Vec<usize> = plan.synthetic.iter().map(|t| t.label).collect();
    let h = if s > 0 {
        let hs = tape.interpolate(
            h1,
            plan.synthetic.iter().map(|t| t.parent).collect(),
            plan.synthetic.iter().map(|t| t.partner).collect(),
            plan.synthetic.iter().map(|t| t.r).collect(),
        );
        tape.concat_rows(h1, hs)
    } else {
        h1
    };

    let mut l_edge = None;
    if variant.uses_edge_generator() {
        let e = tape.detach(h);
        plan.edge_training = match &mut decisions {
            Decisions::Record(rng) => sample_training_pairs(graph, &data.masks.train, &mut **rng),
            Decisions::Replay(p) => p.edge_training.clone(),
        };
        let t = &plan.edge_training;
        let p = model
            .edge_generator
            .pair_probabilities(&mut tape, params, e, t.pairs.clone());
        let la = tape.frobenius_distance(p, column(&t.adjacency_target));
        let lm = tape.frobenius_distance(p, column(&t.homophily_target));
        l_edge = Some(tape.add(la, lm));

        plan.added_edges = match &decisions {
            Decisions::Record(_) => {
                let mut added = Vec::new();
                for (t, node) in plan.synthetic.iter().enumerate() {
                    let pairs = candidate_pairs(n + t, node.parent, graph, &plan.oversample);
                    let probs = model
                        .edge_generator
                        .probabilities(params, tape.value(e), &pairs);
                    let scored: Vec<_> = pairs.into_iter().zip(probs).collect();
                    added.extend(augment(&scored, config.epsilon));
                }
                added
            }
            Decisions::Replay(p) => p.added_edges.clone(),
        };
    }

    let augmented = AugmentedGraph::new(graph, &synthetic_labels, plan.added_edges.clone());
    let adjacency = if augmented.num_synthetic() == 0 {
        data.base_adjacency.clone()
    } else {
        NormalizedAdjacency::new(
            config.base_model,
            augmented.num_nodes(),
            augmented.row_offsets(),
            augmented.col_indices(),
        )
    };
    let (h2, logits) = model.classify(&mut tape, params, &adjacency, h);

    let mut targets: Vec<(usize, usize, f64)> = data
        .masks
        .train
        .iter()
        .map(|&v| {
            let y = graph.label(v);
            let w = data.class_weights.as_ref().map_or(1.0, |w| w[y]);
            (v, y, w)
        })
        .collect();
    targets.extend(
        synthetic_labels
            .iter()
            .enumerate()
            .map(|(t, &y)| (n + t, y, 1.0)),
    );
    let l_node = tape.softmax_cross_entropy(logits, targets);
    let probabilities = softmax_rows(tape.value(logits));

    let mut l_ntl = None;
    if variant.uses_triplet_loss() {
        plan.triplets = match &decisions {
            Decisions::Record(_) => {
                let mut known: Vec<Option<usize>> = vec![None; n];
                for &v in &data.masks.train {
                    known[v] = Some(graph.label(v));
                }
                known.extend(synthetic_labels.iter().map(|&y| Some(y)));
                mine_triplets(
                    &probabilities,
                    &known,
                    &data.minority_classes,
                    &augmented,
                    tape.value(h2),
                    &MiningConfig {
                        alpha_plus,
                        alpha_minus,
                        margin: config.margin,
                        max_per_anchor: config.max_triplets_per_anchor,
                    },
                )?
            }
            Decisions::Replay(p) => p.triplets.clone(),
        };
        l_ntl = Some(tape.cosine_triplet(h2, plan.triplets.row_triples(), config.margin));
    }

    let mut total = l_node;
    if let Some(le) = l_edge {
        let scaled = tape.scale(le, config.lambda);
        total = tape.add(total, scaled);
    }
    if let Some(ln) = l_ntl.filter(|_| config.gamma > 0.0) {
        let scaled = tape.scale(ln, config.gamma);
        total = tape.add(total, scaled);
    }
    let losses = total_loss(
        tape.scalar(l_node),
        l_edge.map_or(0.0, |v| tape.scalar(v)),
        l_ntl.map_or(0.0, |v| tape.scalar(v)),
        config,
    );
    Ok(EpochForward {
        tape,
        total,
        losses,
        plan,
        augmented,
        probabilities,
    })
}

/// Class probabilities for the real nodes of the training graph.
pub fn predict(model: &Model, params: &ParamSet, data: &TrainingData) -> Array2<f64> {
    let mut tape = Tape::new();
    let x = tape.constant(data.graph.features().clone());
    let h1 = model
        .encoder
        .forward(&mut tape, params, &data.base_adjacency, x);
    let (_, logits) = model.classify(&mut tape, params, &data.base_adjacency, h1);
    softmax_rows(tape.value(logits))
}
