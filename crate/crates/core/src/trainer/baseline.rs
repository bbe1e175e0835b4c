use super::config::TrainConfig;
use super::train::{train, TrainOutcome};
use crate::error::{Error, Result};
use crate::graph::{minority_classes, training_class_counts, Graph, SplitMasks};

/// `total / (C · count_c)` per class.
pub fn class_weights(counts: &[usize]) -> Vec<f64> {
    let total: usize = counts.iter().sum();
    let c = counts.len() as f64;
    counts
        .iter()
        .map(|&k| {
            if k == 0 {
                0.0
            } else {
                total as f64 / (c * k as f64)
            }
        })
        .collect()
}

/// Appends copies of every minority training node, each wired to the original's
/// neighbors and added to the training split.
///
/// With `n_s = Some(n)` each minority node gets `n` copies; with `None`, copies
/// are spread so that every minority class reaches the largest class count.
pub fn duplicate_minority(
    graph: &Graph,
    masks: &SplitMasks,
    n_s: Option<usize>,
) -> Result<(Graph, SplitMasks)> {
    let counts = training_class_counts(graph, masks);
    let minority = minority_classes(graph, masks);
    let max = counts.iter().copied().max().unwrap_or(0);
    let mut copies_of: Vec<(usize, usize)> = Vec::new();
    for &c in &minority {
        let members: Vec<usize> = masks
            .train
            .iter()
            .copied()
            .filter(|&v| graph.label(v) == c)
            .collect();
        let count = members.len();
        for (i, &v) in members.iter().enumerate() {
            let copies = match n_s {
                Some(n) => n,
                None => (max - count) / count + usize::from(i < (max - count) % count),
            };
            if copies > 0 {
                copies_of.push((v, copies));
            }
        }
    }

    let n = graph.num_nodes();
    let extra: usize = copies_of.iter().map(|&(_, k)| k).sum();
    let d = graph.feature_dim();
    let mut features = ndarray::Array2::zeros((n + extra, d));
    features
        .slice_mut(ndarray::s![..n, ..])
        .assign(graph.features());
    let mut labels = graph.labels().to_vec();
    let mut edges = graph.edge_list();
    let mut train = masks.train.clone();
    let mut next = n;
    for &(v, k) in &copies_of {
        for _ in 0..k {
            features.row_mut(next).assign(&graph.features().row(v));
            labels.push(graph.label(v));
            edges.extend(graph.neighbors(v).iter().map(|&u| (next, u)));
            train.push(next);
            next += 1;
        }
    }
    let dup = Graph::new(&edges, features, labels, graph.num_classes())?;
    Ok((
        dup,
        SplitMasks::new(train, masks.validation.clone(), masks.test.clone()),
    ))
}

/// Trains one of the baselines.
pub fn run_baseline(
    config: &TrainConfig,
    graph: &Graph,
    masks: &SplitMasks,
) -> Result<TrainOutcome> {
    if !config.variant.is_baseline() {
        return Err(Error::InvalidArgument(format!(
            "{} is not a baseline variant",
            config.variant
        )));
    }
    train(config, graph, masks)
}
