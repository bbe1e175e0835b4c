use super::{training_class_counts, Graph, SplitMasks};
use crate::error::{Error, Result};

/// Node count per class over the whole graph.
pub fn class_counts(graph: &Graph) -> Vec<usize> {
    let mut counts = vec![0; graph.num_classes()];
    for &y in graph.labels() {
        counts[y] += 1;
    }
    counts
}

/// Largest over smallest per-class training count (an `M:1` ratio), ignoring
/// classes without training nodes.
pub fn imbalance_ratio(graph: &Graph, masks: &SplitMasks) -> Result<f64> {
    let counts: Vec<usize> = training_class_counts(graph, masks)
        .into_iter()
        .filter(|&c| c > 0)
        .collect();
    let (Some(&max), Some(&min)) = (counts.iter().max(), counts.iter().min()) else {
        return Err(Error::EmptyNodeSet);
    };
    Ok(max as f64 / min as f64)
}

/// Mean fraction of same-label neighbors over the nodes of `class_id`.
///
/// Isolated nodes are left out of the mean.
pub fn class_homophily(graph: &Graph, class_id: usize) -> Result<f64> {
    let mut sum = 0.0;
    let mut count = 0usize;
    for v in (0..graph.num_nodes()).filter(|&v| graph.label(v) == class_id) {
        let nbrs = graph.neighbors(v);
        if nbrs.is_empty() {
            continue;
        }
        let same = nbrs.iter().filter(|&&u| graph.label(u) == class_id).count();
        sum += same as f64 / nbrs.len() as f64;
        count += 1;
    }
    if count == 0 {
        return Err(Error::UndefinedHomophily(class_id));
    }
    Ok(sum / count as f64)
}
