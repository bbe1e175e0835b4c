//! Graph storage, dataset bundles, synthetic generation and structural statistics.
//!
//! A [`Graph`] is an undirected graph stored in CSR form with both directions of
//! every edge present, plus a dense node-feature matrix and one label per node.
//! It is immutable once built and can be shared freely across threads.

mod io;
mod sampling;
mod stats;
mod synthetic;

pub use io::{load_graph_bundle, write_graph_bundle};
pub use sampling::{downsample_minority, minority_classes, training_class_counts};
pub use stats::{class_counts, class_homophily, imbalance_ratio};
pub use synthetic::{generate_synthetic_graph, DatasetSpec};

use ndarray::Array2;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Builds sorted, deduplicated, symmetric CSR arrays from an undirected edge list.
///
/// Self-loops are dropped. Returns `(row_offsets, col_indices)`.
pub fn csr_from_edges(num_nodes: usize, edges: &[(usize, usize)]) -> (Vec<usize>, Vec<usize>) {
    let mut directed: Vec<(usize, usize)> = Vec::with_capacity(edges.len() * 2);
    for &(a, b) in edges {
        if a != b {
            directed.push((a, b));
            directed.push((b, a));
        }
    }
    directed.sort_unstable();
    directed.dedup();

    let mut row_offsets = vec![0usize; num_nodes + 1];
    for &(a, _) in &directed {
        row_offsets[a + 1] += 1;
    }
    for i in 0..num_nodes {
        row_offsets[i + 1] += row_offsets[i];
    }
    let col_indices = directed.into_iter().map(|(_, b)| b).collect();
    (row_offsets, col_indices)
}

#[derive(Debug, Clone, PartialEq)]
pub struct Graph {
    num_nodes: usize,
    row_offsets: Vec<usize>,
    col_indices: Vec<usize>,
    features: Array2<f64>,
    labels: Vec<usize>,
    num_classes: usize,
}

impl Graph {
    /// Builds and validates a graph. Duplicate and reversed edges collapse to a
    /// single undirected edge; self-loops are discarded.
    pub fn new(
        edges: &[(usize, usize)],
        features: Array2<f64>,
        labels: Vec<usize>,
        num_classes: usize,
    ) -> Result<Self> {
        let num_nodes = labels.len();
        if features.nrows() != num_nodes {
            return Err(Error::InvalidGraph(format!(
                "{} feature rows for {} nodes",
                features.nrows(),
                num_nodes
            )));
        }
        if num_classes == 0 {
            return Err(Error::InvalidGraph("zero classes".into()));
        }
        if let Some(&(a, b)) = edges
            .iter()
            .find(|&&(a, b)| a >= num_nodes || b >= num_nodes)
        {
            return Err(Error::InvalidGraph(format!(
                "edge ({a}, {b}) references a node outside [0, {num_nodes})"
            )));
        }
        let mut seen = vec![false; num_classes];
        for (v, &y) in labels.iter().enumerate() {
            if y >= num_classes {
                return Err(Error::InvalidGraph(format!(
                    "label out of range: node {v} has label {y} with {num_classes} classes"
                )));
            }
            seen[y] = true;
        }
        if let Some(c) = seen.iter().position(|s| !s) {
            return Err(Error::InvalidGraph(format!("class {c} has no nodes")));
        }
        if features.iter().any(|x| !x.is_finite()) {
            return Err(Error::NonFinite("node features".into()));
        }
        let (row_offsets, col_indices) = csr_from_edges(num_nodes, edges);
        Ok(Self {
            num_nodes,
            row_offsets,
            col_indices,
            features,
            labels,
            num_classes,
        })
    }

    pub fn num_nodes(&self) -> usize {
        self.num_nodes
    }

    pub fn num_classes(&self) -> usize {
        self.num_classes
    }

    pub fn feature_dim(&self) -> usize {
        self.features.ncols()
    }

    /// Number of undirected edges.
    pub fn num_edges(&self) -> usize {
        self.col_indices.len() / 2
    }

    pub fn row_offsets(&self) -> &[usize] {
        &self.row_offsets
    }

    pub fn col_indices(&self) -> &[usize] {
        &self.col_indices
    }

    pub fn features(&self) -> &Array2<f64> {
        &self.features
    }

    pub fn labels(&self) -> &[usize] {
        &self.labels
    }

    pub fn label(&self, v: usize) -> usize {
        self.labels[v]
    }

    /// Sorted neighbor ids of `v`.
    pub fn neighbors(&self, v: usize) -> &[usize] {
        &self.col_indices[self.row_offsets[v]..self.row_offsets[v + 1]]
    }

    pub fn degree(&self, v: usize) -> usize {
        self.row_offsets[v + 1] - self.row_offsets[v]
    }

    pub fn degrees(&self) -> Vec<usize> {
        (0..self.num_nodes).map(|v| self.degree(v)).collect()
    }

    pub fn has_edge(&self, a: usize, b: usize) -> bool {
        self.neighbors(a).binary_search(&b).is_ok()
    }

    /// Undirected edges as `(low, high)` pairs in ascending order.
    pub fn edge_list(&self) -> Vec<(usize, usize)> {
        (0..self.num_nodes)
            .flat_map(|a| {
                self.neighbors(a)
                    .iter()
                    .filter(move |&&b| a < b)
                    .map(move |&b| (a, b))
            })
            .collect()
    }
}

/// Train / validation / test node partitions. Index lists are kept sorted.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct SplitMasks {
    pub train: Vec<usize>,
    #[serde(rename = "val")]
    pub validation: Vec<usize>,
    pub test: Vec<usize>,
}

impl SplitMasks {
    pub fn new(mut train: Vec<usize>, mut validation: Vec<usize>, mut test: Vec<usize>) -> Self {
        train.sort_unstable();
        validation.sort_unstable();
        test.sort_unstable();
        Self {
            train,
            validation,
            test,
        }
    }

    /// Checks disjointness, bounds, and that training covers every class.
    pub fn validate(&self, graph: &Graph) -> Result<()> {
        let n = graph.num_nodes();
        let mut owner = vec![0u8; n];
        for (tag, set) in [(1u8, &self.train), (2, &self.validation), (3, &self.test)] {
            for &v in set {
                if v >= n {
                    return Err(Error::InvalidGraph(format!(
                        "split references node {v} outside [0, {n})"
                    )));
                }
                if owner[v] != 0 {
                    return Err(Error::InvalidGraph(format!(
                        "node {v} appears in more than one split (or twice)"
                    )));
                }
                owner[v] = tag;
            }
        }
        if self.train.is_empty() {
            return Err(Error::InvalidGraph("empty training split".into()));
        }
        let counts = training_class_counts(graph, self);
        if let Some(c) = counts.iter().position(|&k| k == 0) {
            return Err(Error::InvalidGraph(format!(
                "class {c} has no training nodes"
            )));
        }
        Ok(())
    }
}
