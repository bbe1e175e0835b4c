#![allow(dead_code)]

use gnncl::graph::{generate_synthetic_graph, DatasetSpec, Graph, SplitMasks};
use gnncl::trainer::{TrainConfig, Variant};

/// 20 nodes, 3 classes, 2 training nodes for class 2 and 4 for the others.
pub fn tiny_graph(seed: u64) -> (Graph, SplitMasks) {
    let mut spec = DatasetSpec::new(20, 3, 4, 0.5, 0.08, 1.5, seed);
    spec.class_proportions = vec![0.4, 0.4, 0.2];
    let (g, _) = generate_synthetic_graph(&spec).unwrap();
    let mut by_class = vec![Vec::new(); 3];
    for v in 0..g.num_nodes() {
        by_class[g.label(v)].push(v);
    }
    let mut train = Vec::new();
    let mut val = Vec::new();
    let mut test = Vec::new();
    for (c, nodes) in by_class.iter().enumerate() {
        let t = if c == 2 { 2 } else { 4 };
        train.extend(&nodes[..t]);
        val.push(nodes[t]);
        test.extend(&nodes[t + 1..]);
    }
    (g, SplitMasks::new(train, val, test))
}

/// Small config for quick end-to-end runs.
pub fn quick_config(variant: Variant, epochs: usize) -> TrainConfig {
    TrainConfig {
        variant,
        hidden_dim: 8,
        patience: epochs,
        ..TrainConfig::default()
    }
    .with_max_epochs(epochs)
}
