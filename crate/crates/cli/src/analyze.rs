//! Dataset report: class sizes, imbalance ratio and per-class homophily.

use std::path::Path;

use gnncl::graph::{
    class_counts, class_homophily, imbalance_ratio, training_class_counts, Graph, SplitMasks,
};
use serde::{Deserialize, Serialize};

use crate::error::CliError;
use crate::run::write_json;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ClassRow {
    pub class: usize,
    pub nodes: usize,
    pub train: usize,
    /// `None` when no node of the class has a neighbor.
    pub homophily: Option<f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DatasetReport {
    pub num_nodes: usize,
    pub num_edges: usize,
    pub num_classes: usize,
    pub feature_dim: usize,
    /// Largest over smallest training class count.
    pub imbalance_ratio: Option<f64>,
    pub classes: Vec<ClassRow>,
}

pub fn analyze(graph: &Graph, masks: &SplitMasks) -> DatasetReport {
    let nodes = class_counts(graph);
    let train = training_class_counts(graph, masks);
    DatasetReport {
        num_nodes: graph.num_nodes(),
        num_edges: graph.num_edges(),
        num_classes: graph.num_classes(),
        feature_dim: graph.feature_dim(),
        imbalance_ratio: imbalance_ratio(graph, masks).ok(),
        classes: (0..graph.num_classes())
            .map(|c| ClassRow {
                class: c,
                nodes: nodes[c],
                train: train[c],
                homophily: class_homophily(graph, c).ok(),
            })
            .collect(),
    }
}

/// Writes `analysis.json` and `analysis.csv` (`class,nodes,train,homophily`).
pub fn write_report(report: &DatasetReport, out: &Path) -> Result<(), CliError> {
    std::fs::create_dir_all(out)?;
    write_json(&out.join("analysis.json"), report)?;
    let mut csv = String::from("class,nodes,train,homophily\n");
    for r in &report.classes {
        let h = r.homophily.map_or(String::new(), |h| h.to_string());
        csv.push_str(&format!("{},{},{},{h}\n", r.class, r.nodes, r.train));
    }
    std::fs::write(out.join("analysis.csv"), csv)?;
    Ok(())
}
