use ndarray::Array2;
use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, StandardNormal};
use serde::{Deserialize, Serialize};

use super::{Graph, SplitMasks};
use crate::error::{Error, Result};

/// Parameters of a stochastic-block-model graph with Gaussian class features.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct DatasetSpec {
    pub num_nodes: usize,
    pub num_classes: usize,
    pub feature_dim: usize,
    pub intra_class_edge_prob: f64,
    pub inter_class_edge_prob: f64,
    /// One entry per class, summing to 1. Empty means uniform.
    #[serde(default)]
    pub class_proportions: Vec<f64>,
    /// Distance between any two class centers.
    pub feature_center_separation: f64,
    pub seed: u64,
    /// Fixed training nodes per class (Cora-style). Overrides `train_fraction`.
    #[serde(default)]
    pub train_per_class: Option<usize>,
    #[serde(default = "default_fraction")]
    pub train_fraction: f64,
    #[serde(default = "default_fraction")]
    pub val_fraction: f64,
}

fn default_fraction() -> f64 {
    0.1
}

impl DatasetSpec {
    /// Uniform class proportions and a 10/10/80 split.
    pub fn new(
        num_nodes: usize,
        num_classes: usize,
        feature_dim: usize,
        intra_class_edge_prob: f64,
        inter_class_edge_prob: f64,
        feature_center_separation: f64,
        seed: u64,
    ) -> Self {
        Self {
            num_nodes,
            num_classes,
            feature_dim,
            intra_class_edge_prob,
            inter_class_edge_prob,
            class_proportions: Vec::new(),
            feature_center_separation,
            seed,
            train_per_class: None,
            train_fraction: default_fraction(),
            val_fraction: default_fraction(),
        }
    }

    pub fn proportions(&self) -> Vec<f64> {
        if self.class_proportions.is_empty() {
            vec![1.0 / self.num_classes as f64; self.num_classes]
        } else {
            self.class_proportions.clone()
        }
    }

    pub fn validate(&self) -> Result<()> {
        let bad = |m: String| Err(Error::InvalidArgument(m));
        if self.num_classes == 0 || self.num_nodes == 0 || self.feature_dim == 0 {
            return bad("num_nodes, num_classes and feature_dim must be positive".into());
        }
        for (name, p) in [
            ("intra_class_edge_prob", self.intra_class_edge_prob),
            ("inter_class_edge_prob", self.inter_class_edge_prob),
            ("train_fraction", self.train_fraction),
            ("val_fraction", self.val_fraction),
        ] {
            if !(0.0..=1.0).contains(&p) {
                return bad(format!("{name} = {p} outside [0, 1]"));
            }
        }
        if self.train_fraction + self.val_fraction > 1.0 {
            return bad("train_fraction + val_fraction exceeds 1".into());
        }
        let props = self.proportions();
        if props.len() != self.num_classes {
            return bad(format!(
                "{} class proportions for {} classes",
                props.len(),
                self.num_classes
            ));
        }
        if props.iter().any(|p| !(0.0..=1.0).contains(p)) {
            return bad("class proportions must lie in [0, 1]".into());
        }
        if (props.iter().sum::<f64>() - 1.0).abs() > 1e-6 {
            return bad("class proportions must sum to 1".into());
        }
        if !self.feature_center_separation.is_finite() || self.feature_center_separation < 0.0 {
            return bad("feature_center_separation must be finite and nonnegative".into());
        }
        Ok(())
    }

    /// Class sizes by largest-remainder rounding of `N * proportion`.
    fn class_sizes(&self) -> Result<Vec<usize>> {
        let props = self.proportions();
        let exact: Vec<f64> = props.iter().map(|p| p * self.num_nodes as f64).collect();
        let mut sizes: Vec<usize> = exact.iter().map(|x| x.floor() as usize).collect();
        let mut order: Vec<usize> = (0..sizes.len()).collect();
        order.sort_by(|&a, &b| {
            let fa = exact[a] - exact[a].floor();
            let fb = exact[b] - exact[b].floor();
            fb.total_cmp(&fa).then(a.cmp(&b))
        });
        let mut missing = self.num_nodes - sizes.iter().sum::<usize>();
        for &j in order.iter().cycle() {
            if missing == 0 {
                break;
            }
            sizes[j] += 1;
            missing -= 1;
        }
        if let Some(j) = sizes.iter().position(|&s| s == 0) {
            return Err(Error::InvalidArgument(format!(
                "infeasible class proportions: class {j} would have 0 nodes"
            )));
        }
        Ok(sizes)
    }
}

/// Unit-spaced class centers: axis-aligned when `dim >= C`, random directions otherwise.
fn class_centers(spec: &DatasetSpec, rng: &mut ChaCha8Rng) -> Array2<f64> {
    let (c, d) = (spec.num_classes, spec.feature_dim);
    let scale = spec.feature_center_separation / std::f64::consts::SQRT_2;
    let mut centers = Array2::zeros((c, d));
    if d >= c {
        for j in 0..c {
            centers[[j, j]] = scale;
        }
    } else {
        for j in 0..c {
            let mut row: Vec<f64> = (0..d).map(|_| StandardNormal.sample(rng)).collect();
            let norm = row.iter().map(|x| x * x).sum::<f64>().sqrt().max(1e-12);
            row.iter_mut().for_each(|x| *x *= scale / norm);
            centers.row_mut(j).assign(&ndarray::Array1::from(row));
        }
    }
    centers
}

/// Samples a graph and its splits. Deterministic in `spec.seed`.
pub fn generate_synthetic_graph(spec: &DatasetSpec) -> Result<(Graph, SplitMasks)> {
    spec.validate()?;
    let sizes = spec.class_sizes()?;
    let mut rng = ChaCha8Rng::seed_from_u64(spec.seed);
    let n = spec.num_nodes;

    let mut labels: Vec<usize> = sizes
        .iter()
        .enumerate()
        .flat_map(|(j, &s)| std::iter::repeat_n(j, s))
        .collect();
    labels.shuffle(&mut rng);

    let mut edges = Vec::new();
    for a in 0..n {
        for b in (a + 1)..n {
            let p = if labels[a] == labels[b] {
                spec.intra_class_edge_prob
            } else {
                spec.inter_class_edge_prob
            };
            if rng.random::<f64>() < p {
                edges.push((a, b));
            }
        }
    }

    let centers = class_centers(spec, &mut rng);
    let mut features = Array2::zeros((n, spec.feature_dim));
    for v in 0..n {
        for k in 0..spec.feature_dim {
            let noise: f64 = StandardNormal.sample(&mut rng);
            features[[v, k]] = centers[[labels[v], k]] + noise;
        }
    }

    let mut members: Vec<Vec<usize>> = vec![Vec::new(); spec.num_classes];
    for (v, &y) in labels.iter().enumerate() {
        members[y].push(v);
    }
    let mut train = Vec::new();
    let mut rest = Vec::new();
    for mut nodes in members {
        nodes.shuffle(&mut rng);
        let k = match spec.train_per_class {
            Some(k) => k,
            None => (nodes.len() as f64 * spec.train_fraction).round() as usize,
        }
        .clamp(1, nodes.len());
        train.extend_from_slice(&nodes[..k]);
        rest.extend_from_slice(&nodes[k..]);
    }
    rest.sort_unstable();
    rest.shuffle(&mut rng);
    let n_val = ((n as f64 * spec.val_fraction).round() as usize).min(rest.len());
    let test = rest.split_off(n_val);

    let graph = Graph::new(&edges, features, labels, spec.num_classes)?;
    let masks = SplitMasks::new(train, rest, test);
    masks.validate(&graph)?;
    Ok((graph, masks))
}
