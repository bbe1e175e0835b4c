use ndarray::{Array2, Axis};

use super::params::Parameter;
use crate::error::{Error, Result};

/// Row-wise softmax with max subtraction.
pub fn softmax_rows(logits: &Array2<f64>) -> Array2<f64> {
    let mut out = logits.clone();
    for mut row in out.axis_iter_mut(Axis(0)) {
        let max = row.fold(f64::NEG_INFINITY, |m, &x| m.max(x));
        row.mapv_inplace(|x| (x - max).exp());
        let sum = row.sum();
        row.mapv_inplace(|x| x / sum);
    }
    out
}

/// `softmax(H W + b)`; `bias` is a `1 × C` row when present.
pub fn softmax_linear(
    h: &Array2<f64>,
    weight: &Parameter,
    bias: Option<&Parameter>,
) -> Result<Array2<f64>> {
    if h.ncols() != weight.value.nrows() {
        return Err(Error::DimensionMismatch(format!(
            "{} hidden columns for a {}x{} weight",
            h.ncols(),
            weight.value.nrows(),
            weight.value.ncols()
        )));
    }
    let mut logits = h.dot(&weight.value);
    if let Some(b) = bias {
        logits += &b.value;
    }
    if logits.iter().any(|x| !x.is_finite()) {
        return Err(Error::NonFinite("logits".into()));
    }
    Ok(softmax_rows(&logits))
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct CrossEntropy {
    pub sum: f64,
    pub mean: f64,
}

/// `−Σ_{v ∈ nodes} log P[v, y_v]`, with the mean alongside for logging.
pub fn cross_entropy(
    probs: &Array2<f64>,
    labels: &[usize],
    nodes: &[usize],
) -> Result<CrossEntropy> {
    if nodes.is_empty() {
        return Err(Error::EmptyNodeSet);
    }
    let sum: f64 = nodes.iter().map(|&v| -probs[[v, labels[v]]].ln()).sum();
    Ok(CrossEntropy {
        sum,
        mean: sum / nodes.len() as f64,
    })
}
