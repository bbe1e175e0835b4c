//! Class-balanced evaluation: confusion matrix, per-class recall, cmA and
//! one-vs-rest macro AUC-ROC.
//!
//! Classes without evaluation instances are left out of every average and are
//! listed in [`MetricsReport::classes_skipped`] rather than scored as zero.

use ndarray::Array2;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// `confusion[t][p]` counts instances of true class `t` predicted as `p`.
pub fn confusion_matrix(
    predictions: &[usize],
    truth: &[usize],
    num_classes: usize,
) -> Vec<Vec<usize>> {
    assert_eq!(
        predictions.len(),
        truth.len(),
        "prediction/truth length mismatch"
    );
    let mut m = vec![vec![0; num_classes]; num_classes];
    for (&p, &t) in predictions.iter().zip(truth) {
        m[t][p] += 1;
    }
    m
}

/// Recall `TP_i / (TP_i + FN_i)` per class; `None` for classes with no instances.
pub fn per_class_tp(
    predictions: &[usize],
    truth: &[usize],
    num_classes: usize,
) -> Vec<Option<f64>> {
    confusion_matrix(predictions, truth, num_classes)
        .iter()
        .enumerate()
        .map(|(i, row)| {
            let total: usize = row.iter().sum();
            (total > 0).then(|| row[i] as f64 / total as f64)
        })
        .collect()
}

/// Class-balanced mean accuracy: the unweighted mean of per-class recall.
pub fn cma(predictions: &[usize], truth: &[usize], num_classes: usize) -> Result<f64> {
    let recalls: Vec<f64> = per_class_tp(predictions, truth, num_classes)
        .into_iter()
        .flatten()
        .collect();
    if recalls.is_empty() {
        return Err(Error::NoEvaluableClass);
    }
    Ok(recalls.iter().sum::<f64>() / recalls.len() as f64)
}

/// One-vs-rest AUC of a single score column via the Mann–Whitney rank sum,
/// with tied scores sharing their average rank. `None` without both classes.
pub fn binary_auc(scores: &[f64], positive: &[bool]) -> Option<f64> {
    let n_pos = positive.iter().filter(|&&p| p).count();
    let n_neg = positive.len() - n_pos;
    if n_pos == 0 || n_neg == 0 {
        return None;
    }
    let mut order: Vec<usize> = (0..scores.len()).collect();
    order.sort_by(|&a, &b| scores[a].total_cmp(&scores[b]));
    let mut rank_sum_pos = 0.0;
    let mut i = 0;
    while i < order.len() {
        let mut j = i;
        while j + 1 < order.len() && scores[order[j + 1]] == scores[order[i]] {
            j += 1;
        }
        // ranks i+1 ..= j+1 share their mean
        let avg = (i + j + 2) as f64 / 2.0;
        rank_sum_pos += avg * order[i..=j].iter().filter(|&&k| positive[k]).count() as f64;
        i = j + 1;
    }
    let u = rank_sum_pos - (n_pos * (n_pos + 1)) as f64 / 2.0;
    Some(u / (n_pos as f64 * n_neg as f64))
}

#[derive(Debug, Clone, PartialEq)]
pub struct MacroAuc {
    pub auc: f64,
    pub per_class: Vec<Option<f64>>,
    pub skipped: Vec<usize>,
}

/// Macro-averaged one-vs-rest AUC over classes with both positives and negatives.
pub fn auc_roc_macro_detailed(
    probabilities: &Array2<f64>,
    truth: &[usize],
    num_classes: usize,
) -> Result<MacroAuc> {
    assert_eq!(
        probabilities.nrows(),
        truth.len(),
        "probability rows vs truth length"
    );
    let per_class: Vec<Option<f64>> = (0..num_classes)
        .map(|c| {
            let scores: Vec<f64> = probabilities.column(c).to_vec();
            let positive: Vec<bool> = truth.iter().map(|&t| t == c).collect();
            binary_auc(&scores, &positive)
        })
        .collect();
    let skipped: Vec<usize> = (0..num_classes)
        .filter(|&c| per_class[c].is_none())
        .collect();
    let valid: Vec<f64> = per_class.iter().flatten().copied().collect();
    if valid.is_empty() {
        return Err(Error::NoEvaluableClass);
    }
    Ok(MacroAuc {
        auc: valid.iter().sum::<f64>() / valid.len() as f64,
        per_class,
        skipped,
    })
}

pub fn auc_roc_macro(
    probabilities: &Array2<f64>,
    truth: &[usize],
    num_classes: usize,
) -> Result<f64> {
    auc_roc_macro_detailed(probabilities, truth, num_classes).map(|m| m.auc)
}

/// Arg-max class per row, lowest index on ties.
pub fn argmax_rows(probabilities: &Array2<f64>) -> Vec<usize> {
    probabilities
        .rows()
        .into_iter()
        .map(|row| {
            let mut best = 0;
            for (c, &x) in row.iter().enumerate() {
                if x > row[best] {
                    best = c;
                }
            }
            best
        })
        .collect()
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MetricsReport {
    pub cma: f64,
    pub auc_macro: f64,
    pub per_class_recall: Vec<Option<f64>>,
    pub confusion: Vec<Vec<usize>>,
    pub classes_skipped: Vec<usize>,
}

impl MetricsReport {
    /// Evaluates rows `nodes` of a full probability matrix against `labels`.
    pub fn evaluate(
        probabilities: &Array2<f64>,
        labels: &[usize],
        nodes: &[usize],
        num_classes: usize,
    ) -> Result<Self> {
        if nodes.is_empty() {
            return Err(Error::EmptyNodeSet);
        }
        let sub = probabilities.select(ndarray::Axis(0), nodes);
        let truth: Vec<usize> = nodes.iter().map(|&v| labels[v]).collect();
        let predictions = argmax_rows(&sub);
        let per_class_recall = per_class_tp(&predictions, &truth, num_classes);
        let cma = cma(&predictions, &truth, num_classes)?;
        let auc = auc_roc_macro_detailed(&sub, &truth, num_classes)?;
        let mut classes_skipped: Vec<usize> = (0..num_classes)
            .filter(|&c| per_class_recall[c].is_none())
            .chain(auc.skipped.iter().copied())
            .collect();
        classes_skipped.sort_unstable();
        classes_skipped.dedup();
        Ok(Self {
            cma,
            auc_macro: auc.auc,
            per_class_recall,
            confusion: confusion_matrix(&predictions, &truth, num_classes),
            classes_skipped,
        })
    }
}
