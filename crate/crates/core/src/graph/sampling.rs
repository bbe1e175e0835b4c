use rand::seq::SliceRandom;
use rand::Rng;

use super::{Graph, SplitMasks};
use crate::error::{Error, Result};

/// Training node count per class.
pub fn training_class_counts(graph: &Graph, masks: &SplitMasks) -> Vec<usize> {
    let mut counts = vec![0; graph.num_classes()];
    for &v in &masks.train {
        counts[graph.label(v)] += 1;
    }
    counts
}

/// Classes whose training count is below the mean per-class training count.
pub fn minority_classes(graph: &Graph, masks: &SplitMasks) -> Vec<usize> {
    let counts = training_class_counts(graph, masks);
    let total: usize = counts.iter().sum();
    let c = counts.len();
    // count < total / C, kept in integers
    (0..c).filter(|&j| counts[j] * c < total).collect()
}

/// Number of classes turned into minorities for a given fraction: `floor(C * fraction)`,
/// but at least one whenever the fraction is positive.
pub(crate) fn minority_class_count(num_classes: usize, minority_fraction: f64) -> usize {
    if minority_fraction <= 0.0 {
        return 0;
    }
    ((num_classes as f64 * minority_fraction + 1e-9).floor() as usize).clamp(1, num_classes)
}

/// Induces imbalance by shrinking the training split of randomly chosen classes.
///
/// `floor(C * minority_fraction)` classes are picked with `rng`; each keeps
/// `ceil(count * ratio)` of its training nodes, chosen uniformly at random.
/// Validation and test splits are left alone.
pub fn downsample_minority<R: Rng + ?Sized>(
    masks: &SplitMasks,
    graph: &Graph,
    ratio: f64,
    minority_fraction: f64,
    rng: &mut R,
) -> Result<SplitMasks> {
    if !(ratio > 0.0 && ratio <= 1.0) {
        return Err(Error::InvalidArgument(format!(
            "imbalance ratio {ratio} outside (0, 1]"
        )));
    }
    if !(0.0..=1.0).contains(&minority_fraction) {
        return Err(Error::InvalidArgument(format!(
            "minority_fraction {minority_fraction} outside [0, 1]"
        )));
    }
    let c = graph.num_classes();
    let mut classes: Vec<usize> = (0..c).collect();
    classes.shuffle(rng);
    let mut chosen = vec![false; c];
    for &j in classes
        .iter()
        .take(minority_class_count(c, minority_fraction))
    {
        chosen[j] = true;
    }

    let mut by_class: Vec<Vec<usize>> = vec![Vec::new(); c];
    for &v in &masks.train {
        by_class[graph.label(v)].push(v);
    }
    let mut train = Vec::with_capacity(masks.train.len());
    for (j, mut nodes) in by_class.into_iter().enumerate() {
        if chosen[j] {
            let keep = ((nodes.len() as f64 * ratio) - 1e-9).ceil().max(1.0) as usize;
            nodes.shuffle(rng);
            nodes.truncate(keep);
        }
        train.extend(nodes);
    }
    Ok(SplitMasks::new(
        train,
        masks.validation.clone(),
        masks.test.clone(),
    ))
}

#[cfg(test)]
mod tests {
    use super::*;
    use ndarray::Array2;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    fn balanced(per_class: usize, c: usize) -> (Graph, SplitMasks) {
        let labels: Vec<usize> = (0..per_class * c).map(|v| v % c).collect();
        let n = labels.len();
        let g = Graph::new(&[], Array2::zeros((n, 1)), labels, c).unwrap();
        (g, SplitMasks::new((0..n).collect(), vec![], vec![]))
    }

    #[test]
    fn ratio_half_keeps_ten_of_twenty() {
        let (g, masks) = balanced(20, 7);
        let mut rng = ChaCha8Rng::seed_from_u64(3);
        let down = downsample_minority(&masks, &g, 0.5, 0.5, &mut rng).unwrap();
        let mut counts = training_class_counts(&g, &down);
        counts.sort_unstable();
        assert_eq!(counts, vec![10, 10, 10, 20, 20, 20, 20]);
        let minority = minority_classes(&g, &down);
        assert_eq!(minority.len(), 3);
    }

    #[test]
    fn ratio_tenth_keeps_two() {
        let (g, masks) = balanced(20, 4);
        let mut rng = ChaCha8Rng::seed_from_u64(0);
        let down = downsample_minority(&masks, &g, 0.1, 0.5, &mut rng).unwrap();
        let mut counts = training_class_counts(&g, &down);
        counts.sort_unstable();
        assert_eq!(counts, vec![2, 2, 20, 20]);
    }

    #[test]
    fn ratio_one_is_identity() {
        let (g, masks) = balanced(20, 7);
        let mut rng = ChaCha8Rng::seed_from_u64(9);
        assert_eq!(
            downsample_minority(&masks, &g, 1.0, 0.5, &mut rng).unwrap(),
            masks
        );
    }

    #[test]
    fn rejects_bad_ratio() {
        let (g, masks) = balanced(2, 2);
        let mut rng = ChaCha8Rng::seed_from_u64(0);
        assert!(downsample_minority(&masks, &g, 0.0, 0.5, &mut rng).is_err());
        assert!(downsample_minority(&masks, &g, 1.5, 0.5, &mut rng).is_err());
    }

    #[test]
    fn seeded_selection_is_reproducible() {
        let (g, masks) = balanced(20, 7);
        let a =
            downsample_minority(&masks, &g, 0.3, 0.5, &mut ChaCha8Rng::seed_from_u64(5)).unwrap();
        let b =
            downsample_minority(&masks, &g, 0.3, 0.5, &mut ChaCha8Rng::seed_from_u64(5)).unwrap();
        assert_eq!(a, b);
    }
}
