//! External clustering quality measures: accuracy under optimal label
//! matching, normalized mutual information and purity.

use crate::error::{Error, Result};

/// Hard labels for n samples, each in `[0, num_classes)`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct LabelVector {
    labels: Vec<usize>,
    num_classes: usize,
}

impl LabelVector {
    pub fn new(labels: Vec<usize>, num_classes: usize) -> Result<Self> {
        if labels.is_empty() {
            return Err(Error::InvalidInput("empty label vector".into()));
        }
        if num_classes == 0 {
            return Err(Error::InvalidInput("num_classes must be >= 1".into()));
        }
        if let Some(&bad) = labels.iter().find(|&&l| l >= num_classes) {
            return Err(Error::InvalidInput(format!(
                "label {bad} out of range for {num_classes} classes"
            )));
        }
        Ok(Self {
            labels,
            num_classes,
        })
    }

    /// Infers `num_classes` as one past the largest label.
    pub fn from_labels(labels: Vec<usize>) -> Result<Self> {
        let max = *labels
            .iter()
            .max()
            .ok_or_else(|| Error::InvalidInput("empty label vector".into()))?;
        Self::new(labels, max + 1)
    }

    pub fn labels(&self) -> &[usize] {
        &self.labels
    }

    pub fn num_classes(&self) -> usize {
        self.num_classes
    }

    pub fn len(&self) -> usize {
        self.labels.len()
    }

    pub fn is_empty(&self) -> bool {
        self.labels.is_empty()
    }
}

fn check_lengths(pred: &LabelVector, truth: &LabelVector) -> Result<()> {
    if pred.len() != truth.len() {
        return Err(Error::InvalidInput(format!(
            "label vectors have lengths {} and {}",
            pred.len(),
            truth.len()
        )));
    }
    Ok(())
}

/// Joint counts, `pred.num_classes` rows by `truth.num_classes` columns.
fn contingency(pred: &LabelVector, truth: &LabelVector) -> Vec<Vec<usize>> {
    let mut table = vec![vec![0usize; truth.num_classes()]; pred.num_classes()];
    for (&p, &t) in pred.labels().iter().zip(truth.labels()) {
        table[p][t] += 1;
    }
    table
}

/// Maximum-weight perfect matching on a square weight matrix via the
/// Hungarian algorithm with potentials, O(s^3).
fn max_assignment_total(weights: &[Vec<f64>]) -> f64 {
    let s = weights.len();
    if s == 0 {
        return 0.0;
    }
    // Minimize the negated weights; 1-based potentials with a virtual
    // column 0.
    let inf = f64::INFINITY;
    let mut u = vec![0.0; s + 1];
    let mut v = vec![0.0; s + 1];
    let mut matched_row = vec![0usize; s + 1]; // matched_row[j] = row assigned to column j
    let mut way = vec![0usize; s + 1];
    for i in 1..=s {
        matched_row[0] = i;
        let mut j0 = 0usize;
        let mut min_v = vec![inf; s + 1];
        let mut used = vec![false; s + 1];
        loop {
            used[j0] = true;
            let i0 = matched_row[j0];
            let mut delta = inf;
            let mut j1 = 0usize;
            for j in 1..=s {
                if used[j] {
                    continue;
                }
                let cur = -weights[i0 - 1][j - 1] - u[i0] - v[j];
                if cur < min_v[j] {
                    min_v[j] = cur;
                    way[j] = j0;
                }
                if min_v[j] < delta {
                    delta = min_v[j];
                    j1 = j;
                }
            }
            for j in 0..=s {
                if used[j] {
                    u[matched_row[j]] += delta;
                    v[j] -= delta;
                } else {
                    min_v[j] -= delta;
                }
            }
            j0 = j1;
            if matched_row[j0] == 0 {
                break;
            }
        }
        loop {
            let j1 = way[j0];
            matched_row[j0] = matched_row[j1];
            j0 = j1;
            if j0 == 0 {
                break;
            }
        }
    }
    let mut total = 0.0;
    for j in 1..=s {
        let i = matched_row[j];
        if i > 0 {
            total += weights[i - 1][j - 1];
        }
    }
    total
}

/// Clustering accuracy: the best one-to-one mapping between predicted
/// clusters and truth classes, found by optimal assignment on the
/// contingency table.
pub fn accuracy(pred: &LabelVector, truth: &LabelVector) -> Result<f64> {
    check_lengths(pred, truth)?;
    let table = contingency(pred, truth);
    let s = pred.num_classes().max(truth.num_classes());
    let weights: Vec<Vec<f64>> = (0..s)
        .map(|i| {
            (0..s)
                .map(|j| {
                    table
                        .get(i)
                        .and_then(|row| row.get(j))
                        .map(|&c| c as f64)
                        .unwrap_or(0.0)
                })
                .collect()
        })
        .collect();
    Ok(max_assignment_total(&weights) / pred.len() as f64)
}

/// Normalized mutual information with the sqrt(H(pred) * H(truth))
/// normalization; 0 when either partition carries no information.
pub fn nmi(pred: &LabelVector, truth: &LabelVector) -> Result<f64> {
    check_lengths(pred, truth)?;
    let n = pred.len() as f64;
    let table = contingency(pred, truth);
    let pred_counts: Vec<usize> = table.iter().map(|row| row.iter().sum()).collect();
    let mut truth_counts = vec![0usize; truth.num_classes()];
    for row in &table {
        for (j, &c) in row.iter().enumerate() {
            truth_counts[j] += c;
        }
    }

    let entropy = |counts: &[usize]| -> f64 {
        counts
            .iter()
            .filter(|&&c| c > 0)
            .map(|&c| {
                let p = c as f64 / n;
                -p * p.ln()
            })
            .sum()
    };
    let h_pred = entropy(&pred_counts);
    let h_truth = entropy(&truth_counts);

    let mut mutual = 0.0;
    for (i, row) in table.iter().enumerate() {
        for (j, &c) in row.iter().enumerate() {
            if c == 0 {
                continue;
            }
            let p_joint = c as f64 / n;
            let p_i = pred_counts[i] as f64 / n;
            let p_j = truth_counts[j] as f64 / n;
            mutual += p_joint * (p_joint / (p_i * p_j)).ln();
        }
    }

    let denom = (h_pred * h_truth).sqrt();
    if denom <= 0.0 {
        return Ok(0.0);
    }
    Ok((mutual / denom).clamp(0.0, 1.0))
}

/// Purity: each predicted cluster votes for its majority truth class.
pub fn purity(pred: &LabelVector, truth: &LabelVector) -> Result<f64> {
    check_lengths(pred, truth)?;
    let table = contingency(pred, truth);
    let total: usize = table
        .iter()
        .map(|row| row.iter().copied().max().unwrap_or(0))
        .sum();
    Ok(total as f64 / pred.len() as f64)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn lv(labels: &[usize]) -> LabelVector {
        LabelVector::from_labels(labels.to_vec()).unwrap()
    }

    #[test]
    fn identical_partitions_score_one_everywhere() {
        let a = lv(&[0, 1, 2, 0, 1, 2]);
        assert_eq!(accuracy(&a, &a).unwrap(), 1.0);
        assert_eq!(nmi(&a, &a).unwrap(), 1.0);
        assert_eq!(purity(&a, &a).unwrap(), 1.0);
    }

    #[test]
    fn accuracy_is_invariant_to_renaming_clusters() {
        let truth = lv(&[0, 0, 1, 1, 2, 2]);
        let renamed = lv(&[2, 2, 0, 0, 1, 1]);
        assert_eq!(accuracy(&renamed, &truth).unwrap(), 1.0);
    }

    #[test]
    fn accuracy_handles_unequal_class_counts() {
        let pred = LabelVector::new(vec![0, 0, 1, 1], 2).unwrap();
        let truth = LabelVector::new(vec![0, 0, 1, 2], 3).unwrap();
        // Best mapping matches 3 of 4 samples.
        assert_eq!(accuracy(&pred, &truth).unwrap(), 0.75);
    }

    #[test]
    fn nmi_is_zero_for_constant_prediction() {
        let pred = LabelVector::new(vec![0, 0, 0, 0], 1).unwrap();
        let truth = lv(&[0, 0, 1, 1]);
        assert_eq!(nmi(&pred, &truth).unwrap(), 0.0);
    }

    #[test]
    fn nmi_matches_plugin_formula_on_fixed_two_cluster_example() {
        // Joint counts: (0,0)=2, (0,1)=1, (1,0)=1, (1,1)=2 over n=6.
        let pred = lv(&[0, 0, 0, 1, 1, 1]);
        let truth = lv(&[0, 0, 1, 0, 1, 1]);
        // Plug-in computation with the same counts.
        let n = 6.0f64;
        let joint = [[2.0f64, 1.0], [1.0, 2.0]];
        let marg = [3.0f64, 3.0];
        let mut mi = 0.0;
        for i in 0..2 {
            for j in 0..2 {
                let p = joint[i][j] / n;
                mi += p * (p / ((marg[i] / n) * (marg[j] / n))).ln();
            }
        }
        let h = -2.0 * (0.5f64 * 0.5f64.ln());
        let expected = mi / (h * h).sqrt();
        assert!((nmi(&pred, &truth).unwrap() - expected).abs() < 1e-12);
    }

    #[test]
    fn purity_of_even_split_is_one_over_c() {
        // Each predicted cluster splits evenly across 2 truth classes.
        let pred = lv(&[0, 0, 1, 1]);
        let truth = lv(&[0, 1, 0, 1]);
        assert_eq!(purity(&pred, &truth).unwrap(), 0.5);
    }

    #[test]
    fn purity_never_falls_below_accuracy() {
        let pred = lv(&[0, 0, 1, 1, 2, 0, 1, 2]);
        let truth = lv(&[1, 1, 0, 0, 2, 2, 0, 1]);
        let a = accuracy(&pred, &truth).unwrap();
        let p = purity(&pred, &truth).unwrap();
        assert!(p >= a);
    }

    #[test]
    fn length_mismatch_is_rejected() {
        let a = lv(&[0, 1]);
        let b = lv(&[0, 1, 0]);
        assert!(accuracy(&a, &b).is_err());
        assert!(nmi(&a, &b).is_err());
        assert!(purity(&a, &b).is_err());
    }
}
