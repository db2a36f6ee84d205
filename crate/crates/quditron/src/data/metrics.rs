//! Accuracy, per-class accuracy, and confusion matrices.

use crate::error::{Error, Result};

/// Metrics of one evaluation split.
#[derive(Debug, Clone, PartialEq)]
pub struct EvalMetrics {
    pub accuracy: f64,
    /// Per-class accuracy indexed like `labels`; NaN-free (classes absent
    /// from the split report 0 correct of 0 as 0.0).
    pub per_class: Vec<f64>,
    /// `confusion[true][predicted]`, indexed through `labels`.
    pub confusion: Vec<Vec<usize>>,
    /// Class labels indexing the tables above.
    pub labels: Vec<i64>,
    pub n: usize,
}

/// Scores predictions against truth over a shared label dictionary.
pub fn evaluate(labels: &[i64], y_true: &[i64], y_pred: &[i64]) -> Result<EvalMetrics> {
    if y_true.is_empty() {
        return Err(Error::EmptySplit);
    }
    if y_true.len() != y_pred.len() {
        return Err(Error::DimensionMismatch {
            context: "evaluation lengths",
            expected: y_true.len(),
            got: y_pred.len(),
        });
    }
    let d = labels.len();
    let index_of = |l: i64| labels.iter().position(|&x| x == l);
    let mut confusion = vec![vec![0usize; d]; d];
    let mut correct = 0usize;
    for (&t, &p) in y_true.iter().zip(y_pred) {
        if t == p {
            correct += 1;
        }
        if let (Some(ti), Some(pi)) = (index_of(t), index_of(p)) {
            confusion[ti][pi] += 1;
        }
    }
    let per_class = (0..d)
        .map(|c| {
            let total: usize = confusion[c].iter().sum();
            if total == 0 {
                0.0
            } else {
                confusion[c][c] as f64 / total as f64
            }
        })
        .collect();
    Ok(EvalMetrics {
        accuracy: correct as f64 / y_true.len() as f64,
        per_class,
        confusion,
        labels: labels.to_vec(),
        n: y_true.len(),
    })
}

/// Mean and sample standard deviation (n−1 denominator; 0 when n < 2).
pub fn mean_std(values: &[f64]) -> (f64, f64) {
    let n = values.len();
    if n == 0 {
        return (0.0, 0.0);
    }
    let mean = values.iter().sum::<f64>() / n as f64;
    if n < 2 {
        return (mean, 0.0);
    }
    let var = values.iter().map(|v| (v - mean) * (v - mean)).sum::<f64>() / (n - 1) as f64;
    (mean, var.sqrt())
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn constant_predictor_on_balanced_four_classes() {
        let labels = [0i64, 1, 2, 3];
        let y_true: Vec<i64> = (0..40).map(|i| i % 4).collect();
        let y_pred = vec![2i64; 40];
        let m = evaluate(&labels, &y_true, &y_pred).unwrap();
        assert!((m.accuracy - 0.25).abs() < 1e-15);
        assert_eq!(m.per_class, vec![0.0, 0.0, 1.0, 0.0]);
    }

    #[test]
    fn perfect_predictor_is_diagonal() {
        let labels = [5i64, 9];
        let y_true = [5i64, 9, 5, 9, 9];
        let m = evaluate(&labels, &y_true, &y_true).unwrap();
        assert_eq!(m.accuracy, 1.0);
        assert_eq!(m.confusion, vec![vec![2, 0], vec![0, 3]]);
    }

    #[test]
    fn fold_mean_and_sample_std() {
        let (mean, std) = mean_std(&[0.9, 1.0]);
        assert!((mean - 0.95).abs() < 1e-15);
        assert!((std - 0.07071067811865475).abs() < 1e-12);
    }

    #[test]
    fn empty_split_rejected() {
        assert!(matches!(evaluate(&[0], &[], &[]), Err(Error::EmptySplit)));
    }
}
