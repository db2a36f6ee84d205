//! Stratified k-fold assignment with seeded shuffling.

use crate::error::{Error, Result};
use rand::SeedableRng;
use rand::seq::SliceRandom;
use rand_chacha::ChaCha8Rng;

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct FoldPlan {
    pub k: usize,
    /// Fold index per sample.
    pub assignments: Vec<usize>,
    pub seed: u64,
}

impl FoldPlan {
    /// (train indices, test indices) for fold `fold`.
    pub fn split(&self, fold: usize) -> (Vec<usize>, Vec<usize>) {
        assert!(fold < self.k);
        let mut train = Vec::new();
        let mut test = Vec::new();
        for (i, &f) in self.assignments.iter().enumerate() {
            if f == fold {
                test.push(i);
            } else {
                train.push(i);
            }
        }
        (train, test)
    }
}

/// Deals each class's shuffled samples round-robin across `k` folds, so
/// per-class counts differ by at most one.
pub fn stratified_kfold(y: &[usize], k: usize, seed: u64) -> Result<FoldPlan> {
    if k < 2 {
        return Err(Error::InvalidConfig {
            reason: format!("fold count must be at least 2, got {k}"),
        });
    }
    let classes = y.iter().copied().max().map_or(0, |m| m + 1);
    let mut by_class: Vec<Vec<usize>> = vec![Vec::new(); classes];
    for (i, &label) in y.iter().enumerate() {
        by_class[label].push(i);
    }
    for (label, members) in by_class.iter().enumerate() {
        if !members.is_empty() && members.len() < k {
            return Err(Error::ClassTooSmall {
                label,
                count: members.len(),
                folds: k,
            });
        }
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut assignments = vec![0usize; y.len()];
    for members in by_class.iter_mut() {
        members.shuffle(&mut rng);
        for (pos, &i) in members.iter().enumerate() {
            assignments[i] = pos % k;
        }
    }
    Ok(FoldPlan {
        k,
        assignments,
        seed,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn labels(per_class: usize, classes: usize) -> Vec<usize> {
        (0..classes * per_class).map(|i| i % classes).collect()
    }

    #[test]
    fn exact_division_balances_perfectly() {
        let y = labels(10, 3);
        let plan = stratified_kfold(&y, 5, 42).unwrap();
        for fold in 0..5 {
            for class in 0..3 {
                let count = y
                    .iter()
                    .zip(&plan.assignments)
                    .filter(|&(&l, &f)| l == class && f == fold)
                    .count();
                assert_eq!(count, 2);
            }
        }
    }

    #[test]
    fn per_class_counts_within_one() {
        let y = labels(13, 4);
        let plan = stratified_kfold(&y, 5, 9).unwrap();
        for class in 0..4 {
            let mut counts = [0usize; 5];
            for (&l, &f) in y.iter().zip(&plan.assignments) {
                if l == class {
                    counts[f] += 1;
                }
            }
            let min = counts.iter().min().unwrap();
            let max = counts.iter().max().unwrap();
            assert!(max - min <= 1);
        }
    }

    #[test]
    fn deterministic_for_a_seed() {
        let y = labels(20, 4);
        let a = stratified_kfold(&y, 10, 7).unwrap();
        let b = stratified_kfold(&y, 10, 7).unwrap();
        assert_eq!(a, b);
        let c = stratified_kfold(&y, 10, 8).unwrap();
        assert_ne!(a.assignments, c.assignments);
    }

    #[test]
    fn small_class_rejected() {
        let mut y = labels(10, 2);
        y.extend([2usize; 3]);
        assert!(matches!(
            stratified_kfold(&y, 5, 0),
            Err(Error::ClassTooSmall {
                label: 2,
                count: 3,
                folds: 5
            })
        ));
    }

    #[test]
    fn every_fold_non_empty() {
        let y = labels(10, 3);
        let plan = stratified_kfold(&y, 10, 3).unwrap();
        for fold in 0..10 {
            let (train, test) = plan.split(fold);
            assert!(!test.is_empty());
            assert_eq!(train.len() + test.len(), y.len());
        }
    }
}
