// SPDX-License-Identifier: Apache-2.0

//! ROC AUC via the midrank Mann–Whitney statistic and stratified k-fold
//! cross-validation.

use rand::seq::SliceRandom;
use serde::{Deserialize, Serialize};

use crate::error::{invalid, Result};
use crate::util::rng_from_seed;

/// Probability that a random positive outscores a random negative, ties
/// counting one half. Labels are 0 or 1.
pub fn auc(scores: &[f64], labels: &[u8]) -> Result<f64> {
    if scores.len() != labels.len() {
        return Err(invalid("scores and labels differ in length"));
    }
    if scores.iter().any(|s| s.is_nan()) {
        return Err(invalid("NaN score"));
    }
    let n_pos = labels.iter().filter(|&&y| y == 1).count();
    let n_neg = labels.iter().filter(|&&y| y == 0).count();
    if n_pos + n_neg != labels.len() {
        return Err(invalid("labels must be 0 or 1"));
    }
    if n_pos == 0 || n_neg == 0 {
        return Err(invalid("AUC needs both classes"));
    }
    let mut order: Vec<usize> = (0..scores.len()).collect();
    order.sort_by(|&a, &b| scores[a].total_cmp(&scores[b]));
    // rank sum of positives with midranks for tied blocks (ranks are 1-based)
    let mut pos_rank_sum = 0.0;
    let mut start = 0;
    while start < order.len() {
        let mut end = start + 1;
        while end < order.len() && scores[order[end]] == scores[order[start]] {
            end += 1;
        }
        let midrank = (start + 1 + end) as f64 / 2.0;
        let pos_in_block = order[start..end].iter().filter(|&&i| labels[i] == 1).count();
        pos_rank_sum += midrank * pos_in_block as f64;
        start = end;
    }
    let u = pos_rank_sum - (n_pos * (n_pos + 1)) as f64 / 2.0;
    Ok(u / (n_pos as f64 * n_neg as f64))
}

/// Assigns each example to one of `k` folds so every fold receives a share
/// of each class. Within a class, examples are shuffled by `seed` and dealt
/// round-robin.
pub fn stratified_folds(labels: &[u8], k: usize, seed: u64) -> Result<Vec<usize>> {
    if k < 2 {
        return Err(invalid("need at least 2 folds"));
    }
    let mut fold = vec![0; labels.len()];
    let mut rng = rng_from_seed(seed);
    for class in [0u8, 1u8] {
        let mut members: Vec<usize> = (0..labels.len()).filter(|&i| labels[i] == class).collect();
        if members.len() < k {
            return Err(invalid(format!(
                "class {class} has {} examples, fewer than {k} folds",
                members.len()
            )));
        }
        members.shuffle(&mut rng);
        for (pos, &i) in members.iter().enumerate() {
            fold[i] = pos % k;
        }
    }
    Ok(fold)
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CvResult {
    pub mean_auc: f64,
    pub fold_aucs: Vec<f64>,
}

/// Runs `trainer(train_indices, test_indices)` per fold; it must return one
/// score per test index, in order.
pub fn cross_validate_auc<F>(labels: &[u8], k: usize, seed: u64, mut trainer: F) -> Result<CvResult>
where
    F: FnMut(&[usize], &[usize]) -> Result<Vec<f64>>,
{
    let folds = stratified_folds(labels, k, seed)?;
    let mut fold_aucs = Vec::with_capacity(k);
    for f in 0..k {
        let train: Vec<usize> = (0..labels.len()).filter(|&i| folds[i] != f).collect();
        let test: Vec<usize> = (0..labels.len()).filter(|&i| folds[i] == f).collect();
        let scores = trainer(&train, &test)?;
        if scores.len() != test.len() {
            return Err(invalid("trainer returned the wrong number of scores"));
        }
        let test_labels: Vec<u8> = test.iter().map(|&i| labels[i]).collect();
        fold_aucs.push(auc(&scores, &test_labels)?);
    }
    Ok(CvResult {
        mean_auc: fold_aucs.iter().sum::<f64>() / k as f64,
        fold_aucs,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    #[test]
    fn perfect_and_tied() {
        assert_eq!(auc(&[0.1, 0.2, 0.8, 0.9], &[0, 0, 1, 1]).unwrap(), 1.0);
        assert_eq!(auc(&[0.3; 5], &[0, 1, 0, 1, 1]).unwrap(), 0.5);
        assert_eq!(auc(&[0.9, 0.1], &[0, 1]).unwrap(), 0.0);
        assert!(auc(&[0.1, 0.2], &[1, 1]).is_err());
    }

    #[test]
    fn folds_are_stratified() {
        let labels: Vec<u8> = (0..23).map(|i| (i % 3 == 0) as u8).collect();
        let folds = stratified_folds(&labels, 5, 9).unwrap();
        for f in 0..5 {
            let in_fold: Vec<u8> = (0..23).filter(|&i| folds[i] == f).map(|i| labels[i]).collect();
            assert!(in_fold.contains(&0) && in_fold.contains(&1));
        }
        assert!(stratified_folds(&[0, 0, 0, 1], 2, 0).is_err());
        assert_eq!(stratified_folds(&labels, 5, 9).unwrap(), folds);
    }

    #[test]
    fn cv_with_oracle_trainer() {
        let labels: Vec<u8> = (0..20).map(|i| (i >= 10) as u8).collect();
        let r = cross_validate_auc(&labels, 5, 1, |_, test| Ok(test.iter().map(|&i| i as f64).collect())).unwrap();
        assert_eq!(r.fold_aucs.len(), 5);
        assert_eq!(r.mean_auc, 1.0);
    }

    proptest! {
        #[test]
        fn invariant_under_increasing_transform(
            raw in proptest::collection::vec((0u8..6, 0u8..2), 2..40)
        ) {
            let scores: Vec<f64> = raw.iter().map(|(s, _)| *s as f64).collect();
            let labels: Vec<u8> = raw.iter().map(|(_, y)| *y).collect();
            prop_assume!(labels.contains(&0) && labels.contains(&1));
            let a = auc(&scores, &labels).unwrap();
            let t: Vec<f64> = scores.iter().map(|s| (s * 0.7).exp() + 3.0).collect();
            prop_assert_eq!(a, auc(&t, &labels).unwrap());
        }
    }
}
