//! k-nearest-neighbor classification under the kernel-induced distance, and
//! stratified cross-validation over a Gram matrix.

use std::collections::BTreeMap;

use rand::seq::SliceRandom;
use serde::Serialize;
use thiserror::Error;

use crate::kernel::GramMatrix;
use crate::rng::{stream_rng, Stream};

pub const DEFAULT_FOLDS: usize = 10;
pub const DEFAULT_NEIGHBORS: usize = 1;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum ClassifyError {
    #[error("index {index} out of range for {size} graphs")]
    IndexOutOfRange { index: usize, size: usize },
    #[error("training set is empty")]
    EmptyTrainingSet,
    #[error("k must be at least 1")]
    ZeroNeighbors,
    #[error("k = {k} exceeds the {train} training graphs")]
    TooManyNeighbors { k: usize, train: usize },
    #[error("index {0} is in both the training and test sets")]
    OverlappingSplit(usize),
    #[error("{labels} labels for {size} graphs")]
    LabelCountMismatch { labels: usize, size: usize },
    #[error("need at least 2 folds, got {0}")]
    TooFewFolds(usize),
    #[error("{folds} folds for only {size} graphs")]
    TooManyFolds { folds: usize, size: usize },
    #[error("cannot stratify: {0}")]
    Stratification(String),
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct CvReport {
    pub folds: usize,
    #[serde(rename = "k")]
    pub k_neighbors: usize,
    pub seed: u64,
    pub per_fold_accuracy: Vec<f64>,
    pub mean_accuracy: f64,
}

/// `sqrt(max(0, K_ii + K_jj - 2 K_ij))`.
pub fn kernel_distance(gm: &GramMatrix, i: usize, j: usize) -> Result<f64, ClassifyError> {
    let size = gm.size();
    for index in [i, j] {
        if index >= size {
            return Err(ClassifyError::IndexOutOfRange { index, size });
        }
    }
    Ok((gm.get(i, i) + gm.get(j, j) - 2.0 * gm.get(i, j)).max(0.0).sqrt())
}

/// Majority label among the `k` nearest training graphs of each test graph.
///
/// Neighbors at equal distance are taken in training-list order. Label ties
/// go to the smaller summed distance, then to the smaller label.
pub fn knn_predict(
    gm: &GramMatrix,
    labels: &[i64],
    train: &[usize],
    test: &[usize],
    k: usize,
) -> Result<Vec<i64>, ClassifyError> {
    if labels.len() != gm.size() {
        return Err(ClassifyError::LabelCountMismatch { labels: labels.len(), size: gm.size() });
    }
    if train.is_empty() {
        return Err(ClassifyError::EmptyTrainingSet);
    }
    if k == 0 {
        return Err(ClassifyError::ZeroNeighbors);
    }
    if k > train.len() {
        return Err(ClassifyError::TooManyNeighbors { k, train: train.len() });
    }
    let mut in_train = vec![false; gm.size()];
    for &i in train {
        if i >= gm.size() {
            return Err(ClassifyError::IndexOutOfRange { index: i, size: gm.size() });
        }
        in_train[i] = true;
    }
    if let Some(&dup) = test.iter().find(|&&t| t < gm.size() && in_train[t]) {
        return Err(ClassifyError::OverlappingSplit(dup));
    }

    let mut out = Vec::with_capacity(test.len());
    let mut neighbors: Vec<(f64, usize)> = Vec::with_capacity(train.len());
    for &t in test {
        neighbors.clear();
        for (pos, &i) in train.iter().enumerate() {
            neighbors.push((kernel_distance(gm, t, i)?, pos));
        }
        neighbors.sort_by(|a, b| a.0.total_cmp(&b.0).then(a.1.cmp(&b.1)));
        let mut votes: BTreeMap<i64, (usize, f64)> = BTreeMap::new();
        for &(d, pos) in &neighbors[..k] {
            let entry = votes.entry(labels[train[pos]]).or_insert((0, 0.0));
            entry.0 += 1;
            entry.1 += d;
        }
        // BTreeMap iteration is label-ascending, so the first maximum wins ties.
        let (best, _) = votes
            .iter()
            .fold(None::<(i64, (usize, f64))>, |acc, (&label, &(count, dist))| match acc {
                Some((_, (bc, bd))) if bc > count || (bc == count && bd <= dist) => acc,
                _ => Some((label, (count, dist))),
            })
            .expect("k >= 1 neighbors");
        out.push(best);
    }
    Ok(out)
}

/// Fold index of every graph. Each class is shuffled, then classes are dealt
/// round-robin into folds in label order, so every fold gets a near-equal
/// share of every class.
pub fn stratified_folds(labels: &[i64], folds: usize, seed: u64) -> Result<Vec<usize>, ClassifyError> {
    if folds < 2 {
        return Err(ClassifyError::TooFewFolds(folds));
    }
    if folds > labels.len() {
        return Err(ClassifyError::TooManyFolds { folds, size: labels.len() });
    }
    let mut classes: BTreeMap<i64, Vec<usize>> = BTreeMap::new();
    for (i, &l) in labels.iter().enumerate() {
        classes.entry(l).or_default().push(i);
    }
    if classes.len() < 2 {
        return Err(ClassifyError::Stratification(format!(
            "found {} class(es), need at least 2",
            classes.len()
        )));
    }
    if let Some((label, members)) = classes.iter().find(|(_, m)| m.len() < 2) {
        return Err(ClassifyError::Stratification(format!(
            "class {label} has {} member(s), need at least 2",
            members.len()
        )));
    }
    let mut rng = stream_rng(seed, Stream::CrossValidation);
    let mut assignment = vec![0; labels.len()];
    let mut next = 0;
    for members in classes.values_mut() {
        members.shuffle(&mut rng);
        for &i in members.iter() {
            assignment[i] = next % folds;
            next += 1;
        }
    }
    Ok(assignment)
}

/// Stratified `folds`-fold cross-validation of the k-NN classifier.
pub fn cross_validate(gm: &GramMatrix, labels: &[i64], folds: usize, k: usize, seed: u64) -> Result<CvReport, ClassifyError> {
    if labels.len() != gm.size() {
        return Err(ClassifyError::LabelCountMismatch { labels: labels.len(), size: gm.size() });
    }
    let assignment = stratified_folds(labels, folds, seed)?;
    let mut per_fold_accuracy = Vec::with_capacity(folds);
    for fold in 0..folds {
        let (test, train): (Vec<usize>, Vec<usize>) = (0..labels.len()).partition(|&i| assignment[i] == fold);
        let predicted = knn_predict(gm, labels, &train, &test, k)?;
        let correct = predicted.iter().zip(&test).filter(|(p, &t)| **p == labels[t]).count();
        per_fold_accuracy.push(correct as f64 / test.len() as f64);
    }
    let mean_accuracy = per_fold_accuracy.iter().sum::<f64>() / folds as f64;
    Ok(CvReport { folds, k_neighbors: k, seed, per_fold_accuracy, mean_accuracy })
}

/// Share of the most frequent label.
pub fn majority_baseline(labels: &[i64]) -> f64 {
    let mut counts: BTreeMap<i64, usize> = BTreeMap::new();
    for &l in labels {
        *counts.entry(l).or_default() += 1;
    }
    counts.values().copied().max().unwrap_or(0) as f64 / labels.len().max(1) as f64
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::kernel::FeatureDescriptor;

    const DESC: FeatureDescriptor = FeatureDescriptor { dims: 1, bins: 1, alpha: None };

    fn gram_from_points(points: &[f64]) -> GramMatrix {
        let n = points.len();
        let mut v = vec![0.0; n * n];
        for i in 0..n {
            for j in 0..n {
                let d = points[i] - points[j];
                v[i * n + j] = (-d * d / 2.0).exp();
            }
        }
        GramMatrix::from_values(n, v, 1.0, DESC)
    }

    #[test]
    fn distances() {
        let e = (-1.0f64).exp();
        let gm = GramMatrix::from_values(2, vec![1.0, e, e, 1.0], 1.0, DESC);
        assert_eq!(kernel_distance(&gm, 1, 1).unwrap(), 0.0);
        assert!((kernel_distance(&gm, 0, 1).unwrap() - (2.0 - 2.0 * e).sqrt()).abs() < 1e-15);
        assert!((kernel_distance(&gm, 0, 1).unwrap() - 1.124385).abs() < 1e-6);
        let same = GramMatrix::from_values(2, vec![1.0; 4], 1.0, DESC);
        assert_eq!(kernel_distance(&same, 0, 1).unwrap(), 0.0);
        assert!(kernel_distance(&gm, 0, 2).is_err());
    }

    #[test]
    fn twin_wins_at_k1() {
        let gm = gram_from_points(&[0.0, 5.0, 0.0]);
        assert_eq!(knn_predict(&gm, &[7, 3, 9], &[0, 1], &[2], 1).unwrap(), vec![7]);
    }

    #[test]
    fn unanimous_training_labels() {
        let gm = gram_from_points(&[0.0, 1.0, 2.0, 3.0, 10.0]);
        for k in 1..=4 {
            assert_eq!(knn_predict(&gm, &[4, 4, 4, 4, 0], &[0, 1, 2, 3], &[4], k).unwrap(), vec![4]);
        }
    }

    #[test]
    fn tie_breaks() {
        // Test point at 0; one neighbor of each label at distances 1 and 2.
        let gm = gram_from_points(&[0.0, 2.0, -1.0]);
        assert_eq!(knn_predict(&gm, &[0, 1, 2], &[1, 2], &[0], 2).unwrap(), vec![2]);
        // Equal distances: smaller label wins.
        let gm = gram_from_points(&[0.0, 1.0, -1.0]);
        assert_eq!(knn_predict(&gm, &[0, 5, 2], &[1, 2], &[0], 2).unwrap(), vec![2]);
    }

    #[test]
    fn predict_errors() {
        let gm = gram_from_points(&[0.0, 1.0]);
        assert_eq!(knn_predict(&gm, &[0, 1], &[], &[1], 1), Err(ClassifyError::EmptyTrainingSet));
        assert_eq!(knn_predict(&gm, &[0, 1], &[0], &[1], 0), Err(ClassifyError::ZeroNeighbors));
        assert!(knn_predict(&gm, &[0, 1], &[0], &[1], 2).is_err());
        assert_eq!(knn_predict(&gm, &[0, 1], &[0], &[0], 1), Err(ClassifyError::OverlappingSplit(0)));
    }

    #[test]
    fn separable_clusters() {
        let points: Vec<f64> = (0..20).map(|i| if i % 2 == 0 { i as f64 * 0.01 } else { 50.0 + i as f64 * 0.01 }).collect();
        let labels: Vec<i64> = (0..20).map(|i| i % 2).collect();
        let report = cross_validate(&gram_from_points(&points), &labels, 5, 1, 3).unwrap();
        assert_eq!(report.mean_accuracy, 1.0);
        assert_eq!(report.per_fold_accuracy.len(), 5);
    }

    #[test]
    fn leave_one_out() {
        let labels = [0, 0, 0, 1, 1, 1];
        let folds = stratified_folds(&labels, 6, 1).unwrap();
        let mut sorted = folds.clone();
        sorted.sort();
        assert_eq!(sorted, vec![0, 1, 2, 3, 4, 5]);
        let report = cross_validate(&gram_from_points(&[0.0, 0.1, 0.2, 9.0, 9.1, 9.2]), &labels, 6, 1, 1).unwrap();
        assert_eq!(report.per_fold_accuracy.len(), 6);
        assert_eq!(report.mean_accuracy, 1.0);
    }

    #[test]
    fn stratification_guards() {
        assert!(matches!(stratified_folds(&[1, 1, 1, 1], 2, 0), Err(ClassifyError::Stratification(_))));
        assert!(matches!(stratified_folds(&[1, 1, 1, 2], 2, 0), Err(ClassifyError::Stratification(_))));
        assert_eq!(stratified_folds(&[0, 1], 3, 0), Err(ClassifyError::TooManyFolds { folds: 3, size: 2 }));
        assert_eq!(stratified_folds(&[0, 1], 1, 0), Err(ClassifyError::TooFewFolds(1)));
    }

    #[test]
    fn folds_are_balanced_per_class() {
        let labels: Vec<i64> = (0..40).map(|i| (i >= 20) as i64).collect();
        let folds = stratified_folds(&labels, 10, 5).unwrap();
        for f in 0..10 {
            let members: Vec<_> = (0..40).filter(|&i| folds[i] == f).collect();
            assert_eq!(members.len(), 4);
            assert_eq!(members.iter().filter(|&&i| labels[i] == 1).count(), 2);
        }
    }

    #[test]
    fn baseline() {
        assert_eq!(majority_baseline(&[1, 1, 0, 2]), 0.5);
    }
}
