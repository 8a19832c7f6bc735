//! Stratified splitting, k-fold partitioning and confusion-matrix metrics.
//!
//! Splits are stable under row reordering: within each class, rows are first
//! put in a canonical order (speaker, then sample id) and only then shuffled
//! with a stream derived from the seed and the class index.

use rand::seq::SliceRandom;
use thiserror::Error;

use crate::features::Dataset;
use crate::rng::{self, tag};

pub const DEFAULT_SPLIT_SEED: u64 = 42;
pub const DEFAULT_TEST_FRACTION: f64 = 0.2;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum EvalError {
    #[error("class {class} has {rows} rows but at least {needed} are required")]
    ClassTooSmall { class: usize, rows: usize, needed: usize },
    #[error("test fraction {0} must lie strictly between 0 and 1")]
    InvalidFraction(f64),
    #[error("k must be at least 2, got {0}")]
    InvalidK(usize),
    #[error("{truth} true labels but {predicted} predictions")]
    LengthMismatch { truth: usize, predicted: usize },
    #[error("label {label} is outside the {classes} known classes")]
    LabelOutOfRange { label: usize, classes: usize },
    #[error("confusion matrix is empty")]
    EmptyMatrix,
}

/// Disjoint row-index sets, each sorted ascending.
#[derive(Debug, Clone, PartialEq, Eq, serde::Serialize, serde::Deserialize)]
pub struct SplitResult {
    pub train_indices: Vec<usize>,
    pub test_indices: Vec<usize>,
}

/// Rows of each class, in canonical key order. Classes without rows are
/// omitted.
fn class_groups<K: Ord>(labels: &[usize], keys: &[K]) -> Vec<(usize, Vec<usize>)> {
    let n_classes = labels.iter().max().map_or(0, |m| m + 1);
    (0..n_classes)
        .filter_map(|c| {
            let mut rows: Vec<usize> = (0..labels.len()).filter(|&i| labels[i] == c).collect();
            rows.sort_by(|&a, &b| keys[a].cmp(&keys[b]).then(a.cmp(&b)));
            (!rows.is_empty()).then_some((c, rows))
        })
        .collect()
}

/// Test rows per class: `round(fraction·n)` with halves rounded up, at least
/// one and at most `n − 1`.
pub fn test_count(n: usize, fraction: f64) -> usize {
    ((fraction * n as f64 + 0.5).floor() as usize).clamp(1, n.saturating_sub(1).max(1))
}

/// Stratified split over `labels`, with `keys` giving the canonical order
/// inside each class.
pub fn stratified_split_by<K: Ord>(labels: &[usize], keys: &[K], test_fraction: f64, seed: u64) -> Result<SplitResult, EvalError> {
    assert_eq!(labels.len(), keys.len(), "one key per label");
    if !(test_fraction > 0.0 && test_fraction < 1.0) {
        return Err(EvalError::InvalidFraction(test_fraction));
    }
    let mut train = Vec::new();
    let mut test = Vec::new();
    for (class, mut rows) in class_groups(labels, keys) {
        if rows.len() < 2 {
            return Err(EvalError::ClassTooSmall {
                class,
                rows: rows.len(),
                needed: 2,
            });
        }
        rows.shuffle(&mut rng::stream(seed, &[tag::SPLIT, class as u64]));
        let n_test = test_count(rows.len(), test_fraction);
        test.extend_from_slice(&rows[..n_test]);
        train.extend_from_slice(&rows[n_test..]);
    }
    train.sort_unstable();
    test.sort_unstable();
    Ok(SplitResult {
        train_indices: train,
        test_indices: test,
    })
}

fn canonical_keys(d: &Dataset) -> Vec<(&str, &str)> {
    d.rows()
        .iter()
        .map(|r| (r.meta.speaker_id.as_str(), r.meta.sample_id.as_str()))
        .collect()
}

pub fn stratified_split(d: &Dataset, test_fraction: f64, seed: u64) -> Result<SplitResult, EvalError> {
    stratified_split_by(&d.labels(), &canonical_keys(d), test_fraction, seed)
}

/// `k` disjoint folds covering every row. Within each class the shuffled
/// rows are dealt round-robin, continuing from where the previous class
/// stopped, so per-class and overall fold sizes both differ by at most one.
pub fn stratified_k_fold_by<K: Ord>(labels: &[usize], keys: &[K], k: usize, seed: u64) -> Result<Vec<Vec<usize>>, EvalError> {
    assert_eq!(labels.len(), keys.len(), "one key per label");
    if k < 2 {
        return Err(EvalError::InvalidK(k));
    }
    let mut folds = vec![Vec::new(); k];
    let mut offset = 0;
    for (class, mut rows) in class_groups(labels, keys) {
        if rows.len() < k {
            return Err(EvalError::ClassTooSmall {
                class,
                rows: rows.len(),
                needed: k,
            });
        }
        rows.shuffle(&mut rng::stream(seed, &[tag::FOLD, class as u64]));
        for (i, row) in rows.iter().enumerate() {
            folds[(offset + i) % k].push(*row);
        }
        offset += rows.len();
    }
    for f in &mut folds {
        f.sort_unstable();
    }
    Ok(folds)
}

pub fn stratified_k_fold(d: &Dataset, k: usize, seed: u64) -> Result<Vec<Vec<usize>>, EvalError> {
    stratified_k_fold_by(&d.labels(), &canonical_keys(d), k, seed)
}

/// `counts[i][j]` = rows of true class `i` predicted as class `j`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ConfusionMatrix {
    pub counts: Vec<Vec<u64>>,
    pub class_names: Vec<String>,
}

impl ConfusionMatrix {
    pub fn total(&self) -> u64 {
        self.counts.iter().flatten().sum()
    }

    pub fn trace(&self) -> u64 {
        (0..self.counts.len()).map(|i| self.counts[i][i]).sum()
    }
}

pub fn confusion_matrix(truth: &[usize], predicted: &[usize], class_names: &[String]) -> Result<ConfusionMatrix, EvalError> {
    if truth.len() != predicted.len() {
        return Err(EvalError::LengthMismatch {
            truth: truth.len(),
            predicted: predicted.len(),
        });
    }
    let n = class_names.len();
    let mut counts = vec![vec![0u64; n]; n];
    for (&t, &p) in truth.iter().zip(predicted) {
        for label in [t, p] {
            if label >= n {
                return Err(EvalError::LabelOutOfRange { label, classes: n });
            }
        }
        counts[t][p] += 1;
    }
    Ok(ConfusionMatrix {
        counts,
        class_names: class_names.to_vec(),
    })
}

/// Each non-empty row divided by its sum; empty rows stay zero.
pub fn normalize_rows(c: &ConfusionMatrix) -> Vec<Vec<f64>> {
    c.counts
        .iter()
        .map(|row| {
            let total: u64 = row.iter().sum();
            row.iter()
                .map(|&v| if total == 0 { 0.0 } else { v as f64 / total as f64 })
                .collect()
        })
        .collect()
}

pub fn accuracy(c: &ConfusionMatrix) -> Result<f64, EvalError> {
    match c.total() {
        0 => Err(EvalError::EmptyMatrix),
        total => Ok(c.trace() as f64 / total as f64),
    }
}

/// Accuracy, raw and row-normalized confusion matrices, and per-class recall
/// (the diagonal of the normalized matrix) for one evaluation.
#[derive(Debug, Clone, PartialEq)]
pub struct EvaluationReport {
    pub accuracy: f64,
    pub confusion: ConfusionMatrix,
    pub normalized: Vec<Vec<f64>>,
    pub recall: Vec<f64>,
}

impl EvaluationReport {
    pub fn new(confusion: ConfusionMatrix) -> Result<EvaluationReport, EvalError> {
        let accuracy = accuracy(&confusion)?;
        let normalized = normalize_rows(&confusion);
        let recall = (0..normalized.len()).map(|i| normalized[i][i]).collect();
        Ok(EvaluationReport {
            accuracy,
            confusion,
            normalized,
            recall,
        })
    }

    pub fn from_predictions(truth: &[usize], predicted: &[usize], class_names: &[String]) -> Result<EvaluationReport, EvalError> {
        EvaluationReport::new(confusion_matrix(truth, predicted, class_names)?)
    }

    /// Plain-text tables with fixed six-decimal formatting.
    pub fn render_text(&self) -> String {
        let names = &self.confusion.class_names;
        let width = names.iter().map(String::len).max().unwrap_or(0).max(10);
        let mut out = format!(
            "accuracy: {:.6} ({}/{})\n\nconfusion matrix (rows = true, columns = predicted)\n",
            self.accuracy,
            self.confusion.trace(),
            self.confusion.total()
        );
        let header = |out: &mut String| {
            out.push_str(&format!("{:width$}", ""));
            for n in names {
                out.push_str(&format!("  {n:>width$}"));
            }
            out.push('\n');
        };
        header(&mut out);
        for (name, row) in names.iter().zip(&self.confusion.counts) {
            out.push_str(&format!("{name:width$}"));
            for v in row {
                out.push_str(&format!("  {v:>width$}"));
            }
            out.push('\n');
        }
        out.push_str("\nrow-normalized confusion matrix\n");
        header(&mut out);
        for (name, row) in names.iter().zip(&self.normalized) {
            out.push_str(&format!("{name:width$}"));
            for v in row {
                out.push_str(&format!("  {v:>width$.6}"));
            }
            out.push('\n');
        }
        out.push_str("\nper-class recall\n");
        for (name, r) in names.iter().zip(&self.recall) {
            out.push_str(&format!("{name:width$}  {r:.6}\n"));
        }
        out
    }

    /// `true_class,pred_<class>...` with one row per true class; counts, or
    /// row-normalized values with six decimals.
    pub fn to_csv(&self, normalized: bool) -> String {
        let names = &self.confusion.class_names;
        let mut out = String::from("true_class");
        for n in names {
            out.push_str(&format!(",pred_{n}"));
        }
        out.push('\n');
        for (i, name) in names.iter().enumerate() {
            out.push_str(name);
            for j in 0..names.len() {
                if normalized {
                    out.push_str(&format!(",{:.6}", self.normalized[i][j]));
                } else {
                    out.push_str(&format!(",{}", self.confusion.counts[i][j]));
                }
            }
            out.push('\n');
        }
        out
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn names() -> Vec<String> {
        crate::labels::Dialect::class_names()
    }

    fn class_sizes(sizes: &[usize]) -> (Vec<usize>, Vec<usize>) {
        let labels: Vec<usize> = sizes.iter().enumerate().flat_map(|(c, &n)| std::iter::repeat_n(c, n)).collect();
        let keys = (0..labels.len()).collect();
        (labels, keys)
    }

    #[test]
    fn table_sizes_give_twenty_percent() {
        let (labels, keys) = class_sizes(&[320, 370, 390]);
        let s = stratified_split_by(&labels, &keys, 0.2, 42).unwrap();
        let per_class = |c| s.test_indices.iter().filter(|&&i| labels[i] == c).count();
        assert_eq!([per_class(0), per_class(1), per_class(2)], [64, 74, 78]);
        assert_eq!(s.train_indices.len() + s.test_indices.len(), 1080);
    }

    #[test]
    fn rounding_rules() {
        assert_eq!(test_count(2, 0.5), 1);
        assert_eq!(test_count(5, 0.1), 1);
        assert_eq!(test_count(10, 0.25), 3);
        assert_eq!(test_count(2, 0.9), 1);
        let s = stratified_split_by(&[0, 0], &[0, 1], 0.5, 1).unwrap();
        assert_eq!((s.train_indices.len(), s.test_indices.len()), (1, 1));
    }

    #[test]
    fn split_errors() {
        assert!(matches!(
            stratified_split_by(&[0, 1, 1], &[0, 1, 2], 0.2, 1),
            Err(EvalError::ClassTooSmall { class: 0, .. })
        ));
        assert!(matches!(
            stratified_split_by(&[0, 0], &[0, 1], 1.0, 1),
            Err(EvalError::InvalidFraction(_))
        ));
        assert!(matches!(
            stratified_k_fold_by(&[0, 0, 1, 1], &[0, 1, 2, 3], 3, 1),
            Err(EvalError::ClassTooSmall { .. })
        ));
        assert!(matches!(stratified_k_fold_by(&[0, 0], &[0, 1], 1, 1), Err(EvalError::InvalidK(1))));
    }

    #[test]
    fn nine_rows_three_folds() {
        let (labels, keys) = class_sizes(&[3, 3, 3]);
        let folds = stratified_k_fold_by(&labels, &keys, 3, 5).unwrap();
        for f in &folds {
            let mut classes: Vec<usize> = f.iter().map(|&i| labels[i]).collect();
            classes.sort();
            assert_eq!(classes, [0, 1, 2]);
        }
        assert_eq!(folds, stratified_k_fold_by(&labels, &keys, 3, 5).unwrap());
    }

    #[test]
    fn confusion_examples() {
        let c = confusion_matrix(&[0, 1, 2], &[1, 1, 2], &names()).unwrap();
        assert_eq!(c.counts, vec![vec![0, 1, 0], vec![0, 1, 0], vec![0, 0, 1]]);
        let c = ConfusionMatrix {
            counts: vec![vec![1, 1, 0], vec![0, 1, 1], vec![1, 0, 1]],
            class_names: names(),
        };
        assert_eq!(accuracy(&c).unwrap(), 0.5);
        let c = ConfusionMatrix {
            counts: vec![vec![10, 5, 5], vec![0, 0, 0], vec![0, 0, 4]],
            class_names: names(),
        };
        assert_eq!(normalize_rows(&c), vec![vec![0.5, 0.25, 0.25], vec![0.0; 3], vec![0.0, 0.0, 1.0]]);
        assert!(matches!(
            confusion_matrix(&[0], &[0, 1], &names()),
            Err(EvalError::LengthMismatch { .. })
        ));
        assert!(matches!(
            confusion_matrix(&[3], &[0], &names()),
            Err(EvalError::LabelOutOfRange { .. })
        ));
        let empty = confusion_matrix(&[], &[], &names()).unwrap();
        assert!(matches!(accuracy(&empty), Err(EvalError::EmptyMatrix)));
    }

    #[test]
    fn perfect_predictions_give_identity() {
        let y = [0, 0, 1, 2, 2, 2];
        let r = EvaluationReport::from_predictions(&y, &y, &names()).unwrap();
        assert_eq!(r.accuracy, 1.0);
        assert_eq!(r.normalized, vec![vec![1.0, 0.0, 0.0], vec![0.0, 1.0, 0.0], vec![0.0, 0.0, 1.0]]);
        let csv = r.to_csv(false);
        assert!(csv.starts_with("true_class,pred_Imphal,pred_Kakching,pred_Sekmai\nImphal,2,0,0\n"));
        assert!(r.to_csv(true).contains("Sekmai,0.000000,0.000000,1.000000"));
        assert!(r.render_text().starts_with("accuracy: 1.000000 (6/6)"));
    }

    fn labelled() -> impl Strategy<Value = (Vec<usize>, Vec<u32>)> {
        prop::collection::vec((0usize..3, any::<u32>()), 0..120).prop_map(|v| v.into_iter().unzip())
    }

    proptest! {
        #[test]
        fn split_partitions_and_rounds((labels, keys) in labelled(), seed in any::<u64>()) {
            let res = stratified_split_by(&labels, &keys, 0.2, seed);
            let small = (0..3).any(|c| { let n = labels.iter().filter(|&&l| l == c).count(); n == 1 });
            if small {
                prop_assert!(res.is_err());
                return Ok(());
            }
            let s = res.unwrap();
            let mut all: Vec<usize> = s.train_indices.iter().chain(&s.test_indices).copied().collect();
            all.sort();
            prop_assert_eq!(all, (0..labels.len()).collect::<Vec<_>>());
            for c in 0..3 {
                let n = labels.iter().filter(|&&l| l == c).count();
                let t = s.test_indices.iter().filter(|&&i| labels[i] == c).count();
                if n > 0 {
                    prop_assert!((t as f64 - 0.2 * n as f64).abs() <= 1.0);
                    prop_assert!(t >= 1);
                }
            }
            prop_assert_eq!(&s, &stratified_split_by(&labels, &keys, 0.2, seed).unwrap());
        }

        #[test]
        fn split_is_stable_under_reordering((labels, keys) in labelled(), seed in any::<u64>(), rot in 0usize..50) {
            prop_assume!((0..3).all(|c| labels.iter().filter(|&&l| l == c).count() != 1));
            prop_assume!(!labels.is_empty());
            let mut dedup = keys.clone();
            dedup.sort();
            dedup.dedup();
            prop_assume!(dedup.len() == keys.len());
            let n = labels.len();
            let r = rot % n;
            let perm: Vec<usize> = (0..n).map(|i| (i + r) % n).collect();
            let labels2: Vec<usize> = perm.iter().map(|&i| labels[i]).collect();
            let keys2: Vec<u32> = perm.iter().map(|&i| keys[i]).collect();
            let a = stratified_split_by(&labels, &keys, 0.2, seed).unwrap();
            let b = stratified_split_by(&labels2, &keys2, 0.2, seed).unwrap();
            let mut ta: Vec<u32> = a.test_indices.iter().map(|&i| keys[i]).collect();
            let mut tb: Vec<u32> = b.test_indices.iter().map(|&i| keys2[i]).collect();
            ta.sort();
            tb.sort();
            prop_assert_eq!(ta, tb);
        }

        #[test]
        fn folds_partition_and_balance((labels, keys) in labelled(), seed in any::<u64>(), k in 2usize..6) {
            let res = stratified_k_fold_by(&labels, &keys, k, seed);
            let too_small = (0..3).any(|c| { let n = labels.iter().filter(|&&l| l == c).count(); n > 0 && n < k });
            if too_small {
                prop_assert!(res.is_err());
                return Ok(());
            }
            let folds = res.unwrap();
            prop_assert_eq!(folds.len(), k);
            let mut all: Vec<usize> = folds.iter().flatten().copied().collect();
            all.sort();
            prop_assert_eq!(all, (0..labels.len()).collect::<Vec<_>>());
            for c in 0..3 {
                let sizes: Vec<usize> = folds.iter().map(|f| f.iter().filter(|&&i| labels[i] == c).count()).collect();
                prop_assert!(sizes.iter().max().unwrap() - sizes.iter().min().unwrap() <= 1);
            }
        }

        #[test]
        fn accuracy_matches_pair_fraction(pairs in prop::collection::vec((0usize..3, 0usize..3), 1..80)) {
            let (t, p): (Vec<usize>, Vec<usize>) = pairs.iter().copied().unzip();
            let c = confusion_matrix(&t, &p, &names()).unwrap();
            let direct = pairs.iter().filter(|(a, b)| a == b).count() as f64 / pairs.len() as f64;
            prop_assert_eq!(accuracy(&c).unwrap(), direct);
            prop_assert_eq!(accuracy(&confusion_matrix(&t, &t, &names()).unwrap()).unwrap(), 1.0);
            for row in normalize_rows(&c) {
                let s: f64 = row.iter().sum();
                prop_assert!(s == 0.0 || (s - 1.0).abs() <= 1e-9);
            }
        }
    }
}
