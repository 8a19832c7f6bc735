//! Exhaustive grid search over `n_estimators × max_features` with
//! stratified k-fold cross-validation.

use serde::{Deserialize, Serialize};

use super::{train_forest, ForestError, ForestParams};
use crate::eval::{self, EvalError};
use crate::features::Dataset;

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct GridSpec {
    pub n_estimators: Vec<usize>,
    pub max_features: Vec<usize>,
}

impl Default for GridSpec {
    fn default() -> Self {
        GridSpec {
            n_estimators: vec![100, 200, 400],
            max_features: vec![4, 6, 12],
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GridCell {
    pub n_estimators: usize,
    pub max_features: usize,
    pub fold_accuracies: Vec<f64>,
    pub mean_accuracy: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GridSearchResult {
    pub best: ForestParams,
    pub best_index: usize,
    /// One row per cell, `n_estimators` varying slowest.
    pub table: Vec<GridCell>,
}

impl GridSearchResult {
    pub fn to_csv(&self) -> String {
        let k = self.table.first().map_or(0, |c| c.fold_accuracies.len());
        let mut out = String::from("n_estimators,max_features");
        for f in 0..k {
            out.push_str(&format!(",fold_{f}"));
        }
        out.push_str(",mean_accuracy\n");
        for c in &self.table {
            out.push_str(&format!("{},{}", c.n_estimators, c.max_features));
            for a in &c.fold_accuracies {
                out.push_str(&format!(",{a:.6}"));
            }
            out.push_str(&format!(",{:.6}\n", c.mean_accuracy));
        }
        out
    }
}

/// Cross-validates every cell of `grid` with the folds of
/// `eval::stratified_k_fold(d, k, seed)`; every other parameter comes from
/// `base`. The best cell has the highest mean accuracy, ties going to fewer
/// trees and then fewer features.
pub fn grid_search(d: &Dataset, grid: &GridSpec, k: usize, seed: u64, base: &ForestParams) -> Result<GridSearchResult, ForestError> {
    if grid.n_estimators.is_empty() || grid.max_features.is_empty() {
        return Err(ForestError::InvalidParams("grid has no cells".into()));
    }
    let folds = eval::stratified_k_fold(d, k, seed).map_err(|e| match e {
        e @ EvalError::ClassTooSmall { .. } => ForestError::InsufficientClassSamples(e),
        e => ForestError::Eval(e),
    })?;

    let mut table = Vec::new();
    for &n_estimators in &grid.n_estimators {
        for &max_features in &grid.max_features {
            let params = ForestParams {
                n_estimators,
                max_features,
                ..base.clone()
            };
            params.validate()?;
            let mut fold_accuracies = Vec::with_capacity(k);
            for test in &folds {
                let train: Vec<usize> = (0..d.len()).filter(|i| test.binary_search(i).is_err()).collect();
                let model = train_forest(&d.subset(&train), &params)?;
                let test_set = d.subset(test);
                let predicted = model.predict_dataset(&test_set)?;
                let report = eval::EvaluationReport::from_predictions(&test_set.labels(), &predicted, &test_set.class_names())?;
                fold_accuracies.push(report.accuracy);
            }
            let mean_accuracy = fold_accuracies.iter().sum::<f64>() / k as f64;
            table.push(GridCell {
                n_estimators,
                max_features,
                fold_accuracies,
                mean_accuracy,
            });
        }
    }

    let best_index = (0..table.len())
        .min_by(|&a, &b| {
            let (x, y) = (&table[a], &table[b]);
            y.mean_accuracy
                .total_cmp(&x.mean_accuracy)
                .then(x.n_estimators.cmp(&y.n_estimators))
                .then(x.max_features.cmp(&y.max_features))
        })
        .expect("grid has at least one cell");
    let best = ForestParams {
        n_estimators: table[best_index].n_estimators,
        max_features: table[best_index].max_features,
        ..base.clone()
    };
    Ok(GridSearchResult { best, best_index, table })
}
