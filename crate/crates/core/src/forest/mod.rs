//! Random forests of CART trees.
//!
//! Tree `i` draws all of its randomness from `rng::stream(seed, [TREE, i])`:
//! first the `n` bootstrap indices (uniform with replacement), then one
//! feature subset per expanded node in pre-order. Trees are trained in
//! parallel and collected in index order, so a model depends only on the
//! data and the parameters.

mod grid;
mod tree;

use rand::Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::eval::EvalError;
use crate::features::Dataset;
use crate::rng::{self, tag};

pub use grid::{grid_search, GridCell, GridSearchResult, GridSpec};
pub use tree::{argmax, best_split, gini, grow_tree, midpoint, DecisionTree, Split, TrainingData, TreeNode};

/// Version string written to and required from model files.
pub const MODEL_FORMAT_VERSION: &str = "1";

#[derive(Debug, Error)]
pub enum ForestError {
    #[error("gini of an empty node")]
    EmptyNode,
    #[error("no training rows")]
    EmptyData,
    #[error("training data has a single class; at least two are required")]
    DegenerateData,
    #[error("invalid forest parameters: {0}")]
    InvalidParams(String),
    #[error("invalid training data: {0}")]
    InvalidData(String),
    #[error("expected {expected} values, found {found}")]
    DimensionMismatch { expected: usize, found: usize },
    #[error("model format error: {0}")]
    ModelFormat(String),
    #[error("insufficient class samples: {0}")]
    InsufficientClassSamples(EvalError),
    #[error(transparent)]
    Eval(#[from] EvalError),
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ForestParams {
    pub n_estimators: usize,
    /// Features tried per node; clamped to the data width when training.
    pub max_features: usize,
    pub min_samples_split: usize,
    pub max_depth: Option<usize>,
    pub bootstrap: bool,
    pub seed: u64,
}

impl Default for ForestParams {
    fn default() -> Self {
        ForestParams {
            n_estimators: 400,
            max_features: 12,
            min_samples_split: 2,
            max_depth: None,
            bootstrap: true,
            seed: 0,
        }
    }
}

impl ForestParams {
    pub fn validate(&self) -> Result<(), ForestError> {
        if self.n_estimators == 0 {
            return Err(ForestError::InvalidParams("n_estimators must be at least 1".into()));
        }
        if self.max_features == 0 {
            return Err(ForestError::InvalidParams("max_features must be at least 1".into()));
        }
        if self.min_samples_split == 0 {
            return Err(ForestError::InvalidParams("min_samples_split must be at least 1".into()));
        }
        Ok(())
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RandomForestModel {
    pub params: ForestParams,
    pub feature_names: Vec<String>,
    pub class_names: Vec<String>,
    /// Out-of-bag accuracy over rows left out by at least one tree; absent
    /// without bootstrap or when no row was ever left out.
    pub oob_accuracy: Option<f64>,
    pub trees: Vec<DecisionTree>,
}

/// Serialized form; field order fixes the JSON layout.
#[derive(Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct ModelFile {
    format_version: String,
    params: ForestParams,
    feature_names: Vec<String>,
    class_names: Vec<String>,
    oob_accuracy: Option<f64>,
    trees: Vec<DecisionTree>,
}

fn bootstrap_sample<R: Rng + ?Sized>(n: usize, rng: &mut R) -> Vec<usize> {
    (0..n).map(|_| rng.random_range(0..n)).collect()
}

/// Trains on raw training data. `feature_names` must match its width.
pub fn train_forest_on(
    data: &TrainingData,
    feature_names: Vec<String>,
    class_names: Vec<String>,
    params: &ForestParams,
) -> Result<RandomForestModel, ForestError> {
    params.validate()?;
    let n = data.n_samples();
    if n == 0 {
        return Err(ForestError::EmptyData);
    }
    if feature_names.len() != data.n_features() {
        return Err(ForestError::DimensionMismatch {
            expected: data.n_features(),
            found: feature_names.len(),
        });
    }
    if class_names.len() != data.n_classes() {
        return Err(ForestError::DimensionMismatch {
            expected: data.n_classes(),
            found: class_names.len(),
        });
    }
    let mut present = vec![false; data.n_classes()];
    for &l in data.labels() {
        present[l] = true;
    }
    if present.iter().filter(|&&p| p).count() < 2 {
        return Err(ForestError::DegenerateData);
    }

    let grown: Vec<(DecisionTree, Vec<usize>)> = (0..params.n_estimators)
        .into_par_iter()
        .map(|i| {
            let mut rng = rng::stream(params.seed, &[tag::TREE, i as u64]);
            let samples = if params.bootstrap {
                bootstrap_sample(n, &mut rng)
            } else {
                (0..n).collect()
            };
            let tree = grow_tree(data, &samples, params, &mut rng);
            (tree, samples)
        })
        .collect();

    let oob_accuracy = if params.bootstrap { oob_accuracy(data, &grown) } else { None };
    Ok(RandomForestModel {
        params: params.clone(),
        feature_names,
        class_names,
        oob_accuracy,
        trees: grown.into_iter().map(|(t, _)| t).collect(),
    })
}

fn oob_accuracy(data: &TrainingData, grown: &[(DecisionTree, Vec<usize>)]) -> Option<f64> {
    let n = data.n_samples();
    let mut votes = vec![vec![0u64; data.n_classes()]; n];
    for (tree, samples) in grown {
        let mut in_bag = vec![false; n];
        for &s in samples {
            in_bag[s] = true;
        }
        for (i, v) in votes.iter_mut().enumerate() {
            if !in_bag[i] {
                v[tree.predict(&data.row(i))] += 1;
            }
        }
    }
    let (mut scored, mut correct) = (0usize, 0usize);
    for (i, v) in votes.iter().enumerate() {
        if v.iter().any(|&c| c > 0) {
            scored += 1;
            correct += usize::from(argmax(v) == data.labels()[i]);
        }
    }
    (scored > 0).then(|| correct as f64 / scored as f64)
}

/// Trains on every row of `d`, with the dataset's column names and the
/// fixed dialect class order.
pub fn train_forest(d: &Dataset, params: &ForestParams) -> Result<RandomForestModel, ForestError> {
    if d.is_empty() {
        return Err(ForestError::EmptyData);
    }
    let rows: Vec<Vec<f64>> = d.rows().iter().map(|r| r.values.clone()).collect();
    let class_names = d.class_names();
    let data = TrainingData::new(&rows, &d.labels(), class_names.len())?;
    train_forest_on(&data, d.feature_names().to_vec(), class_names, params)
}

impl RandomForestModel {
    pub fn n_features(&self) -> usize {
        self.feature_names.len()
    }

    /// Number of trees voting for each class.
    pub fn votes(&self, x: &[f64]) -> Result<Vec<u64>, ForestError> {
        if x.len() != self.n_features() {
            return Err(ForestError::DimensionMismatch {
                expected: self.n_features(),
                found: x.len(),
            });
        }
        let mut votes = vec![0u64; self.class_names.len()];
        for t in &self.trees {
            votes[t.predict(x)] += 1;
        }
        Ok(votes)
    }

    /// Plurality vote; ties go to the lowest class index.
    pub fn predict(&self, x: &[f64]) -> Result<usize, ForestError> {
        Ok(argmax(&self.votes(x)?))
    }

    /// Predictions for many rows, computed in parallel and returned in order.
    pub fn predict_batch(&self, rows: &[Vec<f64>]) -> Result<Vec<usize>, ForestError> {
        rows.par_iter().map(|r| self.predict(r)).collect()
    }

    pub fn predict_dataset(&self, d: &Dataset) -> Result<Vec<usize>, ForestError> {
        if d.feature_names() != self.feature_names.as_slice() {
            return Err(ForestError::InvalidData("dataset columns differ from the model's features".into()));
        }
        let rows: Vec<Vec<f64>> = d.rows().iter().map(|r| r.values.clone()).collect();
        self.predict_batch(&rows)
    }

    /// Mean decrease in impurity, normalized per tree and overall.
    pub fn feature_importances(&self) -> Vec<f64> {
        let mut total = vec![0.0; self.n_features()];
        for t in &self.trees {
            let raw = t.raw_importances();
            let s: f64 = raw.iter().sum();
            if s > 0.0 {
                for (acc, v) in total.iter_mut().zip(raw) {
                    *acc += v / s;
                }
            }
        }
        let s: f64 = total.iter().sum();
        if s > 0.0 {
            for v in &mut total {
                *v /= s;
            }
        }
        total
    }

    fn validate(&self) -> Result<(), String> {
        self.params.validate().map_err(|e| e.to_string())?;
        if self.trees.len() != self.params.n_estimators {
            return Err(format!(
                "{} trees but n_estimators is {}",
                self.trees.len(),
                self.params.n_estimators
            ));
        }
        if self.class_names.is_empty() {
            return Err("no class names".into());
        }
        for (i, t) in self.trees.iter().enumerate() {
            if t.n_features != self.n_features() {
                return Err(format!("tree {i} has {} features, model has {}", t.n_features, self.n_features()));
            }
            t.validate(self.class_names.len()).map_err(|e| format!("tree {i}: {e}"))?;
        }
        Ok(())
    }
}

pub fn forest_predict(m: &RandomForestModel, x: &[f64]) -> Result<usize, ForestError> {
    m.predict(x)
}

pub fn feature_importances(m: &RandomForestModel) -> Vec<f64> {
    m.feature_importances()
}

pub fn save_model(m: &RandomForestModel) -> Vec<u8> {
    let file = ModelFile {
        format_version: MODEL_FORMAT_VERSION.to_string(),
        params: m.params.clone(),
        feature_names: m.feature_names.clone(),
        class_names: m.class_names.clone(),
        oob_accuracy: m.oob_accuracy,
        trees: m.trees.clone(),
    };
    serde_json::to_vec(&file).expect("model serialization cannot fail")
}

pub fn load_model(raw: &[u8]) -> Result<RandomForestModel, ForestError> {
    let value: serde_json::Value = serde_json::from_slice(raw).map_err(|e| ForestError::ModelFormat(e.to_string()))?;
    match value.get("format_version") {
        Some(serde_json::Value::String(v)) if v == MODEL_FORMAT_VERSION => {}
        Some(serde_json::Value::String(v)) => {
            return Err(ForestError::ModelFormat(format!(
                "unsupported format version {v:?} (expected {MODEL_FORMAT_VERSION:?})"
            )))
        }
        _ => return Err(ForestError::ModelFormat("missing format_version".into())),
    }
    let file: ModelFile = serde_json::from_value(value).map_err(|e| ForestError::ModelFormat(e.to_string()))?;
    let model = RandomForestModel {
        params: file.params,
        feature_names: file.feature_names,
        class_names: file.class_names,
        oob_accuracy: file.oob_accuracy,
        trees: file.trees,
    };
    model.validate().map_err(ForestError::ModelFormat)?;
    Ok(model)
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    fn names(n: usize) -> Vec<String> {
        (0..n).map(|i| format!("x{i}")).collect()
    }

    fn classes() -> Vec<String> {
        ["A", "B", "C"].map(String::from).to_vec()
    }

    fn noisy_data(n: usize, seed: u64) -> TrainingData {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let mut rows = Vec::new();
        let mut labels = Vec::new();
        for _ in 0..n {
            let y = rng.random_range(0..3usize);
            rows.push(vec![
                y as f64 + rng.random_range(-0.8..0.8),
                rng.random_range(0.0..1.0),
                rng.random_range(0.0..1.0),
            ]);
            labels.push(y);
        }
        TrainingData::new(&rows, &labels, 3).unwrap()
    }

    fn small_params(n_estimators: usize) -> ForestParams {
        ForestParams {
            n_estimators,
            max_features: 2,
            seed: 11,
            ..ForestParams::default()
        }
    }

    /// A model whose trees are single leaves voting the given classes.
    fn voters(classes_voted: &[usize]) -> RandomForestModel {
        RandomForestModel {
            params: small_params(classes_voted.len()),
            feature_names: names(1),
            class_names: classes(),
            oob_accuracy: None,
            trees: classes_voted
                .iter()
                .map(|&c| {
                    let mut counts = vec![0; 3];
                    counts[c] = 1;
                    DecisionTree {
                        nodes: vec![TreeNode::Leaf { class: c, counts }],
                        n_features: 1,
                    }
                })
                .collect(),
        }
    }

    #[test]
    fn votes_and_ties() {
        assert_eq!(voters(&[0, 0, 2]).predict(&[0.0]).unwrap(), 0);
        assert_eq!(voters(&[1, 2]).predict(&[0.0]).unwrap(), 1);
        assert!(matches!(
            voters(&[1]).predict(&[0.0, 1.0]),
            Err(ForestError::DimensionMismatch { expected: 1, found: 2 })
        ));
    }

    #[test]
    fn single_tree_forest_equals_grow_tree() {
        let data = noisy_data(60, 1);
        let params = ForestParams {
            n_estimators: 1,
            max_features: 3,
            bootstrap: false,
            seed: 5,
            ..ForestParams::default()
        };
        let m = train_forest_on(&data, names(3), classes(), &params).unwrap();
        let mut rng = rng::stream(5, &[tag::TREE, 0]);
        let t = grow_tree(&data, &(0..60).collect::<Vec<_>>(), &params, &mut rng);
        assert_eq!(m.trees[0], t);
        for i in 0..60 {
            assert_eq!(m.predict(&data.row(i)).unwrap(), t.predict(&data.row(i)));
        }
        assert_eq!(m.oob_accuracy, None);
    }

    #[test]
    fn training_is_deterministic() {
        let data = noisy_data(80, 2);
        let a = train_forest_on(&data, names(3), classes(), &small_params(20)).unwrap();
        let b = train_forest_on(&data, names(3), classes(), &small_params(20)).unwrap();
        assert_eq!(save_model(&a), save_model(&b));
        assert!(a.oob_accuracy.is_some());
    }

    #[test]
    fn degenerate_and_invalid() {
        let one_class = TrainingData::new(&[vec![1.0], vec![2.0]], &[1, 1], 3).unwrap();
        assert!(matches!(
            train_forest_on(&one_class, names(1), classes(), &small_params(3)),
            Err(ForestError::DegenerateData)
        ));
        let data = noisy_data(10, 3);
        let bad = ForestParams {
            n_estimators: 0,
            ..ForestParams::default()
        };
        assert!(matches!(
            train_forest_on(&data, names(3), classes(), &bad),
            Err(ForestError::InvalidParams(_))
        ));
        assert!(TrainingData::new(&[vec![f64::NAN]], &[0], 3).is_err());
        assert!(TrainingData::new(&[vec![1.0]], &[3], 3).is_err());
    }

    #[test]
    fn importances() {
        let data = noisy_data(120, 4);
        let m = train_forest_on(&data, names(3), classes(), &small_params(30)).unwrap();
        let imp = m.feature_importances();
        assert!((imp.iter().sum::<f64>() - 1.0).abs() < 1e-9);
        assert!(imp[0] > imp[1] && imp[0] > imp[2]);

        let one = TrainingData::new(&[vec![0.0], vec![1.0], vec![2.0], vec![3.0]], &[0, 0, 1, 1], 3).unwrap();
        let m = train_forest_on(&one, names(1), classes(), &small_params(5)).unwrap();
        assert_eq!(m.feature_importances(), vec![1.0]);
        assert_eq!(voters(&[0, 1]).feature_importances(), vec![0.0]);
    }

    #[test]
    fn save_load_round_trip() {
        let data = noisy_data(50, 6);
        let m = train_forest_on(&data, names(3), classes(), &small_params(8)).unwrap();
        let raw = save_model(&m);
        let back = load_model(&raw).unwrap();
        assert_eq!(back, m);
        assert_eq!(save_model(&back), raw);
    }

    #[test]
    fn load_rejects_bad_files() {
        let raw = save_model(&voters(&[0, 1]));
        assert!(matches!(load_model(&raw[..raw.len() / 2]), Err(ForestError::ModelFormat(_))));

        let text = String::from_utf8(raw.clone())
            .unwrap()
            .replace("\"format_version\":\"1\"", "\"format_version\":\"99\"");
        match load_model(text.as_bytes()) {
            Err(ForestError::ModelFormat(msg)) => assert!(msg.contains("version") && msg.contains("99")),
            other => panic!("expected a version error, got {other:?}"),
        }

        let cyclic = String::from_utf8(save_model(&voters(&[0]))).unwrap().replace(
            "{\"kind\":\"leaf\",\"class\":0,\"counts\":[1,0,0]}",
            "{\"kind\":\"split\",\"feature\":0,\"threshold\":0.5,\"left\":0,\"right\":0,\"n_samples\":1,\"impurity_decrease\":0.0}",
        );
        assert!(matches!(load_model(cyclic.as_bytes()), Err(ForestError::ModelFormat(_))));
    }
}
