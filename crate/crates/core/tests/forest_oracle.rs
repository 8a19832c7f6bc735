//! The forest's split search and tree growth checked against a brute-force
//! CART written with exact rational arithmetic.

mod common;

use common::{random_cart_dataset, CartOracle};
use dialect_id::forest::{best_split, grow_tree, train_forest_on, ForestParams, TrainingData, TreeNode};
use dialect_id::rng::{self, tag};
use proptest::prelude::*;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

#[test]
fn best_split_matches_brute_force_on_200_datasets() {
    let mut rng = ChaCha8Rng::seed_from_u64(2024);
    for case in 0..200 {
        let (rows, labels) = random_cart_dataset(&mut rng);
        let data = TrainingData::new(&rows, &labels, 3).unwrap();
        let oracle = CartOracle {
            rows: &rows,
            labels: &labels,
            n_classes: 3,
        };
        let samples: Vec<usize> = (0..rows.len()).collect();
        let features: Vec<usize> = (0..rows[0].len()).collect();
        let got = best_split(&data, &samples, &features);
        let want = oracle.best(&samples, &features);
        match (got, want) {
            (None, None) => {}
            (Some(s), Some((f, t, gain))) => {
                assert_eq!((s.feature, s.threshold), (f, t), "case {case}");
                let exact = *gain.numer() as f64 / *gain.denom() as f64;
                assert!((s.impurity_decrease - exact).abs() < 1e-12, "case {case}");
            }
            (g, w) => panic!("case {case}: got {g:?}, oracle {w:?}"),
        }
    }
}

#[test]
fn grown_tree_matches_reference_cart() {
    let mut rng = ChaCha8Rng::seed_from_u64(77);
    for case in 0..100 {
        let (rows, labels) = random_cart_dataset(&mut rng);
        let p = rows[0].len();
        let data = TrainingData::new(&rows, &labels, 3).unwrap();
        let oracle = CartOracle {
            rows: &rows,
            labels: &labels,
            n_classes: 3,
        };
        let params = ForestParams {
            n_estimators: 1,
            max_features: p,
            bootstrap: false,
            ..ForestParams::default()
        };
        let samples: Vec<usize> = (0..rows.len()).collect();
        let tree = grow_tree(&data, &samples, &params, &mut rng::stream(case, &[tag::TREE, 0]));
        let names: Vec<String> = (0..p).map(|i| format!("f{i}")).collect();
        let classes: Vec<String> = ["a", "b", "c"].map(String::from).to_vec();
        let forest = if labels.iter().any(|&l| l != labels[0]) {
            Some(train_forest_on(&data, names, classes, &params).unwrap())
        } else {
            None
        };
        for row in &rows {
            let want = oracle.predict(&samples, row);
            assert_eq!(tree.predict(row), want, "case {case}");
            if let Some(m) = &forest {
                assert_eq!(m.predict(row).unwrap(), want, "case {case}");
            }
        }
    }
}

#[test]
fn separable_one_d_gives_a_stump() {
    let rows: Vec<Vec<f64>> = [0.1, 0.4, 0.5, 2.0, 2.5, 3.0].iter().map(|&v| vec![v]).collect();
    let labels = [0, 0, 0, 1, 1, 1];
    let data = TrainingData::new(&rows, &labels, 3).unwrap();
    let params = ForestParams {
        max_features: 1,
        bootstrap: false,
        ..ForestParams::default()
    };
    let tree = grow_tree(&data, &[0, 1, 2, 3, 4, 5], &params, &mut ChaCha8Rng::seed_from_u64(0));
    assert_eq!(tree.depth(), 1);
    assert!(rows.iter().zip(labels).all(|(r, y)| tree.predict(r) == y));
}

#[test]
fn informative_feature_dominates_importance() {
    let mut rng = ChaCha8Rng::seed_from_u64(9);
    let mut rows = Vec::new();
    let mut labels = Vec::new();
    for i in 0..300 {
        let y = i % 3;
        rows.push(vec![y as f64 + rng.random_range(0.0..0.5), rng.random_range(0.0..1.0)]);
        labels.push(y);
    }
    let data = TrainingData::new(&rows, &labels, 3).unwrap();
    let params = ForestParams {
        n_estimators: 50,
        max_features: 1,
        seed: 3,
        ..ForestParams::default()
    };
    let names = vec!["signal".to_string(), "noise".to_string()];
    let m = train_forest_on(&data, names, ["a", "b", "c"].map(String::from).to_vec(), &params).unwrap();
    let imp = m.feature_importances();
    assert!(imp[0] > 0.9, "importances {imp:?}");
    assert!((imp.iter().sum::<f64>() - 1.0).abs() < 1e-9);
}

fn split_features(nodes: &[TreeNode]) -> Vec<Option<usize>> {
    nodes
        .iter()
        .map(|n| match n {
            TreeNode::Split { feature, .. } => Some(*feature),
            TreeNode::Leaf { .. } => None,
        })
        .collect()
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn monotone_transform_keeps_tree_shape(seed in any::<u64>(), feature in 0usize..3) {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let n = 40;
        let rows: Vec<Vec<f64>> = (0..n).map(|_| (0..3).map(|_| rng.random_range(-2.0..2.0)).collect()).collect();
        let labels: Vec<usize> = rows.iter().map(|r| usize::from(r[0] + 0.3 * r[1] > 0.0) + usize::from(r[2] > 1.0)).collect();
        let transformed: Vec<Vec<f64>> = rows
            .iter()
            .map(|r| {
                let mut r = r.clone();
                r[feature] = (r[feature] / 2.0).exp() * 3.0 + 1.0;
                r
            })
            .collect();
        let params = ForestParams { max_features: 2, ..ForestParams::default() };
        let samples: Vec<usize> = (0..n).collect();
        let a = grow_tree(&TrainingData::new(&rows, &labels, 3).unwrap(), &samples, &params, &mut rng::stream(seed, &[1]));
        let b = grow_tree(&TrainingData::new(&transformed, &labels, 3).unwrap(), &samples, &params, &mut rng::stream(seed, &[1]));
        prop_assert_eq!(split_features(&a.nodes), split_features(&b.nodes));
        for i in 0..n {
            prop_assert_eq!(a.predict(&rows[i]), b.predict(&transformed[i]));
        }
    }

    #[test]
    fn gains_are_nonnegative_and_importances_normalized(seed in any::<u64>()) {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let (rows, labels) = random_cart_dataset(&mut rng);
        prop_assume!(labels.iter().any(|&l| l != labels[0]));
        let p = rows[0].len();
        let data = TrainingData::new(&rows, &labels, 3).unwrap();
        let params = ForestParams { n_estimators: 5, max_features: 2, seed, ..ForestParams::default() };
        let names: Vec<String> = (0..p).map(|i| format!("f{i}")).collect();
        let m = train_forest_on(&data, names, ["a", "b", "c"].map(String::from).to_vec(), &params).unwrap();
        let mut any_split = false;
        for t in &m.trees {
            for node in &t.nodes {
                if let TreeNode::Split { impurity_decrease, .. } = node {
                    any_split = true;
                    prop_assert!(*impurity_decrease > 0.0);
                }
            }
        }
        let s: f64 = m.feature_importances().iter().sum();
        if any_split {
            prop_assert!((s - 1.0).abs() < 1e-9);
        } else {
            prop_assert_eq!(s, 0.0);
        }
    }
}
