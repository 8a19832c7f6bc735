//! CART decision trees with Gini splitting.
//!
//! Split quality is compared exactly. For a candidate with child class counts
//! `l` and `r`, the weighted child impurity is `1 − S/n` with
//! `S = Σl²/n_L + Σr²/n_R`, so maximizing the impurity decrease is the same
//! as maximizing `S`, a ratio of integers. Two candidates are compared by
//! cross-multiplying in 128-bit integers, which makes the tie-break rule
//! (lowest feature, then lowest threshold) hold bit for bit.

use std::cmp::Ordering;

use rand::Rng;
use serde::{Deserialize, Serialize};

use super::{ForestError, ForestParams};

/// Row-major feature matrix with class labels, stored column-wise.
#[derive(Debug, Clone)]
pub struct TrainingData {
    columns: Vec<Vec<f64>>,
    labels: Vec<usize>,
    n_classes: usize,
}

impl TrainingData {
    /// `rows[i]` is the feature row of sample `i`; labels must be below
    /// `n_classes` and every value finite.
    pub fn new(rows: &[Vec<f64>], labels: &[usize], n_classes: usize) -> Result<TrainingData, ForestError> {
        if rows.len() != labels.len() {
            return Err(ForestError::DimensionMismatch {
                expected: rows.len(),
                found: labels.len(),
            });
        }
        let n_features = rows.first().map_or(0, Vec::len);
        let mut columns = vec![Vec::with_capacity(rows.len()); n_features];
        for row in rows {
            if row.len() != n_features {
                return Err(ForestError::DimensionMismatch {
                    expected: n_features,
                    found: row.len(),
                });
            }
            if row.iter().any(|v| !v.is_finite()) {
                return Err(ForestError::InvalidData("feature values must be finite".into()));
            }
            for (c, &v) in columns.iter_mut().zip(row) {
                c.push(v);
            }
        }
        if let Some(&bad) = labels.iter().find(|&&l| l >= n_classes) {
            return Err(ForestError::InvalidData(format!("label {bad} outside {n_classes} classes")));
        }
        Ok(TrainingData {
            columns,
            labels: labels.to_vec(),
            n_classes,
        })
    }

    pub fn n_samples(&self) -> usize {
        self.labels.len()
    }

    pub fn n_features(&self) -> usize {
        self.columns.len()
    }

    pub fn n_classes(&self) -> usize {
        self.n_classes
    }

    pub fn labels(&self) -> &[usize] {
        &self.labels
    }

    pub fn value(&self, row: usize, feature: usize) -> f64 {
        self.columns[feature][row]
    }

    pub fn row(&self, i: usize) -> Vec<f64> {
        self.columns.iter().map(|c| c[i]).collect()
    }

    fn class_counts(&self, samples: &[usize]) -> Vec<u64> {
        let mut counts = vec![0u64; self.n_classes];
        for &s in samples {
            counts[self.labels[s]] += 1;
        }
        counts
    }
}

/// `1 − Σ(c_k/total)²`.
pub fn gini(counts: &[u64]) -> Result<f64, ForestError> {
    let total: u64 = counts.iter().sum();
    if total == 0 {
        return Err(ForestError::EmptyNode);
    }
    let t = total as f64;
    Ok(1.0 - counts.iter().map(|&c| (c as f64 / t).powi(2)).sum::<f64>())
}

fn sum_sq(counts: &[u64]) -> u128 {
    counts.iter().map(|&c| c as u128 * c as u128).sum()
}

/// `num/den` compared exactly.
#[derive(Debug, Clone, Copy)]
struct Ratio {
    num: u128,
    den: u128,
}

impl Ratio {
    fn cmp(self, other: Ratio) -> Ordering {
        (self.num * other.den).cmp(&(other.num * self.den))
    }
}

/// A chosen split: rows with `value <= threshold` go left.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Split {
    pub feature: usize,
    pub threshold: f64,
    /// `G(parent) − (n_L/n)·G(left) − (n_R/n)·G(right)`.
    pub impurity_decrease: f64,
}

/// Midpoint of two consecutive distinct values that still sends `lo` left
/// and `hi` right under `<=`.
pub fn midpoint(lo: f64, hi: f64) -> f64 {
    let mut mid = lo + (hi - lo) / 2.0;
    if !mid.is_finite() {
        mid = lo / 2.0 + hi / 2.0;
    }
    if mid >= hi || mid < lo {
        lo
    } else {
        mid
    }
}

/// The best Gini split of `samples` over the features in `features`, or
/// `None` when no candidate strictly lowers the impurity. Candidates are the
/// midpoints between consecutive distinct values; ties go to the lowest
/// feature index, then the lowest threshold.
pub fn best_split(data: &TrainingData, samples: &[usize], features: &[usize]) -> Option<Split> {
    let n = samples.len() as u128;
    if n < 2 {
        return None;
    }
    let parent = data.class_counts(samples);
    let parent_score = Ratio {
        num: sum_sq(&parent),
        den: n,
    };
    let mut order = samples.to_vec();
    let mut feats = features.to_vec();
    feats.sort_unstable();
    feats.dedup();

    let mut best: Option<(Ratio, usize, usize, f64)> = None;
    for &f in &feats {
        let col = &data.columns[f];
        order.sort_unstable_by(|&a, &b| col[a].total_cmp(&col[b]));
        let mut left = vec![0u64; data.n_classes];
        for i in 0..order.len() - 1 {
            left[data.labels[order[i]]] += 1;
            let (lo, hi) = (col[order[i]], col[order[i + 1]]);
            if lo == hi {
                continue;
            }
            let n_l = (i + 1) as u128;
            let n_r = n - n_l;
            let right: Vec<u64> = parent.iter().zip(&left).map(|(p, l)| p - l).collect();
            let score = Ratio {
                num: sum_sq(&left) * n_r + sum_sq(&right) * n_l,
                den: n_l * n_r,
            };
            if score.cmp(parent_score) != Ordering::Greater {
                continue;
            }
            if best.is_none_or(|(b, ..)| score.cmp(b) == Ordering::Greater) {
                best = Some((score, f, i, midpoint(lo, hi)));
            }
        }
    }
    best.map(|(score, feature, _, threshold)| {
        // Δ = (S − Σc²/n)/n, evaluated from the exact ratios.
        let s = score.num as f64 / score.den as f64;
        let p = parent_score.num as f64 / parent_score.den as f64;
        Split {
            feature,
            threshold,
            impurity_decrease: ((s - p) / n as f64).max(0.0),
        }
    })
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum TreeNode {
    Split {
        feature: usize,
        threshold: f64,
        left: usize,
        right: usize,
        /// Training samples (with bootstrap multiplicity) reaching the node.
        n_samples: u64,
        impurity_decrease: f64,
    },
    Leaf {
        class: usize,
        counts: Vec<u64>,
    },
}

/// Nodes in pre-order (left subtree before right); index 0 is the root.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DecisionTree {
    pub nodes: Vec<TreeNode>,
    pub n_features: usize,
}

/// Index of the largest count; ties go to the lowest index.
pub fn argmax(counts: &[u64]) -> usize {
    let mut best = 0;
    for (i, &c) in counts.iter().enumerate() {
        if c > counts[best] {
            best = i;
        }
    }
    best
}

impl DecisionTree {
    pub fn leaf_for(&self, x: &[f64]) -> &TreeNode {
        let mut i = 0;
        loop {
            match &self.nodes[i] {
                TreeNode::Split {
                    feature,
                    threshold,
                    left,
                    right,
                    ..
                } => i = if x[*feature] <= *threshold { *left } else { *right },
                leaf => return leaf,
            }
        }
    }

    pub fn predict(&self, x: &[f64]) -> usize {
        match self.leaf_for(x) {
            TreeNode::Leaf { class, .. } => *class,
            TreeNode::Split { .. } => unreachable!("leaf_for stops at a leaf"),
        }
    }

    pub fn depth(&self) -> usize {
        fn go(t: &DecisionTree, i: usize) -> usize {
            match &t.nodes[i] {
                TreeNode::Split { left, right, .. } => 1 + go(t, *left).max(go(t, *right)),
                TreeNode::Leaf { .. } => 0,
            }
        }
        go(self, 0)
    }

    /// Per-feature sums of `(n_node/n_root)·Δ_node`.
    pub fn raw_importances(&self) -> Vec<f64> {
        let mut imp = vec![0.0; self.n_features];
        let root = match &self.nodes[0] {
            TreeNode::Split { n_samples, .. } => *n_samples as f64,
            TreeNode::Leaf { .. } => return imp,
        };
        for node in &self.nodes {
            if let TreeNode::Split {
                feature,
                n_samples,
                impurity_decrease,
                ..
            } = node
            {
                imp[*feature] += *n_samples as f64 / root * impurity_decrease;
            }
        }
        imp
    }

    pub(super) fn validate(&self, n_classes: usize) -> Result<(), String> {
        if self.nodes.is_empty() {
            return Err("tree has no nodes".into());
        }
        for (i, node) in self.nodes.iter().enumerate() {
            match node {
                TreeNode::Split {
                    feature,
                    threshold,
                    left,
                    right,
                    ..
                } => {
                    if *feature >= self.n_features {
                        return Err(format!("node {i} splits on feature {feature} of {}", self.n_features));
                    }
                    if !threshold.is_finite() {
                        return Err(format!("node {i} has a non-finite threshold"));
                    }
                    // Pre-order storage puts children after their parent,
                    // which also rules out cycles.
                    for c in [left, right] {
                        if *c <= i || *c >= self.nodes.len() {
                            return Err(format!("node {i} has invalid child {c}"));
                        }
                    }
                }
                TreeNode::Leaf { class, counts } => {
                    if counts.len() != n_classes || *class >= n_classes {
                        return Err(format!("leaf {i} does not match {n_classes} classes"));
                    }
                    if counts.iter().sum::<u64>() == 0 {
                        return Err(format!("leaf {i} has no samples"));
                    }
                }
            }
        }
        Ok(())
    }
}

/// A node waiting to be grown: its rows, its depth, and the parent slot
/// (index, left side) to patch with its index.
type Pending = (Vec<usize>, usize, Option<(usize, bool)>);

/// Grows one tree on `samples` (row indices, repeats allowed). Nodes are
/// expanded in pre-order; each expanded node draws a fresh feature subset of
/// `min(max_features, n_features)` features from `rng`.
pub fn grow_tree<R: Rng + ?Sized>(data: &TrainingData, samples: &[usize], params: &ForestParams, rng: &mut R) -> DecisionTree {
    let n_features = data.n_features();
    let m = params.max_features.clamp(1, n_features.max(1));
    let mut nodes: Vec<TreeNode> = Vec::new();
    let mut stack: Vec<Pending> = vec![(samples.to_vec(), 0, None)];
    while let Some((rows, depth, parent)) = stack.pop() {
        let index = nodes.len();
        if let Some((p, is_left)) = parent {
            if let TreeNode::Split { left, right, .. } = &mut nodes[p] {
                *(if is_left { left } else { right }) = index;
            }
        }
        let counts = data.class_counts(&rows);
        let pure = counts.iter().filter(|&&c| c > 0).count() <= 1;
        let depth_capped = params.max_depth.is_some_and(|d| depth >= d);
        let split = if pure || rows.len() < params.min_samples_split || depth_capped || n_features == 0 {
            None
        } else {
            let mut subset = rand::seq::index::sample(rng, n_features, m).into_vec();
            subset.sort_unstable();
            best_split(data, &rows, &subset)
        };
        match split {
            None => nodes.push(TreeNode::Leaf {
                class: argmax(&counts),
                counts,
            }),
            Some(s) => {
                let (l, r): (Vec<usize>, Vec<usize>) = rows.iter().partition(|&&i| data.value(i, s.feature) <= s.threshold);
                nodes.push(TreeNode::Split {
                    feature: s.feature,
                    threshold: s.threshold,
                    left: 0,
                    right: 0,
                    n_samples: rows.len() as u64,
                    impurity_decrease: s.impurity_decrease,
                });
                stack.push((r, depth + 1, Some((index, false))));
                stack.push((l, depth + 1, Some((index, true))));
            }
        }
    }
    DecisionTree { nodes, n_features }
}
