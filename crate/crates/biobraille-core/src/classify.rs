//! Spike-count decoding and Braille-letter classification.
//!
//! Response vectors are per-channel spike counts in the 500 ms readout window
//! (8-dim for one organoid, 24-dim for the three-organoid ensemble). Three
//! classifiers are provided: k-nearest-neighbour, one-vs-rest linear SVM
//! trained by seeded subgradient descent on hinge loss, and a bagged random
//! forest. Evaluation is stratified k-fold cross-validation with per-fold
//! feature standardization fitted on the training split only.

use alloc::collections::BTreeMap;
use alloc::vec;
use alloc::vec::Vec;

use rand::seq::SliceRandom;
use serde::{Deserialize, Serialize};

use crate::braille::{TrialLabel, LETTERS};
use crate::organoid::{RecordingWindow, SpikeTrain};
use crate::rng::{self, tag};

/// Number of letter classes.
pub const NUM_CLASSES: usize = LETTERS.len();

#[derive(Debug, Clone, Copy, thiserror::Error, PartialEq, Eq)]
pub enum ClassifyError {
    #[error("training set is empty")]
    EmptyTrainingSet,
    #[error("k = {k} exceeds training-set size {train_size}")]
    KTooLarge { k: usize, train_size: usize },
    #[error("inconsistent feature dimension: expected {expected}, got {got}")]
    DimensionMismatch { expected: usize, got: usize },
    #[error("stratification impossible: class {class} has {got} trials, needs >= {needed}")]
    StratificationImpossible {
        class: usize,
        got: usize,
        needed: usize,
    },
}

/// One decoded trial.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ResponseVector {
    pub label: TrialLabel,
    pub counts: Vec<f64>,
}

/// Counts spikes per channel inside the half-open readout window,
/// concatenating the given organoids' trains in order.
pub fn decode(trains: &[&SpikeTrain], window: RecordingWindow) -> Vec<f64> {
    let mut counts = Vec::new();
    for train in trains {
        counts.extend(train.counts_in(window).into_iter().map(|c| c as f64));
    }
    counts
}

/// Per-dimension standardization fitted on a training split.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Standardizer {
    pub mean: Vec<f64>,
    pub std: Vec<f64>,
}

impl Standardizer {
    pub fn fit(rows: &[&[f64]]) -> Self {
        let dim = rows.first().map_or(0, |r| r.len());
        let n = rows.len().max(1) as f64;
        let mut mean = vec![0.0; dim];
        for row in rows {
            for (m, v) in mean.iter_mut().zip(*row) {
                *m += v;
            }
        }
        for m in mean.iter_mut() {
            *m /= n;
        }
        let mut var = vec![0.0; dim];
        for row in rows {
            for ((s, v), m) in var.iter_mut().zip(*row).zip(&mean) {
                let d = v - m;
                *s += d * d;
            }
        }
        let std = var
            .into_iter()
            .map(|s| {
                let sd = libm::sqrt(s / n);
                if sd > 0.0 {
                    sd
                } else {
                    1.0
                }
            })
            .collect();
        Self { mean, std }
    }

    pub fn transform(&self, row: &[f64]) -> Vec<f64> {
        row.iter()
            .zip(&self.mean)
            .zip(&self.std)
            .map(|((v, m), s)| (v - m) / s)
            .collect()
    }
}

fn squared_distance(a: &[f64], b: &[f64]) -> f64 {
    a.iter()
        .zip(b)
        .map(|(x, y)| {
            let d = x - y;
            d * d
        })
        .sum()
}

/// Majority vote with ties broken toward the smallest class index.
fn majority_vote(votes: &[u32]) -> usize {
    let mut best = 0;
    for (c, &v) in votes.iter().enumerate() {
        if v > votes[best] {
            best = c;
        }
    }
    best
}

// ---------------------------------------------------------------------------
// k-nearest-neighbour

#[derive(Debug, Clone, PartialEq)]
pub struct KnnModel {
    pub k: usize,
    data: Vec<Vec<f64>>,
    labels: Vec<usize>,
}

/// Stores the training set for majority vote among the `k` nearest points by
/// Euclidean distance. Neighbour ties resolve by training index, class ties
/// toward the smallest class index.
pub fn train_knn(data: &[Vec<f64>], labels: &[usize], k: usize) -> Result<KnnModel, ClassifyError> {
    if data.is_empty() {
        return Err(ClassifyError::EmptyTrainingSet);
    }
    if k == 0 || k > data.len() {
        return Err(ClassifyError::KTooLarge {
            k,
            train_size: data.len(),
        });
    }
    Ok(KnnModel {
        k,
        data: data.to_vec(),
        labels: labels.to_vec(),
    })
}

impl KnnModel {
    pub fn predict(&self, x: &[f64]) -> usize {
        let mut dists: Vec<(f64, usize)> = self
            .data
            .iter()
            .enumerate()
            .map(|(i, row)| (squared_distance(row, x), i))
            .collect();
        dists.sort_by(|a, b| a.0.total_cmp(&b.0).then(a.1.cmp(&b.1)));
        let mut votes = vec![0u32; NUM_CLASSES];
        for &(_, i) in dists.iter().take(self.k) {
            votes[self.labels[i]] += 1;
        }
        majority_vote(&votes)
    }
}

// ---------------------------------------------------------------------------
// one-vs-rest linear SVM

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct SvmParams {
    /// L2 regularization strength.
    pub lambda: f64,
    /// Full passes over the training set.
    pub epochs: u32,
}

impl Default for SvmParams {
    fn default() -> Self {
        Self {
            lambda: 1e-3,
            epochs: 60,
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct SvmModel {
    pub weights: Vec<Vec<f64>>,
    pub biases: Vec<f64>,
}

/// Trains one-vs-rest linear hinge-loss classifiers by subgradient descent
/// with a 1/(lambda t + 1) step schedule and a seeded epoch shuffle.
pub fn train_svm(
    data: &[Vec<f64>],
    labels: &[usize],
    params: &SvmParams,
    seed: u64,
) -> Result<SvmModel, ClassifyError> {
    if data.is_empty() {
        return Err(ClassifyError::EmptyTrainingSet);
    }
    let dim = data[0].len();
    let mut weights = vec![vec![0.0; dim]; NUM_CLASSES];
    let mut biases = vec![0.0; NUM_CLASSES];
    let mut order: Vec<usize> = (0..data.len()).collect();
    let mut rng = rng::stream(seed, &[tag::SVM]);
    let mut t = 0u64;
    for _ in 0..params.epochs {
        order.shuffle(&mut rng);
        for &i in &order {
            t += 1;
            let eta = 1.0 / (params.lambda * t as f64 + 1.0);
            let x = &data[i];
            for c in 0..NUM_CLASSES {
                let y = if labels[i] == c { 1.0 } else { -1.0 };
                let score: f64 =
                    weights[c].iter().zip(x).map(|(w, v)| w * v).sum::<f64>() + biases[c];
                let decay = 1.0 - eta * params.lambda;
                for w in weights[c].iter_mut() {
                    *w *= decay;
                }
                if y * score < 1.0 {
                    for (w, v) in weights[c].iter_mut().zip(x) {
                        *w += eta * y * v;
                    }
                    biases[c] += eta * y;
                }
            }
        }
    }
    Ok(SvmModel { weights, biases })
}

impl SvmModel {
    pub fn decision_values(&self, x: &[f64]) -> Vec<f64> {
        self.weights
            .iter()
            .zip(&self.biases)
            .map(|(w, b)| w.iter().zip(x).map(|(wi, v)| wi * v).sum::<f64>() + b)
            .collect()
    }

    /// Argmax of the one-vs-rest decision values; ties break toward the
    /// smallest class index.
    pub fn predict(&self, x: &[f64]) -> usize {
        let values = self.decision_values(x);
        let mut best = 0;
        for (c, &v) in values.iter().enumerate() {
            if v > values[best] {
                best = c;
            }
        }
        best
    }
}

// ---------------------------------------------------------------------------
// random forest

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct ForestParams {
    pub num_trees: u32,
    pub max_depth: u32,
    pub min_samples_split: usize,
    /// Features examined per split; defaults to ceil(sqrt(dim)) when `None`.
    pub feature_subsample: Option<usize>,
}

impl Default for ForestParams {
    fn default() -> Self {
        Self {
            num_trees: 100,
            max_depth: 12,
            min_samples_split: 2,
            feature_subsample: None,
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
enum TreeNode {
    Leaf(usize),
    Split {
        feature: usize,
        threshold: f64,
        left: usize,
        right: usize,
    },
}

#[derive(Debug, Clone, PartialEq)]
pub struct DecisionTree {
    nodes: Vec<TreeNode>,
}

impl DecisionTree {
    fn predict(&self, x: &[f64]) -> usize {
        let mut idx = 0;
        loop {
            match self.nodes[idx] {
                TreeNode::Leaf(class) => return class,
                TreeNode::Split {
                    feature,
                    threshold,
                    left,
                    right,
                } => {
                    idx = if x[feature] <= threshold { left } else { right };
                }
            }
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct ForestModel {
    pub params: ForestParams,
    trees: Vec<DecisionTree>,
}

struct TreeBuilder<'a> {
    data: &'a [Vec<f64>],
    labels: &'a [usize],
    params: ForestParams,
    num_features: usize,
    subsample: usize,
    nodes: Vec<TreeNode>,
}

impl<'a> TreeBuilder<'a> {
    fn leaf_class(&self, indices: &[usize]) -> usize {
        let mut votes = vec![0u32; NUM_CLASSES];
        for &i in indices {
            votes[self.labels[i]] += 1;
        }
        majority_vote(&votes)
    }

    fn gini(counts: &[u32], total: f64) -> f64 {
        let mut g = 1.0;
        for &c in counts {
            let p = c as f64 / total;
            g -= p * p;
        }
        g
    }

    fn build(&mut self, indices: &mut Vec<usize>, depth: u32, rng: &mut rand_chacha::ChaCha8Rng) -> usize {
        let first = self.labels[indices[0]];
        let pure = indices.iter().all(|&i| self.labels[i] == first);
        if pure || depth >= self.params.max_depth || indices.len() < self.params.min_samples_split {
            self.nodes.push(TreeNode::Leaf(self.leaf_class(indices)));
            return self.nodes.len() - 1;
        }

        // Sample candidate features without replacement.
        let mut features: Vec<usize> = (0..self.num_features).collect();
        features.shuffle(rng);
        features.truncate(self.subsample);

        let mut best: Option<(f64, usize, f64)> = None; // (gini, feature, threshold)
        let mut sorted: Vec<(f64, usize)> = Vec::with_capacity(indices.len());
        for &feature in &features {
            sorted.clear();
            sorted.extend(indices.iter().map(|&i| (self.data[i][feature], self.labels[i])));
            sorted.sort_by(|a, b| a.0.total_cmp(&b.0));

            let mut left_counts = vec![0u32; NUM_CLASSES];
            let mut right_counts = vec![0u32; NUM_CLASSES];
            for &(_, l) in sorted.iter() {
                right_counts[l] += 1;
            }
            let total = sorted.len() as f64;
            for s in 0..sorted.len() - 1 {
                left_counts[sorted[s].1] += 1;
                right_counts[sorted[s].1] -= 1;
                if sorted[s].0 == sorted[s + 1].0 {
                    continue;
                }
                let nl = (s + 1) as f64;
                let nr = total - nl;
                let score =
                    (nl * Self::gini(&left_counts, nl) + nr * Self::gini(&right_counts, nr)) / total;
                if best.is_none_or(|(b, _, _)| score < b) {
                    best = Some((score, feature, 0.5 * (sorted[s].0 + sorted[s + 1].0)));
                }
            }
        }

        let Some((_, feature, threshold)) = best else {
            self.nodes.push(TreeNode::Leaf(self.leaf_class(indices)));
            return self.nodes.len() - 1;
        };

        let mut left: Vec<usize> = Vec::new();
        let mut right: Vec<usize> = Vec::new();
        for &i in indices.iter() {
            if self.data[i][feature] <= threshold {
                left.push(i);
            } else {
                right.push(i);
            }
        }
        // Midpoint rounding on adjacent floats can push every point to one
        // side; fall back to a leaf rather than recurse on an empty side.
        if left.is_empty() || right.is_empty() {
            self.nodes.push(TreeNode::Leaf(self.leaf_class(indices)));
            return self.nodes.len() - 1;
        }
        self.nodes.push(TreeNode::Leaf(0)); // placeholder
        let node_idx = self.nodes.len() - 1;
        let left_idx = self.build(&mut left, depth + 1, rng);
        let right_idx = self.build(&mut right, depth + 1, rng);
        self.nodes[node_idx] = TreeNode::Split {
            feature,
            threshold,
            left: left_idx,
            right: right_idx,
        };
        node_idx
    }
}

/// Trains a bagged forest of gini-split decision trees with per-split feature
/// subsampling; everything is driven by streams derived from `seed`.
pub fn train_forest(
    data: &[Vec<f64>],
    labels: &[usize],
    params: &ForestParams,
    seed: u64,
) -> Result<ForestModel, ClassifyError> {
    if data.is_empty() {
        return Err(ClassifyError::EmptyTrainingSet);
    }
    let num_features = data[0].len();
    let subsample = params
        .feature_subsample
        .unwrap_or_else(|| int_sqrt_ceil(num_features))
        .clamp(1, num_features);
    let mut trees = Vec::with_capacity(params.num_trees as usize);
    for tree_i in 0..params.num_trees {
        let mut rng = rng::stream(seed, &[tag::FOREST, tree_i as u64]);
        let mut indices: Vec<usize> = (0..data.len())
            .map(|_| rand::Rng::random_range(&mut rng, 0..data.len()))
            .collect();
        let mut builder = TreeBuilder {
            data,
            labels,
            params: *params,
            num_features,
            subsample,
            nodes: Vec::new(),
        };
        builder.build(&mut indices, 0, &mut rng);
        trees.push(DecisionTree {
            nodes: builder.nodes,
        });
    }
    Ok(ForestModel {
        params: *params,
        trees,
    })
}

fn int_sqrt_ceil(n: usize) -> usize {
    let mut r = 1;
    while r * r < n {
        r += 1;
    }
    r
}

impl ForestModel {
    pub fn predict(&self, x: &[f64]) -> usize {
        let mut votes = vec![0u32; NUM_CLASSES];
        for tree in &self.trees {
            votes[tree.predict(x)] += 1;
        }
        majority_vote(&votes)
    }
}

// ---------------------------------------------------------------------------
// cross-validation

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ClassifierKind {
    Knn,
    Svm,
    Forest,
}

/// Hyperparameters for every classifier family.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct ClassifierConfig {
    pub knn_k: usize,
    pub svm: SvmParams,
    pub forest: ForestParams,
}

impl Default for ClassifierConfig {
    fn default() -> Self {
        Self {
            knn_k: 5,
            svm: SvmParams::default(),
            forest: ForestParams::default(),
        }
    }
}

enum AnyModel {
    Knn(KnnModel),
    Svm(SvmModel),
    Forest(ForestModel),
}

impl AnyModel {
    fn train(
        kind: ClassifierKind,
        cfg: &ClassifierConfig,
        data: &[Vec<f64>],
        labels: &[usize],
        seed: u64,
    ) -> Result<Self, ClassifyError> {
        Ok(match kind {
            ClassifierKind::Knn => AnyModel::Knn(train_knn(data, labels, cfg.knn_k)?),
            ClassifierKind::Svm => AnyModel::Svm(train_svm(data, labels, &cfg.svm, seed)?),
            ClassifierKind::Forest => AnyModel::Forest(train_forest(data, labels, &cfg.forest, seed)?),
        })
    }

    fn predict(&self, x: &[f64]) -> usize {
        match self {
            AnyModel::Knn(m) => m.predict(x),
            AnyModel::Svm(m) => m.predict(x),
            AnyModel::Forest(m) => m.predict(x),
        }
    }
}

/// Cross-validation result: per-fold accuracies and the pooled confusion
/// matrix (rows = true letter, columns = predicted letter).
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CvReport {
    pub classifier: ClassifierKind,
    pub folds: usize,
    pub fold_accuracies: Vec<f64>,
    pub mean_accuracy: f64,
    pub confusion: Vec<Vec<u32>>,
}

impl CvReport {
    pub fn total_trials(&self) -> u64 {
        self.confusion.iter().flatten().map(|&c| c as u64).sum()
    }

    pub fn pooled_accuracy(&self) -> f64 {
        let trace: u64 = (0..NUM_CLASSES).map(|c| self.confusion[c][c] as u64).sum();
        trace as f64 / self.total_trials() as f64
    }
}

/// Assigns every trial to exactly one test fold, stratified by
/// (letter, depth) with a seeded shuffle inside each stratum.
pub fn stratified_folds(
    data: &[ResponseVector],
    folds: usize,
    seed: u64,
) -> Result<Vec<usize>, ClassifyError> {
    let mut per_class = vec![0usize; NUM_CLASSES];
    let mut strata: BTreeMap<(usize, usize), Vec<usize>> = BTreeMap::new();
    for (i, rv) in data.iter().enumerate() {
        per_class[rv.label.class_index()] += 1;
        strata
            .entry((rv.label.class_index(), rv.label.depth_index()))
            .or_default()
            .push(i);
    }
    for (class, &got) in per_class.iter().enumerate() {
        if got > 0 && got < folds {
            return Err(ClassifyError::StratificationImpossible {
                class,
                got,
                needed: folds,
            });
        }
    }
    let mut assignment = vec![0usize; data.len()];
    for ((class, depth), mut indices) in strata {
        let mut rng = rng::stream(seed, &[tag::FOLDS, class as u64, depth as u64]);
        indices.shuffle(&mut rng);
        // Rotate the round-robin start so strata smaller than `folds` do not
        // all pile into the first folds.
        let offset = rand::Rng::random_range(&mut rng, 0..folds);
        for (pos, idx) in indices.into_iter().enumerate() {
            assignment[idx] = (pos + offset) % folds;
        }
    }
    Ok(assignment)
}

/// Stratified k-fold cross-validation. Standardization is fitted on each
/// fold's training split and applied to both splits; the classifier seed is
/// derived per fold.
pub fn cross_validate(
    data: &[ResponseVector],
    kind: ClassifierKind,
    cfg: &ClassifierConfig,
    folds: usize,
    seed: u64,
) -> Result<CvReport, ClassifyError> {
    cross_validate_paired(data, data, kind, cfg, folds, seed)
}

/// Like [`cross_validate`] but training rows come from `train_source` and
/// test rows from `test_source` (same labels, same order). Used to evaluate
/// classifiers trained on clean data against noised test data.
pub fn cross_validate_paired(
    train_source: &[ResponseVector],
    test_source: &[ResponseVector],
    kind: ClassifierKind,
    cfg: &ClassifierConfig,
    folds: usize,
    seed: u64,
) -> Result<CvReport, ClassifyError> {
    assert_eq!(train_source.len(), test_source.len());
    if train_source.is_empty() {
        return Err(ClassifyError::EmptyTrainingSet);
    }
    let dim = train_source[0].counts.len();
    for rv in train_source.iter().chain(test_source) {
        if rv.counts.len() != dim {
            return Err(ClassifyError::DimensionMismatch {
                expected: dim,
                got: rv.counts.len(),
            });
        }
    }
    let assignment = stratified_folds(train_source, folds, seed)?;

    let mut confusion = vec![vec![0u32; NUM_CLASSES]; NUM_CLASSES];
    let mut fold_accuracies = Vec::with_capacity(folds);
    for fold in 0..folds {
        let train_rows: Vec<&[f64]> = train_source
            .iter()
            .enumerate()
            .filter(|(i, _)| assignment[*i] != fold)
            .map(|(_, rv)| rv.counts.as_slice())
            .collect();
        let train_labels: Vec<usize> = train_source
            .iter()
            .enumerate()
            .filter(|(i, _)| assignment[*i] != fold)
            .map(|(_, rv)| rv.label.class_index())
            .collect();
        let standardizer = Standardizer::fit(&train_rows);
        let train_x: Vec<Vec<f64>> = train_rows.iter().map(|r| standardizer.transform(r)).collect();

        let model = AnyModel::train(
            kind,
            cfg,
            &train_x,
            &train_labels,
            rng::derive_seed(seed, &[tag::SVM, fold as u64]),
        )?;

        let mut correct = 0u32;
        let mut tested = 0u32;
        for (i, rv) in test_source.iter().enumerate() {
            if assignment[i] != fold {
                continue;
            }
            let pred = model.predict(&standardizer.transform(&rv.counts));
            let truth = rv.label.class_index();
            confusion[truth][pred] += 1;
            tested += 1;
            if pred == truth {
                correct += 1;
            }
        }
        fold_accuracies.push(if tested == 0 {
            0.0
        } else {
            correct as f64 / tested as f64
        });
    }
    let mean_accuracy = fold_accuracies.iter().sum::<f64>() / folds as f64;
    Ok(CvReport {
        classifier: kind,
        folds,
        fold_accuracies,
        mean_accuracy,
        confusion,
    })
}
