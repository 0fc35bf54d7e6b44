//! Binary-classification random forest with Gini splitting.
//!
//! Each tree grows on a bootstrap sample; at every node `mtry` candidate
//! features are sampled without replacement and the split maximizing the
//! Gini decrease over midpoints of adjacent sorted unique values wins,
//! ties broken by lowest feature index then lowest threshold. Feature
//! importance is the impurity decrease per feature, weighted by node
//! sample fraction, summed across all trees and normalized to 1.
//!
//! Determinism: tree `t` draws from ChaCha8 stream `t` under the
//! configured seed, and all cross-tree reductions run in tree order, so
//! results do not depend on thread count or scheduling.

use std::path::Path;

use rand::Rng;
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::rng::{domain, stream_rng};

/// Gini impurity of a two-class count pair: 1 − p0² − p1².
pub fn gini(n_class0: usize, n_class1: usize) -> Result<f64> {
    let n = n_class0 + n_class1;
    if n == 0 {
        return Err(Error::contract("gini: empty counts"));
    }
    let p1 = n_class1 as f64 / n as f64;
    let p0 = 1.0 - p1;
    Ok(1.0 - p0 * p0 - p1 * p1)
}

#[inline]
fn gini_counts(c1: usize, n: usize) -> f64 {
    let p1 = c1 as f64 / n as f64;
    let p0 = 1.0 - p1;
    1.0 - p0 * p0 - p1 * p1
}

/// A rectangular, finite, binary-labeled training table.
#[derive(Debug, Clone)]
pub struct Dataset {
    x: Vec<f64>,
    n_rows: usize,
    n_cols: usize,
    labels: Vec<u8>,
    feature_ids: Vec<String>,
}

impl Dataset {
    pub fn new(rows: Vec<Vec<f64>>, labels: Vec<u8>, feature_ids: Vec<String>) -> Result<Self> {
        if rows.len() < 2 {
            return Err(Error::contract("dataset: need at least 2 instances"));
        }
        if rows.len() != labels.len() {
            return Err(Error::contract("dataset: rows and labels differ in length"));
        }
        let n_cols = feature_ids.len();
        if n_cols == 0 {
            return Err(Error::contract("dataset: no features"));
        }
        let mut x = Vec::with_capacity(rows.len() * n_cols);
        for (i, row) in rows.iter().enumerate() {
            if row.len() != n_cols {
                return Err(Error::contract(format!(
                    "dataset: row {i} has {} values, expected {n_cols}",
                    row.len()
                )));
            }
            if row.iter().any(|v| !v.is_finite()) {
                return Err(Error::contract(format!("dataset: non-finite value in row {i}")));
            }
            x.extend_from_slice(row);
        }
        if labels.iter().any(|&l| l > 1) {
            return Err(Error::contract("dataset: labels must be 0 or 1"));
        }
        Ok(Dataset { x, n_rows: rows.len(), n_cols, labels, feature_ids })
    }

    #[inline]
    pub fn value(&self, row: usize, col: usize) -> f64 {
        self.x[row * self.n_cols + col]
    }

    pub fn row(&self, row: usize) -> &[f64] {
        &self.x[row * self.n_cols..(row + 1) * self.n_cols]
    }

    pub fn n_rows(&self) -> usize {
        self.n_rows
    }

    pub fn n_cols(&self) -> usize {
        self.n_cols
    }

    pub fn labels(&self) -> &[u8] {
        &self.labels
    }

    pub fn feature_ids(&self) -> &[String] {
        &self.feature_ids
    }

    pub fn class_counts(&self) -> (usize, usize) {
        let ones = self.labels.iter().filter(|&&l| l == 1).count();
        (self.labels.len() - ones, ones)
    }
}

#[derive(Debug, Clone, Serialize, Deserialize, PartialEq)]
pub struct ForestConfig {
    pub n_trees: usize,
    /// Features tried per node; `None` means floor(sqrt(n_features)).
    pub mtry: Option<usize>,
    pub min_split: usize,
    pub max_depth: Option<usize>,
    pub seed: u64,
}

impl ForestConfig {
    pub fn new(seed: u64) -> Self {
        ForestConfig { n_trees: 500, mtry: None, min_split: 2, max_depth: None, seed }
    }
}

#[derive(Debug, Clone, Serialize, Deserialize, PartialEq)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum Node {
    Split { feature: u32, threshold: f64, left: u32, right: u32 },
    Leaf { p1: f64 },
}

#[derive(Debug, Clone, Serialize, Deserialize, PartialEq)]
pub struct Tree {
    pub nodes: Vec<Node>,
}

impl Tree {
    pub fn predict_p1(&self, row: &[f64]) -> f64 {
        let mut at = 0usize;
        loop {
            match &self.nodes[at] {
                Node::Leaf { p1 } => return *p1,
                Node::Split { feature, threshold, left, right } => {
                    at = if row[*feature as usize] <= *threshold {
                        *left as usize
                    } else {
                        *right as usize
                    };
                }
            }
        }
    }
}

/// A trained forest.
#[derive(Debug, Clone, Serialize, Deserialize, PartialEq)]
pub struct Forest {
    pub schema_version: u32,
    pub config: ForestConfig,
    /// The mtry actually used (resolved from the dataset width).
    pub mtry_used: usize,
    pub feature_ids: Vec<String>,
    /// Fingerprint of the feature registry the model was trained against.
    pub registry_hash: Option<String>,
    /// Normalized mean-decrease-in-impurity feature importance.
    pub importance: Vec<f64>,
    /// Out-of-bag accuracy diagnostic from training.
    pub oob_accuracy: Option<f64>,
    pub trees: Vec<Tree>,
}

struct TreeOutput {
    tree: Tree,
    importance: Vec<f64>,
    /// (subset index, leaf p1) for rows out of this tree's bag.
    oob: Vec<(u32, f64)>,
}

/// Grow one tree on the given sample (row indices into `data`, duplicates
/// allowed). Returns the tree plus its unnormalized importance.
pub(crate) fn grow_tree(
    data: &Dataset,
    sample: &[u32],
    mtry: usize,
    min_split: usize,
    max_depth: Option<usize>,
    rng: &mut ChaCha8Rng,
) -> (Tree, Vec<f64>) {
    let n_boot = sample.len() as f64;
    let mut importance = vec![0.0; data.n_cols()];
    let mut nodes: Vec<Node> = vec![Node::Leaf { p1: 0.0 }];
    // Persistent permutation for without-replacement feature sampling.
    let mut feat_pool: Vec<u32> = (0..data.n_cols() as u32).collect();
    let mut candidates: Vec<u32> = Vec::with_capacity(mtry);
    let mut scratch: Vec<(f64, u8)> = Vec::new();

    let mut stack: Vec<(usize, Vec<u32>, usize)> = vec![(0, sample.to_vec(), 0)];
    while let Some((slot, rows, depth)) = stack.pop() {
        let n = rows.len();
        let c1 = rows.iter().filter(|&&r| data.labels()[r as usize] == 1).count();
        let p1 = c1 as f64 / n as f64;
        let pure = c1 == 0 || c1 == n;
        let depth_capped = max_depth.is_some_and(|d| depth >= d);
        if pure || n < min_split || depth_capped {
            nodes[slot] = Node::Leaf { p1 };
            continue;
        }

        // Sample mtry features, then visit them in ascending order so
        // equal gains resolve to the lowest feature index.
        candidates.clear();
        for k in 0..mtry {
            let j = rng.gen_range(k..feat_pool.len());
            feat_pool.swap(k, j);
            candidates.push(feat_pool[k]);
        }
        candidates.sort_unstable();

        let parent_gini = gini_counts(c1, n);
        let mut best: Option<(f64, u32, f64)> = None;
        for &feat in &candidates {
            scratch.clear();
            scratch.extend(
                rows.iter()
                    .map(|&r| (data.value(r as usize, feat as usize), data.labels()[r as usize])),
            );
            scratch.sort_unstable_by(|a, b| a.0.partial_cmp(&b.0).unwrap());

            let mut left_n = 0usize;
            let mut left_c1 = 0usize;
            for i in 1..n {
                left_n += 1;
                left_c1 += scratch[i - 1].1 as usize;
                let (prev, cur) = (scratch[i - 1].0, scratch[i].0);
                if cur <= prev {
                    continue;
                }
                let threshold = prev + (cur - prev) / 2.0;
                // Guard against midpoints that collapse onto the upper
                // value for adjacent floats; they would not reproduce the
                // rank partition.
                if threshold >= cur {
                    continue;
                }
                let right_n = n - left_n;
                let right_c1 = c1 - left_c1;
                let children = (left_n as f64 * gini_counts(left_c1, left_n)
                    + right_n as f64 * gini_counts(right_c1, right_n))
                    / n as f64;
                let gain = parent_gini - children;
                if gain > 1e-12 && best.is_none_or(|(g, _, _)| gain > g) {
                    best = Some((gain, feat, threshold));
                }
            }
        }

        match best {
            None => nodes[slot] = Node::Leaf { p1 },
            Some((gain, feat, threshold)) => {
                importance[feat as usize] += (n as f64 / n_boot) * gain;
                let (left_rows, right_rows): (Vec<u32>, Vec<u32>) = rows
                    .iter()
                    .partition(|&&r| data.value(r as usize, feat as usize) <= threshold);
                debug_assert!(!left_rows.is_empty() && !right_rows.is_empty());
                let left_slot = nodes.len();
                nodes.push(Node::Leaf { p1: 0.0 });
                let right_slot = nodes.len();
                nodes.push(Node::Leaf { p1: 0.0 });
                nodes[slot] = Node::Split {
                    feature: feat,
                    threshold,
                    left: left_slot as u32,
                    right: right_slot as u32,
                };
                stack.push((left_slot, left_rows, depth + 1));
                stack.push((right_slot, right_rows, depth + 1));
            }
        }
    }

    (Tree { nodes }, importance)
}

/// Train on every row of the dataset.
pub fn train(data: &Dataset, config: &ForestConfig) -> Result<Forest> {
    let rows: Vec<u32> = (0..data.n_rows() as u32).collect();
    train_subset(data, &rows, config)
}

/// Train on a subset of rows (used by the CV harness).
pub fn train_subset(data: &Dataset, rows: &[u32], config: &ForestConfig) -> Result<Forest> {
    if rows.len() < 2 {
        return Err(Error::contract("train: need at least 2 training rows"));
    }
    let ones = rows.iter().filter(|&&r| data.labels()[r as usize] == 1).count();
    if ones == 0 || ones == rows.len() {
        return Err(Error::contract("train: training data contains a single class"));
    }
    if config.n_trees == 0 {
        return Err(Error::contract("train: need at least one tree"));
    }
    let mtry = match config.mtry {
        Some(m) => m,
        None => (data.n_cols() as f64).sqrt().floor() as usize,
    };
    if mtry < 1 || mtry > data.n_cols() {
        return Err(Error::contract(format!(
            "train: mtry {mtry} out of range 1..={}",
            data.n_cols()
        )));
    }

    let outputs: Vec<TreeOutput> = (0..config.n_trees)
        .into_par_iter()
        .map(|t| {
            let mut rng = stream_rng(config.seed, domain::TREE, t as u64);
            let n = rows.len();
            let mut in_bag = vec![false; n];
            let sample: Vec<u32> = (0..n)
                .map(|_| {
                    let k = rng.gen_range(0..n);
                    in_bag[k] = true;
                    rows[k]
                })
                .collect();
            let (tree, importance) =
                grow_tree(data, &sample, mtry, config.min_split, config.max_depth, &mut rng);
            let oob = in_bag
                .iter()
                .enumerate()
                .filter(|(_, &used)| !used)
                .map(|(k, _)| (k as u32, tree.predict_p1(data.row(rows[k] as usize))))
                .collect();
            TreeOutput { tree, importance, oob }
        })
        .collect();

    // Ordered reductions keep results independent of thread scheduling.
    let mut importance = vec![0.0; data.n_cols()];
    let mut oob_sum = vec![0.0; rows.len()];
    let mut oob_count = vec![0u32; rows.len()];
    let mut trees = Vec::with_capacity(config.n_trees);
    for out in outputs {
        for (dst, src) in importance.iter_mut().zip(&out.importance) {
            *dst += src;
        }
        for (k, p1) in out.oob {
            oob_sum[k as usize] += p1;
            oob_count[k as usize] += 1;
        }
        trees.push(out.tree);
    }
    let total: f64 = importance.iter().sum();
    if total > 0.0 {
        for v in &mut importance {
            *v /= total;
        }
    }

    let mut oob_hits = 0usize;
    let mut oob_n = 0usize;
    for (k, &count) in oob_count.iter().enumerate() {
        if count > 0 {
            let predicted = (oob_sum[k] / count as f64 >= 0.5) as u8;
            oob_n += 1;
            if predicted == data.labels()[rows[k] as usize] {
                oob_hits += 1;
            }
        }
    }
    let oob_accuracy = (oob_n > 0).then(|| oob_hits as f64 / oob_n as f64);

    Ok(Forest {
        schema_version: 1,
        config: config.clone(),
        mtry_used: mtry,
        feature_ids: data.feature_ids().to_vec(),
        registry_hash: None,
        importance,
        oob_accuracy,
        trees,
    })
}

impl Forest {
    /// Class probability and label for one row. Probability is the mean
    /// of per-tree leaf probabilities; ties at 0.5 go to class 1.
    pub fn predict(&self, row: &[f64]) -> Result<(u8, f64)> {
        if row.len() != self.feature_ids.len() {
            return Err(Error::contract(format!(
                "predict: row has {} values, model expects {}",
                row.len(),
                self.feature_ids.len()
            )));
        }
        if row.iter().any(|v| !v.is_finite()) {
            return Err(Error::contract("predict: non-finite value in row"));
        }
        let sum: f64 = self.trees.iter().map(|t| t.predict_p1(row)).sum();
        let p1 = sum / self.trees.len() as f64;
        Ok(((p1 >= 0.5) as u8, p1))
    }

    /// Importance ranking: (feature index, importance), descending, ties
    /// by lowest index.
    pub fn importance_ranking(&self) -> Vec<(usize, f64)> {
        let mut ranked: Vec<(usize, f64)> = self.importance.iter().copied().enumerate().collect();
        ranked.sort_by(|a, b| b.1.partial_cmp(&a.1).unwrap().then(a.0.cmp(&b.0)));
        ranked
    }

    pub fn save_json(&self, path: &Path) -> Result<()> {
        let file = std::fs::File::create(path)?;
        serde_json::to_writer(std::io::BufWriter::new(file), self)
            .map_err(|e| Error::internal(format!("model serialization failed: {e}")))?;
        Ok(())
    }

    pub fn load_json(path: &Path) -> Result<Forest> {
        let file = std::fs::File::open(path)
            .map_err(|e| Error::input(format!("cannot open model {}: {e}", path.display())))?;
        let forest: Forest = serde_json::from_reader(std::io::BufReader::new(file))
            .map_err(|e| Error::input(format!("invalid model file: {e}")))?;
        if forest.schema_version != 1 {
            return Err(Error::input(format!(
                "unsupported model schema_version {}",
                forest.schema_version
            )));
        }
        Ok(forest)
    }
}

/// Seeded draws from the observed class proportions.
pub fn random_classifier(proportion_class1: f64, n: usize, seed: u64) -> Result<Vec<u8>> {
    if !(0.0..=1.0).contains(&proportion_class1) {
        return Err(Error::contract("random_classifier: proportion outside [0, 1]"));
    }
    let mut rng = stream_rng(seed, domain::RANDOM_CLASSIFIER, 0);
    Ok((0..n)
        .map(|_| (rng.gen_range(0.0..1.0) < proportion_class1) as u8)
        .collect())
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;
    use rand::SeedableRng;

    fn one_dim_separable(n: usize) -> Dataset {
        let rows: Vec<Vec<f64>> = (0..n)
            .map(|i| vec![if i < n / 2 { -1.0 - i as f64 } else { 1.0 + i as f64 }])
            .collect();
        let labels: Vec<u8> = (0..n).map(|i| (i >= n / 2) as u8).collect();
        Dataset::new(rows, labels, vec!["f0".to_string()]).unwrap()
    }

    fn noisy_dataset(seed: u64, n: usize, d: usize, signal_col: Option<usize>) -> Dataset {
        let mut rng = stream_rng(seed, 9, 0);
        let mut rows = Vec::with_capacity(n);
        let mut labels = Vec::with_capacity(n);
        for i in 0..n {
            let label = (i % 2) as u8;
            let mut row: Vec<f64> = (0..d).map(|_| rng.gen_range(-1.0..1.0)).collect();
            if let Some(col) = signal_col {
                row[col] += if label == 1 { 1.5 } else { -1.5 };
            }
            rows.push(row);
            labels.push(label);
        }
        let ids = (0..d).map(|j| format!("f{j}")).collect();
        Dataset::new(rows, labels, ids).unwrap()
    }

    #[test]
    fn gini_reference_values() {
        assert_eq!(gini(4, 0).unwrap(), 0.0);
        assert_eq!(gini(2, 2).unwrap(), 0.5);
        assert_relative_eq!(gini(3, 1).unwrap(), 0.375);
        assert!(gini(0, 0).is_err());
    }

    #[test]
    fn separable_data_has_high_oob_accuracy() {
        let data = one_dim_separable(100);
        let mut config = ForestConfig::new(7);
        config.n_trees = 100;
        let forest = train(&data, &config).unwrap();
        assert!(forest.oob_accuracy.unwrap() >= 0.98, "oob = {:?}", forest.oob_accuracy);
    }

    #[test]
    fn exhaustive_split_oracle_on_single_tree() {
        // Brute-force best split over all midpoints must match the
        // trained stump on deterministic 1-D data.
        let data = one_dim_separable(100);
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(0);
        let sample: Vec<u32> = (0..100).collect();
        let (tree, _) = grow_tree(&data, &sample, 1, 2, None, &mut rng);

        let mut vals: Vec<f64> = (0..100).map(|i| data.value(i, 0)).collect();
        vals.sort_unstable_by(|a, b| a.partial_cmp(b).unwrap());
        let mut best_gain = -1.0;
        let mut best_thr = f64::NAN;
        for i in 1..vals.len() {
            if vals[i] <= vals[i - 1] {
                continue;
            }
            let thr = vals[i - 1] + (vals[i] - vals[i - 1]) / 2.0;
            let (mut l1, mut ln, mut r1, mut rn) = (0usize, 0usize, 0usize, 0usize);
            for r in 0..100 {
                if data.value(r, 0) <= thr {
                    ln += 1;
                    l1 += data.labels()[r] as usize;
                } else {
                    rn += 1;
                    r1 += data.labels()[r] as usize;
                }
            }
            let gain = gini_counts(50, 100)
                - (ln as f64 * gini_counts(l1, ln) + rn as f64 * gini_counts(r1, rn)) / 100.0;
            if gain > best_gain {
                best_gain = gain;
                best_thr = thr;
            }
        }
        match &tree.nodes[0] {
            Node::Split { threshold, .. } => assert_relative_eq!(*threshold, best_thr),
            Node::Leaf { .. } => panic!("separable data must split at the root"),
        }
    }

    #[test]
    fn fully_grown_tree_memorizes_consistent_data() {
        let data = noisy_dataset(3, 80, 5, Some(2));
        let sample: Vec<u32> = (0..80).collect();
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(1);
        let (tree, _) = grow_tree(&data, &sample, 5, 2, None, &mut rng);
        for r in 0..80 {
            let p1 = tree.predict_p1(data.row(r));
            let predicted = (p1 >= 0.5) as u8;
            assert_eq!(predicted, data.labels()[r], "row {r}");
        }
    }

    #[test]
    fn signal_feature_ranks_first_in_importance() {
        let data = noisy_dataset(5, 400, 20, Some(7));
        let mut config = ForestConfig::new(11);
        config.n_trees = 60;
        let forest = train(&data, &config).unwrap();
        let ranking = forest.importance_ranking();
        assert_eq!(ranking[0].0, 7, "top importance: {:?}", &ranking[..3]);
        assert_relative_eq!(forest.importance.iter().sum::<f64>(), 1.0, epsilon = 1e-9);
        assert!(forest.importance.iter().all(|&v| v >= 0.0));
    }

    #[test]
    fn determinism_and_thread_independence() {
        let data = noisy_dataset(6, 200, 10, Some(4));
        let mut config = ForestConfig::new(13);
        config.n_trees = 40;
        let a = train(&data, &config).unwrap();
        let b = train(&data, &config).unwrap();
        assert_eq!(a, b);
        let single = rayon::ThreadPoolBuilder::new().num_threads(1).build().unwrap();
        let c = single.install(|| train(&data, &config).unwrap());
        assert_eq!(a, c);
    }

    fn transform_column(data: &Dataset, col: usize, f: impl Fn(f64) -> f64) -> Dataset {
        let rows: Vec<Vec<f64>> = (0..data.n_rows())
            .map(|r| {
                let mut row = data.row(r).to_vec();
                row[col] = f(row[col]);
                row
            })
            .collect();
        Dataset::new(rows, data.labels().to_vec(), data.feature_ids().to_vec()).unwrap()
    }

    fn assert_same_shape(a: &Forest, b: &Forest) {
        assert_eq!(a.trees.len(), b.trees.len());
        for (ta, tb) in a.trees.iter().zip(&b.trees) {
            assert_eq!(ta.nodes.len(), tb.nodes.len());
            for (na, nb) in ta.nodes.iter().zip(&tb.nodes) {
                match (na, nb) {
                    (Node::Leaf { p1: pa }, Node::Leaf { p1: pb }) => assert_eq!(pa, pb),
                    (
                        Node::Split { feature: fa, left: la, right: ra, .. },
                        Node::Split { feature: fb, left: lb, right: rb, .. },
                    ) => {
                        assert_eq!(fa, fb);
                        assert_eq!(la, lb);
                        assert_eq!(ra, rb);
                    }
                    _ => panic!("tree shapes diverged"),
                }
            }
        }
    }

    #[test]
    fn monotone_transform_preserves_structure() {
        // A nonlinear strictly increasing transform keeps every split
        // feature, the topology, and the induced training partition
        // (hence leaf probabilities) identical.
        let data = noisy_dataset(8, 150, 6, Some(1));
        let mut config = ForestConfig::new(17);
        config.n_trees = 25;
        let base = train(&data, &config).unwrap();
        let mapped = train(&transform_column(&data, 1, f64::exp), &config).unwrap();
        assert_same_shape(&base, &mapped);

        // Doubling is exact in floating point, so midpoints map onto
        // midpoints and even the predictions match bitwise.
        let doubled_data = transform_column(&data, 1, |x| 2.0 * x);
        let doubled = train(&doubled_data, &config).unwrap();
        assert_same_shape(&base, &doubled);
        for r in 0..data.n_rows() {
            let pa = base.predict(data.row(r)).unwrap();
            let pb = doubled.predict(doubled_data.row(r)).unwrap();
            assert_eq!(pa, pb);
        }
    }

    #[test]
    fn predict_contracts() {
        let data = one_dim_separable(20);
        let mut config = ForestConfig::new(1);
        config.n_trees = 5;
        let forest = train(&data, &config).unwrap();
        assert!(forest.predict(&[1.0, 2.0]).is_err());
        assert!(forest.predict(&[f64::NAN]).is_err());
        let (label, p1) = forest.predict(&[50.0]).unwrap();
        assert_eq!(label, 1);
        assert!(p1 >= 0.5);
    }

    #[test]
    fn single_class_training_rejected() {
        let rows: Vec<Vec<f64>> = (0..10).map(|i| vec![i as f64]).collect();
        let data = Dataset::new(rows, vec![1; 10], vec!["f0".into()]).unwrap();
        assert!(train(&data, &ForestConfig::new(0)).is_err());
    }

    #[test]
    fn tie_probability_goes_to_class_one() {
        // Two stumps disagreeing perfectly average to p = 0.5.
        let forest = Forest {
            schema_version: 1,
            config: ForestConfig::new(0),
            mtry_used: 1,
            feature_ids: vec!["f0".into()],
            registry_hash: None,
            importance: vec![1.0],
            oob_accuracy: None,
            trees: vec![
                Tree { nodes: vec![Node::Leaf { p1: 0.0 }] },
                Tree { nodes: vec![Node::Leaf { p1: 1.0 }] },
            ],
        };
        let (label, p1) = forest.predict(&[0.0]).unwrap();
        assert_eq!(p1, 0.5);
        assert_eq!(label, 1);
    }

    #[test]
    fn identical_leaf_probability_averages() {
        let forest = Forest {
            schema_version: 1,
            config: ForestConfig::new(0),
            mtry_used: 1,
            feature_ids: vec!["f0".into()],
            registry_hash: None,
            importance: vec![1.0],
            oob_accuracy: None,
            trees: vec![Tree { nodes: vec![Node::Leaf { p1: 0.8 }] }; 3],
        };
        let (label, p1) = forest.predict(&[0.0]).unwrap();
        assert_relative_eq!(p1, 0.8);
        assert_eq!(label, 1);
    }

    #[test]
    fn save_load_predict_identical() {
        let data = noisy_dataset(14, 120, 8, Some(3));
        let mut config = ForestConfig::new(23);
        config.n_trees = 20;
        let forest = train(&data, &config).unwrap();
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("model.json");
        forest.save_json(&path).unwrap();
        let loaded = Forest::load_json(&path).unwrap();
        assert_eq!(forest, loaded);
        for r in 0..data.n_rows() {
            assert_eq!(forest.predict(data.row(r)).unwrap(), loaded.predict(data.row(r)).unwrap());
        }
    }

    #[test]
    fn random_classifier_behaviour() {
        let all_zero = random_classifier(0.0, 100, 1).unwrap();
        assert!(all_zero.iter().all(|&l| l == 0));
        let a = random_classifier(0.5, 10_000, 2).unwrap();
        let b = random_classifier(0.5, 10_000, 2).unwrap();
        assert_eq!(a, b);
        let ones = a.iter().filter(|&&l| l == 1).count() as f64 / 10_000.0;
        assert!((ones - 0.5).abs() < 0.02, "proportion = {ones}");
        // Accuracy against a balanced truth sits at 50% +/- 2%.
        let truth: Vec<u8> = (0..10_000).map(|i| (i % 2) as u8).collect();
        let hits = a.iter().zip(&truth).filter(|(g, t)| g == t).count() as f64 / 10_000.0;
        assert!((hits - 0.5).abs() < 0.02, "accuracy = {hits}");
    }
}
