//! Repeated k-fold cross-validation with performance metrics.
//!
//! Each repetition permutes the instances with its own seeded stream,
//! splits them into near-equal folds (sizes differ by at most one),
//! trains a forest on nine folds and validates on the tenth, pooling one
//! confusion matrix per repetition. Aggregates are mean ± sample std
//! across repetitions. A seeded random classifier runs alongside as the
//! null, and the forest-vs-random accuracy distributions get a
//! Kolmogorov-Smirnov comparison.
//!
//! Folds are unstratified by default per the study design; stratified
//! and pair-grouped partitions are available as options. Repetitions are
//! parallel; reductions happen in repetition order so results are
//! independent of thread count.

use std::collections::BTreeMap;

use rand::seq::SliceRandom;
use rand::Rng;
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::forest::{train_subset, Dataset, ForestConfig};
use crate::ks::{ks_two_sample, KsResult};
use crate::rng::{domain, mix, stream_rng};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct ConfusionMatrix {
    /// Treatment instances predicted treatment.
    pub tp: u64,
    /// Baseline instances predicted treatment.
    pub fp: u64,
    /// Baseline instances predicted baseline.
    pub tn: u64,
    /// Treatment instances predicted baseline.
    #[serde(rename = "fn")]
    pub fneg: u64,
}

impl ConfusionMatrix {
    pub fn total(&self) -> u64 {
        self.tp + self.fp + self.tn + self.fneg
    }

    pub fn record(&mut self, truth: u8, predicted: u8) {
        match (truth, predicted) {
            (1, 1) => self.tp += 1,
            (0, 1) => self.fp += 1,
            (0, 0) => self.tn += 1,
            (1, 0) => self.fneg += 1,
            _ => unreachable!("binary labels only"),
        }
    }

    pub fn empty() -> Self {
        ConfusionMatrix { tp: 0, fp: 0, tn: 0, fneg: 0 }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Metrics {
    pub sensitivity: f64,
    pub specificity: f64,
    pub accuracy: f64,
}

/// Sensitivity = TP/(TP+FN), specificity = TN/(TN+FP),
/// accuracy = (TP+TN)/total.
pub fn metrics(cm: &ConfusionMatrix) -> Result<Metrics> {
    let positives = cm.tp + cm.fneg;
    let negatives = cm.tn + cm.fp;
    if positives == 0 || negatives == 0 {
        return Err(Error::contract("metrics: empty positive or negative stratum"));
    }
    Ok(Metrics {
        sensitivity: cm.tp as f64 / positives as f64,
        specificity: cm.tn as f64 / negatives as f64,
        accuracy: (cm.tp + cm.tn) as f64 / cm.total() as f64,
    })
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Aggregate {
    pub mean: f64,
    pub std: f64,
}

impl Aggregate {
    pub fn from_values(values: &[f64]) -> Aggregate {
        let n = values.len() as f64;
        let mean = values.iter().sum::<f64>() / n;
        let std = if values.len() >= 2 {
            (values.iter().map(|v| (v - mean) * (v - mean)).sum::<f64>() / (n - 1.0)).sqrt()
        } else {
            0.0
        };
        Aggregate { mean, std }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CvConfig {
    pub folds: usize,
    pub repetitions: usize,
    pub seed: u64,
    pub n_trees: usize,
    pub mtry: Option<usize>,
    pub min_split: usize,
    pub max_depth: Option<usize>,
    /// Stratify folds by class (off by default, matching the protocol).
    pub stratified: bool,
    /// Keep rows sharing a group key inside one fold (off by default).
    pub group_pairs: bool,
}

impl CvConfig {
    pub fn new(seed: u64) -> Self {
        CvConfig {
            folds: 10,
            repetitions: 100,
            seed,
            n_trees: 500,
            mtry: None,
            min_split: 2,
            max_depth: None,
            stratified: false,
            group_pairs: false,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RepetitionResult {
    pub cm: ConfusionMatrix,
    pub sensitivity: f64,
    pub specificity: f64,
    pub accuracy: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ParticipantAccuracy {
    pub participant_id: String,
    pub n_instances: usize,
    pub accuracy: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CvResult {
    pub folds: usize,
    pub repetitions: usize,
    pub per_repetition: Vec<RepetitionResult>,
    pub sensitivity: Aggregate,
    pub specificity: Aggregate,
    pub accuracy: Aggregate,
    /// Per-repetition accuracy of the seeded random classifier.
    pub random_accuracy: Vec<f64>,
    pub random_aggregate: Aggregate,
    /// KS comparison of forest vs random per-repetition accuracies.
    pub ks_forest_vs_random: KsResult,
    /// Importance averaged over every trained forest.
    pub importance: Vec<f64>,
    pub per_participant: Vec<ParticipantAccuracy>,
}

/// Permute 0..n and cut into `folds` near-equal contiguous chunks.
pub fn fold_partition(n: usize, folds: usize, rng: &mut ChaCha8Rng) -> Vec<Vec<u32>> {
    let mut order: Vec<u32> = (0..n as u32).collect();
    order.shuffle(rng);
    chunk_even(&order, folds)
}

fn chunk_even(order: &[u32], folds: usize) -> Vec<Vec<u32>> {
    let n = order.len();
    let base = n / folds;
    let rem = n % folds;
    let mut out = Vec::with_capacity(folds);
    let mut at = 0usize;
    for k in 0..folds {
        let size = base + usize::from(k < rem);
        out.push(order[at..at + size].to_vec());
        at += size;
    }
    out
}

/// Per-class permutation dealt round-robin across folds.
pub fn stratified_partition(labels: &[u8], folds: usize, rng: &mut ChaCha8Rng) -> Vec<Vec<u32>> {
    let mut out = vec![Vec::new(); folds];
    for class in [0u8, 1u8] {
        let mut idx: Vec<u32> = (0..labels.len() as u32)
            .filter(|&i| labels[i as usize] == class)
            .collect();
        idx.shuffle(rng);
        for (k, &i) in idx.iter().enumerate() {
            out[k % folds].push(i);
        }
    }
    out
}

/// Groups permuted, then greedily assigned to the currently smallest fold.
pub fn grouped_partition(groups: &[String], folds: usize, rng: &mut ChaCha8Rng) -> Vec<Vec<u32>> {
    let mut by_group: BTreeMap<&str, Vec<u32>> = BTreeMap::new();
    for (i, g) in groups.iter().enumerate() {
        by_group.entry(g.as_str()).or_default().push(i as u32);
    }
    let mut keys: Vec<&str> = by_group.keys().copied().collect();
    keys.shuffle(rng);
    let mut out = vec![Vec::new(); folds];
    for key in keys {
        let smallest = (0..folds).min_by_key(|&k| out[k].len()).unwrap();
        out[smallest].extend(&by_group[key]);
    }
    out
}

struct RepOutput {
    result: RepetitionResult,
    random_accuracy: f64,
    importance: Vec<f64>,
    /// 1 per row validated correctly this repetition.
    row_hits: Vec<u8>,
}

fn run_repetition(
    data: &Dataset,
    groups: Option<&[String]>,
    config: &CvConfig,
    rep: usize,
) -> Result<RepOutput> {
    let n = data.n_rows();
    let mut rng = stream_rng(config.seed, domain::CV_PERMUTATION, rep as u64);
    let partition = if config.group_pairs {
        grouped_partition(groups.expect("checked by caller"), config.folds, &mut rng)
    } else if config.stratified {
        stratified_partition(data.labels(), config.folds, &mut rng)
    } else {
        fold_partition(n, config.folds, &mut rng)
    };

    let mut cm = ConfusionMatrix::empty();
    let mut importance = vec![0.0; data.n_cols()];
    let mut row_hits = vec![0u8; n];
    for (k, validation) in partition.iter().enumerate() {
        let in_validation: Vec<bool> = {
            let mut mask = vec![false; n];
            for &i in validation {
                mask[i as usize] = true;
            }
            mask
        };
        let train_rows: Vec<u32> =
            (0..n as u32).filter(|&i| !in_validation[i as usize]).collect();
        let forest_config = ForestConfig {
            n_trees: config.n_trees,
            mtry: config.mtry,
            min_split: config.min_split,
            max_depth: config.max_depth,
            seed: mix(config.seed, rep as u64, k as u64),
        };
        let forest = train_subset(data, &train_rows, &forest_config)?;
        for (dst, src) in importance.iter_mut().zip(&forest.importance) {
            *dst += src;
        }
        for &i in validation {
            let truth = data.labels()[i as usize];
            let (predicted, _) = forest.predict(data.row(i as usize))?;
            cm.record(truth, predicted);
            if predicted == truth {
                row_hits[i as usize] = 1;
            }
        }
    }
    if cm.total() != n as u64 {
        return Err(Error::internal("cv: folds did not cover every instance exactly once"));
    }
    for v in &mut importance {
        *v /= config.folds as f64;
    }

    // Random-classifier null on the same validated instances.
    let (_, ones) = data.class_counts();
    let p1 = ones as f64 / n as f64;
    let mut null_rng = stream_rng(config.seed, domain::RANDOM_CLASSIFIER, rep as u64);
    let hits = data
        .labels()
        .iter()
        .filter(|&&truth| {
            let guess = (null_rng.gen_range(0.0..1.0) < p1) as u8;
            guess == truth
        })
        .count();
    let random_accuracy = hits as f64 / n as f64;

    let m = metrics(&cm)?;
    Ok(RepOutput {
        result: RepetitionResult {
            cm,
            sensitivity: m.sensitivity,
            specificity: m.specificity,
            accuracy: m.accuracy,
        },
        random_accuracy,
        importance,
        row_hits,
    })
}

/// Run the full repeated-CV experiment.
///
/// `participants`, when given, must align with dataset rows and enables
/// the per-participant accuracy table. `groups` must be given when
/// `config.group_pairs` is set.
pub fn repeated_cv(
    data: &Dataset,
    participants: Option<&[String]>,
    groups: Option<&[String]>,
    config: &CvConfig,
) -> Result<CvResult> {
    let n = data.n_rows();
    if config.folds < 2 {
        return Err(Error::contract("cv: need at least 2 folds"));
    }
    if n < config.folds {
        return Err(Error::contract(format!(
            "cv: {n} instances cannot fill {} folds",
            config.folds
        )));
    }
    if config.repetitions == 0 {
        return Err(Error::contract("cv: need at least 1 repetition"));
    }
    let (zeros, ones) = data.class_counts();
    if zeros == 0 || ones == 0 {
        return Err(Error::contract("cv: both classes must be present"));
    }
    if let Some(p) = participants {
        if p.len() != n {
            return Err(Error::contract("cv: participants not aligned with rows"));
        }
    }
    if config.group_pairs {
        match groups {
            None => return Err(Error::contract("cv: group_pairs set but no groups given")),
            Some(g) if g.len() != n => {
                return Err(Error::contract("cv: groups not aligned with rows"))
            }
            _ => {}
        }
    }

    let outputs: Vec<Result<RepOutput>> = (0..config.repetitions)
        .into_par_iter()
        .map(|rep| run_repetition(data, groups, config, rep))
        .collect();

    let mut per_repetition = Vec::with_capacity(config.repetitions);
    let mut random_accuracy = Vec::with_capacity(config.repetitions);
    let mut importance = vec![0.0; data.n_cols()];
    let mut hits = vec![0u64; n];
    for out in outputs {
        let out = out?;
        per_repetition.push(out.result);
        random_accuracy.push(out.random_accuracy);
        for (dst, src) in importance.iter_mut().zip(&out.importance) {
            *dst += src;
        }
        for (h, &hit) in hits.iter_mut().zip(&out.row_hits) {
            *h += hit as u64;
        }
    }
    for v in &mut importance {
        *v /= config.repetitions as f64;
    }

    let sens: Vec<f64> = per_repetition.iter().map(|r| r.sensitivity).collect();
    let spec: Vec<f64> = per_repetition.iter().map(|r| r.specificity).collect();
    let acc: Vec<f64> = per_repetition.iter().map(|r| r.accuracy).collect();

    let per_participant = match participants {
        None => Vec::new(),
        Some(pids) => {
            let mut tally: BTreeMap<&str, (u64, usize)> = BTreeMap::new();
            for (i, pid) in pids.iter().enumerate() {
                let entry = tally.entry(pid.as_str()).or_insert((0, 0));
                entry.0 += hits[i];
                entry.1 += 1;
            }
            tally
                .into_iter()
                .map(|(pid, (h, count))| ParticipantAccuracy {
                    participant_id: pid.to_string(),
                    n_instances: count,
                    accuracy: h as f64 / (count as u64 * config.repetitions as u64) as f64,
                })
                .collect()
        }
    };

    let ks_forest_vs_random = ks_two_sample(&acc, &random_accuracy)?;

    Ok(CvResult {
        folds: config.folds,
        repetitions: config.repetitions,
        per_repetition,
        sensitivity: Aggregate::from_values(&sens),
        specificity: Aggregate::from_values(&spec),
        accuracy: Aggregate::from_values(&acc),
        random_aggregate: Aggregate::from_values(&random_accuracy),
        random_accuracy,
        ks_forest_vs_random,
        importance,
        per_participant,
    })
}
