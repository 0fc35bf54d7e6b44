//! Evaluation report assembly and flat-file emission.
//!
//! The report JSON carries the effective configuration, dataset summary,
//! per-repetition CV metrics, the importance ranking in feature-table
//! form (id, test, description), per-participant accuracy, and the
//! per-feature baseline→treatment difference medians. Raw per-pair
//! differences go to CSV for external density plotting. Nothing in the
//! report depends on wall-clock state, so identical inputs and seeds
//! produce byte-identical files.

use std::collections::BTreeMap;
use std::path::Path;

use chrono::{DateTime, FixedOffset};
use serde::{Deserialize, Serialize};

use crate::cv::CvResult;
use crate::error::{Error, Result};
use crate::extract::MatrixRow;
use crate::forest::Dataset;
use crate::led::QuadraticFit;
use crate::registry::Registry;
use crate::types::Label;

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct DatasetSummary {
    pub n_instances: usize,
    pub n_features: usize,
    pub n_baseline: usize,
    pub n_treatment: usize,
    pub skipped_unlabeled: usize,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct ImportanceEntry {
    pub rank: usize,
    pub feature_id: String,
    pub test: String,
    pub description: String,
    pub importance: f64,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct FeatureDiffMedian {
    pub feature_id: String,
    pub median_diff: f64,
    pub n_pairs: usize,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct EvaluationReport {
    pub schema_version: u32,
    /// Effective configuration echo (flags > config file > defaults).
    pub config: serde_json::Value,
    pub registry_hash: String,
    pub dataset: DatasetSummary,
    pub cv: CvResult,
    pub importance_ranking: Vec<ImportanceEntry>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub feature_diff_medians: Option<Vec<FeatureDiffMedian>>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub led_fit: Option<QuadraticFit>,
}

/// Rows bridged into training form. Unlabeled rows are dropped and
/// counted; group keys are `participant:local-date` for the pair-grouped
/// CV option.
pub struct LabeledData {
    pub dataset: Dataset,
    pub participants: Vec<String>,
    pub started_at: Vec<DateTime<FixedOffset>>,
    pub groups: Vec<String>,
    pub skipped_unlabeled: usize,
}

pub fn labeled_dataset(rows: &[MatrixRow], registry: &Registry) -> Result<LabeledData> {
    let mut matrix = Vec::new();
    let mut labels = Vec::new();
    let mut participants = Vec::new();
    let mut started_at = Vec::new();
    let mut groups = Vec::new();
    let mut skipped = 0usize;
    for row in rows {
        let label = match row.label {
            Label::Baseline => 0u8,
            Label::Treatment => 1u8,
            Label::Unlabeled => {
                skipped += 1;
                continue;
            }
        };
        matrix.push(row.values.clone());
        labels.push(label);
        participants.push(row.participant_id.clone());
        started_at.push(row.started_at);
        groups.push(format!("{}:{}", row.participant_id, row.started_at.date_naive()));
    }
    if matrix.len() < 2 {
        return Err(Error::contract(format!(
            "only {} labeled instances after dropping {skipped} unlabeled",
            matrix.len()
        )));
    }
    let ids: Vec<String> = registry.ids().iter().map(|s| s.to_string()).collect();
    Ok(LabeledData {
        dataset: Dataset::new(matrix, labels, ids)?,
        participants,
        started_at,
        groups,
        skipped_unlabeled: skipped,
    })
}

pub fn importance_ranking(registry: &Registry, importance: &[f64]) -> Vec<ImportanceEntry> {
    let mut ranked: Vec<(usize, f64)> = importance.iter().copied().enumerate().collect();
    ranked.sort_by(|a, b| b.1.partial_cmp(&a.1).unwrap().then(a.0.cmp(&b.0)));
    ranked
        .into_iter()
        .enumerate()
        .map(|(rank, (ordinal, value))| {
            let def = registry.def(ordinal);
            ImportanceEntry {
                rank: rank + 1,
                feature_id: def.id.clone(),
                test: def.test.clone(),
                description: def.description.clone(),
                importance: value,
            }
        })
        .collect()
}

/// One matched pair's feature differences (treatment − baseline).
#[derive(Debug, Clone)]
pub struct PairDiff {
    pub participant_id: String,
    pub baseline_started_at: DateTime<FixedOffset>,
    pub diffs: Vec<f64>,
}

pub struct FeatureDiffs {
    pub pairs: Vec<PairDiff>,
    pub medians: Vec<FeatureDiffMedian>,
}

/// Match rows into (baseline, treatment) pairs by participant and local
/// calendar day; days without exactly one of each are skipped.
pub fn compute_feature_diffs(rows: &[MatrixRow], registry: &Registry) -> FeatureDiffs {
    type DayGroups<'a> = BTreeMap<(String, chrono::NaiveDate), (Vec<&'a MatrixRow>, Vec<&'a MatrixRow>)>;
    let mut by_day: DayGroups = BTreeMap::new();
    for row in rows {
        let key = (row.participant_id.clone(), row.started_at.date_naive());
        let entry = by_day.entry(key).or_default();
        match row.label {
            Label::Baseline => entry.0.push(row),
            Label::Treatment => entry.1.push(row),
            Label::Unlabeled => {}
        }
    }

    let mut pairs = Vec::new();
    for ((pid, _), (bases, treats)) in &by_day {
        if let ([base], [treat]) = (bases.as_slice(), treats.as_slice()) {
            let diffs = treat
                .values
                .iter()
                .zip(&base.values)
                .map(|(t, b)| t - b)
                .collect();
            pairs.push(PairDiff {
                participant_id: pid.clone(),
                baseline_started_at: base.started_at,
                diffs,
            });
        }
    }

    let medians = (0..registry.len())
        .map(|ordinal| {
            let mut vals: Vec<f64> = pairs.iter().map(|p| p.diffs[ordinal]).collect();
            vals.sort_unstable_by(|a, b| a.partial_cmp(b).unwrap());
            let median = if vals.is_empty() {
                0.0
            } else {
                crate::stats::quantile_sorted(&vals, 0.5)
            };
            FeatureDiffMedian {
                feature_id: registry.def(ordinal).id.clone(),
                median_diff: median,
                n_pairs: vals.len(),
            }
        })
        .collect();

    FeatureDiffs { pairs, medians }
}

pub fn write_report_json(path: &Path, report: &EvaluationReport) -> Result<()> {
    let file = std::fs::File::create(path)?;
    serde_json::to_writer_pretty(std::io::BufWriter::new(file), report)
        .map_err(|e| Error::internal(format!("report serialization failed: {e}")))?;
    Ok(())
}

pub fn read_report_json(path: &Path) -> Result<EvaluationReport> {
    let file = std::fs::File::open(path)
        .map_err(|e| Error::input(format!("cannot open report {}: {e}", path.display())))?;
    serde_json::from_reader(std::io::BufReader::new(file))
        .map_err(|e| Error::input(format!("invalid report file: {e}")))
}

pub fn write_metrics_csv(path: &Path, cv: &CvResult) -> Result<()> {
    let mut w = csv::Writer::from_path(path)?;
    w.write_record([
        "repetition",
        "tp",
        "fp",
        "tn",
        "fn",
        "sensitivity",
        "specificity",
        "accuracy",
        "random_accuracy",
    ])?;
    for (i, rep) in cv.per_repetition.iter().enumerate() {
        w.write_record([
            i.to_string(),
            rep.cm.tp.to_string(),
            rep.cm.fp.to_string(),
            rep.cm.tn.to_string(),
            rep.cm.fneg.to_string(),
            rep.sensitivity.to_string(),
            rep.specificity.to_string(),
            rep.accuracy.to_string(),
            cv.random_accuracy[i].to_string(),
        ])?;
    }
    w.flush()?;
    Ok(())
}

pub fn write_importance_csv(path: &Path, ranking: &[ImportanceEntry]) -> Result<()> {
    let mut w = csv::Writer::from_path(path)?;
    w.write_record(["rank", "feature_id", "test", "description", "importance"])?;
    for e in ranking {
        w.write_record([
            e.rank.to_string(),
            e.feature_id.clone(),
            e.test.clone(),
            e.description.clone(),
            e.importance.to_string(),
        ])?;
    }
    w.flush()?;
    Ok(())
}

pub fn write_participants_csv(
    path: &Path,
    cv: &CvResult,
    led_by_participant: Option<&BTreeMap<String, f64>>,
) -> Result<()> {
    let mut w = csv::Writer::from_path(path)?;
    w.write_record(["participant_id", "n_instances", "accuracy", "daily_led_mg"])?;
    for p in &cv.per_participant {
        let led = led_by_participant
            .and_then(|m| m.get(&p.participant_id))
            .map(|v| v.to_string())
            .unwrap_or_default();
        w.write_record([
            p.participant_id.clone(),
            p.n_instances.to_string(),
            p.accuracy.to_string(),
            led,
        ])?;
    }
    w.flush()?;
    Ok(())
}

pub fn write_diffs_csv(path: &Path, registry: &Registry, diffs: &FeatureDiffs) -> Result<()> {
    let mut w = csv::Writer::from_path(path)?;
    w.write_record(["feature_id", "participant_id", "baseline_started_at", "diff"])?;
    for (ordinal, def) in registry.features().iter().enumerate() {
        for pair in &diffs.pairs {
            w.write_record([
                def.id.clone(),
                pair.participant_id.clone(),
                pair.baseline_started_at.to_rfc3339(),
                pair.diffs[ordinal].to_string(),
            ])?;
        }
    }
    w.flush()?;
    Ok(())
}
