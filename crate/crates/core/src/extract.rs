//! Whole-instance feature extraction and the feature-matrix CSV.
//!
//! An instance yields one registry-aligned feature vector. By default
//! instances missing any of the five tests are rejected (listed with a
//! reason); with `require_all_tests` off they pass through with the 0.0
//! sentinel in the absent blocks and a `missing:<test>` flag.
//!
//! The matrix CSV starts with participant_id, started_at, label, flags,
//! followed by one column per registry feature in registry order.

use std::path::Path;

use chrono::{DateTime, FixedOffset};
use rayon::prelude::*;

use crate::accel::extract_accel_features;
use crate::error::{Error, Result};
use crate::registry::{FeatureVector, Registry};
use crate::tap::{extract_reaction_features, extract_tap_features};
use crate::types::{ActiveTestInstance, Label};
use crate::voice::extract_voice_features;

#[derive(Debug, Clone, Copy)]
pub struct ExtractOptions {
    /// Reject instances that lack any of the five tests.
    pub require_all_tests: bool,
}

impl Default for ExtractOptions {
    fn default() -> Self {
        ExtractOptions { require_all_tests: true }
    }
}

/// One extracted row.
#[derive(Debug, Clone)]
pub struct ExtractedInstance {
    pub participant_id: String,
    pub started_at: DateTime<FixedOffset>,
    pub label: Label,
    pub features: FeatureVector,
}

/// An instance that could not be extracted, with its input position.
#[derive(Debug, Clone)]
pub struct ExtractionFailure {
    pub index: usize,
    pub participant_id: String,
    pub reason: String,
}

fn set_block(
    vector: &mut FeatureVector,
    registry: &Registry,
    ids: &[String],
    values: &[f64],
) -> Result<()> {
    for (id, &value) in ids.iter().zip(values) {
        let ordinal = registry
            .index_of(id)
            .ok_or_else(|| Error::internal(format!("feature {id} missing from registry")))?;
        vector.set(ordinal, value)?;
    }
    Ok(())
}

/// Extract one instance into a registry-aligned vector.
pub fn extract_instance(
    instance: &ActiveTestInstance,
    registry: &Registry,
    options: ExtractOptions,
) -> Result<FeatureVector> {
    if options.require_all_tests && !instance.has_all_tests() {
        let missing: Vec<&str> = [
            ("voice", instance.voice.is_none()),
            ("balance", instance.balance.is_none()),
            ("gait", instance.gait.is_none()),
            ("dexterity", instance.dexterity.is_none()),
            ("reaction", instance.reaction.is_none()),
        ]
        .iter()
        .filter(|(_, absent)| *absent)
        .map(|(name, _)| *name)
        .collect();
        return Err(Error::contract(format!("missing tests: {}", missing.join(", "))));
    }

    let mut vector = FeatureVector::empty(registry);

    match &instance.voice {
        Some(audio) => {
            let block = extract_voice_features(audio).map_err(|e| Error::contract(format!("voice: {e}")))?;
            set_block(&mut vector, registry, &block.ids, &block.values)?;
            block.flags.into_iter().for_each(|f| vector.add_flag(f));
        }
        None => vector.add_flag("missing:voice"),
    }
    for (series, name) in [(&instance.balance, "balance"), (&instance.gait, "gait")] {
        match series {
            Some(s) => {
                let block = extract_accel_features(s).map_err(|e| Error::contract(format!("{name}: {e}")))?;
                set_block(&mut vector, registry, &block.ids, &block.values)?;
                block.flags.into_iter().for_each(|f| vector.add_flag(f));
            }
            None => vector.add_flag(format!("missing:{name}")),
        }
    }
    match &instance.dexterity {
        Some(session) => {
            let block = extract_tap_features(session).map_err(|e| Error::contract(format!("dexterity: {e}")))?;
            set_block(&mut vector, registry, &block.ids, &block.values)?;
            block.flags.into_iter().for_each(|f| vector.add_flag(f));
        }
        None => vector.add_flag("missing:dexterity"),
    }
    match &instance.reaction {
        Some(session) => {
            let block = extract_reaction_features(session).map_err(|e| Error::contract(format!("reaction: {e}")))?;
            set_block(&mut vector, registry, &block.ids, &block.values)?;
            block.flags.into_iter().for_each(|f| vector.add_flag(f));
        }
        None => vector.add_flag("missing:reaction"),
    }

    Ok(vector)
}

/// Extract a batch in parallel, preserving input order.
pub fn extract_instances(
    instances: &[ActiveTestInstance],
    registry: &Registry,
    options: ExtractOptions,
) -> (Vec<ExtractedInstance>, Vec<ExtractionFailure>) {
    let results: Vec<(usize, Result<FeatureVector>)> = instances
        .par_iter()
        .enumerate()
        .map(|(i, inst)| (i, extract_instance(inst, registry, options)))
        .collect();

    let mut rows = Vec::new();
    let mut failures = Vec::new();
    for (i, res) in results {
        let inst = &instances[i];
        match res {
            Ok(features) => rows.push(ExtractedInstance {
                participant_id: inst.participant_id.clone(),
                started_at: inst.started_at,
                label: inst.label,
                features,
            }),
            Err(e) => failures.push(ExtractionFailure {
                index: i,
                participant_id: inst.participant_id.clone(),
                reason: e.to_string(),
            }),
        }
    }
    (rows, failures)
}

/// One parsed row of a feature-matrix CSV.
#[derive(Debug, Clone)]
pub struct MatrixRow {
    pub participant_id: String,
    pub started_at: DateTime<FixedOffset>,
    pub label: Label,
    pub flags: Vec<String>,
    pub values: Vec<f64>,
}

const META_COLUMNS: [&str; 4] = ["participant_id", "started_at", "label", "flags"];

/// Write extracted rows as the feature-matrix CSV.
pub fn write_matrix_csv(
    path: &Path,
    registry: &Registry,
    rows: &[ExtractedInstance],
) -> Result<()> {
    let mut w = csv::Writer::from_path(path)?;
    let mut header: Vec<&str> = META_COLUMNS.to_vec();
    header.extend(registry.ids());
    w.write_record(&header)?;
    for row in rows {
        let mut record: Vec<String> = vec![
            row.participant_id.clone(),
            row.started_at.to_rfc3339(),
            row.label.as_str().to_string(),
            row.features.flags().join(";"),
        ];
        record.extend(row.features.dense().iter().map(|v| v.to_string()));
        w.write_record(&record)?;
    }
    w.flush()?;
    Ok(())
}

/// Read a feature-matrix CSV, checking the header against the registry.
pub fn read_matrix_csv(path: &Path, registry: &Registry) -> Result<Vec<MatrixRow>> {
    let mut r = csv::Reader::from_path(path)
        .map_err(|e| Error::input(format!("cannot open {}: {e}", path.display())))?;
    let header = r.headers().map_err(|e| Error::input(format!("bad CSV header: {e}")))?.clone();
    let expected: Vec<&str> = META_COLUMNS.iter().copied().chain(registry.ids()).collect();
    if header.len() != expected.len() || header.iter().zip(&expected).any(|(a, b)| a != *b) {
        return Err(Error::input(
            "feature CSV header does not match the feature registry (wrong registry version?)",
        ));
    }

    let mut rows = Vec::new();
    for (i, record) in r.records().enumerate() {
        let record = record.map_err(|e| Error::input(format!("CSV row {}: {e}", i + 2)))?;
        let started_at = DateTime::parse_from_rfc3339(&record[1])
            .map_err(|e| Error::input(format!("CSV row {}: bad started_at: {e}", i + 2)))?;
        let label = Label::parse(&record[2])
            .map_err(|e| Error::input(format!("CSV row {}: {e}", i + 2)))?;
        let flags: Vec<String> = if record[3].is_empty() {
            Vec::new()
        } else {
            record[3].split(';').map(str::to_string).collect()
        };
        let mut values = Vec::with_capacity(registry.len());
        for (j, field) in record.iter().enumerate().skip(META_COLUMNS.len()) {
            let v: f64 = field.parse().map_err(|_| {
                Error::input(format!("CSV row {}: column {} is not a number", i + 2, j + 1))
            })?;
            if !v.is_finite() {
                return Err(Error::input(format!(
                    "CSV row {}: non-finite feature value",
                    i + 2
                )));
            }
            values.push(v);
        }
        rows.push(MatrixRow {
            participant_id: record[0].to_string(),
            started_at,
            label,
            flags,
            values,
        });
    }
    Ok(rows)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::testutil::complete_instance;

    #[test]
    fn complete_instance_extracts_full_vector() {
        let registry = Registry::standard();
        let inst = complete_instance(7, Label::Baseline);
        let vec = extract_instance(&inst, &registry, ExtractOptions::default()).unwrap();
        assert!(vec.is_complete());
        assert_eq!(vec.dense().len(), registry.len());
    }

    #[test]
    fn missing_test_rejected_by_default_allowed_when_relaxed() {
        let registry = Registry::standard();
        let mut inst = complete_instance(8, Label::Baseline);
        inst.voice = None;
        let strict = extract_instance(&inst, &registry, ExtractOptions::default());
        assert!(strict.is_err());
        assert!(strict.unwrap_err().to_string().contains("voice"));

        let relaxed =
            extract_instance(&inst, &registry, ExtractOptions { require_all_tests: false })
                .unwrap();
        assert!(!relaxed.is_complete());
        assert!(relaxed.flags().iter().any(|f| f == "missing:voice"));
        let ord = registry.index_of("voice_F0").unwrap();
        assert_eq!(relaxed.get(ord), None);
        assert_eq!(relaxed.dense()[ord], 0.0);
    }

    #[test]
    fn matrix_csv_roundtrip() {
        let registry = Registry::standard();
        let instances: Vec<_> = (0..3)
            .map(|i| complete_instance(i, if i % 2 == 0 { Label::Baseline } else { Label::Treatment }))
            .collect();
        let (rows, failures) = extract_instances(&instances, &registry, ExtractOptions::default());
        assert!(failures.is_empty());
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("features.csv");
        write_matrix_csv(&path, &registry, &rows).unwrap();
        let parsed = read_matrix_csv(&path, &registry).unwrap();
        assert_eq!(parsed.len(), 3);
        for (orig, read) in rows.iter().zip(&parsed) {
            assert_eq!(orig.participant_id, read.participant_id);
            assert_eq!(orig.label, read.label);
            for (a, b) in orig.features.dense().iter().zip(&read.values) {
                assert_eq!(a, b, "values must round-trip exactly");
            }
        }
    }

    #[test]
    fn header_mismatch_detected() {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("bad.csv");
        std::fs::write(&path, "participant_id,started_at,label,flags,bogus\n").unwrap();
        assert!(read_matrix_csv(&path, &Registry::standard()).is_err());
    }
}
