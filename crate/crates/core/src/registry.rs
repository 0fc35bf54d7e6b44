//! The canonical feature registry.
//!
//! Feature ids follow `<test>_<axis>_<stat>` for per-axis acceleration
//! features (`gait_y_AMP`), `<test>_<axisA><axisB>_<stat>` for pairwise
//! ones (`gait_xy_XCORR`), `voice_<stat>`, `tap_<STAY|MOVE>_<stat>`, and
//! `react_<stat>`. The registry fixes the id set and its order; feature
//! matrices, trained models, and reports all reference it through its
//! hash so mismatched artifacts fail loudly instead of silently
//! misaligning columns.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

pub const REGISTRY_VERSION: u32 = 1;

/// Per-axis acceleration statistics, in emission order.
pub const AXIS_STATS: [&str; 18] = [
    "mean", "std", "Q1", "Q3", "IQR", "median", "mode", "range", "skew", "kurt", "MSE", "En",
    "MCR", "DFC", "AMP", "meanTKEO", "AR1", "DFA",
];

/// Axes: raw x/y/z plus spherical radial distance, polar angle, azimuth.
pub const ACCEL_AXES: [&str; 6] = ["x", "y", "z", "r", "theta", "phi"];

/// Raw-axis pairs for the cross-axis statistics.
pub const AXIS_PAIRS: [(&str, &str); 3] = [("x", "y"), ("x", "z"), ("y", "z")];

pub const PAIR_STATS: [&str; 3] = ["XCORR", "MI", "xEn"];

/// Tapping-interval statistics (no DFC/AMP; AR1 present).
pub const TAP_STATS: [&str; 15] = [
    "mean", "std", "Q1", "Q3", "IQR", "median", "mode", "range", "skew", "kurt", "MSE", "En",
    "meanTKEO", "AR1", "DFA",
];

/// Reaction-lag statistics (sum added, AR1 absent).
pub const REACT_STATS: [&str; 15] = [
    "sum", "mean", "std", "Q1", "Q3", "IQR", "median", "mode", "range", "skew", "kurt", "MSE",
    "En", "meanTKEO", "DFA",
];

/// Voiced-run track summaries for the amplitude and pitch tracks.
pub const TRACK_STATS: [&str; 8] =
    ["mean", "std", "DFA", "lin0", "lin1", "quad0", "quad1", "quad2"];

#[derive(Debug, Clone, Serialize, Deserialize, PartialEq)]
pub struct FeatureDef {
    pub ordinal: usize,
    pub id: String,
    pub test: String,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub axis: Option<String>,
    pub stat: String,
    pub description: String,
}

/// The ordered feature registry.
#[derive(Debug, Clone)]
pub struct Registry {
    features: Vec<FeatureDef>,
    index: std::collections::HashMap<String, usize>,
}

fn stat_phrase(stat: &str) -> &'static str {
    match stat {
        "mean" => "mean",
        "sum" => "sum",
        "std" => "standard deviation",
        "Q1" => "25th percentile",
        "Q3" => "75th percentile",
        "IQR" => "inter-quartile range",
        "median" => "median",
        "mode" => "mode",
        "range" => "data range",
        "skew" => "skewness",
        "kurt" => "kurtosis",
        "MSE" => "mean squared energy",
        "En" => "entropy",
        "MCR" => "mean cross rate",
        "DFC" => "the dominant frequency",
        "AMP" => "the amplitude of the dominant frequency",
        "meanTKEO" => "mean TKEO",
        "AR1" => "lag-1 autocorrelation",
        "DFA" => "detrended fluctuation exponent",
        "XCORR" => "cross-correlation",
        "MI" => "mutual information",
        "xEn" => "cross-entropy",
        _ => "statistic",
    }
}

fn axis_phrase(axis: &str) -> String {
    match axis {
        "r" => "of the radial distances".to_string(),
        "theta" => "of the polar angles".to_string(),
        "phi" => "of the azimuth angles".to_string(),
        a => format!("on axis {a}"),
    }
}

pub fn voice_ids() -> Vec<String> {
    let mut ids = vec!["voice_Len".to_string()];
    for track in ["AMP", "F0"] {
        for stat in TRACK_STATS {
            ids.push(format!("voice_{track}_{stat}"));
        }
    }
    ids.push("voice_F0".to_string());
    ids
}

pub fn accel_ids(test: &str) -> Vec<String> {
    let mut ids = Vec::new();
    for axis in ACCEL_AXES {
        for stat in AXIS_STATS {
            ids.push(format!("{test}_{axis}_{stat}"));
        }
    }
    for (a, b) in AXIS_PAIRS {
        for stat in PAIR_STATS {
            ids.push(format!("{test}_{a}{b}_{stat}"));
        }
    }
    ids
}

pub fn tap_ids() -> Vec<String> {
    let mut ids = Vec::new();
    for group in ["STAY", "MOVE"] {
        for stat in TAP_STATS {
            ids.push(format!("tap_{group}_{stat}"));
        }
    }
    ids
}

pub fn react_ids() -> Vec<String> {
    REACT_STATS.iter().map(|s| format!("react_{s}")).collect()
}

fn voice_description(id: &str) -> String {
    match id {
        "voice_Len" => "voice duration in seconds".to_string(),
        "voice_F0" => "the dominant voice frequency".to_string(),
        _ => {
            let rest = id.strip_prefix("voice_").unwrap();
            let (track, stat) = rest.split_once('_').unwrap();
            let track_name = if track == "AMP" { "voice amplitude track" } else { "voice pitch track" };
            match stat {
                "lin0" => format!("linear-fit intercept of the {track_name}"),
                "lin1" => format!("linear-fit slope of the {track_name}"),
                "quad0" => format!("quadratic-fit constant term of the {track_name}"),
                "quad1" => format!("quadratic-fit linear term of the {track_name}"),
                "quad2" => format!("quadratic-fit curvature of the {track_name}"),
                s => format!("{} of the {track_name}", stat_phrase(s)),
            }
        }
    }
}

impl Registry {
    /// The full ordered registry: voice, balance, gait, dexterity,
    /// reaction blocks.
    pub fn standard() -> Registry {
        let mut features = Vec::new();
        let mut push = |id: String, test: &str, axis: Option<String>, stat: String, description: String| {
            features.push(FeatureDef {
                ordinal: features.len(),
                id,
                test: test.to_string(),
                axis,
                stat,
                description,
            });
        };

        for id in voice_ids() {
            let stat = id.strip_prefix("voice_").unwrap().to_string();
            let description = voice_description(&id);
            push(id, "voice", None, stat, description);
        }
        for test in ["balance", "gait"] {
            for axis in ACCEL_AXES {
                for stat in AXIS_STATS {
                    push(
                        format!("{test}_{axis}_{stat}"),
                        test,
                        Some(axis.to_string()),
                        stat.to_string(),
                        format!("{} {}", stat_phrase(stat), axis_phrase(axis)),
                    );
                }
            }
            for (a, b) in AXIS_PAIRS {
                for stat in PAIR_STATS {
                    push(
                        format!("{test}_{a}{b}_{stat}"),
                        test,
                        Some(format!("{a}{b}")),
                        stat.to_string(),
                        format!("{} between axes {a} and {b}", stat_phrase(stat)),
                    );
                }
            }
        }
        for group in ["STAY", "MOVE"] {
            let what = if group == "STAY" { "finger pressing intervals" } else { "finger movement intervals" };
            for stat in TAP_STATS {
                push(
                    format!("tap_{group}_{stat}"),
                    "dexterity",
                    None,
                    format!("{group}_{stat}"),
                    format!("{} of {what}", stat_phrase(stat)),
                );
            }
        }
        for stat in REACT_STATS {
            push(
                format!("react_{stat}"),
                "reaction",
                None,
                stat.to_string(),
                format!("{} of reaction lags", stat_phrase(stat)),
            );
        }

        let index = features.iter().map(|f| (f.id.clone(), f.ordinal)).collect();
        Registry { features, index }
    }

    pub fn features(&self) -> &[FeatureDef] {
        &self.features
    }

    pub fn len(&self) -> usize {
        self.features.len()
    }

    pub fn is_empty(&self) -> bool {
        self.features.is_empty()
    }

    pub fn ids(&self) -> Vec<&str> {
        self.features.iter().map(|f| f.id.as_str()).collect()
    }

    pub fn index_of(&self, id: &str) -> Option<usize> {
        self.index.get(id).copied()
    }

    pub fn def(&self, ordinal: usize) -> &FeatureDef {
        &self.features[ordinal]
    }

    /// FNV-1a fingerprint of the ordered id list; stored in models and
    /// reports to detect column misalignment.
    pub fn hash(&self) -> String {
        let mut h: u64 = 0xcbf2_9ce4_8422_2325;
        for f in &self.features {
            for b in f.id.as_bytes() {
                h ^= *b as u64;
                h = h.wrapping_mul(0x0000_0100_0000_01b3);
            }
            h ^= b'\n' as u64;
            h = h.wrapping_mul(0x0000_0100_0000_01b3);
        }
        format!("{h:016x}")
    }

    /// Versioned machine-readable manifest.
    pub fn manifest_json(&self) -> String {
        #[derive(Serialize)]
        struct Manifest<'a> {
            schema_version: u32,
            registry_version: u32,
            hash: String,
            features: &'a [FeatureDef],
        }
        serde_json::to_string_pretty(&Manifest {
            schema_version: 1,
            registry_version: REGISTRY_VERSION,
            hash: self.hash(),
            features: &self.features,
        })
        .expect("manifest serialization cannot fail")
    }
}

/// A feature vector aligned to the registry: absent tests leave `None`
/// slots; `flags` records quality notes ("missing:voice",
/// "tap_MOVE:short", ...).
#[derive(Debug, Clone, PartialEq)]
pub struct FeatureVector {
    values: Vec<Option<f64>>,
    flags: Vec<String>,
}

impl FeatureVector {
    pub fn empty(registry: &Registry) -> FeatureVector {
        FeatureVector { values: vec![None; registry.len()], flags: Vec::new() }
    }

    pub fn set(&mut self, ordinal: usize, value: f64) -> Result<()> {
        if !value.is_finite() {
            return Err(Error::internal(format!(
                "non-finite feature value at ordinal {ordinal}"
            )));
        }
        if self.values[ordinal].is_some() {
            return Err(Error::internal(format!("feature ordinal {ordinal} set twice")));
        }
        self.values[ordinal] = Some(value);
        Ok(())
    }

    pub fn get(&self, ordinal: usize) -> Option<f64> {
        self.values[ordinal]
    }

    pub fn values(&self) -> &[Option<f64>] {
        &self.values
    }

    /// Dense row with the 0.0 sentinel in missing slots.
    pub fn dense(&self) -> Vec<f64> {
        self.values.iter().map(|v| v.unwrap_or(0.0)).collect()
    }

    pub fn add_flag(&mut self, flag: impl Into<String>) {
        self.flags.push(flag.into());
    }

    pub fn flags(&self) -> &[String] {
        &self.flags
    }

    pub fn is_complete(&self) -> bool {
        self.values.iter().all(|v| v.is_some())
    }
}
