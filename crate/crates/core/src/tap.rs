//! Dexterity (STAY/MOVE interval) and reaction (lag) features.
//!
//! STAY is press-to-release duration per event; MOVE is release to the
//! next press. Reaction lags are stimulus-to-press intervals over
//! responded trials. Both feed into the shared summary statistics;
//! statistics whose length minimum is not met come back as 0 with a
//! quality flag so vectors stay rectangular.

use crate::dfa;
use crate::error::{Error, Result};
use crate::registry::{react_ids, tap_ids, REACT_STATS, TAP_STATS};
use crate::stats::{ar1, descriptive_stats, mean_tkeo, DescriptiveStats};
use crate::types::{ReactionSession, TapSession};

/// STAY and MOVE interval streams of a tap session.
pub fn tap_intervals(session: &TapSession) -> Result<(Vec<f64>, Vec<f64>)> {
    let events = session.events();
    if events.len() < 2 {
        return Err(Error::contract("tap_intervals: need at least 2 events"));
    }
    let stay = events.iter().map(|e| e.release_t - e.press_t).collect();
    let mv = events
        .windows(2)
        .map(|w| w[1].press_t - w[0].release_t)
        .collect();
    Ok((stay, mv))
}

/// Reaction lags (press − stimulus) over responded trials.
pub fn reaction_lags(session: &ReactionSession) -> Result<Vec<f64>> {
    let lags: Vec<f64> = session
        .trials()
        .iter()
        .filter_map(|t| t.response.map(|(press, _)| press - t.stimulus_t))
        .collect();
    if lags.is_empty() {
        return Err(Error::contract("reaction_lags: no responded trials"));
    }
    Ok(lags)
}

fn pick_stat(stat: &str, d: &DescriptiveStats, v: &[f64], prefix: &str, flags: &mut Vec<String>) -> f64 {
    match stat {
        "sum" => v.iter().sum(),
        "mean" => d.mean,
        "std" => d.std,
        "Q1" => d.q1,
        "Q3" => d.q3,
        "IQR" => d.iqr,
        "median" => d.median,
        "mode" => d.mode,
        "range" => d.range,
        "skew" => d.skew,
        "kurt" => d.kurt,
        "MSE" => d.mse,
        "En" => d.entropy,
        "meanTKEO" => {
            if v.len() >= 3 {
                mean_tkeo(v).expect("length checked")
            } else {
                flags.push(format!("{prefix}_meanTKEO:short"));
                0.0
            }
        }
        "AR1" => {
            if v.len() >= 3 {
                ar1(v).expect("length checked")
            } else {
                flags.push(format!("{prefix}_AR1:short"));
                0.0
            }
        }
        "DFA" => {
            if v.len() >= dfa::MIN_LEN {
                dfa::dfa(v).expect("length checked")
            } else {
                flags.push(format!("{prefix}_DFA:short"));
                0.0
            }
        }
        other => unreachable!("unknown interval stat {other}"),
    }
}

/// The named interval statistics (`stats`) of `v`, emitted in order with
/// ids `<prefix>_<stat>`.
pub fn interval_feature_set(
    v: &[f64],
    prefix: &str,
    stats: &[&str],
) -> Result<(Vec<f64>, Vec<String>)> {
    if v.len() < 2 {
        return Err(Error::contract(format!(
            "{prefix}: need at least 2 intervals, got {}",
            v.len()
        )));
    }
    let d = descriptive_stats(v)?;
    let mut flags = Vec::new();
    let values = stats
        .iter()
        .map(|stat| pick_stat(stat, &d, v, prefix, &mut flags))
        .collect();
    Ok((values, flags))
}

#[derive(Debug, Clone)]
pub struct IntervalFeatures {
    pub ids: Vec<String>,
    pub values: Vec<f64>,
    pub flags: Vec<String>,
}

/// Full dexterity block: the 15 statistics over STAY then MOVE.
pub fn extract_tap_features(session: &TapSession) -> Result<IntervalFeatures> {
    let (stay, mv) = tap_intervals(session)?;
    let (stay_vals, mut flags) = interval_feature_set(&stay, "tap_STAY", &TAP_STATS)?;
    let (move_vals, move_flags) = interval_feature_set(&mv, "tap_MOVE", &TAP_STATS)?;
    flags.extend(move_flags);
    let mut values = stay_vals;
    values.extend(move_vals);
    let ids = tap_ids();
    debug_assert_eq!(values.len(), ids.len());
    Ok(IntervalFeatures { ids, values, flags })
}

/// Full reaction block: the 15 statistics (sum included, AR1 absent)
/// over the lag stream.
pub fn extract_reaction_features(session: &ReactionSession) -> Result<IntervalFeatures> {
    let lags = reaction_lags(session)?;
    if lags.len() < 2 {
        return Err(Error::contract("reaction features: need at least 2 responded trials"));
    }
    let (values, flags) = interval_feature_set(&lags, "react", &REACT_STATS)?;
    let ids = react_ids();
    debug_assert_eq!(values.len(), ids.len());
    Ok(IntervalFeatures { ids, values, flags })
}
