//! Baseline/treatment pairing of same-day instances.
//!
//! For each participant and local calendar day, the earliest unpaired
//! instance is a baseline candidate; the next instance starting within
//! the configured window after it becomes its treatment. Instances that
//! find no partner are dropped. Labels on the output pairs are always
//! overwritten, whatever the inputs carried.

use std::collections::BTreeMap;

use chrono::NaiveDate;

use crate::error::{Error, Result};
use crate::types::{ActiveTestInstance, Label};

/// Default pairing window in minutes, bracketing the one-hour protocol gap.
pub const DEFAULT_WINDOW_MIN: f64 = 30.0;
pub const DEFAULT_WINDOW_MAX: f64 = 180.0;

/// Pair instances into (baseline, treatment) tuples.
///
/// `window_min`/`window_max` are minutes between the two start times.
/// The output is sorted by participant id, then baseline start time.
pub fn pair_instances(
    instances: &[ActiveTestInstance],
    window_min: f64,
    window_max: f64,
) -> Result<Vec<(ActiveTestInstance, ActiveTestInstance)>> {
    if window_min.is_nan() || window_max.is_nan() || window_min >= window_max {
        return Err(Error::contract("pairing window: require window_min < window_max"));
    }
    if window_min < 0.0 {
        return Err(Error::contract("pairing window must be non-negative"));
    }

    // Group indices by (participant, local calendar day). BTreeMap keeps
    // the output ordering deterministic.
    let mut groups: BTreeMap<(String, NaiveDate), Vec<usize>> = BTreeMap::new();
    for (idx, inst) in instances.iter().enumerate() {
        let day = inst.started_at.date_naive();
        groups
            .entry((inst.participant_id.clone(), day))
            .or_default()
            .push(idx);
    }

    let mut pairs = Vec::new();
    for indices in groups.values() {
        let mut order = indices.clone();
        order.sort_by_key(|&i| instances[i].started_at);
        let mut used = vec![false; order.len()];
        for i in 0..order.len() {
            if used[i] {
                continue;
            }
            let base = &instances[order[i]];
            for j in i + 1..order.len() {
                if used[j] {
                    continue;
                }
                let cand = &instances[order[j]];
                let gap_min =
                    (cand.started_at - base.started_at).num_seconds() as f64 / 60.0;
                if gap_min > window_max {
                    break;
                }
                if gap_min >= window_min {
                    used[i] = true;
                    used[j] = true;
                    let mut b = base.clone();
                    b.label = Label::Baseline;
                    let mut t = cand.clone();
                    t.label = Label::Treatment;
                    pairs.push((b, t));
                    break;
                }
            }
            // A baseline candidate with no partner stays unused and is
            // dropped; the scan moves on to the next instance.
        }
    }
    Ok(pairs)
}
