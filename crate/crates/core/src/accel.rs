//! Acceleration features over the six axes of a balance or gait test.
//!
//! Each of x, y, z and the spherical r, theta, phi gets the full per-axis
//! statistic set including the spectral peak from the Lomb-Scargle
//! periodogram (cap frequency = half the series' mean sampling rate);
//! the raw-axis pairs (x,y), (x,z), (y,z) get the cross-axis statistics.

use crate::dfa::dfa;
use crate::error::{Error, Result};
use crate::lomb::lomb_scargle_peak;
use crate::registry::{accel_ids, AXIS_PAIRS, AXIS_STATS, PAIR_STATS};
use crate::stats::{ar1, descriptive_stats, mean_tkeo, pairwise_features};
use crate::types::{to_spherical, AccelSeries, RawAxis, SphericalAxis};

/// Minimum series length for the acceleration feature set.
pub const MIN_SERIES_LEN: usize = 16;

#[derive(Debug, Clone)]
pub struct AccelFeatures {
    pub ids: Vec<String>,
    pub values: Vec<f64>,
    pub flags: Vec<String>,
}

fn axis_features(t: &[f64], v: &[f64], f_max: f64, out: &mut Vec<f64>) -> Result<()> {
    let d = descriptive_stats(v)?;
    let peak = lomb_scargle_peak(t, v, f_max)?;
    for stat in AXIS_STATS {
        out.push(match stat {
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
            "MCR" => d.mcr,
            "DFC" => peak.dfc,
            "AMP" => peak.amp,
            "meanTKEO" => mean_tkeo(v)?,
            "AR1" => ar1(v)?,
            "DFA" => dfa(v)?,
            other => unreachable!("unknown axis stat {other}"),
        });
    }
    Ok(())
}

/// The full 117-feature acceleration block for one test.
pub fn extract_accel_features(series: &AccelSeries) -> Result<AccelFeatures> {
    let test = series.test_kind().as_str();
    if series.len() < MIN_SERIES_LEN {
        return Err(Error::contract(format!(
            "{test}: series of {} samples is below the {MIN_SERIES_LEN}-sample minimum",
            series.len()
        )));
    }
    let t = series.timestamps();
    let f_max = series.mean_rate() / 2.0;
    let spherical = to_spherical(series);

    let axes: Vec<(&str, Vec<f64>)> = vec![
        ("x", series.axis(RawAxis::X)),
        ("y", series.axis(RawAxis::Y)),
        ("z", series.axis(RawAxis::Z)),
        ("r", spherical.axis(SphericalAxis::R)),
        ("theta", spherical.axis(SphericalAxis::Theta)),
        ("phi", spherical.axis(SphericalAxis::Phi)),
    ];

    let mut values = Vec::with_capacity(accel_ids(test).len());
    for (name, v) in &axes {
        axis_features(&t, v, f_max, &mut values)
            .map_err(|e| Error::contract(format!("{test} axis {name}: {e}")))?;
    }
    for (a, b) in AXIS_PAIRS {
        let va = &axes.iter().find(|(n, _)| *n == a).unwrap().1;
        let vb = &axes.iter().find(|(n, _)| *n == b).unwrap().1;
        let p = pairwise_features(va, vb)
            .map_err(|e| Error::contract(format!("{test} pair {a}{b}: {e}")))?;
        for stat in PAIR_STATS {
            values.push(match stat {
                "XCORR" => p.xcorr,
                "MI" => p.mi,
                "xEn" => p.xen,
                other => unreachable!("unknown pair stat {other}"),
            });
        }
    }

    let ids = accel_ids(test);
    debug_assert_eq!(ids.len(), values.len());
    Ok(AccelFeatures { ids, values, flags: Vec::new() })
}
