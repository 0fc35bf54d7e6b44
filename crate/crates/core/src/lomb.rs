//! Lomb-Scargle periodogram for irregularly sampled series.
//!
//! Classic normalized form: the series is mean-subtracted, the power at
//! each frequency uses the per-frequency time offset tau that
//! orthogonalizes the sine and cosine terms, and the result is divided by
//! the sample variance. Power at a pure sinusoid's frequency grows with
//! the number of samples; noise-only power stays O(1).
//!
//! The frequency grid runs from 1/duration up to `f_max` with an
//! oversampling factor of 4 (grid step = 1/(4·duration)). The inner loop
//! advances cos/sin by rotation instead of re-evaluating trig at every
//! (sample, frequency) pair, with periodic refresh to cap rounding drift.

use crate::error::{Error, Result};

pub const MIN_LEN: usize = 16;
pub const OVERSAMPLING: f64 = 4.0;

/// Dominant frequency component and its normalized power.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SpectralPeak {
    /// Grid frequency of maximum power, Hz.
    pub dfc: f64,
    /// Normalized power at that frequency.
    pub amp: f64,
}

/// Evaluate the normalized periodogram on the standard grid and return
/// the peak. Zero-variance input returns (0, 0).
pub fn lomb_scargle_peak(t: &[f64], v: &[f64], f_max: f64) -> Result<SpectralPeak> {
    let (freqs, power) = lomb_scargle(t, v, f_max)?;
    if power.is_empty() {
        return Ok(SpectralPeak { dfc: 0.0, amp: 0.0 });
    }
    let mut best = 0usize;
    for (i, &p) in power.iter().enumerate() {
        if p > power[best] {
            best = i;
        }
    }
    Ok(SpectralPeak {
        dfc: freqs[best],
        amp: power[best],
    })
}

/// Full periodogram on the standard grid: `(frequencies, power)`.
/// Zero-variance input yields empty vectors.
pub fn lomb_scargle(t: &[f64], v: &[f64], f_max: f64) -> Result<(Vec<f64>, Vec<f64>)> {
    if t.len() != v.len() {
        return Err(Error::contract("lomb_scargle: t and v lengths differ"));
    }
    if t.len() < MIN_LEN {
        return Err(Error::contract(format!(
            "lomb_scargle: need at least {MIN_LEN} samples, got {}",
            t.len()
        )));
    }
    if t.windows(2).any(|w| w[1] <= w[0]) {
        return Err(Error::contract("lomb_scargle: timestamps not strictly increasing"));
    }
    if v.iter().any(|x| !x.is_finite()) {
        return Err(Error::contract("lomb_scargle: non-finite input sample"));
    }
    if f_max.is_nan() || f_max <= 0.0 {
        return Err(Error::contract("lomb_scargle: f_max must be positive"));
    }

    let n = t.len();
    let duration = t[n - 1] - t[0];
    let f_min = 1.0 / duration;
    let f_step = 1.0 / (OVERSAMPLING * duration);
    if f_max < f_min {
        return Err(Error::contract(
            "lomb_scargle: f_max below the fundamental frequency 1/duration",
        ));
    }
    let n_freq = ((f_max - f_min) / f_step).floor() as usize + 1;

    if v.iter().all(|&x| x == v[0]) {
        return Ok((Vec::new(), Vec::new()));
    }
    let mean = v.iter().sum::<f64>() / n as f64;
    let y: Vec<f64> = v.iter().map(|&x| x - mean).collect();
    let var = y.iter().map(|&d| d * d).sum::<f64>() / (n - 1) as f64;

    let mut sum_yc = vec![0.0f64; n_freq];
    let mut sum_ys = vec![0.0f64; n_freq];
    let mut sum_cc = vec![0.0f64; n_freq];
    let mut sum_sc = vec![0.0f64; n_freq];

    let two_pi = std::f64::consts::TAU;
    for (i, &yi) in y.iter().enumerate() {
        // Shift times to the window start so rotation angles stay small.
        let ti = t[i] - t[0];
        let delta = two_pi * f_step * ti;
        let (sin_d, cos_d) = delta.sin_cos();
        let (mut s, mut c) = (two_pi * f_min * ti).sin_cos();
        for j in 0..n_freq {
            sum_yc[j] += yi * c;
            sum_ys[j] += yi * s;
            sum_cc[j] += c * c;
            sum_sc[j] += s * c;
            if (j + 1) % 256 == 0 {
                let (sr, cr) = (two_pi * (f_min + (j + 1) as f64 * f_step) * ti).sin_cos();
                s = sr;
                c = cr;
            } else {
                let cn = c * cos_d - s * sin_d;
                s = s * cos_d + c * sin_d;
                c = cn;
            }
        }
    }

    let nf = n as f64;
    let mut freqs = Vec::with_capacity(n_freq);
    let mut power = Vec::with_capacity(n_freq);
    for j in 0..n_freq {
        let c2 = sum_cc[j];
        let s2 = nf - c2;
        let theta = 0.5 * (2.0 * sum_sc[j]).atan2(c2 - s2);
        let (sin_t, cos_t) = theta.sin_cos();
        let yc = sum_yc[j] * cos_t + sum_ys[j] * sin_t;
        let ys = sum_ys[j] * cos_t - sum_yc[j] * sin_t;
        let cc = c2 * cos_t * cos_t + 2.0 * sum_sc[j] * sin_t * cos_t + s2 * sin_t * sin_t;
        let ss = nf - cc;
        let mut p = 0.0;
        if cc > 1e-10 {
            p += yc * yc / cc;
        }
        if ss > 1e-10 {
            p += ys * ys / ss;
        }
        freqs.push(f_min + j as f64 * f_step);
        power.push(p / (2.0 * var));
    }
    Ok((freqs, power))
}
