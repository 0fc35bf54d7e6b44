//! Detrended fluctuation analysis.
//!
//! The scaling exponent α is the log-log slope of the fluctuation
//! function F(n) against box size n, where F(n) is the RMS residual of
//! per-box linear detrending applied to the integrated, mean-centered
//! series. Box sizes are log-spaced between 4 and N/4 (up to
//! `TARGET_BOX_COUNT` of them). White noise gives α ≈ 0.5, a random walk
//! α ≈ 1.5.

use crate::error::{Error, Result};
use crate::fit::linear_fit;

pub const MIN_LEN: usize = 16;
const TARGET_BOX_COUNT: usize = 10;

/// Log-spaced integer box sizes in [4, max_box], deduplicated.
fn box_sizes(max_box: usize) -> Vec<usize> {
    if max_box <= 4 {
        return vec![4];
    }
    let lo = 4.0f64.ln();
    let hi = (max_box as f64).ln();
    let count = TARGET_BOX_COUNT.min(max_box - 3);
    let mut sizes: Vec<usize> = (0..count)
        .map(|i| {
            let t = if count == 1 { 0.0 } else { i as f64 / (count - 1) as f64 };
            (lo + t * (hi - lo)).exp().round() as usize
        })
        .collect();
    sizes.dedup();
    sizes
}

/// RMS residual of least-squares line fits over consecutive boxes of
/// size `n` (trailing partial box dropped).
fn fluctuation(profile: &[f64], n: usize) -> f64 {
    let n_boxes = profile.len() / n;
    let xs: Vec<f64> = (0..n).map(|i| i as f64).collect();
    let mut ssr = 0.0;
    for b in 0..n_boxes {
        let seg = &profile[b * n..(b + 1) * n];
        let (slope, intercept) = linear_fit(&xs, seg).expect("box length >= 4");
        for (i, &y) in seg.iter().enumerate() {
            let r = y - (slope * i as f64 + intercept);
            ssr += r * r;
        }
    }
    (ssr / (n_boxes * n) as f64).sqrt()
}

/// Detrended fluctuation exponent of a series.
///
/// Returns 0 for constant input (zero fluctuation at every scale) and for
/// series too short to produce two distinct box sizes (N < 20).
pub fn dfa(v: &[f64]) -> Result<f64> {
    if v.len() < MIN_LEN {
        return Err(Error::contract(format!(
            "dfa: need at least {MIN_LEN} samples, got {}",
            v.len()
        )));
    }
    if v.iter().any(|x| !x.is_finite()) {
        return Err(Error::contract("dfa: non-finite input sample"));
    }
    if v.iter().all(|&x| x == v[0]) {
        return Ok(0.0);
    }

    let mean = v.iter().sum::<f64>() / v.len() as f64;
    let mut acc = 0.0;
    let profile: Vec<f64> = v
        .iter()
        .map(|&x| {
            acc += x - mean;
            acc
        })
        .collect();

    let mut log_n = Vec::new();
    let mut log_f = Vec::new();
    for n in box_sizes(v.len() / 4) {
        let f = fluctuation(&profile, n);
        if f > 0.0 {
            log_n.push((n as f64).ln());
            log_f.push(f.ln());
        }
    }
    if log_n.len() < 2 {
        return Ok(0.0);
    }
    let (alpha, _) = linear_fit(&log_n, &log_f)?;
    Ok(alpha)
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    fn white_noise(seed: u64, n: usize) -> Vec<f64> {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        (0..n).map(|_| rng.gen_range(-1.0..1.0)).collect()
    }

    #[test]
    fn rejects_short_input() {
        assert!(dfa(&[0.0; 15]).is_err());
    }

    #[test]
    fn constant_series_is_zero() {
        assert_eq!(dfa(&[5.0; 64]).unwrap(), 0.0);
    }

    #[test]
    fn white_noise_exponent_near_half() {
        let alpha = dfa(&white_noise(21, 4096)).unwrap();
        assert!((0.4..=0.6).contains(&alpha), "alpha = {alpha}");
    }

    #[test]
    fn random_walk_exponent_near_three_halves() {
        let noise = white_noise(22, 4096);
        let mut acc = 0.0;
        let walk: Vec<f64> = noise
            .iter()
            .map(|&x| {
                acc += x;
                acc
            })
            .collect();
        let alpha = dfa(&walk).unwrap();
        assert!((1.4..=1.6).contains(&alpha), "alpha = {alpha}");
    }

    #[test]
    fn box_ladder_is_sane() {
        let sizes = box_sizes(1024);
        assert!(sizes.len() >= 8);
        assert_eq!(*sizes.first().unwrap(), 4);
        assert_eq!(*sizes.last().unwrap(), 1024);
        assert!(sizes.windows(2).all(|w| w[0] < w[1]));
    }
}
