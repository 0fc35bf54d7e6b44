//! Descriptive statistics and cross-axis statistics over sample vectors.
//!
//! Conventions, fixed once for the whole crate:
//! * std uses the n−1 divisor; skew/kurt use central moments with the n
//!   divisor, kurtosis is excess (normal → 0).
//! * quantiles interpolate linearly at position p·(n−1) on the sorted
//!   sample.
//! * mode and entropy discretize continuous data into 16 equal-width bins
//!   over the observed [min, max]; mode is the center of the fullest bin
//!   (lowest bin wins ties), entropy is Shannon entropy in bits.
//! * degenerate inputs (zero variance, zero fluctuation) yield 0 rather
//!   than NaN so feature vectors stay finite.

use crate::error::{Error, Result};

pub const HIST_BINS: usize = 16;
pub const JOINT_BINS: usize = 8;

/// The thirteen summary statistics shared by the acceleration, tap, and
/// reaction feature sets.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct DescriptiveStats {
    pub mean: f64,
    pub std: f64,
    pub q1: f64,
    pub q3: f64,
    pub iqr: f64,
    pub median: f64,
    pub mode: f64,
    pub range: f64,
    pub skew: f64,
    pub kurt: f64,
    pub mse: f64,
    pub entropy: f64,
    pub mcr: f64,
}

fn ensure_finite(v: &[f64], what: &str) -> Result<()> {
    if v.iter().any(|x| !x.is_finite()) {
        return Err(Error::contract(format!("{what}: non-finite input sample")));
    }
    Ok(())
}

/// True when every sample equals the first bit-for-bit.
pub fn is_constant(v: &[f64]) -> bool {
    v.iter().all(|&x| x == v[0])
}

/// Linear-interpolation quantile at position p·(n−1) on the sorted copy.
pub fn quantile(v: &[f64], p: f64) -> Result<f64> {
    if v.is_empty() {
        return Err(Error::contract("quantile: empty input"));
    }
    let mut s = v.to_vec();
    s.sort_unstable_by(|a, b| a.partial_cmp(b).unwrap());
    Ok(quantile_sorted(&s, p))
}

/// Same, on an already-sorted slice.
pub fn quantile_sorted(sorted: &[f64], p: f64) -> f64 {
    let n = sorted.len();
    if n == 1 {
        return sorted[0];
    }
    let pos = p * (n - 1) as f64;
    let lo = pos.floor() as usize;
    let frac = pos - lo as f64;
    if lo + 1 >= n {
        sorted[n - 1]
    } else {
        sorted[lo] * (1.0 - frac) + sorted[lo + 1] * frac
    }
}

/// Bin index of `x` in a 16-bin equal-width histogram over [min, max].
/// Degenerate range puts everything in bin 0.
fn bin_index(x: f64, min: f64, max: f64, bins: usize) -> usize {
    if max <= min {
        return 0;
    }
    let idx = ((x - min) / (max - min) * bins as f64) as usize;
    idx.min(bins - 1)
}

fn histogram(v: &[f64], min: f64, max: f64, bins: usize) -> Vec<usize> {
    let mut counts = vec![0usize; bins];
    for &x in v {
        counts[bin_index(x, min, max, bins)] += 1;
    }
    counts
}

/// Shannon entropy in bits of a count histogram.
fn entropy_bits(counts: &[usize], total: usize) -> f64 {
    let n = total as f64;
    counts
        .iter()
        .filter(|&&c| c > 0)
        .map(|&c| {
            let p = c as f64 / n;
            -p * p.log2()
        })
        .sum()
}

/// Compute the shared descriptive statistics of a sample vector.
pub fn descriptive_stats(v: &[f64]) -> Result<DescriptiveStats> {
    if v.len() < 2 {
        return Err(Error::contract("descriptive_stats: need at least 2 samples"));
    }
    ensure_finite(v, "descriptive_stats")?;

    // Constant input short-circuits so dispersion statistics are exact
    // zeroes rather than summation dust.
    if is_constant(v) {
        let c = v[0];
        return Ok(DescriptiveStats {
            mean: c,
            std: 0.0,
            q1: c,
            q3: c,
            iqr: 0.0,
            median: c,
            mode: c,
            range: 0.0,
            skew: 0.0,
            kurt: 0.0,
            mse: c * c,
            entropy: 0.0,
            mcr: 0.0,
        });
    }

    let n = v.len() as f64;
    let mean = v.iter().sum::<f64>() / n;
    let mut m2 = 0.0;
    let mut m3 = 0.0;
    let mut m4 = 0.0;
    for &x in v {
        let d = x - mean;
        let d2 = d * d;
        m2 += d2;
        m3 += d2 * d;
        m4 += d2 * d2;
    }
    let std = (m2 / (n - 1.0)).sqrt();
    m2 /= n;
    m3 /= n;
    m4 /= n;
    let (skew, kurt) = if m2 > 0.0 {
        (m3 / m2.powf(1.5), m4 / (m2 * m2) - 3.0)
    } else {
        (0.0, 0.0)
    };

    let mut sorted = v.to_vec();
    sorted.sort_unstable_by(|a, b| a.partial_cmp(b).unwrap());
    let min = sorted[0];
    let max = sorted[sorted.len() - 1];
    let q1 = quantile_sorted(&sorted, 0.25);
    let q3 = quantile_sorted(&sorted, 0.75);
    let median = quantile_sorted(&sorted, 0.5);

    let counts = histogram(v, min, max, HIST_BINS);
    let entropy = entropy_bits(&counts, v.len());
    let mode = if max > min {
        let width = (max - min) / HIST_BINS as f64;
        let best = counts
            .iter()
            .enumerate()
            .max_by(|a, b| a.1.cmp(b.1).then(b.0.cmp(&a.0)))
            .map(|(i, _)| i)
            .unwrap();
        min + width * (best as f64 + 0.5)
    } else {
        min
    };

    let mse = v.iter().map(|&x| x * x).sum::<f64>() / n;

    // Sign changes of the mean-centered signal; exact zeros break a run
    // rather than counting as a crossing.
    let mut crossings = 0usize;
    for w in v.windows(2) {
        if (w[0] - mean) * (w[1] - mean) < 0.0 {
            crossings += 1;
        }
    }
    let mcr = crossings as f64 / (n - 1.0);

    Ok(DescriptiveStats {
        mean,
        std,
        q1,
        q3,
        iqr: q3 - q1,
        median,
        mode,
        range: max - min,
        skew,
        kurt,
        mse,
        entropy,
        mcr,
    })
}

/// Mean Teager-Kaiser energy: average of v[n]² − v[n−1]·v[n+1] over the
/// interior samples.
pub fn mean_tkeo(v: &[f64]) -> Result<f64> {
    if v.len() < 3 {
        return Err(Error::contract("mean_tkeo: need at least 3 samples"));
    }
    ensure_finite(v, "mean_tkeo")?;
    let sum: f64 = (1..v.len() - 1)
        .map(|i| v[i] * v[i] - v[i - 1] * v[i + 1])
        .sum();
    Ok(sum / (v.len() - 2) as f64)
}

/// Pearson correlation; 0 when either side has zero variance.
pub fn pearson(a: &[f64], b: &[f64]) -> f64 {
    debug_assert_eq!(a.len(), b.len());
    if is_constant(a) || is_constant(b) {
        return 0.0;
    }
    let n = a.len() as f64;
    let ma = a.iter().sum::<f64>() / n;
    let mb = b.iter().sum::<f64>() / n;
    let mut saa = 0.0;
    let mut sbb = 0.0;
    let mut sab = 0.0;
    for (&x, &y) in a.iter().zip(b) {
        saa += (x - ma) * (x - ma);
        sbb += (y - mb) * (y - mb);
        sab += (x - ma) * (y - mb);
    }
    if saa == 0.0 || sbb == 0.0 {
        0.0
    } else {
        sab / (saa * sbb).sqrt()
    }
}

/// Lag-1 autocorrelation as the Pearson correlation of the series with
/// itself shifted by one sample.
pub fn ar1(v: &[f64]) -> Result<f64> {
    if v.len() < 3 {
        return Err(Error::contract("ar1: need at least 3 samples"));
    }
    ensure_finite(v, "ar1")?;
    Ok(pearson(&v[..v.len() - 1], &v[1..]))
}

/// Cross-axis statistics between two equal-length signals.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PairwiseStats {
    /// Pearson correlation at lag 0.
    pub xcorr: f64,
    /// Mutual information in bits from an 8×8 joint histogram, each
    /// signal binned over its own range.
    pub mi: f64,
    /// Cross-entropy −Σ p_a·log2 q_b over 16 shared bins spanning the
    /// union range, with add-one smoothing of q_b.
    pub xen: f64,
}

pub fn pairwise_features(a: &[f64], b: &[f64]) -> Result<PairwiseStats> {
    if a.len() != b.len() {
        return Err(Error::contract("pairwise_features: unequal lengths"));
    }
    if a.len() < 16 {
        return Err(Error::contract("pairwise_features: need at least 16 samples"));
    }
    ensure_finite(a, "pairwise_features")?;
    ensure_finite(b, "pairwise_features")?;

    let xcorr = pearson(a, b);

    let (amin, amax) = min_max(a);
    let (bmin, bmax) = min_max(b);
    let n = a.len();

    let mut joint = vec![0usize; JOINT_BINS * JOINT_BINS];
    let mut marg_a = [0usize; JOINT_BINS];
    let mut marg_b = [0usize; JOINT_BINS];
    for (&x, &y) in a.iter().zip(b) {
        let i = bin_index(x, amin, amax, JOINT_BINS);
        let j = bin_index(y, bmin, bmax, JOINT_BINS);
        joint[i * JOINT_BINS + j] += 1;
        marg_a[i] += 1;
        marg_b[j] += 1;
    }
    let nf = n as f64;
    let mut mi = 0.0;
    for i in 0..JOINT_BINS {
        for j in 0..JOINT_BINS {
            let c = joint[i * JOINT_BINS + j];
            if c > 0 {
                let pij = c as f64 / nf;
                let pi = marg_a[i] as f64 / nf;
                let pj = marg_b[j] as f64 / nf;
                mi += pij * (pij / (pi * pj)).log2();
            }
        }
    }

    let umin = amin.min(bmin);
    let umax = amax.max(bmax);
    let pa = histogram(a, umin, umax, HIST_BINS);
    let qb = histogram(b, umin, umax, HIST_BINS);
    let qn = (n + HIST_BINS) as f64;
    let mut xen = 0.0;
    for k in 0..HIST_BINS {
        if pa[k] > 0 {
            let p = pa[k] as f64 / nf;
            let q = (qb[k] + 1) as f64 / qn;
            xen -= p * q.log2();
        }
    }

    Ok(PairwiseStats { xcorr, mi, xen })
}

fn min_max(v: &[f64]) -> (f64, f64) {
    let mut min = f64::INFINITY;
    let mut max = f64::NEG_INFINITY;
    for &x in v {
        min = min.min(x);
        max = max.max(x);
    }
    (min, max)
}
