//! Two-sample Kolmogorov-Smirnov test.
//!
//! D is the exact supremum of |ECDF_a − ECDF_b| over the pooled sample
//! points; the two-sided p-value comes from the asymptotic Kolmogorov
//! series Q(λ) = 2 Σ (−1)^{k−1} exp(−2k²λ²) at λ = sqrt(nm/(n+m))·D,
//! truncated at 100 terms and clamped to [0, 1].

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct KsResult {
    pub d: f64,
    pub p: f64,
}

/// Survival function of the Kolmogorov distribution, truncated at 100
/// terms. λ ≤ 0 maps to 1.
pub fn kolmogorov_sf(lambda: f64) -> f64 {
    if lambda <= 1e-12 {
        return 1.0;
    }
    let mut sum = 0.0;
    let mut sign = 1.0;
    for k in 1..=100u32 {
        let term = (-2.0 * (k as f64) * (k as f64) * lambda * lambda).exp();
        sum += sign * term;
        sign = -sign;
        if term < 1e-17 {
            break;
        }
    }
    (2.0 * sum).clamp(0.0, 1.0)
}

/// Two-sided two-sample KS test.
pub fn ks_two_sample(a: &[f64], b: &[f64]) -> Result<KsResult> {
    if a.is_empty() || b.is_empty() {
        return Err(Error::contract("ks_two_sample: empty sample"));
    }
    if a.iter().chain(b).any(|v| !v.is_finite()) {
        return Err(Error::contract("ks_two_sample: non-finite sample value"));
    }
    let mut xs = a.to_vec();
    let mut ys = b.to_vec();
    xs.sort_unstable_by(|p, q| p.partial_cmp(q).unwrap());
    ys.sort_unstable_by(|p, q| p.partial_cmp(q).unwrap());

    let (n, m) = (xs.len(), ys.len());
    let mut i = 0usize;
    let mut j = 0usize;
    let mut d: f64 = 0.0;
    while i < n && j < m {
        let x = xs[i].min(ys[j]);
        while i < n && xs[i] <= x {
            i += 1;
        }
        while j < m && ys[j] <= x {
            j += 1;
        }
        let diff = (i as f64 / n as f64 - j as f64 / m as f64).abs();
        if diff > d {
            d = diff;
        }
    }

    let n_eff = (n as f64 * m as f64) / (n as f64 + m as f64);
    let p = kolmogorov_sf(n_eff.sqrt() * d);
    Ok(KsResult { d, p })
}
