//! Small least-squares fits: straight lines and low-degree polynomials.
//!
//! Degree stays at most 2 everywhere in this crate, so the normal
//! equations with partial pivoting are accurate enough; no external
//! linear algebra needed.

use crate::error::{Error, Result};

/// Slope and intercept of the least-squares line through (x, y).
///
/// Returns `(slope, intercept)`. Zero x-variance yields slope 0 and
/// intercept = mean(y).
pub fn linear_fit(x: &[f64], y: &[f64]) -> Result<(f64, f64)> {
    if x.len() != y.len() {
        return Err(Error::contract("linear_fit: mismatched input lengths"));
    }
    if x.len() < 2 {
        return Err(Error::contract("linear_fit: need at least 2 points"));
    }
    let n = x.len() as f64;
    let mx = x.iter().sum::<f64>() / n;
    let my = y.iter().sum::<f64>() / n;
    let mut sxx = 0.0;
    let mut sxy = 0.0;
    for (&xi, &yi) in x.iter().zip(y) {
        sxx += (xi - mx) * (xi - mx);
        sxy += (xi - mx) * (yi - my);
    }
    if sxx == 0.0 {
        return Ok((0.0, my));
    }
    let slope = sxy / sxx;
    Ok((slope, my - slope * mx))
}

/// Least-squares polynomial fit of the given degree.
///
/// Coefficients are returned in ascending powers: `c[0] + c[1] x + ...`.
/// Solved via the normal equations with partial pivoting; fine for the
/// degrees (≤ 2) used here provided x is reasonably scaled by the caller.
pub fn polyfit(x: &[f64], y: &[f64], degree: usize) -> Result<Vec<f64>> {
    if x.len() != y.len() {
        return Err(Error::contract("polyfit: mismatched input lengths"));
    }
    let m = degree + 1;
    if x.len() < m {
        return Err(Error::contract(format!(
            "polyfit: need at least {m} points for degree {degree}"
        )));
    }
    // Normal equations: A c = b with A[i][j] = Σ x^(i+j), b[i] = Σ y x^i.
    let mut pow_sums = vec![0.0; 2 * m - 1];
    let mut b = vec![0.0; m];
    for (&xi, &yi) in x.iter().zip(y) {
        let mut p = 1.0;
        for (k, slot) in pow_sums.iter_mut().enumerate() {
            *slot += p;
            if k < m {
                b[k] += yi * p;
            }
            p *= xi;
        }
    }
    let mut a = vec![vec![0.0; m]; m];
    for (i, row) in a.iter_mut().enumerate() {
        row.copy_from_slice(&pow_sums[i..i + m]);
    }
    solve_dense(&mut a, &mut b).map_err(|_| {
        Error::contract("polyfit: degenerate design (too few distinct x values)")
    })?;
    Ok(b)
}

/// Gaussian elimination with partial pivoting; solution replaces `b`.
fn solve_dense(a: &mut [Vec<f64>], b: &mut [f64]) -> std::result::Result<(), ()> {
    let n = b.len();
    for col in 0..n {
        let pivot = (col..n)
            .max_by(|&i, &j| a[i][col].abs().partial_cmp(&a[j][col].abs()).unwrap())
            .unwrap();
        if a[pivot][col].abs() < 1e-300 {
            return Err(());
        }
        a.swap(col, pivot);
        b.swap(col, pivot);
        for row in col + 1..n {
            let f = a[row][col] / a[col][col];
            let (pivot_rows, rest) = a.split_at_mut(col + 1);
            let pivot = &pivot_rows[col];
            for (x, &p) in rest[row - col - 1][col..n].iter_mut().zip(&pivot[col..n]) {
                *x -= f * p;
            }
            b[row] -= f * b[col];
        }
    }
    for col in (0..n).rev() {
        let mut acc = b[col];
        for k in col + 1..n {
            acc -= a[col][k] * b[k];
        }
        b[col] = acc / a[col][col];
    }
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;

    #[test]
    fn line_recovery() {
        let x: Vec<f64> = (0..50).map(|i| i as f64 / 49.0).collect();
        let y: Vec<f64> = x.iter().map(|&xi| 3.25 * xi - 1.5).collect();
        let (slope, intercept) = linear_fit(&x, &y).unwrap();
        assert_relative_eq!(slope, 3.25, epsilon = 1e-12);
        assert_relative_eq!(intercept, -1.5, epsilon = 1e-12);
    }

    #[test]
    fn constant_x_gives_flat_line() {
        let (slope, intercept) = linear_fit(&[2.0, 2.0, 2.0], &[1.0, 2.0, 3.0]).unwrap();
        assert_eq!(slope, 0.0);
        assert_relative_eq!(intercept, 2.0);
    }

    #[test]
    fn quadratic_recovery() {
        let x: Vec<f64> = (0..30).map(|i| i as f64 / 29.0).collect();
        let y: Vec<f64> = x.iter().map(|&xi| 0.5 - 1.2 * xi + 2.0 * xi * xi).collect();
        let c = polyfit(&x, &y, 2).unwrap();
        assert_relative_eq!(c[0], 0.5, epsilon = 1e-9);
        assert_relative_eq!(c[1], -1.2, epsilon = 1e-9);
        assert_relative_eq!(c[2], 2.0, epsilon = 1e-9);
    }

    #[test]
    fn degenerate_design_rejected() {
        let err = polyfit(&[1.0, 1.0, 1.0, 1.0], &[1.0, 2.0, 3.0, 4.0], 2);
        assert!(err.is_err());
    }

    #[test]
    fn too_few_points_rejected() {
        assert!(polyfit(&[0.0, 1.0], &[1.0, 2.0], 2).is_err());
        assert!(linear_fit(&[0.0], &[1.0]).is_err());
    }
}
