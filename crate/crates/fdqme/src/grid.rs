//! Frequency and time grids, and trapezoidal integration on them.

use crate::error::{Error, Result};

/// Minimum number of points of the uniform part of a default frequency grid.
pub const DEFAULT_POINTS: usize = 1 << 14;

/// `n` equally spaced points from `a` to `b` inclusive.
pub fn uniform(a: f64, b: f64, n: usize) -> Result<Vec<f64>> {
    if n < 2 {
        return Err(Error::Grid(format!("need at least 2 points, got {n}")));
    }
    if !(a.is_finite() && b.is_finite() && b > a) {
        return Err(Error::Grid(format!("invalid interval [{a}, {b}]")));
    }
    let h = (b - a) / (n - 1) as f64;
    let mut v: Vec<f64> = (0..n).map(|k| a + k as f64 * h).collect();
    v[n - 1] = b;
    Ok(v)
}

/// `n` points clustered around `center` with Lorentzian density of half-width
/// `width`, restricted to `[lo, hi]`: `center + width·tan θ` for equally spaced θ.
pub fn lorentzian_cluster(center: f64, width: f64, n: usize, lo: f64, hi: f64) -> Result<Vec<f64>> {
    if !(width > 0.0) {
        return Err(Error::Grid(format!("cluster width must be positive, got {width}")));
    }
    let t0 = ((lo - center) / width).atan();
    let t1 = ((hi - center) / width).atan();
    let mut v: Vec<f64> = uniform(t0, t1, n)?
        .into_iter()
        .map(|t| (center + width * t.tan()).clamp(lo, hi))
        .collect();
    v[0] = lo;
    v[n - 1] = hi;
    Ok(v)
}

/// Sorted union of several grids with near-duplicates (closer than `1e-12` of
/// the span) removed.
pub fn merge(grids: &[Vec<f64>]) -> Vec<f64> {
    let mut all: Vec<f64> = grids.iter().flatten().copied().collect();
    all.sort_by(|a, b| a.total_cmp(b));
    let span = match (all.first(), all.last()) {
        (Some(a), Some(b)) => b - a,
        _ => return all,
    };
    let eps = 1e-12 * span.max(f64::MIN_POSITIVE);
    let mut out: Vec<f64> = Vec::with_capacity(all.len());
    for x in all {
        if out.last().map_or(true, |&l| x - l > eps) {
            out.push(x);
        }
    }
    out
}

/// Symmetric grid on `[−half_width, half_width]`: a uniform grid of
/// `n_uniform` points plus a Lorentzian cluster of 2048 points around each
/// `(center, width)` peak.
pub fn peaked(half_width: f64, n_uniform: usize, peaks: &[(f64, f64)]) -> Result<Vec<f64>> {
    let mut parts = vec![uniform(-half_width, half_width, n_uniform)?];
    for &(c, w) in peaks {
        parts.push(lorentzian_cluster(c, w, 2048, -half_width, half_width)?);
    }
    Ok(merge(&parts))
}

/// Checks that a grid has at least two strictly increasing finite points.
pub fn validate(xs: &[f64]) -> Result<()> {
    if xs.len() < 2 {
        return Err(Error::Grid(format!("need at least 2 points, got {}", xs.len())));
    }
    if xs.iter().any(|x| !x.is_finite()) {
        return Err(Error::Grid("non-finite grid point".into()));
    }
    if let Some(k) = (1..xs.len()).find(|&k| xs[k] <= xs[k - 1]) {
        return Err(Error::Grid(format!(
            "grid not strictly increasing at index {k} ({} <= {})",
            xs[k],
            xs[k - 1]
        )));
    }
    Ok(())
}

pub fn trapezoid(xs: &[f64], ys: &[f64]) -> f64 {
    xs.windows(2)
        .zip(ys.windows(2))
        .map(|(x, y)| 0.5 * (x[1] - x[0]) * (y[0] + y[1]))
        .sum()
}
