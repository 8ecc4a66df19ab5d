//! Singular-value gap decay along word length.

use serde::Serialize;

use crate::error::{Error, Result};
use crate::group::enumerate_ball;
use crate::linalg::{self, Mat};
use crate::rep::Representation;
use crate::tolerance;

/// Singular values of `M` in decreasing order, taking the lower half from
/// `M⁻¹` so that tiny values keep full relative precision.
pub fn split_singular_values(m: &Mat, m_inv: &Mat) -> Vec<f64> {
    let big_n = m.nrows();
    let top = linalg::singular_values(m);
    let bottom = linalg::singular_values(m_inv);
    let half = big_n.div_ceil(2);
    (0..big_n)
        .map(|i| if i < half { top[i] } else { 1.0 / bottom[big_n - 1 - i] })
        .collect()
}

/// `log(σ_{k+1} / σ_k)` for `k = 1..N-1` (entry `k - 1`).
pub fn log_gap_ratios(sigma: &[f64]) -> Vec<f64> {
    sigma.windows(2).map(|w| (w[1] / w[0]).ln()).collect()
}

/// Ordinary least squares `y ≈ slope x + intercept`; returns
/// `(slope, intercept, R²)`. `R²` is zero when `y` has no variance.
pub fn least_squares(points: &[(f64, f64)]) -> (f64, f64, f64) {
    let n = points.len() as f64;
    if points.is_empty() {
        return (f64::NAN, f64::NAN, 0.0);
    }
    let mx = points.iter().map(|p| p.0).sum::<f64>() / n;
    let my = points.iter().map(|p| p.1).sum::<f64>() / n;
    let sxx: f64 = points.iter().map(|p| (p.0 - mx).powi(2)).sum();
    let sxy: f64 = points.iter().map(|p| (p.0 - mx) * (p.1 - my)).sum();
    let syy: f64 = points.iter().map(|p| (p.1 - my).powi(2)).sum();
    if sxx == 0.0 {
        return (f64::NAN, my, 0.0);
    }
    let slope = sxy / sxx;
    let intercept = my - slope * mx;
    let r2 = if syy == 0.0 { 0.0 } else { sxy * sxy / (sxx * syy) };
    (slope, intercept, r2)
}

/// Gap decay for one index `k`.
#[derive(Debug, Clone, Serialize)]
pub struct GapProfile {
    pub k: usize,
    /// `(word length, log(σ_{k+1}/σ_k))` per non-trivial ball element.
    pub points: Vec<(usize, f64)>,
    /// Estimate of `-α`.
    pub fitted_slope: f64,
    /// Estimate of `log C`.
    pub fitted_intercept: f64,
    /// Coefficient of determination of the fit over all points.
    pub r_squared: f64,
    /// Slope of the least-squares line through the per-radius maxima.
    pub envelope_slope: f64,
    /// Coefficient of determination of that envelope fit.
    pub envelope_r_squared: f64,
    /// `max_by_radius[r - 1]` is the largest log-ratio at word length `r`.
    pub max_by_radius: Vec<f64>,
    /// Slope below `-α_min` and maxima strictly decreasing from radius 3.
    pub pass: bool,
    /// The element budget cut the ball short.
    pub truncated: bool,
}

fn strictly_decreasing_from(maxima: &[f64], first_radius: usize) -> bool {
    let start = first_radius.saturating_sub(1);
    maxima
        .get(start..)
        .is_none_or(|tail| tail.windows(2).all(|w| w[1] < w[0]))
}

/// Per-`k` gap profiles over the ball of the given radius.
pub fn gap_profile(rep: &Representation, ks: &[usize], radius: usize) -> Result<Vec<GapProfile>> {
    let big_n = rep.dim();
    if let Some(&k) = ks.iter().find(|&&k| k == 0 || k >= big_n) {
        return Err(Error::InvalidArgument(format!(
            "gap index {k} must lie in 1..{big_n}"
        )));
    }
    let ball = enumerate_ball(rep, radius)?;
    let ratios: Vec<(usize, Vec<f64>)> = ball.elements[1..]
        .iter()
        .map(|e| (e.length(), log_gap_ratios(&split_singular_values(&e.matrix, &e.inverse))))
        .collect();
    let alpha_min = tolerance::current().alpha_min;
    let profiles = ks
        .iter()
        .map(|&k| {
            let points: Vec<(usize, f64)> = ratios.iter().map(|(l, r)| (*l, r[k - 1])).collect();
            let fit_input: Vec<(f64, f64)> = points.iter().map(|&(l, r)| (l as f64, r)).collect();
            let (slope, intercept, r2) = least_squares(&fit_input);
            let top_len = points.iter().map(|p| p.0).max().unwrap_or(0);
            let mut max_by_radius = vec![f64::NEG_INFINITY; top_len];
            for &(l, r) in &points {
                max_by_radius[l - 1] = max_by_radius[l - 1].max(r);
            }
            let envelope: Vec<(f64, f64)> = max_by_radius
                .iter()
                .enumerate()
                .filter(|(_, m)| m.is_finite())
                .map(|(i, &m)| ((i + 1) as f64, m))
                .collect();
            let (envelope_slope, _, envelope_r_squared) = least_squares(&envelope);
            let pass = slope < -alpha_min && strictly_decreasing_from(&max_by_radius, 3);
            GapProfile {
                k,
                points,
                fitted_slope: slope,
                fitted_intercept: intercept,
                r_squared: r2,
                envelope_slope,
                envelope_r_squared,
                max_by_radius,
                pass,
                truncated: ball.truncated,
            }
        })
        .collect();
    Ok(profiles)
}
