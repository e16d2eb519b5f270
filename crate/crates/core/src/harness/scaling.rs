//! Critical delay `tau_c` and its large-N extrapolation.

use super::sweep::SweepTable;
use crate::{Error, Result};
use serde::{Deserialize, Serialize};

pub const DEFAULT_P_THRESHOLD: f64 = 0.5;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "status", content = "tau_c", rename_all = "snake_case")]
pub enum TauCEstimate {
    /// Mean consensus probability drops below the threshold here.
    Crossing(f64),
    /// Never drops below the threshold on this grid.
    Unbounded,
    /// Already below the threshold at the first grid point.
    BelowGrid,
}

impl TauCEstimate {
    pub fn value(self) -> Option<f64> {
        match self {
            TauCEstimate::Crossing(t) => Some(t),
            _ => None,
        }
    }
}

/// First downward crossing of `threshold` by `p_means`, linearly
/// interpolated in `ln(tau_nd)`.
pub fn estimate_tau_c(grid: &[f64], p_means: &[f64], threshold: f64) -> Result<TauCEstimate> {
    if grid.len() != p_means.len() || grid.is_empty() {
        return Err(Error::param(
            "grid and P columns must be non-empty and equally long",
        ));
    }
    if !(threshold > 0.0 && threshold < 1.0) {
        return Err(Error::param(format!(
            "threshold must be in (0, 1), got {threshold}"
        )));
    }
    if p_means[0] < threshold {
        return Ok(TauCEstimate::BelowGrid);
    }
    for i in 1..grid.len() {
        if p_means[i] < threshold {
            let (p0, p1) = (p_means[i - 1], p_means[i]);
            let frac = (p0 - threshold) / (p0 - p1);
            let (l0, l1) = (grid[i - 1].ln(), grid[i].ln());
            return Ok(TauCEstimate::Crossing((l0 + frac * (l1 - l0)).exp()));
        }
    }
    Ok(TauCEstimate::Unbounded)
}

/// `tau_c` per node count from a sweep's mean `P` column.
pub fn tau_c_by_size(table: &SweepTable, threshold: f64) -> Result<Vec<(usize, TauCEstimate)>> {
    table
        .spec
        .node_counts()
        .into_iter()
        .map(|n| {
            let rows = table.summary_for(n);
            let grid: Vec<f64> = rows.iter().map(|r| r.tau_nd).collect();
            let p: Vec<f64> = rows
                .iter()
                .map(|r| r.mean("P").unwrap_or(f64::NAN))
                .collect();
            if p.iter().any(|x| x.is_nan()) {
                return Err(Error::Undefined("consensus probability at some grid point"));
            }
            Ok((n, estimate_tau_c(&grid, &p, threshold)?))
        })
        .collect()
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ScalingResult {
    /// `(N, tau_c(N))` input points.
    pub points: Vec<(f64, f64)>,
    pub tau_c_inf: f64,
    pub c: f64,
    pub b: f64,
    pub rms_residual: f64,
    /// False when the exponent sits on the search boundary without the
    /// data being flat; `tau_c_inf` is then not trustworthy.
    pub converged: bool,
}

const B_MIN: f64 = 1e-3;
const B_MAX: f64 = 5.0;

// Least squares for y = a + c x at fixed exponent; returns (a, c, sse).
fn linear_fit(points: &[(f64, f64)], b: f64) -> (f64, f64, f64) {
    let n = points.len() as f64;
    let xs: Vec<f64> = points.iter().map(|&(nn, _)| nn.powf(-b)).collect();
    let mx = xs.iter().sum::<f64>() / n;
    let my = points.iter().map(|p| p.1).sum::<f64>() / n;
    let sxx: f64 = xs.iter().map(|x| (x - mx).powi(2)).sum();
    let sxy: f64 = xs
        .iter()
        .zip(points)
        .map(|(x, p)| (x - mx) * (p.1 - my))
        .sum();
    let c = if sxx > 0.0 { sxy / sxx } else { 0.0 };
    let a = my - c * mx;
    let sse = xs
        .iter()
        .zip(points)
        .map(|(x, p)| (p.1 - a - c * x).powi(2))
        .sum();
    (a, c, sse)
}

/// Fits `tau_c(N) = tau_c_inf + c N^-b` with `b > 0`.
///
/// `(tau_c_inf, c)` are solved exactly for each `b`; `b` is found by a log
/// scan followed by golden-section refinement of the best bracket.
pub fn finite_size_extrapolate(points: &[(f64, f64)]) -> Result<ScalingResult> {
    if points.len() < 3 {
        return Err(Error::param(
            "finite-size extrapolation needs at least 3 sizes",
        ));
    }
    if points.iter().any(|&(n, t)| !(n > 0.0) || !t.is_finite()) {
        return Err(Error::param("sizes must be positive and tau_c finite"));
    }
    let sse = |log_b: f64| linear_fit(points, log_b.exp()).2;
    let (lo, hi) = (B_MIN.ln(), B_MAX.ln());
    let steps = 400;
    let grid: Vec<f64> = (0..=steps)
        .map(|i| lo + (hi - lo) * i as f64 / steps as f64)
        .collect();
    let best = (0..grid.len())
        .min_by(|&i, &j| sse(grid[i]).total_cmp(&sse(grid[j])))
        .unwrap();
    let (mut a, mut d) = (grid[best.saturating_sub(1)], grid[(best + 1).min(steps)]);
    let phi = (5f64.sqrt() - 1.0) / 2.0;
    for _ in 0..100 {
        let x1 = d - phi * (d - a);
        let x2 = a + phi * (d - a);
        if sse(x1) <= sse(x2) {
            d = x2;
        } else {
            a = x1;
        }
    }
    let log_b = 0.5 * (a + d);
    let b = log_b.exp();
    let (tau_c_inf, c, err) = linear_fit(points, b);
    let scale = points
        .iter()
        .map(|p| p.1.abs())
        .fold(0.0, f64::max)
        .max(1e-300);
    let flat = c.abs() <= 1e-9 * scale;
    let at_edge = best == 0 || best == steps;
    Ok(ScalingResult {
        points: points.to_vec(),
        tau_c_inf,
        c,
        b,
        rms_residual: (err / points.len() as f64).sqrt(),
        converged: tau_c_inf.is_finite() && (flat || !at_edge),
    })
}
