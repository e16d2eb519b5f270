//! Model selection between power-law and exponential distributions.
//!
//! Continuous maximum-likelihood fits on the tail `x >= xmin`, then a
//! Vuong-style normalised log-likelihood ratio: `R > 0` favours the power
//! law, `R < 0` the exponential, and the sign counts as significant when
//! `p < 0.05`.

use crate::stats::{ks_statistic, mean_std, normal_two_sided_p};
use crate::{Error, Result};
use serde::{Deserialize, Serialize};
use std::fmt::Write as _;

pub const SIGNIFICANCE: f64 = 0.05;
/// Below this many tail samples a report is flagged as low-power.
pub const MIN_SAMPLES: usize = 10;

/// Empirical survival function `P(X > x)`.
#[derive(Debug, Clone, PartialEq)]
pub struct Ccdf {
    sorted: Vec<f64>,
}

impl Ccdf {
    /// Fraction of samples strictly greater than `x`.
    pub fn at(&self, x: f64) -> f64 {
        let le = self.sorted.partition_point(|&v| v <= x);
        (self.sorted.len() - le) as f64 / self.sorted.len() as f64
    }

    /// `(x, P(X > x))` at every distinct sample value, ascending.
    pub fn points(&self) -> Vec<(f64, f64)> {
        let mut out: Vec<(f64, f64)> = Vec::new();
        for &x in &self.sorted {
            if out.last().is_none_or(|&(px, _)| px != x) {
                out.push((x, self.at(x)));
            }
        }
        out
    }
}

pub fn ccdf(data: &[f64]) -> Result<Ccdf> {
    if data.is_empty() {
        return Err(Error::param("CCDF of empty data"));
    }
    if data.iter().any(|x| !x.is_finite()) {
        return Err(Error::param("CCDF data must be finite"));
    }
    let mut sorted = data.to_vec();
    sorted.sort_by(f64::total_cmp);
    Ok(Ccdf { sorted })
}

/// `alpha = 1 + n / sum(ln(x_i / xmin))`.
pub fn fit_power_law(data: &[f64], xmin: f64) -> Result<f64> {
    if !(xmin > 0.0) {
        return Err(Error::param(format!("xmin must be positive, got {xmin}")));
    }
    if data.len() < 2 {
        return Err(Error::param("power-law fit needs at least 2 samples"));
    }
    if let Some(x) = data.iter().find(|&&x| !(x >= xmin)) {
        return Err(Error::param(format!("sample {x} below xmin {xmin}")));
    }
    let log_sum: f64 = data.iter().map(|x| (x / xmin).ln()).sum();
    if log_sum <= 0.0 {
        return Err(Error::Undefined("power-law exponent (all samples at xmin)"));
    }
    Ok(1.0 + data.len() as f64 / log_sum)
}

/// Sample mean, the MLE of the exponential mean.
pub fn fit_exponential(data: &[f64]) -> Result<f64> {
    if data.is_empty() {
        return Err(Error::param("exponential fit needs at least 1 sample"));
    }
    if data.iter().any(|&x| !(x > 0.0) || !x.is_finite()) {
        return Err(Error::param(
            "exponential fit needs positive finite samples",
        ));
    }
    Ok(data.iter().sum::<f64>() / data.len() as f64)
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "camelCase")]
pub struct FitReport {
    pub alpha_hat: f64,
    /// CCDF exponent `1 - alpha`.
    pub beta: f64,
    pub lambda_hat: f64,
    #[serde(rename = "R")]
    pub r: f64,
    pub p_value: f64,
    pub n: usize,
    pub xmin: f64,
    pub low_power: bool,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Preferred {
    PowerLaw,
    Exponential,
    Inconclusive,
}

impl FitReport {
    pub fn significant(&self) -> bool {
        self.p_value < SIGNIFICANCE
    }

    pub fn preferred(&self) -> Preferred {
        match (self.significant(), self.r > 0.0) {
            (false, _) => Preferred::Inconclusive,
            (true, true) => Preferred::PowerLaw,
            (true, false) => Preferred::Exponential,
        }
    }
}

/// Fits both families on `x >= xmin` (default: the sample minimum) and
/// compares them.
///
/// The exponential is conditioned on the same support, `f(x) = mu
/// exp(-mu (x - xmin))` with `mu = 1 / (mean - xmin)`, so both densities
/// integrate to one over the tail. `lambda_hat` reports the plain sample
/// mean of the tail.
pub fn likelihood_ratio_test(data: &[f64], xmin: Option<f64>) -> Result<FitReport> {
    if data.iter().any(|&x| !(x > 0.0) || !x.is_finite()) {
        return Err(Error::param(
            "model selection needs positive finite samples",
        ));
    }
    let xmin = match xmin {
        Some(x) => x,
        None => data
            .iter()
            .copied()
            .min_by(f64::total_cmp)
            .ok_or_else(|| Error::param("model selection on empty data"))?,
    };
    let tail: Vec<f64> = data.iter().copied().filter(|&x| x >= xmin).collect();
    let alpha = fit_power_law(&tail, xmin)?;
    let lambda = fit_exponential(&tail)?;
    let mu = 1.0 / (lambda - xmin);
    let ln_pl_norm = (alpha - 1.0).ln() - xmin.ln();
    let diffs: Vec<f64> = tail
        .iter()
        .map(|&x| {
            let ln_pl = ln_pl_norm - alpha * (x / xmin).ln();
            let ln_exp = mu.ln() - mu * (x - xmin);
            ln_pl - ln_exp
        })
        .collect();
    let n = diffs.len();
    let r: f64 = diffs.iter().sum();
    let (_, sigma) = mean_std(&diffs).unwrap();
    if !(sigma > 0.0) {
        return Err(Error::Undefined("likelihood-ratio p-value (zero variance)"));
    }
    let z = r / (sigma * (n as f64).sqrt());
    Ok(FitReport {
        alpha_hat: alpha,
        beta: 1.0 - alpha,
        lambda_hat: lambda,
        r,
        p_value: normal_two_sided_p(z),
        n,
        xmin,
        low_power: n < MIN_SAMPLES,
    })
}

/// Chooses `xmin` among the distinct sample values by minimising the KS
/// distance between the tail and its fitted power law. Candidates keep at
/// least [`MIN_SAMPLES`] tail points.
pub fn ks_optimal_xmin(data: &[f64]) -> Result<f64> {
    let mut sorted = data.to_vec();
    sorted.retain(|x| *x > 0.0 && x.is_finite());
    sorted.sort_by(f64::total_cmp);
    if sorted.len() < MIN_SAMPLES {
        return Err(Error::param("too few positive samples to scan xmin"));
    }
    let mut best: Option<(f64, f64)> = None;
    let mut start = 0;
    while start + MIN_SAMPLES <= sorted.len() {
        let xmin = sorted[start];
        let mut tail = sorted[start..].to_vec();
        if let Ok(alpha) = fit_power_law(&tail, xmin) {
            let d = ks_statistic(&mut tail, |x| 1.0 - (x / xmin).powf(1.0 - alpha));
            if best.is_none_or(|(bd, _)| d < bd) {
                best = Some((d, xmin));
            }
        }
        start = sorted.partition_point(|&v| v <= xmin);
    }
    best.map(|(_, x)| x)
        .ok_or(Error::Undefined("KS-optimal xmin"))
}

/// p-values print with 3 decimals; anything below 0.0005 shows as `0.000`.
pub fn format_p(p: f64) -> String {
    format!("{p:.3}")
}

/// Plain-text table with one row per labelled period.
pub fn format_table(rows: &[(String, FitReport)]) -> String {
    let mut out = String::new();
    let _ = writeln!(
        out,
        "{:<12} {:>8} {:>12} {:>7} {:>8} {:>10} {:>7}",
        "period", "n", "R", "p", "alpha", "lambda", "sig"
    );
    for (label, r) in rows {
        let _ = writeln!(
            out,
            "{:<12} {:>8} {:>12.2} {:>7} {:>8.2} {:>10.4} {:>7}",
            label,
            r.n,
            r.r,
            format_p(r.p_value),
            r.alpha_hat,
            r.lambda_hat,
            if r.significant() { "*" } else { "" }
        );
    }
    out
}
