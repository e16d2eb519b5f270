//! Node powers, block-creation rates and concentration statistics.
//!
//! A node with power `pi_i` creates blocks at rate
//! `eta_i = pi_i / sum(pi) / tau`, so the whole network produces one block
//! per `tau` on average regardless of how the powers are scaled.

use crate::{Error, Result};
use rand::Rng;
use serde::{Deserialize, Serialize};
use std::io::Read;

/// Inverse CDF of the continuous Pareto law `P(x) ~ x^-alpha`, `x >= xmin`.
pub fn pareto_from_uniform(u: f64, alpha: f64, xmin: f64) -> f64 {
    xmin * (1.0 - u).powf(-1.0 / (alpha - 1.0))
}

/// Inverse CDF of the exponential law with mean `lambda`.
pub fn exponential_from_uniform(u: f64, lambda: f64) -> f64 {
    -lambda * (-u).ln_1p()
}

// Uniform on (0, 1): zero is redrawn so exponential draws stay positive.
fn open_uniform<R: Rng + ?Sized>(rng: &mut R) -> f64 {
    loop {
        let u: f64 = rng.random();
        if u > 0.0 {
            return u;
        }
    }
}

fn check_power_law(alpha: f64, xmin: f64) -> Result<()> {
    if !(alpha > 1.0) || !alpha.is_finite() {
        return Err(Error::param(format!(
            "power-law exponent must exceed 1, got {alpha}"
        )));
    }
    if !(xmin > 0.0) || !xmin.is_finite() {
        return Err(Error::param(format!("xmin must be positive, got {xmin}")));
    }
    Ok(())
}

fn check_exponential(lambda: f64) -> Result<()> {
    if !(lambda > 0.0) || !lambda.is_finite() {
        return Err(Error::param(format!(
            "exponential mean must be positive, got {lambda}"
        )));
    }
    Ok(())
}

pub fn sample_power_law<R: Rng + ?Sized>(
    n: usize,
    alpha: f64,
    xmin: f64,
    rng: &mut R,
) -> Result<Vec<f64>> {
    check_power_law(alpha, xmin)?;
    Ok((0..n)
        .map(|_| pareto_from_uniform(rng.random(), alpha, xmin))
        .collect())
}

pub fn sample_exponential<R: Rng + ?Sized>(n: usize, lambda: f64, rng: &mut R) -> Result<Vec<f64>> {
    check_exponential(lambda)?;
    Ok((0..n)
        .map(|_| exponential_from_uniform(open_uniform(rng), lambda))
        .collect())
}

fn default_xmin() -> f64 {
    1.0
}

/// Distribution family for per-node powers.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "family", rename_all = "snake_case", deny_unknown_fields)]
pub enum PowerFamily {
    PowerLaw {
        alpha: f64,
        #[serde(default = "default_xmin")]
        xmin: f64,
    },
    Exponential {
        lambda: f64,
    },
    /// Every node has the same power.
    Equal,
}

impl PowerFamily {
    pub fn validate(&self) -> Result<()> {
        match *self {
            PowerFamily::PowerLaw { alpha, xmin } => check_power_law(alpha, xmin),
            PowerFamily::Exponential { lambda } => check_exponential(lambda),
            PowerFamily::Equal => Ok(()),
        }
    }

    pub fn sample<R: Rng + ?Sized>(&self, n: usize, rng: &mut R) -> Result<Vec<f64>> {
        match *self {
            PowerFamily::PowerLaw { alpha, xmin } => sample_power_law(n, alpha, xmin, rng),
            PowerFamily::Exponential { lambda } => sample_exponential(n, lambda, rng),
            PowerFamily::Equal => Ok(vec![1.0; n]),
        }
    }

    pub fn name(&self) -> &'static str {
        match self {
            PowerFamily::PowerLaw { .. } => "power_law",
            PowerFamily::Exponential { .. } => "exponential",
            PowerFamily::Equal => "equal",
        }
    }

    /// `alpha` or `lambda`; NaN for equal powers.
    pub fn shape_param(&self) -> f64 {
        match *self {
            PowerFamily::PowerLaw { alpha, .. } => alpha,
            PowerFamily::Exponential { lambda } => lambda,
            PowerFamily::Equal => f64::NAN,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct HashPowerProfile {
    powers: Vec<f64>,
    rates: Vec<f64>,
    tau: f64,
}

impl HashPowerProfile {
    pub fn powers(&self) -> &[f64] {
        &self.powers
    }

    pub fn rates(&self) -> &[f64] {
        &self.rates
    }

    pub fn tau(&self) -> f64 {
        self.tau
    }

    pub fn total_rate(&self) -> f64 {
        1.0 / self.tau
    }

    pub fn len(&self) -> usize {
        self.powers.len()
    }

    pub fn is_empty(&self) -> bool {
        self.powers.is_empty()
    }
}

/// Turns raw powers into creation rates summing to `1 / tau`.
pub fn normalize_rates(powers: Vec<f64>, tau: f64) -> Result<HashPowerProfile> {
    if powers.is_empty() {
        return Err(Error::param("no powers given"));
    }
    if !(tau > 0.0) || !tau.is_finite() {
        return Err(Error::param(format!("tau must be positive, got {tau}")));
    }
    if let Some((i, p)) = powers
        .iter()
        .enumerate()
        .find(|(_, p)| !(**p > 0.0) || !p.is_finite())
    {
        return Err(Error::param(format!(
            "power of node {i} must be positive and finite, got {p}"
        )));
    }
    let total: f64 = powers.iter().sum();
    let rates = powers.iter().map(|p| p / total / tau).collect();
    Ok(HashPowerProfile { powers, rates, tau })
}

/// Gini index of non-negative weights.
///
/// Sorted ascending with 1-based rank `i`:
/// `G = 2 sum(i w_i) / (n sum(w)) - (n + 1) / n`.
pub fn gini(weights: &[f64]) -> Result<f64> {
    if weights.iter().any(|w| *w < 0.0 || !w.is_finite()) {
        return Err(Error::param("Gini weights must be finite and non-negative"));
    }
    let total: f64 = weights.iter().sum();
    if weights.is_empty() || total <= 0.0 {
        return Err(Error::Undefined("Gini index of an all-zero vector"));
    }
    let mut sorted = weights.to_vec();
    sorted.sort_by(f64::total_cmp);
    let n = sorted.len() as f64;
    let ranked: f64 = sorted
        .iter()
        .enumerate()
        .map(|(i, w)| (i + 1) as f64 * w)
        .sum();
    Ok((2.0 * ranked / (n * total) - (n + 1.0) / n).max(0.0))
}

/// One row of a miner-share file.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MinerShare {
    pub miner_id: String,
    pub blocks: f64,
}

/// Reads a `miner_id,blocks` CSV.
pub fn read_miner_shares<R: Read>(input: R) -> Result<Vec<MinerShare>> {
    let mut reader = csv::ReaderBuilder::new()
        .trim(csv::Trim::All)
        .from_reader(input);
    let headers = reader.headers()?.clone();
    if headers.len() != 2 || &headers[0] != "miner_id" || &headers[1] != "blocks" {
        return Err(Error::Parse {
            line: 1,
            message: format!(
                "expected header `miner_id,blocks`, got `{}`",
                headers.iter().collect::<Vec<_>>().join(",")
            ),
        });
    }
    let mut rows = Vec::new();
    for record in reader.deserialize::<MinerShare>() {
        let row = record.map_err(|e| Error::Parse {
            line: e.position().map_or(0, |p| p.line() as usize),
            message: e.to_string(),
        })?;
        if row.blocks < 0.0 || !row.blocks.is_finite() {
            return Err(Error::param(format!(
                "miner {} has invalid block count {}",
                row.miner_id, row.blocks
            )));
        }
        rows.push(row);
    }
    Ok(rows)
}

/// Strictly positive block counts, for fitting.
pub fn positive_shares(rows: &[MinerShare]) -> Vec<f64> {
    rows.iter().map(|r| r.blocks).filter(|b| *b > 0.0).collect()
}
