//! Declarative experiment documents (TOML).
//!
//! ```toml
//! tau = 1.0
//! t_sim = 2000.0
//! replicates = 20
//! base_seed = 7
//! sizes = [100, 200, 400]          # optional; overrides topology.n
//!
//! [grid]                           # or: tau_nd_grid = [0.01, 0.1, 1.0]
//! min = 0.001
//! max = 10.0
//! points = 13
//!
//! [topology]
//! kind = "ba"
//! n = 100
//! m = 3
//!
//! [power]
//! family = "power_law"
//! alpha = 1.5
//! ```

use crate::hashpower::PowerFamily;
use crate::topology::TopologyKind;
use crate::{Error, Result};
use serde::{Deserialize, Serialize};

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct LogGrid {
    pub min: f64,
    pub max: f64,
    pub points: usize,
}

impl LogGrid {
    /// `[1e-3, 1e1] * tau`, 13 points (3 per decade).
    pub fn default_for(tau: f64) -> Self {
        LogGrid {
            min: 1e-3 * tau,
            max: 1e1 * tau,
            points: 13,
        }
    }

    pub fn values(&self) -> Vec<f64> {
        if self.points == 1 {
            return vec![self.min];
        }
        let (lo, hi) = (self.min.ln(), self.max.ln());
        (0..self.points)
            .map(|i| (lo + (hi - lo) * i as f64 / (self.points - 1) as f64).exp())
            .collect()
    }
}

fn default_tau() -> f64 {
    1.0
}

fn default_t_sim() -> f64 {
    20_000.0
}

fn default_replicates() -> usize {
    1
}

fn default_true() -> bool {
    true
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SweepSpec {
    pub topology: TopologyKind,
    pub power: PowerFamily,
    #[serde(default = "default_tau")]
    pub tau: f64,
    #[serde(default)]
    pub tau_nd_grid: Option<Vec<f64>>,
    #[serde(default)]
    pub grid: Option<LogGrid>,
    #[serde(default = "default_replicates")]
    pub replicates: usize,
    #[serde(default = "default_t_sim")]
    pub t_sim: f64,
    #[serde(default)]
    pub base_seed: u64,
    #[serde(default)]
    pub sizes: Option<Vec<usize>>,
    /// Emit `tau_b` of each replicate's graph alongside its rows.
    #[serde(default = "default_true")]
    pub compute_tau_b: bool,
}

impl SweepSpec {
    pub fn new(topology: TopologyKind, power: PowerFamily, grid: Vec<f64>) -> Self {
        SweepSpec {
            topology,
            power,
            tau: 1.0,
            tau_nd_grid: Some(grid),
            grid: None,
            replicates: 1,
            t_sim: default_t_sim(),
            base_seed: 0,
            sizes: None,
            compute_tau_b: true,
        }
    }

    pub fn from_toml(text: &str) -> Result<Self> {
        let spec: SweepSpec = toml::from_str(text)?;
        spec.validate()?;
        Ok(spec)
    }

    /// The explicit grid, else the `[grid]` table, else the default log grid.
    pub fn tau_nd_values(&self) -> Vec<f64> {
        match (&self.tau_nd_grid, &self.grid) {
            (Some(v), _) => v.clone(),
            (None, Some(g)) => g.values(),
            (None, None) => LogGrid::default_for(self.tau).values(),
        }
    }

    pub fn node_counts(&self) -> Vec<usize> {
        self.sizes
            .clone()
            .unwrap_or_else(|| vec![self.topology.node_count()])
    }

    pub fn validate(&self) -> Result<()> {
        if self.tau_nd_grid.is_some() && self.grid.is_some() {
            return Err(Error::param("give either tau_nd_grid or [grid], not both"));
        }
        if let Some(g) = &self.grid {
            if !(g.min > 0.0)
                || !(g.max >= g.min)
                || g.points == 0
                || (g.points == 1 && g.max != g.min)
            {
                return Err(Error::param(format!("bad log grid {g:?}")));
            }
        }
        let grid = self.tau_nd_values();
        if grid.is_empty() {
            return Err(Error::param("tau_nd grid is empty"));
        }
        if grid.iter().any(|&t| !(t > 0.0) || !t.is_finite()) {
            return Err(Error::param("tau_nd values must be positive"));
        }
        if grid.windows(2).any(|w| w[1] <= w[0]) {
            return Err(Error::param("tau_nd grid must be strictly increasing"));
        }
        if self.replicates < 1 {
            return Err(Error::param("replicates must be at least 1"));
        }
        if !(self.tau > 0.0) || !(self.t_sim > 0.0) {
            return Err(Error::param("tau and t_sim must be positive"));
        }
        if let Some(sizes) = &self.sizes {
            if sizes.is_empty() {
                return Err(Error::param("sizes is empty"));
            }
        }
        for n in self.node_counts() {
            self.topology.with_nodes(n).validate()?;
        }
        self.power.validate()
    }
}

/// A bare topology document, e.g. `kind = "ba"`, `n = 100`, `m = 3`.
pub fn topology_from_toml(text: &str) -> Result<TopologyKind> {
    let t: TopologyKind = toml::from_str(text)?;
    t.validate()?;
    Ok(t)
}

fn default_tau_nd() -> f64 {
    0.1
}

/// A single run.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RunSpec {
    pub topology: TopologyKind,
    pub power: PowerFamily,
    #[serde(default = "default_tau")]
    pub tau: f64,
    #[serde(default = "default_tau_nd")]
    pub tau_nd: f64,
    #[serde(default = "default_t_sim")]
    pub t_sim: f64,
    #[serde(default)]
    pub seed: u64,
    #[serde(default)]
    pub record_events: bool,
}

impl RunSpec {
    pub fn from_toml(text: &str) -> Result<Self> {
        let spec: RunSpec = toml::from_str(text)?;
        spec.validate()?;
        Ok(spec)
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.tau > 0.0) || !(self.tau_nd > 0.0) || !(self.t_sim > 0.0) {
            return Err(Error::param("tau, tau_nd and t_sim must be positive"));
        }
        self.topology.validate()?;
        self.power.validate()
    }
}
