//! Experiment orchestration: replicated sweeps over the diffusion delay,
//! critical-delay estimation and finite-size scaling.

mod scaling;
mod spec;
mod sweep;

pub use scaling::{
    estimate_tau_c, finite_size_extrapolate, tau_c_by_size, ScalingResult, TauCEstimate,
    DEFAULT_P_THRESHOLD,
};
pub use spec::{topology_from_toml, LogGrid, RunSpec, SweepSpec};
pub use sweep::{
    build_context, run_sweep, simulate, write_rows_csv, write_summary_csv, MetricSummary,
    ReplicateContext, SingleRun, SummaryRow, SweepRow, SweepTable, ROW_PREFIX_COLUMNS,
};

use crate::parallel::Execution;
use crate::Result;

/// Sweep over several sizes plus the extrapolated critical delay.
#[derive(Debug, Clone)]
pub struct ScalingStudy {
    pub table: SweepTable,
    pub tau_c: Vec<(usize, TauCEstimate)>,
    /// `None` when fewer than 3 sizes produced a crossing.
    pub fit: Option<ScalingResult>,
}

pub fn scaling_study(spec: &SweepSpec, threshold: f64, exec: Execution) -> Result<ScalingStudy> {
    let table = run_sweep(spec, exec)?;
    let tau_c = tau_c_by_size(&table, threshold)?;
    let points: Vec<(f64, f64)> = tau_c
        .iter()
        .filter_map(|&(n, t)| t.value().map(|v| (n as f64, v)))
        .collect();
    let fit = if points.len() >= 3 {
        Some(finite_size_extrapolate(&points)?)
    } else {
        None
    };
    Ok(ScalingStudy { table, tau_c, fit })
}
