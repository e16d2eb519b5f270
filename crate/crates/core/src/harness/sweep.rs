use super::spec::{RunSpec, SweepSpec};
use crate::engine::{run, RunOutput, SimConfig};
use crate::hashpower::{normalize_rates, HashPowerProfile};
use crate::metrics::{compute_metrics, MetricsReport, METRIC_COLUMNS};
use crate::parallel::Execution;
use crate::rng::{derive_seed, seeded};
use crate::stats::mean_std;
use crate::topology::{branching_threshold, Graph, TopologyKind};
use crate::Result;
use serde::Serialize;
use std::io::Write;
use std::sync::Arc;

// Seed streams; changing these changes every sweep output.
const STREAM_GRAPH: u64 = 0;
const STREAM_POWER: u64 = 1;
const STREAM_RUN: u64 = 2;

/// Graph and powers shared by every grid point of one replicate.
#[derive(Debug, Clone)]
pub struct ReplicateContext {
    pub topology: TopologyKind,
    pub graph: Arc<Graph>,
    pub profile: Arc<HashPowerProfile>,
    pub tau_b: Option<f64>,
}

pub fn build_context(
    topology: &TopologyKind,
    power: &crate::hashpower::PowerFamily,
    tau: f64,
    graph_seed: u64,
    power_seed: u64,
    with_tau_b: bool,
) -> Result<ReplicateContext> {
    let graph = topology.build(graph_seed)?;
    let powers = power.sample(graph.node_count(), &mut seeded(power_seed))?;
    let profile = normalize_rates(powers, tau)?;
    let tau_b = if with_tau_b {
        Some(branching_threshold(&graph, tau)?.tau_b)
    } else {
        None
    };
    Ok(ReplicateContext {
        topology: topology.clone(),
        graph: Arc::new(graph),
        profile: Arc::new(profile),
        tau_b,
    })
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SweepRow {
    pub n: usize,
    pub grid_index: usize,
    pub tau_nd: f64,
    pub replicate: usize,
    pub seed: u64,
    pub tau_b: Option<f64>,
    pub metrics: Option<MetricsReport>,
    pub error: Option<String>,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct MetricSummary {
    pub mean: Option<f64>,
    pub sd: Option<f64>,
    pub count: usize,
}

/// Mean and standard deviation of each metric over replicates, at one
/// `(n, tau_nd)` grid point. Undefined values are skipped.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SummaryRow {
    pub n: usize,
    pub tau_nd: f64,
    pub runs: usize,
    pub failures: usize,
    pub tau_b_mean: Option<f64>,
    pub metrics: Vec<MetricSummary>,
}

impl SummaryRow {
    pub fn metric(&self, column: &str) -> Option<&MetricSummary> {
        METRIC_COLUMNS
            .iter()
            .position(|c| *c == column)
            .map(|i| &self.metrics[i])
    }

    pub fn mean(&self, column: &str) -> Option<f64> {
        self.metric(column).and_then(|m| m.mean)
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SweepTable {
    pub spec: SweepSpec,
    pub rows: Vec<SweepRow>,
    pub summary: Vec<SummaryRow>,
}

impl SweepTable {
    /// Summary rows for one node count, in grid order.
    pub fn summary_for(&self, n: usize) -> Vec<&SummaryRow> {
        self.summary.iter().filter(|s| s.n == n).collect()
    }
}

/// Runs every `(size, tau_nd, replicate)` combination.
///
/// Each replicate draws one graph and one power profile, reused across the
/// whole grid. Failed runs are recorded in their row and do not stop the
/// sweep. Output order is fixed regardless of `exec`.
pub fn run_sweep(spec: &SweepSpec, exec: Execution) -> Result<SweepTable> {
    spec.validate()?;
    let grid = spec.tau_nd_values();
    let sizes = spec.node_counts();

    let context_keys: Vec<(usize, usize)> = (0..sizes.len())
        .flat_map(|s| (0..spec.replicates).map(move |r| (s, r)))
        .collect();
    let contexts = exec.map(context_keys, |(s, r)| {
        let path = [s as u64, r as u64];
        build_context(
            &spec.topology.with_nodes(sizes[s]),
            &spec.power,
            spec.tau,
            derive_seed(spec.base_seed, &[STREAM_GRAPH, path[0], path[1]]),
            derive_seed(spec.base_seed, &[STREAM_POWER, path[0], path[1]]),
            spec.compute_tau_b,
        )
        .map_err(|e| e.to_string())
    });

    let mut jobs = Vec::with_capacity(sizes.len() * grid.len() * spec.replicates);
    for s in 0..sizes.len() {
        for (g, &tau_nd) in grid.iter().enumerate() {
            for r in 0..spec.replicates {
                jobs.push((s, g, tau_nd, r));
            }
        }
    }
    let rows = exec.map(jobs, |(s, g, tau_nd, r)| {
        let seed = derive_seed(spec.base_seed, &[STREAM_RUN, s as u64, g as u64, r as u64]);
        let mut row = SweepRow {
            n: sizes[s],
            grid_index: g,
            tau_nd,
            replicate: r,
            seed,
            tau_b: None,
            metrics: None,
            error: None,
        };
        match &contexts[s * spec.replicates + r] {
            Err(e) => row.error = Some(e.clone()),
            Ok(ctx) => {
                row.tau_b = ctx.tau_b;
                let config = SimConfig::new(
                    ctx.graph.clone(),
                    ctx.profile.clone(),
                    tau_nd,
                    spec.t_sim,
                    seed,
                );
                match run(config) {
                    Ok(out) => row.metrics = Some(compute_metrics(&out, &ctx.profile)),
                    Err(e) => row.error = Some(e.to_string()),
                }
            }
        }
        row
    });

    let summary = summarize(&rows, &sizes, &grid);
    Ok(SweepTable {
        spec: spec.clone(),
        rows,
        summary,
    })
}

fn summarize(rows: &[SweepRow], sizes: &[usize], grid: &[f64]) -> Vec<SummaryRow> {
    let mut out = Vec::with_capacity(sizes.len() * grid.len());
    for &n in sizes {
        for (g, &tau_nd) in grid.iter().enumerate() {
            let group: Vec<&SweepRow> = rows
                .iter()
                .filter(|r| r.n == n && r.grid_index == g)
                .collect();
            let ok: Vec<&MetricsReport> = group.iter().filter_map(|r| r.metrics.as_ref()).collect();
            let tau_bs: Vec<f64> = group.iter().filter_map(|r| r.tau_b).collect();
            let metrics = (0..METRIC_COLUMNS.len())
                .map(|i| {
                    let vals: Vec<f64> = ok.iter().filter_map(|m| m.values()[i]).collect();
                    let ms = mean_std(&vals);
                    MetricSummary {
                        mean: ms.map(|x| x.0),
                        sd: ms.map(|x| x.1),
                        count: vals.len(),
                    }
                })
                .collect();
            out.push(SummaryRow {
                n,
                tau_nd,
                runs: ok.len(),
                failures: group.len() - ok.len(),
                tau_b_mean: mean_std(&tau_bs).map(|x| x.0),
                metrics,
            });
        }
    }
    out
}

fn fmt_opt(v: Option<f64>) -> String {
    v.map(|x| x.to_string()).unwrap_or_default()
}

pub const ROW_PREFIX_COLUMNS: [&str; 10] = [
    "seed",
    "topology",
    "n",
    "topology_param",
    "family",
    "family_param",
    "tau",
    "tau_nd",
    "replicate",
    "tau_b",
];

/// One CSV row per run. Undefined metrics are empty cells.
pub fn write_rows_csv<W: Write>(table: &SweepTable, out: W) -> Result<()> {
    let mut w = csv::Writer::from_writer(out);
    let mut header: Vec<&str> = ROW_PREFIX_COLUMNS.to_vec();
    header.extend(METRIC_COLUMNS);
    header.push("error");
    w.write_record(&header)?;
    let spec = &table.spec;
    for row in &table.rows {
        let mut rec = vec![
            row.seed.to_string(),
            spec.topology.name().to_string(),
            row.n.to_string(),
            spec.topology.shape_param().to_string(),
            spec.power.name().to_string(),
            spec.power.shape_param().to_string(),
            spec.tau.to_string(),
            row.tau_nd.to_string(),
            row.replicate.to_string(),
            fmt_opt(row.tau_b),
        ];
        match &row.metrics {
            Some(m) => rec.extend(m.values().iter().map(|v| fmt_opt(*v))),
            None => rec.extend(std::iter::repeat_n(String::new(), METRIC_COLUMNS.len())),
        }
        rec.push(row.error.clone().unwrap_or_default());
        w.write_record(&rec)?;
    }
    w.flush()?;
    Ok(())
}

/// One CSV row per grid point with `<metric>_mean` and `<metric>_sd` columns.
pub fn write_summary_csv<W: Write>(table: &SweepTable, out: W) -> Result<()> {
    let mut w = csv::Writer::from_writer(out);
    let mut header = vec![
        "n".to_string(),
        "tau_nd".into(),
        "runs".into(),
        "failures".into(),
        "tau_b".into(),
    ];
    for c in METRIC_COLUMNS {
        header.push(format!("{c}_mean"));
        header.push(format!("{c}_sd"));
    }
    w.write_record(&header)?;
    for s in &table.summary {
        let mut rec = vec![
            s.n.to_string(),
            s.tau_nd.to_string(),
            s.runs.to_string(),
            s.failures.to_string(),
            fmt_opt(s.tau_b_mean),
        ];
        for m in &s.metrics {
            rec.push(fmt_opt(m.mean));
            rec.push(fmt_opt(m.sd));
        }
        w.write_record(&rec)?;
    }
    w.flush()?;
    Ok(())
}

/// Result of [`simulate`].
#[derive(Debug, Clone)]
pub struct SingleRun {
    pub config: SimConfig,
    pub output: RunOutput,
    pub metrics: MetricsReport,
    pub tau_b: Option<f64>,
}

/// One run from a [`RunSpec`]; graph and powers are seeded from `spec.seed`.
pub fn simulate(spec: &RunSpec) -> Result<SingleRun> {
    let ctx = build_context(
        &spec.topology,
        &spec.power,
        spec.tau,
        derive_seed(spec.seed, &[STREAM_GRAPH]),
        derive_seed(spec.seed, &[STREAM_POWER]),
        spec.topology.node_count() >= 2,
    )?;
    let mut config = SimConfig::new(
        ctx.graph.clone(),
        ctx.profile.clone(),
        spec.tau_nd,
        spec.t_sim,
        spec.seed,
    );
    config.record_events = spec.record_events;
    let output = run(config.clone())?;
    let metrics = compute_metrics(&output, &ctx.profile);
    Ok(SingleRun {
        config,
        output,
        metrics,
        tau_b: ctx.tau_b,
    })
}
