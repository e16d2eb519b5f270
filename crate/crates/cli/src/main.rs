use anyhow::{bail, Context, Result};
use clap::{Args, Parser, Subcommand, ValueEnum};
use forksim::engine::{write_binary_trace, RunDocument};
use forksim::fitting::{format_table, ks_optimal_xmin, likelihood_ratio_test, FitReport};
use forksim::harness::{
    finite_size_extrapolate, run_sweep, simulate, tau_c_by_size, topology_from_toml,
    write_rows_csv, write_summary_csv, RunSpec, SweepSpec, DEFAULT_P_THRESHOLD,
};
use forksim::hashpower::{positive_shares, read_miner_shares};
use forksim::parallel::Execution;
use forksim::topology::{
    branching_threshold_with, read_edge_list, write_edge_list, MfptMethod, TopologyKind,
};
use std::fs::File;
use std::io::{self, BufReader, BufWriter, Write};
use std::path::{Path, PathBuf};
use std::process::ExitCode;

#[derive(Parser)]
#[command(
    name = "forksim",
    version,
    about = "Blockchain fork simulation on peer-to-peer graphs"
)]
struct Cli {
    #[command(flatten)]
    global: Global,
    #[command(subcommand)]
    command: Command,
}

#[derive(Args)]
struct Global {
    /// Overrides the seed (or base seed) in the config document.
    #[arg(long, global = true)]
    seed: Option<u64>,
    /// Output file; stdout when absent.
    #[arg(long, global = true)]
    out: Option<PathBuf>,
    /// Worker threads; 1 forces sequential execution.
    #[arg(long, global = true)]
    threads: Option<usize>,
}

#[derive(Subcommand)]
enum Command {
    /// Run one simulation and print its JSON document.
    Simulate {
        #[arg(long)]
        config: PathBuf,
        /// Also write the event log in the fixed-width binary format.
        #[arg(long)]
        trace: Option<PathBuf>,
    },
    /// Run a parameter sweep and write one CSV row per run.
    Sweep {
        #[arg(long)]
        config: PathBuf,
        /// Per-(N, tau_nd) means and standard deviations.
        #[arg(long)]
        summary_out: Option<PathBuf>,
        /// Critical delay per size and its large-N extrapolation, as JSON.
        #[arg(long)]
        scaling_out: Option<PathBuf>,
        /// Consensus-probability level that defines the critical delay.
        #[arg(long, default_value_t = DEFAULT_P_THRESHOLD)]
        p_threshold: f64,
    },
    /// Distance statistics and branching threshold for an edge-list graph.
    Mfpt {
        graph: PathBuf,
        #[arg(long, default_value_t = 1.0)]
        tau: f64,
        #[arg(long, value_enum, default_value_t = Method::Auto)]
        method: Method,
    },
    /// Power-law vs exponential model selection on miner-share CSVs.
    Fit {
        #[arg(required = true)]
        files: Vec<PathBuf>,
        /// Lower cutoff; defaults to the sample minimum.
        #[arg(long, conflicts_with = "scan_xmin")]
        xmin: Option<f64>,
        /// Choose the cutoff by minimising the KS distance.
        #[arg(long)]
        scan_xmin: bool,
    },
    /// Generate a graph and write it as an edge list.
    GenGraph {
        /// TOML document with a `kind` key; overrides the flags below.
        #[arg(long)]
        config: Option<PathBuf>,
        #[arg(long, value_enum)]
        kind: Option<Kind>,
        #[arg(long)]
        nodes: Option<usize>,
        #[arg(long)]
        mean_degree: Option<f64>,
        #[arg(long)]
        m: Option<usize>,
        #[arg(long)]
        branching: Option<usize>,
    },
}

#[derive(Clone, Copy, ValueEnum)]
enum Method {
    Auto,
    Lu,
    Fundamental,
}

#[derive(Clone, Copy, ValueEnum)]
enum Kind {
    Er,
    Ba,
    Complete,
    Tree,
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match execute(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e:#}");
            ExitCode::FAILURE
        }
    }
}

fn execute(cli: Cli) -> Result<()> {
    let exec = configure_threads(cli.global.threads)?;
    let g = &cli.global;
    match cli.command {
        Command::Simulate { config, trace } => {
            let mut spec = RunSpec::from_toml(&read_text(&config)?)
                .with_context(|| config.display().to_string())?;
            if let Some(seed) = g.seed {
                spec.seed = seed;
            }
            spec.record_events |= trace.is_some();
            let single = simulate(&spec)?;
            let doc = RunDocument::new(&single.config, &single.output);
            let json = serde_json::json!({
                "run": doc,
                "metrics": single.metrics,
                "tauB": single.tau_b,
            });
            emit_json(g.out.as_deref(), &json)?;
            if let (Some(path), Some(events)) = (trace, single.output.trace.events.as_ref()) {
                write_binary_trace(events, BufWriter::new(create(&path)?))?;
            }
        }
        Command::Sweep {
            config,
            summary_out,
            scaling_out,
            p_threshold,
        } => {
            let mut spec = SweepSpec::from_toml(&read_text(&config)?)
                .with_context(|| config.display().to_string())?;
            if let Some(seed) = g.seed {
                spec.base_seed = seed;
            }
            let table = run_sweep(&spec, exec)?;
            write_rows_csv(&table, output(g.out.as_deref())?)?;
            if let Some(path) = summary_out {
                write_summary_csv(&table, BufWriter::new(create(&path)?))?;
            }
            if let Some(path) = scaling_out {
                let tau_c = tau_c_by_size(&table, p_threshold)?;
                let points: Vec<(f64, f64)> = tau_c
                    .iter()
                    .filter_map(|&(n, e)| e.value().map(|t| (n as f64, t)))
                    .collect();
                let fit = if points.len() >= 3 {
                    Some(finite_size_extrapolate(&points)?)
                } else {
                    None
                };
                let json = serde_json::json!({
                    "threshold": p_threshold,
                    "tauC": tau_c.iter().map(|(n, e)| serde_json::json!({"n": n, "estimate": e})).collect::<Vec<_>>(),
                    "fit": fit,
                });
                emit_json(Some(&path), &json)?;
            }
        }
        Command::Mfpt { graph, tau, method } => {
            let file =
                File::open(&graph).with_context(|| format!("opening {}", graph.display()))?;
            let graph_data = read_edge_list(BufReader::new(file))
                .with_context(|| graph.display().to_string())?;
            let method = match method {
                Method::Auto => MfptMethod::Auto,
                Method::Lu => MfptMethod::PerTargetLu {
                    refinement_steps: 1,
                },
                Method::Fundamental => MfptMethod::Fundamental,
            };
            let summary = branching_threshold_with(&graph_data, tau, method, exec)?;
            emit_json(g.out.as_deref(), &serde_json::to_value(summary)?)?;
        }
        Command::Fit {
            files,
            xmin,
            scan_xmin,
        } => {
            let mut rows: Vec<(String, FitReport)> = Vec::new();
            for path in &files {
                let file =
                    File::open(path).with_context(|| format!("opening {}", path.display()))?;
                let shares = read_miner_shares(BufReader::new(file))
                    .with_context(|| path.display().to_string())?;
                let data = positive_shares(&shares);
                let cutoff = if scan_xmin {
                    Some(ks_optimal_xmin(&data)?)
                } else {
                    xmin
                };
                let report = likelihood_ratio_test(&data, cutoff)
                    .with_context(|| path.display().to_string())?;
                let label = path
                    .file_stem()
                    .map_or_else(String::new, |s| s.to_string_lossy().into_owned());
                rows.push((label, report));
            }
            if rows.len() == 1 {
                emit_json(g.out.as_deref(), &serde_json::to_value(&rows[0].1)?)?;
            } else {
                let json: Vec<_> = rows
                    .iter()
                    .map(|(label, r)| serde_json::json!({"period": label, "report": r}))
                    .collect();
                emit_json(g.out.as_deref(), &serde_json::Value::Array(json))?;
                eprint!("{}", format_table(&rows));
            }
        }
        Command::GenGraph {
            config,
            kind,
            nodes,
            mean_degree,
            m,
            branching,
        } => {
            let topology = match config {
                Some(path) => topology_from_toml(&read_text(&path)?)
                    .with_context(|| path.display().to_string())?,
                None => topology_from_flags(kind, nodes, mean_degree, m, branching)?,
            };
            let graph = topology.build(g.seed.unwrap_or(0))?;
            let mut out = output(g.out.as_deref())?;
            write_edge_list(&graph, &mut out)?;
            out.flush()?;
        }
    }
    Ok(())
}

fn topology_from_flags(
    kind: Option<Kind>,
    nodes: Option<usize>,
    mean_degree: Option<f64>,
    m: Option<usize>,
    branching: Option<usize>,
) -> Result<TopologyKind> {
    let Some(kind) = kind else {
        bail!("gen-graph needs --kind or --config");
    };
    let n = nodes.context("--nodes is required")?;
    let t = match kind {
        Kind::Er => TopologyKind::Er {
            n,
            mean_degree: mean_degree.context("--mean-degree is required for er")?,
        },
        Kind::Ba => TopologyKind::Ba {
            n,
            m: m.context("--m is required for ba")?,
        },
        Kind::Complete => TopologyKind::Complete { n },
        Kind::Tree => TopologyKind::Tree {
            n,
            branching: branching.context("--branching is required for tree")?,
        },
    };
    t.validate()?;
    Ok(t)
}

fn configure_threads(threads: Option<usize>) -> Result<Execution> {
    match threads {
        Some(0) => bail!("--threads must be at least 1"),
        Some(1) => Ok(Execution::Sequential),
        #[cfg(feature = "parallel")]
        Some(n) => {
            rayon::ThreadPoolBuilder::new()
                .num_threads(n)
                .build_global()
                .context("configuring the thread pool")?;
            Ok(Execution::Parallel)
        }
        #[cfg(not(feature = "parallel"))]
        Some(_) => Ok(Execution::Sequential),
        None => Ok(Execution::default()),
    }
}

fn read_text(path: &Path) -> Result<String> {
    std::fs::read_to_string(path).with_context(|| format!("reading {}", path.display()))
}

fn create(path: &Path) -> Result<File> {
    File::create(path).with_context(|| format!("creating {}", path.display()))
}

fn output(path: Option<&Path>) -> Result<Box<dyn Write>> {
    Ok(match path {
        Some(p) => Box::new(BufWriter::new(create(p)?)),
        None => Box::new(io::stdout().lock()),
    })
}

fn emit_json(path: Option<&Path>, value: &serde_json::Value) -> Result<()> {
    let mut out = output(path)?;
    serde_json::to_writer_pretty(&mut out, value)?;
    writeln!(out)?;
    out.flush()?;
    Ok(())
}
