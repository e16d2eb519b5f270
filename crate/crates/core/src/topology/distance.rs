//! Shortest paths, random-walk mean-first-passage times, branching threshold.
//!
//! For a simple random walk with transition matrix `P = A_ij / k_i`, the
//! mean-first-passage time to a target `j` satisfies
//! `M_ij = 1 + sum_{k != j} P_ik M_kj`, i.e. `(I - Q_j) m = 1` where `Q_j`
//! is `P` with row and column `j` deleted. [`MfptMethod::PerTargetLu`]
//! solves that system once per target. [`MfptMethod::Fundamental`] uses the
//! Kemeny-Snell fundamental matrix `Z = (I - P + 1 pi^T)^-1` and
//! `M_ij = (Z_jj - Z_ij) / pi_j`, one inversion for all pairs.

use super::Graph;
use crate::parallel::Execution;
use crate::{Error, Result};
use nalgebra::{DMatrix, DVector};
use serde::{Deserialize, Serialize};
use std::collections::VecDeque;

/// Above this many nodes [`MfptMethod::Auto`] switches to the fundamental matrix.
pub const PER_TARGET_LIMIT: usize = 128;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum MfptMethod {
    /// Dense LU per target column, plus `refinement_steps` rounds of
    /// iterative refinement on the residual.
    PerTargetLu {
        refinement_steps: usize,
    },
    Fundamental,
    #[default]
    Auto,
}

/// Dense `n x n` matrix of hitting times, row = source, column = target.
#[derive(Debug, Clone, PartialEq)]
pub struct MfptMatrix {
    n: usize,
    data: Vec<f64>,
}

impl MfptMatrix {
    pub fn node_count(&self) -> usize {
        self.n
    }

    pub fn get(&self, source: usize, target: usize) -> f64 {
        self.data[source * self.n + target]
    }

    /// `<M> = sum_{i != j} M_ij / (n (n - 1))`.
    pub fn mean(&self) -> f64 {
        if self.n < 2 {
            return 0.0;
        }
        let sum: f64 = self.data.iter().sum();
        sum / (self.n * (self.n - 1)) as f64
    }

    pub fn rows(&self) -> impl Iterator<Item = &[f64]> {
        self.data.chunks(self.n.max(1))
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "camelCase")]
pub struct ShortestPathSummary {
    pub mean: f64,
    /// Reachable ordered pairs over all `n (n - 1)` ordered pairs.
    pub coverage: f64,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "camelCase")]
pub struct DistanceSummary {
    pub mean_shortest_path: f64,
    pub mean_mfpt: f64,
    pub tau: f64,
    pub tau_b: f64,
    /// `tau / <D>`, the direct-path estimate.
    pub tau_direct: f64,
    pub connected: bool,
    pub component_coverage: f64,
    pub nodes_used: usize,
}

fn bfs_distances(g: &Graph, source: usize, dist: &mut [u32], queue: &mut VecDeque<usize>) {
    dist.fill(u32::MAX);
    dist[source] = 0;
    queue.clear();
    queue.push_back(source);
    while let Some(u) = queue.pop_front() {
        let d = dist[u] + 1;
        for &w in g.neighbors(u) {
            let w = w as usize;
            if dist[w] == u32::MAX {
                dist[w] = d;
                queue.push_back(w);
            }
        }
    }
}

/// Average hop distance over reachable ordered pairs, by BFS from every node.
pub fn mean_shortest_path(g: &Graph) -> Result<ShortestPathSummary> {
    mean_shortest_path_with(g, Execution::Parallel)
}

pub fn mean_shortest_path_with(g: &Graph, exec: Execution) -> Result<ShortestPathSummary> {
    let n = g.node_count();
    let per_source = exec.map_range(n, |s| {
        let mut dist = vec![0u32; n];
        let mut queue = VecDeque::new();
        bfs_distances(g, s, &mut dist, &mut queue);
        dist.iter()
            .enumerate()
            .filter(|&(t, &d)| t != s && d != u32::MAX)
            .fold((0u64, 0u64), |(sum, cnt), (_, &d)| {
                (sum + d as u64, cnt + 1)
            })
    });
    let (sum, pairs) = per_source
        .into_iter()
        .fold((0u64, 0u64), |(a, b), (s, c)| (a + s, b + c));
    if pairs == 0 {
        return Err(Error::Undefined("mean shortest path"));
    }
    Ok(ShortestPathSummary {
        mean: sum as f64 / pairs as f64,
        coverage: pairs as f64 / (n * (n - 1)) as f64,
    })
}

fn check_walkable(g: &Graph) -> Result<()> {
    let n = g.node_count();
    if n == 0 {
        return Err(Error::InvalidGraph("graph has no nodes".into()));
    }
    if n > 1 {
        if let Some(i) = (0..n).find(|&i| g.degree(i) == 0) {
            return Err(Error::IsolatedNode(i));
        }
    }
    let (_, components) = g.component_labels();
    if components > 1 {
        return Err(Error::Disconnected { components });
    }
    Ok(())
}

/// All-pairs mean-first-passage times of a connected graph.
pub fn mfpt_matrix(g: &Graph) -> Result<MfptMatrix> {
    mfpt_matrix_with(g, MfptMethod::Auto, Execution::Parallel)
}

pub fn mfpt_matrix_with(g: &Graph, method: MfptMethod, exec: Execution) -> Result<MfptMatrix> {
    check_walkable(g)?;
    let n = g.node_count();
    if n == 1 {
        return Ok(MfptMatrix { n, data: vec![0.0] });
    }
    match method {
        MfptMethod::PerTargetLu { refinement_steps } => per_target(g, refinement_steps, exec),
        MfptMethod::Fundamental => fundamental(g),
        MfptMethod::Auto if n <= PER_TARGET_LIMIT => per_target(g, 1, exec),
        MfptMethod::Auto => fundamental(g),
    }
}

fn per_target(g: &Graph, refinement_steps: usize, exec: Execution) -> Result<MfptMatrix> {
    let n = g.node_count();
    let columns = exec.map_range(n, |j| solve_target(g, j, refinement_steps));
    let mut data = vec![0.0; n * n];
    for (j, col) in columns.into_iter().enumerate() {
        let col = col?;
        for (i, m) in col.into_iter().enumerate() {
            data[i * n + j] = m;
        }
    }
    Ok(MfptMatrix { n, data })
}

fn solve_target(g: &Graph, target: usize, refinement_steps: usize) -> Result<Vec<f64>> {
    let n = g.node_count();
    // Reduced index: nodes other than the target, in order.
    let reduced = |i: usize| if i < target { i } else { i - 1 };
    let size = n - 1;
    let mut a = DMatrix::<f64>::identity(size, size);
    for i in (0..n).filter(|&i| i != target) {
        let p = 1.0 / g.degree(i) as f64;
        for &k in g.neighbors(i) {
            let k = k as usize;
            if k != target {
                a[(reduced(i), reduced(k))] -= p;
            }
        }
    }
    let b = DVector::<f64>::from_element(size, 1.0);
    let lu = a.clone().lu();
    let mut x = lu.solve(&b).ok_or(Error::SingularSystem(target))?;
    for _ in 0..refinement_steps {
        let residual = &b - &a * &x;
        if let Some(dx) = lu.solve(&residual) {
            x += dx;
        }
    }
    if x.iter().any(|v| !v.is_finite()) {
        return Err(Error::SingularSystem(target));
    }
    let mut col = vec![0.0; n];
    for i in (0..n).filter(|&i| i != target) {
        col[i] = x[reduced(i)];
    }
    Ok(col)
}

fn fundamental(g: &Graph) -> Result<MfptMatrix> {
    let n = g.node_count();
    let two_e = 2.0 * g.edge_count() as f64;
    let pi: Vec<f64> = (0..n).map(|j| g.degree(j) as f64 / two_e).collect();
    let mut a = DMatrix::<f64>::identity(n, n);
    for i in 0..n {
        for j in 0..n {
            a[(i, j)] += pi[j];
        }
        let p = 1.0 / g.degree(i) as f64;
        for &k in g.neighbors(i) {
            a[(i, k as usize)] -= p;
        }
    }
    let z = a.lu().try_inverse().ok_or(Error::SingularSystem(0))?;
    let mut data = vec![0.0; n * n];
    for i in 0..n {
        for j in 0..n {
            if i != j {
                data[i * n + j] = (z[(j, j)] - z[(i, j)]) / pi[j];
            }
        }
    }
    Ok(MfptMatrix { n, data })
}

/// `tau_b = tau / <M>`, with `<D>` and the direct-path estimate alongside.
///
/// Disconnected graphs are evaluated on their largest component, with
/// `connected = false` and the fraction of ordered pairs actually used.
pub fn branching_threshold(g: &Graph, tau: f64) -> Result<DistanceSummary> {
    branching_threshold_with(g, tau, MfptMethod::Auto, Execution::default())
}

pub fn branching_threshold_with(
    g: &Graph,
    tau: f64,
    method: MfptMethod,
    exec: Execution,
) -> Result<DistanceSummary> {
    let n = g.node_count();
    if n < 2 {
        return Err(Error::param("branching threshold needs at least 2 nodes"));
    }
    if !(tau > 0.0) {
        return Err(Error::param(format!("tau must be positive, got {tau}")));
    }
    let connected = g.is_connected();
    let sub;
    let work = if connected {
        g
    } else {
        sub = g.induced_subgraph(&g.largest_component());
        &sub
    };
    let used = work.node_count();
    if used < 2 {
        return Err(Error::Undefined("branching threshold (no edges)"));
    }
    let d = mean_shortest_path_with(work, exec)?;
    let m = mfpt_matrix_with(work, method, exec)?.mean();
    Ok(DistanceSummary {
        mean_shortest_path: d.mean,
        mean_mfpt: m,
        tau,
        tau_b: tau / m,
        tau_direct: tau / d.mean,
        connected,
        component_coverage: (used * (used - 1)) as f64 / (n * (n - 1)) as f64,
        nodes_used: used,
    })
}
