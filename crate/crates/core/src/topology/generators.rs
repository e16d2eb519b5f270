use super::Graph;
use crate::rng::seeded;
use crate::{Error, Result};
use rand::Rng;
use serde::{Deserialize, Serialize};

/// Erdos-Renyi `G(n, p)` with `p = mean_degree / (n - 1)`.
pub fn generate_er(n: usize, mean_degree: f64, seed: u64) -> Result<Graph> {
    check_er(n, mean_degree)?;
    let p = mean_degree / (n - 1) as f64;
    let mut rng = seeded(seed);
    let mut g = Graph::empty(n);
    for i in 0..n {
        for j in (i + 1)..n {
            if rng.random::<f64>() < p {
                g.push_edge(i, j);
            }
        }
    }
    Ok(g)
}

/// Barabasi-Albert preferential attachment grown from an `m`-clique.
///
/// Every later node attaches to `m` distinct earlier nodes chosen with
/// probability proportional to degree, so `E = m (n - m) + m (m - 1) / 2`.
pub fn generate_ba(n: usize, m: usize, seed: u64) -> Result<Graph> {
    check_ba(n, m)?;
    let mut rng = seeded(seed);
    let mut g = Graph::empty(n);
    // One entry per edge endpoint: uniform picks are degree-proportional.
    let mut endpoints: Vec<u32> = Vec::with_capacity(2 * m * n);
    for i in 0..m {
        for j in (i + 1)..m {
            g.push_edge(i, j);
            endpoints.extend([i as u32, j as u32]);
        }
    }
    let mut chosen: Vec<usize> = Vec::with_capacity(m);
    for new in m..n {
        chosen.clear();
        if new == m {
            chosen.extend(0..m);
        } else {
            while chosen.len() < m {
                let t = endpoints[rng.random_range(0..endpoints.len())] as usize;
                if !chosen.contains(&t) {
                    chosen.push(t);
                }
            }
        }
        for &t in &chosen {
            g.push_edge(new, t);
            endpoints.extend([new as u32, t as u32]);
        }
    }
    Ok(g)
}

pub fn generate_complete(n: usize) -> Result<Graph> {
    check_complete(n)?;
    let mut g = Graph::empty(n);
    for i in 0..n {
        for j in (i + 1)..n {
            g.push_edge(i, j);
        }
    }
    Ok(g)
}

/// Complete `branching`-ary tree filled level by level (node `i > 0` hangs
/// off `(i - 1) / branching`).
pub fn generate_tree(n: usize, branching: usize) -> Result<Graph> {
    check_tree(n, branching)?;
    let mut g = Graph::empty(n);
    for i in 1..n {
        g.push_edge((i - 1) / branching, i);
    }
    Ok(g)
}

fn check_er(n: usize, mean_degree: f64) -> Result<()> {
    if n < 2 {
        return Err(Error::param(format!("ER graph needs n >= 2, got {n}")));
    }
    if !(mean_degree > 0.0) {
        return Err(Error::param(format!(
            "mean degree must be positive, got {mean_degree}"
        )));
    }
    let max = (n - 1) as f64;
    if mean_degree > max {
        return Err(Error::param(format!(
            "mean degree {mean_degree} exceeds complete-graph density {max}"
        )));
    }
    Ok(())
}

fn check_ba(n: usize, m: usize) -> Result<()> {
    if m < 1 || m >= n {
        return Err(Error::param(format!(
            "BA graph needs n > m >= 1, got n={n}, m={m}"
        )));
    }
    Ok(())
}

fn check_complete(n: usize) -> Result<()> {
    if n < 2 {
        return Err(Error::param(format!(
            "complete graph needs n >= 2, got {n}"
        )));
    }
    Ok(())
}

fn check_tree(n: usize, branching: usize) -> Result<()> {
    if n < 2 || branching < 1 {
        return Err(Error::param(format!(
            "tree needs n >= 2 and branching >= 1, got n={n}, branching={branching}"
        )));
    }
    Ok(())
}

/// Declarative description of a graph family instance.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case", deny_unknown_fields)]
pub enum TopologyKind {
    Er { n: usize, mean_degree: f64 },
    Ba { n: usize, m: usize },
    Complete { n: usize },
    Tree { n: usize, branching: usize },
}

impl TopologyKind {
    pub fn build(&self, seed: u64) -> Result<Graph> {
        match *self {
            TopologyKind::Er { n, mean_degree } => generate_er(n, mean_degree, seed),
            TopologyKind::Ba { n, m } => generate_ba(n, m, seed),
            TopologyKind::Complete { n } => generate_complete(n),
            TopologyKind::Tree { n, branching } => generate_tree(n, branching),
        }
    }

    /// Parameter checks of [`build`](Self::build) without building.
    pub fn validate(&self) -> Result<()> {
        match *self {
            TopologyKind::Er { n, mean_degree } => check_er(n, mean_degree),
            TopologyKind::Ba { n, m } => check_ba(n, m),
            TopologyKind::Complete { n } => check_complete(n),
            TopologyKind::Tree { n, branching } => check_tree(n, branching),
        }
    }

    pub fn node_count(&self) -> usize {
        match *self {
            TopologyKind::Er { n, .. }
            | TopologyKind::Ba { n, .. }
            | TopologyKind::Complete { n }
            | TopologyKind::Tree { n, .. } => n,
        }
    }

    /// Same family with a different node count.
    pub fn with_nodes(&self, n: usize) -> Self {
        let mut t = self.clone();
        match &mut t {
            TopologyKind::Er { n: x, .. }
            | TopologyKind::Ba { n: x, .. }
            | TopologyKind::Complete { n: x }
            | TopologyKind::Tree { n: x, .. } => *x = n,
        }
        t
    }

    pub fn name(&self) -> &'static str {
        match self {
            TopologyKind::Er { .. } => "er",
            TopologyKind::Ba { .. } => "ba",
            TopologyKind::Complete { .. } => "complete",
            TopologyKind::Tree { .. } => "tree",
        }
    }

    /// The family's shape parameter (`<k>`, `m`, or `r`); NaN for complete graphs.
    pub fn shape_param(&self) -> f64 {
        match *self {
            TopologyKind::Er { mean_degree, .. } => mean_degree,
            TopologyKind::Ba { m, .. } => m as f64,
            TopologyKind::Complete { .. } => f64::NAN,
            TopologyKind::Tree { branching, .. } => branching as f64,
        }
    }
}
