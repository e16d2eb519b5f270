//! Undirected P2P graphs and their diffusion analytics.

mod distance;
mod generators;
mod io;

pub use distance::{
    branching_threshold, branching_threshold_with, mean_shortest_path, mfpt_matrix,
    mfpt_matrix_with, DistanceSummary, MfptMatrix, MfptMethod, ShortestPathSummary,
};
pub use generators::{generate_ba, generate_complete, generate_er, generate_tree, TopologyKind};
pub use io::{read_edge_list, write_edge_list};

use crate::{Error, Result};
use std::collections::HashSet;

/// Simple undirected graph on nodes `0..n`.
///
/// Edges are kept as `(u, v)` with `u < v`, in insertion order; adjacency
/// lists are in the same order, which keeps every downstream computation
/// deterministic.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Graph {
    n: usize,
    edges: Vec<(u32, u32)>,
    adjacency: Vec<Vec<u32>>,
}

impl Graph {
    /// Graph with `n` nodes and no edges.
    pub fn empty(n: usize) -> Self {
        Graph {
            n,
            edges: Vec::new(),
            adjacency: vec![Vec::new(); n],
        }
    }

    /// Builds a graph, rejecting self-loops, duplicates and out-of-range ids.
    pub fn from_edges<I>(n: usize, edges: I) -> Result<Self>
    where
        I: IntoIterator<Item = (usize, usize)>,
    {
        let mut g = Graph::empty(n);
        let mut seen = HashSet::new();
        for (u, v) in edges {
            if u >= n || v >= n {
                return Err(Error::InvalidGraph(format!(
                    "edge ({u}, {v}) out of range for {n} nodes"
                )));
            }
            if u == v {
                return Err(Error::InvalidGraph(format!("self-loop on node {u}")));
            }
            let key = (u.min(v), u.max(v));
            if !seen.insert(key) {
                return Err(Error::InvalidGraph(format!(
                    "duplicate edge ({}, {})",
                    key.0, key.1
                )));
            }
            g.push_edge(key.0, key.1);
        }
        Ok(g)
    }

    // Caller guarantees validity.
    pub(crate) fn push_edge(&mut self, u: usize, v: usize) {
        let (a, b) = (u.min(v), u.max(v));
        self.edges.push((a as u32, b as u32));
        self.adjacency[u].push(v as u32);
        self.adjacency[v].push(u as u32);
    }

    pub fn node_count(&self) -> usize {
        self.n
    }

    pub fn edge_count(&self) -> usize {
        self.edges.len()
    }

    pub fn edges(&self) -> &[(u32, u32)] {
        &self.edges
    }

    pub fn neighbors(&self, i: usize) -> &[u32] {
        &self.adjacency[i]
    }

    pub fn degree(&self, i: usize) -> usize {
        self.adjacency[i].len()
    }

    pub fn degrees(&self) -> Vec<usize> {
        self.adjacency.iter().map(Vec::len).collect()
    }

    /// `<k> = 2E / N`.
    pub fn mean_degree(&self) -> f64 {
        if self.n == 0 {
            0.0
        } else {
            2.0 * self.edges.len() as f64 / self.n as f64
        }
    }

    pub fn has_edge(&self, u: usize, v: usize) -> bool {
        let (a, b) = if self.degree(u) <= self.degree(v) {
            (u, v)
        } else {
            (v, u)
        };
        self.adjacency[a].iter().any(|&w| w as usize == b)
    }

    /// Copy of the graph with one extra edge.
    pub fn with_edge(&self, u: usize, v: usize) -> Result<Self> {
        if u >= self.n || v >= self.n || u == v || self.has_edge(u, v) {
            return Err(Error::InvalidGraph(format!("cannot add edge ({u}, {v})")));
        }
        let mut g = self.clone();
        g.push_edge(u, v);
        Ok(g)
    }

    /// Connected-component label per node; labels are `0..count` in order
    /// of first appearance.
    pub fn component_labels(&self) -> (Vec<usize>, usize) {
        let mut label = vec![usize::MAX; self.n];
        let mut count = 0;
        let mut stack = Vec::new();
        for start in 0..self.n {
            if label[start] != usize::MAX {
                continue;
            }
            label[start] = count;
            stack.push(start);
            while let Some(u) = stack.pop() {
                for &w in &self.adjacency[u] {
                    let w = w as usize;
                    if label[w] == usize::MAX {
                        label[w] = count;
                        stack.push(w);
                    }
                }
            }
            count += 1;
        }
        (label, count)
    }

    pub fn is_connected(&self) -> bool {
        self.n <= 1 || self.component_labels().1 == 1
    }

    /// Nodes of the largest connected component, ascending. Ties go to the
    /// component containing the lowest node id.
    pub fn largest_component(&self) -> Vec<usize> {
        let (label, count) = self.component_labels();
        let mut sizes = vec![0usize; count];
        for &l in &label {
            sizes[l] += 1;
        }
        let best = (0..count).fold(0, |best, c| if sizes[c] > sizes[best] { c } else { best });
        (0..self.n).filter(|&i| label[i] == best).collect()
    }

    /// Subgraph induced by `nodes`, relabelled `0..nodes.len()` in the given order.
    pub fn induced_subgraph(&self, nodes: &[usize]) -> Graph {
        let mut index = vec![usize::MAX; self.n];
        for (new, &old) in nodes.iter().enumerate() {
            index[old] = new;
        }
        let mut g = Graph::empty(nodes.len());
        for &(u, v) in &self.edges {
            let (a, b) = (index[u as usize], index[v as usize]);
            if a != usize::MAX && b != usize::MAX {
                g.push_edge(a, b);
            }
        }
        g
    }
}
