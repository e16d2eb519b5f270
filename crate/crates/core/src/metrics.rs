//! Fork statistics of a finished run.
//!
//! The main chain is the genesis-rooted path to the highest block, ties
//! broken by the earliest discovery; every other block is an orphan.

use crate::engine::{consensus_fraction, BlockId, Blocktree, RunOutput, GENESIS};
use crate::hashpower::{gini, HashPowerProfile};
use crate::{Error, Result};
use serde::{Deserialize, Serialize};

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ChainPartition {
    /// Genesis first, tip last.
    pub main_chain: Vec<BlockId>,
    /// Ascending ids.
    pub orphans: Vec<BlockId>,
    in_main: Vec<bool>,
}

impl ChainPartition {
    pub fn is_main(&self, id: BlockId) -> bool {
        self.in_main[id as usize]
    }

    pub fn total(&self) -> usize {
        self.in_main.len()
    }

    /// `Xi = |O| / |B|`.
    pub fn orphan_rate(&self) -> f64 {
        self.orphans.len() as f64 / self.total() as f64
    }
}

pub fn partition_chain(tree: &Blocktree) -> ChainPartition {
    // Ids follow discovery order, so the first block at maximal height is
    // the earliest-discovered deepest tip.
    let max_h = tree.max_height();
    let tip = tree
        .blocks()
        .iter()
        .find(|b| b.height == max_h)
        .map_or(GENESIS, |b| b.id);
    let mut main_chain: Vec<BlockId> = tree.ancestry(tip).collect();
    main_chain.reverse();
    let mut in_main = vec![false; tree.len()];
    for &b in &main_chain {
        in_main[b as usize] = true;
    }
    let orphans = (0..tree.len() as BlockId)
        .filter(|&b| !in_main[b as usize])
        .collect();
    ChainPartition {
        main_chain,
        orphans,
        in_main,
    }
}

/// `F = (1/|M|) sum_{b in M} sum_{c in O} [parent(b) == parent(c)]`.
pub fn branch_rate(p: &ChainPartition, tree: &Blocktree) -> f64 {
    let mut orphan_siblings = vec![0u32; tree.len()];
    for &c in &p.orphans {
        if let Some(z) = tree.get(c).parent {
            orphan_siblings[z as usize] += 1;
        }
    }
    let forks: u64 = p
        .main_chain
        .iter()
        .filter_map(|&b| tree.get(b).parent)
        .map(|z| orphan_siblings[z as usize] as u64)
        .sum();
    forks as f64 / p.main_chain.len() as f64
}

#[derive(Debug, Clone, PartialEq)]
pub struct BranchLengths {
    /// 0 when there are no orphans.
    pub mean: f64,
    /// One entry per orphan leaf, in leaf id order.
    pub lengths: Vec<u32>,
}

/// Lengths of orphan-only paths from each orphan leaf up to, but not
/// including, its nearest main-chain ancestor.
pub fn branch_lengths(p: &ChainPartition, tree: &Blocktree) -> BranchLengths {
    let mut has_child = vec![false; tree.len()];
    for b in &tree.blocks()[1..] {
        has_child[b.parent.unwrap() as usize] = true;
    }
    let lengths: Vec<u32> = p
        .orphans
        .iter()
        .filter(|&&c| !has_child[c as usize])
        .map(|&leaf| tree.ancestry(leaf).take_while(|&b| !p.is_main(b)).count() as u32)
        .collect();
    let mean = if lengths.is_empty() {
        0.0
    } else {
        lengths.iter().map(|&l| l as f64).sum::<f64>() / lengths.len() as f64
    };
    BranchLengths { mean, lengths }
}

/// Mean discovery interval between consecutive main-chain blocks:
/// `(t_tip - t_genesis) / (|M| - 1)`.
pub fn main_chain_interval(p: &ChainPartition, tree: &Blocktree) -> Result<f64> {
    let m = p.main_chain.len();
    if m < 2 {
        return Err(Error::Undefined(
            "main-chain interval with fewer than 2 main blocks",
        ));
    }
    let first = tree.get(p.main_chain[0]).discovery_time;
    let last = tree.get(p.main_chain[m - 1]).discovery_time;
    Ok((last - first) / (m - 1) as f64)
}

/// Gini indices and active-miner fractions per block class.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Concentration {
    pub gini_power: Option<f64>,
    pub gini_bt: Option<f64>,
    pub gini_mc: Option<f64>,
    pub gini_oc: Option<f64>,
    pub n_bt: f64,
    pub n_mc: f64,
    pub n_oc: f64,
}

/// Per-miner block counts (genesis excluded) over all `n` nodes.
pub fn miner_counts(p: &ChainPartition, tree: &Blocktree, n: usize) -> [Vec<f64>; 3] {
    let mut bt = vec![0.0; n];
    let mut mc = vec![0.0; n];
    let mut oc = vec![0.0; n];
    for b in tree.blocks() {
        if let Some(m) = b.miner {
            let m = m as usize;
            bt[m] += 1.0;
            if p.is_main(b.id) {
                mc[m] += 1.0;
            } else {
                oc[m] += 1.0;
            }
        }
    }
    [bt, mc, oc]
}

pub fn mining_concentration(
    p: &ChainPartition,
    tree: &Blocktree,
    profile: &HashPowerProfile,
) -> Concentration {
    let n = profile.len();
    let [bt, mc, oc] = miner_counts(p, tree, n);
    let active = |w: &[f64]| w.iter().filter(|&&x| x > 0.0).count() as f64 / n as f64;
    Concentration {
        gini_power: gini(profile.powers()).ok(),
        gini_bt: gini(&bt).ok(),
        gini_mc: gini(&mc).ok(),
        gini_oc: gini(&oc).ok(),
        n_bt: active(&bt),
        n_mc: active(&mc),
        n_oc: active(&oc),
    }
}

/// Every emergent-property statistic of one run. `None` marks a value that
/// is undefined for the run, never a zero.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MetricsReport {
    pub xi: f64,
    pub branch_rate: f64,
    pub consensus_prob: f64,
    pub mean_branch_length: f64,
    pub main_chain_interval: Option<f64>,
    #[serde(flatten)]
    pub concentration: Concentration,
    pub blocks: usize,
    pub main_chain_len: usize,
}

/// CSV column names for [`MetricsReport::values`], in order.
pub const METRIC_COLUMNS: [&str; 11] = [
    "xi", "F", "P", "L", "T", "G_pi", "G_mc", "G_oc", "n_bt", "n_mc", "n_oc",
];

impl MetricsReport {
    pub fn values(&self) -> [Option<f64>; 11] {
        let c = &self.concentration;
        [
            Some(self.xi),
            Some(self.branch_rate),
            Some(self.consensus_prob),
            Some(self.mean_branch_length),
            self.main_chain_interval,
            c.gini_power,
            c.gini_mc,
            c.gini_oc,
            Some(c.n_bt),
            Some(c.n_mc),
            Some(c.n_oc),
        ]
    }
}

pub fn compute_metrics(output: &RunOutput, profile: &HashPowerProfile) -> MetricsReport {
    let tree = &output.tree;
    let p = partition_chain(tree);
    MetricsReport {
        xi: p.orphan_rate(),
        branch_rate: branch_rate(&p, tree),
        consensus_prob: consensus_fraction(&output.trace),
        mean_branch_length: branch_lengths(&p, tree).mean,
        main_chain_interval: main_chain_interval(&p, tree).ok(),
        concentration: mining_concentration(&p, tree, profile),
        blocks: tree.len(),
        main_chain_len: p.main_chain.len(),
    }
}
