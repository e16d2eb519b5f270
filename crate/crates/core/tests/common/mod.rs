//! Independent oracles shared by the integration and acceptance suites.
//! Nothing here calls into the code paths it is used to check.
#![allow(dead_code)]

use forksim::engine::{Block, Blocktree};
use forksim::topology::Graph;
use rand::Rng;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

pub fn rng(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

/// Monte-Carlo hitting times from `source`: each walk runs until it has
/// visited every node and records the first-hit step of each target.
/// Returns per-target (mean, standard error).
pub fn mc_hitting_times(
    g: &Graph,
    source: usize,
    walks: usize,
    rng: &mut impl Rng,
) -> Vec<(f64, f64)> {
    let n = g.node_count();
    let mut sum = vec![0f64; n];
    let mut sum_sq = vec![0f64; n];
    let mut first = vec![u64::MAX; n];
    for _ in 0..walks {
        first.fill(u64::MAX);
        first[source] = 0;
        let mut seen = 1;
        let mut at = source;
        let mut step = 0u64;
        while seen < n {
            let nb = g.neighbors(at);
            at = nb[rng.random_range(0..nb.len())] as usize;
            step += 1;
            if first[at] == u64::MAX {
                first[at] = step;
                seen += 1;
            }
        }
        for j in 0..n {
            let t = first[j] as f64;
            sum[j] += t;
            sum_sq[j] += t * t;
        }
    }
    let w = walks as f64;
    (0..n)
        .map(|j| {
            let mean = sum[j] / w;
            let var = (sum_sq[j] / w - mean * mean).max(0.0) * w / (w - 1.0);
            (mean, (var / w).sqrt())
        })
        .collect()
}

/// All connected simple graphs on `n` nodes, one per isomorphism class.
pub fn connected_graphs_up_to_iso(n: usize) -> Vec<Graph> {
    let pairs: Vec<(usize, usize)> = (0..n)
        .flat_map(|i| ((i + 1)..n).map(move |j| (i, j)))
        .collect();
    let mut pair_index = vec![vec![usize::MAX; n]; n];
    for (idx, &(i, j)) in pairs.iter().enumerate() {
        pair_index[i][j] = idx;
    }
    let perms = permutations(n);
    let mut canon_seen = std::collections::HashSet::new();
    let mut out = Vec::new();
    for mask in 0u64..(1u64 << pairs.len()) {
        let edges: Vec<(usize, usize)> = pairs
            .iter()
            .enumerate()
            .filter(|(b, _)| mask >> b & 1 == 1)
            .map(|(_, &e)| e)
            .collect();
        if !connected(n, &edges) {
            continue;
        }
        let canon = perms
            .iter()
            .map(|p| {
                edges.iter().fold(0u64, |m, &(u, v)| {
                    m | 1 << pair_index[p[u].min(p[v])][p[u].max(p[v])]
                })
            })
            .min()
            .unwrap();
        if canon_seen.insert(canon) {
            out.push(Graph::from_edges(n, edges).unwrap());
        }
    }
    out
}

fn permutations(n: usize) -> Vec<Vec<usize>> {
    if n == 0 {
        return vec![vec![]];
    }
    let mut out = Vec::new();
    for p in permutations(n - 1) {
        for pos in 0..=p.len() {
            let mut q = p.clone();
            q.insert(pos, n - 1);
            out.push(q);
        }
    }
    out
}

fn connected(n: usize, edges: &[(usize, usize)]) -> bool {
    let mut reach = vec![false; n];
    reach[0] = true;
    let mut changed = true;
    while changed {
        changed = false;
        for &(u, v) in edges {
            if reach[u] != reach[v] {
                reach[u] = true;
                reach[v] = true;
                changed = true;
            }
        }
    }
    reach.iter().all(|&r| r)
}

/// Random connected graph: a random spanning tree plus extra random edges.
pub fn random_connected_graph(n: usize, rng: &mut impl Rng) -> Graph {
    let mut edges = std::collections::BTreeSet::new();
    for i in 1..n {
        let j = rng.random_range(0..i);
        edges.insert((j, i));
    }
    let extra = rng.random_range(0..=n);
    for _ in 0..extra {
        let (a, b) = (rng.random_range(0..n), rng.random_range(0..n));
        if a != b {
            edges.insert((a.min(b), a.max(b)));
        }
    }
    Graph::from_edges(n, edges).unwrap()
}

/// Random blocktree with `blocks` blocks including genesis. Parents are
/// drawn uniformly from existing blocks; some discovery times repeat.
pub fn random_blocktree(blocks: usize, miners: u32, rng: &mut impl Rng) -> Blocktree {
    let mut out = vec![Block {
        id: 0,
        parent: None,
        height: 0,
        miner: None,
        discovery_time: 0.0,
    }];
    let mut t = 0.0;
    for id in 1..blocks as u64 {
        let parent = rng.random_range(0..id);
        if rng.random::<f64>() < 0.8 {
            t += rng.random::<f64>();
        }
        out.push(Block {
            id,
            parent: Some(parent),
            height: out[parent as usize].height + 1,
            miner: Some(rng.random_range(0..miners)),
            discovery_time: t,
        });
    }
    Blocktree::from_blocks(out).unwrap()
}

/// Brute-force fork statistics. Every block names the genesis-rooted path
/// ending at it; the longest path wins, ties to the earliest-discovered end
/// block, then the lowest id.
pub struct BrutePartition {
    pub main: Vec<u64>,
    pub orphans: Vec<u64>,
    pub branch_rate: f64,
    pub mean_branch_length: f64,
}

pub fn brute_force_partition(tree: &Blocktree) -> BrutePartition {
    let blocks = tree.blocks();
    let path_to = |mut b: u64| {
        let mut p = vec![b];
        while let Some(parent) = blocks[b as usize].parent {
            p.push(parent);
            b = parent;
        }
        p.reverse();
        p
    };
    let paths: Vec<Vec<u64>> = (0..blocks.len() as u64).map(path_to).collect();
    let mut best = 0usize;
    for (i, p) in paths.iter().enumerate() {
        let (bl, pl) = (paths[best].len(), p.len());
        let earlier = blocks[i].discovery_time < blocks[best].discovery_time;
        if pl > bl || (pl == bl && earlier) {
            best = i;
        }
    }
    let main = paths[best].clone();
    let orphans: Vec<u64> = (0..blocks.len() as u64)
        .filter(|b| !main.contains(b))
        .collect();
    let mut forks = 0usize;
    for &b in &main {
        for &c in &orphans {
            if let (Some(zb), Some(zc)) = (blocks[b as usize].parent, blocks[c as usize].parent) {
                if zb == zc {
                    forks += 1;
                }
            }
        }
    }
    let leaves: Vec<u64> = orphans
        .iter()
        .copied()
        .filter(|&c| !blocks.iter().any(|x| x.parent == Some(c)))
        .collect();
    let lengths: Vec<usize> = leaves
        .iter()
        .map(|&leaf| {
            paths[leaf as usize]
                .iter()
                .filter(|b| !main.contains(b))
                .count()
        })
        .collect();
    let mean_branch_length = if lengths.is_empty() {
        0.0
    } else {
        lengths.iter().sum::<usize>() as f64 / lengths.len() as f64
    };
    BrutePartition {
        branch_rate: forks as f64 / main.len() as f64,
        main,
        orphans,
        mean_branch_length,
    }
}

/// Empirical CDF distance helper: KS statistic against `cdf`, own code so
/// the library's helper is not its own oracle.
pub fn ks_distance(samples: &mut [f64], cdf: impl Fn(f64) -> f64) -> f64 {
    samples.sort_by(|a, b| a.partial_cmp(b).unwrap());
    let n = samples.len() as f64;
    let mut d: f64 = 0.0;
    for (i, &x) in samples.iter().enumerate() {
        let f = cdf(x);
        d = d.max(f - i as f64 / n).max((i + 1) as f64 / n - f);
    }
    d
}
