//! Exact Gillespie direct-method event loop.
//!
//! Two event channels compete:
//!
//! * creation, total rate `sum(eta_i) = 1 / tau`; the creator is drawn with
//!   probability `eta_i / sum(eta)` and mines on its own head;
//! * diffusion, total rate `E_a / tau_nd` where `E_a` counts directed arcs
//!   `i -> j` whose sender is strictly taller; a uniformly drawn active arc
//!   copies the sender's head to the receiver.
//!
//! The waiting time to the next event is `Exp(xi)` with
//! `xi = 1 / tau + E_a / tau_nd`.

use super::blocktree::{BlockId, Blocktree, GENESIS};
use super::trace::{Event, EventKind, RunTrace};
use crate::hashpower::HashPowerProfile;
use crate::rng::{seeded, SimRng};
use crate::topology::Graph;
use crate::{Error, Result};
use rand::Rng;
use std::sync::Arc;

#[derive(Debug, Clone)]
pub struct SimConfig {
    pub graph: Arc<Graph>,
    pub profile: Arc<HashPowerProfile>,
    pub tau_nd: f64,
    pub t_sim: f64,
    pub seed: u64,
    /// Keep the full `(time, kind, actor, block)` log in the trace.
    pub record_events: bool,
}

impl SimConfig {
    pub fn new(
        graph: Arc<Graph>,
        profile: Arc<HashPowerProfile>,
        tau_nd: f64,
        t_sim: f64,
        seed: u64,
    ) -> Self {
        SimConfig {
            graph,
            profile,
            tau_nd,
            t_sim,
            seed,
            record_events: false,
        }
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.tau_nd > 0.0) || !self.tau_nd.is_finite() {
            return Err(Error::param(format!(
                "tau_nd must be positive, got {}",
                self.tau_nd
            )));
        }
        if !(self.t_sim > 0.0) || !self.t_sim.is_finite() {
            return Err(Error::param(format!(
                "t_sim must be positive, got {}",
                self.t_sim
            )));
        }
        let n = self.graph.node_count();
        if n == 0 {
            return Err(Error::param("graph has no nodes"));
        }
        if self.profile.len() != n {
            return Err(Error::param(format!(
                "profile has {} nodes but graph has {n}",
                self.profile.len()
            )));
        }
        Ok(())
    }
}

/// What one call to [`Simulation::step`] did.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum StepOutcome {
    Event {
        event: Event,
        /// Sender of a diffusion event; the creator for creations.
        source: u32,
        waiting_time: f64,
        total_rate: f64,
    },
    /// The next event would land at or after `t_sim`; the clock is now `t_sim`.
    Finished,
}

/// Directed arc `src -> dst`, stored per undirected edge as `2e` (u -> v)
/// and `2e + 1` (v -> u).
#[derive(Debug, Clone)]
struct Arcs {
    endpoints: Vec<(u32, u32)>,
    // (neighbour, outgoing arc, incoming arc) per node
    incident: Vec<Vec<(u32, u32, u32)>>,
    active: Vec<u32>,
    position: Vec<u32>,
}

const INACTIVE: u32 = u32::MAX;

impl Arcs {
    fn new(g: &Graph) -> Self {
        let mut endpoints = Vec::with_capacity(2 * g.edge_count());
        let mut incident = vec![Vec::new(); g.node_count()];
        for (e, &(u, v)) in g.edges().iter().enumerate() {
            let fwd = 2 * e as u32;
            endpoints.push((u, v));
            endpoints.push((v, u));
            incident[u as usize].push((v, fwd, fwd + 1));
            incident[v as usize].push((u, fwd + 1, fwd));
        }
        Arcs {
            position: vec![INACTIVE; endpoints.len()],
            endpoints,
            incident,
            active: Vec::new(),
        }
    }

    fn set(&mut self, arc: u32, on: bool) {
        let pos = self.position[arc as usize];
        match (pos != INACTIVE, on) {
            (false, true) => {
                self.position[arc as usize] = self.active.len() as u32;
                self.active.push(arc);
            }
            (true, false) => {
                let last = *self.active.last().unwrap();
                self.active.swap_remove(pos as usize);
                if last != arc {
                    self.position[last as usize] = pos;
                }
                self.position[arc as usize] = INACTIVE;
            }
            _ => {}
        }
    }
}

/// Mutable state of one run.
#[derive(Debug, Clone)]
pub struct SimState {
    pub heads: Vec<BlockId>,
    pub head_heights: Vec<u32>,
    pub clock: f64,
    pub consensus_time: f64,
    pub tree: Blocktree,
    /// Number of nodes whose head is each block.
    holders: Vec<u32>,
}

impl SimState {
    fn genesis(n: usize) -> Self {
        SimState {
            heads: vec![GENESIS; n],
            head_heights: vec![0; n],
            clock: 0.0,
            consensus_time: 0.0,
            tree: Blocktree::new(),
            holders: vec![n as u32],
        }
    }

    /// Every node holds the same head block.
    pub fn in_consensus(&self) -> bool {
        self.holders[self.heads[0] as usize] as usize == self.heads.len()
    }

    fn move_head(&mut self, node: usize, to: BlockId) {
        let from = self.heads[node];
        self.holders[from as usize] -= 1;
        self.holders[to as usize] += 1;
        self.heads[node] = to;
        self.head_heights[node] = self.tree.height(to);
    }
}

pub struct Simulation {
    config: SimConfig,
    rng: SimRng,
    state: SimState,
    arcs: Arcs,
    cumulative_rates: Vec<f64>,
    events: Option<Vec<Event>>,
    creations: u64,
    diffusions: u64,
    check_invariants: bool,
}

impl Simulation {
    pub fn new(config: SimConfig) -> Result<Self> {
        config.validate()?;
        let n = config.graph.node_count();
        let mut acc = 0.0;
        let cumulative_rates = config
            .profile
            .rates()
            .iter()
            .map(|r| {
                acc += r;
                acc
            })
            .collect();
        Ok(Simulation {
            rng: seeded(config.seed),
            arcs: Arcs::new(&config.graph),
            state: SimState::genesis(n),
            cumulative_rates,
            events: config.record_events.then(Vec::new),
            creations: 0,
            diffusions: 0,
            check_invariants: false,
            config,
        })
    }

    /// Recompute the active arc set from scratch after every event and fail
    /// on any mismatch. Costs O(E) per event.
    pub fn with_invariant_checks(mut self, on: bool) -> Self {
        self.check_invariants = on;
        self
    }

    pub fn state(&self) -> &SimState {
        &self.state
    }

    pub fn config(&self) -> &SimConfig {
        &self.config
    }

    pub fn active_arc_count(&self) -> usize {
        self.arcs.active.len()
    }

    /// Active arcs as sorted `(sender, receiver)` pairs.
    pub fn active_edges(&self) -> Vec<(usize, usize)> {
        let mut v: Vec<(usize, usize)> = self
            .arcs
            .active
            .iter()
            .map(|&a| {
                let (s, d) = self.arcs.endpoints[a as usize];
                (s as usize, d as usize)
            })
            .collect();
        v.sort_unstable();
        v
    }

    /// `xi = sum(eta) + E_a / tau_nd` in the current state.
    pub fn total_rate(&self) -> f64 {
        self.config.profile.total_rate() + self.arcs.active.len() as f64 / self.config.tau_nd
    }

    pub fn is_finished(&self) -> bool {
        self.state.clock >= self.config.t_sim
    }

    fn refresh(&mut self, node: usize) {
        let h = self.state.head_heights[node];
        for k in 0..self.arcs.incident[node].len() {
            let (nbr, out, inc) = self.arcs.incident[node][k];
            let hn = self.state.head_heights[nbr as usize];
            self.arcs.set(out, h > hn);
            self.arcs.set(inc, hn > h);
        }
    }

    fn pick_creator(&mut self) -> usize {
        let total = *self.cumulative_rates.last().unwrap();
        let r = self.rng.random::<f64>() * total;
        self.cumulative_rates
            .partition_point(|&c| c <= r)
            .min(self.cumulative_rates.len() - 1)
    }

    /// Applies one event, or finishes the run if the next event falls past `t_sim`.
    pub fn step(&mut self) -> Result<StepOutcome> {
        if self.is_finished() {
            return Ok(StepOutcome::Finished);
        }
        let creation_rate = self.config.profile.total_rate();
        let xi = self.total_rate();
        // 1 - U lies in (0, 1], so the log is finite.
        let waiting_time = -(1.0 - self.rng.random::<f64>()).ln() / xi;
        let consensus = self.state.in_consensus();
        let remaining = self.config.t_sim - self.state.clock;
        if waiting_time >= remaining {
            if consensus {
                self.state.consensus_time += remaining;
            }
            self.state.clock = self.config.t_sim;
            return Ok(StepOutcome::Finished);
        }
        if consensus {
            self.state.consensus_time += waiting_time;
        }
        self.state.clock += waiting_time;
        let time = self.state.clock;

        let (event, source) =
            if self.rng.random::<f64>() * xi < creation_rate || self.arcs.active.is_empty() {
                let creator = self.pick_creator();
                let parent = self.state.heads[creator];
                let block = self.state.tree.push_child(parent, creator as u32, time);
                self.state.holders.push(0);
                self.state.move_head(creator, block);
                self.refresh(creator);
                self.creations += 1;
                let event = Event {
                    time,
                    kind: EventKind::Creation,
                    actor: creator as u32,
                    block,
                };
                (event, creator as u32)
            } else {
                let arc = self.arcs.active[self.rng.random_range(0..self.arcs.active.len())];
                let (src, dst) = self.arcs.endpoints[arc as usize];
                let block = self.state.heads[src as usize];
                if self.state.head_heights[src as usize] <= self.state.head_heights[dst as usize] {
                    return Err(Error::Inconsistent(format!(
                        "arc {src}->{dst} active without height gap"
                    )));
                }
                self.state.move_head(dst as usize, block);
                self.refresh(dst as usize);
                self.diffusions += 1;
                let event = Event {
                    time,
                    kind: EventKind::Diffusion,
                    actor: dst,
                    block,
                };
                (event, src)
            };
        if let Some(log) = self.events.as_mut() {
            log.push(event);
        }
        if self.check_invariants {
            self.verify()?;
        }
        Ok(StepOutcome::Event {
            event,
            source,
            waiting_time,
            total_rate: xi,
        })
    }

    /// Recomputes derived state from scratch and compares.
    pub fn verify(&self) -> Result<()> {
        let g = &self.config.graph;
        let mut expected = Vec::new();
        for &(u, v) in g.edges() {
            let (hu, hv) = (
                self.state.tree.height(self.state.heads[u as usize]),
                self.state.tree.height(self.state.heads[v as usize]),
            );
            if hu > hv {
                expected.push((u as usize, v as usize));
            } else if hv > hu {
                expected.push((v as usize, u as usize));
            }
        }
        expected.sort_unstable();
        if expected != self.active_edges() {
            return Err(Error::Inconsistent(
                "active arc set diverged from heights".into(),
            ));
        }
        for (i, &h) in self.state.heads.iter().enumerate() {
            if self.state.head_heights[i] != self.state.tree.height(h) {
                return Err(Error::Inconsistent(format!(
                    "cached height of node {i} is stale"
                )));
            }
        }
        let all_equal = self.state.heads.iter().all(|&h| h == self.state.heads[0]);
        if all_equal != self.state.in_consensus() {
            return Err(Error::Inconsistent("consensus counter diverged".into()));
        }
        if all_equal && !self.arcs.active.is_empty() {
            return Err(Error::Inconsistent("active arcs while in consensus".into()));
        }
        if self.state.consensus_time > self.state.clock {
            return Err(Error::Inconsistent("consensus time exceeds clock".into()));
        }
        Ok(())
    }

    pub fn run_to_end(&mut self) -> Result<()> {
        while let StepOutcome::Event { .. } = self.step()? {}
        Ok(())
    }

    pub fn finish(self) -> RunOutput {
        let trace = RunTrace {
            t_sim: self.config.t_sim,
            end_time: self.state.clock,
            consensus_time: self.state.consensus_time,
            final_heads: self.state.heads,
            creations: self.creations,
            diffusions: self.diffusions,
            events: self.events,
        };
        RunOutput {
            tree: self.state.tree,
            trace,
        }
    }
}

#[derive(Debug, Clone)]
pub struct RunOutput {
    pub tree: Blocktree,
    pub trace: RunTrace,
}

/// Runs from the all-genesis state until `t_sim`.
pub fn run(config: SimConfig) -> Result<RunOutput> {
    let mut sim = Simulation::new(config)?;
    sim.run_to_end()?;
    Ok(sim.finish())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::engine::{consensus_fraction, EventKind};
    use crate::hashpower::normalize_rates;
    use crate::topology::{generate_ba, generate_tree};

    fn config(g: Graph, powers: Vec<f64>, tau_nd: f64, t_sim: f64, seed: u64) -> SimConfig {
        let profile = normalize_rates(powers, 1.0).unwrap();
        SimConfig::new(Arc::new(g), Arc::new(profile), tau_nd, t_sim, seed)
    }

    #[test]
    fn first_event_is_a_creation() {
        for seed in 0..20 {
            let g = generate_ba(20, 2, seed).unwrap();
            let mut sim = Simulation::new(config(g, vec![1.0; 20], 0.5, 100.0, seed)).unwrap();
            assert_eq!(sim.active_arc_count(), 0);
            assert_eq!(sim.total_rate(), 1.0);
            match sim.step().unwrap() {
                StepOutcome::Event {
                    event, total_rate, ..
                } => {
                    assert_eq!(event.kind, EventKind::Creation);
                    assert_eq!(total_rate, 1.0);
                }
                StepOutcome::Finished => panic!("run ended before any event"),
            }
        }
    }

    #[test]
    fn total_rate_counts_active_arcs() {
        // Star with a dominant centre: the first block lands on the hub and
        // activates all four outgoing arcs.
        let star = generate_tree(5, 4).unwrap();
        let mut sim =
            Simulation::new(config(star, vec![1e15, 1.0, 1.0, 1.0, 1.0], 2.0, 100.0, 1)).unwrap();
        sim.step().unwrap();
        assert_eq!(sim.state().heads[0], 1);
        assert_eq!(sim.active_edges(), vec![(0, 1), (0, 2), (0, 3), (0, 4)]);
        assert!((sim.total_rate() - 3.0).abs() < 1e-12);
    }

    #[test]
    fn two_node_hand_trace() {
        let g = Graph::from_edges(2, [(0, 1)]).unwrap();
        let mut sim = Simulation::new(config(g, vec![1.0, 1.0], 1e-9, 100.0, 5))
            .unwrap()
            .with_invariant_checks(true);
        let StepOutcome::Event { event, .. } = sim.step().unwrap() else {
            panic!("no event")
        };
        let a = event.actor as usize;
        let b = 1 - a;
        assert_eq!(sim.active_edges(), vec![(a, b)]);
        assert!(!sim.state().in_consensus());
        let StepOutcome::Event { event, source, .. } = sim.step().unwrap() else {
            panic!("no event")
        };
        assert_eq!(event.kind, EventKind::Diffusion);
        assert_eq!((source as usize, event.actor as usize), (a, b));
        assert!(sim.active_edges().is_empty());
        assert!(sim.state().in_consensus());
        assert_eq!(sim.state().heads, vec![1, 1]);
    }

    #[test]
    fn single_node_is_a_poisson_chain() {
        let out = run(config(Graph::empty(1), vec![1.0], 1.0, 1000.0, 77)).unwrap();
        let blocks = out.tree.len() - 1;
        assert!((900..=1100).contains(&blocks), "{blocks} blocks");
        assert_eq!(out.tree.max_height() as usize, blocks);
        assert_eq!(out.trace.diffusions, 0);
        assert_eq!(consensus_fraction(&out.trace), 1.0);
        assert_eq!(out.trace.end_time, 1000.0);
    }

    #[test]
    fn invariants_hold_throughout_a_run() {
        let g = generate_ba(40, 2, 3).unwrap();
        let mut sim = Simulation::new(config(g, (1..=40).map(f64::from).collect(), 0.3, 200.0, 9))
            .unwrap()
            .with_invariant_checks(true);
        let mut last = [0u32; 40];
        while let StepOutcome::Event { .. } = sim.step().unwrap() {
            for (i, &h) in sim.state().head_heights.iter().enumerate() {
                assert!(h >= last[i], "node {i} height decreased");
                last[i] = h;
            }
        }
        assert!(sim.state().consensus_time <= sim.state().clock);
    }

    #[test]
    fn identical_seeds_identical_runs() {
        let g = generate_ba(30, 3, 1).unwrap();
        let mut c = config(g, (1..=30).map(f64::from).collect(), 0.2, 150.0, 21);
        c.record_events = true;
        let a = run(c.clone()).unwrap();
        let b = run(c.clone()).unwrap();
        assert_eq!(a.tree, b.tree);
        assert_eq!(a.trace, b.trace);
        c.seed = 22;
        assert_ne!(run(c).unwrap().tree, a.tree);
    }

    #[test]
    fn rejects_bad_configs() {
        let g = Graph::from_edges(2, [(0, 1)]).unwrap();
        assert!(Simulation::new(config(g.clone(), vec![1.0, 1.0], 0.0, 10.0, 0)).is_err());
        assert!(Simulation::new(config(g.clone(), vec![1.0, 1.0], 1.0, -1.0, 0)).is_err());
        assert!(Simulation::new(config(g, vec![1.0, 1.0, 1.0], 1.0, 10.0, 0)).is_err());
    }
}
