mod common;

use forksim::engine::*;
use forksim::hashpower::{normalize_rates, sample_exponential};
use forksim::metrics::{compute_metrics, partition_chain};
use forksim::rng::seeded;
use forksim::stats::ks_p_value;
use forksim::topology::{generate_ba, generate_complete, Graph};
use std::sync::Arc;

fn config(g: Graph, powers: Vec<f64>, tau: f64, tau_nd: f64, t_sim: f64, seed: u64) -> SimConfig {
    let profile = normalize_rates(powers, tau).unwrap();
    SimConfig::new(Arc::new(g), Arc::new(profile), tau_nd, t_sim, seed)
}

#[test]
fn rescaled_waiting_times_are_unit_exponential() {
    let g = generate_ba(30, 3, 2).unwrap();
    let powers = sample_exponential(30, 0.05, &mut seeded(2)).unwrap();
    let mut sim = Simulation::new(config(g, powers, 1.0, 0.1, 1e12, 4)).unwrap();
    let mut scaled = Vec::with_capacity(200_000);
    while scaled.len() < 200_000 {
        if let StepOutcome::Event {
            waiting_time,
            total_rate,
            ..
        } = sim.step().unwrap()
        {
            scaled.push(waiting_time * total_rate);
        }
    }
    let n = scaled.len();
    let d = common::ks_distance(&mut scaled, |x| 1.0 - (-x).exp());
    let p = ks_p_value(d, n);
    assert!(p > 0.01, "KS d={d} p={p}");
}

#[test]
fn creators_follow_rate_shares() {
    let g = generate_complete(10).unwrap();
    let powers: Vec<f64> = (1..=10).map(f64::from).collect();
    let total: f64 = powers.iter().sum();
    let mut sim = Simulation::new(config(g, powers.clone(), 1.0, 0.01, 1e12, 8)).unwrap();
    let mut counts = [0u64; 10];
    let mut creations = 0u64;
    while creations < 100_000 {
        if let StepOutcome::Event { event, .. } = sim.step().unwrap() {
            if event.kind == EventKind::Creation {
                counts[event.actor as usize] += 1;
                creations += 1;
            }
        }
    }
    for (i, &c) in counts.iter().enumerate() {
        let p = powers[i] / total;
        let expected = p * creations as f64;
        let sigma = (creations as f64 * p * (1.0 - p)).sqrt();
        assert!(
            (c as f64 - expected).abs() <= 3.0 * sigma,
            "node {i}: {c} vs {expected} +- {sigma}"
        );
    }
}

#[test]
fn process_depends_only_on_delay_ratio() {
    let g = Arc::new(generate_ba(40, 3, 5).unwrap());
    let powers = sample_exponential(40, 0.05, &mut seeded(5)).unwrap();
    let mut xi_a = Vec::new();
    let mut xi_b = Vec::new();
    let mut identical = 0;
    for seed in 0..100 {
        let run_with = |scale: f64| {
            let profile = Arc::new(normalize_rates(powers.clone(), scale).unwrap());
            let out = run(SimConfig::new(
                g.clone(),
                profile.clone(),
                0.2 * scale,
                100.0 * scale,
                seed,
            ))
            .unwrap();
            compute_metrics(&out, &profile).xi
        };
        let (a, b) = (run_with(1.0), run_with(8.0));
        identical += usize::from(a == b);
        xi_a.push(a);
        xi_b.push(b);
    }
    let mean = |v: &[f64]| v.iter().sum::<f64>() / v.len() as f64;
    assert!(
        (mean(&xi_a) - mean(&xi_b)).abs() < 0.005,
        "{} vs {}",
        mean(&xi_a),
        mean(&xi_b)
    );
    assert!(
        identical >= 90,
        "only {identical} of 100 paired runs coincide"
    );
}

#[test]
fn two_nodes_with_fast_gossip_are_mostly_in_consensus() {
    let g = Graph::from_edges(2, [(0, 1)]).unwrap();
    let ps: Vec<f64> = (0..20)
        .map(|s| {
            consensus_fraction(
                &run(config(g.clone(), vec![1.0, 1.0], 1.0, 0.01, 1000.0, s))
                    .unwrap()
                    .trace,
            )
        })
        .collect();
    let mean = ps.iter().sum::<f64>() / ps.len() as f64;
    // Out-of-consensus time per block is about tau_nd.
    assert!(mean >= 1.0 - 3.0 * 0.01, "mean P {mean}");
    assert!(mean < 1.0);
}

#[test]
fn vanishing_delay_gives_a_linear_chain() {
    let g = generate_complete(10).unwrap();
    let linear = (0..50)
        .filter(|&s| {
            let out = run(config(g.clone(), vec![1.0; 10], 1.0, 1e-4, 500.0, s)).unwrap();
            partition_chain(&out.tree).orphans.is_empty()
        })
        .count();
    assert!(linear >= 48, "{linear} of 50 runs linear");
}

#[test]
fn main_chain_interval_tracks_tau_without_forks() {
    let g = generate_complete(10).unwrap();
    let profile = normalize_rates(vec![1.0; 10], 1.0).unwrap();
    let out = run(config(g, vec![1.0; 10], 1.0, 1e-3, 2000.0, 3)).unwrap();
    let t = compute_metrics(&out, &profile).main_chain_interval.unwrap();
    assert!((t - 1.0).abs() < 0.1, "T = {t}");
}

#[test]
fn main_chain_slows_down_when_branching() {
    let g = generate_ba(100, 3, 1).unwrap();
    let powers = sample_exponential(100, 0.05, &mut seeded(1)).unwrap();
    let profile = normalize_rates(powers.clone(), 1.0).unwrap();
    let out = run(config(g, powers, 1.0, 10.0, 1000.0, 1)).unwrap();
    let t = compute_metrics(&out, &profile).main_chain_interval.unwrap();
    assert!(t > 1.0, "T = {t}");
}

#[test]
fn event_log_replays_to_final_heads() {
    let g = generate_ba(25, 2, 7).unwrap();
    let mut c = config(g, vec![1.0; 25], 1.0, 0.5, 100.0, 7);
    c.record_events = true;
    let out = run(c.clone()).unwrap();
    let events = out.trace.events.as_ref().unwrap();
    assert_eq!(
        events.len() as u64,
        out.trace.creations + out.trace.diffusions
    );
    let history = head_history(25, events);
    for (i, h) in history.iter().enumerate() {
        assert_eq!(h.last().unwrap().1, out.trace.final_heads[i]);
        assert!(h
            .windows(2)
            .all(|w| out.tree.height(w[1].1) > out.tree.height(w[0].1)));
    }

    let mut bin = Vec::new();
    write_binary_trace(events, &mut bin).unwrap();
    assert_eq!(bin.len(), events.len() * BINARY_RECORD_LEN);
    assert_eq!(&read_binary_trace(bin.as_slice()).unwrap(), events);

    let doc = RunDocument::new(&c, &out);
    let json = serde_json::to_string(&doc).unwrap();
    let back: RunDocument = serde_json::from_str(&json).unwrap();
    assert_eq!(back.blocktree().unwrap(), out.tree);
    assert_eq!(back.consensus_time, out.trace.consensus_time);
}

#[test]
fn blocktrees_are_well_formed() {
    let g = generate_ba(60, 3, 9).unwrap();
    let out = run(config(g, vec![1.0; 60], 1.0, 1.0, 300.0, 9)).unwrap();
    let rebuilt = Blocktree::from_blocks(out.tree.blocks().to_vec()).unwrap();
    assert_eq!(rebuilt, out.tree);
    let p = partition_chain(&out.tree);
    assert_eq!(p.main_chain.len() + p.orphans.len(), out.tree.len());
    assert!(out.trace.consensus_time <= out.trace.t_sim);
}
