mod common;

use forksim::fitting::fit_power_law;
use forksim::parallel::Execution;
use forksim::topology::*;
use proptest::prelude::*;

#[test]
fn mfpt_matches_random_walks_on_small_graphs() {
    let mut rng = common::rng(101);
    let mut graphs = common::connected_graphs_up_to_iso(4);
    graphs.push(common::random_connected_graph(6, &mut rng));
    for g in graphs {
        let m = mfpt_matrix(&g).unwrap();
        for s in 0..g.node_count() {
            let mc = common::mc_hitting_times(&g, s, 20_000, &mut rng);
            for (t, &(mean, se)) in mc.iter().enumerate() {
                if t == s {
                    continue;
                }
                let exact = m.get(s, t);
                assert!(
                    (mean - exact).abs() <= 4.0 * se.max(1e-12),
                    "M[{s}][{t}] exact {exact} vs MC {mean} +- {se}"
                );
            }
        }
    }
}

#[test]
fn complete_graph_closed_form() {
    for n in 2..=50 {
        let g = generate_complete(n).unwrap();
        for method in [
            MfptMethod::PerTargetLu {
                refinement_steps: 1,
            },
            MfptMethod::Fundamental,
        ] {
            let m = mfpt_matrix_with(&g, method, Execution::Parallel).unwrap();
            for i in 0..n {
                for j in 0..n {
                    let want = if i == j { 0.0 } else { (n - 1) as f64 };
                    assert!(
                        (m.get(i, j) - want).abs() < 1e-9,
                        "n={n} M[{i}][{j}]={}",
                        m.get(i, j)
                    );
                }
            }
        }
    }
}

#[test]
fn ba_degree_tail_exponent_near_three() {
    // Pooled degrees over 20 seeds; continuous MLE on k >= 10 with the
    // usual half-integer shift for discrete data.
    let kmin = 10.0;
    let tail: Vec<f64> = (0..20)
        .flat_map(|s| generate_ba(1000, 3, s).unwrap().degrees())
        .map(|k| k as f64)
        .filter(|&k| k >= kmin)
        .collect();
    let alpha = fit_power_law(&tail, kmin - 0.5).unwrap();
    assert!((2.6..=3.4).contains(&alpha), "degree exponent {alpha}");
}

#[test]
fn threshold_on_generated_families() {
    let g = generate_ba(100, 3, 1).unwrap();
    let s = branching_threshold(&g, 1.0).unwrap();
    assert!(s.connected);
    assert!(s.mean_mfpt >= s.mean_shortest_path && s.mean_shortest_path >= 1.0);
    assert!((s.tau_b - 1.0 / s.mean_mfpt).abs() < 1e-15);

    let er = generate_er(200, 1.0, 3).unwrap();
    let s = branching_threshold(&er, 2.0).unwrap();
    assert!(!s.connected);
    assert!(s.component_coverage < 1.0 && s.component_coverage > 0.0);
    assert!((s.tau_b - 2.0 / s.mean_mfpt).abs() < 1e-15);
}

#[test]
fn parallel_and_sequential_solves_agree() {
    let g = generate_er(80, 6.0, 2).unwrap();
    let g = g.induced_subgraph(&g.largest_component());
    let method = MfptMethod::PerTargetLu {
        refinement_steps: 1,
    };
    let a = mfpt_matrix_with(&g, method, Execution::Sequential).unwrap();
    let b = mfpt_matrix_with(&g, method, Execution::Parallel).unwrap();
    assert_eq!(a, b);
}

fn arb_connected_graph() -> impl Strategy<Value = Graph> {
    (3usize..12, any::<u64>())
        .prop_map(|(n, seed)| common::random_connected_graph(n, &mut common::rng(seed)))
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn adding_an_edge_never_lengthens_paths(g in arb_connected_graph(), pick in any::<prop::sample::Index>()) {
        let n = g.node_count();
        let missing: Vec<(usize, usize)> = (0..n)
            .flat_map(|i| ((i + 1)..n).map(move |j| (i, j)))
            .filter(|&(i, j)| !g.has_edge(i, j))
            .collect();
        prop_assume!(!missing.is_empty());
        let (u, v) = missing[pick.index(missing.len())];
        let before = mean_shortest_path(&g).unwrap().mean;
        let after = mean_shortest_path(&g.with_edge(u, v).unwrap()).unwrap().mean;
        prop_assert!(after <= before + 1e-12);
    }

    #[test]
    fn mfpt_dominates_shortest_path(g in arb_connected_graph()) {
        let s = branching_threshold(&g, 1.0).unwrap();
        prop_assert!(s.mean_mfpt >= s.mean_shortest_path - 1e-9);
        prop_assert!(s.mean_shortest_path >= 1.0);
        let m = mfpt_matrix(&g).unwrap();
        for i in 0..g.node_count() {
            if g.degree(i) == 1 {
                let j = g.neighbors(i)[0] as usize;
                prop_assert!((m.get(i, j) - 1.0).abs() < 1e-9);
            }
        }
    }

    #[test]
    fn edge_list_roundtrip(g in arb_connected_graph()) {
        let mut buf = Vec::new();
        write_edge_list(&g, &mut buf).unwrap();
        prop_assert_eq!(read_edge_list(buf.as_slice()).unwrap(), g);
    }
}
