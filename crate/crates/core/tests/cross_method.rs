//! Consistency of the three evaluation routes and the exact rewrite moves
//! against each other on randomized and structured inputs.
//!
//! The exact route, the tensor-contraction route, and the Monte Carlo route
//! share no code beyond the graph model, so agreement between them is a
//! genuine cross-check of each.

mod common;

use common::{
    build_graph, exact_value, k5_graph, loop_graph, max_supported_spin, random_admissible_graph,
    random_raw_graph, spin, theta_graph, weighted_exact_sum, with_edge_spin,
};
use num::Zero;
use proptest::prelude::*;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use spinnet_core::exact::{self, to_f64, ExactValue};
use spinnet_core::graph::{
    check_admissibility, contract_edge, expand_vertex, fuse_parallel_edges, parse_graph,
    serialize_graph, simplify, spins_admissible, LabeledGraph,
};
use spinnet_core::mc::{mc_evaluate, McParams};
use spinnet_core::projector::{
    contract_evaluate, contract_evaluate_with_plan, plan_contraction, plan_from_merge_sequence,
    DEFAULT_DIM_CAP,
};
use spinnet_core::su2::{character, Angle};

#[test]
fn contracting_an_edge_matches_the_signed_dimension_sum() {
    // I(contracted) = Σ_n (−1)^n (n+1) I(graph with the edge set to n),
    // with no admissibility assumption on the input.
    let mut rng = ChaCha8Rng::seed_from_u64(101);
    let mut checked = 0;
    while checked < 15 {
        let graph = if checked % 3 == 0 {
            random_raw_graph(&mut rng, 4, 3)
        } else {
            random_admissible_graph(&mut rng, 4, 3)
        };
        let non_loops: Vec<usize> = (0..graph.edge_count())
            .filter(|&i| !graph.edges()[i].is_loop())
            .collect();
        let Some(&edge) = non_loops.get(rng.random_range(0..non_loops.len().max(1))) else {
            continue;
        };
        let lhs = exact_value(&contract_edge(&graph, edge).unwrap());
        let mut rhs = ExactValue::zero();
        for n in 0..=max_supported_spin(&graph, edge) {
            rhs += exact::signed_dimension(n as u64) * exact_value(&with_edge_spin(&graph, edge, n));
        }
        assert_eq!(lhs, rhs, "graph:\n{}", serialize_graph(&graph));
        checked += 1;
    }
}

#[test]
fn vertex_expansion_is_split_independent_and_faithful() {
    let mut rng = ChaCha8Rng::seed_from_u64(102);
    let mut checked = 0;
    while checked < 8 {
        let graph = random_admissible_graph(&mut rng, 4, 4);
        let candidate = (0..graph.vertex_count()).find(|&v| {
            let d = graph.degree(v);
            (d == 4 || d == 5) && !graph.edges().iter().any(|e| e.is_loop() && e.touches(v))
        });
        let Some(v) = candidate else { continue };
        let name = graph.vertex_name(v).to_owned();
        let inc: Vec<usize> = graph.incident_ends(v).into_iter().map(|(e, _)| e).collect();

        let rest = |taken: [usize; 2]| -> Vec<usize> {
            inc.iter().copied().filter(|e| !taken.contains(e)).collect()
        };
        let split_a = expand_vertex(&graph, &name, &[inc[0], inc[1]], &rest([inc[0], inc[1]]))
            .unwrap();
        let split_b = expand_vertex(&graph, &name, &[inc[0], inc[2]], &rest([inc[0], inc[2]]))
            .unwrap();

        let direct = exact_value(&graph);
        let via_a = weighted_exact_sum(&split_a);
        let via_b = weighted_exact_sum(&split_b);
        assert_eq!(via_a, via_b, "graph:\n{}", serialize_graph(&graph));
        assert_eq!(via_a, direct, "graph:\n{}", serialize_graph(&graph));
        checked += 1;
    }
}

#[test]
fn fusing_parallel_edges_preserves_the_exact_value() {
    let mut rng = ChaCha8Rng::seed_from_u64(103);
    let mut checked = 0;
    while checked < 10 {
        let graph = random_admissible_graph(&mut rng, 4, 3);
        let pair = (0..graph.edge_count()).find_map(|i| {
            (i + 1..graph.edge_count()).find_map(|j| {
                let (a, b) = (graph.edges()[i], graph.edges()[j]);
                let parallel = !a.is_loop()
                    && ((a.end0 == b.end0 && a.end1 == b.end1)
                        || (a.end0 == b.end1 && a.end1 == b.end0));
                parallel.then_some((i, j))
            })
        });
        let Some((i, j)) = pair else { continue };
        let fused = fuse_parallel_edges(&graph, i, j).unwrap();
        assert_eq!(
            weighted_exact_sum(&fused),
            exact_value(&graph),
            "graph:\n{}",
            serialize_graph(&graph)
        );
        checked += 1;
    }
}

#[test]
fn disconnected_graphs_evaluate_to_the_product_of_their_parts() {
    // theta(1,1,2) ⊔ loop(2) ⊔ theta(2,2,2) on disjoint vertex sets.
    let union = build_graph(
        5,
        &[
            (0, 1, 1),
            (0, 1, 1),
            (0, 1, 2),
            (2, 2, 2),
            (3, 4, 2),
            (3, 4, 2),
            (3, 4, 2),
        ],
    );
    let parts = [
        theta_graph(1, 1, 2),
        loop_graph(2),
        theta_graph(2, 2, 2),
    ];
    let product: ExactValue = parts.iter().map(exact_value).product();
    assert_eq!(exact_value(&union), product);

    let float_product: f64 = parts.iter().map(|g| contract_evaluate(g).unwrap()).product();
    let contracted = contract_evaluate(&union).unwrap();
    assert!((contracted - float_product).abs() <= 1e-12 * float_product.abs().max(1.0));
}

#[test]
fn contraction_order_does_not_change_the_value() {
    let k4 = build_graph(
        4,
        &[(0, 1, 2), (0, 2, 2), (0, 3, 2), (1, 2, 2), (1, 3, 2), (2, 3, 2)],
    );
    let greedy = contract_evaluate_with_plan(&k4, &plan_contraction(&k4), DEFAULT_DIM_CAP).unwrap();
    for merges in [
        [(0usize, 1usize), (4, 2), (5, 3)],
        [(2, 3), (4, 0), (5, 1)],
        [(1, 3), (0, 2), (4, 5)],
    ] {
        let plan = plan_from_merge_sequence(&k4, &merges).unwrap();
        let value = contract_evaluate_with_plan(&k4, &plan, DEFAULT_DIM_CAP).unwrap();
        assert!(
            (value - greedy).abs() <= 1e-12 * greedy.abs().max(1.0),
            "merges {merges:?}: {value} vs {greedy}"
        );
    }
}

fn assert_exact_and_contract_agree(graph: &LabeledGraph, label: &str) {
    let exact_f = to_f64(&exact_value(graph));
    let contracted = contract_evaluate(graph).unwrap();
    assert!(
        (exact_f - contracted).abs() <= 1e-9 * exact_f.abs().max(1.0),
        "{label}: exact {exact_f} vs contract {contracted}"
    );
}

#[test]
fn girth_four_and_five_topologies_agree_across_routes() {
    // Bipartite K(3,3): girth 4, no triangle or bubble available at the start.
    let k33_edges: Vec<(usize, usize, u32)> = (0..3)
        .flat_map(|a| (3..6).map(move |b| (a, b, 2)))
        .collect();
    assert_exact_and_contract_agree(&build_graph(6, &k33_edges), "K33, all spins 2");

    // The cube: girth 4, eight trivalent vertices.
    let cube_edges = [
        (0, 1, 2), (1, 2, 2), (2, 3, 2), (3, 0, 2),
        (4, 5, 2), (5, 6, 2), (6, 7, 2), (7, 4, 2),
        (0, 4, 2), (1, 5, 2), (2, 6, 2), (3, 7, 2),
    ];
    assert_exact_and_contract_agree(&build_graph(8, &cube_edges), "cube, all spins 2");

    // The Petersen graph: girth 5, so recoupling must shorten a cycle first.
    let petersen_edges = [
        (0, 1, 2), (1, 2, 2), (2, 3, 2), (3, 4, 2), (4, 0, 2),
        (5, 7, 2), (7, 9, 2), (9, 6, 2), (6, 8, 2), (8, 5, 2),
        (0, 5, 2), (1, 6, 2), (2, 7, 2), (3, 8, 2), (4, 9, 2),
    ];
    assert_exact_and_contract_agree(&build_graph(10, &petersen_edges), "Petersen, all spins 2");
}

#[test]
fn k5_all_spin_two_agrees_between_exact_and_contract() {
    let graph = k5_graph([2; 10]);
    let exact = exact_value(&graph);
    let contracted = contract_evaluate(&graph).unwrap();
    let exact_f = to_f64(&exact);
    println!(
        "K5 all-2: exact = {}/{} ≈ {exact_f}, contract = {contracted}",
        exact.numer(),
        exact.denom()
    );
    assert!((exact_f - contracted).abs() <= 1e-9 * exact_f.abs().max(1.0));
}

#[test]
fn montecarlo_tracks_the_exact_value_on_a_small_panel() {
    let k4 = build_graph(
        4,
        &[(0, 1, 1), (0, 2, 1), (0, 3, 2), (1, 2, 2), (1, 3, 1), (2, 3, 1)],
    );
    for (graph, label) in [
        (theta_graph(2, 2, 2), "theta(2,2,2)"),
        (k4, "K4 mixed spins"),
    ] {
        let exact_f = to_f64(&exact_value(&graph));
        let est = mc_evaluate(
            &graph,
            &McParams {
                n_samples: 200_000,
                seed: 11,
                ..McParams::default()
            },
        )
        .unwrap();
        assert!(
            (est.mean - exact_f).abs() <= 4.0 * est.stderr.max(1e-12),
            "{label}: mc {} ± {} vs exact {exact_f}",
            est.mean,
            est.stderr
        );
    }
}

fn arb_graph(max_vertices: usize, max_spin: u32) -> impl Strategy<Value = LabeledGraph> {
    (
        1..=max_vertices,
        prop::collection::vec((0usize..8, 0usize..8, 0..=max_spin), 0..8),
    )
        .prop_map(|(v, raw)| {
            let edges: Vec<(usize, usize, u32)> =
                raw.into_iter().map(|(a, b, s)| (a % v, b % v, s)).collect();
            build_graph(v, &edges)
        })
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn serialization_round_trips(graph in arb_graph(6, 9)) {
        let text = serialize_graph(&graph);
        prop_assert_eq!(parse_graph(&text).unwrap(), graph);
    }

    #[test]
    fn admissibility_ignores_spin_order(spins in prop::collection::vec(0u32..10, 0..7), seed in any::<u64>()) {
        let mut shuffled = spins.clone();
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        for i in (1..shuffled.len()).rev() {
            shuffled.swap(i, rng.random_range(0..=i));
        }
        prop_assert_eq!(spins_admissible(&spins), spins_admissible(&shuffled));
    }

    #[test]
    fn characters_are_bounded_by_the_dimension(n in 0u32..12, c in -1.0f64..=1.0) {
        let value = character(spin(n), Angle::from_cos(c));
        prop_assert!(value.abs() <= (n + 1) as f64 + 1e-9);
    }

    #[test]
    fn simplification_preserves_the_exact_value(graph in arb_graph(3, 3)) {
        let s = simplify(&graph);
        prop_assert_eq!(exact_value(&graph), s.multiplier * exact_value(&s.graph));
    }

    #[test]
    fn odd_total_parity_forces_zero(graph in arb_graph(4, 3)) {
        if !check_admissibility(&graph).admissible {
            // Inadmissible graphs evaluate to exactly zero on the exact route.
            prop_assert_eq!(exact_value(&graph), ExactValue::zero());
        }
    }
}
