//! Release gate: one test per shipped guarantee, each printing a single
//! PASS line (run with `--nocapture` to see measured values). Tolerances and
//! sample counts here are contractual — loosening them is a behavior change,
//! not a test fix.

mod common;

use std::time::Instant;

use common::{
    exact_value, k5_graph, loop_graph, max_supported_spin, random_admissible_graph,
    random_raw_graph, random_simplex, regular_simplex_normals, spin, theta_graph,
    weighted_exact_sum, with_edge_spin,
};
use num::{BigInt, Zero};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use spinnet_core::exact::{self, to_f64, ExactValue};
use spinnet_core::graph::{
    check_admissibility, contract_edge, expand_vertex, serialize_graph, spins_admissible,
    AdmissibilityFailure,
};
use spinnet_core::geometry::{geometry_estimate, reconstruct_simplex};
use spinnet_core::mc::{integrand, mc_evaluate, McParams};
use spinnet_core::projector::{contract_evaluate, contract_evaluate_with_cap};
use spinnet_core::su2::{character, haar_sample, relative_angle, GroupElement};

/// The complete-graph-on-five fixture, all spins 2. First derived by the
/// exact route and confirmed by independent float contraction to 5e-15
/// relative; frozen here so regressions in either route are caught against a
/// recorded value rather than against each other.
fn k5_all_two_fixture() -> ExactValue {
    ExactValue::new(BigInt::from(307), BigInt::from(1500))
}

#[test]
fn criterion_01_theta_family() {
    let start = Instant::now();
    let mut admissible = 0;
    for a in 0..=8u32 {
        for b in 0..=8u32 {
            for c in 0..=8u32 {
                let graph = theta_graph(a, b, c);
                let exact = exact_value(&graph);
                let contract = contract_evaluate(&graph).unwrap();
                if spins_admissible(&[a, b, c]) {
                    admissible += 1;
                    assert_eq!(exact, exact::from_int(1), "theta({a},{b},{c}) exact");
                    assert!(
                        (contract - 1.0).abs() <= 1e-9,
                        "theta({a},{b},{c}) contract = {contract}"
                    );
                } else {
                    assert!(exact.is_zero(), "theta({a},{b},{c}) exact = {exact}");
                    assert!(
                        contract.abs() <= 1e-12,
                        "theta({a},{b},{c}) contract = {contract}"
                    );
                }
            }
        }
    }
    let elapsed = start.elapsed();
    assert!(elapsed.as_secs_f64() < 5.0, "theta family took {elapsed:?}");
    println!(
        "criterion 01 theta family: PASS (729 triples, {admissible} admissible, {elapsed:?})"
    );
}

#[test]
fn criterion_02_loop_values() {
    for n in 0..=20u32 {
        let graph = loop_graph(n);
        let expected = exact::signed_dimension(n as u64);
        let expected_f = to_f64(&expected);

        assert_eq!(exact_value(&graph), expected, "loop({n}) exact");

        let contract = contract_evaluate(&graph).unwrap();
        assert_eq!(contract, expected_f, "loop({n}) contract");

        let est = mc_evaluate(
            &graph,
            &McParams {
                n_samples: 1000,
                seed: 7,
                ..McParams::default()
            },
        )
        .unwrap();
        assert_eq!(est.mean, expected_f, "loop({n}) mc mean");
        assert_eq!(est.stderr, 0.0, "loop({n}) mc stderr");
    }
    println!("criterion 02 loop values: PASS (n = 0..=20, three methods, mc variance 0)");
}

#[test]
fn criterion_03_contraction_identity() {
    let mut rng = ChaCha8Rng::seed_from_u64(301);
    let mut checked = 0;
    while checked < 50 {
        let graph = if checked % 3 == 0 {
            random_raw_graph(&mut rng, 4, 4)
        } else {
            random_admissible_graph(&mut rng, 4, 4)
        };
        let non_loops: Vec<usize> = (0..graph.edge_count())
            .filter(|&i| !graph.edges()[i].is_loop())
            .collect();
        if non_loops.is_empty() {
            continue;
        }
        let edge = non_loops[rng.random_range(0..non_loops.len())];
        let lhs = exact_value(&contract_edge(&graph, edge).unwrap());
        let mut rhs = ExactValue::zero();
        for n in 0..=max_supported_spin(&graph, edge) {
            rhs += exact::signed_dimension(n as u64) * exact_value(&with_edge_spin(&graph, edge, n));
        }
        assert_eq!(lhs, rhs, "graph:\n{}", serialize_graph(&graph));
        checked += 1;
    }
    println!("criterion 03 contraction identity: PASS (50 graphs, exact rational equality)");
}

#[test]
fn criterion_04_tree_independence() {
    let mut rng = ChaCha8Rng::seed_from_u64(401);
    let mut checked = 0;
    while checked < 20 {
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
        let split_a =
            expand_vertex(&graph, &name, &[inc[0], inc[1]], &rest([inc[0], inc[1]])).unwrap();
        let split_b =
            expand_vertex(&graph, &name, &[inc[0], inc[2]], &rest([inc[0], inc[2]])).unwrap();
        assert_eq!(
            weighted_exact_sum(&split_a),
            weighted_exact_sum(&split_b),
            "graph:\n{}",
            serialize_graph(&graph)
        );
        checked += 1;
    }
    println!("criterion 04 tree independence: PASS (20 vertices, identical exact rationals)");
}

#[test]
fn criterion_05_cross_method_agreement() {
    let start = Instant::now();
    let mut rng = ChaCha8Rng::seed_from_u64(501);
    for case in 0..100 {
        let graph = random_admissible_graph(&mut rng, 5, 4);
        let exact_f = to_f64(&exact_value(&graph));

        // A few draws concentrate high spins on one vertex; the dimension cap
        // is configurable, and 4e6 entries (32 MB) covers every draw here.
        let contract = contract_evaluate_with_cap(&graph, 4_000_000).unwrap();
        assert!(
            (exact_f - contract).abs() <= 1e-9 * exact_f.abs().max(1.0),
            "case {case}: exact {exact_f} vs contract {contract}\n{}",
            serialize_graph(&graph)
        );

        let est = mc_evaluate(
            &graph,
            &McParams {
                n_samples: 1_000_000,
                seed: 500 + case,
                ..McParams::default()
            },
        )
        .unwrap();
        assert!(
            (est.mean - exact_f).abs() <= 4.0 * est.stderr.max(1e-12),
            "case {case}: mc {} ± {} vs exact {exact_f}\n{}",
            est.mean,
            est.stderr,
            serialize_graph(&graph)
        );
    }
    let elapsed = start.elapsed();
    assert!(
        elapsed.as_secs_f64() < 600.0,
        "cross-method agreement took {elapsed:?}"
    );
    println!("criterion 05 cross-method agreement: PASS (100 graphs, mc 1e6 each, {elapsed:?})");
}

#[test]
fn criterion_06_k5_fixture() {
    let fixture = k5_all_two_fixture();
    let fixture_f = to_f64(&fixture);
    let graph = k5_graph([2; 10]);

    assert_eq!(exact_value(&graph), fixture, "exact route vs frozen fixture");

    // Completes under the default dimension cap.
    let contract = contract_evaluate(&graph).unwrap();
    assert!(
        (contract - fixture_f).abs() <= 1e-9 * fixture_f.abs(),
        "contract {contract} vs fixture {fixture_f}"
    );

    let est = mc_evaluate(
        &graph,
        &McParams {
            n_samples: 10_000_000,
            seed: 606,
            ..McParams::default()
        },
    )
    .unwrap();
    assert!(
        (est.mean - fixture_f).abs() <= 4.0 * est.stderr,
        "mc {} ± {} vs fixture {fixture_f}",
        est.mean,
        est.stderr
    );

    // The geometry stream estimates the same number under the same
    // seed-and-chunk policy (no gauge fixing, so it is a distinct stream).
    let geo = geometry_estimate([spin(2); 10], 10_000_000, 606, 1).unwrap();
    assert!(
        (geo.mean - fixture_f).abs() <= 4.0 * geo.stderr,
        "geometry {} ± {} vs fixture {fixture_f}",
        geo.mean,
        geo.stderr
    );

    println!(
        "criterion 06 K5 fixture: PASS (307/1500; contract {contract:.12}, mc {:.5}±{:.5}, geometry {:.5}±{:.5})",
        est.mean, est.stderr, geo.mean, geo.stderr
    );
}

#[test]
fn criterion_07_parity_and_sign_symmetry() {
    let mut rng = ChaCha8Rng::seed_from_u64(701);

    // Odd-parity vertex forces exact zero.
    let mut odd_cases = 0;
    for _ in 0..400 {
        let graph = random_raw_graph(&mut rng, 5, 4);
        let report = check_admissibility(&graph);
        let has_odd = report.failures.iter().any(|f| {
            f.reasons
                .iter()
                .any(|r| matches!(r, AdmissibilityFailure::OddParity { .. }))
        });
        if has_odd {
            odd_cases += 1;
            assert!(
                exact_value(&graph).is_zero(),
                "graph:\n{}",
                serialize_graph(&graph)
            );
        }
    }
    assert!(odd_cases >= 50, "only {odd_cases} odd-parity cases drawn");

    // Flipping any single vertex variable h -> -h never moves the integrand.
    let mut flips = 0;
    for _ in 0..10 {
        let graph = random_admissible_graph(&mut rng, 5, 4);
        for _ in 0..20 {
            let hs: Vec<GroupElement> = (0..graph.vertex_count())
                .map(|_| haar_sample(&mut rng))
                .collect();
            let base = integrand(&graph, &hs);
            for v in 0..hs.len() {
                let mut flipped = hs.clone();
                flipped[v] = -flipped[v];
                assert!(
                    (integrand(&graph, &flipped) - base).abs() <= 1e-12,
                    "flip at vertex {v}:\n{}",
                    serialize_graph(&graph)
                );
                flips += 1;
            }
        }
    }
    println!(
        "criterion 07 parity and sign symmetry: PASS ({odd_cases} odd-parity zeros, {flips} sign flips)"
    );
}

#[test]
fn criterion_08_geometry_round_trip() {
    let mut rng = ChaCha8Rng::seed_from_u64(801);
    for case in 0..100 {
        let (normals, volumes) = random_simplex(&mut rng);
        let geometry = reconstruct_simplex(&normals).unwrap();
        assert!(
            geometry.weights().iter().all(|&w| w > 0.0),
            "case {case}: weights {:?}",
            geometry.weights()
        );
        let total: f64 = volumes.iter().sum();
        for i in 0..5 {
            // Weights are the normalized facet 3-volumes.
            assert!(
                (geometry.weight(i) - volumes[i] / total).abs() <= 1e-9,
                "case {case}: weight {i} = {} vs volume share {}",
                geometry.weight(i),
                volumes[i] / total
            );
            for j in 0..5 {
                if i == j {
                    continue;
                }
                let direct = normals[i].angle_to(normals[j]).radians();
                let via = geometry.angle(i, j).radians();
                assert!(
                    (via - direct).abs() <= 1e-9,
                    "case {case}: angle ({i},{j}) {via} vs {direct}"
                );
            }
        }
    }

    let regular = reconstruct_simplex(&regular_simplex_normals()).unwrap();
    let expected = (-0.25f64).acos();
    for i in 0..5 {
        assert!((regular.weight(i) - 0.2).abs() <= 1e-9);
        for j in 0..5 {
            if i != j {
                assert!((regular.angle(i, j).radians() - expected).abs() <= 1e-9);
            }
        }
    }
    println!("criterion 08 geometry round trip: PASS (100 random simplices + regular simplex)");
}

#[test]
fn criterion_09_character_orthogonality() {
    const N_SAMPLES: u64 = 1_000_000;
    let mut rng = ChaCha8Rng::seed_from_u64(901);
    // Accumulate sums and squared sums of chi_n * chi_m over one shared
    // stream of Haar samples.
    let mut sums = [[0.0f64; 5]; 5];
    let mut sq_sums = [[0.0f64; 5]; 5];
    for _ in 0..N_SAMPLES {
        let h = haar_sample(&mut rng);
        let angle = relative_angle(GroupElement::IDENTITY, h);
        let chi: [f64; 5] = std::array::from_fn(|n| character(spin(n as u32), angle));
        for n in 0..5 {
            for m in n..5 {
                let p = chi[n] * chi[m];
                sums[n][m] += p;
                sq_sums[n][m] += p * p;
            }
        }
    }
    let nf = N_SAMPLES as f64;
    for n in 0..5 {
        for m in n..5 {
            let mean = sums[n][m] / nf;
            let var = (sq_sums[n][m] / nf - mean * mean).max(0.0) * nf / (nf - 1.0);
            let stderr = (var / nf).sqrt();
            let expected = if n == m { 1.0 } else { 0.0 };
            assert!(
                (mean - expected).abs() <= 5.0 * stderr,
                "E[chi_{n} chi_{m}] = {mean} ± {stderr}, expected {expected}"
            );
        }
    }
    println!("criterion 09 character orthogonality: PASS (n,m <= 4 at 1e6 samples)");
}

#[test]
fn criterion_10_worker_determinism() {
    let graph = k5_graph([2, 1, 1, 2, 2, 1, 1, 2, 2, 2]);
    let base = McParams {
        n_samples: 50_000,
        seed: 1001,
        chunk_size: 4096,
        ..McParams::default()
    };
    let runs: Vec<_> = [1usize, 2, 8]
        .iter()
        .map(|&w| mc_evaluate(&graph, &McParams { workers: w, ..base.clone() }).unwrap())
        .collect();
    assert_eq!(runs[0], runs[1], "mc workers 1 vs 2");
    assert_eq!(runs[0], runs[2], "mc workers 1 vs 8");

    let geo: Vec<_> = [1usize, 2, 8]
        .iter()
        .map(|&w| geometry_estimate([spin(2); 10], 50_000, 1001, w).unwrap())
        .collect();
    assert_eq!(geo[0], geo[1], "geometry workers 1 vs 2");
    assert_eq!(geo[0], geo[2], "geometry workers 1 vs 8");

    println!("criterion 10 worker determinism: PASS (mc and geometry identical for 1/2/8 workers)");
}
