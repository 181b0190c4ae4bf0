//! Helpers shared by the integration suites: deterministic random graphs,
//! construction shorthands, and 4-simplex fixtures.

// Each test target compiles its own copy of this module and uses a subset.
#![allow(dead_code)]

use rand::Rng;
use spinnet_core::exact::ExactValue;
use spinnet_core::geometry::UnitVector4;
use spinnet_core::graph::{check_admissibility, LabeledGraph, Spin, WeightedTerm};
use spinnet_core::recoupling::eval_relativistic_exact;

pub fn spin(n: u32) -> Spin {
    Spin::new(n).unwrap()
}

/// Graph with vertices `v0..v{n-1}` and the given `(end0, end1, spin)` edges.
pub fn build_graph(n_vertices: usize, edges: &[(usize, usize, u32)]) -> LabeledGraph {
    let mut g = LabeledGraph::new();
    for i in 0..n_vertices {
        g.add_vertex(&format!("v{i}")).unwrap();
    }
    for &(a, b, s) in edges {
        g.add_edge_indices(a, b, spin(s)).unwrap();
    }
    g
}

/// The same graph with one edge's spin replaced.
pub fn with_edge_spin(graph: &LabeledGraph, index: usize, n: u32) -> LabeledGraph {
    let mut out = LabeledGraph::new();
    for name in graph.vertex_names() {
        out.add_vertex(name).unwrap();
    }
    for (i, e) in graph.edges().iter().enumerate() {
        let s = if i == index { spin(n) } else { e.spin };
        out.add_edge_indices(e.end0, e.end1, s).unwrap();
    }
    out
}

/// The two-vertex theta graph with three parallel edges.
pub fn theta_graph(a: u32, b: u32, c: u32) -> LabeledGraph {
    build_graph(2, &[(0, 1, a), (0, 1, b), (0, 1, c)])
}

/// A single vertex with one loop of the given spin.
pub fn loop_graph(n: u32) -> LabeledGraph {
    build_graph(1, &[(0, 0, n)])
}

/// The complete graph on five vertices, edges in lexicographic pair order,
/// with the given ten spins.
pub fn k5_graph(spins: [u32; 10]) -> LabeledGraph {
    let pairs: Vec<(usize, usize, u32)> = spinnet_core::geometry::K5_EDGE_ORDER
        .iter()
        .zip(spins)
        .map(|(&(a, b), s)| (a, b, s))
        .collect();
    build_graph(5, &pairs)
}

/// Random connected multigraph (loops and parallel edges allowed) with no
/// spin assignment promises: spins are uniform in `0..=max_spin`.
pub fn random_raw_graph(
    rng: &mut impl Rng,
    max_vertices: usize,
    max_spin: u32,
) -> LabeledGraph {
    let v = rng.random_range(1..=max_vertices);
    let mut ends: Vec<(usize, usize)> = (1..v).map(|i| (rng.random_range(0..i), i)).collect();
    let extra_min = if ends.is_empty() { 1 } else { 0 };
    for _ in 0..rng.random_range(extra_min..=4) {
        ends.push((rng.random_range(0..v), rng.random_range(0..v)));
    }
    let mut g = LabeledGraph::new();
    for i in 0..v {
        g.add_vertex(&format!("v{i}")).unwrap();
    }
    for (a, b) in ends {
        g.add_edge_indices(a, b, spin(rng.random_range(0..=max_spin)))
            .unwrap();
    }
    g
}

/// Random connected multigraph whose spins pass the admissibility check at
/// every vertex, found by rejection over assignments (and, rarely, over
/// topologies when an unlucky one admits no labelling in the budget).
pub fn random_admissible_graph(
    rng: &mut impl Rng,
    max_vertices: usize,
    max_spin: u32,
) -> LabeledGraph {
    loop {
        let skeleton = random_raw_graph(rng, max_vertices, max_spin);
        for _ in 0..300 {
            let mut candidate = skeleton.clone();
            for i in 0..candidate.edge_count() {
                candidate = with_edge_spin(&candidate, i, rng.random_range(0..=max_spin));
            }
            if check_admissibility(&candidate).admissible {
                return candidate;
            }
        }
    }
}

/// Exact evaluation, unwrapped: test graphs stay within the default limits.
pub fn exact_value(graph: &LabeledGraph) -> ExactValue {
    eval_relativistic_exact(graph).unwrap()
}

/// Largest spin the given edge can carry with nonzero value: at each endpoint
/// an admissible vertex needs the edge's spin to be at most the sum of the
/// other incident spins.
pub fn max_supported_spin(graph: &LabeledGraph, edge: usize) -> u32 {
    let e = graph.edges()[edge];
    let sum_other = |v: usize| -> u64 {
        graph
            .incident_ends(v)
            .into_iter()
            .filter(|&(i, _)| i != edge)
            .map(|(i, _)| graph.edges()[i].spin.get() as u64)
            .sum()
    };
    sum_other(e.end0).min(sum_other(e.end1)) as u32
}

/// Σ coefficient · I(graph) over a weighted rewrite sum.
pub fn weighted_exact_sum(terms: &[WeightedTerm]) -> ExactValue {
    terms
        .iter()
        .map(|t| t.coefficient.clone() * exact_value(&t.graph))
        .sum()
}

/// Outward unit facet normals and facet 3-volumes of the 4-simplex with the
/// given vertices; `None` when any facet is too flat to orient reliably.
pub fn facet_data(points: &[[f64; 4]; 5]) -> Option<([UnitVector4; 5], [f64; 5])> {
    let mut normals = Vec::with_capacity(5);
    let mut volumes = [0.0f64; 5];
    for i in 0..5 {
        let facet: Vec<[f64; 4]> = (0..5).filter(|&j| j != i).map(|j| points[j]).collect();
        let edges: Vec<[f64; 4]> = (1..4)
            .map(|k| std::array::from_fn(|r| facet[k][r] - facet[0][r]))
            .collect();
        // Generalized cross product: delete each coordinate in turn.
        let mut v = [0.0f64; 4];
        for (r, slot) in v.iter_mut().enumerate() {
            let m: Vec<f64> = edges
                .iter()
                .flat_map(|e| (0..4).filter(|&c| c != r).map(move |c| e[c]))
                .collect();
            let det = m[0] * (m[4] * m[8] - m[5] * m[7]) - m[1] * (m[3] * m[8] - m[5] * m[6])
                + m[2] * (m[3] * m[7] - m[4] * m[6]);
            *slot = if r % 2 == 0 { det } else { -det };
        }
        let norm = v.iter().map(|c| c * c).sum::<f64>().sqrt();
        if norm < 1e-6 {
            return None;
        }
        // Orient away from the opposite vertex.
        let toward_opposite: f64 = (0..4).map(|r| v[r] * (points[i][r] - facet[0][r])).sum();
        let sign = if toward_opposite > 0.0 { -1.0 } else { 1.0 };
        normals.push(UnitVector4::new(v.map(|c| sign * c)).ok()?);
        // 3-volume from the Gram determinant of the edge vectors.
        let mut gram = [[0.0f64; 3]; 3];
        for a in 0..3 {
            for b in 0..3 {
                gram[a][b] = (0..4).map(|r| edges[a][r] * edges[b][r]).sum();
            }
        }
        let gram_det = gram[0][0] * (gram[1][1] * gram[2][2] - gram[1][2] * gram[2][1])
            - gram[0][1] * (gram[1][0] * gram[2][2] - gram[1][2] * gram[2][0])
            + gram[0][2] * (gram[1][0] * gram[2][1] - gram[1][1] * gram[2][0]);
        if gram_det <= 0.0 {
            return None;
        }
        volumes[i] = gram_det.sqrt() / 6.0;
    }
    Some((normals.try_into().unwrap(), volumes))
}

/// Five random points forming a comfortably nondegenerate 4-simplex, with
/// their facet normals and volumes.
pub fn random_simplex(rng: &mut impl Rng) -> ([UnitVector4; 5], [f64; 5]) {
    loop {
        let points: [[f64; 4]; 5] =
            std::array::from_fn(|_| std::array::from_fn(|_| rng.random_range(-1.0..1.0)));
        // 4-volume via the determinant of the edge matrix from vertex 0.
        let e: Vec<[f64; 4]> = (1..5)
            .map(|k| std::array::from_fn(|r| points[k][r] - points[0][r]))
            .collect();
        let det = det4(&e);
        if det.abs() < 0.05 {
            continue;
        }
        if let Some(data) = facet_data(&points) {
            return data;
        }
    }
}

fn det4(rows: &[[f64; 4]]) -> f64 {
    let mut out = 0.0;
    for c in 0..4 {
        let minor: Vec<f64> = (1..4)
            .flat_map(|r| (0..4).filter(|&k| k != c).map(move |k| rows[r][k]))
            .collect();
        let det3 = minor[0] * (minor[4] * minor[8] - minor[5] * minor[7])
            - minor[1] * (minor[3] * minor[8] - minor[5] * minor[6])
            + minor[2] * (minor[3] * minor[7] - minor[4] * minor[6]);
        let sign = if c % 2 == 0 { 1.0 } else { -1.0 };
        out += sign * rows[0][c] * det3;
    }
    out
}

/// Facet normals of the regular 4-simplex: five unit vectors with pairwise
/// dot products −1/4, built from an orthonormal frame in the hyperplane
/// Σx = 0 of R⁵.
pub fn regular_simplex_normals() -> [UnitVector4; 5] {
    let mut raw = [[0.0f64; 4]; 5]; // rows: the five R⁵ basis images
    for (i, row) in raw.iter_mut().enumerate() {
        for (k, slot) in row.iter_mut().enumerate() {
            // Helmert-style orthonormal basis of the hyperplane.
            let j = k + 1;
            let value = if i < j {
                1.0 / (j as f64 * (j as f64 + 1.0)).sqrt()
            } else if i == j {
                -(j as f64) / (j as f64 * (j as f64 + 1.0)).sqrt()
            } else {
                0.0
            };
            *slot = value;
        }
    }
    raw.map(|row| UnitVector4::new(row).unwrap())
}
