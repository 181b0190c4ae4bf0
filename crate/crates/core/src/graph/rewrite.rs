//! Exact rewrite moves on labelled graphs.
//!
//! Every move comes with a multiplicative contract against the invariant
//! `I`: `simplify` returns a single multiplier, while `fuse_parallel_edges`
//! and `expand_vertex` return finite weighted sums of graphs whose weighted
//! evaluations reproduce the input's evaluation. `contract_edge` is the
//! structural inverse used by the contraction-formula property tests.

use super::{spins_admissible, Edge, LabeledGraph, Spin, SPIN_CAP};
use crate::exact::{self, ExactValue};
use num::{One, Zero};
use thiserror::Error;

/// Result of [`simplify`]: `I(input) = multiplier * I(graph)`.
#[derive(Clone, PartialEq, Debug)]
pub struct Simplified {
    pub graph: LabeledGraph,
    pub multiplier: ExactValue,
}

/// One term of a weighted sum of graphs.
#[derive(Clone, PartialEq, Debug)]
pub struct WeightedTerm {
    pub coefficient: ExactValue,
    pub graph: LabeledGraph,
}

/// Finite weighted sum of graphs: `I(input) = Σ coefficient_i * I(graph_i)`.
pub type WeightedGraphSum = Vec<WeightedTerm>;

#[derive(Error, Clone, PartialEq, Eq, Debug)]
pub enum RewriteError {
    #[error("edge index {index} out of range")]
    EdgeIndexOutOfRange { index: usize },
    #[error("the two edges must be distinct")]
    SameEdge,
    #[error("edge {index} is a loop")]
    LoopEdge { index: usize },
    #[error("edges {first} and {second} do not share both endpoints")]
    NotParallel { first: usize, second: usize },
    #[error("unknown vertex `{name}`")]
    UnknownVertex { name: String },
    #[error("vertex `{name}` has a loop; simplify before expanding")]
    VertexHasLoop { name: String },
    #[error("split group is empty")]
    EmptyGroup,
    #[error("edge {index} is not incident to the split vertex")]
    EdgeNotIncident { index: usize },
    #[error("edge {index} appears twice in the split")]
    DuplicateInSplit { index: usize },
    #[error("split does not cover all incident edges (missing edge {index})")]
    IncompleteSplit { index: usize },
    #[error("an intermediate spin would exceed the cap {SPIN_CAP}")]
    SpinOutOfRange,
}

/// Remove a vertex that no longer carries any edge-end, shifting the indices
/// of later vertices down by one.
fn remove_isolated_vertex(g: &mut LabeledGraph, v: usize) {
    debug_assert!(g.edges.iter().all(|e| !e.touches(v)));
    g.vertices.remove(v);
    for e in &mut g.edges {
        if e.end0 > v {
            e.end0 -= 1;
        }
        if e.end1 > v {
            e.end1 -= 1;
        }
    }
}

/// Repeatedly delete spin-0 edges (factor 1), delete loops of spin `n`
/// (factor `(-1)^n (n+1)`), and smooth bivalent vertices with equal incident
/// spins `n` (factor `(-1)^n / (n+1)`). A bivalent vertex with unequal spins
/// forces the invariant to zero: the result is then the empty graph with
/// multiplier 0. Isolated vertices are kept (each contributes a factor 1 to
/// the invariant).
pub fn simplify(graph: &LabeledGraph) -> Simplified {
    let mut g = graph.clone();
    let mut multiplier = ExactValue::one();
    loop {
        if let Some(i) = g.edges.iter().position(|e| e.spin.get() == 0) {
            g.edges.remove(i);
            continue;
        }
        if let Some(i) = g.edges.iter().position(|e| e.is_loop()) {
            let n = g.edges[i].spin.get();
            multiplier *= exact::signed_dimension(n as u64);
            g.edges.remove(i);
            continue;
        }
        if let Some(v) = (0..g.vertex_count()).find(|&v| g.degree(v) == 2) {
            let ends = g.incident_ends(v);
            let (e0, _) = ends[0];
            let (e1, _) = ends[1];
            debug_assert_ne!(e0, e1, "loops were removed above");
            let (a, b) = (g.edges[e0].spin, g.edges[e1].spin);
            if a != b {
                return Simplified {
                    graph: LabeledGraph::new(),
                    multiplier: ExactValue::zero(),
                };
            }
            let n = a.get() as u64;
            multiplier *= ExactValue::new(exact::sign_pow(n), (n + 1).into());
            // Splice the two edges into one, dropping the vertex. If both
            // lead to the same other vertex this creates a loop there, which
            // the loop rule picks up on the next pass.
            let x = g.edges[e0].other_endpoint(v);
            let y = g.edges[e1].other_endpoint(v);
            let (keep, drop) = (e0.min(e1), e0.max(e1));
            g.edges[keep] = Edge {
                end0: x,
                end1: y,
                spin: a,
            };
            g.edges.remove(drop);
            remove_isolated_vertex(&mut g, v);
            continue;
        }
        break;
    }
    Simplified {
        graph: g,
        multiplier,
    }
}

/// Replace two parallel (non-loop, same endpoint pair) edges of spins `a`,
/// `b` by a single edge of spin `c`, one term for each `c` with
/// `|a-b| <= c <= a+b` and `a+b+c` even, all with coefficient 1.
pub fn fuse_parallel_edges(
    graph: &LabeledGraph,
    first: usize,
    second: usize,
) -> Result<WeightedGraphSum, RewriteError> {
    if first == second {
        return Err(RewriteError::SameEdge);
    }
    for index in [first, second] {
        let edge = graph
            .edges
            .get(index)
            .ok_or(RewriteError::EdgeIndexOutOfRange { index })?;
        if edge.is_loop() {
            return Err(RewriteError::LoopEdge { index });
        }
    }
    let (ea, eb) = (graph.edges[first], graph.edges[second]);
    let same_pair = (ea.end0 == eb.end0 && ea.end1 == eb.end1)
        || (ea.end0 == eb.end1 && ea.end1 == eb.end0);
    if !same_pair {
        return Err(RewriteError::NotParallel {
            first,
            second,
        });
    }
    let (a, b) = (ea.spin.get(), eb.spin.get());
    if a as u64 + b as u64 > SPIN_CAP as u64 {
        return Err(RewriteError::SpinOutOfRange);
    }
    let (keep, drop) = (first.min(second), first.max(second));
    let mut terms = Vec::new();
    for c in (a.abs_diff(b)..=a + b).step_by(2) {
        let mut g = graph.clone();
        g.edges[keep] = Edge {
            end0: graph.edges[keep].end0,
            end1: graph.edges[keep].end1,
            spin: Spin::new(c).expect("bounded by a+b, checked above"),
        };
        g.edges.remove(drop);
        terms.push(WeightedTerm {
            coefficient: ExactValue::one(),
            graph: g,
        });
    }
    Ok(terms)
}

/// Expand a loop-free vertex into two vertices joined by a new edge, with
/// the incident edges split between them as requested (`group0` stays on the
/// original vertex, `group1` moves to the new one; both are lists of edge
/// indices). One term per admissible internal spin `k`, with coefficient
/// `(-1)^k (k+1)`; the new edge is appended last and the new vertex name is
/// derived from the original so that contracting the new edge restores the
/// input graph exactly.
pub fn expand_vertex(
    graph: &LabeledGraph,
    vertex: &str,
    group0: &[usize],
    group1: &[usize],
) -> Result<WeightedGraphSum, RewriteError> {
    let v = graph
        .vertex_index(vertex)
        .ok_or_else(|| RewriteError::UnknownVertex {
            name: vertex.into(),
        })?;
    let incident: Vec<usize> = graph
        .incident_ends(v)
        .into_iter()
        .map(|(e, _)| e)
        .collect();
    if graph.edges.iter().any(|e| e.is_loop() && e.touches(v)) {
        return Err(RewriteError::VertexHasLoop {
            name: vertex.into(),
        });
    }
    if group0.is_empty() || group1.is_empty() {
        return Err(RewriteError::EmptyGroup);
    }
    let mut seen = vec![false; graph.edge_count()];
    for &index in group0.iter().chain(group1) {
        if !incident.contains(&index) {
            return Err(RewriteError::EdgeNotIncident { index });
        }
        if seen[index] {
            return Err(RewriteError::DuplicateInSplit { index });
        }
        seen[index] = true;
    }
    if let Some(&index) = incident.iter().find(|&&e| !seen[e]) {
        return Err(RewriteError::IncompleteSplit { index });
    }

    let spins_of = |group: &[usize]| -> Vec<u32> {
        group.iter().map(|&e| graph.edges[e].spin.get()).collect()
    };
    let (spins0, spins1) = (spins_of(group0), spins_of(group1));
    let sum = |spins: &[u32]| spins.iter().map(|&s| s as u64).sum::<u64>();
    let k_max = sum(&spins0).min(sum(&spins1));
    if k_max > SPIN_CAP as u64 {
        return Err(RewriteError::SpinOutOfRange);
    }

    // Any suffix keeps the fresh name lexicographically above the original,
    // so a later contract_edge merges back onto the original name.
    let fresh = (0..)
        .map(|i| format!("{vertex}_t{i}"))
        .find(|name| graph.vertex_index(name).is_none())
        .expect("some suffix is unused");

    let mut terms = Vec::new();
    for k in 0..=k_max as u32 {
        let mut side0 = spins0.clone();
        side0.push(k);
        let mut side1 = spins1.clone();
        side1.push(k);
        if !spins_admissible(&side0) || !spins_admissible(&side1) {
            continue;
        }
        let mut g = graph.clone();
        let fresh_idx = g.add_vertex(&fresh).expect("fresh name is valid and unused");
        for &e in group1 {
            if g.edges[e].end0 == v {
                g.edges[e].end0 = fresh_idx;
            } else {
                g.edges[e].end1 = fresh_idx;
            }
        }
        g.add_edge_indices(v, fresh_idx, Spin::new(k).expect("k <= checked k_max"))
            .expect("indices valid");
        terms.push(WeightedTerm {
            coefficient: exact::signed_dimension(k as u64),
            graph: g,
        });
    }
    Ok(terms)
}

/// Contract a non-loop edge: its endpoints merge into one vertex carrying
/// the lexicographically smaller of the two names (kept at that vertex's
/// position), inheriting all other incident edges; the contracted edge
/// disappears. Parallel edges become loops.
pub fn contract_edge(graph: &LabeledGraph, index: usize) -> Result<LabeledGraph, RewriteError> {
    let edge = *graph
        .edges
        .get(index)
        .ok_or(RewriteError::EdgeIndexOutOfRange { index })?;
    if edge.is_loop() {
        return Err(RewriteError::LoopEdge { index });
    }
    let (keep, drop) = if graph.vertex_name(edge.end0) <= graph.vertex_name(edge.end1) {
        (edge.end0, edge.end1)
    } else {
        (edge.end1, edge.end0)
    };
    let mut g = graph.clone();
    g.edges.remove(index);
    for e in &mut g.edges {
        if e.end0 == drop {
            e.end0 = keep;
        }
        if e.end1 == drop {
            e.end1 = keep;
        }
    }
    remove_isolated_vertex(&mut g, drop);
    Ok(g)
}
