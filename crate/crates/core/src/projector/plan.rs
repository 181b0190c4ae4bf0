//! Pairwise contraction planning.
//!
//! Each vertex starts as one node whose open legs are its non-loop incident
//! edges (loops are traced out before planning and carry no open legs). A
//! plan is a sequence of pairwise merges ending in a single scalar node; the
//! planner greedily picks the merge producing the smallest intermediate
//! tensor, which keeps peak memory low without an exponential search.

use crate::graph::LabeledGraph;
use thiserror::Error;

/// One pairwise merge. `lhs` and `rhs` are node ids — initial nodes are the
/// graph's vertex indices, and each merge creates a fresh id (the next unused
/// integer). `result_entries` is the dense entry count of the merged tensor,
/// with one axis of size `(spin + 1)^2` per remaining open edge.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct MergeStep {
    pub lhs: usize,
    pub rhs: usize,
    pub result: usize,
    pub result_entries: u128,
}

/// A complete contraction order for a graph.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct ContractionPlan {
    pub steps: Vec<MergeStep>,
    /// Largest intermediate produced by any step (0 when no merges happen).
    pub max_intermediate: u128,
}

#[derive(Debug, Error, PartialEq, Eq)]
pub enum PlanError {
    #[error("merge references node {id}, which does not exist or was already consumed")]
    UnknownNode { id: usize },
    #[error("plan finished with {remaining} nodes still unmerged")]
    IncompleteMerge { remaining: usize },
}

/// A live node during planning: its id, its open edge indices (sorted), and
/// its dense entry count.
#[derive(Clone, Debug)]
struct Node {
    id: usize,
    edges: Vec<usize>,
    entries: u128,
}

fn edge_pair_dim(graph: &LabeledGraph, edge: usize) -> u128 {
    let d = graph.edges()[edge].spin.dimension() as u128;
    d * d
}

fn entries_for(graph: &LabeledGraph, edges: &[usize]) -> u128 {
    edges
        .iter()
        .fold(1u128, |acc, &e| acc.saturating_mul(edge_pair_dim(graph, e)))
}

/// Open legs of the merge of two nodes: the symmetric difference of their
/// edge sets (shared edges are contracted away).
fn merged_edges(a: &[usize], b: &[usize]) -> Vec<usize> {
    let mut out: Vec<usize> = a
        .iter()
        .filter(|e| !b.contains(e))
        .chain(b.iter().filter(|e| !a.contains(e)))
        .copied()
        .collect();
    out.sort_unstable();
    out
}

fn initial_nodes(graph: &LabeledGraph) -> Vec<Node> {
    (0..graph.vertex_count())
        .map(|v| {
            let mut edges: Vec<usize> = graph
                .incident_ends(v)
                .into_iter()
                .map(|(e, _)| e)
                .filter(|&e| !graph.edges()[e].is_loop())
                .collect();
            edges.dedup(); // incident_ends lists loops twice; non-loops once
            Node {
                id: v,
                edges: edges.clone(),
                entries: entries_for(graph, &edges),
            }
        })
        .collect()
}

/// Greedy contraction order: repeatedly merge the pair of nodes sharing at
/// least one edge whose result tensor is smallest, breaking ties by smaller
/// combined input size and then by node creation order. Disconnected pieces
/// are combined by the same rule once no pair shares an edge (their "merge"
/// is an outer product of what are, by then, scalars or near-scalars).
pub fn plan_contraction(graph: &LabeledGraph) -> ContractionPlan {
    let mut alive = initial_nodes(graph);
    let mut next_id = alive.len();
    let mut steps = Vec::new();
    let mut max_intermediate: u128 = 0;

    while alive.len() > 1 {
        let mut best: Option<(u128, u128, usize, usize, Vec<usize>)> = None;
        let mut any_shared = false;
        for i in 0..alive.len() {
            for j in (i + 1)..alive.len() {
                let shares = alive[i].edges.iter().any(|e| alive[j].edges.contains(e));
                if shares && !any_shared {
                    // First sharing pair found: discard outer-product candidates.
                    any_shared = true;
                    best = None;
                }
                if any_shared && !shares {
                    continue;
                }
                let edges = merged_edges(&alive[i].edges, &alive[j].edges);
                let produced = entries_for(graph, &edges);
                let combined = alive[i].entries.saturating_add(alive[j].entries);
                let candidate = (produced, combined, i, j, edges);
                let better = match &best {
                    None => true,
                    Some((p, c, bi, bj, _)) => {
                        (produced, combined, i, j) < (*p, *c, *bi, *bj)
                    }
                };
                if better {
                    best = Some(candidate);
                }
            }
        }
        let (produced, _, i, j, edges) = best.expect("two or more nodes always yield a pair");
        max_intermediate = max_intermediate.max(produced);
        let rhs = alive.remove(j);
        let lhs = alive.remove(i);
        steps.push(MergeStep {
            lhs: lhs.id,
            rhs: rhs.id,
            result: next_id,
            result_entries: produced,
        });
        alive.push(Node {
            id: next_id,
            edges,
            entries: produced,
        });
        next_id += 1;
    }

    ContractionPlan {
        steps,
        max_intermediate,
    }
}

/// Build a plan from an explicit merge sequence (pairs of node ids, fresh ids
/// assigned as in [`plan_contraction`]). Used to check that the contracted
/// value does not depend on the order of merges.
pub fn plan_from_merge_sequence(
    graph: &LabeledGraph,
    merges: &[(usize, usize)],
) -> Result<ContractionPlan, PlanError> {
    let mut alive = initial_nodes(graph);
    let first_fresh_id = alive.len();
    let mut steps = Vec::new();
    let mut max_intermediate: u128 = 0;

    for (step, &(a, b)) in merges.iter().enumerate() {
        let next_id = first_fresh_id + step;
        let pos_a = alive
            .iter()
            .position(|n| n.id == a)
            .ok_or(PlanError::UnknownNode { id: a })?;
        let pos_b = alive
            .iter()
            .position(|n| n.id == b)
            .ok_or(PlanError::UnknownNode { id: b })?;
        if pos_a == pos_b {
            return Err(PlanError::UnknownNode { id: b });
        }
        let edges = merged_edges(&alive[pos_a].edges, &alive[pos_b].edges);
        let produced = entries_for(graph, &edges);
        max_intermediate = max_intermediate.max(produced);
        steps.push(MergeStep {
            lhs: a,
            rhs: b,
            result: next_id,
            result_entries: produced,
        });
        let (first, second) = (pos_a.min(pos_b), pos_a.max(pos_b));
        alive.remove(second);
        alive.remove(first);
        alive.push(Node {
            id: next_id,
            edges,
            entries: produced,
        });
    }

    if alive.len() > 1 {
        return Err(PlanError::IncompleteMerge {
            remaining: alive.len(),
        });
    }
    Ok(ContractionPlan {
        steps,
        max_intermediate,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::graph::Spin;

    fn theta_graph(a: u32, b: u32, c: u32) -> LabeledGraph {
        let mut g = LabeledGraph::new();
        g.add_vertex("u").unwrap();
        g.add_vertex("w").unwrap();
        for spin in [a, b, c] {
            g.add_edge("u", "w", Spin::new(spin).unwrap()).unwrap();
        }
        g
    }

    fn complete_graph(n: usize, spin: u32) -> LabeledGraph {
        let mut g = LabeledGraph::new();
        let names: Vec<String> = (0..n).map(|i| format!("v{i}")).collect();
        for name in &names {
            g.add_vertex(name).unwrap();
        }
        for i in 0..n {
            for j in (i + 1)..n {
                g.add_edge(&names[i], &names[j], Spin::new(spin).unwrap())
                    .unwrap();
            }
        }
        g
    }

    #[test]
    fn theta_contracts_in_one_step_to_a_scalar() {
        let plan = plan_contraction(&theta_graph(1, 1, 2));
        assert_eq!(plan.steps.len(), 1);
        assert_eq!(plan.steps[0].lhs, 0);
        assert_eq!(plan.steps[0].rhs, 1);
        assert_eq!(plan.steps[0].result, 2);
        assert_eq!(plan.steps[0].result_entries, 1);
        assert_eq!(plan.max_intermediate, 1);
    }

    #[test]
    fn loop_only_vertex_needs_no_merges() {
        let mut g = LabeledGraph::new();
        g.add_vertex("v").unwrap();
        g.add_edge("v", "v", Spin::new(3).unwrap()).unwrap();
        let plan = plan_contraction(&g);
        assert!(plan.steps.is_empty());
        assert_eq!(plan.max_intermediate, 0);
    }

    #[test]
    fn complete_graph_on_four_vertices_all_spin_two() {
        // Every first merge joins two trivalent spin-2 vertices sharing one
        // edge, leaving four open legs of pair-dimension 9.
        let plan = plan_contraction(&complete_graph(4, 2));
        assert_eq!(plan.steps.len(), 3);
        assert_eq!(plan.max_intermediate, 9u128.pow(4));
    }

    #[test]
    fn complete_graph_on_five_vertices_stays_under_a_million() {
        let plan = plan_contraction(&complete_graph(5, 2));
        assert_eq!(plan.steps.len(), 4);
        assert_eq!(plan.max_intermediate, 9u128.pow(6));
        assert!(plan.max_intermediate < 1_000_000);
    }

    #[test]
    fn disconnected_components_merge_as_outer_products() {
        let mut g = theta_graph(2, 2, 2);
        g.add_vertex("a").unwrap();
        g.add_vertex("b").unwrap();
        g.add_edge("a", "b", Spin::new(1).unwrap()).unwrap();
        g.add_edge("a", "b", Spin::new(1).unwrap()).unwrap();
        let plan = plan_contraction(&g);
        assert_eq!(plan.steps.len(), 3);
        // Shared-edge merges happen before the final outer product of scalars.
        assert_eq!(plan.steps[2].result_entries, 1);
    }

    #[test]
    fn explicit_sequence_matches_greedy_on_theta() {
        let g = theta_graph(1, 1, 2);
        let plan = plan_from_merge_sequence(&g, &[(0, 1)]).unwrap();
        assert_eq!(plan, plan_contraction(&g));
    }

    #[test]
    fn explicit_sequence_rejects_unknown_and_incomplete() {
        let g = complete_graph(4, 2);
        assert_eq!(
            plan_from_merge_sequence(&g, &[(0, 7)]).unwrap_err(),
            PlanError::UnknownNode { id: 7 }
        );
        assert_eq!(
            plan_from_merge_sequence(&g, &[(0, 1)]).unwrap_err(),
            PlanError::IncompleteMerge { remaining: 3 }
        );
    }
}
