//! Chord-diagram presentations of closed nets.
//!
//! A net is an abstract multigraph, but the diagrammatic calculus its value
//! is defined in is planar: vertices carry a cyclic order of their legs and
//! edges may cross. This module chooses a concrete presentation — vertices
//! on a circle, edges as chords, parallel edges fanned apart slightly — and
//! converts it into a combinatorial plane map in which every chord crossing
//! is an explicit, marked 4-valent vertex. The classical braiding then
//! resolves each crossing into a signed sum over intermediate spins (see
//! [`resolve_crossings`]), leaving honestly planar nets for the reduction
//! engine.
//!
//! Any generic drawing yields the same value, so the circle order is chosen
//! only to keep the number of crossings (and with it the branching factor)
//! small: exhaustively for few vertices, by seeded random search with local
//! improvement otherwise.

use super::net::{PlaneNet, VertexKind};
use super::EvalError;
use crate::graph::LabeledGraph;
use rand::seq::SliceRandom;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

/// Sideways fan-out of parallel edges; only relative order matters, so the
/// magnitude merely has to be far below the jittered chord geometry.
const PARALLEL_FAN: f64 = 1e-5;

/// Count chord crossings for a circle order given as vertex ranks. Chords
/// sharing an endpoint never cross; distinct chords cross exactly when their
/// endpoints interleave around the circle.
fn crossing_count(rank: &[usize], edges: &[(usize, usize)]) -> usize {
    let mut count = 0;
    for (i, &(a, b)) in edges.iter().enumerate() {
        for &(c, d) in &edges[i + 1..] {
            if interleaves(rank, (a, b), (c, d)) {
                count += 1;
            }
        }
    }
    count
}

fn interleaves(rank: &[usize], (a, b): (usize, usize), (c, d): (usize, usize)) -> bool {
    if a == b || c == d || a == c || a == d || b == c || b == d {
        return false;
    }
    let (lo, hi) = (rank[a].min(rank[b]), rank[a].max(rank[b]));
    let c_in = lo < rank[c] && rank[c] < hi;
    let d_in = lo < rank[d] && rank[d] < hi;
    c_in != d_in
}

/// Choose a circle order with few crossings. Exhaustive over cyclic orders
/// for small nets, seeded random restarts with adjacent-swap hill climbing
/// beyond that. Deterministic.
pub(super) fn choose_order(n_vertices: usize, edges: &[(usize, usize)]) -> Vec<usize> {
    let mut best: Vec<usize> = (0..n_vertices).collect();
    if n_vertices <= 2 || edges.len() < 2 {
        return best;
    }
    let rank_of = |order: &[usize]| {
        let mut rank = vec![0usize; n_vertices];
        for (r, &v) in order.iter().enumerate() {
            rank[v] = r;
        }
        rank
    };
    let mut best_cost = crossing_count(&rank_of(&best), edges);

    if n_vertices <= 8 {
        // Fix the first vertex: crossings only depend on the cyclic order.
        let mut rest: Vec<usize> = (1..n_vertices).collect();
        permute(&mut rest, 0, &mut |tail| {
            let mut order = Vec::with_capacity(n_vertices);
            order.push(0);
            order.extend_from_slice(tail);
            let cost = crossing_count(&rank_of(&order), edges);
            if cost < best_cost {
                best_cost = cost;
                best = order;
            }
        });
        return best;
    }

    let mut rng = ChaCha8Rng::seed_from_u64(0x5eed_c0de);
    let mut current = best.clone();
    for _ in 0..400 {
        current.shuffle(&mut rng);
        let mut cost = crossing_count(&rank_of(&current), edges);
        // Adjacent-swap descent.
        let mut improved = true;
        while improved {
            improved = false;
            for i in 0..n_vertices {
                let j = (i + 1) % n_vertices;
                current.swap(i, j);
                let swapped = crossing_count(&rank_of(&current), edges);
                if swapped < cost {
                    cost = swapped;
                    improved = true;
                } else {
                    current.swap(i, j);
                }
            }
        }
        if cost < best_cost {
            best_cost = cost;
            best = current.clone();
        }
        if best_cost == 0 {
            break;
        }
    }
    best
}

fn permute<F: FnMut(&[usize])>(items: &mut Vec<usize>, k: usize, visit: &mut F) {
    if k == items.len() {
        visit(items);
        return;
    }
    for i in k..items.len() {
        items.swap(k, i);
        permute(items, k + 1, visit);
        items.swap(k, i);
    }
}

#[derive(Clone, Copy)]
struct Point {
    x: f64,
    y: f64,
}

/// One drawn edge: base chord endpoints, unit direction, unit normal, and
/// its fan offset among parallel edges of the same endpoint pair.
struct DrawnEdge {
    ends: (usize, usize),
    spin: u64,
    from: Point,
    dir: (f64, f64),
    normal: (f64, f64),
    length: f64,
    offset: f64,
    is_loop: bool,
}

/// A detected crossing between two drawn edges, with its curve parameters
/// along each.
struct Crossing {
    edges: (usize, usize),
    params: (f64, f64),
}

/// Build the plane map of the chosen presentation: original vertices plus
/// one marked 4-valent vertex per chord crossing. Returns the map and the
/// list of crossing vertices (to be resolved by the braiding).
pub(super) fn plane_map(
    graph: &LabeledGraph,
    order: &[usize],
) -> Result<(PlaneNet, Vec<usize>), EvalError> {
    let n = graph.vertex_count();
    let mut rank = vec![0usize; n];
    for (r, &v) in order.iter().enumerate() {
        rank[v] = r;
    }
    // Jittered regular polygon: breaks chord concurrencies deterministically.
    let positions: Vec<Point> = (0..n)
        .map(|v| {
            let r = rank[v] as f64;
            let angle = std::f64::consts::TAU * (r + 0.083 * (7.3 * r + 0.51).sin()) / n as f64;
            Point {
                x: angle.cos(),
                y: angle.sin(),
            }
        })
        .collect();

    // Fan out parallel edges of each endpoint pair symmetrically.
    let mut seen_pairs: Vec<((usize, usize), usize)> = Vec::new();
    let multiplicity = |pair: (usize, usize), seen: &[((usize, usize), usize)]| {
        seen.iter().filter(|(p, _)| *p == pair).count()
    };
    // Each non-loop edge is drawn in its canonical orientation (ascending
    // endpoints) so that parallel edges of a pair share one direction and
    // normal regardless of how the graph declared them.
    let mut drawn: Vec<DrawnEdge> = Vec::new();
    for e in graph.edges() {
        let pair = (e.end0.min(e.end1), e.end0.max(e.end1));
        let index_among = multiplicity(pair, &seen_pairs);
        seen_pairs.push((pair, index_among));
        let (from, to) = (positions[pair.0], positions[pair.1]);
        let (dx, dy) = (to.x - from.x, to.y - from.y);
        let length = (dx * dx + dy * dy).sqrt().max(1e-12);
        let dir = (dx / length, dy / length);
        drawn.push(DrawnEdge {
            ends: pair,
            spin: e.spin.get() as u64,
            from,
            dir,
            normal: (-dir.1, dir.0),
            length,
            offset: PARALLEL_FAN * index_among as f64,
            is_loop: e.end0 == e.end1,
        });
    }
    let total = |pair: (usize, usize)| seen_pairs.iter().filter(|(p, _)| *p == pair).count();
    for (d, &(pair, k)) in drawn.iter_mut().zip(&seen_pairs) {
        d.offset = PARALLEL_FAN * (k as f64 - (total(pair) as f64 - 1.0) / 2.0);
    }

    // Crossings: combinatorial interleaving; curve parameters from the base
    // chords, first-order corrected for the parallel fan so that near-tied
    // crossings order consistently.
    let mut crossings: Vec<Crossing> = Vec::new();
    for i in 0..drawn.len() {
        for j in (i + 1)..drawn.len() {
            let (a, b) = (&drawn[i], &drawn[j]);
            if a.is_loop || b.is_loop || !interleaves(&rank, a.ends, b.ends) {
                continue;
            }
            let Some((t, u)) = chord_params(a, b) else {
                return Err(EvalError::PresentationDegenerate);
            };
            let t = t + b.offset * dot(b.normal, a.dir) / a.length;
            let u = u + a.offset * dot(a.normal, b.dir) / b.length;
            crossings.push(Crossing {
                edges: (i, j),
                params: (t, u),
            });
        }
    }

    // Sort each edge's crossings along its curve.
    let mut along: Vec<Vec<(f64, usize)>> = vec![Vec::new(); drawn.len()];
    for (c_id, c) in crossings.iter().enumerate() {
        along[c.edges.0].push((c.params.0, c_id));
        along[c.edges.1].push((c.params.1, c_id));
    }
    for list in &mut along {
        list.sort_by(|x, y| x.0.total_cmp(&y.0));
    }

    // Assemble the map: each edge becomes a chain of segments through its
    // crossing vertices, and every vertex sorts its legs by departure angle.
    let n_cross = crossings.len();
    let mut net = PlaneNet::with_vertices(n + n_cross);
    for c in 0..n_cross {
        net.mark_vertex(n + c, VertexKind::Crossing);
    }
    // Leg lists: (angle, dart) per vertex, sorted at the end; and the drawn
    // edge each map edge is a segment of.
    let mut legs: Vec<Vec<(f64, usize)>> = vec![Vec::new(); n + n_cross];
    let mut parent: Vec<usize> = Vec::new();

    for (e_id, e) in drawn.iter().enumerate() {
        if e.is_loop {
            let dart = net.new_edge(e.spin);
            parent.push(e_id);
            let base = (-positions[e.ends.0].y).atan2(-positions[e.ends.0].x);
            legs[e.ends.0].push((base - 1e-4, dart));
            legs[e.ends.0].push((base + 1e-4, PlaneNet::twin(dart)));
            continue;
        }
        // Chain nodes: start vertex, crossing vertices in order, end vertex.
        let mut nodes = vec![e.ends.0];
        nodes.extend(along[e_id].iter().map(|&(_, c)| n + c));
        nodes.push(e.ends.1);
        for (step, window) in nodes.windows(2).enumerate() {
            let dart = net.new_edge(e.spin);
            parent.push(e_id);
            let twin = PlaneNet::twin(dart);
            let (from_node, to_node) = (window[0], window[1]);
            // Departure angles: chord direction, fanned at the original
            // endpoints, reversed with the opposite fan at arrival ends.
            let base = e.dir.1.atan2(e.dir.0);
            let fan = 2.0 * e.offset;
            if step == 0 {
                legs[from_node].push((base + fan, dart));
            } else {
                legs[from_node].push((base, dart));
            }
            if step == nodes.len() - 2 {
                legs[to_node].push((reverse_angle(base) - fan, twin));
            } else {
                legs[to_node].push((reverse_angle(base), twin));
            }
        }
    }

    for (v, list) in legs.iter_mut().enumerate() {
        list.sort_by(|x, y| x.0.total_cmp(&y.0));
        net.set_rotation(v, list.iter().map(|&(_, d)| d).collect());
    }

    // A transversal crossing must alternate between its two strands.
    for c in 0..n_cross {
        let rotation = net.rotation(n + c);
        if rotation.len() != 4 {
            return Err(EvalError::PresentationDegenerate);
        }
        let strands: Vec<usize> = rotation
            .iter()
            .map(|&d| parent[PlaneNet::edge_of(d)])
            .collect();
        if strands[0] != strands[2] || strands[1] != strands[3] || strands[0] == strands[1] {
            return Err(EvalError::PresentationDegenerate);
        }
    }

    if !net.is_plane() {
        return Err(EvalError::PresentationDegenerate);
    }
    Ok((net, (n..n + n_cross).collect()))
}

fn dot(a: (f64, f64), b: (f64, f64)) -> f64 {
    a.0 * b.0 + a.1 * b.1
}

fn reverse_angle(angle: f64) -> f64 {
    if angle > 0.0 {
        angle - std::f64::consts::PI
    } else {
        angle + std::f64::consts::PI
    }
}

/// Intersection parameters of two base chords, each in (0, 1); `None` when
/// the chords are too close to parallel to trust the drawing.
fn chord_params(a: &DrawnEdge, b: &DrawnEdge) -> Option<(f64, f64)> {
    let det = a.dir.0 * (-b.dir.1) - a.dir.1 * (-b.dir.0);
    if det.abs() < 1e-9 {
        return None;
    }
    let (rx, ry) = (b.from.x - a.from.x, b.from.y - a.from.y);
    let s = (rx * (-b.dir.1) - ry * (-b.dir.0)) / det;
    let w = (a.dir.0 * ry - a.dir.1 * rx) / det;
    Some((s / a.length, w / b.length))
}
