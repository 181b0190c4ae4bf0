//! Reduction of closed nets to exact rational values.
//!
//! The diagrammatic calculus the net value lives in is planar: its local
//! identities (bubble, triangle, six-j recoupling) hold for patches of a
//! *drawing*, not of an abstract multigraph. The engine therefore works on a
//! combinatorial plane map — every vertex carries the counterclockwise cyclic
//! order of its edge-ends (darts), faces are the orbits of "cross the edge,
//! then turn" — built from a chord-diagram presentation of the net (see
//! [`super::presentation`]). Chord crossings are resolved first: at the
//! classical point the braiding is the plain transposition, so a crossing of
//! strands m and n expands into the signed channel sum
//! `Σ_f (−1)^((m+n−f)/2) · Δ_f/θ(m,n,f)` over intermediate spins, after which
//! the map is honestly planar. Any generic presentation yields the same
//! value up to sign — a redrawing can reverse a vertex's cyclic leg order,
//! flipping the value by that vertex's leg-transposition sign — and exactly
//! the same value once squared, which is the combination the graph invariant
//! consumes. The presentation layer merely picks a drawing with few
//! crossings to keep the channel sums small.
//!
//! Reduction then repeatedly applies, in priority order: removal of spin-0
//! edges and of vertices of degree < 3 (splices are exact because strand
//! projectors are idempotent), an admissibility gate, tadpole and bridge
//! vanishing, the bubble move on 2-faces, the triangle move on 3-faces, and
//! a six-j recoupling move along a smallest face. Recoupling strictly
//! shrinks the smallest face, and every other move strictly removes edges,
//! so reduction terminates.

use super::{six_j_raw, tet_raw, theta_raw, triple_admissible, EvalError, EvalLimits};
use crate::exact::{self, ExactValue};
use crate::graph::LabeledGraph;
use num::traits::Zero;
use std::collections::HashMap;

/// A net's spin-free shape: vertex count plus the sorted endpoint pair of
/// every edge. Nets with equal skeletons can reuse one circle order.
type Skeleton = (usize, Vec<(usize, usize)>);

/// Shared evaluation state: move/term budgets and memo tables for the
/// closed-form kernels (the same θ and tetrahedral values recur constantly
/// during reduction), plus the cached circle orders of previously presented
/// net skeletons — expansion produces many nets that differ only in spins.
pub(super) struct Ctx {
    limits: EvalLimits,
    steps_used: u64,
    terms_used: u64,
    theta_cache: HashMap<[u64; 3], ExactValue>,
    tet_cache: HashMap<[u64; 6], ExactValue>,
    six_j_cache: HashMap<[u64; 6], ExactValue>,
    layout_cache: HashMap<Skeleton, Vec<usize>>,
}

impl Ctx {
    pub fn new(limits: EvalLimits) -> Self {
        Ctx {
            limits,
            steps_used: 0,
            terms_used: 0,
            theta_cache: HashMap::new(),
            tet_cache: HashMap::new(),
            six_j_cache: HashMap::new(),
            layout_cache: HashMap::new(),
        }
    }

    fn spend_step(&mut self) -> Result<(), EvalError> {
        if self.steps_used >= self.limits.max_steps {
            return Err(EvalError::StepBudgetExceeded {
                budget: self.limits.max_steps,
            });
        }
        self.steps_used += 1;
        Ok(())
    }

    pub fn spend_term(&mut self) -> Result<(), EvalError> {
        if self.terms_used >= self.limits.max_terms {
            return Err(EvalError::TermBudgetExceeded {
                budget: self.limits.max_terms,
            });
        }
        self.terms_used += 1;
        Ok(())
    }

    pub fn theta(&mut self, a: u64, b: u64, c: u64) -> ExactValue {
        let mut key = [a, b, c];
        key.sort_unstable();
        self.theta_cache
            .entry(key)
            .or_insert_with(|| theta_raw(a, b, c))
            .clone()
    }

    fn tet(&mut self, a: u64, b: u64, e: u64, c: u64, d: u64, f: u64) -> ExactValue {
        self.tet_cache
            .entry([a, b, e, c, d, f])
            .or_insert_with(|| tet_raw(a, b, e, c, d, f))
            .clone()
    }

    fn six_j(&mut self, a: u64, b: u64, e: u64, c: u64, d: u64, f: u64) -> ExactValue {
        self.six_j_cache
            .entry([a, b, e, c, d, f])
            .or_insert_with(|| six_j_raw(a, b, e, c, d, f))
            .clone()
    }
}

/// Whether a map vertex is a genuine net vertex or a marked chord crossing
/// awaiting resolution.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub(super) enum VertexKind {
    Plain,
    Crossing,
}

/// A combinatorial plane map. Edge `e` owns the darts `2e` and `2e + 1`;
/// each live vertex stores its darts in counterclockwise order, and faces
/// are the orbits of `d ↦ next-at-vertex(twin(d))`. Removal only clears
/// slots, so indices are stable and all tie-breaking is deterministic.
#[derive(Clone)]
pub(super) struct PlaneNet {
    rotations: Vec<Option<Vec<usize>>>,
    kinds: Vec<VertexKind>,
    spins: Vec<Option<u64>>,
    dart_home: Vec<usize>,
}

impl PlaneNet {
    pub fn with_vertices(n: usize) -> Self {
        PlaneNet {
            rotations: vec![Some(Vec::new()); n],
            kinds: vec![VertexKind::Plain; n],
            spins: Vec::new(),
            dart_home: Vec::new(),
        }
    }

    pub fn twin(d: usize) -> usize {
        d ^ 1
    }

    pub fn edge_of(d: usize) -> usize {
        d / 2
    }

    pub fn add_vertex(&mut self, kind: VertexKind) -> usize {
        self.rotations.push(Some(Vec::new()));
        self.kinds.push(kind);
        self.rotations.len() - 1
    }

    pub fn mark_vertex(&mut self, v: usize, kind: VertexKind) {
        self.kinds[v] = kind;
    }

    /// Allocate an edge and return its first dart; the caller is responsible
    /// for placing both darts into rotations.
    pub fn new_edge(&mut self, spin: u64) -> usize {
        let e = self.spins.len();
        self.spins.push(Some(spin));
        self.dart_home.push(usize::MAX);
        self.dart_home.push(usize::MAX);
        2 * e
    }

    pub fn set_rotation(&mut self, v: usize, darts: Vec<usize>) {
        for &d in &darts {
            self.dart_home[d] = v;
        }
        self.rotations[v] = Some(darts);
    }

    pub fn rotation(&self, v: usize) -> &[usize] {
        self.rotations[v].as_deref().expect("vertex is live")
    }

    pub fn spin_of_dart(&self, d: usize) -> u64 {
        self.spins[d / 2].expect("edge is live")
    }

    fn spin(&self, e: usize) -> u64 {
        self.spins[e].expect("edge is live")
    }

    fn set_spin(&mut self, e: usize, n: u64) {
        debug_assert!(self.spins[e].is_some());
        self.spins[e] = Some(n);
    }

    fn home(&self, d: usize) -> usize {
        self.dart_home[d]
    }

    fn live_vertices(&self) -> impl Iterator<Item = usize> + '_ {
        self.rotations
            .iter()
            .enumerate()
            .filter_map(|(v, r)| r.as_ref().map(|_| v))
    }

    fn live_edges(&self) -> impl Iterator<Item = usize> + '_ {
        self.spins
            .iter()
            .enumerate()
            .filter_map(|(e, s)| s.as_ref().map(|_| e))
    }

    fn degree(&self, v: usize) -> usize {
        self.rotation(v).len()
    }

    fn clear_vertex(&mut self, v: usize) {
        self.rotations[v] = None;
    }

    /// Drop an edge, detaching both darts from their rotations.
    fn remove_edge(&mut self, e: usize) {
        for d in [2 * e, 2 * e + 1] {
            let v = self.dart_home[d];
            if let Some(rotation) = self.rotations[v].as_mut() {
                rotation.retain(|&x| x != d);
            }
        }
        self.spins[e] = None;
    }

    /// Put `new` into the rotation slot currently held by `old`, preserving
    /// the cyclic position (and with it the embedding).
    fn replace_dart(&mut self, old: usize, new: usize) {
        let v = self.dart_home[old];
        let rotation = self.rotations[v].as_mut().expect("vertex is live");
        let slot = rotation
            .iter()
            .position(|&x| x == old)
            .expect("dart sits in its home rotation");
        rotation[slot] = new;
        self.dart_home[new] = v;
    }

    /// Counterclockwise successor of `d` at its vertex.
    fn sigma(&self, d: usize) -> usize {
        let rotation = self.rotation(self.home(d));
        let pos = rotation
            .iter()
            .position(|&x| x == d)
            .expect("dart sits in its home rotation");
        rotation[(pos + 1) % rotation.len()]
    }

    /// Face orbits of the map: follow `d ↦ sigma(twin(d))` from every live
    /// dart. Deterministic: orbits start at ascending unvisited dart ids.
    fn faces(&self) -> Vec<Vec<usize>> {
        let mut visited = vec![false; self.dart_home.len()];
        let mut faces = Vec::new();
        for e in self.live_edges() {
            for start in [2 * e, 2 * e + 1] {
                if visited[start] {
                    continue;
                }
                let mut orbit = Vec::new();
                let mut d = start;
                loop {
                    visited[d] = true;
                    orbit.push(d);
                    d = self.sigma(Self::twin(d));
                    if d == start {
                        break;
                    }
                }
                faces.push(orbit);
            }
        }
        faces
    }

    /// Euler check: every connected component with edges satisfies
    /// V − E + F = 2. Guards the construction of presentations.
    pub fn is_plane(&self) -> bool {
        let n = self.rotations.len();
        let mut component = vec![usize::MAX; n];
        let mut n_components = 0;
        for v in self.live_vertices() {
            if component[v] != usize::MAX {
                continue;
            }
            let id = n_components;
            n_components += 1;
            let mut stack = vec![v];
            component[v] = id;
            while let Some(u) = stack.pop() {
                for &d in self.rotation(u) {
                    let w = self.home(Self::twin(d));
                    if component[w] == usize::MAX {
                        component[w] = id;
                        stack.push(w);
                    }
                }
            }
        }
        let mut v_count = vec![0i64; n_components];
        let mut e_count = vec![0i64; n_components];
        let mut f_count = vec![0i64; n_components];
        for v in self.live_vertices() {
            v_count[component[v]] += 1;
        }
        for e in self.live_edges() {
            e_count[component[self.home(2 * e)]] += 1;
        }
        for face in self.faces() {
            f_count[component[self.home(face[0])]] += 1;
        }
        (0..n_components)
            .filter(|&c| e_count[c] > 0)
            .all(|c| v_count[c] - e_count[c] + f_count[c] == 2)
    }
}

/// Evaluate the closed net underlying `graph` (vertices of degree ≤ 3):
/// choose a low-crossing presentation, resolve its crossings, and reduce.
pub(super) fn evaluate_graph(graph: &LabeledGraph, ctx: &mut Ctx) -> Result<ExactValue, EvalError> {
    let skeleton: Vec<(usize, usize)> = graph
        .edges()
        .iter()
        .map(|e| (e.end0.min(e.end1), e.end0.max(e.end1)))
        .collect();
    let key = (graph.vertex_count(), skeleton);
    let order = match ctx.layout_cache.get(&key) {
        Some(order) => order.clone(),
        None => {
            let order = super::presentation::choose_order(key.0, &key.1);
            ctx.layout_cache.insert(key, order.clone());
            order
        }
    };
    evaluate_with_order(graph, &order, ctx)
}

/// As [`evaluate_graph`], but with an explicit circle order. The value is
/// independent of the order; exposed separately so tests can exercise
/// presentations with different crossing patterns.
pub(super) fn evaluate_with_order(
    graph: &LabeledGraph,
    order: &[usize],
    ctx: &mut Ctx,
) -> Result<ExactValue, EvalError> {
    let (net, crossings) = super::presentation::plane_map(graph, order)?;
    resolve_and_reduce(net, &crossings, ctx)
}

/// Expand every marked crossing into its channel sum, then reduce the
/// resulting plane nets. At the classical point the braiding is the
/// transposition, whose f-channel component carries the vertex-swap sign
/// (−1)^((m+n−f)/2) on top of the identity decomposition Δ_f/θ(m, n, f).
fn resolve_and_reduce(
    net: PlaneNet,
    crossings: &[usize],
    ctx: &mut Ctx,
) -> Result<ExactValue, EvalError> {
    let Some((&x, rest)) = crossings.split_last() else {
        return reduce(net, ctx);
    };
    let rotation = net.rotation(x).to_vec();
    debug_assert_eq!(rotation.len(), 4, "crossings are 4-valent");
    let (r0, r1, r2, r3) = (rotation[0], rotation[1], rotation[2], rotation[3]);
    let m = net.spin_of_dart(r0);
    let n = net.spin_of_dart(r1);

    // Split the crossing into two trivalent vertices joined by the channel
    // edge: adjacent legs pair up, and the counterclockwise orders
    // [r0, r1, f] and [r2, r3, twin(f)] keep the map plane.
    let mut base = net;
    let f_dart = base.new_edge(0);
    let q = base.add_vertex(VertexKind::Plain);
    base.mark_vertex(x, VertexKind::Plain);
    base.set_rotation(x, vec![r0, r1, f_dart]);
    base.set_rotation(q, vec![r2, r3, PlaneNet::twin(f_dart)]);

    let mut total = ExactValue::zero();
    let mut f = m.abs_diff(n);
    while f <= m + n {
        let theta = ctx.theta(m, n, f);
        if !theta.is_zero() {
            ctx.spend_term()?;
            let coeff = exact::signed_dimension(f) * exact::sign_pow((m + n - f) / 2) / theta;
            let mut branch = base.clone();
            branch.set_spin(PlaneNet::edge_of(f_dart), f);
            total += coeff * resolve_and_reduce(branch, rest, ctx)?;
        }
        f += 2;
    }
    Ok(total)
}

/// Reduce a crossing-free plane net to its exact value by local moves.
fn reduce(mut net: PlaneNet, ctx: &mut Ctx) -> Result<ExactValue, EvalError> {
    let mut acc = ExactValue::new(1.into(), 1.into());
    'moves: loop {
        ctx.spend_step()?;

        // Spin-0 edges are invisible strands.
        let zero_edge = net.live_edges().find(|&e| net.spin(e) == 0);
        if let Some(e) = zero_edge {
            net.remove_edge(e);
            continue;
        }

        // Vertices of degree < 3: empty ones vanish, a dangling positive
        // strand is a zero intertwiner, and a transit vertex splices (its
        // two strands must agree — distinct projectors are orthogonal).
        let vertices: Vec<usize> = net.live_vertices().collect();
        for &v in &vertices {
            debug_assert_eq!(net.kinds[v], VertexKind::Plain, "crossings were resolved");
            match net.degree(v) {
                0 => {
                    net.clear_vertex(v);
                    continue 'moves;
                }
                1 => return Ok(ExactValue::zero()),
                2 => {
                    let (x, y) = (net.rotation(v)[0], net.rotation(v)[1]);
                    if PlaneNet::edge_of(x) == PlaneNet::edge_of(y) {
                        // An isolated circle.
                        acc *= exact::signed_dimension(net.spin_of_dart(x));
                        net.spins[PlaneNet::edge_of(x)] = None;
                        net.clear_vertex(v);
                        continue 'moves;
                    }
                    if net.spin_of_dart(x) != net.spin_of_dart(y) {
                        return Ok(ExactValue::zero());
                    }
                    weld(&mut net, x, y);
                    net.clear_vertex(v);
                    continue 'moves;
                }
                3 => {}
                d => unreachable!("net vertices have degree ≤ 3, found {d}"),
            }
        }
        if net.live_edges().next().is_none() {
            return Ok(acc);
        }

        // Trivalent now: inadmissible vertices and tadpole loops are zero
        // intertwiners.
        for &v in &vertices {
            if net.rotations[v].is_none() {
                continue;
            }
            let spins: Vec<u64> = net.rotation(v).iter().map(|&d| net.spin_of_dart(d)).collect();
            if !triple_admissible(spins[0], spins[1], spins[2]) {
                return Ok(ExactValue::zero());
            }
            if net
                .rotation(v)
                .iter()
                .any(|&d| net.home(PlaneNet::twin(d)) == v)
            {
                return Ok(ExactValue::zero());
            }
        }

        let faces = net.faces();

        // A face that traverses an edge twice marks a bridge; the partial
        // trace of a positive-spin projector across a bridge vanishes.
        for face in &faces {
            let mut edges: Vec<usize> = face.iter().map(|&d| PlaneNet::edge_of(d)).collect();
            edges.sort_unstable();
            if edges.windows(2).any(|w| w[0] == w[1]) {
                return Ok(ExactValue::zero());
            }
        }

        let face = faces
            .iter()
            .min_by_key(|face| (face.len(), *face.iter().min().expect("faces are nonempty")))
            .expect("a net with edges has faces");
        match face.len() {
            2 => {
                if let Some(factor) = bubble(&mut net, face, ctx) {
                    acc *= factor;
                } else {
                    return Ok(ExactValue::zero());
                }
            }
            3 => {
                if let Some(factor) = triangle(&mut net, face, ctx) {
                    acc *= factor;
                } else {
                    return Ok(ExactValue::zero());
                }
            }
            _ => return Ok(acc * recouple(net, face, ctx)?),
        }
    }
}

/// Merge the edges of darts `x` and `y` into one strand: the edge of `x`
/// survives, with `x` moved into the slot of `twin(y)`. The caller clears
/// the vertex (or vertices) that held `x` and `y`.
fn weld(net: &mut PlaneNet, x: usize, y: usize) {
    debug_assert_ne!(PlaneNet::edge_of(x), PlaneNet::edge_of(y));
    debug_assert_eq!(net.spin_of_dart(x), net.spin_of_dart(y));
    net.replace_dart(PlaneNet::twin(y), x);
    net.spins[PlaneNet::edge_of(y)] = None;
}

/// Collapse a 2-face: parallel strands (a, b) between two vertices fuse
/// onto their common third spin c with factor θ(a, b, c)/Δ_c. Returns
/// `None` when the third spins disagree (orthogonal projectors).
fn bubble(net: &mut PlaneNet, face: &[usize], ctx: &mut Ctx) -> Option<ExactValue> {
    let (d1, d2) = (face[0], face[1]);
    let (va, vb) = (net.home(d1), net.home(d2));
    debug_assert_ne!(va, vb, "loops were handled before face moves");
    let (n1, n2) = (net.spin_of_dart(d1), net.spin_of_dart(d2));
    let third = |net: &PlaneNet, v: usize, skip0: usize, skip1: usize| {
        net.rotation(v)
            .iter()
            .copied()
            .find(|&d| d != skip0 && d != skip1)
            .expect("trivalent vertex has a third dart")
    };
    let ta = third(net, va, d1, PlaneNet::twin(d2));
    let tb = third(net, vb, d2, PlaneNet::twin(d1));
    let c = net.spin_of_dart(ta);
    if net.spin_of_dart(tb) != c {
        return None;
    }
    let theta = ctx.theta(n1, n2, c);
    let (e1, e2) = (PlaneNet::edge_of(d1), PlaneNet::edge_of(d2));
    if PlaneNet::edge_of(ta) == PlaneNet::edge_of(tb) {
        // The bubble closes into a full θ component: the collapsed strand
        // is a circle, whose Δ_c cancels the 1/Δ_c of the move.
        net.spins[PlaneNet::edge_of(ta)] = None;
        net.spins[e1] = None;
        net.spins[e2] = None;
        net.clear_vertex(va);
        net.clear_vertex(vb);
        return Some(theta);
    }
    weld(net, ta, tb);
    net.spins[e1] = None;
    net.spins[e2] = None;
    net.clear_vertex(va);
    net.clear_vertex(vb);
    Some(theta / exact::signed_dimension(c))
}

/// Collapse a 3-face: the triangle with corner vertices P₁P₂P₃ contracts to
/// a single vertex with factor Tet/θ. Returns `None` when the collapsed
/// vertex would be inadmissible.
fn triangle(net: &mut PlaneNet, face: &[usize], ctx: &mut Ctx) -> Option<ExactValue> {
    let (d1, d2, d3) = (face[0], face[1], face[2]);
    let (p1, p2, p3) = (net.home(d1), net.home(d2), net.home(d3));
    debug_assert!(p1 != p2 && p2 != p3 && p1 != p3, "trivalent triangle faces are simple");
    let (e1, e2, e3) = (
        net.spin_of_dart(d1),
        net.spin_of_dart(d2),
        net.spin_of_dart(d3),
    );
    let third = |net: &PlaneNet, v: usize, skip0: usize, skip1: usize| {
        net.rotation(v)
            .iter()
            .copied()
            .find(|&d| d != skip0 && d != skip1)
            .expect("trivalent vertex has a third dart")
    };
    let x1 = third(net, p1, d1, PlaneNet::twin(d3));
    let x2 = third(net, p2, d2, PlaneNet::twin(d1));
    let x3 = third(net, p3, d3, PlaneNet::twin(d2));
    let (s1, s2, s3) = (
        net.spin_of_dart(x1),
        net.spin_of_dart(x2),
        net.spin_of_dart(x3),
    );
    let denom = ctx.theta(s2, s1, s3);
    if denom.is_zero() {
        return None;
    }
    let numer = ctx.tet(e1, e3, e2, s3, s2, s1);
    let merged = net.add_vertex(VertexKind::Plain);
    net.set_rotation(merged, vec![x3, x2, x1]);
    for d in [d1, d2, d3] {
        net.spins[PlaneNet::edge_of(d)] = None;
    }
    for p in [p1, p2, p3] {
        net.clear_vertex(p);
    }
    Some(numer / denom)
}

/// Recouple across the second edge of a (≥ 4)-face: the H-patch around that
/// edge is rewritten as a sum of I-patches, shrinking the face by one
/// corner. The rotations [twin(d₀), d₂, d₁] and [t_b, twin(d₁), t_d] are the
/// unique ones that keep the map plane.
fn recouple(net: PlaneNet, face: &[usize], ctx: &mut Ctx) -> Result<ExactValue, EvalError> {
    let start = face
        .iter()
        .position(|&d| d == *face.iter().min().expect("faces are nonempty"))
        .expect("minimum is present");
    let at = |i: usize| face[(start + i) % face.len()];
    let (d0, d1, d2) = (at(0), at(1), at(2));
    let (v1, v2) = (net.home(d1), net.home(d2));
    let third = |v: usize, skip0: usize, skip1: usize| {
        net.rotation(v)
            .iter()
            .copied()
            .find(|&d| d != skip0 && d != skip1)
            .expect("trivalent vertex has a third dart")
    };
    let tb = third(v1, d1, PlaneNet::twin(d0));
    let td = third(v2, d2, PlaneNet::twin(d1));
    let (a, b) = (net.spin_of_dart(d0), net.spin_of_dart(tb));
    let (c, d) = (net.spin_of_dart(d2), net.spin_of_dart(td));
    let e_spin = net.spin_of_dart(d1);
    let e_edge = PlaneNet::edge_of(d1);

    let mut base = net;
    base.set_rotation(v1, vec![PlaneNet::twin(d0), d2, d1]);
    base.set_rotation(v2, vec![tb, PlaneNet::twin(d1), td]);

    let mut total = ExactValue::zero();
    let mut f = a.abs_diff(c).max(b.abs_diff(d));
    let hi = (a + c).min(b + d);
    while f <= hi {
        let coeff = ctx.six_j(a, b, e_spin, c, d, f);
        if !coeff.is_zero() {
            let mut branch = base.clone();
            branch.set_spin(e_edge, f);
            total += coeff * reduce(branch, ctx)?;
        }
        f += 2;
    }
    Ok(total)
}
