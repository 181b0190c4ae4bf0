//! Spin-labelled multigraphs: the data model, a line-oriented text format,
//! admissibility checking, and the exact rewrite moves.

mod dsl;
mod rewrite;

pub use dsl::{parse_graph, serialize_graph, ParseError, ParseErrorKind};
pub use rewrite::{
    contract_edge, expand_vertex, fuse_parallel_edges, simplify, RewriteError, Simplified,
    WeightedGraphSum, WeightedTerm,
};

use std::fmt;
use thiserror::Error;

/// Largest spin accepted by the text format and the constructors.
pub const SPIN_CAP: u32 = 1_000_000;

/// Edge label: a non-negative integer `n` naming the SU(2) irreducible
/// representation of dimension `n + 1` (so `n` is twice the usual
/// half-integer spin).
#[derive(Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Debug)]
pub struct Spin(u32);

impl Spin {
    pub const ZERO: Spin = Spin(0);

    /// Construct a spin, rejecting values above [`SPIN_CAP`].
    pub fn new(value: u32) -> Result<Self, GraphError> {
        if value > SPIN_CAP {
            Err(GraphError::SpinOutOfRange { value })
        } else {
            Ok(Spin(value))
        }
    }

    pub fn get(self) -> u32 {
        self.0
    }

    /// Dimension of the representation this spin labels.
    pub fn dimension(self) -> u32 {
        self.0 + 1
    }
}

impl fmt::Display for Spin {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        self.0.fmt(f)
    }
}

/// Which end of an edge an incidence refers to.
#[derive(Clone, Copy, PartialEq, Eq, Debug)]
pub enum End {
    Zero,
    One,
}

/// One edge of a multigraph; `end0 == end1` is a loop. Ends are indices into
/// the owning graph's vertex list.
#[derive(Clone, Copy, PartialEq, Eq, Debug)]
pub struct Edge {
    pub end0: usize,
    pub end1: usize,
    pub spin: Spin,
}

impl Edge {
    pub fn is_loop(&self) -> bool {
        self.end0 == self.end1
    }

    /// The endpoint at the given end.
    pub fn endpoint(&self, end: End) -> usize {
        match end {
            End::Zero => self.end0,
            End::One => self.end1,
        }
    }

    /// The endpoint opposite to `v`; for loops returns `v` itself.
    pub fn other_endpoint(&self, v: usize) -> usize {
        if self.end0 == v {
            self.end1
        } else {
            self.end0
        }
    }

    /// True if either endpoint is `v`.
    pub fn touches(&self, v: usize) -> bool {
        self.end0 == v || self.end1 == v
    }
}

/// A finite undirected multigraph with named vertices and spin-labelled
/// edges. Vertex and edge order are part of the value (serialization
/// round-trips preserve them); loops and parallel edges are allowed.
#[derive(Clone, PartialEq, Eq, Debug, Default)]
pub struct LabeledGraph {
    vertices: Vec<String>,
    edges: Vec<Edge>,
}

#[derive(Error, Debug, Clone, PartialEq, Eq)]
pub enum GraphError {
    #[error("duplicate vertex name `{name}`")]
    DuplicateVertex { name: String },
    #[error("invalid vertex name `{name}` (allowed: [A-Za-z0-9_]+)")]
    InvalidVertexName { name: String },
    #[error("unknown vertex `{name}`")]
    UnknownVertex { name: String },
    #[error("vertex index {index} out of range")]
    VertexIndexOutOfRange { index: usize },
    #[error("edge index {index} out of range")]
    EdgeIndexOutOfRange { index: usize },
    #[error("spin {value} exceeds the cap {SPIN_CAP}")]
    SpinOutOfRange { value: u32 },
}

fn valid_vertex_name(name: &str) -> bool {
    !name.is_empty() && name.bytes().all(|b| b.is_ascii_alphanumeric() || b == b'_')
}

impl LabeledGraph {
    pub fn new() -> Self {
        Self::default()
    }

    /// Append a vertex; names must be unique and match `[A-Za-z0-9_]+`.
    pub fn add_vertex(&mut self, name: &str) -> Result<usize, GraphError> {
        if !valid_vertex_name(name) {
            return Err(GraphError::InvalidVertexName { name: name.into() });
        }
        if self.vertex_index(name).is_some() {
            return Err(GraphError::DuplicateVertex { name: name.into() });
        }
        self.vertices.push(name.to_owned());
        Ok(self.vertices.len() - 1)
    }

    /// Append an edge between two named vertices.
    pub fn add_edge(&mut self, v0: &str, v1: &str, spin: Spin) -> Result<usize, GraphError> {
        let end0 = self
            .vertex_index(v0)
            .ok_or_else(|| GraphError::UnknownVertex { name: v0.into() })?;
        let end1 = self
            .vertex_index(v1)
            .ok_or_else(|| GraphError::UnknownVertex { name: v1.into() })?;
        self.edges.push(Edge { end0, end1, spin });
        Ok(self.edges.len() - 1)
    }

    /// Append an edge between two vertex indices.
    pub fn add_edge_indices(
        &mut self,
        end0: usize,
        end1: usize,
        spin: Spin,
    ) -> Result<usize, GraphError> {
        for index in [end0, end1] {
            if index >= self.vertices.len() {
                return Err(GraphError::VertexIndexOutOfRange { index });
            }
        }
        self.edges.push(Edge { end0, end1, spin });
        Ok(self.edges.len() - 1)
    }

    pub fn vertex_count(&self) -> usize {
        self.vertices.len()
    }

    pub fn edge_count(&self) -> usize {
        self.edges.len()
    }

    pub fn is_empty(&self) -> bool {
        self.vertices.is_empty() && self.edges.is_empty()
    }

    pub fn vertex_name(&self, index: usize) -> &str {
        &self.vertices[index]
    }

    pub fn vertex_names(&self) -> &[String] {
        &self.vertices
    }

    pub fn vertex_index(&self, name: &str) -> Option<usize> {
        self.vertices.iter().position(|v| v == name)
    }

    pub fn edges(&self) -> &[Edge] {
        &self.edges
    }

    pub fn edge(&self, index: usize) -> Result<&Edge, GraphError> {
        self.edges
            .get(index)
            .ok_or(GraphError::EdgeIndexOutOfRange { index })
    }

    /// Sum of all edge spins (loops counted once: the sum is over edges).
    pub fn spin_sum(&self) -> u64 {
        self.edges.iter().map(|e| e.spin.get() as u64).sum()
    }

    /// The global prefactor `(-1)^(spin sum)` as `+1` or `-1`.
    pub fn global_sign(&self) -> i64 {
        if self.spin_sum().is_multiple_of(2) {
            1
        } else {
            -1
        }
    }

    /// Incident edge-ends of a vertex in canonical order (ascending edge
    /// index; a loop contributes its end 0 then its end 1).
    pub fn incident_ends(&self, v: usize) -> Vec<(usize, End)> {
        let mut ends = Vec::new();
        for (i, e) in self.edges.iter().enumerate() {
            if e.end0 == v {
                ends.push((i, End::Zero));
            }
            if e.end1 == v {
                ends.push((i, End::One));
            }
        }
        ends
    }

    /// Vertex degree; loops count twice.
    pub fn degree(&self, v: usize) -> usize {
        self.incident_ends(v).len()
    }

    /// Spins on the incident edge-ends of a vertex, canonical order.
    pub fn incident_spins(&self, v: usize) -> Vec<Spin> {
        self.incident_ends(v)
            .into_iter()
            .map(|(e, _)| self.edges[e].spin)
            .collect()
    }

    /// Vertex partition into connected components; components are sorted by
    /// their smallest vertex index and each lists its vertices in ascending
    /// order. Isolated vertices form singleton components.
    pub fn connected_components(&self) -> Vec<Vec<usize>> {
        let n = self.vertices.len();
        let mut comp = vec![usize::MAX; n];
        let mut components = Vec::new();
        for start in 0..n {
            if comp[start] != usize::MAX {
                continue;
            }
            let id = components.len();
            let mut stack = vec![start];
            let mut members = Vec::new();
            comp[start] = id;
            while let Some(v) = stack.pop() {
                members.push(v);
                for e in &self.edges {
                    if e.touches(v) {
                        let w = e.other_endpoint(v);
                        if comp[w] == usize::MAX {
                            comp[w] = id;
                            stack.push(w);
                        }
                    }
                }
            }
            members.sort_unstable();
            components.push(members);
        }
        components
    }
}

/// True if a multiset of spins can occur at an admissible vertex: even total
/// and polygon closure (each spin at most the sum of the others).
pub fn spins_admissible(spins: &[u32]) -> bool {
    let sum: u64 = spins.iter().map(|&s| s as u64).sum();
    if !sum.is_multiple_of(2) {
        return false;
    }
    spins.iter().all(|&s| 2 * s as u64 <= sum)
}

/// Why a particular vertex fails admissibility.
#[derive(Clone, PartialEq, Eq, Debug)]
pub enum AdmissibilityFailure {
    /// The incident spin sum is odd.
    OddParity { spin_sum: u64 },
    /// One incident spin exceeds the sum of the others.
    ClosureViolation { spin: u32, sum_of_others: u64 },
}

impl fmt::Display for AdmissibilityFailure {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            AdmissibilityFailure::OddParity { spin_sum } => {
                write!(f, "odd parity: incident spin sum {spin_sum}")
            }
            AdmissibilityFailure::ClosureViolation {
                spin,
                sum_of_others,
            } => write!(
                f,
                "closure violation: spin {spin} exceeds sum of others {sum_of_others}"
            ),
        }
    }
}

#[derive(Clone, PartialEq, Eq, Debug)]
pub struct VertexFailure {
    pub vertex: String,
    pub reasons: Vec<AdmissibilityFailure>,
}

#[derive(Clone, PartialEq, Eq, Debug)]
pub struct AdmissibilityReport {
    pub admissible: bool,
    pub failures: Vec<VertexFailure>,
}

/// Check every vertex for even parity and polygon closure. A loop counts as
/// two incidences of its spin, so monovalent vertices need spin 0 and
/// bivalent vertices need equal spins as corollaries.
pub fn check_admissibility(graph: &LabeledGraph) -> AdmissibilityReport {
    let mut failures = Vec::new();
    for v in 0..graph.vertex_count() {
        let spins: Vec<u32> = graph.incident_spins(v).iter().map(|s| s.get()).collect();
        let sum: u64 = spins.iter().map(|&s| s as u64).sum();
        let mut reasons = Vec::new();
        if !sum.is_multiple_of(2) {
            reasons.push(AdmissibilityFailure::OddParity { spin_sum: sum });
        }
        for &s in &spins {
            if 2 * s as u64 > sum {
                reasons.push(AdmissibilityFailure::ClosureViolation {
                    spin: s,
                    sum_of_others: sum - s as u64,
                });
            }
        }
        if !reasons.is_empty() {
            failures.push(VertexFailure {
                vertex: graph.vertex_name(v).to_owned(),
                reasons,
            });
        }
    }
    AdmissibilityReport {
        admissible: failures.is_empty(),
        failures,
    }
}
