//! Evaluation by tensor contraction of per-vertex invariant projectors.
//!
//! Every vertex carries the orthogonal projector onto the subspace of
//! ⊗ₖ V_{n_k} fixed by the simultaneous group action on all incident
//! edge-ends (conjugated action on ends flagged as dual). Gluing each edge's
//! two index pairs and contracting the whole network yields the same scalar
//! as averaging products of character weights over the group, but
//! deterministically: the projector *is* the group average of the product of
//! representation matrices.
//!
//! The projector is built numerically as the null space of the raising
//! operator restricted to the weight-zero subspace: a weight-zero vector
//! annihilated by the total raising operator generates a trivial
//! subrepresentation, so the null space of J₊ᵀJ₊ on weight zero is exactly
//! the invariant subspace. Working inside weight zero keeps the eigenproblem
//! tiny even when the full tensor is large.

mod tensor;

pub mod plan;

pub use plan::{plan_contraction, plan_from_merge_sequence, ContractionPlan, MergeStep, PlanError};

use crate::graph::{End, LabeledGraph, Spin};
use nalgebra::DMatrix;
use std::collections::HashMap;
use tensor::Tensor;
use thiserror::Error;

/// Default limit on dense tensor entries (per tensor, and per contraction
/// intermediate).
pub const DEFAULT_DIM_CAP: usize = 1_000_000;

/// Eigenvalues of J₊ᵀJ₊ below this are treated as exact zeros. The smallest
/// genuinely nonzero eigenvalue is 2 (a weight-zero vector inside a spin-2
/// component), so the gap is enormous.
const NULL_SPACE_THRESHOLD: f64 = 1e-9;

#[derive(Debug, Error, PartialEq, Eq)]
pub enum ProjectorError {
    #[error("vertex needs at least one incident edge-end")]
    EmptySpins,
    #[error("got {spins} spins but {flags} dual flags")]
    LengthMismatch { spins: usize, flags: usize },
    #[error("vertex tensor needs {required} entries, exceeding the cap of {cap}")]
    DimCapExceeded { required: u128, cap: usize },
}

#[derive(Debug, Error, PartialEq, Eq)]
pub enum ContractError {
    #[error(transparent)]
    Projector(#[from] ProjectorError),
    #[error("contraction needs an intermediate of {required} entries, exceeding the cap of {cap}")]
    CapExceeded { required: u128, cap: usize },
    #[error(transparent)]
    Plan(#[from] PlanError),
}

/// The invariant projector at one vertex, stored with one fused index pair
/// per edge-end: axis `k` has size `(n_k + 1)²` and fuses the operator's row
/// index `m` and column index `m′` on that end as `m · (n_k + 1) + m′`.
#[derive(Clone, Debug)]
pub struct VertexTensor {
    spins: Vec<Spin>,
    dual_flags: Vec<bool>,
    /// Vector-space dimension `n_k + 1` per end.
    leg_dims: Vec<usize>,
    tensor: Tensor,
    rank: usize,
}

impl VertexTensor {
    pub fn spins(&self) -> &[Spin] {
        &self.spins
    }

    pub fn dual_flags(&self) -> &[bool] {
        &self.dual_flags
    }

    /// Multiplicity of the trivial representation in the tensor product.
    pub fn rank(&self) -> usize {
        self.rank
    }

    /// Axis sizes of the stored tensor: `(n_k + 1)²` per end.
    pub fn dims(&self) -> &[usize] {
        self.tensor.dims()
    }

    /// Row-major entries in the fused-pair layout.
    pub fn entries(&self) -> &[f64] {
        self.tensor.data()
    }

    /// One operator entry: `rows[k]` and `cols[k]` index the row and column
    /// component on end `k`.
    pub fn entry(&self, rows: &[usize], cols: &[usize]) -> f64 {
        assert_eq!(rows.len(), self.leg_dims.len());
        assert_eq!(cols.len(), self.leg_dims.len());
        let mut linear = 0usize;
        for (k, &d) in self.leg_dims.iter().enumerate() {
            assert!(rows[k] < d && cols[k] < d, "component index out of range");
            linear = linear * d * d + rows[k] * d + cols[k];
        }
        self.tensor.data()[linear]
    }

    /// The projector as a dense square operator matrix of side
    /// `Π (n_k + 1)`, row-major. Intended for small cases in tests.
    pub fn operator_matrix(&self) -> (usize, Vec<f64>) {
        let w: usize = self.leg_dims.iter().product();
        let legs = self.leg_dims.len();
        let mut out = vec![0.0; w * w];
        let mut rows = vec![0usize; legs];
        let mut cols = vec![0usize; legs];
        for (i, slot) in out.iter_mut().enumerate() {
            let (mut a, mut b) = (i / w, i % w);
            for k in (0..legs).rev() {
                let d = self.leg_dims[k];
                rows[k] = a % d;
                cols[k] = b % d;
                a /= d;
                b /= d;
            }
            *slot = self.entry(&rows, &cols);
        }
        (w, out)
    }

    /// Trace as an operator; equals [`Self::rank`] up to float error.
    pub fn operator_trace(&self) -> f64 {
        let w: usize = self.leg_dims.iter().product();
        let legs = self.leg_dims.len();
        let mut digits = vec![0usize; legs];
        let mut total = 0.0;
        for mut a in 0..w {
            for k in (0..legs).rev() {
                digits[k] = a % self.leg_dims[k];
                a /= self.leg_dims[k];
            }
            total += self.entry(&digits, &digits);
        }
        total
    }

    fn into_tensor(self) -> Tensor {
        self.tensor
    }
}

/// Orthogonal projector onto the invariant subspace of the tensor product of
/// the listed representations, with the conjugated action on flagged ends.
/// Rank 0 (an all-zero tensor) is a valid outcome.
pub fn invariant_projector(
    spins: &[Spin],
    dual_flags: &[bool],
) -> Result<VertexTensor, ProjectorError> {
    invariant_projector_with_cap(spins, dual_flags, DEFAULT_DIM_CAP)
}

/// [`invariant_projector`] with an explicit entry-count cap.
pub fn invariant_projector_with_cap(
    spins: &[Spin],
    dual_flags: &[bool],
    cap: usize,
) -> Result<VertexTensor, ProjectorError> {
    if spins.len() != dual_flags.len() {
        return Err(ProjectorError::LengthMismatch {
            spins: spins.len(),
            flags: dual_flags.len(),
        });
    }
    if spins.is_empty() {
        return Err(ProjectorError::EmptySpins);
    }
    let leg_dims: Vec<usize> = spins.iter().map(|s| s.dimension() as usize).collect();
    let required = leg_dims
        .iter()
        .fold(1u128, |acc, &d| acc.saturating_mul((d * d) as u128));
    if required > cap as u128 {
        return Err(ProjectorError::DimCapExceeded { required, cap });
    }
    let w: usize = leg_dims.iter().product();
    let legs = leg_dims.len();

    // Signed weight of component i on leg k: 2i − n, negated on dual ends
    // (the conjugate action flips the weight grading).
    let leg_weight = |k: usize, i: usize| -> i64 {
        let n = spins[k].get() as i64;
        let bare = 2 * (i as i64) - n;
        if dual_flags[k] {
            -bare
        } else {
            bare
        }
    };

    // Enumerate the weight-0 and weight-+2 subspaces of the product basis.
    let mut digits = vec![0usize; legs];
    let mut zero_tuples: Vec<Vec<usize>> = Vec::new();
    let mut zero_linear: Vec<usize> = Vec::new();
    let mut plus_two_pos: HashMap<usize, usize> = HashMap::new();
    for linear in 0..w {
        let mut rem = linear;
        let mut weight = 0i64;
        for k in (0..legs).rev() {
            digits[k] = rem % leg_dims[k];
            rem /= leg_dims[k];
            weight += leg_weight(k, digits[k]);
        }
        if weight == 0 {
            zero_tuples.push(digits.clone());
            zero_linear.push(linear);
        } else if weight == 2 {
            let pos = plus_two_pos.len();
            plus_two_pos.insert(linear, pos);
        }
    }

    let mut out = VertexTensor {
        spins: spins.to_vec(),
        dual_flags: dual_flags.to_vec(),
        leg_dims: leg_dims.clone(),
        tensor: Tensor::zeros(leg_dims.iter().map(|&d| d * d).collect()),
        rank: 0,
    };
    if zero_tuples.is_empty() {
        return Ok(out); // odd total parity: no weight-0 states, no invariants
    }

    // Total raising operator from weight 0 to weight +2. On a plain end it
    // raises the component (coefficient √((n−i)(i+1))); on a dual end the
    // conjugate raising operator is minus the plain lowering operator.
    let mut vec_strides = vec![1usize; legs];
    for k in (0..legs.saturating_sub(1)).rev() {
        vec_strides[k] = vec_strides[k + 1] * leg_dims[k + 1];
    }
    let mut raising = DMatrix::<f64>::zeros(plus_two_pos.len(), zero_tuples.len());
    for (c, tuple) in zero_tuples.iter().enumerate() {
        let linear = zero_linear[c];
        for k in 0..legs {
            let n = spins[k].get() as usize;
            let i = tuple[k];
            let (target, coeff) = if !dual_flags[k] {
                if i >= n {
                    continue;
                }
                (
                    linear + vec_strides[k],
                    (((n - i) * (i + 1)) as f64).sqrt(),
                )
            } else {
                if i == 0 {
                    continue;
                }
                (
                    linear - vec_strides[k],
                    -((i * (n - i + 1)) as f64).sqrt(),
                )
            };
            let r = plus_two_pos[&target];
            raising[(r, c)] += coeff;
        }
    }

    // Null space of J₊ᵀJ₊ restricted to weight 0 = the invariant subspace.
    let gram = raising.tr_mul(&raising);
    let eigen = gram.symmetric_eigen();
    let null_columns: Vec<usize> = (0..zero_tuples.len())
        .filter(|&i| eigen.eigenvalues[i] < NULL_SPACE_THRESHOLD)
        .collect();
    out.rank = null_columns.len();

    // P = Σ v vᵀ over an orthonormal null basis, written into the fused
    // (row, column) pair layout. Only weight-0 × weight-0 entries are nonzero.
    let pair_strides = {
        let dims = out.tensor.dims().to_vec();
        let mut s = vec![1usize; legs];
        for k in (0..legs.saturating_sub(1)).rev() {
            s[k] = s[k + 1] * dims[k + 1];
        }
        s
    };
    for (a, ta) in zero_tuples.iter().enumerate() {
        for (b, tb) in zero_tuples.iter().enumerate() {
            let mut value = 0.0;
            for &col in &null_columns {
                let v = eigen.eigenvectors.column(col);
                value += v[a] * v[b];
            }
            if value != 0.0 {
                let mut linear = 0usize;
                for k in 0..legs {
                    linear += (ta[k] * leg_dims[k] + tb[k]) * pair_strides[k];
                }
                out.tensor.data_mut()[linear] = value;
            }
        }
    }
    Ok(out)
}

/// Vertex tensor with the two ends of every incident loop traced against
/// each other, plus the edge index carried by each remaining axis.
fn traced_vertex_tensor(
    graph: &LabeledGraph,
    vertex: usize,
    cap: usize,
) -> Result<(Tensor, Vec<usize>), ProjectorError> {
    let ends = graph.incident_ends(vertex);
    if ends.is_empty() {
        return Ok((Tensor::scalar(1.0), Vec::new()));
    }
    let spins: Vec<Spin> = ends.iter().map(|&(e, _)| graph.edges()[e].spin).collect();
    let flags: Vec<bool> = ends.iter().map(|&(_, end)| end == End::One).collect();
    let mut tensor = invariant_projector_with_cap(&spins, &flags, cap)?.into_tensor();
    let mut legs: Vec<usize> = ends.iter().map(|&(e, _)| e).collect();
    let mut i = 0;
    while i < legs.len() {
        if let Some(j) = (i + 1..legs.len()).find(|&j| legs[j] == legs[i]) {
            tensor = tensor.trace_pair(i, j);
            legs.remove(j);
            legs.remove(i);
        } else {
            i += 1;
        }
    }
    Ok((tensor, legs))
}

/// A loop's two ends share one vertex variable, so its integrand factor
/// Tr ρ_n(h h⁻¹) = n + 1 is a constant and the edge factors out of the
/// integral exactly as (−1)^n (n + 1). Splitting loops off before any tensor
/// work keeps their contribution float-exact and the vertex tensors small.
fn peel_loops(graph: &LabeledGraph) -> (f64, LabeledGraph) {
    if graph.edges().iter().all(|e| !e.is_loop()) {
        return (1.0, graph.clone());
    }
    let mut factor = 1.0;
    let mut peeled = LabeledGraph::new();
    for name in graph.vertex_names() {
        peeled.add_vertex(name).expect("names are unique");
    }
    for e in graph.edges() {
        if e.is_loop() {
            let dim = e.spin.dimension() as f64;
            factor *= if e.spin.get() % 2 == 0 { dim } else { -dim };
        } else {
            peeled
                .add_edge_indices(e.end0, e.end1, e.spin)
                .expect("endpoints are in range");
        }
    }
    (factor, peeled)
}

/// Evaluate the closed-graph invariant by full tensor contraction. Matches
/// the exact and Monte Carlo routes up to float error.
pub fn contract_evaluate(graph: &LabeledGraph) -> Result<f64, ContractError> {
    contract_evaluate_with_cap(graph, DEFAULT_DIM_CAP)
}

/// [`contract_evaluate`] with an explicit entry-count cap.
pub fn contract_evaluate_with_cap(graph: &LabeledGraph, cap: usize) -> Result<f64, ContractError> {
    let (loop_factor, peeled) = peel_loops(graph);
    let plan = plan_contraction(&peeled);
    Ok(loop_factor * contract_evaluate_with_plan(&peeled, &plan, cap)?)
}

/// Evaluate under a caller-supplied contraction order. The result is
/// independent of the order; only peak memory varies.
pub fn contract_evaluate_with_plan(
    graph: &LabeledGraph,
    plan: &ContractionPlan,
    cap: usize,
) -> Result<f64, ContractError> {
    if plan.max_intermediate > cap as u128 {
        return Err(ContractError::CapExceeded {
            required: plan.max_intermediate,
            cap,
        });
    }
    let mut nodes: HashMap<usize, (Tensor, Vec<usize>)> = HashMap::new();
    for v in 0..graph.vertex_count() {
        nodes.insert(v, traced_vertex_tensor(graph, v, cap)?);
    }
    for step in &plan.steps {
        let (lhs_t, lhs_legs) = nodes
            .remove(&step.lhs)
            .ok_or(PlanError::UnknownNode { id: step.lhs })?;
        let (rhs_t, rhs_legs) = nodes
            .remove(&step.rhs)
            .ok_or(PlanError::UnknownNode { id: step.rhs })?;
        let pairs: Vec<(usize, usize)> = lhs_legs
            .iter()
            .enumerate()
            .filter_map(|(ai, e)| rhs_legs.iter().position(|x| x == e).map(|bi| (ai, bi)))
            .collect();
        let merged = lhs_t.contract(&rhs_t, &pairs);
        let mut legs: Vec<usize> = lhs_legs
            .iter()
            .filter(|e| !rhs_legs.contains(e))
            .copied()
            .collect();
        legs.extend(rhs_legs.iter().filter(|e| !lhs_legs.contains(e)));
        nodes.insert(step.result, (merged, legs));
    }
    if nodes.values().any(|(_, legs)| !legs.is_empty()) {
        return Err(ContractError::Plan(PlanError::IncompleteMerge {
            remaining: nodes.len(),
        }));
    }
    let mut value = 1.0;
    for (_, (t, _)) in nodes {
        value *= t.into_scalar();
    }
    Ok(graph.global_sign() as f64 * value)
}
