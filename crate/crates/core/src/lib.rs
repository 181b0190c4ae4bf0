//! Evaluation of relativistic spin networks.
//!
//! A spin network here is a finite undirected multigraph (loops allowed) whose
//! edges carry non-negative integer spins `n` (twice the usual half-integer
//! label, so `n = 2j`). The central quantity is the relativistic evaluation
//!
//! ```text
//! I(G) = (-1)^(sum of edge spins) * integral over SU(2)^V of
//!        prod over edges e of Tr rho_n(e) ( h(end0) * h(end1)^-1 )  dh
//! ```
//!
//! with one normalized Haar integration variable per vertex. This crate
//! computes `I` three independent ways and keeps them honest against each
//! other:
//!
//! * [`recoupling`] — exact rational evaluation via chromatic (recoupling)
//!   calculus: theta and tetrahedral coefficients in closed form, plus a
//!   reduction engine for closed trivalent networks.
//! * [`projector`] — floating-point evaluation by contracting one invariant
//!   projector tensor per vertex over the edges, with a greedy contraction
//!   planner.
//! * [`mc`] — seeded, reproducible Monte Carlo estimation of the group
//!   integral, with batch statistics and convergence diagnostics.
//!
//! [`graph`] supplies the graph model, a small text format, admissibility
//! checking and the exact rewrite moves (loop/spin-zero elimination, parallel
//! edge fusion, vertex expansion, edge contraction). [`su2`] holds the group
//! arithmetic (unit quaternions, Haar sampling, characters). [`geometry`]
//! reconstructs the 4-simplex described by a choice of ten edge spins and a
//! sample of group variables, following the geometric interpretation of the
//! integrand.

pub mod exact;
pub mod geometry;
pub mod graph;
pub mod mc;
pub mod projector;
pub mod recoupling;
pub mod su2;

pub use exact::ExactValue;
pub use graph::{LabeledGraph, Spin};
