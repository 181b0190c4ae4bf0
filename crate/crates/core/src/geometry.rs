//! Geometry of Monte Carlo samples on the complete graph K5.
//!
//! Five group elements, read as unit vectors of R⁴, are generically the
//! outward facet normals of a 4-simplex, determined up to translation and an
//! overall scale. The scale-fixed shape data is the pair (facet weights,
//! pairwise normal angles): by Minkowski's theorem the facet 3-volumes are
//! the unique positive combination of the normals summing to zero, and we
//! normalize them to total 1. [`reconstruct_simplex`] recovers that data from
//! the normals alone; [`sample_geometries`] streams it for Haar samples on K5
//! next to the signed integrand, so the integrand can be studied as a
//! function of simplex shape.
//!
//! The angles reported are the angles φ between the normal *vectors*. Under
//! the outward-normal convention the interior dihedral angle along the
//! triangle shared by two facets has cosine −cos φ; we keep φ itself because
//! the edge weights are functions of φ.
//!
//! Sampling follows the same chunked-substream policy as [`crate::mc`]: the
//! sample sequence is a pure function of `(spins, n_samples, seed)`, chunks
//! are independent RNG streams, and the reduction runs in chunk order, so
//! results are identical for any worker count. No gauge fixing is applied —
//! every vertex draws a fresh variable, since the reconstructed geometry
//! depends on all five normals.

use crate::graph::Spin;
use crate::mc::McEstimate;
use crate::su2::{edge_weight, haar_sample, Angle, GroupElement};
use nalgebra::{Matrix4, Vector4};
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use std::ops::Neg;
use thiserror::Error;

/// Number of samples per RNG substream; equal to the montecarlo default so
/// the two samplers share one determinism story.
pub const SAMPLE_CHUNK_SIZE: u64 = 4096;

/// A null vector shorter than this (for unit-length normals) signals rank
/// deficiency rather than a usable simplex.
const DEGENERACY_THRESHOLD: f64 = 1e-10;

/// The unordered vertex pairs of K5 in the order the ten spins are indexed:
/// lexicographic, `(0,1), (0,2), ..., (3,4)`.
pub const K5_EDGE_ORDER: [(usize, usize); 10] = [
    (0, 1),
    (0, 2),
    (0, 3),
    (0, 4),
    (1, 2),
    (1, 3),
    (1, 4),
    (2, 3),
    (2, 4),
    (3, 4),
];

#[derive(Error, Debug, Clone, PartialEq)]
pub enum GeometryError {
    #[error("angle matrix needs at least 2 elements, got {got}")]
    TooFewElements { got: usize },
    #[error("n_samples must be at least 1")]
    ZeroSamples,
    #[error("workers must be at least 1")]
    ZeroWorkers,
    #[error("cannot normalize a near-zero vector (norm {norm:e})")]
    NotNormalizable { norm: f64 },
}

/// Why a set of five normals fails to bound a simplex. Both cases are
/// ordinary reported outcomes during sampling, not failures of the sampler.
#[derive(Error, Debug, Clone, Copy, PartialEq, Eq)]
pub enum ReconstructError {
    /// The normals span less than all of R⁴, or some facet could only close
    /// up with zero volume (a dependent 4-subset of normals, e.g. two
    /// coincide). Measure zero under Haar sampling.
    #[error("degenerate normals: no full-rank closure with nonzero facets")]
    Degenerate,
    /// The unique-up-to-scale closing combination has mixed signs, so no
    /// closed simplex has these outward normals. Occurs with positive
    /// probability for random normals.
    #[error("mixed-sign closing weights: normals bound no simplex")]
    NonSimplex,
}

/// A unit vector in R⁴, normalized on construction to within 1e-12.
#[derive(Clone, Copy, PartialEq, Debug)]
pub struct UnitVector4([f64; 4]);

impl UnitVector4 {
    /// Normalize the given components onto the unit sphere.
    pub fn new(components: [f64; 4]) -> Result<Self, GeometryError> {
        let norm = components.iter().map(|c| c * c).sum::<f64>().sqrt();
        if norm <= 1e-9 || !norm.is_finite() {
            return Err(GeometryError::NotNormalizable { norm });
        }
        Ok(UnitVector4(components.map(|c| c / norm)))
    }

    pub fn components(self) -> [f64; 4] {
        self.0
    }

    pub fn dot(self, other: Self) -> f64 {
        self.0.iter().zip(&other.0).map(|(a, b)| a * b).sum()
    }

    /// The angle between the two vectors, as data on its cosine.
    pub fn angle_to(self, other: Self) -> Angle {
        Angle::from_cos(self.dot(other))
    }
}

impl Neg for UnitVector4 {
    type Output = UnitVector4;

    fn neg(self) -> Self {
        UnitVector4(self.0.map(|c| -c))
    }
}

/// A group element as a point of S³: the `(w, x, y, z)` components verbatim.
pub fn to_unit_vector(h: GroupElement) -> UnitVector4 {
    UnitVector4(h.components())
}

/// All pairwise angles among a set of group elements: symmetric, with an
/// exactly-zero diagonal. For five elements the ten upper-triangle entries
/// are the dihedral data of the sampled simplex.
pub fn angle_matrix(hs: &[GroupElement]) -> Result<Vec<Vec<Angle>>, GeometryError> {
    if hs.len() < 2 {
        return Err(GeometryError::TooFewElements { got: hs.len() });
    }
    let vs: Vec<UnitVector4> = hs.iter().map(|&h| to_unit_vector(h)).collect();
    Ok(pairwise_angles(&vs))
}

fn pairwise_angles(vs: &[UnitVector4]) -> Vec<Vec<Angle>> {
    let n = vs.len();
    let mut rows = vec![vec![Angle::ZERO; n]; n];
    for i in 0..n {
        for j in 0..n {
            if i != j {
                rows[i][j] = vs[i].angle_to(vs[j]);
            }
        }
    }
    rows
}

/// The scale-fixed shape of a 4-simplex: outward unit facet normals, facet
/// weights (relative 3-volumes, positive and summing to 1), and the pairwise
/// angles between normals.
#[derive(Clone, Debug, PartialEq)]
pub struct SimplexGeometry {
    normals: [UnitVector4; 5],
    weights: [f64; 5],
    angles: [[Angle; 5]; 5],
}

impl SimplexGeometry {
    pub fn normals(&self) -> &[UnitVector4; 5] {
        &self.normals
    }

    /// Positive, summing to 1; proportional to the facet 3-volumes.
    pub fn weights(&self) -> &[f64; 5] {
        &self.weights
    }

    /// Symmetric with zero diagonal.
    pub fn angles(&self) -> &[[Angle; 5]; 5] {
        &self.angles
    }

    pub fn angle(&self, i: usize, j: usize) -> Angle {
        self.angles[i][j]
    }

    pub fn weight(&self, i: usize) -> f64 {
        self.weights[i]
    }
}

/// Recover the simplex shape from its five outward unit facet normals.
///
/// The closing weights span the null space of the 4×5 matrix whose columns
/// are the normals. That null vector is computed in closed form by cofactor
/// expansion: its `i`-th entry is `(-1)^i` times the determinant of the
/// matrix with column `i` deleted, which is nonzero precisely when the
/// *other four* normals are linearly independent. An all-zero vector means
/// rank < 4; a zero entry means the matching facet could only close with
/// zero volume (two equal normals zero out three entries this way) — both
/// are degeneracies. A simplex exists iff the entries all share one sign;
/// they are then taken positive and normalized to sum to 1.
pub fn reconstruct_simplex(
    normals: &[UnitVector4; 5],
) -> Result<SimplexGeometry, ReconstructError> {
    let columns: Vec<Vector4<f64>> = normals
        .iter()
        .map(|n| Vector4::from(n.components()))
        .collect();
    let mut closing = [0.0f64; 5];
    for (i, slot) in closing.iter_mut().enumerate() {
        let minor: Vec<Vector4<f64>> = (0..5).filter(|&j| j != i).map(|j| columns[j]).collect();
        let det = Matrix4::from_columns(&minor).determinant();
        *slot = if i % 2 == 0 { det } else { -det };
    }

    let max_abs = closing.iter().fold(0.0f64, |m, c| m.max(c.abs()));
    if max_abs <= DEGENERACY_THRESHOLD
        || closing
            .iter()
            .any(|c| c.abs() <= max_abs * DEGENERACY_THRESHOLD)
    {
        return Err(ReconstructError::Degenerate);
    }
    // Pick the representative whose largest-magnitude entry is positive,
    // then insist every entry is.
    let pivot = closing
        .iter()
        .fold(0.0f64, |best, &c| if c.abs() > best.abs() { c } else { best });
    if pivot < 0.0 {
        for c in &mut closing {
            *c = -*c;
        }
    }
    if closing.iter().any(|&c| c <= 0.0) {
        return Err(ReconstructError::NonSimplex);
    }

    let total: f64 = closing.iter().sum();
    let weights = closing.map(|c| c / total);
    debug_assert!(
        {
            let mut resultant = [0.0f64; 4];
            for (w, n) in weights.iter().zip(normals) {
                for (r, c) in resultant.iter_mut().zip(n.components()) {
                    *r += w * c;
                }
            }
            resultant.iter().all(|r| r.abs() < 1e-9)
        },
        "weighted normals must close up"
    );

    let rows = pairwise_angles(normals);
    let mut angles = [[Angle::ZERO; 5]; 5];
    for (dst, src) in angles.iter_mut().zip(&rows) {
        dst.copy_from_slice(src);
    }

    Ok(SimplexGeometry {
        normals: *normals,
        weights,
        angles,
    })
}

/// What the five normals of one sample turned out to bound.
#[derive(Clone, Debug, PartialEq)]
// The simplex variant is ~50 floats wide; keeping it inline spares a heap
// allocation per sample in the hot sampling loop.
#[allow(clippy::large_enum_variant)]
pub enum SampleOutcome {
    /// A genuine 4-simplex, with its reconstructed shape.
    Simplex(SimplexGeometry),
    /// Normals of deficient rank (measure zero).
    Degenerate,
    /// Full-rank normals whose closing weights have mixed signs.
    NonSimplex,
}

impl SampleOutcome {
    pub fn is_simplex(&self) -> bool {
        matches!(self, SampleOutcome::Simplex(_))
    }

    /// Stable lowercase tag for reports.
    pub fn label(&self) -> &'static str {
        match self {
            SampleOutcome::Simplex(_) => "simplex",
            SampleOutcome::Degenerate => "degenerate",
            SampleOutcome::NonSimplex => "non-simplex",
        }
    }
}

/// One Haar sample on K5: the drawn normals, what they bound, and the signed
/// integrand value whose mean over samples is the invariant.
#[derive(Clone, Debug, PartialEq)]
pub struct GeometrySample {
    pub index: u64,
    pub normals: [UnitVector4; 5],
    pub outcome: SampleOutcome,
    pub integrand: f64,
}

/// Sequential iterator over geometry samples; see [`sample_geometries`].
pub struct GeometryStream {
    spins: [Spin; 10],
    n_samples: u64,
    seed: u64,
    index: u64,
    rng: ChaCha8Rng,
}

impl Iterator for GeometryStream {
    type Item = GeometrySample;

    fn next(&mut self) -> Option<GeometrySample> {
        if self.index >= self.n_samples {
            return None;
        }
        if self.index.is_multiple_of(SAMPLE_CHUNK_SIZE) {
            self.rng = ChaCha8Rng::seed_from_u64(self.seed);
            self.rng.set_stream(self.index / SAMPLE_CHUNK_SIZE);
        }
        let (hs, integrand) = draw_k5_sample(&self.spins, &mut self.rng);
        let normals = hs.map(to_unit_vector);
        let outcome = match reconstruct_simplex(&normals) {
            Ok(geometry) => SampleOutcome::Simplex(geometry),
            Err(ReconstructError::Degenerate) => SampleOutcome::Degenerate,
            Err(ReconstructError::NonSimplex) => SampleOutcome::NonSimplex,
        };
        let sample = GeometrySample {
            index: self.index,
            normals,
            outcome,
            integrand,
        };
        self.index += 1;
        Some(sample)
    }

    fn size_hint(&self) -> (usize, Option<usize>) {
        let left = (self.n_samples - self.index) as usize;
        (left, Some(left))
    }
}

impl ExactSizeIterator for GeometryStream {}

/// Draw five fresh vertex variables (in vertex order) and fold the ten signed
/// edge weights in `K5_EDGE_ORDER`. This is exactly the montecarlo integrand
/// for a K5 graph built in that edge order with no gauge fixing, down to the
/// floating-point operation sequence.
fn draw_k5_sample(spins: &[Spin; 10], rng: &mut ChaCha8Rng) -> ([GroupElement; 5], f64) {
    let mut hs = [GroupElement::IDENTITY; 5];
    for h in &mut hs {
        *h = haar_sample(rng);
    }
    let mut integrand = 1.0;
    for (&n, &(u, w)) in spins.iter().zip(&K5_EDGE_ORDER) {
        integrand *= edge_weight(n, hs[u], hs[w]);
    }
    (hs, integrand)
}

/// Stream geometry samples for K5 with the given ten edge spins (indexed by
/// `K5_EDGE_ORDER`). The sequence is a pure function of `(spins, n_samples,
/// seed)`; its integrand mean estimates the same invariant as montecarlo
/// evaluation of the K5 graph.
pub fn sample_geometries(
    spins: [Spin; 10],
    n_samples: u64,
    seed: u64,
) -> Result<GeometryStream, GeometryError> {
    if n_samples == 0 {
        return Err(GeometryError::ZeroSamples);
    }
    Ok(GeometryStream {
        spins,
        n_samples,
        seed,
        index: 0,
        rng: ChaCha8Rng::seed_from_u64(seed),
    })
}

/// Mean and standard error of the integrand over the same sample sequence as
/// [`sample_geometries`], reduced in chunk order so the result is identical
/// for every worker count.
pub fn geometry_estimate(
    spins: [Spin; 10],
    n_samples: u64,
    seed: u64,
    workers: usize,
) -> Result<McEstimate, GeometryError> {
    if n_samples == 0 {
        return Err(GeometryError::ZeroSamples);
    }
    if workers == 0 {
        return Err(GeometryError::ZeroWorkers);
    }
    let n_chunks = n_samples.div_ceil(SAMPLE_CHUNK_SIZE);
    let chunk_len = |i: u64| SAMPLE_CHUNK_SIZE.min(n_samples - i * SAMPLE_CHUNK_SIZE);
    let run = |i: u64| -> (f64, f64, u64) {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        rng.set_stream(i);
        let (mut sum, mut sum_sq) = (0.0, 0.0);
        let len = chunk_len(i);
        for _ in 0..len {
            let (_, value) = draw_k5_sample(&spins, &mut rng);
            sum += value;
            sum_sq += value * value;
        }
        (sum, sum_sq, len)
    };

    let stats: Vec<(f64, f64, u64)> = if workers == 1 {
        (0..n_chunks).map(run).collect()
    } else {
        let pool = rayon::ThreadPoolBuilder::new()
            .num_threads(workers)
            .build()
            .expect("thread pool construction");
        pool.install(|| (0..n_chunks).into_par_iter().map(run).collect())
    };

    let (mut total, mut total_sq) = (0.0, 0.0);
    let mut batch_means = Vec::with_capacity(stats.len());
    for &(sum, sum_sq, len) in &stats {
        total += sum;
        total_sq += sum_sq;
        batch_means.push(sum / len as f64);
    }
    let nf = n_samples as f64;
    let mean = total / nf;
    let stderr = if n_samples >= 2 {
        let var_pop = (total_sq / nf - mean * mean).max(0.0);
        (var_pop * nf / (nf - 1.0) / nf).sqrt()
    } else {
        0.0
    };
    Ok(McEstimate {
        mean,
        stderr,
        n_samples,
        seed,
        chunk_size: SAMPLE_CHUNK_SIZE,
        batch_means,
    })
}
