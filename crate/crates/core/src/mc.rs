//! Monte Carlo estimation of the invariant over SU(2)^V.
//!
//! Sampling is organized in fixed-size chunks. Chunk `i` draws from an
//! independent ChaCha substream selected by `(seed, i)`, and chunk partial
//! sums are reduced in chunk-index order, so the estimate is bit-identical
//! for any worker count. Chunks double as batches for convergence
//! diagnostics.

use crate::graph::LabeledGraph;
use crate::su2::{edge_weight, haar_sample, GroupElement};
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use thiserror::Error;

/// Sampling parameters. `chunk_size` is part of the reproducibility
/// contract: changing it changes the stream layout and therefore the
/// estimate, while `workers` never does.
#[derive(Clone, Debug)]
pub struct McParams {
    pub n_samples: u64,
    pub seed: u64,
    pub workers: usize,
    pub chunk_size: u64,
    /// Fix the first vertex of every connected component to the identity
    /// (justified by left-invariance of the Haar measure; reduces variance).
    pub gauge_fix: bool,
}

impl Default for McParams {
    fn default() -> Self {
        McParams {
            n_samples: 100_000,
            seed: 0,
            workers: 1,
            chunk_size: 4096,
            gauge_fix: true,
        }
    }
}

/// A Monte Carlo estimate of the invariant.
#[derive(Clone, Debug, PartialEq)]
pub struct McEstimate {
    pub mean: f64,
    pub stderr: f64,
    pub n_samples: u64,
    pub seed: u64,
    /// Size of the full chunks that `batch_means` refers to (the final batch
    /// may be shorter).
    pub chunk_size: u64,
    pub batch_means: Vec<f64>,
}

impl McEstimate {
    /// Number of samples in batch `i`.
    pub fn batch_len(&self, i: usize) -> u64 {
        let start = i as u64 * self.chunk_size;
        self.chunk_size.min(self.n_samples - start)
    }
}

#[derive(Error, Debug, Clone, PartialEq, Eq)]
pub enum McError {
    #[error("n_samples must be at least 1")]
    ZeroSamples,
    #[error("chunk_size must be at least 1")]
    ZeroChunkSize,
    #[error("workers must be at least 1")]
    ZeroWorkers,
    #[error("convergence report needs at least 2 batches, got {batches}")]
    TooFewBatches { batches: usize },
}

/// The sampled integrand: the product of signed edge weights for one
/// assignment of group variables to vertices. Its Haar average over the
/// vertex variables is the invariant (the per-edge signs multiply to the
/// global parity prefactor).
///
/// Panics if `assignment.len()` differs from the vertex count.
pub fn integrand(graph: &LabeledGraph, assignment: &[GroupElement]) -> f64 {
    assert_eq!(
        assignment.len(),
        graph.vertex_count(),
        "one group element per vertex"
    );
    graph
        .edges()
        .iter()
        .map(|e| edge_weight(e.spin, assignment[e.end0], assignment[e.end1]))
        .product()
}

/// Which vertices draw fresh variables (the rest stay at the identity).
fn drawn_vertices(graph: &LabeledGraph, gauge_fix: bool) -> Vec<bool> {
    let mut draw = vec![true; graph.vertex_count()];
    if gauge_fix {
        for component in graph.connected_components() {
            draw[component[0]] = false;
        }
    }
    draw
}

struct ChunkStat {
    sum: f64,
    sum_sq: f64,
    len: u64,
}

fn run_chunk(
    graph: &LabeledGraph,
    draw: &[bool],
    bound: f64,
    seed: u64,
    chunk_index: u64,
    len: u64,
) -> ChunkStat {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(chunk_index);
    let mut hs = vec![GroupElement::IDENTITY; graph.vertex_count()];
    let (mut sum, mut sum_sq) = (0.0, 0.0);
    for _ in 0..len {
        for (h, &fresh) in hs.iter_mut().zip(draw) {
            *h = if fresh {
                haar_sample(&mut rng)
            } else {
                GroupElement::IDENTITY
            };
        }
        let value = integrand(graph, &hs);
        debug_assert!(
            value.abs() <= bound * (1.0 + 1e-9),
            "integrand {value} exceeds bound {bound}"
        );
        sum += value;
        sum_sq += value * value;
    }
    ChunkStat {
        sum,
        sum_sq,
        len,
    }
}

/// Estimate the invariant by direct Haar-measure sampling. Deterministic in
/// `(graph, n_samples, seed, chunk_size, gauge_fix)`; the worker count only
/// sets the degree of parallelism.
pub fn mc_evaluate(graph: &LabeledGraph, params: &McParams) -> Result<McEstimate, McError> {
    if params.n_samples == 0 {
        return Err(McError::ZeroSamples);
    }
    if params.chunk_size == 0 {
        return Err(McError::ZeroChunkSize);
    }
    if params.workers == 0 {
        return Err(McError::ZeroWorkers);
    }
    let draw = drawn_vertices(graph, params.gauge_fix);
    let bound: f64 = graph
        .edges()
        .iter()
        .map(|e| e.spin.dimension() as f64)
        .product();
    let n = params.n_samples;
    let chunk = params.chunk_size;
    let n_chunks = n.div_ceil(chunk);
    let chunk_len = |i: u64| chunk.min(n - i * chunk);

    let stats: Vec<ChunkStat> = if params.workers == 1 {
        (0..n_chunks)
            .map(|i| run_chunk(graph, &draw, bound, params.seed, i, chunk_len(i)))
            .collect()
    } else {
        let pool = rayon::ThreadPoolBuilder::new()
            .num_threads(params.workers)
            .build()
            .expect("thread pool construction");
        pool.install(|| {
            (0..n_chunks)
                .into_par_iter()
                .map(|i| run_chunk(graph, &draw, bound, params.seed, i, chunk_len(i)))
                .collect()
        })
    };

    // Reduce strictly in chunk order so the float sums are worker-independent.
    let (mut total, mut total_sq) = (0.0, 0.0);
    let mut batch_means = Vec::with_capacity(stats.len());
    for s in &stats {
        total += s.sum;
        total_sq += s.sum_sq;
        batch_means.push(s.sum / s.len as f64);
    }
    let nf = n as f64;
    let mean = total / nf;
    let stderr = if n >= 2 {
        let var_pop = (total_sq / nf - mean * mean).max(0.0);
        (var_pop * nf / (nf - 1.0) / nf).sqrt()
    } else {
        0.0
    };
    Ok(McEstimate {
        mean,
        stderr,
        n_samples: n,
        seed: params.seed,
        chunk_size: chunk,
        batch_means,
    })
}

/// Convergence diagnostics over the batch (chunk) means.
#[derive(Clone, Debug, PartialEq)]
pub struct ConvergenceReport {
    /// Running weighted mean after each batch.
    pub running_means: Vec<f64>,
    /// Unbiased variance of the batch means.
    pub batch_variance: f64,
    /// True when every batch mean is identical and stderr is zero: the
    /// integrand is a constant, so the estimate is exact.
    pub exact_integrand: bool,
    /// True when the mean over the last quarter of batches deviates from the
    /// global mean by more than 5 standard errors.
    pub nonstationary: bool,
    /// Additional samples suggested to bring stderr under 1% of |mean|
    /// (0 when already satisfied or not applicable).
    pub suggested_additional_samples: u64,
}

pub fn convergence_report(estimate: &McEstimate) -> Result<ConvergenceReport, McError> {
    let batches = estimate.batch_means.len();
    if batches < 2 {
        return Err(McError::TooFewBatches { batches });
    }

    let mut running_means = Vec::with_capacity(batches);
    let (mut weight, mut acc) = (0.0, 0.0);
    for (i, &m) in estimate.batch_means.iter().enumerate() {
        let len = estimate.batch_len(i) as f64;
        acc += m * len;
        weight += len;
        running_means.push(acc / weight);
    }

    let bf = batches as f64;
    let batch_mean_avg: f64 = estimate.batch_means.iter().sum::<f64>() / bf;
    let batch_variance = estimate
        .batch_means
        .iter()
        .map(|m| (m - batch_mean_avg).powi(2))
        .sum::<f64>()
        / (bf - 1.0);

    let exact_integrand = estimate.stderr == 0.0 && batch_variance == 0.0;

    let tail = batches.div_ceil(4);
    let tail_slice = &estimate.batch_means[batches - tail..];
    let tail_mean: f64 = tail_slice.iter().sum::<f64>() / tail_slice.len() as f64;
    let nonstationary =
        estimate.stderr > 0.0 && (tail_mean - estimate.mean).abs() > 5.0 * estimate.stderr;

    let suggested_additional_samples = if estimate.stderr == 0.0 || estimate.mean == 0.0 {
        0
    } else {
        let target = 0.01 * estimate.mean.abs();
        if estimate.stderr <= target {
            0
        } else {
            let needed = estimate.n_samples as f64 * (estimate.stderr / target).powi(2);
            (needed.ceil() as u64).saturating_sub(estimate.n_samples)
        }
    };

    Ok(ConvergenceReport {
        running_means,
        batch_variance,
        exact_integrand,
        nonstationary,
        suggested_additional_samples,
    })
}
