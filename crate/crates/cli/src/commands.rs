//! Subcommand bodies. Each one reads its inputs, calls into the core crate,
//! and prints one report to stdout; [`dispatch`] is the single entry point.
//!
//! JSON output is byte-deterministic: object keys serialize in sorted order
//! and floats print in shortest round-trip form, so repeated runs (and runs
//! with different `--workers`) produce identical bytes.

use std::fmt::Write as _;
use std::fs;
use std::io::{self, BufWriter, Write};
use std::path::Path;

use serde_json::{json, Value};
use sha2::{Digest, Sha256};

use spinnet_core::exact::ExactValue;
use spinnet_core::geometry::{
    geometry_estimate, sample_geometries, GeometrySample, SampleOutcome, K5_EDGE_ORDER,
};
use spinnet_core::graph::{
    check_admissibility, expand_vertex, parse_graph, serialize_graph, simplify,
};
use spinnet_core::mc::{mc_evaluate, McEstimate, McParams};
use spinnet_core::projector::{contract_evaluate_with_cap, DEFAULT_DIM_CAP};
use spinnet_core::recoupling::{eval_relativistic_exact, EvalError};
use spinnet_core::{LabeledGraph, Spin};

use crate::{CliError, Command, Format, Method};

pub fn dispatch(command: Command) -> Result<(), CliError> {
    match command {
        Command::Check { file, format } => check(&file, format),
        Command::Simplify { file, format } => run_simplify(&file, format),
        Command::Eval {
            file,
            method,
            samples,
            seed,
            workers,
            format,
        } => eval(&file, method, samples, seed, workers, format),
        Command::Expand {
            file,
            vertex,
            split,
            format,
        } => expand(&file, &vertex, &split, format),
        Command::Geometry {
            spins,
            samples,
            seed,
            format,
        } => geometry(&spins, samples, seed, format),
    }
}

fn read_graph(path: &Path) -> Result<(LabeledGraph, String), CliError> {
    let text = fs::read_to_string(path)
        .map_err(|e| CliError::Input(format!("cannot read {}: {e}", path.display())))?;
    let graph = parse_graph(&text).map_err(|e| CliError::Input(e.to_string()))?;
    let digest = graph_digest(&graph);
    Ok((graph, digest))
}

/// Hex digest of the canonical serialization, so two input files that differ
/// only in formatting report the same graph identity.
fn graph_digest(graph: &LabeledGraph) -> String {
    let bytes = Sha256::digest(serialize_graph(graph).as_bytes());
    let mut hex = String::with_capacity(2 * bytes.len());
    for b in bytes {
        let _ = write!(hex, "{b:02x}");
    }
    hex
}

fn rational_value(v: &ExactValue) -> Value {
    json!({
        "den": v.denom().to_string(),
        "kind": "rational",
        "num": v.numer().to_string(),
    })
}

fn float_value(value: f64, stderr: f64, samples: u64, seed: u64) -> Value {
    json!({
        "kind": "float",
        "samples": samples,
        "seed": seed,
        "stderr": stderr,
        "value": value,
    })
}

fn check(path: &Path, format: Format) -> Result<(), CliError> {
    let (graph, digest) = read_graph(path)?;
    let report = check_admissibility(&graph);
    let status = if report.admissible {
        "admissible"
    } else {
        "inadmissible"
    };
    match format {
        Format::Json => {
            let failures: Vec<Value> = report
                .failures
                .iter()
                .map(|f| {
                    let reasons: Vec<String> =
                        f.reasons.iter().map(|r| r.to_string()).collect();
                    json!({"reasons": reasons, "vertex": f.vertex})
                })
                .collect();
            println!(
                "{}",
                json!({
                    "admissible": report.admissible,
                    "failures": failures,
                    "graph_digest": digest,
                    "status": status,
                })
            );
        }
        Format::Text => {
            println!("status  {status}");
            println!("digest  {digest}");
            for f in &report.failures {
                for reason in &f.reasons {
                    println!("vertex {}  {reason}", f.vertex);
                }
            }
        }
    }
    Ok(())
}

fn run_simplify(path: &Path, format: Format) -> Result<(), CliError> {
    let (graph, digest) = read_graph(path)?;
    let result = simplify(&graph);
    let simplified_digest = graph_digest(&result.graph);
    match format {
        Format::Json => println!(
            "{}",
            json!({
                "graph_digest": digest,
                "multiplier": rational_value(&result.multiplier),
                "simplified": serialize_graph(&result.graph),
                "simplified_digest": simplified_digest,
            })
        ),
        Format::Text => {
            println!("multiplier  {}", result.multiplier);
            println!("digest      {digest} -> {simplified_digest}");
            print!("{}", serialize_graph(&result.graph));
        }
    }
    Ok(())
}

enum EvalReport {
    Exact(ExactValue),
    Contract(f64),
    Mc(McEstimate),
}

fn eval(
    path: &Path,
    method: Option<Method>,
    samples: u64,
    seed: u64,
    workers: usize,
    format: Format,
) -> Result<(), CliError> {
    let (graph, digest) = read_graph(path)?;
    let report = match method {
        Some(Method::Exact) => EvalReport::Exact(
            eval_relativistic_exact(&graph).map_err(|e| CliError::Compute(e.to_string()))?,
        ),
        Some(Method::Contract) => EvalReport::Contract(run_contract(&graph)?),
        Some(Method::Mc) => EvalReport::Mc(run_mc(&graph, samples, seed, workers)?),
        // Default: try exact first; a blown step or term budget is the one
        // kind of failure the float route can rescue, so fall back (with a
        // notice) instead of giving up.
        None => match eval_relativistic_exact(&graph) {
            Ok(value) => EvalReport::Exact(value),
            Err(
                err @ (EvalError::StepBudgetExceeded { .. }
                | EvalError::TermBudgetExceeded { .. }),
            ) => {
                eprintln!("spinnet: notice: {err}; falling back to method contract");
                EvalReport::Contract(run_contract(&graph)?)
            }
            Err(err) => return Err(CliError::Compute(err.to_string())),
        },
    };
    match format {
        Format::Json => {
            let (method_name, value) = match &report {
                EvalReport::Exact(v) => ("exact", rational_value(v)),
                EvalReport::Contract(v) => ("contract", float_value(*v, 0.0, 0, 0)),
                EvalReport::Mc(est) => (
                    "mc",
                    float_value(est.mean, est.stderr, est.n_samples, est.seed),
                ),
            };
            println!(
                "{}",
                json!({
                    "graph_digest": digest,
                    "method": method_name,
                    "value": value,
                })
            );
        }
        Format::Text => {
            match &report {
                EvalReport::Exact(v) => {
                    println!("method  exact");
                    println!("digest  {digest}");
                    println!("value   {v}");
                }
                EvalReport::Contract(v) => {
                    println!("method  contract");
                    println!("digest  {digest}");
                    println!("value   {v}");
                }
                EvalReport::Mc(est) => {
                    println!("method  mc");
                    println!("digest  {digest}");
                    println!("value   {}", est.mean);
                    println!("stderr  {}", est.stderr);
                    println!("samples {}", est.n_samples);
                    println!("seed    {}", est.seed);
                }
            };
        }
    }
    Ok(())
}

fn run_contract(graph: &LabeledGraph) -> Result<f64, CliError> {
    contract_evaluate_with_cap(graph, dim_cap()?).map_err(|e| CliError::Compute(e.to_string()))
}

fn run_mc(
    graph: &LabeledGraph,
    samples: u64,
    seed: u64,
    workers: usize,
) -> Result<McEstimate, CliError> {
    let params = McParams {
        n_samples: samples,
        seed,
        workers,
        ..McParams::default()
    };
    // The only reachable failures are zero-valued --samples / --workers.
    mc_evaluate(graph, &params).map_err(|e| CliError::Usage(e.to_string()))
}

/// Entry cap for contraction tensors; `SPINNET_DIM_CAP` overrides the default.
fn dim_cap() -> Result<usize, CliError> {
    match std::env::var("SPINNET_DIM_CAP") {
        Ok(raw) => raw
            .trim()
            .parse()
            .ok()
            .filter(|&cap| cap > 0)
            .ok_or_else(|| {
                CliError::Usage(format!(
                    "SPINNET_DIM_CAP must be a positive integer, got `{raw}`"
                ))
            }),
        Err(std::env::VarError::NotPresent) => Ok(DEFAULT_DIM_CAP),
        Err(err) => Err(CliError::Usage(format!("SPINNET_DIM_CAP: {err}"))),
    }
}

fn expand(path: &Path, vertex: &str, split: &str, format: Format) -> Result<(), CliError> {
    let (graph, digest) = read_graph(path)?;
    let (group0, group1) = parse_split(split).ok_or_else(|| {
        CliError::Usage(format!(
            "--split must be two parenthesized groups of edge indices like \"(0,1)(2,3)\", got `{split}`"
        ))
    })?;
    let terms = expand_vertex(&graph, vertex, &group0, &group1)
        .map_err(|e| CliError::Input(e.to_string()))?;
    match format {
        Format::Json => {
            let terms: Vec<Value> = terms
                .iter()
                .map(|t| {
                    json!({
                        "coefficient": rational_value(&t.coefficient),
                        "graph": serialize_graph(&t.graph),
                    })
                })
                .collect();
            println!(
                "{}",
                json!({
                    "graph_digest": digest,
                    "split": split,
                    "terms": terms,
                    "vertex": vertex,
                })
            );
        }
        Format::Text => {
            println!("vertex  {vertex}");
            println!("split   {split}");
            println!("terms   {}", terms.len());
            for (i, term) in terms.iter().enumerate() {
                println!();
                println!("term {i}  coefficient {}", term.coefficient);
                print!("{}", serialize_graph(&term.graph));
            }
        }
    }
    Ok(())
}

/// Parse `"(a,b)(c,d,…)"` into the two index groups.
fn parse_split(spec: &str) -> Option<(Vec<usize>, Vec<usize>)> {
    let inner = spec.strip_prefix('(')?.strip_suffix(')')?;
    let mut groups = inner.split(")(");
    let group0 = parse_group(groups.next()?)?;
    let group1 = parse_group(groups.next()?)?;
    if groups.next().is_some() {
        return None;
    }
    Some((group0, group1))
}

fn parse_group(text: &str) -> Option<Vec<usize>> {
    text.split(',').map(|t| t.trim().parse().ok()).collect()
}

fn geometry(raw_spins: &[u32], samples: u64, seed: u64, format: Format) -> Result<(), CliError> {
    if raw_spins.len() != 10 {
        return Err(CliError::Usage(format!(
            "--spins needs exactly 10 comma-separated values in edge order 01,02,03,04,12,13,14,23,24,34, got {}",
            raw_spins.len()
        )));
    }
    let mut spins = [Spin::new(0).expect("0 is a valid spin"); 10];
    for (slot, &raw) in spins.iter_mut().zip(raw_spins) {
        *slot = Spin::new(raw).map_err(|e| CliError::Usage(e.to_string()))?;
    }
    let stream =
        sample_geometries(spins, samples, seed).map_err(|e| CliError::Usage(e.to_string()))?;
    let stdout = io::stdout();
    let mut out = BufWriter::new(stdout.lock());
    let mut simplex = 0u64;
    let mut non_simplex = 0u64;
    let mut degenerate = 0u64;
    for sample in stream {
        match sample.outcome {
            SampleOutcome::Simplex(_) => simplex += 1,
            SampleOutcome::NonSimplex => non_simplex += 1,
            SampleOutcome::Degenerate => degenerate += 1,
        }
        match format {
            Format::Json => emit(&mut out, format_args!("{}", sample_record(&sample)))?,
            Format::Text => emit(
                &mut out,
                format_args!(
                    "{:>8}  {:<11}  {}",
                    sample.index,
                    sample.outcome.label(),
                    sample.integrand
                ),
            )?,
        }
    }
    // Replays the same sample stream; cheap next to the record pass above and
    // guarantees the summary matches the multi-worker estimator bit for bit.
    let estimate =
        geometry_estimate(spins, samples, seed, 1).map_err(|e| CliError::Usage(e.to_string()))?;
    match format {
        Format::Json => emit(
            &mut out,
            format_args!(
                "{}",
                json!({
                    "counts": {
                        "degenerate": degenerate,
                        "non-simplex": non_simplex,
                        "simplex": simplex,
                    },
                    "mean": estimate.mean,
                    "samples": estimate.n_samples,
                    "seed": estimate.seed,
                    "stderr": estimate.stderr,
                    "summary": true,
                })
            ),
        )?,
        Format::Text => emit(
            &mut out,
            format_args!(
                "summary  mean {}  stderr {}  simplex {simplex}  non-simplex {non_simplex}  degenerate {degenerate}",
                estimate.mean, estimate.stderr
            ),
        )?,
    }
    out.flush()
        .map_err(|e| CliError::Compute(format!("stdout: {e}")))
}

fn emit(out: &mut impl Write, line: std::fmt::Arguments<'_>) -> Result<(), CliError> {
    writeln!(out, "{line}").map_err(|e| CliError::Compute(format!("stdout: {e}")))
}

fn sample_record(sample: &GeometrySample) -> Value {
    let mut record = json!({
        "index": sample.index,
        "integrand": sample.integrand,
        "outcome": sample.outcome.label(),
    });
    if let SampleOutcome::Simplex(geometry) = &sample.outcome {
        let fields = record.as_object_mut().expect("record is an object");
        let angles: Vec<f64> = K5_EDGE_ORDER
            .iter()
            .map(|&(i, j)| geometry.angle(i, j).radians())
            .collect();
        let normals: Vec<Vec<f64>> = geometry
            .normals()
            .iter()
            .map(|n| n.components().to_vec())
            .collect();
        fields.insert("angles".into(), json!(angles));
        fields.insert("normals".into(), json!(normals));
        fields.insert("weights".into(), json!(geometry.weights().to_vec()));
    }
    record
}
