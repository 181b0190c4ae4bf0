//! `spinnet`: parse spin-labelled graph files, check admissibility, apply
//! exact rewrites, evaluate the closed-graph invariant by any of the three
//! routes, and stream sampled 4-simplex geometries.
//!
//! Output goes to stdout as JSON (default) or aligned text; every error puts
//! one machine-readable line on stderr. Exit codes: 0 success, 1 usage
//! error, 2 input or parse error, 3 computation error.

mod commands;

use std::path::PathBuf;

use clap::error::ErrorKind;
use clap::{Parser, Subcommand, ValueEnum};

#[derive(Parser)]
#[command(
    name = "spinnet",
    version,
    about = "Evaluate relativistic spin networks and sample their geometries"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Report vertex-by-vertex admissibility of a graph file.
    Check {
        file: PathBuf,
        #[arg(long, value_enum, default_value_t)]
        format: Format,
    },
    /// Apply exact value-preserving rewrites; print the reduced graph and
    /// the exact multiplier they peeled off.
    Simplify {
        file: PathBuf,
        #[arg(long, value_enum, default_value_t)]
        format: Format,
    },
    /// Evaluate the invariant of a closed graph.
    Eval {
        file: PathBuf,
        /// Evaluation route. When omitted, the exact route runs first and
        /// falls back to `contract` (with a notice on stderr) if it exceeds
        /// its step or term budget.
        #[arg(long, value_enum)]
        method: Option<Method>,
        /// Monte Carlo sample count (mc only).
        #[arg(long, default_value_t = 1_000_000)]
        samples: u64,
        /// Monte Carlo seed (mc only).
        #[arg(long, default_value_t = 0)]
        seed: u64,
        /// Worker threads (mc only; never changes the result).
        #[arg(long, default_value_t = 1)]
        workers: usize,
        #[arg(long, value_enum, default_value_t)]
        format: Format,
    },
    /// Expand one vertex into a weighted sum of graphs in which it is
    /// split in two by an internal edge.
    Expand {
        file: PathBuf,
        /// Name of the vertex to split.
        #[arg(long)]
        vertex: String,
        /// Two parenthesized groups of incident edge indices, e.g.
        /// "(0,1)(2,3)": the first group moves to the new vertex.
        #[arg(long)]
        split: String,
        #[arg(long, value_enum, default_value_t)]
        format: Format,
    },
    /// Sample complete-graph-on-five geometries: one record per sample plus
    /// a trailing summary record.
    Geometry {
        /// Ten comma-separated edge spins in lexicographic pair order
        /// (01,02,03,04,12,13,14,23,24,34).
        #[arg(long, value_delimiter = ',')]
        spins: Vec<u32>,
        #[arg(long, default_value_t = 10_000)]
        samples: u64,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        #[arg(long, value_enum, default_value_t)]
        format: Format,
    },
}

#[derive(ValueEnum, Clone, Copy, Default, PartialEq, Eq)]
enum Format {
    #[default]
    Json,
    Text,
}

#[derive(ValueEnum, Clone, Copy, PartialEq, Eq)]
enum Method {
    Exact,
    Contract,
    Mc,
}

/// Failures classified by exit code; the message becomes the single
/// machine-readable stderr line.
enum CliError {
    Usage(String),
    Input(String),
    Compute(String),
}

impl CliError {
    fn category(&self) -> &'static str {
        match self {
            CliError::Usage(_) => "usage",
            CliError::Input(_) => "input",
            CliError::Compute(_) => "compute",
        }
    }

    fn message(&self) -> &str {
        match self {
            CliError::Usage(m) | CliError::Input(m) | CliError::Compute(m) => m,
        }
    }

    fn exit_code(&self) -> i32 {
        match self {
            CliError::Usage(_) => 1,
            CliError::Input(_) => 2,
            CliError::Compute(_) => 3,
        }
    }
}

fn main() {
    std::process::exit(run());
}

fn run() -> i32 {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(err) => {
            if matches!(err.kind(), ErrorKind::DisplayHelp | ErrorKind::DisplayVersion) {
                print!("{err}");
                return 0;
            }
            let rendered = err.render().to_string();
            let first_line = rendered.lines().next().unwrap_or("invalid arguments");
            let reason = first_line.strip_prefix("error: ").unwrap_or(first_line);
            eprintln!("spinnet: error: usage: {reason}");
            return 1;
        }
    };
    match commands::dispatch(cli.command) {
        Ok(()) => 0,
        Err(err) => {
            eprintln!("spinnet: error: {}: {}", err.category(), err.message());
            err.exit_code()
        }
    }
}
