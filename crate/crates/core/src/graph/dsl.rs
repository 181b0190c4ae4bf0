//! Line-oriented text format for graphs.
//!
//! Each nonblank line is one of
//!
//! * `v <name>` — declare a vertex;
//! * `e <name> <name> <n>` — an edge between two declared vertices with
//!   spin `n` (equal names make a loop);
//! * `# ...` — a whole-line comment.
//!
//! Names match `[A-Za-z0-9_]+`, spins are decimal integers in `[0, 10^6]`,
//! tokens are separated by spaces or tabs, and vertices must be declared
//! before use. Both LF and CRLF line endings are accepted.

use super::{LabeledGraph, Spin, SPIN_CAP};
use std::fmt;
use thiserror::Error;

#[derive(Clone, PartialEq, Eq, Debug)]
pub enum ParseErrorKind {
    UnknownDirective { token: String },
    MissingToken { expected: &'static str },
    TrailingTokens { token: String },
    InvalidName { name: String },
    DuplicateVertex { name: String },
    UnknownVertex { name: String },
    InvalidSpin { token: String },
    SpinOutOfRange { value: u64 },
}

impl fmt::Display for ParseErrorKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            ParseErrorKind::UnknownDirective { token } => {
                write!(f, "unknown directive `{token}` (expected `v`, `e` or `#`)")
            }
            ParseErrorKind::MissingToken { expected } => write!(f, "missing {expected}"),
            ParseErrorKind::TrailingTokens { token } => {
                write!(f, "unexpected trailing token `{token}`")
            }
            ParseErrorKind::InvalidName { name } => {
                write!(f, "invalid name `{name}` (allowed: [A-Za-z0-9_]+)")
            }
            ParseErrorKind::DuplicateVertex { name } => {
                write!(f, "vertex `{name}` declared twice")
            }
            ParseErrorKind::UnknownVertex { name } => {
                write!(f, "unknown vertex `{name}` (vertices must be declared before use)")
            }
            ParseErrorKind::InvalidSpin { token } => {
                write!(f, "invalid spin `{token}` (expected a decimal integer)")
            }
            ParseErrorKind::SpinOutOfRange { value } => {
                write!(f, "spin {value} out of range (cap {SPIN_CAP})")
            }
        }
    }
}

/// Syntax or reference error with 1-based line and column of the offending
/// token.
#[derive(Error, Clone, PartialEq, Eq, Debug)]
#[error("line {line}, column {column}: {kind}")]
pub struct ParseError {
    pub line: usize,
    pub column: usize,
    pub kind: ParseErrorKind,
}

/// A token plus the 1-based column of its first character.
fn tokenize(line: &str) -> Vec<(usize, &str)> {
    let mut tokens = Vec::new();
    let mut start = None;
    for (i, ch) in line.char_indices() {
        if ch == ' ' || ch == '\t' {
            if let Some(s) = start.take() {
                tokens.push((s + 1, &line[s..i]));
            }
        } else if start.is_none() {
            start = Some(i);
        }
    }
    if let Some(s) = start {
        tokens.push((s + 1, &line[s..]));
    }
    tokens
}

/// Parse the graph DSL. Vertices and edges are kept in file order; loops and
/// parallel edges are preserved.
pub fn parse_graph(text: &str) -> Result<LabeledGraph, ParseError> {
    let mut graph = LabeledGraph::new();
    for (line_idx, raw_line) in text.split('\n').enumerate() {
        let line_no = line_idx + 1;
        let line = raw_line.strip_suffix('\r').unwrap_or(raw_line);
        let mut tokens = tokenize(line).into_iter().peekable();
        let Some(&(col0, directive)) = tokens.peek() else {
            continue; // blank line
        };
        if directive.starts_with('#') {
            continue;
        }
        tokens.next();
        let err = |column: usize, kind: ParseErrorKind| ParseError {
            line: line_no,
            column,
            kind,
        };
        let end_col = line.chars().count() + 1;
        match directive {
            "v" => {
                let (col, name) = tokens.next().ok_or_else(|| {
                    err(end_col, ParseErrorKind::MissingToken { expected: "vertex name" })
                })?;
                if let Some(&(tcol, tok)) = tokens.peek() {
                    return Err(err(tcol, ParseErrorKind::TrailingTokens { token: tok.into() }));
                }
                graph.add_vertex(name).map_err(|e| {
                    let kind = match e {
                        super::GraphError::DuplicateVertex { name } => {
                            ParseErrorKind::DuplicateVertex { name }
                        }
                        _ => ParseErrorKind::InvalidName { name: name.into() },
                    };
                    err(col, kind)
                })?;
            }
            "e" => {
                let (col0, name0) = tokens.next().ok_or_else(|| {
                    err(end_col, ParseErrorKind::MissingToken { expected: "first vertex name" })
                })?;
                let (col1, name1) = tokens.next().ok_or_else(|| {
                    err(end_col, ParseErrorKind::MissingToken { expected: "second vertex name" })
                })?;
                let (col2, spin_tok) = tokens.next().ok_or_else(|| {
                    err(end_col, ParseErrorKind::MissingToken { expected: "spin" })
                })?;
                if let Some(&(tcol, tok)) = tokens.peek() {
                    return Err(err(tcol, ParseErrorKind::TrailingTokens { token: tok.into() }));
                }
                for (col, name) in [(col0, name0), (col1, name1)] {
                    if graph.vertex_index(name).is_none() {
                        return Err(err(col, ParseErrorKind::UnknownVertex { name: name.into() }));
                    }
                }
                let value: u64 = spin_tok.parse().map_err(|_| {
                    err(col2, ParseErrorKind::InvalidSpin { token: spin_tok.into() })
                })?;
                if value > SPIN_CAP as u64 {
                    return Err(err(col2, ParseErrorKind::SpinOutOfRange { value }));
                }
                let spin = Spin::new(value as u32).expect("checked against cap");
                graph
                    .add_edge(name0, name1, spin)
                    .expect("endpoints checked above");
            }
            other => {
                return Err(err(col0, ParseErrorKind::UnknownDirective { token: other.into() }));
            }
        }
    }
    Ok(graph)
}

/// Canonical DSL text: all vertex lines in order, then all edge lines in
/// order. `parse_graph(serialize_graph(g))` is structurally identical to `g`.
pub fn serialize_graph(graph: &LabeledGraph) -> String {
    let mut out = String::new();
    for name in graph.vertex_names() {
        out.push_str("v ");
        out.push_str(name);
        out.push('\n');
    }
    for edge in graph.edges() {
        out.push_str("e ");
        out.push_str(graph.vertex_name(edge.end0));
        out.push(' ');
        out.push_str(graph.vertex_name(edge.end1));
        out.push(' ');
        out.push_str(&edge.spin.to_string());
        out.push('\n');
    }
    out
}
