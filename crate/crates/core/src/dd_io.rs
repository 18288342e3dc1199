//! Reader and writer for the line-oriented dd instance format.
//!
//! ```text
//! c <comment>
//! p <#V> <#L> <#A> <#E>
//! a <id> <i> <s> <cost>
//! e <id1> <id2> <cost>
//! i0 <i> <x> <y>
//! i1 <s> <x> <y>
//! n0 <i> <j>
//! n1 <s> <l>
//! ```
//!
//! Ids are 0-based and validated against the prologue. The cost on an `e`
//! line is the already symmetrized pairwise term. Coordinates and neighbor
//! lines are kept but do not enter the cost structure.

use std::fmt::Write as _;
use std::io::Read;

use thiserror::Error;

use crate::model::{Geometry, ModelError, Problem};

#[derive(Debug, Clone, PartialEq, Error)]
pub enum DdErrorKind {
    #[error("input is not valid UTF-8")]
    Encoding,
    #[error("unknown line tag `{0}`")]
    UnknownTag(String),
    #[error("`{0}` line before the `p` prologue")]
    BeforePrologue(String),
    #[error("duplicate `p` prologue")]
    DuplicatePrologue,
    #[error("missing `p` prologue")]
    MissingPrologue,
    #[error("expected {expected} fields, found {found}")]
    FieldCount { expected: usize, found: usize },
    #[error("invalid integer `{0}`")]
    BadInteger(String),
    #[error("invalid number `{0}`")]
    BadNumber(String),
    #[error("non-finite number `{0}`")]
    NonFinite(String),
    #[error("{what} id {id} out of range (declared {bound})")]
    OutOfRange {
        what: &'static str,
        id: usize,
        bound: usize,
    },
    #[error("assignment id {0} defined twice")]
    DuplicateId(usize),
    #[error("assignment ({0}, {1}) defined twice")]
    DuplicatePair(usize, usize),
    #[error("declared size {0} exceeds the supported maximum")]
    TooLarge(usize),
    #[error("edge endpoints {0} and {1} share a node")]
    SharedNode(usize, usize),
    #[error("edge endpoints {0} and {1} share a label")]
    SharedLabel(usize, usize),
    #[error("edge ({0}, {1}) defined twice")]
    DuplicateEdge(usize, usize),
    #[error("prologue declares {declared} {what} lines, found {found}")]
    CountMismatch {
        what: &'static str,
        declared: usize,
        found: usize,
    },
    #[error("i/o error: {0}")]
    Io(String),
}

/// A parse failure with its 1-based line number (0 when not tied to a line).
#[derive(Debug, Clone, PartialEq, Error)]
#[error("line {line}: {kind}")]
pub struct DdError {
    pub line: usize,
    pub kind: DdErrorKind,
}

impl DdError {
    fn at(line: usize, kind: DdErrorKind) -> Self {
        Self { line, kind }
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Prologue {
    pub num_nodes: usize,
    pub num_labels: usize,
    pub num_assignments: usize,
    pub num_edges: usize,
}

/// Line-level content of a dd file, including comments.
#[derive(Debug, Clone, PartialEq)]
pub struct DdDocument {
    pub prologue: Prologue,
    /// `(id, node, label, cost)` in file order.
    pub assignments: Vec<(usize, usize, usize, f64)>,
    pub edges: Vec<(usize, usize, f64)>,
    pub geometry: Geometry,
    pub comments: Vec<String>,
    edge_lines: Vec<usize>,
}

impl DdDocument {
    /// Builds the problem, checking every structural invariant.
    pub fn to_problem(&self) -> Result<Problem, DdError> {
        let p = self.prologue;
        let mut by_id: Vec<Option<(usize, usize, f64)>> = vec![None; p.num_assignments];
        for &(id, node, label, cost) in &self.assignments {
            by_id[id] = Some((node, label, cost));
        }
        let assignments: Vec<_> = by_id.into_iter().map(|a| a.expect("ids checked")).collect();
        for (k, &(a, b, _)) in self.edges.iter().enumerate() {
            let line = self.edge_lines[k];
            if a == b {
                return Err(DdError::at(line, DdErrorKind::SharedNode(a, b)));
            }
            let (ia, sa, _) = assignments[a];
            let (ib, sb, _) = assignments[b];
            if ia == ib {
                return Err(DdError::at(line, DdErrorKind::SharedNode(a, b)));
            }
            if sa == sb {
                return Err(DdError::at(line, DdErrorKind::SharedLabel(a, b)));
            }
        }
        Problem::with_geometry(
            p.num_nodes,
            p.num_labels,
            assignments,
            self.edges.clone(),
            self.geometry.clone(),
        )
        .map_err(|e| match e {
            ModelError::DuplicateEdge(a, b) => {
                let line = self
                    .edges
                    .iter()
                    .zip(&self.edge_lines)
                    .filter(|((x, y, _), _)| (*x.min(y), *x.max(y)) == (a, b))
                    .map(|(_, &l)| l)
                    .nth(1)
                    .unwrap_or(0);
                DdError::at(line, DdErrorKind::DuplicateEdge(a, b))
            }
            other => DdError::at(0, DdErrorKind::Io(other.to_string())),
        })
    }
}

fn int(tok: &str, line: usize) -> Result<usize, DdError> {
    tok.parse::<usize>()
        .map_err(|_| DdError::at(line, DdErrorKind::BadInteger(tok.to_string())))
}

fn num(tok: &str, line: usize) -> Result<f64, DdError> {
    let v = tok
        .parse::<f64>()
        .map_err(|_| DdError::at(line, DdErrorKind::BadNumber(tok.to_string())))?;
    if !v.is_finite() {
        return Err(DdError::at(line, DdErrorKind::NonFinite(tok.to_string())));
    }
    Ok(v)
}

fn expect_fields(tokens: &[&str], n: usize, line: usize) -> Result<(), DdError> {
    if tokens.len() != n {
        return Err(DdError::at(
            line,
            DdErrorKind::FieldCount {
                expected: n,
                found: tokens.len(),
            },
        ));
    }
    Ok(())
}

fn in_range(what: &'static str, id: usize, bound: usize, line: usize) -> Result<usize, DdError> {
    if id >= bound {
        return Err(DdError::at(line, DdErrorKind::OutOfRange { what, id, bound }));
    }
    Ok(id)
}

/// Upper bound on declared node and label counts; per-node tables are
/// allocated from the prologue before any assignment is read.
const MAX_DECLARED: usize = 1 << 24;

/// Parses dd text into a document, validating ids and counts.
pub fn parse_document(text: &str) -> Result<DdDocument, DdError> {
    let mut prologue: Option<Prologue> = None;
    let mut assignments = Vec::new();
    let mut edges = Vec::new();
    let mut edge_lines = Vec::new();
    let mut geometry = Geometry::default();
    let mut comments = Vec::new();
    let mut seen_id = std::collections::HashSet::new();
    let mut seen_pair = std::collections::HashSet::new();

    for (k, raw) in text.lines().enumerate() {
        let line = k + 1;
        let tokens: Vec<&str> = raw.split_whitespace().collect();
        let Some(&tag) = tokens.first() else {
            continue;
        };
        if tag == "c" {
            let body = raw.trim_start();
            comments.push(body[1..].trim_start().to_string());
            continue;
        }
        if tag == "p" {
            if prologue.is_some() {
                return Err(DdError::at(line, DdErrorKind::DuplicatePrologue));
            }
            expect_fields(&tokens, 5, line)?;
            let p = Prologue {
                num_nodes: int(tokens[1], line)?,
                num_labels: int(tokens[2], line)?,
                num_assignments: int(tokens[3], line)?,
                num_edges: int(tokens[4], line)?,
            };
            for n in [p.num_nodes, p.num_labels] {
                if n > MAX_DECLARED {
                    return Err(DdError::at(line, DdErrorKind::TooLarge(n)));
                }
            }
            prologue = Some(p);
            continue;
        }
        let known = matches!(tag, "a" | "e" | "i0" | "i1" | "n0" | "n1");
        if !known {
            return Err(DdError::at(line, DdErrorKind::UnknownTag(tag.to_string())));
        }
        let Some(p) = prologue else {
            return Err(DdError::at(line, DdErrorKind::BeforePrologue(tag.to_string())));
        };
        match tag {
            "a" => {
                expect_fields(&tokens, 5, line)?;
                let id = in_range("assignment", int(tokens[1], line)?, p.num_assignments, line)?;
                let node = in_range("node", int(tokens[2], line)?, p.num_nodes, line)?;
                let label = in_range("label", int(tokens[3], line)?, p.num_labels, line)?;
                let cost = num(tokens[4], line)?;
                if !seen_id.insert(id) {
                    return Err(DdError::at(line, DdErrorKind::DuplicateId(id)));
                }
                if !seen_pair.insert((node, label)) {
                    return Err(DdError::at(line, DdErrorKind::DuplicatePair(node, label)));
                }
                assignments.push((id, node, label, cost));
            }
            "e" => {
                expect_fields(&tokens, 4, line)?;
                let a = in_range("assignment", int(tokens[1], line)?, p.num_assignments, line)?;
                let b = in_range("assignment", int(tokens[2], line)?, p.num_assignments, line)?;
                let cost = num(tokens[3], line)?;
                edges.push((a, b, cost));
                edge_lines.push(line);
            }
            "i0" | "i1" => {
                expect_fields(&tokens, 4, line)?;
                let (what, bound) = if tag == "i0" {
                    ("node", p.num_nodes)
                } else {
                    ("label", p.num_labels)
                };
                let id = in_range(what, int(tokens[1], line)?, bound, line)?;
                let point = (id, num(tokens[2], line)?, num(tokens[3], line)?);
                if tag == "i0" {
                    geometry.node_points.push(point);
                } else {
                    geometry.label_points.push(point);
                }
            }
            _ => {
                expect_fields(&tokens, 3, line)?;
                let (what, bound) = if tag == "n0" {
                    ("node", p.num_nodes)
                } else {
                    ("label", p.num_labels)
                };
                let x = in_range(what, int(tokens[1], line)?, bound, line)?;
                let y = in_range(what, int(tokens[2], line)?, bound, line)?;
                if tag == "n0" {
                    geometry.node_neighbors.push((x, y));
                } else {
                    geometry.label_neighbors.push((x, y));
                }
            }
        }
    }

    let last = text.lines().count();
    let prologue = prologue.ok_or(DdError::at(last, DdErrorKind::MissingPrologue))?;
    if assignments.len() != prologue.num_assignments {
        return Err(DdError::at(
            last,
            DdErrorKind::CountMismatch {
                what: "assignment",
                declared: prologue.num_assignments,
                found: assignments.len(),
            },
        ));
    }
    if edges.len() != prologue.num_edges {
        return Err(DdError::at(
            last,
            DdErrorKind::CountMismatch {
                what: "edge",
                declared: prologue.num_edges,
                found: edges.len(),
            },
        ));
    }
    // Every id in range was seen exactly once, so the id set is dense.
    Ok(DdDocument {
        prologue,
        assignments,
        edges,
        geometry,
        comments,
        edge_lines,
    })
}

/// Parses dd text into a problem.
pub fn parse_str(text: &str) -> Result<Problem, DdError> {
    parse_document(text)?.to_problem()
}

/// Parses raw bytes; invalid UTF-8 is reported as an error.
pub fn parse_bytes(bytes: &[u8]) -> Result<Problem, DdError> {
    let text = std::str::from_utf8(bytes).map_err(|_| DdError::at(0, DdErrorKind::Encoding))?;
    parse_str(text)
}

pub fn parse<R: Read>(mut reader: R) -> Result<Problem, DdError> {
    let mut buf = Vec::new();
    reader
        .read_to_end(&mut buf)
        .map_err(|e| DdError::at(0, DdErrorKind::Io(e.to_string())))?;
    parse_bytes(&buf)
}

/// Canonical dd text for a problem.
pub fn write(problem: &Problem) -> String {
    let mut out = String::new();
    let _ = writeln!(
        out,
        "p {} {} {} {}",
        problem.num_nodes(),
        problem.num_labels(),
        problem.num_assignments(),
        problem.edges().len()
    );
    for (id, a) in problem.assignments().iter().enumerate() {
        let _ = writeln!(out, "a {id} {} {} {}", a.node, a.label, a.cost);
    }
    for e in problem.edges() {
        let _ = writeln!(out, "e {} {} {}", e.a, e.b, e.cost);
    }
    let g = problem.geometry();
    for (i, x, y) in &g.node_points {
        let _ = writeln!(out, "i0 {i} {x} {y}");
    }
    for (s, x, y) in &g.label_points {
        let _ = writeln!(out, "i1 {s} {x} {y}");
    }
    for (i, j) in &g.node_neighbors {
        let _ = writeln!(out, "n0 {i} {j}");
    }
    for (s, l) in &g.label_neighbors {
        let _ = writeln!(out, "n1 {s} {l}");
    }
    out
}
