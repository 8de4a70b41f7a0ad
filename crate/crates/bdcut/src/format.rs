//! Text formats for instances and embeddings.
//!
//! Instance file: a header line `n m`, then `m` lines `i j b w`. Lines whose
//! first non-blank character is `#` are comments; blank lines are skipped.
//! Weights are written with the shortest decimal that parses back to the
//! same `f64`, so `parse(write(x)) == x` holds bit for bit.
//!
//! Embedding dump: a header line `n r`, then `n` rows of `r` numbers.

use std::collections::HashMap;
use std::fmt::Write as _;

use bdcut_core::instance::{Edge, Max2LinInstance};
use bdcut_core::sdp::SdpEmbedding;
use thiserror::Error;

#[derive(Debug, Error, PartialEq)]
pub enum FormatError {
    #[error("line {line}: {msg}")]
    Line { line: usize, msg: String },
    #[error("{0}")]
    Invalid(String),
}

fn at(line: usize, msg: impl Into<String>) -> FormatError {
    FormatError::Line {
        line,
        msg: msg.into(),
    }
}

/// Non-comment, non-blank lines with their 1-based line numbers.
fn data_lines(text: &str) -> impl Iterator<Item = (usize, &str)> {
    text.lines().enumerate().filter_map(|(k, l)| {
        let t = l.trim();
        (!t.is_empty() && !t.starts_with('#')).then_some((k + 1, t))
    })
}

fn field<T: std::str::FromStr>(
    tok: Option<&str>,
    line: usize,
    what: &str,
) -> Result<T, FormatError> {
    let tok = tok.ok_or_else(|| at(line, format!("missing {what}")))?;
    tok.parse()
        .map_err(|_| at(line, format!("cannot parse {what} from {tok:?}")))
}

fn header(
    lines: &mut dyn Iterator<Item = (usize, &str)>,
    a: &str,
    b: &str,
) -> Result<(usize, usize, usize), FormatError> {
    let (line, text) = lines
        .next()
        .ok_or_else(|| FormatError::Invalid("empty input".into()))?;
    let mut toks = text.split_whitespace();
    let x = field(toks.next(), line, a)?;
    let y = field(toks.next(), line, b)?;
    if toks.next().is_some() {
        return Err(at(line, "trailing fields after header"));
    }
    Ok((line, x, y))
}

pub fn parse_instance(text: &str) -> Result<Max2LinInstance, FormatError> {
    let mut lines = data_lines(text);
    let (header_line, n, m) = header(&mut lines, "vertex count", "edge count")?;
    let mut edges = Vec::with_capacity(m);
    let mut seen: HashMap<(usize, usize), usize> = HashMap::with_capacity(m);
    let mut last = header_line;
    for (line, text) in lines {
        if edges.len() == m {
            return Err(at(line, format!("more than the declared {m} edges")));
        }
        last = line;
        let mut toks = text.split_whitespace();
        let i: usize = field(toks.next(), line, "endpoint i")?;
        let j: usize = field(toks.next(), line, "endpoint j")?;
        let b: i8 = field(toks.next(), line, "sign")?;
        let w: f64 = field(toks.next(), line, "weight")?;
        if toks.next().is_some() {
            return Err(at(line, "trailing fields after weight"));
        }
        if i >= n || j >= n {
            return Err(at(
                line,
                format!("vertex {} out of range for n = {n}", i.max(j)),
            ));
        }
        if i == j {
            return Err(at(line, format!("self-loop at vertex {i}")));
        }
        if b != 1 && b != -1 {
            return Err(at(line, format!("sign must be 1 or -1, got {b}")));
        }
        if !(w > 0.0 && w.is_finite()) {
            return Err(at(line, format!("weight must be finite and > 0, got {w}")));
        }
        if let Some(prev) = seen.insert((i.min(j), i.max(j)), line) {
            return Err(at(
                line,
                format!("duplicate edge {{{i}, {j}}} (first on line {prev})"),
            ));
        }
        edges.push(Edge::new(i, j, b, w));
    }
    if edges.len() < m {
        return Err(at(
            last,
            format!("expected {m} edges, found {}", edges.len()),
        ));
    }
    Max2LinInstance::new(n, edges).map_err(|e| FormatError::Invalid(e.to_string()))
}

pub fn write_instance(inst: &Max2LinInstance) -> String {
    let mut out = String::with_capacity(16 * (inst.m() + 1));
    let _ = writeln!(out, "{} {}", inst.n(), inst.m());
    for e in inst.edges() {
        let _ = writeln!(out, "{} {} {} {}", e.i, e.j, e.sign, e.weight);
    }
    out
}

pub fn write_embedding(emb: &SdpEmbedding) -> String {
    let mut out = String::new();
    let _ = writeln!(out, "{} {}", emb.n(), emb.rank());
    for i in 0..emb.n() {
        let row: Vec<String> = emb.row(i).iter().map(|x| x.to_string()).collect();
        let _ = writeln!(out, "{}", row.join(" "));
    }
    out
}

pub fn parse_embedding(text: &str) -> Result<SdpEmbedding, FormatError> {
    let mut lines = data_lines(text);
    let (_, n, r) = header(&mut lines, "row count", "rank")?;
    let mut data = Vec::with_capacity(n * r);
    let mut rows = 0;
    for (line, text) in lines {
        if rows == n {
            return Err(at(line, format!("more than the declared {n} rows")));
        }
        let before = data.len();
        for tok in text.split_whitespace() {
            data.push(field::<f64>(Some(tok), line, "coordinate")?);
        }
        if data.len() - before != r {
            return Err(at(
                line,
                format!("expected {r} coordinates, found {}", data.len() - before),
            ));
        }
        rows += 1;
    }
    if rows != n {
        return Err(FormatError::Invalid(format!(
            "expected {n} rows, found {rows}"
        )));
    }
    SdpEmbedding::from_rows(n, r, data).map_err(|e| FormatError::Invalid(e.to_string()))
}
