//! Instance files: a plain text format and a JSON alternative.
//!
//! Text: the first line is `n k m`, followed by `m` lines of `k`
//! space-separated 0-based vertex ids in ascending order. Everything after a
//! `#` is a comment; blank lines are skipped.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::hypergraph::Hypergraph;

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct InstanceJson {
    pub n: usize,
    pub k: usize,
    pub edges: Vec<Vec<usize>>,
}

fn parse_err(line: usize, msg: impl Into<String>) -> Error {
    Error::Parse { line, msg: msg.into() }
}

fn numbers(line: usize, text: &str) -> Result<Vec<usize>> {
    text.split_whitespace()
        .map(|tok| tok.parse::<usize>().map_err(|_| parse_err(line, format!("not a vertex id: {tok:?}"))))
        .collect()
}

pub fn parse_text(input: &str) -> Result<Hypergraph> {
    let mut lines = input
        .lines()
        .enumerate()
        .map(|(i, l)| (i + 1, l.split('#').next().unwrap_or("").trim()))
        .filter(|(_, l)| !l.is_empty());
    let (hline, header) = lines.next().ok_or_else(|| parse_err(1, "missing header `n k m`"))?;
    let head = numbers(hline, header)?;
    let [n, k, m] = head[..] else {
        return Err(parse_err(hline, "header must be `n k m`"));
    };
    let mut edges = Vec::with_capacity(m);
    for (line, text) in lines {
        let e = numbers(line, text)?;
        if e.len() != k {
            return Err(parse_err(line, format!("edge has {} vertices, expected {k}", e.len())));
        }
        if e.windows(2).any(|w| w[0] >= w[1]) {
            return Err(parse_err(line, "edge vertices must be strictly ascending"));
        }
        edges.push(e);
    }
    if edges.len() != m {
        return Err(parse_err(hline, format!("header announces {m} edges, found {}", edges.len())));
    }
    Hypergraph::new(n, k, edges)
}

pub fn to_text(h: &Hypergraph) -> String {
    let mut out = format!("{} {} {}\n", h.n(), h.k(), h.edge_count());
    for e in h.edges() {
        let line: Vec<String> = e.iter().map(usize::to_string).collect();
        out.push_str(&line.join(" "));
        out.push('\n');
    }
    out
}

pub fn parse_json(input: &str) -> Result<Hypergraph> {
    let inst: InstanceJson = serde_json::from_str(input)?;
    Hypergraph::new(inst.n, inst.k, inst.edges)
}

pub fn to_json(h: &Hypergraph) -> String {
    let inst = InstanceJson {
        n: h.n(),
        k: h.k(),
        edges: h.edges().to_vec(),
    };
    serde_json::to_string(&inst).expect("instance serializes")
}

/// Parses either format, choosing JSON when the input starts with `{`.
pub fn parse_instance(input: &str) -> Result<Hypergraph> {
    if input.trim_start().starts_with('{') {
        parse_json(input)
    } else {
        parse_text(input)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn text_roundtrip() {
        let h = Hypergraph::new(6, 3, vec![vec![0, 1, 2], vec![3, 4, 5], vec![0, 2, 4]]).unwrap();
        let text = to_text(&h);
        assert_eq!(text, "6 3 3\n0 1 2\n0 2 4\n3 4 5\n");
        assert_eq!(parse_text(&text).unwrap(), h);
        assert_eq!(parse_instance(&to_json(&h)).unwrap(), h);
    }

    #[test]
    fn comments_and_errors() {
        let h = parse_text("# demo\n3 3 1 # header\n\n0 1 2 # only edge\n").unwrap();
        assert_eq!(h.edge_count(), 1);
        assert!(matches!(parse_text("3 3 1\n0 2 1\n"), Err(Error::Parse { line: 2, .. })));
        assert!(matches!(parse_text("3 3 2\n0 1 2\n"), Err(Error::Parse { .. })));
        assert!(matches!(parse_text("3 3 1\n0 1 x\n"), Err(Error::Parse { line: 2, .. })));
        assert!(parse_text("3 3 1\n0 1 5\n").is_err());
        assert!(parse_json("{\"n\": 3}").is_err());
    }
}
