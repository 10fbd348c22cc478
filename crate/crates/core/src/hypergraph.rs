use std::collections::hash_map::DefaultHasher;
use std::collections::HashMap;
use std::hash::{Hash, Hasher};
use std::sync::OnceLock;

use itertools::Itertools;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::vertex_set::VertexSet;

/// A k-uniform hypergraph on vertices `0..n`.
///
/// Edges are stored as ascending vertex lists, and the edge list itself is
/// kept in lexicographic order. That order is the canonical edge order used
/// for every tie-break in the crate. The hypergraph is immutable once built.
#[derive(Debug)]
pub struct Hypergraph {
    n: usize,
    k: usize,
    edges: Vec<Vec<usize>>,
    incidence: Vec<Vec<usize>>,
    links: OnceLock<HashMap<Vec<usize>, Vec<usize>>>,
    fingerprint: u64,
}

impl Clone for Hypergraph {
    fn clone(&self) -> Self {
        Hypergraph {
            n: self.n,
            k: self.k,
            edges: self.edges.clone(),
            incidence: self.incidence.clone(),
            links: OnceLock::new(),
            fingerprint: self.fingerprint,
        }
    }
}

impl PartialEq for Hypergraph {
    fn eq(&self, other: &Self) -> bool {
        self.n == other.n && self.k == other.k && self.edges == other.edges
    }
}

impl Eq for Hypergraph {}

impl Hypergraph {
    /// Builds a hypergraph, rejecting malformed and duplicate edges.
    pub fn new<I>(n: usize, k: usize, edges: I) -> Result<Self>
    where
        I: IntoIterator<Item = Vec<usize>>,
    {
        if k < 2 {
            return Err(Error::InvalidParameter(format!("uniformity k = {k} < 2")));
        }
        let mut list = Vec::new();
        for mut e in edges {
            e.sort_unstable();
            if e.len() != k {
                return Err(Error::InvalidEdge {
                    edge: e,
                    reason: format!("expected {k} vertices"),
                });
            }
            if e.windows(2).any(|w| w[0] == w[1]) {
                return Err(Error::InvalidEdge {
                    edge: e,
                    reason: "repeated vertex".into(),
                });
            }
            if e[k - 1] >= n {
                return Err(Error::InvalidEdge {
                    edge: e,
                    reason: format!("vertex out of range 0..{n}"),
                });
            }
            list.push(e);
        }
        list.sort_unstable();
        if let Some(w) = list.windows(2).find(|w| w[0] == w[1]) {
            return Err(Error::DuplicateEdge(w[0].clone()));
        }
        Ok(Self::from_sorted(n, k, list))
    }

    /// Builds from edges known to be valid; duplicates are dropped.
    pub(crate) fn from_edges_unchecked(n: usize, k: usize, mut edges: Vec<Vec<usize>>) -> Self {
        for e in edges.iter_mut() {
            e.sort_unstable();
        }
        edges.sort_unstable();
        edges.dedup();
        Self::from_sorted(n, k, edges)
    }

    fn from_sorted(n: usize, k: usize, edges: Vec<Vec<usize>>) -> Self {
        let mut incidence = vec![Vec::new(); n];
        for (i, e) in edges.iter().enumerate() {
            for &v in e {
                incidence[v].push(i);
            }
        }
        let mut hasher = DefaultHasher::new();
        n.hash(&mut hasher);
        k.hash(&mut hasher);
        edges.hash(&mut hasher);
        Hypergraph {
            n,
            k,
            edges,
            incidence,
            links: OnceLock::new(),
            fingerprint: hasher.finish(),
        }
    }

    /// The complete k-graph on `n` vertices.
    pub fn complete(n: usize, k: usize) -> Self {
        let edges = (0..n).combinations(k).collect();
        Self::from_sorted(n, k, edges)
    }

    pub fn empty(n: usize, k: usize) -> Self {
        Self::from_sorted(n, k, Vec::new())
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn k(&self) -> usize {
        self.k
    }

    /// Edges in canonical (lexicographic) order.
    pub fn edges(&self) -> &[Vec<usize>] {
        &self.edges
    }

    pub fn edge_count(&self) -> usize {
        self.edges.len()
    }

    pub fn edge(&self, index: usize) -> &[usize] {
        &self.edges[index]
    }

    /// Content hash of `(n, k, edges)`.
    pub fn fingerprint(&self) -> u64 {
        self.fingerprint
    }

    /// Indices of the edges containing `v`, in canonical order.
    pub fn incident(&self, v: usize) -> &[usize] {
        &self.incidence[v]
    }

    pub fn vertex_degree(&self, v: usize) -> usize {
        self.incidence[v].len()
    }

    /// Whether the (possibly unsorted) vertex list is an edge.
    pub fn contains_edge(&self, vertices: &[usize]) -> bool {
        if vertices.len() != self.k {
            return false;
        }
        let mut e = vertices.to_vec();
        e.sort_unstable();
        self.edges.binary_search(&e).is_ok()
    }

    pub fn edge_index(&self, vertices: &[usize]) -> Option<usize> {
        let mut e = vertices.to_vec();
        e.sort_unstable();
        self.edges.binary_search(&e).ok()
    }

    fn links(&self) -> &HashMap<Vec<usize>, Vec<usize>> {
        self.links.get_or_init(|| {
            let mut map: HashMap<Vec<usize>, Vec<usize>> = HashMap::new();
            for e in &self.edges {
                for skip in 0..self.k {
                    let key: Vec<usize> = e
                        .iter()
                        .enumerate()
                        .filter(|&(i, _)| i != skip)
                        .map(|(_, &v)| v)
                        .collect();
                    map.entry(key).or_default().push(e[skip]);
                }
            }
            for list in map.values_mut() {
                list.sort_unstable();
            }
            map
        })
    }

    /// Vertices completing the (k-1)-set `set` to an edge, ascending.
    pub fn neighborhood(&self, set: &[usize]) -> &[usize] {
        debug_assert_eq!(set.len() + 1, self.k);
        let mut key = set.to_vec();
        key.sort_unstable();
        self.links().get(&key).map(Vec::as_slice).unwrap_or(&[])
    }

    /// Degree of a (k-1)-set.
    pub fn codegree(&self, set: &[usize]) -> usize {
        self.neighborhood(set).len()
    }

    /// Minimum over all (k-1)-sets of their degree.
    pub fn min_codegree(&self) -> Result<usize> {
        if self.n < self.k {
            return Err(Error::Degenerate {
                n: self.n,
                k: self.k,
            });
        }
        let links = self.links();
        let min = (0..self.n)
            .combinations(self.k - 1)
            .map(|s| links.get(&s).map_or(0, Vec::len))
            .min()
            .unwrap_or(0);
        Ok(min)
    }

    /// True iff no edge lies entirely inside `set`.
    pub fn is_independent(&self, set: &VertexSet) -> bool {
        if set.len() < self.k {
            return true;
        }
        self.edges_within(set).is_empty()
    }

    /// Indices of the edges lying inside `set`, ascending. Small sets are
    /// handled through the incidence lists or by probing their k-subsets.
    pub fn edges_within(&self, set: &VertexSet) -> Vec<usize> {
        let size = set.len();
        if size < self.k {
            return Vec::new();
        }
        let via_incidence: usize = set.iter().map(|v| self.incidence[v].len()).sum();
        let subsets = crate::instances::binomial(size, self.k);
        if subsets.saturating_mul(4) < via_incidence.min(self.edges.len()) {
            let members = set.to_vec();
            return members
                .into_iter()
                .combinations(self.k)
                .filter_map(|e| self.edges.binary_search(&e).ok())
                .collect();
        }
        if via_incidence < self.edges.len() {
            let mut out: Vec<usize> = set
                .iter()
                .flat_map(|v| {
                    self.incidence[v]
                        .iter()
                        .copied()
                        .filter(move |&i| self.edges[i][0] == v)
                })
                .filter(|&i| set.contains_all(&self.edges[i]))
                .collect();
            out.sort_unstable();
            return out;
        }
        (0..self.edges.len())
            .filter(|&i| set.contains_all(&self.edges[i]))
            .collect()
    }

    /// Induced sub-hypergraph on `set`, with vertices relabelled to
    /// `0..|set|` in ascending order. Returns the labelling as well.
    pub fn induced(&self, set: &VertexSet) -> (Hypergraph, Vec<usize>) {
        let labels = set.to_vec();
        let mut index = vec![usize::MAX; self.n];
        for (i, &v) in labels.iter().enumerate() {
            index[v] = i;
        }
        let edges = self
            .edges_within(set)
            .into_iter()
            .map(|i| self.edges[i].iter().map(|&v| index[v]).collect())
            .collect();
        (Hypergraph::from_sorted(labels.len(), self.k, edges), labels)
    }
}

/// A set of pairwise disjoint edges.
#[derive(Debug, Clone, Default, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(transparent)]
pub struct Matching {
    edges: Vec<Vec<usize>>,
}

impl Matching {
    pub fn new(edges: Vec<Vec<usize>>) -> Self {
        let mut m = Matching { edges: Vec::new() };
        for e in edges {
            m.push(e);
        }
        m
    }

    pub fn empty() -> Self {
        Matching::default()
    }

    pub fn push(&mut self, mut edge: Vec<usize>) {
        edge.sort_unstable();
        self.edges.push(edge);
    }

    pub fn extend(&mut self, other: &Matching) {
        self.edges.extend(other.edges.iter().cloned());
    }

    pub fn edges(&self) -> &[Vec<usize>] {
        &self.edges
    }

    pub fn into_edges(self) -> Vec<Vec<usize>> {
        self.edges
    }

    pub fn len(&self) -> usize {
        self.edges.len()
    }

    pub fn is_empty(&self) -> bool {
        self.edges.is_empty()
    }

    pub fn retain(&mut self, f: impl FnMut(&Vec<usize>) -> bool) {
        self.edges.retain(f);
    }

    /// Covered vertices as a set over `0..n`.
    pub fn vertices(&self, n: usize) -> VertexSet {
        VertexSet::from_iter(n, self.edges.iter().flatten().copied())
    }

    /// Edges sorted into canonical order.
    pub fn canonical(&self) -> Matching {
        let mut edges = self.edges.clone();
        edges.sort_unstable();
        Matching { edges }
    }
}

/// Outcome of a verification: either fine or a description of the first
/// violation found.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(tag = "status", content = "detail", rename_all = "snake_case")]
pub enum Report {
    Ok,
    Violation(String),
}

impl Report {
    pub fn is_ok(&self) -> bool {
        matches!(self, Report::Ok)
    }

    pub(crate) fn violation(msg: impl Into<String>) -> Self {
        Report::Violation(msg.into())
    }
}

/// Checks that `m` is a matching of `h` (and a perfect one if asked).
pub fn verify_matching(h: &Hypergraph, m: &Matching, require_perfect: bool) -> Report {
    let mut seen = vec![false; h.n()];
    for e in m.edges() {
        if let Some(&v) = e.iter().find(|&&v| v >= h.n()) {
            return Report::violation(format!("vertex {v} out of range"));
        }
        if !h.contains_edge(e) {
            return Report::violation(format!("{e:?} is not an edge"));
        }
        for &v in e {
            if seen[v] {
                return Report::violation(format!("vertex {v} reused"));
            }
            seen[v] = true;
        }
    }
    if require_perfect {
        let uncovered = seen.iter().filter(|&&s| !s).count();
        if uncovered > 0 {
            return Report::violation(format!("{uncovered} uncovered vertices"));
        }
    }
    Report::Ok
}
