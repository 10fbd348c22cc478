//! Index vectors, robust edge lattices and their coset groups.

use std::collections::BTreeMap;

use num_rational::Ratio;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::hypergraph::{Hypergraph, Matching};
use crate::vertex_set::VertexSet;

pub type IndexVector = Vec<i64>;

/// An ordered partition of the vertex set.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(try_from = "PartitionRepr", into = "PartitionRepr")]
pub struct Partition {
    n: usize,
    parts: Vec<Vec<usize>>,
    part_of: Vec<usize>,
}

#[derive(Serialize, Deserialize)]
struct PartitionRepr {
    n: usize,
    parts: Vec<Vec<usize>>,
}

impl TryFrom<PartitionRepr> for Partition {
    type Error = Error;

    fn try_from(r: PartitionRepr) -> Result<Self> {
        Partition::new(r.n, r.parts)
    }
}

impl From<Partition> for PartitionRepr {
    fn from(p: Partition) -> Self {
        PartitionRepr {
            n: p.n,
            parts: p.parts,
        }
    }
}

impl Partition {
    /// Parts must be nonempty, disjoint and cover `0..n`.
    pub fn new(n: usize, mut parts: Vec<Vec<usize>>) -> Result<Self> {
        let mut part_of = vec![usize::MAX; n];
        for (i, part) in parts.iter_mut().enumerate() {
            if part.is_empty() {
                return Err(Error::InvalidParameter(format!("part {i} is empty")));
            }
            part.sort_unstable();
            for &v in part.iter() {
                if v >= n || part_of[v] != usize::MAX {
                    return Err(Error::InvalidParameter(format!(
                        "vertex {v} repeated or out of range"
                    )));
                }
                part_of[v] = i;
            }
        }
        if n > 0 && parts.is_empty() {
            return Err(Error::InvalidParameter("no parts".into()));
        }
        if let Some(v) = part_of.iter().position(|&p| p == usize::MAX) {
            return Err(Error::InvalidParameter(format!("vertex {v} in no part")));
        }
        Ok(Partition { n, parts, part_of })
    }

    pub fn single(n: usize) -> Self {
        Partition {
            n,
            parts: if n == 0 { Vec::new() } else { vec![(0..n).collect()] },
            part_of: vec![0; n],
        }
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn d(&self) -> usize {
        self.parts.len()
    }

    pub fn parts(&self) -> &[Vec<usize>] {
        &self.parts
    }

    pub fn part_of(&self, v: usize) -> usize {
        self.part_of[v]
    }

    pub fn sizes(&self) -> IndexVector {
        self.parts.iter().map(|p| p.len() as i64).collect()
    }

    /// Index vector of a list of vertices.
    pub fn index_of(&self, vertices: &[usize]) -> IndexVector {
        let mut out = vec![0; self.d()];
        for &v in vertices {
            out[self.part_of[v]] += 1;
        }
        out
    }
}

/// `(|S ∩ V_1|, …, |S ∩ V_d|)`.
pub fn index_vector(p: &Partition, s: &VertexSet) -> IndexVector {
    p.index_of(&s.to_vec())
}

pub(crate) fn add(a: &mut [i64], b: &[i64]) {
    a.iter_mut().zip(b).for_each(|(x, y)| *x += y);
}

pub(crate) fn sub(a: &mut [i64], b: &[i64]) {
    a.iter_mut().zip(b).for_each(|(x, y)| *x -= y);
}

/// Index vectors realised by at least `μ·n^k` edges.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct RobustIndexSet {
    pub vectors: Vec<IndexVector>,
    /// Exact edge count of every index vector that occurs.
    pub counts: BTreeMap<IndexVector, usize>,
    pub mu: Ratio<u64>,
}

pub fn robust_index_set(h: &Hypergraph, p: &Partition, mu: Ratio<u64>) -> RobustIndexSet {
    let counts = h
        .edges()
        .par_iter()
        .fold(BTreeMap::new, |mut acc: BTreeMap<IndexVector, usize>, e| {
            *acc.entry(p.index_of(e)).or_default() += 1;
            acc
        })
        .reduce(BTreeMap::new, |mut a, b| {
            for (key, c) in b {
                *a.entry(key).or_default() += c;
            }
            a
        });
    let threshold = (*mu.numer() as u128) * (h.n() as u128).pow(h.k() as u32);
    let vectors = counts
        .iter()
        .filter(|&(_, &c)| c as u128 * *mu.denom() as u128 >= threshold)
        .map(|(v, _)| v.clone())
        .collect();
    RobustIndexSet {
        vectors,
        counts,
        mu,
    }
}

/// Integer lattice in Hermite normal form. Rows are generators; the matrix
/// is upper echelon with positive pivots and entries above each pivot
/// reduced into `[0, pivot)`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct EdgeLattice {
    d: usize,
    basis: Vec<Vec<i64>>,
    pivots: Vec<usize>,
    /// `basis[i] = Σ_j transform[i][j]·generators[j]`.
    transform: Vec<Vec<i64>>,
    /// Integer relations among the generators.
    relations: Vec<Vec<i64>>,
    generators: Vec<IndexVector>,
}

impl EdgeLattice {
    pub fn new(d: usize, generators: &[IndexVector]) -> Self {
        let g = generators.len();
        let mut rows: Vec<(Vec<i64>, Vec<i64>)> = generators
            .iter()
            .enumerate()
            .map(|(i, v)| {
                assert_eq!(v.len(), d, "generator dimension");
                let mut u = vec![0; g];
                u[i] = 1;
                (v.clone(), u)
            })
            .collect();
        let mut pivots = Vec::new();
        let mut top = 0;
        for col in 0..d {
            loop {
                let nonzero: Vec<usize> = (top..rows.len()).filter(|&r| rows[r].0[col] != 0).collect();
                if nonzero.is_empty() {
                    break;
                }
                let best = *nonzero
                    .iter()
                    .min_by_key(|&&r| rows[r].0[col].abs())
                    .expect("nonempty");
                rows.swap(top, best);
                let mut done = true;
                for r in top + 1..rows.len() {
                    let q = rows[r].0[col] / rows[top].0[col];
                    if q != 0 {
                        let (head, tail) = rows.split_at_mut(r);
                        let pivot = &head[top];
                        axpy(&mut tail[0].0, -q, &pivot.0);
                        axpy(&mut tail[0].1, -q, &pivot.1);
                    }
                    if rows[r].0[col] != 0 {
                        done = false;
                    }
                }
                if done {
                    break;
                }
            }
            if top < rows.len() && rows[top].0[col] != 0 {
                if rows[top].0[col] < 0 {
                    rows[top].0.iter_mut().for_each(|x| *x = -*x);
                    rows[top].1.iter_mut().for_each(|x| *x = -*x);
                }
                let p = rows[top].0[col];
                for r in 0..top {
                    let q = rows[r].0[col].div_euclid(p);
                    if q != 0 {
                        let (head, tail) = rows.split_at_mut(top);
                        axpy(&mut head[r].0, -q, &tail[0].0);
                        axpy(&mut head[r].1, -q, &tail[0].1);
                    }
                }
                pivots.push(col);
                top += 1;
            }
        }
        let relations = rows[top..].iter().map(|(_, u)| u.clone()).collect();
        rows.truncate(top);
        let (basis, transform) = rows.into_iter().unzip();
        EdgeLattice {
            d,
            basis,
            pivots,
            transform,
            relations,
            generators: generators.to_vec(),
        }
    }

    pub fn from_robust(d: usize, robust: &RobustIndexSet) -> Self {
        EdgeLattice::new(d, &robust.vectors)
    }

    pub fn dim(&self) -> usize {
        self.d
    }

    pub fn basis(&self) -> &[Vec<i64>] {
        &self.basis
    }

    pub fn generators(&self) -> &[IndexVector] {
        &self.generators
    }

    pub fn rank(&self) -> usize {
        self.basis.len()
    }

    /// Coefficients of `v` in the HNF basis, or `None` if `v ∉ L`.
    fn solve(&self, v: &[i64]) -> Option<Vec<i64>> {
        assert_eq!(v.len(), self.d, "dimension mismatch");
        let mut rest = v.to_vec();
        let mut coeffs = vec![0; self.basis.len()];
        let mut next = 0;
        for col in 0..self.d {
            if next < self.pivots.len() && self.pivots[next] == col {
                let p = self.basis[next][col];
                if rest[col] % p != 0 {
                    return None;
                }
                let q = rest[col] / p;
                axpy(&mut rest, -q, &self.basis[next]);
                coeffs[next] = q;
                next += 1;
            } else if rest[col] != 0 {
                return None;
            }
        }
        Some(coeffs)
    }

    pub fn contains(&self, v: &[i64]) -> bool {
        self.solve(v).is_some()
    }

    /// Canonical representative of `v + L`: the unique point of the pivot
    /// box `0 ≤ x_c < pivot_c` (pivot columns only) in the coset.
    pub fn reduce(&self, v: &[i64]) -> Vec<i64> {
        let mut rest = v.to_vec();
        for (row, &col) in self.basis.iter().zip(&self.pivots) {
            let q = rest[col].div_euclid(row[col]);
            axpy(&mut rest, -q, row);
        }
        rest
    }

    /// Writes `v = Σ a_j·g_j` over the generators with every `|a_j| ≤ cap`,
    /// reducing a particular solution by generator relations. `None` if `v`
    /// is outside `L` or no small enough combination was found.
    pub fn decompose(&self, v: &[i64], cap: i64) -> Option<Vec<i64>> {
        let coeffs = self.solve(v)?;
        let mut a = vec![0i64; self.generators.len()];
        for (q, row) in coeffs.iter().zip(&self.transform) {
            axpy(&mut a, *q, row);
        }
        let norm = |a: &[i64]| -> (i64, i64) {
            (
                a.iter().map(|x| x.abs()).max().unwrap_or(0),
                a.iter().map(|x| x.abs()).sum(),
            )
        };
        let mut current = norm(&a);
        loop {
            let mut improved = false;
            for rel in &self.relations {
                for sign in [1, -1] {
                    let mut b = a.clone();
                    axpy(&mut b, sign, rel);
                    let nb = norm(&b);
                    if nb < current {
                        a = b;
                        current = nb;
                        improved = true;
                    }
                }
            }
            if !improved {
                break;
            }
        }
        let mut check = vec![0; self.d];
        for (c, g) in a.iter().zip(&self.generators) {
            axpy(&mut check, *c, g);
        }
        assert_eq!(check, v, "decomposition identity");
        (current.0 <= cap).then_some(a)
    }
}

fn axpy(y: &mut [i64], a: i64, x: &[i64]) {
    y.iter_mut().zip(x).for_each(|(y, x)| *y += a * x);
}

/// Diagonal of the Smith normal form of the lattice basis (the invariant
/// factors of `Z^d / L`, zero for missing rank).
pub fn smith_invariants(l: &EdgeLattice) -> Vec<i64> {
    let d = l.dim();
    let mut m: Vec<Vec<i64>> = l.basis().to_vec();
    while m.len() < d {
        m.push(vec![0; d]);
    }
    for t in 0..d {
        loop {
            let pos = (t..d)
                .flat_map(|r| (t..d).map(move |c| (r, c)))
                .filter(|&(r, c)| m[r][c] != 0)
                .min_by_key(|&(r, c)| m[r][c].abs());
            let Some((r, c)) = pos else { break };
            m.swap(t, r);
            m.iter_mut().for_each(|row| row.swap(t, c));
            let p = m[t][t];
            let mut clean = true;
            for r in t + 1..d {
                let q = m[r][t] / p;
                let pivot = m[t].clone();
                axpy(&mut m[r], -q, &pivot);
                clean &= m[r][t] == 0;
            }
            for c in t + 1..d {
                let q = m[t][c] / p;
                for row in m.iter_mut() {
                    row[c] -= q * row[t];
                }
                clean &= m[t][c] == 0;
            }
            if clean {
                // Enforce divisibility of the remaining block.
                let bad = (t + 1..d)
                    .flat_map(|r| (t + 1..d).map(move |c| (r, c)))
                    .find(|&(r, c)| m[r][c] % p != 0);
                match bad {
                    Some((r, _)) => {
                        let row = m[r].clone();
                        axpy(&mut m[t], 1, &row);
                    }
                    None => break,
                }
            }
        }
    }
    (0..d).map(|i| m[i][i].abs()).collect()
}

/// The quotient `L_max / L` with `L_max = {x : k | Σx}`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct CosetGroup {
    /// `None` if the group is infinite.
    pub size: Option<u64>,
    /// Canonical coset representatives (see [`EdgeLattice::reduce`]),
    /// listed when the group is finite and small.
    pub representatives: Vec<IndexVector>,
    pub invariants: Vec<i64>,
}

pub fn coset_group(k: usize, l: &EdgeLattice) -> Result<CosetGroup> {
    let k = k as i64;
    if let Some(row) = l.basis().iter().find(|r| r.iter().sum::<i64>() % k != 0) {
        return Err(Error::InvalidParameter(format!(
            "lattice vector {row:?} outside L_max"
        )));
    }
    let invariants = smith_invariants(l);
    if l.rank() < l.dim() {
        return Ok(CosetGroup {
            size: None,
            representatives: Vec::new(),
            invariants,
        });
    }
    let det: i64 = l.basis().iter().zip(&l.pivots).map(|(r, &c)| r[c]).product();
    let snf_det: i64 = invariants.iter().product();
    assert_eq!(det, snf_det, "HNF and SNF determinants disagree");
    let size = (det / k) as u64;
    let mut representatives = Vec::new();
    if det <= 1_000_000 {
        let bounds: Vec<i64> = l.basis().iter().zip(&l.pivots).map(|(r, &c)| r[c]).collect();
        let mut x = vec![0i64; l.dim()];
        loop {
            if x.iter().sum::<i64>() % k == 0 {
                representatives.push(x.clone());
            }
            let mut i = 0;
            while i < x.len() {
                x[i] += 1;
                if x[i] < bounds[i] {
                    break;
                }
                x[i] = 0;
                i += 1;
            }
            if i == x.len() {
                break;
            }
        }
        assert_eq!(representatives.len() as u64, size, "coset count");
    }
    Ok(CosetGroup {
        size: Some(size),
        representatives,
        invariants,
    })
}

/// Index vector of the vertices a matching leaves uncovered.
pub fn residual_index(p: &Partition, m: &Matching) -> IndexVector {
    let mut r = p.sizes();
    for e in m.edges() {
        sub(&mut r, &p.index_of(e));
    }
    r
}

/// Shrinks a matching whose residual index lies in `L` to at most `k`
/// edges, keeping the residual in `L`, by deleting runs of edges whose
/// index vectors sum into `L`.
pub fn coset_reduce_matching(m: &Matching, p: &Partition, l: &EdgeLattice, k: usize) -> Result<Matching> {
    if !l.contains(&residual_index(p, m)) {
        return Err(Error::Precondition("residual index not in the lattice".into()));
    }
    let mut edges: Vec<Vec<usize>> = m.edges().to_vec();
    while edges.len() > k {
        let mut seen: Vec<Vec<i64>> = Vec::with_capacity(k + 1);
        let mut sum = vec![0; p.d()];
        let mut cut = None;
        seen.push(l.reduce(&sum));
        for j in 0..k {
            add(&mut sum, &p.index_of(&edges[j]));
            let key = l.reduce(&sum);
            if let Some(i) = seen.iter().position(|s| *s == key) {
                cut = Some((i, j + 1));
                break;
            }
            seen.push(key);
        }
        let Some((from, to)) = cut else {
            return Err(Error::pipeline("lattice", "coset group too large"));
        };
        edges.drain(from..to);
    }
    let out = Matching::new(edges);
    assert!(l.contains(&residual_index(p, &out)), "residual left the lattice");
    Ok(out)
}

/// Searches for a matching `M₁` of at most `k` edges with residual index in
/// `L`. Multisets of edge index vectors are screened by the lattice test
/// first, smallest first, and each survivor is realised by backtracking
/// over disjoint edges. `Ok(None)` is exhaustive; running out of `node_budget`
/// is an error.
pub fn find_divisible_small_matching(
    h: &Hypergraph,
    p: &Partition,
    l: &EdgeLattice,
    node_budget: u64,
) -> Result<Option<Matching>> {
    let k = h.k();
    let target = p.sizes();
    let mut by_type: BTreeMap<IndexVector, Vec<usize>> = BTreeMap::new();
    for (i, e) in h.edges().iter().enumerate() {
        by_type.entry(p.index_of(e)).or_default().push(i);
    }
    let types: Vec<(&IndexVector, &Vec<usize>)> = by_type.iter().collect();
    let mut nodes = 0u64;
    for size in 0..=k {
        let mut choice = vec![0usize; size];
        loop {
            let mut rest = target.clone();
            for &t in &choice {
                sub(&mut rest, types[t].0);
            }
            if rest.iter().all(|&x| x >= 0) && l.contains(&rest) {
                let mut used = vec![false; h.n()];
                let mut picked = Vec::with_capacity(size);
                if realize(h, &types, &choice, 0, &mut used, &mut picked, &mut nodes, node_budget)? {
                    let m = Matching::new(picked.iter().map(|&i| h.edge(i).to_vec()).collect());
                    return Ok(Some(m));
                }
            }
            if !next_multiset(&mut choice, types.len()) {
                break;
            }
        }
    }
    Ok(None)
}

fn next_multiset(choice: &mut [usize], types: usize) -> bool {
    if types == 0 {
        return false;
    }
    let len = choice.len();
    for i in (0..len).rev() {
        if choice[i] + 1 < types {
            let v = choice[i] + 1;
            choice[i..].iter_mut().for_each(|c| *c = v);
            return true;
        }
    }
    false
}

#[allow(clippy::too_many_arguments)]
fn realize(
    h: &Hypergraph,
    types: &[(&IndexVector, &Vec<usize>)],
    choice: &[usize],
    slot: usize,
    used: &mut [bool],
    picked: &mut Vec<usize>,
    nodes: &mut u64,
    budget: u64,
) -> Result<bool> {
    if slot == choice.len() {
        return Ok(true);
    }
    let t = choice[slot];
    // Same-type slots take increasing edge indices.
    let floor = if slot > 0 && choice[slot - 1] == t {
        picked[slot - 1] + 1
    } else {
        0
    };
    for &ei in types[t].1.iter().filter(|&&ei| ei >= floor) {
        *nodes += 1;
        if *nodes > budget {
            return Err(Error::OracleBudget(format!(
                "small-matching realisation exceeded {budget} nodes"
            )));
        }
        let e = h.edge(ei);
        if e.iter().any(|&v| used[v]) {
            continue;
        }
        e.iter().for_each(|&v| used[v] = true);
        picked.push(ei);
        if realize(h, types, choice, slot + 1, used, picked, nodes, budget)? {
            return Ok(true);
        }
        picked.pop();
        e.iter().for_each(|&v| used[v] = false);
    }
    Ok(false)
}
