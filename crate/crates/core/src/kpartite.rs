//! Perfect matchings in near-complete k-partite k-graphs, and the bipartite
//! matcher they reduce to.

use std::collections::VecDeque;

use fixedbitset::FixedBitSet;
use rand::seq::index::sample;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use crate::derandomize::{select_set, ConflictInstance, Conflicts, SelectMode};
use crate::error::{Error, Result};
use crate::hypergraph::{Hypergraph, Matching};

/// Above this many transversal (k-1)-sets the candidate family is sampled.
const TAIL_BUDGET: usize = 250_000;

/// A k-partite k-graph with parts of equal size `n_part`. Edges are
/// transversal tuples, stored as a bitset indexed by the mixed-radix code
/// `((i_1·n + i_2)·n + …)·n + i_k` of local indices.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct KPartiteGraph {
    k: usize,
    n_part: usize,
    present: FixedBitSet,
    /// `parts[i][j]` is the host vertex of local index `j` in part `i`.
    parts: Vec<Vec<usize>>,
}

impl KPartiteGraph {
    pub fn complete(k: usize, n_part: usize) -> Self {
        let mut g = KPartiteGraph::empty(k, n_part);
        g.present.insert_range(..);
        g
    }

    pub fn empty(k: usize, n_part: usize) -> Self {
        let parts = (0..k)
            .map(|i| (i * n_part..(i + 1) * n_part).collect())
            .collect();
        KPartiteGraph {
            k,
            n_part,
            present: FixedBitSet::with_capacity(n_part.pow(k as u32)),
            parts,
        }
    }

    /// The k-partite subgraph of `h` between the given parts, which must be
    /// disjoint, of equal size and `k = h.k()` in number.
    pub fn from_host(h: &Hypergraph, parts: Vec<Vec<usize>>) -> Result<Self> {
        let k = h.k();
        if parts.len() != k {
            return Err(Error::InvalidParameter(format!(
                "need {k} parts, got {}",
                parts.len()
            )));
        }
        let n_part = parts[0].len();
        if parts.iter().any(|p| p.len() != n_part) {
            return Err(Error::InvalidParameter("parts must have equal size".into()));
        }
        let mut place = vec![None; h.n()];
        for (i, part) in parts.iter().enumerate() {
            for (j, &v) in part.iter().enumerate() {
                if v >= h.n() || place[v].is_some() {
                    return Err(Error::InvalidParameter(format!(
                        "vertex {v} repeated or out of range"
                    )));
                }
                place[v] = Some((i, j));
            }
        }
        let mut present = FixedBitSet::with_capacity(n_part.pow(k as u32));
        let mut local = vec![usize::MAX; k];
        'edges: for e in h.edges() {
            local.fill(usize::MAX);
            for &v in e {
                match place[v] {
                    Some((i, j)) if local[i] == usize::MAX => local[i] = j,
                    _ => continue 'edges,
                }
            }
            let code = local.iter().fold(0, |acc, &j| acc * n_part + j);
            present.insert(code);
        }
        Ok(KPartiteGraph {
            k,
            n_part,
            present,
            parts,
        })
    }

    pub fn k(&self) -> usize {
        self.k
    }

    pub fn n_part(&self) -> usize {
        self.n_part
    }

    pub fn parts(&self) -> &[Vec<usize>] {
        &self.parts
    }

    pub fn tuple_count(&self) -> usize {
        self.present.len()
    }

    pub fn edge_count(&self) -> usize {
        self.present.count_ones(..)
    }

    fn rest(&self) -> usize {
        self.n_part.pow((self.k - 1) as u32)
    }

    pub fn has_code(&self, code: usize) -> bool {
        self.present.contains(code)
    }

    pub fn remove_code(&mut self, code: usize) {
        self.present.set(code, false);
    }

    /// Local indices of a tuple code, part by part.
    pub fn decode(&self, mut code: usize) -> Vec<usize> {
        let mut out = vec![0; self.k];
        for slot in out.iter_mut().rev() {
            *slot = code % self.n_part;
            code /= self.n_part;
        }
        out
    }

    fn host_edge(&self, code: usize) -> Vec<usize> {
        let mut e: Vec<usize> = self
            .decode(code)
            .into_iter()
            .enumerate()
            .map(|(i, j)| self.parts[i][j])
            .collect();
        e.sort_unstable();
        e
    }

    /// The graph as a plain hypergraph on `k·n_part` vertices, vertex
    /// `i·n_part + j` being local index `j` of part `i`.
    pub fn to_hypergraph(&self) -> Hypergraph {
        let edges = self
            .present
            .ones()
            .map(|code| {
                self.decode(code)
                    .into_iter()
                    .enumerate()
                    .map(|(i, j)| i * self.n_part + j)
                    .collect()
            })
            .collect();
        Hypergraph::from_edges_unchecked(self.k * self.n_part, self.k, edges)
    }

    /// `(δ_{1}, δ_{[k]∖{1}})`: least degree of a part-1 vertex and least
    /// degree of a transversal set over the other parts.
    pub fn min_degrees(&self) -> (usize, usize) {
        let rest = self.rest();
        let mut first = vec![0usize; self.n_part];
        let mut tail = vec![0usize; rest];
        for code in self.present.ones() {
            first[code / rest] += 1;
            tail[code % rest] += 1;
        }
        (
            first.into_iter().min().unwrap_or(0),
            tail.into_iter().min().unwrap_or(0),
        )
    }
}

/// An unweighted bipartite graph; `adj[l]` lists the right neighbours of
/// left vertex `l`.
#[derive(Debug, Clone, Default)]
pub struct BipartiteGraph {
    pub left: usize,
    pub right: usize,
    pub adj: Vec<Vec<usize>>,
}

impl BipartiteGraph {
    pub fn new(left: usize, right: usize) -> Self {
        BipartiteGraph {
            left,
            right,
            adj: vec![Vec::new(); left],
        }
    }

    pub fn add_edge(&mut self, l: usize, r: usize) {
        assert!(l < self.left && r < self.right);
        self.adj[l].push(r);
    }
}

/// Maximum matching by Hopcroft–Karp, as `(left, right)` pairs sorted by
/// left vertex.
pub fn bipartite_max_matching(g: &BipartiteGraph) -> Vec<(usize, usize)> {
    const FREE: usize = usize::MAX;
    let mut mate_l = vec![FREE; g.left];
    let mut mate_r = vec![FREE; g.right];
    let mut dist = vec![0usize; g.left];
    loop {
        // Layer the free left vertices.
        let mut queue = VecDeque::new();
        for l in 0..g.left {
            if mate_l[l] == FREE {
                dist[l] = 0;
                queue.push_back(l);
            } else {
                dist[l] = usize::MAX;
            }
        }
        let mut found = false;
        while let Some(l) = queue.pop_front() {
            for &r in &g.adj[l] {
                match mate_r[r] {
                    FREE => found = true,
                    m if dist[m] == usize::MAX => {
                        dist[m] = dist[l] + 1;
                        queue.push_back(m);
                    }
                    _ => {}
                }
            }
        }
        if !found {
            break;
        }
        let mut next = vec![0usize; g.left];
        for l in 0..g.left {
            if mate_l[l] == FREE {
                augment(g, l, &mut mate_l, &mut mate_r, &mut dist, &mut next);
            }
        }
    }
    mate_l
        .iter()
        .enumerate()
        .filter(|(_, &r)| r != FREE)
        .map(|(l, &r)| (l, r))
        .collect()
}

fn augment(
    g: &BipartiteGraph,
    start: usize,
    mate_l: &mut [usize],
    mate_r: &mut [usize],
    dist: &mut [usize],
    next: &mut [usize],
) -> bool {
    // Iterative DFS along the layered graph.
    let mut stack = vec![start];
    let mut via: Vec<usize> = Vec::new();
    while let Some(&l) = stack.last() {
        if next[l] == g.adj[l].len() {
            dist[l] = usize::MAX;
            stack.pop();
            via.pop();
            continue;
        }
        let r = g.adj[l][next[l]];
        next[l] += 1;
        let m = mate_r[r];
        if m == usize::MAX {
            via.push(r);
            for (&l, &r) in stack.iter().zip(via.iter()) {
                mate_l[l] = r;
                mate_r[r] = l;
            }
            return true;
        }
        if dist[m] == dist[l] + 1 {
            via.push(r);
            stack.push(m);
        }
    }
    false
}

/// Diagnostics of a k-partite matching run.
#[derive(Debug, Clone)]
pub struct KPartiteRun {
    /// Perfect matching, in host vertex labels.
    pub matching: Matching,
    pub reserve_size: usize,
    pub low_degree: usize,
    pub low_degree_bound: f64,
    pub selection_ok: bool,
    /// The staged matching got stuck and one bipartite matching over all
    /// transversal sets was used instead.
    pub repaired: bool,
}

/// Perfect matching of a k-partite k-graph with
/// `δ_{1} ≥ (1-γ)·n^{k-1}` and `δ_{[k]∖{1}} ≥ (1-γ)·n`.
///
/// A reserve `R` of disjoint transversal (k-1)-sets is selected so that
/// every part-1 vertex sees many of them. The rest of parts 2..k is cut
/// into (k-1)-sets in index order; part-1 vertices of low degree to those
/// sets are matched into `R` first, the rest of `R` is matched greedily,
/// and what remains is a bipartite perfect matching.
pub fn kpartite_pm(g: &KPartiteGraph, gamma: f64, mode: SelectMode) -> Result<KPartiteRun> {
    let n = g.n_part;
    let k = g.k;
    if k < 2 {
        return Err(Error::InvalidParameter(format!("k = {k} < 2")));
    }
    if n == 0 {
        return Ok(KPartiteRun {
            matching: Matching::empty(),
            reserve_size: 0,
            low_degree: 0,
            low_degree_bound: 0.0,
            selection_ok: true,
            repaired: false,
        });
    }
    let rest = g.rest();
    let (d1, drest) = g.min_degrees();
    const TOL: f64 = 1e-9;
    if (d1 as f64) + TOL < (1.0 - gamma) * rest as f64 || (drest as f64) + TOL < (1.0 - gamma) * n as f64 {
        return Err(Error::Precondition(format!(
            "degrees ({d1}, {drest}) below (1-γ)·({rest}, {n}) with γ = {gamma}"
        )));
    }

    // Candidate transversal (k-1)-sets, by tail code.
    let tails: Vec<usize> = if rest <= TAIL_BUDGET {
        (0..rest).collect()
    } else {
        let mut rng = ChaCha8Rng::seed_from_u64(rest as u64);
        let mut t = sample(&mut rng, rest, TAIL_BUDGET).into_vec();
        t.sort_unstable();
        t
    };
    let tail_vertices = |tail: usize| -> Vec<usize> {
        // Element ids (part-1)·n + local, parts 2..k.
        let mut out = vec![0; k - 1];
        let mut code = tail;
        for i in (0..k - 1).rev() {
            out[i] = i * n + code % n;
            code /= n;
        }
        out
    };
    let cover: Vec<Vec<usize>> = (0..n)
        .map(|u| {
            tails
                .iter()
                .enumerate()
                .filter(|&(_, &t)| g.has_code(u * rest + t))
                .map(|(w, _)| w)
                .collect()
        })
        .collect();
    let inst = ConflictInstance {
        cover,
        candidates: tails.len(),
        conflicts: Conflicts::SharedElements(tails.iter().map(|&t| tail_vertices(t)).collect()),
        beta: 1.0 - gamma,
        tau: 0.25,
        r: ((4.0 * gamma * n as f64).ceil() as usize).min(n),
    };
    let selection = select_set(&inst, mode);
    let reserve: Vec<usize> = selection.chosen.iter().map(|&w| tails[w]).collect();

    // Cut the remaining vertices of parts 2..k into transversal sets.
    let mut used = vec![vec![false; n]; k - 1];
    for &t in &reserve {
        for (i, x) in tail_vertices(t).into_iter().enumerate() {
            used[i][x - i * n] = true;
        }
    }
    let leftovers: Vec<Vec<usize>> = used
        .iter()
        .map(|u| (0..n).filter(|&j| !u[j]).collect())
        .collect();
    let free_sets = n - reserve.len();
    let sets: Vec<usize> = (0..free_sets)
        .map(|s| leftovers.iter().fold(0, |acc, part| acc * n + part[s]))
        .collect();

    let half = free_sets as f64 / 2.0;
    let low: Vec<usize> = (0..n)
        .filter(|&u| {
            let deg = sets.iter().filter(|&&t| g.has_code(u * rest + t)).count();
            (deg as f64) < half
        })
        .collect();
    let low_bound = 2.0 * gamma * n as f64;
    if low.len() as f64 > low_bound {
        return Err(Error::pipeline(
            "kpartite",
            format!("{} low-degree vertices exceed 2γn = {low_bound:.2}", low.len()),
        ));
    }

    let staged = staged_pairs(g, &low, &reserve, &sets);
    let repaired = staged.is_none();
    let pairs = match staged {
        Some(pairs) => pairs,
        None => {
            let all: Vec<usize> = reserve.iter().chain(&sets).copied().collect();
            let everyone: Vec<usize> = (0..n).collect();
            perfect_pairs(g, &everyone, &all).ok_or_else(|| {
                Error::pipeline("kpartite", "no perfect matching between part 1 and the transversal sets")
            })?
        }
    };

    let mut matching = Matching::empty();
    let mut covered = vec![false; k * n];
    for &(u, t) in &pairs {
        let code = u * rest + t;
        if !g.has_code(code) {
            return Err(Error::pipeline("kpartite", "matched a non-edge"));
        }
        for (i, j) in g.decode(code).into_iter().enumerate() {
            if std::mem::replace(&mut covered[i * n + j], true) {
                return Err(Error::pipeline("kpartite", "matching reuses a vertex"));
            }
        }
        matching.push(g.host_edge(code));
    }
    if covered.iter().any(|&c| !c) {
        return Err(Error::pipeline("kpartite", "matching is not perfect"));
    }
    Ok(KPartiteRun {
        matching: matching.canonical(),
        reserve_size: reserve.len(),
        low_degree: low.len(),
        low_degree_bound: low_bound,
        selection_ok: selection.is_ok(),
        repaired,
    })
}

/// Perfect matching between `vertices` of part 1 and the tails `tails`.
fn perfect_pairs(g: &KPartiteGraph, vertices: &[usize], tails: &[usize]) -> Option<Vec<(usize, usize)>> {
    let rest = g.rest();
    let mut bip = BipartiteGraph::new(vertices.len(), tails.len());
    for (l, &u) in vertices.iter().enumerate() {
        for (r, &t) in tails.iter().enumerate() {
            if g.has_code(u * rest + t) {
                bip.add_edge(l, r);
            }
        }
    }
    let bm = bipartite_max_matching(&bip);
    (bm.len() == vertices.len() && bm.len() == tails.len())
        .then(|| bm.into_iter().map(|(l, r)| (vertices[l], tails[r])).collect())
}

/// Low-degree vertices into the reserve, the rest of the reserve
/// greedily, then a bipartite perfect matching onto the cut sets. `None`
/// when a greedy step finds no partner.
fn staged_pairs(g: &KPartiteGraph, low: &[usize], reserve: &[usize], sets: &[usize]) -> Option<Vec<(usize, usize)>> {
    let n = g.n_part;
    let rest = g.rest();
    let mut pairs: Vec<(usize, usize)> = Vec::with_capacity(n);
    let mut v_used = vec![false; n];
    let mut r_used = vec![false; reserve.len()];
    for &u in low {
        let i = (0..reserve.len()).find(|&i| !r_used[i] && g.has_code(u * rest + reserve[i]))?;
        r_used[i] = true;
        v_used[u] = true;
        pairs.push((u, reserve[i]));
    }
    for i in 0..reserve.len() {
        if r_used[i] {
            continue;
        }
        let u = (0..n).find(|&u| !v_used[u] && g.has_code(u * rest + reserve[i]))?;
        r_used[i] = true;
        v_used[u] = true;
        pairs.push((u, reserve[i]));
    }
    let remaining: Vec<usize> = (0..n).filter(|&u| !v_used[u]).collect();
    pairs.extend(perfect_pairs(g, &remaining, sets)?);
    Some(pairs)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::hypergraph::verify_matching;
    use crate::instances::gen_kpartite_dense;

    #[test]
    fn hopcroft_karp_examples() {
        let mut full = BipartiteGraph::new(5, 5);
        for l in 0..5 {
            for r in 0..5 {
                full.add_edge(l, r);
            }
        }
        assert_eq!(bipartite_max_matching(&full).len(), 5);

        let mut path = BipartiteGraph::new(2, 2);
        path.add_edge(0, 0);
        path.add_edge(1, 0);
        path.add_edge(1, 1);
        assert_eq!(bipartite_max_matching(&path), vec![(0, 0), (1, 1)]);

        assert!(bipartite_max_matching(&BipartiteGraph::new(3, 4)).is_empty());
    }

    #[test]
    fn complete_tripartite() {
        let g = KPartiteGraph::complete(3, 5);
        let run = kpartite_pm(&g, 0.05, SelectMode::Deterministic).unwrap();
        let h = g.to_hypergraph();
        assert!(verify_matching(&h, &run.matching, true).is_ok());
    }

    #[test]
    fn dense_tripartite() {
        let g = gen_kpartite_dense(3, 30, 0.05, 7).unwrap();
        let run = kpartite_pm(&g, 0.05, SelectMode::Deterministic).unwrap();
        assert!(verify_matching(&g.to_hypergraph(), &run.matching, true).is_ok());
        assert!(run.low_degree as f64 <= run.low_degree_bound);
    }

    #[test]
    fn degree_precondition_enforced() {
        let mut g = KPartiteGraph::complete(3, 4);
        for code in 0..16 {
            g.remove_code(code);
        }
        let err = kpartite_pm(&g, 0.05, SelectMode::Deterministic).unwrap_err();
        assert!(matches!(err, Error::Precondition(_)));
    }

    #[test]
    fn from_host_round_trip() {
        let g = gen_kpartite_dense(3, 6, 0.1, 2).unwrap();
        let h = g.to_hypergraph();
        let parts: Vec<Vec<usize>> = (0..3).map(|i| (i * 6..(i + 1) * 6).collect()).collect();
        let back = KPartiteGraph::from_host(&h, parts).unwrap();
        assert_eq!(back, g);
    }
}
