//! Exhaustive ground truth for small vertex sets.
//!
//! Up to `max_vertices` vertices the answer comes from a DP over bitmasks of
//! the vertex set; beyond that a depth-first branch-and-bound runs under a
//! node budget. Exceeding the budget is an error, never a guess.

use std::collections::HashMap;
use std::sync::Mutex;

use crate::error::{Error, Result};
use crate::hypergraph::{Hypergraph, Matching};
use crate::vertex_set::VertexSet;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct OracleBudget {
    /// Largest vertex set handled by the subset DP.
    pub max_vertices: usize,
    /// Node limit for the branch-and-bound fallback.
    pub max_nodes: u64,
}

impl Default for OracleBudget {
    fn default() -> Self {
        OracleBudget {
            max_vertices: 24,
            max_nodes: 5_000_000,
        }
    }
}

#[derive(Debug, Default)]
pub struct Oracle {
    budget: OracleBudget,
    memo: Mutex<HashMap<(u64, VertexSet), bool>>,
}

impl Oracle {
    pub fn new(budget: OracleBudget) -> Self {
        assert!(budget.max_vertices > 0 && budget.max_nodes > 0, "oracle budget must be positive");
        assert!(budget.max_vertices <= 30, "subset DP is limited to 30 vertices");
        Oracle {
            budget,
            memo: Mutex::new(HashMap::new()),
        }
    }

    pub fn budget(&self) -> OracleBudget {
        self.budget
    }

    /// A maximum matching of `H[u]`; the lexicographically least one when the
    /// subset DP is used.
    pub fn exact_max_matching(&self, h: &Hypergraph, u: &VertexSet) -> Result<Matching> {
        // Vertices on no edge of H[u] never matter.
        let within = h.edges_within(u);
        let active = VertexSet::from_iter(h.n(), within.iter().flat_map(|&i| h.edge(i).iter().copied()));
        if active.len() <= self.budget.max_vertices {
            let dp = SubsetDp::new(h, &active);
            Ok(dp.max_matching())
        } else {
            let mut search = Search::new(h, &active, self.budget.max_nodes);
            search.run(None)?;
            Ok(search.best)
        }
    }

    /// Whether `H[t]` has a perfect matching. Memoized per `(H, t)`.
    pub fn has_pm_on(&self, h: &Hypergraph, t: &VertexSet) -> Result<bool> {
        if t.len() % h.k() != 0 {
            return Err(Error::Precondition(format!(
                "|T| = {} not divisible by k = {}",
                t.len(),
                h.k()
            )));
        }
        let key = (h.fingerprint(), t.clone());
        if let Some(&hit) = self.memo.lock().expect("memo poisoned").get(&key) {
            return Ok(hit);
        }
        let found = self.perfect_matching_on(h, t)?.is_some();
        self.memo.lock().expect("memo poisoned").insert(key, found);
        Ok(found)
    }

    /// A perfect matching of `H[t]`, if any.
    pub fn perfect_matching_on(&self, h: &Hypergraph, t: &VertexSet) -> Result<Option<Matching>> {
        if t.len() % h.k() != 0 {
            return Ok(None);
        }
        if t.is_empty() {
            return Ok(Some(Matching::empty()));
        }
        if t.len() <= self.budget.max_vertices {
            Ok(SubsetDp::new(h, t).perfect_matching())
        } else {
            let mut search = Search::new(h, t, self.budget.max_nodes);
            search.run(Some(t.len() / h.k()))?;
            Ok((search.best.len() * h.k() == t.len()).then_some(search.best))
        }
    }

    /// Some matching of exactly `r` edges inside `H[u]`, if one exists.
    pub fn matching_of_size(&self, h: &Hypergraph, u: &VertexSet, r: usize) -> Result<Option<Matching>> {
        if r == 0 {
            return Ok(Some(Matching::empty()));
        }
        let within = h.edges_within(u);
        let active = VertexSet::from_iter(h.n(), within.iter().flat_map(|&i| h.edge(i).iter().copied()));
        if active.len() < r * h.k() {
            return Ok(None);
        }
        let best = if active.len() <= self.budget.max_vertices {
            SubsetDp::new(h, &active).max_matching()
        } else {
            let mut search = Search::new(h, &active, self.budget.max_nodes);
            search.run(Some(r))?;
            search.best
        };
        if best.len() >= r {
            let mut edges = best.into_edges();
            edges.truncate(r);
            Ok(Some(Matching::new(edges)))
        } else {
            Ok(None)
        }
    }
}

/// Maximum matching of `H[u]` with the default budget.
pub fn exact_max_matching(h: &Hypergraph, u: &VertexSet) -> Result<Matching> {
    Oracle::default_budget().exact_max_matching(h, u)
}

/// Perfect-matching existence on `H[t]` with the default budget.
pub fn has_pm_on(h: &Hypergraph, t: &VertexSet) -> Result<bool> {
    Oracle::default_budget().has_pm_on(h, t)
}

impl Oracle {
    pub fn default_budget() -> Self {
        Oracle::new(OracleBudget::default())
    }
}

/// Bitmask DP over the subsets of a small vertex set. Edges are grouped by
/// their lowest local vertex, so every matching is built in exactly one order.
struct SubsetDp {
    labels: Vec<usize>,
    by_low: Vec<Vec<u32>>,
    k: usize,
}

impl SubsetDp {
    fn new(h: &Hypergraph, set: &VertexSet) -> Self {
        let labels = set.to_vec();
        let mut local = vec![usize::MAX; h.n()];
        for (i, &v) in labels.iter().enumerate() {
            local[v] = i;
        }
        let mut by_low = vec![Vec::new(); labels.len()];
        for i in h.edges_within(set) {
            let e = h.edge(i);
            let mask = e.iter().fold(0u32, |m, &v| m | 1 << local[v]);
            by_low[local[e[0]]].push(mask);
        }
        SubsetDp {
            labels,
            by_low,
            k: h.k(),
        }
    }

    fn full(&self) -> u32 {
        if self.labels.len() == 32 {
            u32::MAX
        } else {
            (1u32 << self.labels.len()) - 1
        }
    }

    fn to_edge(&self, mask: u32) -> Vec<usize> {
        (0..self.labels.len())
            .filter(|&i| mask >> i & 1 == 1)
            .map(|i| self.labels[i])
            .collect()
    }

    fn max_matching(&self) -> Matching {
        let mut memo = vec![u8::MAX; 1usize << self.labels.len()];
        let full = self.full();
        self.best(full, &mut memo);
        let mut mask = full;
        let mut edges = Vec::new();
        while mask != 0 {
            let target = memo[mask as usize];
            if target == 0 {
                break;
            }
            let v = mask.trailing_zeros() as usize;
            let pick = self.by_low[v]
                .iter()
                .copied()
                .find(|&e| e & mask == e && 1 + self.best(mask ^ e, &mut memo) == target);
            match pick {
                Some(e) => {
                    edges.push(self.to_edge(e));
                    mask ^= e;
                }
                None => mask &= mask - 1,
            }
        }
        Matching::new(edges)
    }

    fn best(&self, mask: u32, memo: &mut [u8]) -> u8 {
        if mask == 0 {
            return 0;
        }
        let cached = memo[mask as usize];
        if cached != u8::MAX {
            return cached;
        }
        let bound = (mask.count_ones() as usize / self.k) as u8;
        let v = mask.trailing_zeros() as usize;
        let mut best = self.best(mask & (mask - 1), memo);
        for &e in &self.by_low[v] {
            if best == bound {
                break;
            }
            if e & mask == e {
                best = best.max(1 + self.best(mask ^ e, memo));
            }
        }
        memo[mask as usize] = best;
        best
    }

    fn perfect_matching(&self) -> Option<Matching> {
        let mut memo = vec![0u8; 1usize << self.labels.len()];
        let full = self.full();
        if !self.perfect(full, &mut memo) {
            return None;
        }
        let mut mask = full;
        let mut edges = Vec::new();
        while mask != 0 {
            let v = mask.trailing_zeros() as usize;
            let e = self.by_low[v]
                .iter()
                .copied()
                .find(|&e| e & mask == e && self.perfect(mask ^ e, &mut memo))
                .expect("DP table is consistent");
            edges.push(self.to_edge(e));
            mask ^= e;
        }
        Some(Matching::new(edges))
    }

    fn perfect(&self, mask: u32, memo: &mut [u8]) -> bool {
        if mask == 0 {
            return true;
        }
        match memo[mask as usize] {
            1 => return false,
            2 => return true,
            _ => {}
        }
        let v = mask.trailing_zeros() as usize;
        let found = self.by_low[v]
            .iter()
            .any(|&e| e & mask == e && self.perfect(mask ^ e, memo));
        memo[mask as usize] = if found { 2 } else { 1 };
        found
    }
}

/// Depth-first branch-and-bound on the lowest undecided vertex: either leave
/// it unmatched or cover it by one of its edges.
struct Search<'a> {
    h: &'a Hypergraph,
    order: Vec<usize>,
    allowed: VertexSet,
    used: VertexSet,
    current: Vec<Vec<usize>>,
    best: Matching,
    nodes: u64,
    max_nodes: u64,
}

impl<'a> Search<'a> {
    fn new(h: &'a Hypergraph, set: &VertexSet, max_nodes: u64) -> Self {
        Search {
            h,
            order: set.to_vec(),
            allowed: set.clone(),
            used: VertexSet::new(h.n()),
            current: Vec::new(),
            best: Matching::empty(),
            nodes: 0,
            max_nodes,
        }
    }

    fn run(&mut self, target: Option<usize>) -> Result<()> {
        let goal = target.unwrap_or(self.order.len() / self.h.k());
        self.dfs(0, goal)?;
        Ok(())
    }

    /// Returns true once `goal` edges have been found.
    fn dfs(&mut self, pos: usize, goal: usize) -> Result<bool> {
        self.nodes += 1;
        if self.nodes > self.max_nodes {
            return Err(Error::OracleBudget(format!(
                "branch-and-bound exceeded {} nodes on {} vertices",
                self.max_nodes,
                self.order.len()
            )));
        }
        if self.current.len() > self.best.len() {
            self.best = Matching::new(self.current.clone());
        }
        if self.best.len() >= goal {
            return Ok(true);
        }
        let mut pos = pos;
        while pos < self.order.len() && self.used.contains(self.order[pos]) {
            pos += 1;
        }
        if pos == self.order.len() {
            return Ok(false);
        }
        let free = self.order[pos..]
            .iter()
            .filter(|&&v| !self.used.contains(v))
            .count();
        if self.current.len() + free / self.h.k() <= self.best.len() {
            return Ok(false);
        }
        let v = self.order[pos];
        let h = self.h;
        for &i in h.incident(v) {
            let e = h.edge(i);
            if e.iter().all(|&w| self.allowed.contains(w) && !self.used.contains(w)) {
                for &w in e {
                    self.used.insert(w);
                }
                self.current.push(e.to_vec());
                let done = self.dfs(pos + 1, goal)?;
                self.current.pop();
                for &w in e {
                    self.used.remove(w);
                }
                if done {
                    return Ok(true);
                }
            }
        }
        // Leave v unmatched.
        if self.current.len() + (free - 1) / self.h.k() > self.best.len() {
            self.used.insert(v);
            let done = self.dfs(pos + 1, goal)?;
            self.used.remove(v);
            if done {
                return Ok(true);
            }
        }
        Ok(false)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::hypergraph::verify_matching;
    use crate::instances::{gen_parity_barrier, gen_random_codegree, gen_space_barrier};

    fn all(n: usize) -> VertexSet {
        VertexSet::full(n)
    }

    #[test]
    fn max_matching_examples() {
        let k9 = Hypergraph::complete(9, 3);
        assert_eq!(exact_max_matching(&k9, &all(9)).unwrap().len(), 3);
        let sb = gen_space_barrier(9, 3, 2).unwrap();
        assert_eq!(exact_max_matching(&sb, &all(9)).unwrap().len(), 2);
        let pb = gen_parity_barrier(9, 3, 2).unwrap();
        assert!(exact_max_matching(&pb, &all(9)).unwrap().len() < 3);
    }

    #[test]
    fn max_matching_is_lexicographically_least() {
        let k6 = Hypergraph::complete(6, 3);
        let m = exact_max_matching(&k6, &all(6)).unwrap();
        assert_eq!(m.edges(), &[vec![0, 1, 2], vec![3, 4, 5]]);
    }

    #[test]
    fn has_pm_examples() {
        let h = Hypergraph::new(6, 3, vec![vec![0, 1, 2], vec![1, 2, 3]]).unwrap();
        assert!(has_pm_on(&h, &VertexSet::from_iter(6, [0, 1, 2])).unwrap());
        assert!(!has_pm_on(&h, &VertexSet::from_iter(6, [3, 4, 5])).unwrap());
        let k9 = Hypergraph::complete(9, 3);
        assert!(has_pm_on(&k9, &VertexSet::from_iter(9, [0, 2, 3, 5, 7, 8])).unwrap());
        assert!(has_pm_on(&k9, &VertexSet::from_iter(9, [0, 2])).is_err());
    }

    #[test]
    fn branch_and_bound_agrees_with_dp() {
        let small = Oracle::new(OracleBudget {
            max_vertices: 1,
            max_nodes: 10_000_000,
        });
        for seed in 0..20 {
            let h = gen_random_codegree(12, 3, 2, seed).unwrap();
            let dp = exact_max_matching(&h, &all(12)).unwrap();
            let bb = small.exact_max_matching(&h, &all(12)).unwrap();
            assert_eq!(dp.len(), bb.len(), "seed {seed}");
            assert!(verify_matching(&h, &bb, false).is_ok());
            assert_eq!(
                small.perfect_matching_on(&h, &all(12)).unwrap().is_some(),
                dp.len() == 4
            );
        }
    }

    #[test]
    fn budget_is_enforced() {
        let tiny = Oracle::new(OracleBudget {
            max_vertices: 1,
            max_nodes: 3,
        });
        let h = gen_space_barrier(12, 3, 3).unwrap();
        assert!(matches!(
            tiny.exact_max_matching(&h, &all(12)),
            Err(Error::OracleBudget(_))
        ));
    }

    #[test]
    fn matching_of_size() {
        let sb = gen_space_barrier(12, 3, 3).unwrap();
        let oracle = Oracle::default_budget();
        assert_eq!(oracle.matching_of_size(&sb, &all(12), 3).unwrap().unwrap().len(), 3);
        assert!(oracle.matching_of_size(&sb, &all(12), 4).unwrap().is_none());
        let outside = VertexSet::from_iter(12, 3..12);
        assert!(oracle.matching_of_size(&sb, &outside, 1).unwrap().is_none());
        assert_eq!(oracle.matching_of_size(&sb, &outside, 0).unwrap(), Some(Matching::empty()));
    }
}
