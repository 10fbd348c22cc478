//! Reachability between vertices and a closed partition built from it.

use itertools::Itertools;
use num_rational::Ratio;
use rand::seq::index::sample;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;

use crate::hypergraph::Hypergraph;
use crate::instances::binomial;
use crate::lattice::Partition;
use crate::oracle::Oracle;
use crate::vertex_set::VertexSet;

#[derive(Debug, Clone, PartialEq)]
pub struct ReachabilityParams {
    pub beta: Ratio<u64>,
    /// Largest `i` tried when testing whether two vertices are reachable.
    pub i_levels: usize,
    /// Witness sets enumerated exactly for `i ≥ 2`; above this a seeded
    /// sample of this size is used and the count is flagged approximate.
    pub witness_budget: usize,
}

impl Default for ReachabilityParams {
    fn default() -> Self {
        ReachabilityParams {
            beta: Ratio::new(1, 1000),
            i_levels: 1,
            witness_budget: 20_000,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Witnesses {
    pub count: f64,
    pub exact: bool,
}

/// Number of `(ik-1)`-sets `S` avoiding `u, v` such that both `S ∪ {u}`
/// and `S ∪ {v}` span perfect matchings.
pub fn reachability_witnesses(h: &Hypergraph, u: usize, v: usize, i: usize, budget: usize) -> Witnesses {
    assert_ne!(u, v, "reachability needs distinct vertices");
    assert!(i >= 1);
    if i == 1 {
        let count = h
            .incident(u)
            .iter()
            .filter(|&&ei| {
                let e = h.edge(ei);
                if e.contains(&v) {
                    return false;
                }
                let mut other: Vec<usize> = e.iter().map(|&x| if x == u { v } else { x }).collect();
                other.sort_unstable();
                h.contains_edge(&other)
            })
            .count();
        return Witnesses {
            count: count as f64,
            exact: true,
        };
    }
    let size = i * h.k() - 1;
    let others: Vec<usize> = (0..h.n()).filter(|&x| x != u && x != v).collect();
    if size > others.len() {
        return Witnesses {
            count: 0.0,
            exact: true,
        };
    }
    let oracle = Oracle::default_budget();
    let spans = |s: &[usize], extra: usize| -> bool {
        let mut t = VertexSet::from_iter(h.n(), s.iter().copied());
        t.insert(extra);
        oracle.has_pm_on(h, &t).unwrap_or(false)
    };
    let total = binomial(others.len(), size);
    if total <= budget {
        let count = others
            .iter()
            .copied()
            .combinations(size)
            .filter(|s| spans(s, u) && spans(s, v))
            .count();
        Witnesses {
            count: count as f64,
            exact: true,
        }
    } else {
        let mut rng = ChaCha8Rng::seed_from_u64(((u as u64) << 32) ^ v as u64 ^ i as u64);
        let hits = (0..budget)
            .filter(|_| {
                let s: Vec<usize> = sample(&mut rng, others.len(), size)
                    .into_iter()
                    .map(|j| others[j])
                    .collect();
                spans(&s, u) && spans(&s, v)
            })
            .count();
        Witnesses {
            count: hits as f64 / budget as f64 * total as f64,
            exact: false,
        }
    }
}

#[derive(Debug, Clone)]
pub struct ClosedPartition {
    pub partition: Partition,
    /// Some pair was judged with an approximate witness count.
    pub approximate: bool,
    pub warnings: Vec<String>,
}

/// Groups vertices into parts whose members are pairwise reachable.
///
/// Pairs are first tested at `i = 1`; pairs failing that are retried at
/// `i = 2..=i_levels`. Vertices are placed in increasing order into the
/// first part (by least vertex) they are reachable to in full, else into a
/// new part; parts whose union remains pairwise reachable are then merged.
pub fn closed_partition(h: &Hypergraph, params: &ReachabilityParams, gamma: f64) -> ClosedPartition {
    let n = h.n();
    let k = h.k();
    let threshold = |i: usize| -> f64 {
        let beta = *params.beta.numer() as f64 / *params.beta.denom() as f64;
        beta * (n as f64).powi((i * k - 1) as i32)
    };
    let pairs: Vec<(usize, usize)> = (0..n).tuple_combinations().collect();
    let verdicts: Vec<(bool, bool)> = pairs
        .par_iter()
        .map(|&(u, v)| {
            let mut exact = true;
            for i in 1..=params.i_levels.max(1) {
                let w = reachability_witnesses(h, u, v, i, params.witness_budget);
                exact &= w.exact;
                if w.count >= threshold(i) && w.count > 0.0 {
                    return (true, exact);
                }
            }
            (false, exact)
        })
        .collect();
    let mut reach = vec![vec![false; n]; n];
    let mut approximate = false;
    for (&(u, v), &(ok, exact)) in pairs.iter().zip(&verdicts) {
        reach[u][v] = ok;
        reach[v][u] = ok;
        approximate |= !exact;
    }

    let mut parts: Vec<Vec<usize>> = Vec::new();
    for v in 0..n {
        match parts.iter_mut().find(|p| p.iter().all(|&x| reach[x][v])) {
            Some(p) => p.push(v),
            None => parts.push(vec![v]),
        }
    }
    loop {
        let merge = (0..parts.len()).tuple_combinations().find(|&(a, b)| {
            parts[a]
                .iter()
                .all(|&x| parts[b].iter().all(|&y| reach[x][y]))
        });
        match merge {
            Some((a, b)) => {
                let moved = parts.remove(b);
                parts[a].extend(moved);
                parts[a].sort_unstable();
            }
            None => break,
        }
    }
    parts.sort_by_key(|p| p[0]);

    let floor = n as f64 / k as f64 - 2.0 * gamma * n as f64;
    let warnings = parts
        .iter()
        .filter(|p| (p.len() as f64) < floor)
        .map(|p| format!("part starting at {} has {} < {floor:.2} vertices", p[0], p.len()))
        .collect();
    ClosedPartition {
        partition: Partition::new(n, parts).expect("parts cover the vertex set"),
        approximate,
        warnings,
    }
}
