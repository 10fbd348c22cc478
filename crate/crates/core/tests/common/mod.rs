//! Reference implementations used as test oracles. They share no code with
//! the library beyond reading a hypergraph's edge list.

#![allow(dead_code)]

use std::collections::{HashMap, VecDeque};

use hypermatch::Hypergraph;

fn mask_of(e: &[usize]) -> u64 {
    e.iter().fold(0, |m, &v| m | 1 << v)
}

/// Maximum matching size of `H[allowed]` by recursion on the least
/// allowed vertex, memoized on the remaining vertex mask.
pub fn brute_nu(h: &Hypergraph, allowed: u64) -> usize {
    assert!(h.n() <= 64);
    let edges: Vec<u64> = h.edges().iter().map(|e| mask_of(e)).collect();
    let mut memo = HashMap::new();
    nu_rec(&edges, allowed, &mut memo)
}

fn nu_rec(edges: &[u64], rest: u64, memo: &mut HashMap<u64, usize>) -> usize {
    if rest == 0 {
        return 0;
    }
    if let Some(&v) = memo.get(&rest) {
        return v;
    }
    let low = rest & rest.wrapping_neg();
    let mut best = nu_rec(edges, rest & !low, memo);
    for &e in edges {
        if e & low != 0 && e & rest == e {
            best = best.max(1 + nu_rec(edges, rest & !e, memo));
        }
    }
    memo.insert(rest, best);
    best
}

pub fn full_mask(n: usize) -> u64 {
    if n == 64 {
        u64::MAX
    } else {
        (1u64 << n) - 1
    }
}

pub fn has_pm_brute(h: &Hypergraph) -> bool {
    h.n() % h.k() == 0 && brute_nu(h, full_mask(h.n())) * h.k() == h.n()
}

/// Number of edges containing `s`, by a scan of the edge list.
pub fn brute_degree(h: &Hypergraph, s: &[usize]) -> usize {
    h.edges().iter().filter(|e| s.iter().all(|v| e.contains(v))).count()
}

/// Some `X` with `n/k - |X|` odd met oddly by every edge, by trying all
/// `2^n` subsets.
pub fn parity_member_brute(h: &Hypergraph) -> Option<u64> {
    let n = h.n();
    let k = h.k();
    if n % k != 0 {
        return None;
    }
    let edges: Vec<u64> = h.edges().iter().map(|e| mask_of(e)).collect();
    (0..1u64 << n).find(|&x| {
        (n / k).abs_diff(x.count_ones() as usize) % 2 == 1 && edges.iter().all(|&e| (e & x).count_ones() % 2 == 1)
    })
}

/// Maximum bipartite matching as a unit-capacity max flow with BFS
/// augmenting paths on a residual matrix.
pub fn max_flow_matching(left: usize, right: usize, pairs: &[(usize, usize)]) -> usize {
    let size = left + right + 2;
    let (s, t) = (size - 2, size - 1);
    let mut cap = vec![vec![0i32; size]; size];
    for l in 0..left {
        cap[s][l] = 1;
    }
    for r in 0..right {
        cap[left + r][t] = 1;
    }
    for &(l, r) in pairs {
        cap[l][left + r] = 1;
    }
    let mut flow = 0;
    loop {
        let mut prev = vec![usize::MAX; size];
        prev[s] = s;
        let mut queue = VecDeque::from([s]);
        while let Some(u) = queue.pop_front() {
            for v in 0..size {
                if prev[v] == usize::MAX && cap[u][v] > 0 {
                    prev[v] = u;
                    queue.push_back(v);
                }
            }
        }
        if prev[t] == usize::MAX {
            return flow;
        }
        let mut v = t;
        while v != s {
            let u = prev[v];
            cap[u][v] -= 1;
            cap[v][u] += 1;
            v = u;
        }
        flow += 1;
    }
}

/// Whether `v` is an integer combination of `basis` with every
/// coefficient in `[-bound, bound]`.
pub fn in_span_brute(basis: &[Vec<i64>], v: &[i64], bound: i64) -> bool {
    fn rec(basis: &[Vec<i64>], acc: &mut Vec<i64>, v: &[i64], bound: i64) -> bool {
        let Some((first, rest)) = basis.split_first() else {
            return acc == v;
        };
        for c in -bound..=bound {
            acc.iter_mut().zip(first).for_each(|(a, b)| *a += c * b);
            let hit = rec(rest, acc, v, bound);
            acc.iter_mut().zip(first).for_each(|(a, b)| *a -= c * b);
            if hit {
                return true;
            }
        }
        false
    }
    rec(basis, &mut vec![0; v.len()], v, bound)
}

/// Checks that `edges` is a matching of `h`, and optionally a perfect one.
pub fn is_matching(h: &Hypergraph, edges: &[Vec<usize>], perfect: bool) -> bool {
    let mut seen = 0u64;
    for e in edges {
        let m = mask_of(e);
        if seen & m != 0 || !h.edges().contains(e) {
            return false;
        }
        seen |= m;
    }
    !perfect || seen == full_mask(h.n())
}
