//! Seeded generators for the two barrier constructions and for dense test
//! instances. Every generator is a pure function of its arguments.

use std::collections::{HashMap, HashSet};

use itertools::Itertools;
use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::hypergraph::Hypergraph;
use crate::kpartite::KPartiteGraph;

/// Default fraction of edges removed by [`gen_random_codegree`] before repair.
pub const DEFAULT_DELETION_RATE: f64 = 0.85;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum GeneratorSpec {
    ParityBarrier {
        n: usize,
        k: usize,
        x_size: usize,
    },
    SpaceBarrier {
        n: usize,
        k: usize,
        s_size: usize,
    },
    RandomDense {
        n: usize,
        k: usize,
        c: usize,
        deletion_rate: f64,
        seed: u64,
    },
    PlantedMatching {
        n: usize,
        k: usize,
        noise_edges: usize,
        seed: u64,
    },
    KpartiteDense {
        k: usize,
        n_part: usize,
        gamma: f64,
        seed: u64,
    },
    ExtremalPlanted {
        n: usize,
        k: usize,
        deficit: usize,
        noise_edges: usize,
        c: usize,
        plant: bool,
        seed: u64,
    },
}

impl GeneratorSpec {
    pub fn generate(&self) -> Result<Hypergraph> {
        match *self {
            GeneratorSpec::ParityBarrier { n, k, x_size } => gen_parity_barrier(n, k, x_size),
            GeneratorSpec::SpaceBarrier { n, k, s_size } => gen_space_barrier(n, k, s_size),
            GeneratorSpec::RandomDense {
                n,
                k,
                c,
                deletion_rate,
                seed,
            } => gen_random_codegree_with_rate(n, k, c, deletion_rate, seed),
            GeneratorSpec::PlantedMatching {
                n,
                k,
                noise_edges,
                seed,
            } => gen_planted_matching(n, k, noise_edges, seed),
            GeneratorSpec::KpartiteDense {
                k,
                n_part,
                gamma,
                seed,
            } => Ok(gen_kpartite_dense(k, n_part, gamma, seed)?.to_hypergraph()),
            GeneratorSpec::ExtremalPlanted {
                n,
                k,
                deficit,
                noise_edges,
                c,
                plant,
                seed,
            } => gen_extremal_planted(n, k, deficit, noise_edges, c, plant, seed),
        }
    }
}

fn check_k(n: usize, k: usize) -> Result<()> {
    if k < 2 {
        return Err(Error::InvalidParameter(format!("k = {k} < 2")));
    }
    if n < k {
        return Err(Error::Degenerate { n, k });
    }
    Ok(())
}

/// All k-sets meeting `{0, .., x_size-1}` an odd number of times.
pub fn gen_parity_barrier(n: usize, k: usize, x_size: usize) -> Result<Hypergraph> {
    check_k(n, k)?;
    if n % k != 0 {
        return Err(Error::InvalidParameter(format!("{k} does not divide {n}")));
    }
    if x_size > n {
        return Err(Error::InvalidParameter(format!("|X| = {x_size} > n = {n}")));
    }
    if (n / k).abs_diff(x_size) % 2 == 0 {
        return Err(Error::InvalidParameter(format!(
            "n/k - |X| = {} - {x_size} is even",
            n / k
        )));
    }
    let edges = (0..n)
        .combinations(k)
        .filter(|e| e.iter().filter(|&&v| v < x_size).count() % 2 == 1)
        .collect();
    Ok(Hypergraph::from_edges_unchecked(n, k, edges))
}

/// All k-sets meeting `{0, .., s_size-1}`.
pub fn gen_space_barrier(n: usize, k: usize, s_size: usize) -> Result<Hypergraph> {
    check_k(n, k)?;
    if k * s_size >= n {
        return Err(Error::InvalidParameter(format!(
            "|S| = {s_size} is not below n/k (n = {n}, k = {k})"
        )));
    }
    let edges = (0..n)
        .combinations(k)
        .filter(|e| e[0] < s_size)
        .collect();
    Ok(Hypergraph::from_edges_unchecked(n, k, edges))
}

/// Random subgraph of the complete k-graph with `δ_{k-1} ≥ n/k - c`.
pub fn gen_random_codegree(n: usize, k: usize, c: usize, seed: u64) -> Result<Hypergraph> {
    gen_random_codegree_with_rate(n, k, c, DEFAULT_DELETION_RATE, seed)
}

pub fn gen_random_codegree_with_rate(
    n: usize,
    k: usize,
    c: usize,
    deletion_rate: f64,
    seed: u64,
) -> Result<Hypergraph> {
    check_k(n, k)?;
    if !(0.0..=1.0).contains(&deletion_rate) {
        return Err(Error::InvalidParameter(format!(
            "deletion rate {deletion_rate} outside [0, 1]"
        )));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let all: Vec<Vec<usize>> = (0..n).combinations(k).collect();
    let kept: HashSet<Vec<usize>> = all
        .into_iter()
        .filter(|_| rng.gen::<f64>() >= deletion_rate)
        .collect();
    let bound = (n / k).saturating_sub(c);
    let edges = repair_codegree(n, k, kept, bound, &HashSet::new());
    Ok(Hypergraph::from_edges_unchecked(n, k, edges))
}

/// Re-adds the lexicographically least missing edge through every (k-1)-set
/// whose degree is below `bound` until no such set remains. Edges in
/// `forbidden` are never re-added.
fn repair_codegree(
    n: usize,
    k: usize,
    mut kept: HashSet<Vec<usize>>,
    bound: usize,
    forbidden: &HashSet<Vec<usize>>,
) -> Vec<Vec<usize>> {
    if bound > 0 {
        let mut degree: HashMap<Vec<usize>, usize> = HashMap::new();
        for e in &kept {
            for s in e.iter().copied().combinations(k - 1) {
                *degree.entry(s).or_default() += 1;
            }
        }
        loop {
            let mut changed = false;
            for s in (0..n).combinations(k - 1) {
                let mut deg = degree.get(&s).copied().unwrap_or(0);
                if deg >= bound {
                    continue;
                }
                let mut missing: Vec<Vec<usize>> = (0..n)
                    .filter(|v| !s.contains(v))
                    .map(|v| {
                        let mut e = s.clone();
                        e.push(v);
                        e.sort_unstable();
                        e
                    })
                    .filter(|e| !kept.contains(e) && !forbidden.contains(e))
                    .collect();
                missing.sort_unstable();
                for e in missing {
                    if deg >= bound {
                        break;
                    }
                    for t in e.iter().copied().combinations(k - 1) {
                        *degree.entry(t).or_default() += 1;
                    }
                    kept.insert(e);
                    deg += 1;
                    changed = true;
                }
            }
            if !changed {
                break;
            }
        }
    }
    kept.into_iter().collect()
}

/// A random perfect matching plus `noise_edges` random extra edges.
pub fn gen_planted_matching(
    n: usize,
    k: usize,
    noise_edges: usize,
    seed: u64,
) -> Result<Hypergraph> {
    check_k(n, k)?;
    if n % k != 0 {
        return Err(Error::InvalidParameter(format!("{k} does not divide {n}")));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut perm: Vec<usize> = (0..n).collect();
    perm.shuffle(&mut rng);
    let mut edges: HashSet<Vec<usize>> = perm
        .chunks(k)
        .map(|c| {
            let mut e = c.to_vec();
            e.sort_unstable();
            e
        })
        .collect();
    let total = binomial(n, k);
    let target = (edges.len() + noise_edges).min(total);
    while edges.len() < target {
        let mut e: Vec<usize> = rand::seq::index::sample(&mut rng, n, k).into_vec();
        e.sort_unstable();
        edges.insert(e);
    }
    Ok(Hypergraph::from_edges_unchecked(n, k, edges.into_iter().collect()))
}

/// Complete k-partite k-graph with parts of size `n_part`, minus seeded
/// deletions. A deletion is skipped when it would push a part-1 vertex below
/// `(1-γ)·n_part^{k-1}` edges or a transversal (k-1)-set over parts 2..k below
/// `(1-γ)·n_part` edges.
pub fn gen_kpartite_dense(k: usize, n_part: usize, gamma: f64, seed: u64) -> Result<KPartiteGraph> {
    if k < 2 || n_part == 0 {
        return Err(Error::InvalidParameter(format!(
            "k = {k}, n_part = {n_part}"
        )));
    }
    if !(0.0..1.0).contains(&gamma) {
        return Err(Error::InvalidParameter(format!("γ = {gamma} outside [0, 1)")));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut g = KPartiteGraph::complete(k, n_part);
    let rest = n_part.pow((k - 1) as u32);
    let min_first = ((1.0 - gamma) * rest as f64).ceil() as usize;
    let min_rest = ((1.0 - gamma) * n_part as f64).ceil() as usize;
    let mut deg_first = vec![rest; n_part];
    let mut deg_rest = vec![n_part; rest];
    for code in 0..g.tuple_count() {
        if rng.gen::<f64>() >= gamma {
            continue;
        }
        let first = code / rest;
        let tail = code % rest;
        if deg_first[first] > min_first && deg_rest[tail] > min_rest {
            g.remove_code(code);
            deg_first[first] -= 1;
            deg_rest[tail] -= 1;
        }
    }
    Ok(g)
}

/// A perturbed space barrier. The small side `A0 = {0, .., n/k - deficit - 1}`
/// meets most edges; the rest `Y` is nearly independent. When `plant` is set,
/// a perfect matching made of `|A0|` edges through `A0` and `deficit` edges
/// inside `Y` is protected from deletion. `noise_edges` extra random edges
/// are added inside `Y`, and edges through `A0` are thinned while keeping
/// `δ_{k-1} ≥ n/k - c`.
pub fn gen_extremal_planted(
    n: usize,
    k: usize,
    deficit: usize,
    noise_edges: usize,
    c: usize,
    plant: bool,
    seed: u64,
) -> Result<Hypergraph> {
    check_k(n, k)?;
    if n % k != 0 || deficit > n / k {
        return Err(Error::InvalidParameter(format!(
            "need k | n and deficit ≤ n/k (n = {n}, k = {k}, deficit = {deficit})"
        )));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let a_size = n / k - deficit;
    let mut protected: HashSet<Vec<usize>> = HashSet::new();
    let mut inside_y: HashSet<Vec<usize>> = HashSet::new();
    if plant {
        let mut ys: Vec<usize> = (a_size..n).collect();
        ys.shuffle(&mut rng);
        let mut chunks = ys.chunks(k - 1);
        for a in 0..a_size {
            let mut e = chunks.next().expect("enough vertices").to_vec();
            e.push(a);
            e.sort_unstable();
            protected.insert(e);
        }
        let rest: Vec<usize> = chunks.flatten().copied().collect();
        for c in rest.chunks(k) {
            let mut e = c.to_vec();
            e.sort_unstable();
            inside_y.insert(e);
        }
    }
    let y_count = n - a_size;
    if y_count >= k {
        let target = inside_y.len() + noise_edges;
        let cap = binomial(y_count, k);
        while inside_y.len() < target.min(cap) {
            let mut e: Vec<usize> = rand::seq::index::sample(&mut rng, y_count, k)
                .into_iter()
                .map(|i| i + a_size)
                .collect();
            e.sort_unstable();
            inside_y.insert(e);
        }
    }
    // Thin edges through A0 at a rate keeping the instance near the threshold.
    let mut kept: HashSet<Vec<usize>> = (0..n)
        .combinations(k)
        .filter(|e| e[0] < a_size)
        .filter(|e| protected.contains(e) || rng.gen::<f64>() >= 0.5)
        .collect();
    kept.extend(protected);
    kept.extend(inside_y.iter().cloned());
    // Repair only re-adds edges through A0 so Y keeps its structure.
    let forbidden: HashSet<Vec<usize>> = (a_size..n)
        .combinations(k)
        .filter(|e| !inside_y.contains(e))
        .collect();
    let bound = (n / k).saturating_sub(c);
    let edges = repair_codegree(n, k, kept, bound, &forbidden);
    Ok(Hypergraph::from_edges_unchecked(n, k, edges))
}

pub(crate) fn binomial(n: usize, r: usize) -> usize {
    if r > n {
        return 0;
    }
    let r = r.min(n - r);
    let mut acc: u128 = 1;
    for i in 0..r {
        acc = acc * (n - i) as u128 / (i + 1) as u128;
    }
    acc.min(usize::MAX as u128) as usize
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::vertex_set::VertexSet;

    #[test]
    fn parity_barrier_edges_meet_x_once() {
        let h = gen_parity_barrier(9, 3, 2).unwrap();
        assert!(h.edges().iter().all(|e| e.iter().filter(|&&v| v < 2).count() == 1));
        // 2 choices in X times C(7, 2) pairs in Y.
        assert_eq!(h.edge_count(), 2 * 21);
        assert!(gen_parity_barrier(6, 3, 1).is_ok());
        assert!(gen_parity_barrier(9, 3, 3).is_err());
    }

    #[test]
    fn space_barrier_shape() {
        let h = gen_space_barrier(9, 3, 2).unwrap();
        assert_eq!(h.min_codegree().unwrap(), 2);
        assert!(h.is_independent(&VertexSet::from_iter(9, 2..9)));
        assert_eq!(gen_space_barrier(9, 3, 0).unwrap().edge_count(), 0);
        assert!(gen_space_barrier(9, 3, 3).is_err());
    }

    #[test]
    fn random_codegree_respects_bound() {
        for seed in 0..5 {
            let h = gen_random_codegree(9, 3, 1, seed).unwrap();
            assert!(h.min_codegree().unwrap() >= 2);
        }
        let h = gen_random_codegree(9, 3, 1, 7).unwrap();
        assert!(h.min_codegree().unwrap() >= 2);
    }

    #[test]
    fn random_codegree_is_deterministic() {
        let a = gen_random_codegree(12, 3, 2, 99).unwrap();
        let b = gen_random_codegree(12, 3, 2, 99).unwrap();
        assert_eq!(a, b);
        let c = gen_random_codegree(12, 3, 2, 100).unwrap();
        assert_ne!(a.edges(), c.edges());
    }

    #[test]
    fn vacuous_bound_leaves_plain_random_graph() {
        let h = gen_random_codegree_with_rate(9, 3, 3, 1.0, 1).unwrap();
        assert_eq!(h.edge_count(), 0);
    }

    #[test]
    fn kpartite_dense_respects_both_bounds() {
        let g = gen_kpartite_dense(3, 12, 0.1, 5).unwrap();
        let (d1, drest) = g.min_degrees();
        assert!(d1 as f64 >= 0.9 * 144.0);
        assert!(drest as f64 >= 0.9 * 12.0);
        assert!(g.edge_count() < 12usize.pow(3));
    }

    #[test]
    fn extremal_planted_has_codegree() {
        let h = gen_extremal_planted(30, 3, 2, 3, 2, true, 11).unwrap();
        assert!(h.min_codegree().unwrap() >= 8);
    }

    #[test]
    fn binomials() {
        assert_eq!(binomial(6, 3), 20);
        assert_eq!(binomial(4, 5), 0);
        assert_eq!(binomial(60, 0), 1);
    }
}
