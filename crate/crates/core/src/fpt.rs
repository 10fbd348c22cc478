//! Colour-coding search for a matching of prescribed size.
//!
//! Vertices of the search region are coloured with `|X|` colours. For each
//! colouring, level `j` keeps one record per colour set realisable as the
//! colours of a `j`-matching whose edges are each injectively coloured; the
//! level-`r` family is nonempty iff a colourful `r`-matching exists. A
//! family of colourings in which every `kr`-set is injectively coloured by
//! some member turns "no record at level r" into a proof of non-existence.

use std::collections::HashMap;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;

use crate::error::{Error, Result};
use crate::hypergraph::{Hypergraph, Matching};
use crate::oracle::Oracle;
use crate::vertex_set::VertexSet;

/// Largest palette a colour set mask can hold.
pub const MAX_COLORS: usize = 128;

#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Backend {
    /// `⌈e^{k'}·ln(1/δ)⌉` uniform colourings with `k'` colours, capped at
    /// `max_colorings`. A miss is Monte-Carlo evidence only.
    Randomized { seed: u64, delta: f64, max_colorings: usize },
    /// A perfect family: every colouring with `k'` colours when there are
    /// at most `budget` of them, otherwise the single injective colouring.
    Exhaustive { budget: u64 },
}

impl Backend {
    pub fn randomized(seed: u64) -> Self {
        Backend::Randomized {
            seed,
            delta: 1e-6,
            max_colorings: 4096,
        }
    }

    pub fn exhaustive() -> Self {
        Backend::Exhaustive { budget: 100_000 }
    }

    pub fn is_perfect(&self) -> bool {
        matches!(self, Backend::Exhaustive { .. })
    }
}

/// A lazily generated family of colourings of `0..len`.
#[derive(Debug, Clone, PartialEq)]
pub struct ColorFamily {
    pub len: usize,
    pub colors: usize,
    kind: FamilyKind,
}

#[derive(Debug, Clone, PartialEq)]
enum FamilyKind {
    Random { seed: u64, count: usize },
    All { count: usize },
    Identity,
}

impl ColorFamily {
    pub fn size(&self) -> usize {
        match self.kind {
            FamilyKind::Random { count, .. } | FamilyKind::All { count } => count,
            FamilyKind::Identity => 1,
        }
    }

    /// The `i`-th colouring.
    pub fn coloring(&self, i: usize) -> Vec<u8> {
        match self.kind {
            FamilyKind::Random { seed, .. } => {
                let mut rng = ChaCha8Rng::seed_from_u64(seed);
                rng.set_stream(i as u64);
                (0..self.len).map(|_| rng.gen_range(0..self.colors) as u8).collect()
            }
            FamilyKind::All { .. } => {
                let mut rest = i;
                (0..self.len)
                    .map(|_| {
                        let c = rest % self.colors;
                        rest /= self.colors;
                        c as u8
                    })
                    .collect()
            }
            FamilyKind::Identity => (0..self.len).map(|v| v as u8).collect(),
        }
    }
}

/// `⌈e^{k'}·ln(1/δ)⌉`, saturating.
pub fn randomized_family_size(k_prime: usize, delta: f64) -> usize {
    let v = ((k_prime as f64).exp() * (1.0 / delta).ln()).ceil();
    if v.is_finite() && v < usize::MAX as f64 {
        (v as usize).max(1)
    } else {
        usize::MAX
    }
}

/// The colouring family a backend uses on `len` vertices for `k'`-sets.
/// The exhaustive family errors when `|X|^{len}` exceeds the budget.
pub fn color_family(len: usize, k_prime: usize, backend: Backend) -> Result<ColorFamily> {
    if k_prime == 0 {
        return Ok(ColorFamily {
            len,
            colors: 1,
            kind: FamilyKind::All { count: 1 },
        });
    }
    if k_prime > MAX_COLORS {
        return Err(Error::InvalidParameter(format!("{k_prime} colours exceed {MAX_COLORS}")));
    }
    match backend {
        Backend::Randomized {
            seed,
            delta,
            max_colorings,
        } => Ok(ColorFamily {
            len,
            colors: k_prime,
            kind: FamilyKind::Random {
                seed,
                count: randomized_family_size(k_prime, delta).min(max_colorings),
            },
        }),
        Backend::Exhaustive { budget } => {
            let count = (k_prime as u64).checked_pow(len as u32).filter(|&c| c <= budget);
            match count {
                Some(count) => Ok(ColorFamily {
                    len,
                    colors: k_prime,
                    kind: FamilyKind::All { count: count as usize },
                }),
                None => Err(Error::OracleBudget(format!(
                    "{k_prime}^{len} colourings exceed the budget of {budget}; use the injective family or the randomized backend"
                ))),
            }
        }
    }
}

fn injective_family(len: usize) -> ColorFamily {
    ColorFamily {
        len,
        colors: len,
        kind: FamilyKind::Identity,
    }
}

#[derive(Debug, Clone)]
pub struct FptOutcome {
    pub matching: Option<Matching>,
    /// `matching == None` is a proof of non-existence.
    pub conclusive: bool,
    pub colorings_tried: usize,
}

/// Limit on the records kept over all levels for one colouring.
const STATE_BUDGET: usize = 2_000_000;

/// Searches `H[u]` for a matching of exactly `r` edges.
pub fn color_coded_matching(h: &Hypergraph, u: &VertexSet, r: usize, backend: Backend) -> Result<FptOutcome> {
    let k = h.k();
    if r == 0 {
        return Ok(FptOutcome {
            matching: Some(Matching::empty()),
            conclusive: true,
            colorings_tried: 0,
        });
    }
    let region = u.to_vec();
    if r * k > region.len() {
        return Ok(FptOutcome {
            matching: None,
            conclusive: true,
            colorings_tried: 0,
        });
    }
    let edges = h.edges_within(u);
    if edges.len() < r {
        return Ok(FptOutcome {
            matching: None,
            conclusive: true,
            colorings_tried: 0,
        });
    }
    let mut pos = vec![usize::MAX; h.n()];
    region.iter().enumerate().for_each(|(i, &v)| pos[v] = i);
    let family = match color_family(region.len(), k * r, backend) {
        Ok(f) => f,
        Err(Error::OracleBudget(_)) if region.len() <= MAX_COLORS => injective_family(region.len()),
        Err(e) => return Err(e),
    };
    let size = family.size();
    let found = (0..size)
        .into_par_iter()
        .map(|i| {
            let coloring = family.coloring(i);
            search_one(h, &edges, &pos, &coloring, r).map(|m| m.map(|m| (i, m)))
        })
        .find_map_first(|res| match res {
            Ok(Some(hit)) => Some(Ok(hit)),
            Ok(None) => None,
            Err(e) => Some(Err(e)),
        })
        .transpose()?;
    match found {
        Some((i, m)) => Ok(FptOutcome {
            matching: Some(m),
            conclusive: true,
            colorings_tried: i + 1,
        }),
        None => Ok(FptOutcome {
            matching: None,
            conclusive: backend.is_perfect(),
            colorings_tried: size,
        }),
    }
}

/// As [`color_coded_matching`], re-deciding inconclusive misses with the
/// oracle.
pub fn color_coded_matching_with_fallback(
    h: &Hypergraph,
    u: &VertexSet,
    r: usize,
    backend: Backend,
    oracle: &Oracle,
) -> Result<FptOutcome> {
    let out = color_coded_matching(h, u, r, backend)?;
    if out.conclusive {
        return Ok(out);
    }
    let matching = oracle.matching_of_size(h, u, r)?;
    Ok(FptOutcome {
        matching,
        conclusive: true,
        colorings_tried: out.colorings_tried,
    })
}

fn search_one(
    h: &Hypergraph,
    edges: &[usize],
    pos: &[usize],
    coloring: &[u8],
    r: usize,
) -> Result<Option<Matching>> {
    // Level 1: each colourful edge's colour set, first edge kept.
    let mut by_mask: HashMap<u128, Vec<usize>> = HashMap::new();
    for &ei in edges {
        let mut mask = 0u128;
        let mut injective = true;
        for &v in h.edge(ei) {
            let bit = 1u128 << coloring[pos[v]];
            injective &= mask & bit == 0;
            mask |= bit;
        }
        if injective {
            by_mask.entry(mask).or_default().push(ei);
        }
    }
    let mut singles: Vec<u128> = by_mask.keys().copied().collect();
    singles.sort_unstable();
    // levels[j] maps a union to (previous union, appended colour set).
    let mut levels: Vec<HashMap<u128, (u128, u128)>> = Vec::with_capacity(r);
    levels.push(singles.iter().map(|&m| (m, (0, m))).collect());
    let mut states = levels[0].len();
    for _ in 1..r {
        let prev = levels.last().expect("level");
        let mut keys: Vec<u128> = prev.keys().copied().collect();
        keys.sort_unstable();
        let mut next: HashMap<u128, (u128, u128)> = HashMap::new();
        for &union in &keys {
            for &m in &singles {
                if union & m == 0 {
                    next.entry(union | m).or_insert((union, m));
                }
            }
        }
        states += next.len();
        if states > STATE_BUDGET {
            return Err(Error::OracleBudget(format!(
                "colour-coding records exceed {STATE_BUDGET}"
            )));
        }
        if next.is_empty() {
            return Ok(None);
        }
        levels.push(next);
    }
    let Some(&top) = levels[r - 1].keys().min() else {
        return Ok(None);
    };
    // Walk back to the sequence of colour sets.
    let mut sets = Vec::with_capacity(r);
    let mut union = top;
    for level in levels.iter().rev() {
        let (prev, m) = level[&union];
        sets.push(m);
        union = prev;
    }
    sets.reverse();
    let mut used = vec![false; h.n()];
    let mut chosen = Vec::with_capacity(r);
    if reconstruct(h, &by_mask, &sets, &mut used, &mut chosen) {
        let m = Matching::new(chosen.iter().map(|&ei| h.edge(ei).to_vec()).collect());
        Ok(Some(m))
    } else {
        Ok(None)
    }
}

fn reconstruct(
    h: &Hypergraph,
    by_mask: &HashMap<u128, Vec<usize>>,
    sets: &[u128],
    used: &mut [bool],
    chosen: &mut Vec<usize>,
) -> bool {
    let Some((&first, rest)) = sets.split_first() else {
        return true;
    };
    for &ei in &by_mask[&first] {
        let e = h.edge(ei);
        if e.iter().any(|&v| used[v]) {
            continue;
        }
        e.iter().for_each(|&v| used[v] = true);
        chosen.push(ei);
        if reconstruct(h, by_mask, rest, used, chosen) {
            return true;
        }
        chosen.pop();
        e.iter().for_each(|&v| used[v] = false);
    }
    false
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::hypergraph::verify_matching;
    use crate::instances::gen_space_barrier;

    #[test]
    fn family_sizes() {
        let f = color_family(6, 6, Backend::Exhaustive { budget: 100_000 }).unwrap();
        assert_eq!(f.size(), 46_656);
        assert_eq!(randomized_family_size(6, 1e-6), ((6f64).exp() * 1e6f64.ln()).ceil() as usize);
        let empty = color_family(5, 0, Backend::exhaustive()).unwrap();
        assert_eq!(empty.size(), 1);
        assert!(color_family(20, 12, Backend::exhaustive()).is_err());
    }

    #[test]
    fn planted_pair_found() {
        let h = Hypergraph::new(9, 3, vec![vec![0, 1, 2], vec![3, 4, 5], vec![1, 4, 7], vec![2, 6, 8]]).unwrap();
        let u = VertexSet::full(9);
        for backend in [Backend::exhaustive(), Backend::randomized(1)] {
            let out = color_coded_matching(&h, &u, 2, backend).unwrap();
            let m = out.matching.expect("two disjoint edges exist");
            assert_eq!(m.len(), 2);
            assert!(verify_matching(&h, &m, false).is_ok());
        }
    }

    #[test]
    fn independent_region_has_none() {
        let h = gen_space_barrier(9, 3, 2).unwrap();
        let u = VertexSet::from_iter(9, 2..9);
        let out = color_coded_matching(&h, &u, 1, Backend::exhaustive()).unwrap();
        assert!(out.matching.is_none() && out.conclusive);
    }

    #[test]
    fn zero_size_is_trivial() {
        let h = Hypergraph::empty(6, 3);
        let out = color_coded_matching(&h, &VertexSet::full(6), 0, Backend::exhaustive()).unwrap();
        assert_eq!(out.matching, Some(Matching::empty()));
    }

    #[test]
    fn injective_family_is_exact() {
        let h = Hypergraph::complete(12, 3);
        let out = color_coded_matching(&h, &VertexSet::full(12), 4, Backend::exhaustive()).unwrap();
        assert_eq!(out.matching.unwrap().len(), 4);
        let sparse = Hypergraph::new(12, 3, vec![vec![0, 1, 2], vec![2, 3, 4], vec![5, 6, 7]]).unwrap();
        let out = color_coded_matching(&sparse, &VertexSet::full(12), 3, Backend::exhaustive()).unwrap();
        assert!(out.matching.is_none() && out.conclusive);
    }
}
