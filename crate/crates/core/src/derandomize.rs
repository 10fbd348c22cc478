//! Conflict-free subfamily selection with near-uniform coverage.
//!
//! Given elements `U`, candidates `W`, a cover relation between them and a
//! conflict graph on `W`, pick an independent `R ⊆ W` of size about `r` such
//! that every `u` is covered by at least `(β - τ - ν)·r` members of `R`,
//! where `ν = 2mr/N²` and `m` is the number of conflicting pairs.
//!
//! The default mode is the method of conditional expectations with a
//! Chernoff-type pessimistic estimator `Φ = Σ_u exp(-λ·c_u)`, where `c_u` is
//! the coverage of `u` so far and `λ = τ/β`, plus a penalty for candidates a
//! pick makes unavailable. Each step takes the available candidate that
//! lowers `Φ` the most; ties go to the lowest index. The result is checked
//! against all three guarantees before it is returned.

use rand::seq::index::sample;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;

/// The conflict relation on the candidates.
#[derive(Debug, Clone)]
pub enum Conflicts {
    /// Adjacency lists of an explicit conflict graph.
    Explicit(Vec<Vec<usize>>),
    /// Each candidate is a set of ground elements; two candidates conflict
    /// iff they share an element.
    SharedElements(Vec<Vec<usize>>),
}

#[derive(Debug, Clone)]
pub struct ConflictInstance {
    /// `cover[u]` lists the candidates adjacent to element `u`.
    pub cover: Vec<Vec<usize>>,
    pub candidates: usize,
    pub conflicts: Conflicts,
    pub beta: f64,
    pub tau: f64,
    pub r: usize,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum SelectMode {
    Deterministic,
    /// Sample `r` candidates, drop conflicts, verify; up to 100 attempts.
    Randomized { seed: u64 },
}

#[derive(Debug, Clone)]
pub struct Selection {
    /// Chosen candidate indices, ascending.
    pub chosen: Vec<usize>,
    /// Number of conflicting candidate pairs.
    pub conflict_pairs: u64,
    /// Whether `conflict_pairs` is exact or an upper bound.
    pub conflict_pairs_exact: bool,
    pub nu: f64,
    pub min_coverage: usize,
    /// Coverage each element is guaranteed, `(β - τ - ν)·r`.
    pub coverage_target: f64,
    /// Failed preconditions (the run still proceeds).
    pub warnings: Vec<String>,
    /// Failed postconditions. Empty iff every guarantee holds.
    pub violations: Vec<String>,
}

impl Selection {
    pub fn is_ok(&self) -> bool {
        self.violations.is_empty()
    }
}

struct Prepared<'a> {
    inst: &'a ConflictInstance,
    covered_by: Vec<Vec<usize>>,
    buckets: Vec<Vec<usize>>,
}

impl ConflictInstance {
    fn elements(&self) -> usize {
        self.cover.len()
    }

    fn prepare(&self) -> Prepared<'_> {
        let mut covered_by = vec![Vec::new(); self.candidates];
        for (u, list) in self.cover.iter().enumerate() {
            for &w in list {
                covered_by[w].push(u);
            }
        }
        let buckets = match &self.conflicts {
            Conflicts::Explicit(_) => Vec::new(),
            Conflicts::SharedElements(sets) => {
                let size = sets.iter().flatten().map(|&x| x + 1).max().unwrap_or(0);
                let mut buckets = vec![Vec::new(); size];
                for (w, set) in sets.iter().enumerate() {
                    for &x in set {
                        buckets[x].push(w);
                    }
                }
                buckets
            }
        };
        Prepared {
            inst: self,
            covered_by,
            buckets,
        }
    }

    fn check_preconditions(&self) -> Vec<String> {
        let mut warnings = Vec::new();
        let n = self.candidates as f64;
        if !(self.beta > self.tau && self.tau > 0.0) {
            warnings.push(format!("need β > τ > 0 (β = {}, τ = {})", self.beta, self.tau));
        }
        if self.r > self.candidates {
            warnings.push(format!("r = {} exceeds N = {}", self.r, self.candidates));
        }
        if let Some((u, list)) = self
            .cover
            .iter()
            .enumerate()
            .find(|(_, l)| (l.len() as f64) < self.beta * n)
        {
            warnings.push(format!(
                "element {u} has degree {} < βN = {:.2}",
                list.len(),
                self.beta * n
            ));
        }
        let cap = (self.tau * self.tau * self.r as f64 / (3.0 * self.beta)).exp() / 8.0;
        if self.elements() as f64 > cap {
            warnings.push(format!(
                "M = {} exceeds exp(τ²r/(3β))/8 = {cap:.3}",
                self.elements()
            ));
        }
        warnings
    }
}

impl Prepared<'_> {
    /// Exact count when affordable, otherwise the union bound over shared
    /// elements.
    fn conflict_pairs(&self) -> (u64, bool) {
        match &self.inst.conflicts {
            Conflicts::Explicit(adj) => {
                let twice: usize = adj.iter().map(Vec::len).sum();
                ((twice / 2) as u64, true)
            }
            Conflicts::SharedElements(sets) => {
                let work: usize = sets
                    .iter()
                    .map(|s| s.iter().map(|&x| self.buckets[x].len()).sum::<usize>())
                    .sum();
                if work <= 50_000_000 {
                    let mut mark = vec![usize::MAX; sets.len()];
                    let mut m = 0u64;
                    for (w, set) in sets.iter().enumerate() {
                        for &x in set {
                            for &y in &self.buckets[x] {
                                if y > w && mark[y] != w {
                                    mark[y] = w;
                                    m += 1;
                                }
                            }
                        }
                    }
                    (m, true)
                } else {
                    let m = self
                        .buckets
                        .iter()
                        .map(|b| (b.len() * b.len().saturating_sub(1) / 2) as u64)
                        .sum();
                    (m, false)
                }
            }
        }
    }

    fn conflict_neighbors(&self, w: usize, mut f: impl FnMut(usize)) {
        match &self.inst.conflicts {
            Conflicts::Explicit(adj) => adj[w].iter().copied().for_each(f),
            Conflicts::SharedElements(sets) => {
                for &x in &sets[w] {
                    for &y in &self.buckets[x] {
                        if y != w {
                            f(y);
                        }
                    }
                }
            }
        }
    }

    fn conflicting(&self, a: usize, b: usize) -> bool {
        match &self.inst.conflicts {
            Conflicts::Explicit(adj) => adj[a].contains(&b),
            Conflicts::SharedElements(sets) => sets[a].iter().any(|x| sets[b].contains(x)),
        }
    }

    fn deterministic(&self) -> Vec<usize> {
        let inst = self.inst;
        let lambda = if inst.beta > 0.0 { inst.tau / inst.beta } else { 1.0 };
        let shrink = 1.0 - (-lambda).exp();
        let mut weight = vec![1.0f64; inst.elements()];
        let mut available = vec![true; inst.candidates];
        let mut avail_count = inst.candidates;
        // Number of available conflict neighbours (explicit) or available
        // candidates per ground element (shared elements).
        let mut pressure: Vec<usize> = match &inst.conflicts {
            Conflicts::Explicit(adj) => adj.iter().map(Vec::len).collect(),
            Conflicts::SharedElements(_) => self.buckets.iter().map(Vec::len).collect(),
        };
        let mut chosen = Vec::new();
        while chosen.len() < inst.r && avail_count > 0 {
            let eliminated = |w: usize| -> f64 {
                match &inst.conflicts {
                    Conflicts::Explicit(_) => pressure[w] as f64,
                    Conflicts::SharedElements(sets) => sets[w]
                        .iter()
                        .map(|&x| pressure[x].saturating_sub(1) as f64)
                        .sum(),
                }
            };
            let gains: Vec<f64> = (0..inst.candidates)
                .into_par_iter()
                .map(|w| {
                    if available[w] {
                        self.covered_by[w].iter().map(|&u| weight[u]).sum::<f64>() * shrink
                    } else {
                        0.0
                    }
                })
                .collect();
            let mean_gain = gains.iter().sum::<f64>() / avail_count as f64;
            let penalty = mean_gain / avail_count as f64;
            let best = (0..inst.candidates)
                .into_par_iter()
                .filter(|&w| available[w])
                .map(|w| (gains[w] - penalty * eliminated(w), w))
                .reduce(
                    || (f64::NEG_INFINITY, usize::MAX),
                    |a, b| {
                        if b.0 > a.0 || (b.0 == a.0 && b.1 < a.1) {
                            b
                        } else {
                            a
                        }
                    },
                );
            let w = best.1;
            chosen.push(w);
            for &u in &self.covered_by[w] {
                weight[u] *= (-lambda).exp();
            }
            let mut gone = vec![w];
            self.conflict_neighbors(w, |y| {
                if available[y] {
                    gone.push(y);
                }
            });
            gone.sort_unstable();
            gone.dedup();
            for y in gone {
                if !available[y] {
                    continue;
                }
                available[y] = false;
                avail_count -= 1;
                match &inst.conflicts {
                    Conflicts::Explicit(adj) => {
                        for &z in &adj[y] {
                            pressure[z] = pressure[z].saturating_sub(1);
                        }
                    }
                    Conflicts::SharedElements(sets) => {
                        for &x in &sets[y] {
                            pressure[x] -= 1;
                        }
                    }
                }
            }
        }
        chosen.sort_unstable();
        chosen
    }

    fn randomized_once(&self, rng: &mut ChaCha8Rng) -> Vec<usize> {
        let inst = self.inst;
        let take = inst.r.min(inst.candidates);
        let mut chosen: Vec<usize> = Vec::new();
        for w in sample(rng, inst.candidates, take).into_iter() {
            if chosen.iter().all(|&c| !self.conflicting(c, w)) {
                chosen.push(w);
            }
        }
        chosen.sort_unstable();
        chosen
    }

    fn audit(&self, chosen: &[usize], nu: f64) -> (usize, Vec<String>) {
        let inst = self.inst;
        let mut violations = Vec::new();
        let in_r = {
            let mut v = vec![false; inst.candidates];
            chosen.iter().for_each(|&w| v[w] = true);
            v
        };
        'outer: for (i, &a) in chosen.iter().enumerate() {
            for &b in &chosen[i + 1..] {
                if self.conflicting(a, b) {
                    violations.push(format!("candidates {a} and {b} conflict"));
                    break 'outer;
                }
            }
        }
        let r = inst.r as f64;
        let size = chosen.len() as f64;
        if size > r || size < (1.0 - nu) * r - 1e-9 {
            violations.push(format!(
                "|R| = {} outside [{:.3}, {}]",
                chosen.len(),
                (1.0 - nu) * r,
                inst.r
            ));
        }
        let target = (inst.beta - inst.tau - nu) * r;
        let mut min_cov = usize::MAX;
        for (u, list) in inst.cover.iter().enumerate() {
            let cov = list.iter().filter(|&&w| in_r[w]).count();
            min_cov = min_cov.min(cov);
            if (cov as f64) < target - 1e-9 {
                violations.push(format!("element {u} covered {cov} < {target:.3} times"));
                break;
            }
        }
        if inst.cover.is_empty() {
            min_cov = 0;
        }
        (min_cov, violations)
    }
}

/// Selects a conflict-free subfamily of the candidates; see the module
/// documentation for the guarantees. The output is always conflict-free;
/// `violations` reports any other guarantee that was missed.
pub fn select_set(inst: &ConflictInstance, mode: SelectMode) -> Selection {
    let prepared = inst.prepare();
    let warnings = inst.check_preconditions();
    let (m, exact) = prepared.conflict_pairs();
    let n = inst.candidates.max(1) as f64;
    let nu = 2.0 * m as f64 * inst.r as f64 / (n * n);
    let coverage_target = (inst.beta - inst.tau - nu) * inst.r as f64;
    let (chosen, (min_coverage, violations)) = match mode {
        SelectMode::Deterministic => {
            let chosen = prepared.deterministic();
            let audit = prepared.audit(&chosen, nu);
            (chosen, audit)
        }
        SelectMode::Randomized { seed } => {
            let mut rng = ChaCha8Rng::seed_from_u64(seed);
            let mut best: Option<(Vec<usize>, (usize, Vec<String>))> = None;
            for _ in 0..100 {
                let chosen = prepared.randomized_once(&mut rng);
                let audit = prepared.audit(&chosen, nu);
                let better = match &best {
                    None => true,
                    Some((_, (cov, v))) => {
                        audit.1.len() < v.len() || (audit.1.len() == v.len() && audit.0 > *cov)
                    }
                };
                let done = audit.1.is_empty();
                if better {
                    best = Some((chosen, audit));
                }
                if done {
                    break;
                }
            }
            best.expect("at least one attempt")
        }
    };
    Selection {
        chosen,
        conflict_pairs: m,
        conflict_pairs_exact: exact,
        nu,
        min_coverage,
        coverage_target,
        warnings,
        violations,
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn no_conflicts_full_cover() {
        let inst = ConflictInstance {
            cover: vec![(0..20).collect(); 5],
            candidates: 20,
            conflicts: Conflicts::Explicit(vec![Vec::new(); 20]),
            beta: 1.0,
            tau: 0.3,
            r: 10,
        };
        let sel = select_set(&inst, SelectMode::Deterministic);
        assert_eq!(sel.chosen.len(), 10);
        assert_eq!(sel.nu, 0.0);
        assert_eq!(sel.min_coverage, 10);
        assert!(sel.is_ok(), "{:?}", sel.violations);
    }

    #[test]
    fn conflict_matching_picks_one_per_pair() {
        let n = 40;
        let adj: Vec<Vec<usize>> = (0..n).map(|w| vec![w ^ 1]).collect();
        let cover: Vec<Vec<usize>> = (0..6)
            .map(|u| (0..n).filter(|w| (w + u) % 3 != 0).collect())
            .collect();
        let inst = ConflictInstance {
            cover,
            candidates: n,
            conflicts: Conflicts::Explicit(adj),
            beta: 0.6,
            tau: 0.2,
            r: 8,
        };
        let sel = select_set(&inst, SelectMode::Deterministic);
        for &w in &sel.chosen {
            assert!(!sel.chosen.contains(&(w ^ 1)));
        }
        assert!(sel.is_ok(), "{:?}", sel.violations);
        let rnd = select_set(&inst, SelectMode::Randomized { seed: 3 });
        for &w in &rnd.chosen {
            assert!(!rnd.chosen.contains(&(w ^ 1)));
        }
    }

    #[test]
    fn empty_universe() {
        let inst = ConflictInstance {
            cover: Vec::new(),
            candidates: 10,
            conflicts: Conflicts::SharedElements((0..10).map(|w| vec![w / 2]).collect()),
            beta: 0.5,
            tau: 0.1,
            r: 4,
        };
        let sel = select_set(&inst, SelectMode::Deterministic);
        assert_eq!(sel.conflict_pairs, 5);
        assert!(sel.chosen.len() <= 4);
        let parts: Vec<usize> = sel.chosen.iter().map(|w| w / 2).collect();
        let mut dedup = parts.clone();
        dedup.dedup();
        assert_eq!(parts, dedup);
    }

    #[test]
    fn deterministic_is_repeatable() {
        let adj: Vec<Vec<usize>> = (0..30).map(|w| vec![(w + 1) % 30, (w + 29) % 30]).collect();
        let cover: Vec<Vec<usize>> = (0..4).map(|u| (u..30).step_by(2).collect()).collect();
        let inst = ConflictInstance {
            cover,
            candidates: 30,
            conflicts: Conflicts::Explicit(adj),
            beta: 0.4,
            tau: 0.1,
            r: 6,
        };
        let a = select_set(&inst, SelectMode::Deterministic);
        let b = select_set(&inst, SelectMode::Deterministic);
        assert_eq!(a.chosen, b.chosen);
    }
}
