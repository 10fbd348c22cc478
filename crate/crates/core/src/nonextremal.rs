//! The non-extremal branch: absorbers, an almost perfect matching or a large
//! independent set, and lattice-guided absorption of the leftover.

use std::collections::{BTreeMap, HashMap};

use num_rational::Ratio;
use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;

use crate::derandomize::{select_set, ConflictInstance, Conflicts, SelectMode};
use crate::error::{Error, Result};
use crate::hypergraph::{verify_matching, Hypergraph, Matching};
use crate::lattice::{add, residual_index, robust_index_set, EdgeLattice, IndexVector, Partition};
use crate::oracle::Oracle;
use crate::vertex_set::VertexSet;

#[derive(Debug, Clone, PartialEq)]
pub struct NonextremalParams {
    pub beta: Ratio<u64>,
    pub mu: Ratio<u64>,
    pub gamma: f64,
    /// Absorber family size is `c′·ln n`, capped by the room available.
    pub c_prime: f64,
    /// Bound on the coefficients of a leftover decomposition.
    pub c_cap: i64,
    /// Reachability exponent; absorbers have `t_reach·k²` vertices.
    pub t_reach: usize,
    /// Candidate absorbers generated before selection.
    pub candidate_budget: usize,
    /// k-sets sampled to measure absorber coverage.
    pub coverage_sample: usize,
    pub seed: u64,
    pub mode: SelectMode,
}

impl Default for NonextremalParams {
    fn default() -> Self {
        NonextremalParams {
            beta: Ratio::new(1, 1000),
            mu: Ratio::new(1, 1000),
            gamma: 0.01,
            c_prime: 1.0,
            c_cap: 8,
            t_reach: 1,
            candidate_budget: 256,
            coverage_sample: 48,
            seed: 0,
            mode: SelectMode::Deterministic,
        }
    }
}

impl NonextremalParams {
    /// `C′ = (C + k + 2)·k + k/γ`, the coverage every robust k-set needs.
    pub fn c_prime_coverage(&self, k: usize) -> f64 {
        (self.c_cap as f64 + k as f64 + 2.0) * k as f64 + k as f64 / self.gamma
    }

    fn check(&self) -> Result<()> {
        let positive = *self.beta.numer() > 0
            && *self.mu.numer() > 0
            && self.gamma > 0.0
            && self.c_prime > 0.0
            && self.c_cap > 0
            && self.t_reach > 0;
        if positive {
            Ok(())
        } else {
            Err(Error::InvalidParameter(format!("non-positive parameter in {self:?}")))
        }
    }
}

#[derive(Debug, Clone, Default)]
pub struct AbsorbingFamily {
    /// Disjoint absorbing sets, each sorted.
    pub sets: Vec<Vec<usize>>,
    /// A perfect matching of each member.
    pub matchings: Vec<Matching>,
    /// Sampled robust k-sets the coverage was measured on.
    pub sampled: usize,
    /// Fewest members absorbing any sampled k-set.
    pub min_coverage: usize,
    /// The selection missed one of its guarantees.
    pub degraded: bool,
    pub warnings: Vec<String>,
}

impl AbsorbingFamily {
    pub fn len(&self) -> usize {
        self.sets.len()
    }

    pub fn is_empty(&self) -> bool {
        self.sets.is_empty()
    }
}

/// Whether `H[T]` and `H[T ∪ S]` both have perfect matchings.
pub fn is_absorbing(h: &Hypergraph, oracle: &Oracle, t: &VertexSet, s: &VertexSet) -> Result<bool> {
    let k = h.k();
    if t.len() % k != 0 || s.len() != k || !t.is_disjoint(s) {
        return Err(Error::Precondition(format!(
            "absorbing test needs k | |T|, |S| = k and T ∩ S = ∅ (|T| = {}, |S| = {})",
            t.len(),
            s.len()
        )));
    }
    Ok(oracle.has_pm_on(h, t)? && oracle.has_pm_on(h, &t.union(s))?)
}

fn index_classes(h: &Hypergraph, p: &Partition) -> BTreeMap<IndexVector, Vec<usize>> {
    let mut by_type: BTreeMap<IndexVector, Vec<usize>> = BTreeMap::new();
    for (i, e) in h.edges().iter().enumerate() {
        by_type.entry(p.index_of(e)).or_default().push(i);
    }
    by_type
}

/// A `(tk-1)`-set `W` avoiding `used` with perfect matchings on `W ∪ {u}`
/// and `W ∪ {s}`.
fn witness(
    h: &Hypergraph,
    oracle: &Oracle,
    u: usize,
    s: usize,
    t: usize,
    used: &VertexSet,
    rng: &mut ChaCha8Rng,
) -> Option<Vec<usize>> {
    let k = h.k();
    if t == 1 {
        let inc = h.incident(u);
        if inc.is_empty() {
            return None;
        }
        let start = rng.gen_range(0..inc.len());
        return (0..inc.len()).find_map(|j| {
            let e = h.edge(inc[(start + j) % inc.len()]);
            let w: Vec<usize> = e.iter().copied().filter(|&x| x != u).collect();
            if w.iter().any(|&x| used.contains(x) || x == s) {
                return None;
            }
            let mut other = w.clone();
            other.push(s);
            other.sort_unstable();
            h.contains_edge(&other).then_some(w)
        });
    }
    let free: Vec<usize> = (0..h.n()).filter(|&x| !used.contains(x) && x != u && x != s).collect();
    let size = t * k - 1;
    if free.len() < size {
        return None;
    }
    for _ in 0..64 {
        let mut w: Vec<usize> = free.choose_multiple(rng, size).copied().collect();
        w.sort_unstable();
        let with = |x: usize| {
            let mut set = VertexSet::from_iter(h.n(), w.iter().copied());
            set.insert(x);
            oracle.has_pm_on(h, &set).unwrap_or(false)
        };
        if with(u) && with(s) {
            return Some(w);
        }
    }
    None
}

/// An absorber built around `s`: an edge `f` of the same index vector, and
/// for each pair `(u_j, s_j)` in a common part a reachability witness `W_j`.
fn absorber_around(
    h: &Hypergraph,
    p: &Partition,
    oracle: &Oracle,
    s: &[usize],
    same_type: &[usize],
    t: usize,
    rng: &mut ChaCha8Rng,
) -> Option<Vec<usize>> {
    if same_type.is_empty() {
        return None;
    }
    let mut s_sorted = s.to_vec();
    s_sorted.sort_by_key(|&v| (p.part_of(v), v));
    for _ in 0..8 {
        let f = h.edge(same_type[rng.gen_range(0..same_type.len())]);
        if f.iter().any(|x| s.contains(x)) {
            continue;
        }
        let mut f_sorted = f.to_vec();
        f_sorted.sort_by_key(|&v| (p.part_of(v), v));
        let mut used = VertexSet::from_iter(h.n(), s.iter().chain(f).copied());
        let mut set = f.to_vec();
        let complete = f_sorted.iter().zip(&s_sorted).all(|(&u, &sv)| {
            match witness(h, oracle, u, sv, t, &used, rng) {
                Some(w) => {
                    w.iter().for_each(|&x| used.insert(x));
                    set.extend(w);
                    true
                }
                None => false,
            }
        });
        if complete {
            set.sort_unstable();
            return Some(set);
        }
    }
    None
}

/// Builds a family of disjoint absorbing sets by running the conflict-free
/// selection over candidates built around sampled robust k-sets. Coverage is
/// measured on the sample and reported, not assumed.
pub fn build_absorbing_family(
    h: &Hypergraph,
    p: &Partition,
    params: &NonextremalParams,
    oracle: &Oracle,
) -> Result<AbsorbingFamily> {
    params.check()?;
    let n = h.n();
    let k = h.k();
    let size = params.t_reach * k * k;
    let robust = robust_index_set(h, p, params.mu);
    let by_type = index_classes(h, p);
    let room = n / (3 * size);
    let r = ((params.c_prime * (n.max(2) as f64).ln()).ceil() as usize).min(room.max(1));
    let mut family = AbsorbingFamily::default();
    if robust.vectors.is_empty() || r == 0 || size > n {
        return Ok(family);
    }

    let mut rng = ChaCha8Rng::seed_from_u64(params.seed);
    let mut sample: Vec<Vec<usize>> = Vec::new();
    let mut tries = 0;
    while sample.len() < params.coverage_sample && tries < 50 * params.coverage_sample {
        tries += 1;
        let mut s = rand::seq::index::sample(&mut rng, n, k).into_vec();
        s.sort_unstable();
        if robust.vectors.contains(&p.index_of(&s)) && !sample.contains(&s) {
            sample.push(s);
        }
    }
    if sample.is_empty() {
        family.warnings.push("no robust k-set sampled".into());
        return Ok(family);
    }

    let mut candidates: Vec<Vec<usize>> = Vec::new();
    let mut misses = 0;
    let mut i = 0;
    while candidates.len() < params.candidate_budget && misses < params.candidate_budget {
        let s = &sample[i % sample.len()];
        i += 1;
        let same = by_type.get(&p.index_of(s)).map(Vec::as_slice).unwrap_or(&[]);
        match absorber_around(h, p, oracle, s, same, params.t_reach, &mut rng) {
            Some(t) if !candidates.contains(&t) => candidates.push(t),
            _ => misses += 1,
        }
    }
    let sets: Vec<VertexSet> = candidates
        .iter()
        .map(|c| VertexSet::from_iter(n, c.iter().copied()))
        .collect();
    let cover: Vec<Vec<usize>> = sample
        .par_iter()
        .map(|s| {
            let sv = VertexSet::from_iter(n, s.iter().copied());
            (0..sets.len())
                .filter(|&j| sets[j].is_disjoint(&sv) && is_absorbing(h, oracle, &sets[j], &sv).unwrap_or(false))
                .collect()
        })
        .collect();

    let beta = *params.beta.numer() as f64 / *params.beta.denom() as f64;
    let mu = *params.mu.numer() as f64 / *params.mu.denom() as f64;
    let beta_prime = mu * beta.powi(k as i32) / 2f64.powi(k as i32 + 1);
    let inst = ConflictInstance {
        cover: cover.clone(),
        candidates: candidates.len(),
        conflicts: Conflicts::SharedElements(candidates.clone()),
        beta: beta_prime,
        tau: beta_prime / 3.0,
        r,
    };
    let sel = select_set(&inst, params.mode);
    family.degraded = !sel.is_ok();
    family.warnings.extend(sel.warnings);
    family.warnings.extend(sel.violations);
    for &j in &sel.chosen {
        if let Some(m) = oracle.perfect_matching_on(h, &sets[j])? {
            family.sets.push(candidates[j].clone());
            family.matchings.push(m);
        }
    }
    family.sampled = sample.len();
    family.min_coverage = cover
        .iter()
        .map(|c| c.iter().filter(|j| family.sets.contains(&candidates[**j])).count())
        .min()
        .unwrap_or(0);
    Ok(family)
}

/// Result of the almost-perfect-matching step.
#[derive(Debug, Clone, PartialEq)]
pub enum AlmostOutcome {
    Matching(Matching),
    Independent(VertexSet),
}

/// Grows a matching by the exchange steps until it stalls. Returns an
/// independent set instead when one of size `(1-2kγ)(k-1)n/k` turns up.
pub fn almost_pm_or_independent(h: &Hypergraph, gamma: f64) -> AlmostOutcome {
    let n = h.n();
    let k = h.k();
    let mut matched = VertexSet::new(n);
    let mut m: Vec<Vec<usize>> = Vec::new();
    for e in h.edges() {
        if !matched.contains_any(e) {
            e.iter().for_each(|&v| matched.insert(v));
            m.push(e.clone());
        }
    }
    let bound = (1.0 - 2.0 * k as f64 * gamma) * (k - 1) as f64 * n as f64 / k as f64;
    loop {
        let uncovered = matched.complement();
        if let Some(&i) = h.edges_within(&uncovered).first() {
            let e = h.edge(i).to_vec();
            e.iter().for_each(|&v| matched.insert(v));
            m.push(e);
            continue;
        }
        let u = uncovered.to_vec();
        let blocks: Vec<&[usize]> = u.chunks_exact(k - 1).collect();
        if blocks.is_empty() {
            break;
        }
        // completions[v] lists the blocks A_i with A_i ∪ {v} an edge.
        let completions = |v: usize| -> Vec<usize> {
            (0..blocks.len())
                .filter(|&i| {
                    let mut e = blocks[i].to_vec();
                    e.push(v);
                    e.sort_unstable();
                    h.contains_edge(&e)
                })
                .collect()
        };
        let comp: Vec<Vec<Vec<usize>>> = m
            .par_iter()
            .map(|e| e.iter().map(|&v| completions(v)).collect())
            .collect();

        // Two vertices of one matched edge completing distinct blocks.
        let swap = comp.iter().enumerate().find_map(|(ei, per)| {
            (0..k).find_map(|a| {
                (0..k).filter(|&b| b != a).find_map(|b| {
                    per[a].iter().find_map(|&i| {
                        per[b].iter().find(|&&j| j != i).map(|&j| (ei, a, i, b, j))
                    })
                })
            })
        });
        if let Some((ei, a, i, b, j)) = swap {
            let e = m.swap_remove(ei);
            for (v, blk) in [(e[a], i), (e[b], j)] {
                let mut f = blocks[blk].to_vec();
                f.push(v);
                f.sort_unstable();
                f.iter().for_each(|&x| matched.insert(x));
                m.push(f);
            }
            continue;
        }

        let in_d: Vec<Option<usize>> = comp
            .iter()
            .zip(&m)
            .map(|(per, e)| (0..k).find(|&a| per[a].len() >= k).map(|a| e[a]))
            .collect();
        let d_set = VertexSet::from_iter(n, in_d.iter().flatten().copied());
        let mut x = VertexSet::new(n);
        for (e, dv) in m.iter().zip(&in_d) {
            if dv.is_some() {
                e.iter().filter(|&&v| !d_set.contains(v)).for_each(|&v| x.insert(v));
            }
        }
        let inside = h.edges_within(&x);
        let Some(&e0) = inside.first() else {
            let mut ind = x.clone();
            for v in 0..n {
                if !ind.contains(v) {
                    ind.insert(v);
                    if !h.is_independent(&ind) {
                        ind.remove(v);
                    }
                }
            }
            if ind.len() as f64 >= bound && !ind.is_empty() {
                return AlmostOutcome::Independent(ind);
            }
            break;
        };
        let e0 = h.edge(e0).to_vec();
        let mut hit: Vec<usize> = (0..m.len()).filter(|&i| m[i].iter().any(|v| e0.contains(v))).collect();
        let mut taken: Vec<usize> = Vec::new();
        let mut added: Vec<Vec<usize>> = vec![e0.clone()];
        for &i in &hit {
            let a = (0..k).find(|&a| Some(m[i][a]) == in_d[i]).expect("edge meets D");
            let Some(&blk) = comp[i][a].iter().find(|b| !taken.contains(b)) else {
                break;
            };
            taken.push(blk);
            let mut f = blocks[blk].to_vec();
            f.push(m[i][a]);
            f.sort_unstable();
            added.push(f);
        }
        if added.len() != hit.len() + 1 {
            break;
        }
        hit.sort_unstable_by(|a, b| b.cmp(a));
        for i in hit {
            m[i].iter().for_each(|&v| matched.remove(v));
            m.swap_remove(i);
        }
        for f in added {
            f.iter().for_each(|&v| matched.insert(v));
            m.push(f);
        }
    }
    AlmostOutcome::Matching(Matching::new(m))
}

/// Output of the non-extremal driver.
#[derive(Debug, Clone, PartialEq)]
pub enum NonextremalOutcome {
    Perfect(Matching),
    Independent(VertexSet),
}

/// Chooses edges whose index vectors bring `start` into `L`, preferring
/// earlier candidates. Returns positions into `candidates`.
fn release_edges(
    l: &EdgeLattice,
    start: &[i64],
    candidates: &[IndexVector],
) -> Option<Vec<usize>> {
    let target = l.reduce(&vec![0; start.len()]);
    let mut states: HashMap<Vec<i64>, (Vec<i64>, Vec<usize>)> = HashMap::new();
    let first = l.reduce(start);
    if first == target {
        return Some(Vec::new());
    }
    states.insert(first, (start.to_vec(), Vec::new()));
    let mut order: Vec<Vec<i64>> = vec![l.reduce(start)];
    for (j, iv) in candidates.iter().enumerate() {
        let snapshot = order.len();
        for s in 0..snapshot {
            let (sum, path) = states[&order[s]].clone();
            let mut next = sum;
            add(&mut next, iv);
            let key = l.reduce(&next);
            if states.contains_key(&key) {
                continue;
            }
            let mut p = path;
            p.push(j);
            if key == target {
                return Some(p);
            }
            order.push(key.clone());
            states.insert(key, (next, p));
            if order.len() > 100_000 {
                return None;
            }
        }
    }
    None
}

/// Finds a perfect matching of `H` through absorption, or an independent set
/// when the almost-perfect step exposes one. Every stage that misses its
/// guarantee reports a pipeline failure; outputs are verified.
pub fn nonextremal_pm(
    h: &Hypergraph,
    p: &Partition,
    m1: &Matching,
    params: &NonextremalParams,
    oracle: &Oracle,
) -> Result<NonextremalOutcome> {
    params.check()?;
    let n = h.n();
    let k = h.k();
    let robust = robust_index_set(h, p, params.mu);
    let lattice = EdgeLattice::from_robust(p.d(), &robust);
    if !lattice.contains(&residual_index(p, m1)) {
        return Err(Error::Precondition("residual index of M₁ not in the lattice".into()));
    }
    if !verify_matching(h, m1, false).is_ok() {
        return Err(Error::Precondition("M₁ is not a matching of H".into()));
    }

    let family = build_absorbing_family(h, p, params, oracle)?;
    let m1_vertices = m1.vertices(n);
    let f0: Vec<usize> = (0..family.len())
        .filter(|&i| !m1_vertices.contains_any(&family.sets[i]))
        .collect();
    let mut used = m1_vertices.clone();
    for &i in &f0 {
        family.sets[i].iter().for_each(|&v| used.insert(v));
    }

    // M₂: a few edges of every robust index vector, canonical order.
    let by_type = index_classes(h, p);
    let per_vector = (params.c_cap as usize).min((n / (8 * k * robust.vectors.len().max(1))).max(1));
    let mut m2: Vec<(usize, Vec<usize>)> = Vec::new();
    for (vi, v) in robust.vectors.iter().enumerate() {
        let mut taken = 0;
        for &ei in by_type.get(v).map(Vec::as_slice).unwrap_or(&[]) {
            if taken == per_vector {
                break;
            }
            let e = h.edge(ei);
            if !used.contains_any(e) {
                e.iter().for_each(|&x| used.insert(x));
                m2.push((vi, e.to_vec()));
                taken += 1;
            }
        }
    }
    let mut base = m1.clone();
    m2.iter().for_each(|(_, e)| base.push(e.clone()));
    assert!(lattice.contains(&residual_index(p, &base)), "M₂ moved the residual out of L");

    let rest = used.complement();
    let mut m3 = Matching::empty();
    if rest.len() >= k {
        let (sub, labels) = h.induced(&rest);
        match almost_pm_or_independent(&sub, 2.0 * params.gamma) {
            AlmostOutcome::Independent(x) => {
                let ind = VertexSet::from_iter(n, x.iter().map(|v| labels[v]));
                debug_assert!(h.is_independent(&ind));
                return Ok(NonextremalOutcome::Independent(ind));
            }
            AlmostOutcome::Matching(m) => {
                for e in m.edges() {
                    m3.push(e.iter().map(|&v| labels[v]).collect());
                }
            }
        }
    }
    let mut s0 = rest.clone();
    s0.difference_with(&m3.vertices(n));

    // Release edges of M₃, then of M₀, until the leftover index lies in L.
    let mut pool: Vec<(Option<usize>, Vec<usize>)> = m3.edges().iter().map(|e| (None, e.clone())).collect();
    for &fi in &f0 {
        for e in family.matchings[fi].edges() {
            pool.push((Some(fi), e.clone()));
        }
    }
    let pool_index: Vec<IndexVector> = pool.iter().map(|(_, e)| p.index_of(e)).collect();
    let released = release_edges(&lattice, &index_vector_of(p, &s0), &pool_index)
        .ok_or_else(|| Error::pipeline("release", "no set of matched edges restores lattice membership"))?;
    let mut broken = vec![false; family.len()];
    let mut leftover = s0.clone();
    for &j in &released {
        if let Some(fi) = pool[j].0 {
            broken[fi] = true;
        }
        pool[j].1.iter().for_each(|&v| leftover.insert(v));
    }
    let d_index = index_vector_of(p, &leftover);
    assert!(lattice.contains(&d_index), "released leftover outside L");

    // Write i(D) = Σ (b_v - c_v)·v and return c_v edges of M₂ per v.
    let coeffs = lattice
        .decompose(&d_index, params.c_cap)
        .ok_or_else(|| Error::pipeline("decompose", format!("no coefficients within ±{}", params.c_cap)))?;
    let mut returned = vec![false; m2.len()];
    for (vi, &a) in coeffs.iter().enumerate() {
        let mut need = (-a).max(0);
        for (j, (tv, e)) in m2.iter().enumerate() {
            if need == 0 {
                break;
            }
            if *tv == vi && !returned[j] {
                returned[j] = true;
                e.iter().for_each(|&v| leftover.insert(v));
                need -= 1;
            }
        }
        if need > 0 {
            return Err(Error::pipeline("decompose", "M₂ has too few edges of a needed index vector"));
        }
    }

    // Split the leftover into k-sets with the prescribed index vectors.
    let mut by_part: Vec<Vec<usize>> = vec![Vec::new(); p.d()];
    for v in leftover.iter() {
        by_part[p.part_of(v)].push(v);
    }
    let mut pieces: Vec<Vec<usize>> = Vec::new();
    for (vi, &a) in coeffs.iter().enumerate() {
        for _ in 0..a.max(0) {
            let mut s = Vec::with_capacity(k);
            for (part, &cnt) in robust.vectors[vi].iter().enumerate() {
                for _ in 0..cnt {
                    s.push(by_part[part].pop().expect("leftover index matches the decomposition"));
                }
            }
            s.sort_unstable();
            pieces.push(s);
        }
    }
    assert!(by_part.iter().all(Vec::is_empty), "leftover not exhausted by the decomposition");

    // Absorb each piece into its own intact absorber.
    let mut replaced: Vec<Option<Matching>> = vec![None; family.len()];
    for s in &pieces {
        let sv = VertexSet::from_iter(n, s.iter().copied());
        let slot = f0.iter().copied().find_map(|fi| {
            if broken[fi] || replaced[fi].is_some() {
                return None;
            }
            let t = VertexSet::from_iter(n, family.sets[fi].iter().copied());
            if !is_absorbing(h, oracle, &t, &sv).ok()? {
                return None;
            }
            oracle.perfect_matching_on(h, &t.union(&sv)).ok()?.map(|m| (fi, m))
        });
        let Some((fi, m)) = slot else {
            return Err(Error::pipeline("absorb", format!("no free absorber for {s:?}")));
        };
        replaced[fi] = Some(m);
    }

    let mut out = m1.clone();
    for &fi in f0.iter().filter(|&&fi| !broken[fi]) {
        match &replaced[fi] {
            Some(m) => out.extend(m),
            None => {
                for e in family.matchings[fi].edges() {
                    out.push(e.clone());
                }
            }
        }
    }
    for (j, (_, e)) in m2.iter().enumerate() {
        if !returned[j] {
            out.push(e.clone());
        }
    }
    let released_set: Vec<usize> = released;
    for (j, (src, e)) in pool.iter().enumerate() {
        if src.is_none() && !released_set.contains(&j) {
            out.push(e.clone());
        }
    }
    // Released edges of broken absorbers leave the rest of their matching.
    for (j, (src, e)) in pool.iter().enumerate() {
        if let Some(fi) = src {
            if broken[*fi] && !released_set.contains(&j) {
                out.push(e.clone());
            }
        }
    }
    let report = verify_matching(h, &out, true);
    if !report.is_ok() {
        return Err(Error::pipeline("absorb", format!("assembled matching failed: {report:?}")));
    }
    Ok(NonextremalOutcome::Perfect(out.canonical()))
}

fn index_vector_of(p: &Partition, s: &VertexSet) -> IndexVector {
    crate::lattice::index_vector(p, s)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::instances::{gen_planted_matching, gen_space_barrier};

    #[test]
    fn absorbing_basics() {
        let h = Hypergraph::complete(12, 3);
        let oracle = Oracle::default_budget();
        let t = VertexSet::from_iter(12, 0..9);
        let s = VertexSet::from_iter(12, 9..12);
        assert!(is_absorbing(&h, &oracle, &t, &s).unwrap());
        let empty = Hypergraph::empty(12, 3);
        assert!(!is_absorbing(&empty, &oracle, &t, &s).unwrap());
        let bad = VertexSet::from_iter(12, 0..2);
        assert!(is_absorbing(&h, &oracle, &t, &bad).is_err());
    }

    #[test]
    fn planted_absorber_matches_oracle() {
        let h = gen_planted_matching(15, 3, 20, 4).unwrap();
        let oracle = Oracle::default_budget();
        let planted: Vec<Vec<usize>> = h
            .edges()
            .iter()
            .filter(|e| e.iter().all(|&v| v < 15))
            .take(3)
            .cloned()
            .collect();
        let t = VertexSet::from_iter(15, planted.iter().flatten().copied());
        if t.len() == 9 {
            let s = t.complement().to_vec();
            let s = VertexSet::from_iter(15, s.into_iter().take(3));
            let expected = oracle.has_pm_on(&h, &t).unwrap() && oracle.has_pm_on(&h, &t.union(&s)).unwrap();
            assert_eq!(is_absorbing(&h, &oracle, &t, &s).unwrap(), expected);
        }
    }

    #[test]
    fn family_on_complete_graph() {
        let h = Hypergraph::complete(12, 3);
        let oracle = Oracle::default_budget();
        let p = Partition::single(12);
        let fam = build_absorbing_family(&h, &p, &NonextremalParams::default(), &oracle).unwrap();
        assert!(!fam.is_empty());
        for (set, m) in fam.sets.iter().zip(&fam.matchings) {
            assert_eq!(set.len(), 9);
            assert!(verify_matching(&h, m, false).is_ok());
            assert_eq!(m.vertices(12).to_vec(), *set);
        }
        let none = build_absorbing_family(&Hypergraph::empty(12, 3), &p, &NonextremalParams::default(), &oracle).unwrap();
        assert!(none.is_empty());
        assert_eq!(none.min_coverage, 0);
    }

    #[test]
    fn almost_pm_cases() {
        match almost_pm_or_independent(&Hypergraph::complete(9, 3), 0.1) {
            AlmostOutcome::Matching(m) => assert_eq!(m.len(), 3),
            other => panic!("{other:?}"),
        }
        let h = gen_space_barrier(30, 3, 9).unwrap();
        match almost_pm_or_independent(&h, 0.1) {
            AlmostOutcome::Independent(x) => {
                assert!(h.is_independent(&x));
                assert_eq!(x.len(), 21);
            }
            other => panic!("{other:?}"),
        }
    }

    #[test]
    fn driver_on_complete_graph() {
        let h = Hypergraph::complete(12, 3);
        let oracle = Oracle::default_budget();
        let out = nonextremal_pm(&h, &Partition::single(12), &Matching::empty(), &NonextremalParams::default(), &oracle).unwrap();
        match out {
            NonextremalOutcome::Perfect(m) => assert!(verify_matching(&h, &m, true).is_ok()),
            other => panic!("{other:?}"),
        }
    }

    #[test]
    fn release_reaches_lattice() {
        let l = EdgeLattice::new(2, &[vec![2, 1], vec![0, 3]]);
        let picked = release_edges(&l, &[1, 2], &[vec![3, 0], vec![1, 2]]).unwrap();
        let mut sum = vec![1, 2];
        for j in picked {
            add(&mut sum, &[vec![3, 0], vec![1, 2]][j]);
        }
        assert!(l.contains(&sum));
    }
}
