//! The extremal branch: an (A, B, C, D) split around a large independent
//! set, the four decision tests, cleaners and completion through a
//! k-partite perfect matching.

use itertools::Itertools;

use crate::certificates::{verify_certificate, Certificate};
use crate::derandomize::SelectMode;
use crate::error::{Error, Result};
use crate::fpt::{color_coded_matching_with_fallback, Backend};
use crate::hypergraph::{verify_matching, Hypergraph, Matching};
use crate::instances::binomial;
use crate::kpartite::{kpartite_pm, KPartiteGraph};
use crate::oracle::Oracle;
use crate::vertex_set::VertexSet;

#[derive(Debug, Clone)]
pub struct ExtremalPartition {
    pub a: VertexSet,
    pub b: VertexSet,
    pub c: VertexSet,
    pub d: VertexSet,
    pub alpha: f64,
    /// `t = n/k - |A|`.
    pub t_deficit: i64,
    /// `s = |A| + |B| - n/k`.
    pub s: i64,
    /// Codegree deficit the split was built for.
    pub codegree_deficit: usize,
    /// `(v, deg(v, C))` over `B`, degree non-increasing.
    pub b_degrees: Vec<(usize, usize)>,
    pub warnings: Vec<String>,
    n: usize,
    k: usize,
}

impl ExtremalPartition {
    pub fn n(&self) -> usize {
        self.n
    }

    pub fn k(&self) -> usize {
        self.k
    }

    /// `|e ∩ A|`, `|e ∩ B|`, `|e ∩ C|`.
    pub fn form(&self, e: &[usize]) -> (usize, usize, usize) {
        let a = e.iter().filter(|&&v| self.a.contains(v)).count();
        let b = e.iter().filter(|&&v| self.b.contains(v)).count();
        (a, b, e.len() - a - b)
    }

    /// The `i` of an `i`-edge: `|e ∩ (A ∪ B)|`.
    pub fn order(&self, e: &[usize]) -> usize {
        let (a, b, _) = self.form(e);
        a + b
    }
}

/// Edges `e ∋ x` with `e ∖ {x} ⊆ C`.
fn deg_into(h: &Hypergraph, x: usize, c: &VertexSet) -> usize {
    h.incident(x)
        .iter()
        .filter(|&&i| h.edge(i).iter().all(|&v| v == x || c.contains(v)))
        .count()
}

/// Splits `V` around a maximal independent extension `C` of `s`.
pub fn build_abc(h: &Hypergraph, s: &VertexSet, eps: f64, c: usize) -> Result<ExtremalPartition> {
    let n = h.n();
    let k = h.k();
    if !h.is_independent(s) {
        return Err(Error::Precondition("seed set is not independent".into()));
    }
    if !(eps > 0.0) {
        return Err(Error::InvalidParameter(format!("ε = {eps} must be positive")));
    }
    let mut cset = s.clone();
    for v in 0..n {
        if cset.contains(v) {
            continue;
        }
        let blocked = h
            .incident(v)
            .iter()
            .any(|&i| h.edge(i).iter().all(|&x| x == v || cset.contains(x)));
        if !blocked {
            cset.insert(v);
        }
    }
    let alpha = eps.cbrt();
    let full = binomial(cset.len(), k - 1) as f64;
    let mut a = VertexSet::new(n);
    let mut b = VertexSet::new(n);
    let mut b_degrees = Vec::new();
    for x in cset.complement().iter() {
        let deg = deg_into(h, x, &cset);
        if deg as f64 >= (1.0 - alpha) * full {
            a.insert(x);
        } else {
            b.insert(x);
            b_degrees.push((x, deg));
        }
    }
    b_degrees.sort_by(|x, y| y.1.cmp(&x.1).then(x.0.cmp(&y.0)));
    let step = (k - 1) * binomial(cset.len(), k - 2);
    let d_size = (1..=b_degrees.len())
        .rev()
        .find(|&d| b_degrees[d - 1].1 > (d + c) * step)
        .unwrap_or(0);
    let d = VertexSet::from_iter(n, b_degrees[..d_size].iter().map(|&(v, _)| v));
    let nk = (n / k) as i64;
    let mut warnings = Vec::new();
    let a2n = alpha * alpha * n as f64;
    if (a.len() as f64) < nk as f64 - a2n {
        warnings.push(format!("|A| = {} below n/k - α²n = {:.2}", a.len(), nk as f64 - a2n));
    }
    if b.len() as f64 > a2n {
        warnings.push(format!("|B| = {} above α²n = {a2n:.2}", b.len()));
    }
    Ok(ExtremalPartition {
        t_deficit: nk - a.len() as i64,
        s: (a.len() + b.len()) as i64 - nk,
        a,
        b,
        c: cset,
        d,
        alpha,
        codegree_deficit: c,
        b_degrees,
        warnings,
        n,
        k,
    })
}

/// `s_M = |(A ∪ B) ∖ V(M)| - (n/k - |M|)`, cross-checked against
/// `s - Σ n_i (i - 1)`.
pub fn slack(part: &ExtremalPartition, m: &Matching) -> i64 {
    let covered = m.vertices(part.n);
    let ab_left = part
        .a
        .union(&part.b)
        .iter()
        .filter(|&v| !covered.contains(v))
        .count() as i64;
    let direct = ab_left - ((part.n / part.k) as i64 - m.len() as i64);
    let by_edges = part.s
        - m.edges()
            .iter()
            .map(|e| part.order(e) as i64 - 1)
            .sum::<i64>();
    assert_eq!(direct, by_edges, "slack formulas disagree");
    direct
}

/// Some `{v} ∪ S ∪ {w}` edge with `S` a `(k-2)`-subset of `C ∖ avoid` and
/// `w ∉ B ∪ avoid` allowed by `completion`.
fn cover_one(
    h: &Hypergraph,
    part: &ExtremalPartition,
    v: usize,
    avoid: &VertexSet,
    completion: &dyn Fn(usize) -> bool,
) -> Option<Vec<usize>> {
    let k = h.k();
    let free_c: Vec<usize> = part.c.iter().filter(|&x| !avoid.contains(x)).collect();
    for s in free_c.iter().copied().combinations(k - 2).take(512) {
        let mut base = s;
        base.push(v);
        base.sort_unstable();
        let w = h
            .neighborhood(&base)
            .iter()
            .copied()
            .find(|&w| !part.b.contains(w) && !avoid.contains(w) && completion(w));
        if let Some(w) = w {
            base.push(w);
            base.sort_unstable();
            return Some(base);
        }
    }
    None
}

fn cover_b_inner(
    h: &Hypergraph,
    part: &ExtremalPartition,
    targets: &VertexSet,
    avoid: &VertexSet,
    completion: &dyn Fn(usize) -> bool,
) -> Result<Matching> {
    let mut used = avoid.clone();
    let mut m = Matching::empty();
    for v in targets.iter() {
        let e = cover_one(h, part, v, &used, completion)
            .ok_or_else(|| Error::pipeline("cover B", format!("greedy stuck at {v}")))?;
        e.iter().for_each(|&x| used.insert(x));
        m.push(e);
    }
    Ok(m)
}

/// Covers `B′` by `ABC^{k-2}` or `BC^{k-1}` edges avoiding `X`.
pub fn cover_b_greedy(h: &Hypergraph, part: &ExtremalPartition, b_prime: &VertexSet, x: &VertexSet) -> Result<Matching> {
    if x.len() > h.k() * part.b.len() {
        return Err(Error::Precondition(format!(
            "|X| = {} exceeds k|B| = {}",
            x.len(),
            h.k() * part.b.len()
        )));
    }
    if !b_prime.is_subset(&part.b) {
        return Err(Error::Precondition("B′ is not a subset of B".into()));
    }
    let avoid = x.union(&part.b.difference(b_prime));
    cover_b_inner(h, part, b_prime, &avoid, &|_| true)
}

fn cover_d_inner(h: &Hypergraph, part: &ExtremalPartition, avoid: &VertexSet) -> Result<Matching> {
    let mut used = avoid.clone();
    let mut m = Matching::empty();
    for &(v, _) in &part.b_degrees[..part.d.len()] {
        if used.contains(v) {
            return Err(Error::pipeline("cover D", format!("{v} already used")));
        }
        let e = h
            .incident(v)
            .iter()
            .map(|&i| h.edge(i))
            .find(|e| e.iter().all(|&x| x == v || (part.c.contains(x) && !used.contains(x))))
            .ok_or_else(|| Error::pipeline("cover D", format!("greedy stuck at {v}")))?
            .to_vec();
        e.iter().for_each(|&x| used.insert(x));
        m.push(e);
    }
    Ok(m)
}

/// Covers `D` by `BC^{k-1}` edges avoiding `C_*`.
pub fn cover_d(h: &Hypergraph, part: &ExtremalPartition, c_star: &VertexSet) -> Result<Matching> {
    let cap = (part.codegree_deficit + 1) * (h.k() - 1);
    if c_star.len() > cap {
        return Err(Error::Precondition(format!("|C_*| = {} exceeds (c+1)(k-1) = {cap}", c_star.len())));
    }
    cover_d_inner(h, part, c_star)
}

/// A matching covering `B` with even, non-negative slack.
#[derive(Debug, Clone, PartialEq)]
pub struct Cleaner {
    pub matching: Matching,
    pub slack: i64,
    pub strategy: &'static str,
}

fn audit_cleaner(h: &Hypergraph, part: &ExtremalPartition, m: Matching, strategy: &'static str) -> Result<Cleaner> {
    if !verify_matching(h, &m, false).is_ok() {
        return Err(Error::pipeline("cleaner", format!("{strategy}: not a matching")));
    }
    if !part.b.is_subset(&m.vertices(part.n)) {
        return Err(Error::pipeline("cleaner", format!("{strategy}: B not covered")));
    }
    let s = slack(part, &m);
    if s < 0 || s % 2 != 0 {
        return Err(Error::pipeline("cleaner", format!("{strategy}: slack {s}")));
    }
    Ok(Cleaner {
        matching: m,
        slack: s,
        strategy,
    })
}

fn union_all(n: usize, parts: &[&[usize]]) -> VertexSet {
    VertexSet::from_iter(n, parts.iter().flat_map(|p| p.iter().copied()))
}

fn joined(ms: &[&Matching]) -> Matching {
    let mut out = Matching::empty();
    ms.iter().for_each(|m| out.extend(m));
    out
}

/// Finds a cleaner. Strategies are tried in the order the case analysis
/// prescribes, then the remaining ones; each result is audited.
pub fn find_cleaner(h: &Hypergraph, part: &ExtremalPartition, m0: &Matching) -> Result<Cleaner> {
    let n = part.n;
    let s = part.s;
    let t = part.t_deficit;
    let d = part.d.len() as i64;
    let even_edges: Vec<&Vec<usize>> = h
        .edges()
        .iter()
        .filter(|e| {
            let i = part.order(e);
            i >= 2 && i % 2 == 0
        })
        .collect();
    let abc: Option<&Vec<usize>> = h.edges().iter().find(|e| {
        let (a, b, _) = part.form(e);
        a == 1 && b == 1
    });
    let any = |_: usize| true;
    let in_a = |w: usize| part.a.contains(w);

    let no_even = || -> Result<Matching> { cover_b_inner(h, part, &part.b, &VertexSet::new(n), &any) };

    let main_minus = || -> Result<Matching> {
        if s == 0 {
            let v0 = m0.vertices(n);
            let md = cover_d_inner(h, part, &v0)?;
            let used = v0.union(&md.vertices(n));
            let rest = part.b.difference(&used);
            let mb = cover_b_inner(h, part, &rest, &used, &any)?;
            return Ok(joined(&[m0, &md, &mb]));
        }
        if s % 2 == 0 {
            return cover_b_inner(h, part, &part.b, &VertexSet::new(n), &any);
        }
        let e0 = even_edges
            .iter()
            .min_by_key(|e| part.order(e))
            .ok_or_else(|| Error::pipeline("cleaner", "no even edge"))?;
        if s < part.order(e0) as i64 - 1 {
            return Err(Error::pipeline("cleaner", "slack below the even edge's order"));
        }
        let used = union_all(n, &[e0]);
        let rest = part.b.difference(&used);
        let mb = cover_b_inner(h, part, &rest, &used, &any)?;
        Ok(joined(&[&Matching::new(vec![e0.to_vec()]), &mb]))
    };

    // Main strategy: M = M1 ∪ M2 with M1's A-edge count matching the parity
    // of M2's slack.
    let main = || -> Result<Matching> {
        let e0 = abc.ok_or_else(|| Error::pipeline("cleaner", "no ABC^{k-2} edge"))?;
        if s <= 0 {
            return Err(Error::pipeline("cleaner", "main strategy needs s > 0"));
        }
        let x = *e0.iter().find(|&&v| part.b.contains(v)).expect("ABC edge meets B");
        if part.d == part.b {
            let avoid = union_all(n, &[e0]).difference(&part.b);
            let m_prime = cover_d_inner(h, part, &avoid)?;
            if s % 2 == 0 {
                return Ok(m_prime);
            }
            let mut m1 = Matching::empty();
            for e in m_prime.edges() {
                m1.push(if e.contains(&x) { e0.to_vec() } else { e.clone() });
            }
            return Ok(m1);
        }
        if t <= d {
            let v = part.b.difference(&part.d).min().expect("B ∖ D non-empty");
            let e_prime = h
                .incident(v)
                .iter()
                .map(|&i| h.edge(i))
                .find(|e| part.form(e) == (1, 1, h.k() - 2))
                .ok_or_else(|| Error::pipeline("cleaner", format!("no ABC^{{k-2}} edge at {v}")))?
                .to_vec();
            let e_v = h
                .incident(v)
                .iter()
                .map(|&i| h.edge(i))
                .find(|e| part.form(e) == (0, 1, h.k() - 1) && e.iter().all(|&y| y == v || !e_prime.contains(&y)))
                .ok_or_else(|| Error::pipeline("cleaner", format!("no BC^{{k-1}} edge at {v}")))?
                .to_vec();
            let around = union_all(n, &[&e_prime, &e_v]);
            let m_prime = cover_d_inner(h, part, &around)?;
            let used = around.union(&m_prime.vertices(n));
            let mut rest = part.b.difference(&part.d);
            rest.remove(v);
            let m2 = cover_b_inner(h, part, &rest, &used, &any)?;
            let pick = if slack(part, &m2) % 2 == 0 { e_v } else { e_prime };
            return Ok(joined(&[&m_prime, &Matching::new(vec![pick]), &m2]));
        }
        let v0 = m0.vertices(n);
        let e_star = h
            .edges()
            .iter()
            .find(|e| part.form(e) == (0, 1, h.k() - 1) && !e.iter().any(|&y| part.d.contains(y) || v0.contains(y)))
            .ok_or_else(|| Error::pipeline("cleaner", "no BC^{k-1} edge avoiding D ∪ V(M0)"))?;
        let v = *e_star.iter().find(|&&y| part.b.contains(y)).expect("BC edge meets B");
        let base = v0.union(&union_all(n, &[e_star]));
        let md = cover_d_inner(h, part, &base)?;
        let m_prime = joined(&[m0, &Matching::new(vec![e_star.clone()]), &md]);
        let vm = m_prime.vertices(n);
        let e_v = h
            .incident(v)
            .iter()
            .map(|&i| h.edge(i))
            .find(|e| part.form(e) == (1, 1, h.k() - 2) && e.iter().all(|&y| y == v || !vm.contains(y)))
            .ok_or_else(|| Error::pipeline("cleaner", format!("no ABC^{{k-2}} edge at {v} avoiding M′")))?
            .to_vec();
        let used = vm.union(&union_all(n, &[&e_v]));
        let rest = part.b.difference(&vm);
        let m2 = cover_b_inner(h, part, &rest, &used, &any)?;
        if slack(part, &m2) % 2 == 0 {
            Ok(joined(&[&m_prime, &m2]))
        } else {
            let mut m1 = Matching::empty();
            for e in m_prime.edges() {
                m1.push(if e == e_star { e_v.clone() } else { e.clone() });
            }
            Ok(joined(&[&m1, &m2]))
        }
    };

    // Second strategy: M0, then D by BC^{k-1} edges, then the rest of B by
    // ABC^{k-2} edges.
    let second = || -> Result<Matching> {
        let v0 = m0.vertices(n);
        let md = cover_d_inner(h, part, &v0)?;
        let used = v0.union(&md.vertices(n));
        let rest = part.b.difference(&used);
        let mb = cover_b_inner(h, part, &rest, &used, &in_a)?;
        Ok(joined(&[m0, &md, &mb]))
    };

    type Strategy<'a> = (&'static str, Box<dyn Fn() -> Result<Matching> + 'a>);
    let mut order: Vec<Strategy> = Vec::new();
    let main_applies = s > 0 && abc.is_some();
    let main_minus_applies = s == 0 || (!even_edges.is_empty() && abc.is_none());
    if even_edges.is_empty() {
        order.push(("no-even-edges", Box::new(no_even)));
    } else if main_minus_applies {
        order.push(("no-abc-edge", Box::new(main_minus)));
    } else if main_applies {
        order.push(("main", Box::new(main)));
        order.push(("second", Box::new(second)));
    }
    let fallback: Vec<Strategy> = vec![
        ("no-even-edges", Box::new(no_even)),
        ("no-abc-edge", Box::new(main_minus)),
        ("main", Box::new(main)),
        ("second", Box::new(second)),
    ];
    for (name, f) in fallback {
        if !order.iter().any(|(o, _)| *o == name) {
            order.push((name, f));
        }
    }
    let mut reasons = Vec::new();
    for (name, f) in &order {
        match f().and_then(|m| audit_cleaner(h, part, m, name)) {
            Ok(c) => return Ok(c),
            Err(e) => reasons.push(format!("{name}: {e}")),
        }
    }
    Err(Error::pipeline("cleaner", format!("no strategy applicable ({})", reasons.join("; "))))
}

/// Extends a cleaner to a perfect matching: zero the slack with `A²C^{k-2}`
/// (or `A³C^{k-3}`) edges, then match `A′` against `C′` cut into `k-1`
/// equal parts.
pub fn finish_with_cleaner(h: &Hypergraph, part: &ExtremalPartition, cleaner: &Cleaner, mode: SelectMode) -> Result<Matching> {
    let n = part.n;
    let k = part.k;
    assert!(cleaner.slack >= 0 && cleaner.slack % 2 == 0, "not a cleaner");
    let mut m = cleaner.matching.clone();
    if cleaner.slack > 0 {
        let sm = cleaner.slack as usize;
        let pick = |form: (usize, usize, usize), want: usize| -> Option<Vec<Vec<usize>>> {
            let mut used = m.vertices(n);
            let mut out = Vec::new();
            for e in h.edges() {
                if out.len() == want {
                    break;
                }
                if part.form(e) == form && !used.contains_any(e) {
                    e.iter().for_each(|&v| used.insert(v));
                    out.push(e.clone());
                }
            }
            (out.len() == want).then_some(out)
        };
        let extra = pick((2, 0, k - 2), sm)
            .or_else(|| if k >= 3 { pick((3, 0, k - 3), sm / 2) } else { None })
            .ok_or_else(|| Error::pipeline("finish", format!("too few A²C / A³C edges for slack {sm}")))?;
        extra.into_iter().for_each(|e| m.push(e));
    }
    let covered = m.vertices(n);
    let a_rest: Vec<usize> = part.a.iter().filter(|&v| !covered.contains(v)).collect();
    let c_rest: Vec<usize> = part.c.iter().filter(|&v| !covered.contains(v)).collect();
    assert_eq!(c_rest.len(), (k - 1) * a_rest.len(), "|C′| ≠ (k-1)|A′| after balancing");
    if !a_rest.is_empty() {
        let mut parts = vec![a_rest.clone()];
        parts.extend(c_rest.chunks(a_rest.len()).map(<[usize]>::to_vec));
        let g = KPartiteGraph::from_host(h, parts)?;
        let mp = a_rest.len();
        let rest = mp.pow(k as u32 - 1);
        let (d1, drest) = g.min_degrees();
        let measured = (1.0 - d1 as f64 / rest as f64).max(1.0 - drest as f64 / mp as f64);
        // The measured deficit can exceed the α-bound at small n; the
        // matcher is run with it and its output verified.
        let gamma = measured.max(0.0);
        let run = kpartite_pm(&g, gamma, mode).map_err(|e| match e {
            Error::Pipeline { .. } => e,
            other => Error::pipeline("finish", other.to_string()),
        })?;
        m.extend(&run.matching);
    }
    let report = verify_matching(h, &m, true);
    if !report.is_ok() {
        return Err(Error::pipeline("finish", format!("{report:?}")));
    }
    Ok(m.canonical())
}

#[derive(Debug, Clone)]
pub struct ExtremalParams {
    pub eps: f64,
    pub c: usize,
    /// Below this order the oracle decides.
    pub n0: usize,
    pub backend: Backend,
    pub mode: SelectMode,
}

impl ExtremalParams {
    pub fn new(eps: f64, c: usize) -> Self {
        ExtremalParams {
            eps,
            c,
            n0: 16,
            backend: Backend::exhaustive(),
            mode: SelectMode::Deterministic,
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub enum ExtremalOutcome {
    Perfect(Matching),
    NoPm(Certificate),
}

/// What the extremal run did, for audits.
#[derive(Debug, Clone)]
pub struct ExtremalRun {
    pub outcome: ExtremalOutcome,
    pub partition: Option<ExtremalPartition>,
    pub cleaner: Option<Cleaner>,
    /// `Some(t - d ≤ c)` when the preconditions of that bound were verified.
    pub t_minus_d_checked: Option<bool>,
    /// Which test decided.
    pub decided_by: &'static str,
}

fn certified(h: &Hypergraph, cert: Certificate) -> Result<ExtremalOutcome> {
    let report = verify_certificate(h, &cert);
    if report.is_ok() {
        Ok(ExtremalOutcome::NoPm(cert))
    } else {
        Err(Error::pipeline("extremal", format!("certificate failed verification: {report:?}")))
    }
}

/// Decides a perfect matching of `H` from a large independent set `s`.
/// Assumes `H` is not a parity barrier; certificates are verified before
/// they are returned.
pub fn extremal_pm(h: &Hypergraph, s: &VertexSet, params: &ExtremalParams, oracle: &Oracle) -> Result<ExtremalRun> {
    let n = h.n();
    let k = h.k();
    if n % k != 0 {
        return Err(Error::Precondition(format!("{k} does not divide {n}")));
    }
    if n < params.n0 {
        let outcome = match oracle.perfect_matching_on(h, &VertexSet::full(n))? {
            Some(m) => ExtremalOutcome::Perfect(m.canonical()),
            None => certified(
                h,
                Certificate::NoCleanupMatching {
                    region: (0..n).collect(),
                    size: n / k,
                },
            )?,
        };
        return Ok(ExtremalRun {
            outcome,
            partition: None,
            cleaner: None,
            t_minus_d_checked: None,
            decided_by: "oracle",
        });
    }
    let part = build_abc(h, s, params.eps, params.c)?;
    let run = |outcome, decided_by, cleaner, checked| ExtremalRun {
        outcome,
        partition: Some(part.clone()),
        cleaner,
        t_minus_d_checked: checked,
        decided_by,
    };
    if part.c.len() > (k - 1) * n / k {
        let cert = Certificate::OversizeIndependent { c: part.c.to_vec() };
        return Ok(run(certified(h, cert)?, "oversize", None, None));
    }
    let sl = part.s;
    if sl % 2 == 1 {
        let even_low = h.edges().iter().any(|e| {
            let j = part.order(e) as i64;
            j % 2 == 0 && j <= sl + 1
        });
        if !even_low {
            let cert = Certificate::OddSlackNoEvenEdge {
                s: sl as usize,
                c: part.c.to_vec(),
            };
            return Ok(run(certified(h, cert)?, "odd-slack", None, None));
        }
    }

    let d = part.d.len() as i64;
    let c = params.c as i64;
    let checked = {
        let cdeg = h.min_codegree().unwrap_or(0) as i64;
        let step = (k - 1) as u128 * binomial(part.c.len(), k - 2) as u128;
        let lhs = part.b.len() as u128 * (d as u128 + 1 + c as u128) * step;
        let rigorous = cdeg >= (n / k) as i64 - c && lhs < binomial(part.c.len(), k - 1) as u128;
        rigorous.then(|| {
            let ok = part.t_deficit - d <= c;
            assert!(ok, "t - d = {} exceeds c = {c}", part.t_deficit - d);
            ok
        })
    };
    let need = (part.t_deficit - d).max(0) as usize;
    let region = part.b.difference(&part.d).union(&part.c);
    let found = color_coded_matching_with_fallback(h, &region, need, params.backend, oracle)?;
    let Some(m0) = found.matching else {
        let cert = Certificate::NoCleanupMatching {
            region: region.to_vec(),
            size: need,
        };
        return Ok(run(certified(h, cert)?, "no-cleanup", None, checked));
    };
    let cleaner = find_cleaner(h, &part, &m0)?;
    let pm = finish_with_cleaner(h, &part, &cleaner, params.mode)?;
    Ok(run(ExtremalOutcome::Perfect(pm), "cleaner", Some(cleaner), checked))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::instances::{gen_extremal_planted, gen_space_barrier};

    #[test]
    fn abc_on_space_barrier() {
        let h = gen_space_barrier(9, 3, 2).unwrap();
        let s = VertexSet::from_iter(9, 2..9);
        let part = build_abc(&h, &s, 0.1, 1).unwrap();
        assert_eq!(part.c.to_vec(), (2..9).collect::<Vec<_>>());
        assert!(part.a.is_subset(&VertexSet::from_iter(9, 0..2)));
        assert_eq!(part.s, (part.a.len() + part.b.len()) as i64 - 3);
    }

    #[test]
    fn abc_on_complete_graph() {
        let h = Hypergraph::complete(9, 3);
        let part = build_abc(&h, &VertexSet::from_iter(9, [0, 1]), 0.1, 0).unwrap();
        assert_eq!(part.c.len(), 2);
        let scratch = build_abc(&h, &VertexSet::new(9), 0.1, 0).unwrap();
        assert_eq!(scratch.c.to_vec(), vec![0, 1]);
        assert!(build_abc(&h, &VertexSet::from_iter(9, [0, 1, 2]), 0.1, 0).is_err());
    }

    #[test]
    fn slack_formulas() {
        let h = gen_extremal_planted(18, 3, 1, 4, 1, true, 2).unwrap();
        let part = build_abc(&h, &VertexSet::new(18), 0.1, 1).unwrap();
        assert_eq!(slack(&part, &Matching::empty()), part.s);
        for e in h.edges().iter().take(50) {
            let m = Matching::new(vec![e.clone()]);
            assert_eq!(slack(&part, &m), part.s - (part.order(e) as i64 - 1));
        }
    }

    #[test]
    fn oversize_certificate() {
        let h = gen_space_barrier(18, 3, 5).unwrap();
        let s = VertexSet::from_iter(18, 5..18);
        let run = extremal_pm(&h, &s, &ExtremalParams::new(0.1, 1), &Oracle::default_budget()).unwrap();
        assert!(matches!(run.outcome, ExtremalOutcome::NoPm(Certificate::OversizeIndependent { .. })));
    }

    #[test]
    fn small_goes_to_oracle() {
        let h = gen_space_barrier(9, 3, 2).unwrap();
        let run = extremal_pm(&h, &VertexSet::from_iter(9, 2..9), &ExtremalParams::new(0.1, 1), &Oracle::default_budget()).unwrap();
        assert_eq!(run.decided_by, "oracle");
        assert!(matches!(run.outcome, ExtremalOutcome::NoPm(_)));
    }

    #[test]
    fn planted_extremal_pm() {
        for seed in 0..4 {
            let h = gen_extremal_planted(30, 3, 1, 6, 1, true, seed).unwrap();
            let y = VertexSet::from_iter(30, 9..30);
            let ind: Vec<usize> = {
                let mut set = VertexSet::new(30);
                for v in y.iter() {
                    set.insert(v);
                    if !h.is_independent(&set) {
                        set.remove(v);
                    }
                }
                set.to_vec()
            };
            let s = VertexSet::from_iter(30, ind);
            let run = extremal_pm(&h, &s, &ExtremalParams::new(0.15, 1), &Oracle::default_budget());
            match run {
                Ok(ExtremalRun {
                    outcome: ExtremalOutcome::Perfect(m),
                    cleaner,
                    ..
                }) => {
                    assert!(verify_matching(&h, &m, true).is_ok());
                    let c = cleaner.unwrap();
                    assert!(c.slack >= 0 && c.slack % 2 == 0);
                }
                other => panic!("seed {seed}: {other:?}"),
            }
        }
    }
}
