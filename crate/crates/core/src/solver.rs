//! Top-level driver: certificates for the two barriers, the lattice test,
//! the non-extremal and extremal branches, and honest fallbacks.

use std::time::Instant;

use itertools::Itertools;
use num_rational::Ratio;
use rand::seq::SliceRandom;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::certificates::{augment, delete_vertices, parity_barrier_membership, verify_certificate, Certificate};
use crate::derandomize::SelectMode;
use crate::error::{Error, Result};
use crate::extremal::{extremal_pm, ExtremalOutcome, ExtremalParams};
use crate::fpt::Backend;
use crate::hypergraph::{verify_matching, Hypergraph, Matching, Report};
use crate::instances::binomial;
use crate::lattice::{coset_group, find_divisible_small_matching, robust_index_set, EdgeLattice};
use crate::nonextremal::{almost_pm_or_independent, nonextremal_pm, AlmostOutcome, NonextremalOutcome, NonextremalParams};
use crate::oracle::{Oracle, OracleBudget};
use crate::reachability::{closed_partition, ReachabilityParams};
use crate::vertex_set::VertexSet;

#[derive(Debug, Clone)]
pub struct SolveConfig {
    pub gamma: f64,
    pub mu: Ratio<u64>,
    pub beta: Ratio<u64>,
    /// Extremality parameter; `5kγ` when unset.
    pub eps: Option<f64>,
    /// Codegree deficit; `max(0, n/k - δ_{k-1})` when unset.
    pub c: Option<usize>,
    pub oracle_budget: OracleBudget,
    pub backend: Backend,
    pub seed: u64,
    /// Use the oracle and local repair when a stage fails.
    pub fallback: bool,
    /// Worker threads; `None` uses the global pool.
    pub threads: Option<usize>,
    pub reach_levels: usize,
    pub witness_budget: usize,
    /// Orders below this go straight to the oracle in the extremal branch.
    pub n0: usize,
    /// Node budget of the small divisible matching search.
    pub lattice_nodes: u64,
    /// Vertex-deletion sets tried by the size-m reduction.
    pub deletion_budget: usize,
    /// Oracle calls spent by the local repair.
    pub repair_rounds: usize,
}

impl Default for SolveConfig {
    fn default() -> Self {
        SolveConfig {
            gamma: 0.01,
            mu: Ratio::new(1, 1000),
            beta: Ratio::new(1, 1000),
            eps: None,
            c: None,
            oracle_budget: OracleBudget::default(),
            backend: Backend::exhaustive(),
            seed: 0,
            fallback: true,
            threads: None,
            reach_levels: 1,
            witness_budget: 20_000,
            n0: 16,
            lattice_nodes: 5_000_000,
            deletion_budget: 2_000,
            repair_rounds: 400,
        }
    }
}

impl SolveConfig {
    pub fn eps_for(&self, k: usize) -> f64 {
        self.eps.unwrap_or(5.0 * k as f64 * self.gamma)
    }

    pub fn validate(&self) -> Result<()> {
        let ok = self.gamma > 0.0
            && *self.mu.numer() > 0
            && *self.beta.numer() > 0
            && self.eps.is_none_or(|e| e > 0.0)
            && self.threads != Some(0);
        if ok {
            Ok(())
        } else {
            Err(Error::InvalidParameter("γ, μ, β, ε and threads must be positive".into()))
        }
    }

    fn nonextremal(&self) -> NonextremalParams {
        NonextremalParams {
            beta: self.beta,
            mu: self.mu,
            gamma: self.gamma,
            seed: self.seed,
            mode: match self.backend {
                Backend::Randomized { seed, .. } => SelectMode::Randomized { seed },
                Backend::Exhaustive { .. } => SelectMode::Deterministic,
            },
            ..NonextremalParams::default()
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "outcome", rename_all = "snake_case")]
pub enum SolveOutcome {
    #[serde(rename = "pm")]
    Matching { matching: Matching, verification: Report },
    #[serde(rename = "no_pm")]
    Certificate { certificate: Certificate, verification: Report },
    Undecided { stage: String, reason: String },
}

impl SolveOutcome {
    pub fn is_decided(&self) -> bool {
        !matches!(self, SolveOutcome::Undecided { .. })
    }

    /// `Some(true)` for a matching, `Some(false)` for a certificate.
    pub fn has_matching(&self) -> Option<bool> {
        match self {
            SolveOutcome::Matching { .. } => Some(true),
            SolveOutcome::Certificate { .. } => Some(false),
            SolveOutcome::Undecided { .. } => None,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct StageStat {
    pub stage: String,
    pub millis: f64,
    pub note: String,
}

#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
pub struct Stats {
    pub stages: Vec<StageStat>,
    pub total_millis: f64,
}

impl Stats {
    fn from_stages(stages: Vec<StageStat>) -> Self {
        let total_millis = stages.iter().map(|s| s.millis).sum();
        Stats { stages, total_millis }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Solution {
    #[serde(flatten)]
    pub outcome: SolveOutcome,
    pub stats: Stats,
}

impl Solution {
    pub fn to_json(&self) -> String {
        serde_json::to_string(self).expect("solution serializes")
    }
}

struct Recorder {
    stats: Vec<StageStat>,
}

impl Recorder {
    fn run<T>(&mut self, stage: &str, f: impl FnOnce() -> T, note: impl FnOnce(&T) -> String) -> T {
        let start = Instant::now();
        let out = f();
        self.stats.push(StageStat {
            stage: stage.into(),
            millis: start.elapsed().as_secs_f64() * 1e3,
            note: note(&out),
        });
        out
    }
}

fn matching_outcome(h: &Hypergraph, m: Matching) -> Option<SolveOutcome> {
    let m = m.canonical();
    let verification = verify_matching(h, &m, true);
    verification.is_ok().then_some(SolveOutcome::Matching { matching: m, verification })
}

fn certificate_outcome(h: &Hypergraph, cert: Certificate) -> SolveOutcome {
    let verification = verify_certificate(h, &cert);
    if verification.is_ok() {
        SolveOutcome::Certificate {
            certificate: cert,
            verification,
        }
    } else {
        SolveOutcome::Undecided {
            stage: "verify".into(),
            reason: format!("certificate not verified: {verification:?}"),
        }
    }
}

/// Decides whether `H` has a perfect matching. Every matching and every
/// certificate returned has passed verification.
pub fn solve_pm(h: &Hypergraph, cfg: &SolveConfig) -> Solution {
    let mut rec = Recorder { stats: Vec::new() };
    let pool = cfg
        .threads
        .and_then(|t| rayon::ThreadPoolBuilder::new().num_threads(t).build().ok());
    let outcome = match &pool {
        Some(pool) => pool.install(|| solve_inner(h, cfg, &mut rec)),
        None => solve_inner(h, cfg, &mut rec),
    };
    Solution {
        outcome,
        stats: Stats::from_stages(rec.stats),
    }
}

fn solve_inner(h: &Hypergraph, cfg: &SolveConfig, rec: &mut Recorder) -> SolveOutcome {
    let n = h.n();
    let k = h.k();
    if let Err(e) = cfg.validate() {
        return SolveOutcome::Undecided {
            stage: "config".into(),
            reason: e.to_string(),
        };
    }
    if n % k != 0 {
        return certificate_outcome(h, Certificate::Indivisible { n, k });
    }
    let oracle = Oracle::new(cfg.oracle_budget);

    let parity = rec.run("parity", || parity_barrier_membership(h), |x| format!("member: {}", x.is_some()));
    if let Some(x) = parity {
        return certificate_outcome(h, Certificate::ParityBarrier { x: x.to_vec() });
    }

    let failure = match main_pipeline(h, cfg, &oracle, rec) {
        Ok(outcome) => return outcome,
        Err(e) => e,
    };
    let (stage, reason) = match &failure {
        Error::Pipeline { stage, reason } => (stage.to_string(), reason.clone()),
        other => ("pipeline".to_string(), other.to_string()),
    };
    if !cfg.fallback {
        return SolveOutcome::Undecided { stage, reason };
    }
    fallback(h, cfg, &oracle, rec, stage, reason)
}

fn main_pipeline(h: &Hypergraph, cfg: &SolveConfig, oracle: &Oracle, rec: &mut Recorder) -> Result<SolveOutcome> {
    let n = h.n();
    let k = h.k();
    let reach = ReachabilityParams {
        beta: cfg.beta,
        i_levels: cfg.reach_levels,
        witness_budget: cfg.witness_budget,
    };
    let closed = rec.run(
        "partition",
        || closed_partition(h, &reach, cfg.gamma),
        |c| format!("d = {}", c.partition.d()),
    );
    let p = closed.partition;
    let (lattice, group) = rec.run(
        "lattice",
        || {
            let robust = robust_index_set(h, &p, cfg.mu);
            let lattice = EdgeLattice::from_robust(p.d(), &robust);
            let group = coset_group(k, &lattice);
            (lattice, group)
        },
        |(l, g)| format!("rank {}, |G| = {:?}", l.rank(), g.as_ref().ok().and_then(|g| g.size)),
    );
    let group = group?;
    let m1 = rec.run(
        "small-matching",
        || find_divisible_small_matching(h, &p, &lattice, cfg.lattice_nodes),
        |m| format!("{:?}", m.as_ref().map(|m| m.as_ref().map(Matching::len))),
    )?;
    let Some(m1) = m1 else {
        if group.size.is_some_and(|g| g as usize <= k) {
            return Ok(certificate_outcome(
                h,
                Certificate::LatticeObstruction {
                    partition: p,
                    mu: cfg.mu,
                },
            ));
        }
        return Err(Error::pipeline("lattice", "no divisible small matching and the coset group exceeds k"));
    };

    let params = cfg.nonextremal();
    let branch = rec.run(
        "nonextremal",
        || nonextremal_pm(h, &p, &m1, &params, oracle),
        |r| match r {
            Ok(NonextremalOutcome::Perfect(_)) => "perfect".into(),
            Ok(NonextremalOutcome::Independent(x)) => format!("independent set of {}", x.len()),
            Err(e) => e.to_string(),
        },
    )?;
    let independent = match branch {
        NonextremalOutcome::Perfect(m) => {
            return matching_outcome(h, m).ok_or_else(|| Error::pipeline("nonextremal", "matching failed verification"));
        }
        NonextremalOutcome::Independent(x) => x,
    };

    let c = cfg.c.unwrap_or_else(|| (n / k).saturating_sub(h.min_codegree().unwrap_or(0)));
    let ext = ExtremalParams {
        eps: cfg.eps_for(k),
        c,
        n0: cfg.n0,
        backend: cfg.backend,
        mode: params.mode,
    };
    let run = rec.run(
        "extremal",
        || extremal_pm(h, &independent, &ext, oracle),
        |r| match r {
            Ok(run) => format!("decided by {}", run.decided_by),
            Err(e) => e.to_string(),
        },
    )?;
    match run.outcome {
        ExtremalOutcome::Perfect(m) => {
            matching_outcome(h, m).ok_or_else(|| Error::pipeline("extremal", "matching failed verification"))
        }
        ExtremalOutcome::NoPm(cert) => Ok(certificate_outcome(h, cert)),
    }
}

fn fallback(
    h: &Hypergraph,
    cfg: &SolveConfig,
    oracle: &Oracle,
    rec: &mut Recorder,
    stage: String,
    reason: String,
) -> SolveOutcome {
    let n = h.n();
    let k = h.k();
    if n <= cfg.oracle_budget.max_vertices {
        let exact = rec.run(
            "oracle",
            || oracle.perfect_matching_on(h, &VertexSet::full(n)),
            |r| format!("{:?}", r.as_ref().map(Option::is_some)),
        );
        match exact {
            Ok(Some(m)) => {
                if let Some(out) = matching_outcome(h, m) {
                    return out;
                }
            }
            Ok(None) => {
                return certificate_outcome(
                    h,
                    Certificate::NoCleanupMatching {
                        region: (0..n).collect(),
                        size: n / k,
                    },
                )
            }
            Err(_) => {}
        }
    }
    let repaired = rec.run(
        "repair",
        || local_repair(h, oracle, cfg.seed, cfg.repair_rounds),
        |m| format!("{:?}", m.as_ref().map(Matching::len)),
    );
    if let Some(out) = repaired.and_then(|m| matching_outcome(h, m)) {
        return out;
    }
    SolveOutcome::Undecided { stage, reason }
}

/// Grows an almost perfect matching by re-solving small windows exactly:
/// the uncovered vertices plus a few matched edges are handed to the
/// oracle, and the window is replaced whenever it gains an edge.
fn local_repair(h: &Hypergraph, oracle: &Oracle, seed: u64, rounds: usize) -> Option<Matching> {
    let n = h.n();
    let k = h.k();
    let window = oracle.budget().max_vertices.min(n);
    let mut m: Vec<Vec<usize>> = match almost_pm_or_independent(h, 0.01) {
        AlmostOutcome::Matching(m) => m.into_edges(),
        AlmostOutcome::Independent(_) => {
            let mut used = VertexSet::new(n);
            h.edges()
                .iter()
                .filter(|e| {
                    let free = !used.contains_any(e);
                    if free {
                        e.iter().for_each(|&v| used.insert(v));
                    }
                    free
                })
                .cloned()
                .collect()
        }
    };
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    for _ in 0..rounds {
        let covered = VertexSet::from_iter(n, m.iter().flatten().copied());
        let free: Vec<usize> = covered.complement().to_vec();
        if free.is_empty() {
            return Some(Matching::new(m));
        }
        let take_free = free.len().min(window.saturating_sub(k) / k * k).max(k.min(free.len()));
        let mut chosen_free: Vec<usize> = free.clone();
        chosen_free.shuffle(&mut rng);
        chosen_free.truncate(take_free);
        let slots = window.saturating_sub(chosen_free.len()) / k;
        // Prefer matched edges with a vertex adjacent to a free vertex.
        let mut order: Vec<usize> = (0..m.len()).collect();
        order.shuffle(&mut rng);
        let touches = |e: &[usize]| {
            e.iter().any(|&v| {
                h.incident(v)
                    .iter()
                    .any(|&i| h.edge(i).iter().any(|x| chosen_free.contains(x)))
            })
        };
        order.sort_by_key(|&i| !touches(&m[i]));
        order.truncate(slots);
        let mut region = VertexSet::from_iter(n, chosen_free.iter().copied());
        for &i in &order {
            m[i].iter().for_each(|&v| region.insert(v));
        }
        let Ok(best) = oracle.exact_max_matching(h, &region) else {
            continue;
        };
        if best.len() > order.len() {
            order.sort_unstable_by(|a, b| b.cmp(a));
            for i in order {
                m.swap_remove(i);
            }
            m.extend(best.into_edges());
        }
    }
    let covered = m.iter().flatten().count();
    (covered == n).then(|| Matching::new(m))
}

/// Decides whether `H` has a matching of `m` edges, by padding with new
/// vertices or deleting a few vertices until the question is about a
/// perfect matching.
pub fn solve_matching_size(h: &Hypergraph, m: usize, cfg: &SolveConfig) -> Result<Solution> {
    let n = h.n();
    let k = h.k();
    if m == 0 || m * k > n {
        return Err(Error::InvalidParameter(format!("need 0 < m ≤ n/k, got m = {m}")));
    }
    if m * k == n {
        return Ok(solve_pm(h, cfg));
    }
    let spare = n - m * k;
    if spare % (k - 1) == 0 {
        let t = spare / (k - 1);
        let big = augment(h, t);
        let sol = solve_pm(&big, cfg);
        let outcome = match sol.outcome {
            SolveOutcome::Matching { matching, .. } => {
                let mut edges: Vec<Vec<usize>> = matching.into_edges().into_iter().filter(|e| e[k - 1] < n).collect();
                edges.sort_unstable();
                edges.truncate(m);
                let mm = Matching::new(edges);
                let verification = verify_matching(h, &mm, false);
                if verification.is_ok() && mm.len() == m {
                    SolveOutcome::Matching {
                        matching: mm,
                        verification,
                    }
                } else {
                    SolveOutcome::Undecided {
                        stage: "size".into(),
                        reason: "padded matching did not map back".into(),
                    }
                }
            }
            SolveOutcome::Certificate { certificate, .. } => certificate_outcome(
                h,
                Certificate::Augmented {
                    added: t,
                    inner: Box::new(certificate),
                },
            ),
            undecided => undecided,
        };
        return Ok(Solution {
            outcome,
            stats: sol.stats,
        });
    }

    let s = spare % (k - 1);
    let total = binomial(n, s);
    let mut subsets: Vec<Vec<usize>> = if total <= cfg.deletion_budget {
        (0..n).combinations(s).collect()
    } else {
        let mut rng = ChaCha8Rng::seed_from_u64(cfg.seed);
        let mut picked: Vec<Vec<usize>> = (0..cfg.deletion_budget)
            .map(|_| {
                let mut d = rand::seq::index::sample(&mut rng, n, s).into_vec();
                d.sort_unstable();
                d
            })
            .collect();
        picked.sort();
        picked.dedup();
        picked
    };
    subsets.sort();
    let mut stats = Vec::new();
    let mut certs = Vec::new();
    for deleted in subsets {
        let (sub, labels) = delete_vertices(h, &deleted);
        let sol = solve_matching_size(&sub, m, cfg)?;
        stats.extend(sol.stats.stages);
        match sol.outcome {
            SolveOutcome::Matching { matching, .. } => {
                let mapped = Matching::new(
                    matching
                        .edges()
                        .iter()
                        .map(|e| e.iter().map(|&v| labels[v]).collect())
                        .collect(),
                );
                let verification = verify_matching(h, &mapped, false);
                if verification.is_ok() && mapped.len() == m {
                    return Ok(Solution {
                        outcome: SolveOutcome::Matching {
                            matching: mapped.canonical(),
                            verification,
                        },
                        stats: Stats::from_stages(stats),
                    });
                }
            }
            SolveOutcome::Certificate { certificate, .. } => certs.push((deleted, certificate)),
            SolveOutcome::Undecided { stage, reason } => {
                return Ok(Solution {
                    outcome: SolveOutcome::Undecided { stage, reason },
                    stats: Stats::from_stages(stats),
                })
            }
        }
    }
    let outcome = if total <= cfg.deletion_budget {
        certificate_outcome(h, Certificate::PerDeletion { s, certs })
    } else {
        SolveOutcome::Undecided {
            stage: "size".into(),
            reason: format!("sampled {} of {total} vertex deletions without a matching", certs.len()),
        }
    };
    Ok(Solution {
        outcome,
        stats: Stats::from_stages(stats),
    })
}
