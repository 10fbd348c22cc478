//! End-to-end examples for the pipeline stages, checked against the
//! reference oracles.

mod common;

use itertools::Itertools;
use num_rational::Ratio;

use hypermatch::certificates::{verify_certificate, Certificate};
use hypermatch::extremal::{
    build_abc, cover_b_greedy, cover_d, extremal_pm, find_cleaner, finish_with_cleaner, ExtremalOutcome, ExtremalParams,
};
use hypermatch::derandomize::SelectMode;
use hypermatch::instances::{gen_extremal_planted, gen_parity_barrier, gen_random_codegree, gen_space_barrier};
use hypermatch::lattice::{robust_index_set, EdgeLattice, Partition};
use hypermatch::nonextremal::{almost_pm_or_independent, nonextremal_pm, AlmostOutcome, NonextremalOutcome, NonextremalParams};
use hypermatch::oracle::Oracle;
use hypermatch::reachability::{closed_partition, reachability_witnesses, ReachabilityParams};
use hypermatch::{solve_matching_size, solve_pm, Hypergraph, Matching, SolveConfig, SolveOutcome, VertexSet};

use common::{brute_nu, full_mask, has_pm_brute, is_matching};

fn reach(beta: Ratio<u64>) -> ReachabilityParams {
    ReachabilityParams {
        beta,
        ..ReachabilityParams::default()
    }
}

#[test]
fn witness_counts_match_a_scan() {
    for h in [Hypergraph::complete(9, 3), gen_space_barrier(12, 3, 3).unwrap(), gen_random_codegree(12, 3, 2, 4).unwrap()] {
        for (u, v) in (0..h.n()).tuple_combinations() {
            let scan = (0..h.n())
                .filter(|&x| x != u && x != v)
                .tuple_combinations::<(usize, usize)>()
                .filter(|&(a, b)| {
                    let with = |w: usize| {
                        let mut e = vec![a, b, w];
                        e.sort_unstable();
                        h.edges().contains(&e)
                    };
                    with(u) && with(v)
                })
                .count();
            assert_eq!(reachability_witnesses(&h, u, v, 1, 100).count, scan as f64);
        }
    }
    assert_eq!(reachability_witnesses(&Hypergraph::complete(9, 3), 0, 8, 1, 100).count, 21.0);
}

#[test]
fn closed_partitions() {
    let k9 = Hypergraph::complete(9, 3);
    assert_eq!(closed_partition(&k9, &reach(Ratio::new(6, 81)), 0.01).partition.d(), 1);
    let empty = Hypergraph::empty(6, 3);
    assert_eq!(closed_partition(&empty, &reach(Ratio::new(1, 1000)), 0.01).partition.d(), 6);
    // Across X and Y a witness pair must meet X evenly for one side and
    // oddly for the other, which never happens.
    let pb = gen_parity_barrier(12, 3, 5).unwrap();
    let p = closed_partition(&pb, &reach(Ratio::new(1, 100)), 0.01).partition;
    let mut parts: Vec<Vec<usize>> = p.parts().to_vec();
    parts.sort();
    assert_eq!(parts, vec![(0..5).collect::<Vec<_>>(), (5..12).collect()]);
}

#[test]
fn space_barrier_yields_the_independent_side() {
    let h = gen_space_barrier(30, 3, 9).unwrap();
    match almost_pm_or_independent(&h, 0.01) {
        AlmostOutcome::Independent(s) => {
            assert!(h.is_independent(&s));
            assert_eq!(s.len(), 21);
        }
        AlmostOutcome::Matching(m) => panic!("space barrier gave a matching of {} edges", m.len()),
    }
    let p = Partition::single(30);
    let m1 = Matching::empty();
    let out = nonextremal_pm(&h, &p, &m1, &NonextremalParams::default(), &Oracle::default_budget()).unwrap();
    // Absorbers take their vertices first, so only part of the 21-set is left.
    match out {
        NonextremalOutcome::Independent(s) => assert!(h.is_independent(&s) && s.len() > 10),
        NonextremalOutcome::Perfect(_) => panic!("space barrier has no perfect matching"),
    }
}

#[test]
fn complete_graph_runs_the_absorbing_pipeline() {
    let h = Hypergraph::complete(12, 3);
    let p = Partition::single(12);
    let out = nonextremal_pm(&h, &p, &Matching::empty(), &NonextremalParams::default(), &Oracle::default_budget()).unwrap();
    match out {
        NonextremalOutcome::Perfect(m) => assert!(is_matching(&h, m.edges(), true)),
        NonextremalOutcome::Independent(_) => panic!("complete graph has no large independent set"),
    }
    let robust = robust_index_set(&h, &p, Ratio::new(1, 1000));
    assert_eq!(EdgeLattice::from_robust(1, &robust).basis(), &[vec![3]]);
}

#[test]
fn cover_helpers() {
    // Vertex 0 of a space barrier keeps only the edges into a 10-set of C,
    // which is too few for A and enough for D.
    let n = 30;
    let mut h = gen_space_barrier(n, 3, 9).unwrap();
    let keep: Vec<usize> = (9..19).collect();
    let edges: Vec<Vec<usize>> = h
        .edges()
        .iter()
        .filter(|e| !(e[0] == 0 && e[1] >= 9 && !(keep.contains(&e[1]) && keep.contains(&e[2]))))
        .cloned()
        .collect();
    h = Hypergraph::new(n, 3, edges).unwrap();
    let c = VertexSet::from_iter(n, 9..n);
    let part = build_abc(&h, &c, 0.1, 0).unwrap();
    assert_eq!(part.c, c);
    assert_eq!(part.b.to_vec(), vec![0]);
    assert_eq!(part.d.to_vec(), vec![0]);
    let md = cover_d(&h, &part, &VertexSet::new(n)).unwrap();
    assert_eq!(md.len(), 1);
    assert!(md.edges()[0].contains(&0) && md.edges()[0][1..].iter().all(|&v| c.contains(v)));
    assert!(cover_d(&h, &part, &VertexSet::from_iter(n, 9..12)).is_err());

    let mb = cover_b_greedy(&h, &part, &part.b, &VertexSet::new(n)).unwrap();
    assert_eq!(mb.len(), 1);
    assert!(mb.edges().iter().all(|e| part.order(e) <= 2 && e.contains(&0)));
    assert!(cover_b_greedy(&h, &part, &VertexSet::new(n), &VertexSet::new(n)).unwrap().is_empty());
    assert!(cover_b_greedy(&h, &part, &part.b, &VertexSet::from_iter(n, 0..4)).is_err());

    // Without a D vertex the helper has nothing to do.
    let plain = gen_space_barrier(n, 3, 9).unwrap();
    let part = build_abc(&plain, &c, 0.1, 0).unwrap();
    assert!(part.d.is_empty());
    assert!(cover_d(&plain, &part, &VertexSet::new(n)).unwrap().is_empty());
}

/// All triples meeting `{0, .., s-1}` in a number of vertices from `sizes`.
fn meets(n: usize, s: usize, sizes: &[usize]) -> Hypergraph {
    let edges: Vec<Vec<usize>> = (0..n)
        .combinations(3)
        .filter(|e| sizes.contains(&e.iter().filter(|&&v| v < s).count()))
        .collect();
    Hypergraph::new(n, 3, edges).unwrap()
}

#[test]
fn cleaner_without_even_edges() {
    let h = meets(18, 8, &[1, 3]);
    let part = build_abc(&h, &VertexSet::from_iter(18, 8..18), 0.1, 0).unwrap();
    assert_eq!(part.s, 2);
    assert!(part.b.is_empty());
    let cleaner = find_cleaner(&h, &part, &Matching::empty()).unwrap();
    assert_eq!(cleaner.slack, 2);
    let pm = finish_with_cleaner(&h, &part, &cleaner, SelectMode::Deterministic).unwrap();
    assert!(is_matching(&h, pm.edges(), true));
}

#[test]
fn cleaner_with_odd_slack_uses_an_even_edge() {
    let h = meets(18, 7, &[1, 2, 3]);
    let part = build_abc(&h, &VertexSet::from_iter(18, 7..18), 0.1, 0).unwrap();
    assert_eq!(part.s, 1);
    let cleaner = find_cleaner(&h, &part, &Matching::empty()).unwrap();
    assert_eq!(cleaner.slack, 0);
    assert!(cleaner.matching.edges().iter().any(|e| part.order(e) == 2));
    let pm = finish_with_cleaner(&h, &part, &cleaner, SelectMode::Deterministic).unwrap();
    assert!(is_matching(&h, pm.edges(), true));
}

#[test]
fn extremal_certificates_and_matchings() {
    let oracle = Oracle::default_budget();
    let sb = gen_space_barrier(18, 3, 5).unwrap();
    let run = extremal_pm(&sb, &VertexSet::from_iter(18, 5..18), &ExtremalParams::new(0.1, 1), &oracle).unwrap();
    match run.outcome {
        ExtremalOutcome::NoPm(cert) => {
            assert!(matches!(cert, Certificate::OversizeIndependent { .. }));
            assert!(verify_certificate(&sb, &cert).is_ok());
        }
        ExtremalOutcome::Perfect(_) => panic!("space barrier has no perfect matching"),
    }
    // Odd slack and no even edge.
    let odd = meets(18, 7, &[1, 3]);
    let run = extremal_pm(&odd, &VertexSet::from_iter(18, 7..18), &ExtremalParams::new(0.1, 0), &oracle).unwrap();
    assert_eq!(run.decided_by, "odd-slack");
    assert!(!has_pm_brute(&odd));
    for seed in 0..3 {
        let h = gen_extremal_planted(36, 3, 2, 4, 2, true, seed).unwrap();
        let mut s = VertexSet::new(36);
        for v in 10..36 {
            s.insert(v);
            if !h.is_independent(&s) {
                s.remove(v);
            }
        }
        let run = extremal_pm(&h, &s, &ExtremalParams::new(0.15, 2), &oracle).unwrap();
        match run.outcome {
            ExtremalOutcome::Perfect(m) => assert!(is_matching(&h, m.edges(), true)),
            ExtremalOutcome::NoPm(c) => panic!("planted instance certified empty: {c:?}"),
        }
    }
}

#[test]
fn solver_examples() {
    let cfg = SolveConfig::default();
    let k9 = Hypergraph::complete(9, 3);
    match solve_pm(&k9, &cfg).outcome {
        SolveOutcome::Matching { matching, .. } => assert!(is_matching(&k9, matching.edges(), true)),
        other => panic!("{other:?}"),
    }
    let pb = gen_parity_barrier(9, 3, 2).unwrap();
    assert!(matches!(
        solve_pm(&pb, &cfg).outcome,
        SolveOutcome::Certificate { certificate: Certificate::ParityBarrier { .. }, .. }
    ));
    let sb = gen_space_barrier(9, 3, 2).unwrap();
    assert!(!has_pm_brute(&sb));
    assert_eq!(solve_pm(&sb, &cfg).outcome.has_matching(), Some(false));
}

#[test]
fn matching_sizes_follow_the_oracle() {
    let cfg = SolveConfig::default();
    for seed in 0..12u64 {
        let n = [9usize, 10, 11, 12][seed as usize % 4];
        let base = gen_random_codegree(12, 3, 3, seed).unwrap();
        let keep = VertexSet::from_iter(12, 0..n);
        let (h, _) = base.induced(&keep);
        let nu = brute_nu(&h, full_mask(n));
        for m in 1..=n / 3 {
            let sol = solve_matching_size(&h, m, &cfg).unwrap();
            assert_eq!(sol.outcome.has_matching(), Some(m <= nu), "seed {seed}, n {n}, m {m}, nu {nu}");
        }
    }
}

#[test]
fn solution_json_shape() {
    let sol = solve_pm(&gen_space_barrier(9, 3, 2).unwrap(), &SolveConfig::default());
    let v: serde_json::Value = serde_json::from_str(&sol.to_json()).unwrap();
    assert_eq!(v["outcome"], "no_pm");
    assert!(v["certificate"].is_object());
    assert_eq!(v["verification"]["status"], "ok");
    assert!(v["stats"]["stages"].is_array());
    let pm = solve_pm(&Hypergraph::complete(6, 3), &SolveConfig::default());
    let v: serde_json::Value = serde_json::from_str(&pm.to_json()).unwrap();
    assert_eq!(v["outcome"], "pm");
    assert_eq!(v["matching"].as_array().unwrap().len(), 2);
}
