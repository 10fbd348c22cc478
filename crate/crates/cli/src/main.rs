use std::path::{Path, PathBuf};
use std::process::ExitCode;
use std::time::Instant;

use clap::{Parser, Subcommand, ValueEnum};
use num_rational::Ratio;
use serde_json::{json, Map, Value};

use hypermatch::certificates::{verify_certificate, Certificate};
use hypermatch::fpt::{color_coded_matching_with_fallback, Backend};
use hypermatch::instances::{gen_random_codegree, gen_space_barrier, GeneratorSpec};
use hypermatch::io::{parse_instance, to_json, to_text};
use hypermatch::oracle::{Oracle, OracleBudget};
use hypermatch::{solve_matching_size, solve_pm, Hypergraph, Solution, SolveConfig, SolveOutcome, VertexSet};

const EXIT_OK: u8 = 0;
const EXIT_NO_PM: u8 = 1;
const EXIT_UNDECIDED: u8 = 2;
const EXIT_INPUT: u8 = 3;

#[derive(Parser)]
#[command(name = "hypermatch", version, about = "Perfect matchings in dense k-uniform hypergraphs")]
struct Cli {
    #[command(flatten)]
    opts: Opts,
    #[command(subcommand)]
    cmd: Cmd,
}

#[derive(clap::Args)]
struct Opts {
    #[arg(long, global = true, default_value_t = 0.01)]
    gamma: f64,
    /// Robustness threshold, as a fraction `a/b` or a decimal.
    #[arg(long, global = true, default_value = "1/1000", value_parser = parse_ratio)]
    mu: Ratio<u64>,
    /// Reachability threshold, as a fraction `a/b` or a decimal.
    #[arg(long, global = true, default_value = "1/1000", value_parser = parse_ratio)]
    beta: Ratio<u64>,
    #[arg(long, global = true, default_value_t = 0)]
    seed: u64,
    #[arg(long, global = true, value_enum, default_value_t = BackendArg::Exhaustive)]
    backend: BackendArg,
    /// Largest vertex set handed to the exact subset search.
    #[arg(long, global = true, default_value_t = 24)]
    oracle_budget: usize,
    /// Report Undecided instead of falling back to exact search.
    #[arg(long, global = true)]
    no_fallback: bool,
    #[arg(long, global = true)]
    threads: Option<usize>,
    /// Pretty-print JSON output.
    #[arg(long, global = true)]
    pretty: bool,
}

#[derive(Clone, Copy, ValueEnum)]
enum BackendArg {
    Rand,
    Exhaustive,
}

#[derive(Subcommand)]
enum Cmd {
    /// Find a perfect matching or a certificate that none exists.
    SolvePm { file: PathBuf },
    /// Find a matching of exactly `size` edges or a certificate.
    SolveMatching {
        #[arg(long)]
        size: usize,
        file: PathBuf,
    },
    /// Search for `size` disjoint edges by colour coding.
    FindMatching {
        #[arg(long)]
        size: usize,
        file: PathBuf,
    },
    /// Check a certificate (or a solver output holding one) against an instance.
    VerifyCertificate { file: PathBuf, cert: PathBuf },
    /// Print a generated instance. ARGS are `key=value` pairs, e.g. `n=9 k=3 x_size=2`.
    Generate {
        #[arg(value_enum)]
        kind: Kind,
        args: Vec<String>,
        /// Write JSON instead of the text format.
        #[arg(long)]
        json: bool,
    },
    /// Exact maximum matching.
    Oracle { file: PathBuf },
    /// Run a fixed benchmark suite and print per-stage timings.
    Bench {
        #[arg(value_enum)]
        suite: Suite,
    },
}

#[derive(Clone, Copy, ValueEnum)]
enum Kind {
    ParityBarrier,
    SpaceBarrier,
    RandomDense,
    PlantedMatching,
    KpartiteDense,
    ExtremalPlanted,
}

impl Kind {
    fn tag(self) -> &'static str {
        match self {
            Kind::ParityBarrier => "parity_barrier",
            Kind::SpaceBarrier => "space_barrier",
            Kind::RandomDense => "random_dense",
            Kind::PlantedMatching => "planted_matching",
            Kind::KpartiteDense => "kpartite_dense",
            Kind::ExtremalPlanted => "extremal_planted",
        }
    }

    fn defaults(self) -> Value {
        match self {
            Kind::RandomDense => json!({"deletion_rate": 0.85, "seed": 0}),
            Kind::PlantedMatching => json!({"seed": 0}),
            Kind::KpartiteDense => json!({"seed": 0}),
            Kind::ExtremalPlanted => json!({"noise_edges": 0, "plant": true, "seed": 0}),
            _ => json!({}),
        }
    }
}

#[derive(Clone, Copy, ValueEnum)]
enum Suite {
    /// Random instances with codegree at least n/3 - 2 on 60 vertices.
    Smoke,
    /// Random instances on 6 to 15 vertices.
    Small,
    /// The two barrier constructions.
    Barriers,
}

struct Failure(u8, String);

impl<E: std::fmt::Display> From<E> for Failure {
    fn from(e: E) -> Self {
        Failure(EXIT_INPUT, e.to_string())
    }
}

fn parse_ratio(s: &str) -> Result<Ratio<u64>, String> {
    let bad = || format!("not a positive rational: {s:?}");
    let r = if let Some((whole, frac)) = s.split_once('.') {
        let digits = u32::try_from(frac.len()).map_err(|_| bad())?;
        let den = 10u64.checked_pow(digits).ok_or_else(bad)?;
        let whole: u64 = if whole.is_empty() { 0 } else { whole.parse().map_err(|_| bad())? };
        let frac: u64 = if frac.is_empty() { 0 } else { frac.parse().map_err(|_| bad())? };
        let num = whole.checked_mul(den).and_then(|w| w.checked_add(frac)).ok_or_else(bad)?;
        Ratio::new(num, den)
    } else {
        s.parse::<Ratio<u64>>().map_err(|_| bad())?
    };
    if *r.numer() == 0 {
        return Err(bad());
    }
    Ok(r)
}

impl Opts {
    fn backend(&self) -> Backend {
        match self.backend {
            BackendArg::Rand => Backend::randomized(self.seed),
            BackendArg::Exhaustive => Backend::exhaustive(),
        }
    }

    fn oracle_budget(&self) -> OracleBudget {
        OracleBudget {
            max_vertices: self.oracle_budget,
            ..OracleBudget::default()
        }
    }

    fn config(&self) -> SolveConfig {
        SolveConfig {
            gamma: self.gamma,
            mu: self.mu,
            beta: self.beta,
            oracle_budget: self.oracle_budget(),
            backend: self.backend(),
            seed: self.seed,
            fallback: !self.no_fallback,
            threads: self.threads,
            ..SolveConfig::default()
        }
    }

    fn print(&self, v: &Value) {
        let text = if self.pretty {
            serde_json::to_string_pretty(v)
        } else {
            serde_json::to_string(v)
        };
        println!("{}", text.expect("JSON value serializes"));
    }
}

fn read(path: &Path) -> Result<String, Failure> {
    std::fs::read_to_string(path).map_err(|e| Failure(EXIT_INPUT, format!("{}: {e}", path.display())))
}

fn load(path: &Path) -> Result<Hypergraph, Failure> {
    parse_instance(&read(path)?).map_err(|e| Failure(EXIT_INPUT, format!("{}: {e}", path.display())))
}

fn solution_exit(sol: &Solution) -> u8 {
    match sol.outcome {
        SolveOutcome::Matching { .. } => EXIT_OK,
        SolveOutcome::Certificate { .. } => EXIT_NO_PM,
        SolveOutcome::Undecided { .. } => EXIT_UNDECIDED,
    }
}

fn generate(kind: Kind, args: &[String]) -> Result<Hypergraph, Failure> {
    let mut obj = Map::new();
    obj.insert("kind".into(), kind.tag().into());
    if let Value::Object(d) = kind.defaults() {
        obj.extend(d);
    }
    for arg in args {
        let (key, val) = arg
            .split_once('=')
            .ok_or_else(|| Failure(EXIT_INPUT, format!("expected key=value, got {arg:?}")))?;
        let val: Value = serde_json::from_str(val).unwrap_or_else(|_| Value::String(val.into()));
        obj.insert(key.replace('-', "_"), val);
    }
    let spec: GeneratorSpec = serde_json::from_value(Value::Object(obj))?;
    Ok(spec.generate()?)
}

fn bench_instances(suite: Suite) -> Result<Vec<(String, Hypergraph)>, Failure> {
    let mut out = Vec::new();
    match suite {
        Suite::Smoke => {
            for seed in 0..3 {
                out.push((format!("random(60,3,c=2,seed={seed})"), gen_random_codegree(60, 3, 2, seed)?));
            }
        }
        Suite::Small => {
            for n in [6, 9, 12, 15] {
                for seed in 0..5 {
                    let c = (seed % 3) as usize;
                    out.push((
                        format!("random({n},3,c={c},seed={seed})"),
                        gen_random_codegree(n, 3, c, seed)?,
                    ));
                }
            }
        }
        Suite::Barriers => {
            for n in [9, 12, 15] {
                let s = n / 3 - 1;
                out.push((format!("space({n},3,{s})"), gen_space_barrier(n, 3, s)?));
                let x = if (n / 3) % 2 == 0 { 1 } else { 0 };
                out.push((
                    format!("parity({n},3,{x})"),
                    hypermatch::instances::gen_parity_barrier(n, 3, x)?,
                ));
            }
        }
    }
    Ok(out)
}

fn run(cli: Cli) -> Result<u8, Failure> {
    let opts = &cli.opts;
    let cfg = opts.config();
    match &cli.cmd {
        Cmd::SolvePm { file } => {
            let sol = solve_pm(&load(file)?, &cfg);
            opts.print(&serde_json::to_value(&sol)?);
            Ok(solution_exit(&sol))
        }
        Cmd::SolveMatching { size, file } => {
            let sol = solve_matching_size(&load(file)?, *size, &cfg)?;
            opts.print(&serde_json::to_value(&sol)?);
            Ok(solution_exit(&sol))
        }
        Cmd::FindMatching { size, file } => {
            let h = load(file)?;
            let oracle = Oracle::new(opts.oracle_budget());
            let out = color_coded_matching_with_fallback(&h, &VertexSet::full(h.n()), *size, opts.backend(), &oracle)?;
            let (outcome, code) = match (&out.matching, out.conclusive) {
                (Some(_), _) => ("found", EXIT_OK),
                (None, true) => ("none", EXIT_NO_PM),
                (None, false) => ("undecided", EXIT_UNDECIDED),
            };
            opts.print(&json!({
                "outcome": outcome,
                "matching": out.matching,
                "colorings_tried": out.colorings_tried,
            }));
            Ok(code)
        }
        Cmd::VerifyCertificate { file, cert } => {
            let h = load(file)?;
            let mut v: Value = serde_json::from_str(&read(cert)?)?;
            if let Some(inner) = v.get_mut("certificate") {
                v = inner.take();
            }
            let cert: Certificate = serde_json::from_value(v)?;
            let report = verify_certificate(&h, &cert);
            let code = if report.is_ok() { EXIT_OK } else { EXIT_UNDECIDED };
            opts.print(&json!({ "verification": report }));
            Ok(code)
        }
        Cmd::Generate { kind, args, json } => {
            let h = generate(*kind, args)?;
            if *json {
                println!("{}", to_json(&h));
            } else {
                print!("{}", to_text(&h));
            }
            Ok(EXIT_OK)
        }
        Cmd::Oracle { file } => {
            let h = load(file)?;
            let oracle = Oracle::new(opts.oracle_budget());
            match oracle.exact_max_matching(&h, &VertexSet::full(h.n())) {
                Ok(m) => {
                    let perfect = m.len() * h.k() == h.n();
                    opts.print(&json!({ "nu": m.len(), "perfect": perfect, "matching": m }));
                    Ok(if perfect { EXIT_OK } else { EXIT_NO_PM })
                }
                Err(e) => {
                    opts.print(&json!({ "outcome": "undecided", "reason": e.to_string() }));
                    Ok(EXIT_UNDECIDED)
                }
            }
        }
        Cmd::Bench { suite } => {
            let mut worst = EXIT_OK;
            for (name, h) in bench_instances(*suite)? {
                let start = Instant::now();
                let sol = solve_pm(&h, &cfg);
                let outcome = match sol.outcome {
                    SolveOutcome::Matching { .. } => "pm",
                    SolveOutcome::Certificate { .. } => "no_pm",
                    SolveOutcome::Undecided { .. } => {
                        worst = EXIT_UNDECIDED;
                        "undecided"
                    }
                };
                opts.print(&json!({
                    "instance": name,
                    "outcome": outcome,
                    "millis": start.elapsed().as_secs_f64() * 1e3,
                    "stats": sol.stats,
                }));
            }
            Ok(worst)
        }
    }
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            let code = if e.use_stderr() { EXIT_INPUT } else { EXIT_OK };
            let _ = e.print();
            return ExitCode::from(code);
        }
    };
    match run(cli) {
        Ok(code) => ExitCode::from(code),
        Err(Failure(code, msg)) => {
            eprintln!("error: {msg}");
            ExitCode::from(code)
        }
    }
}
