use std::path::{Path, PathBuf};
use std::process::{Command, Output};

use serde_json::Value;
use tempfile::TempDir;

fn run(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_hypermatch"))
        .args(args)
        .output()
        .expect("binary runs")
}

fn code(out: &Output) -> i32 {
    out.status.code().expect("exit code")
}

fn stdout_json(out: &Output) -> Value {
    serde_json::from_slice(&out.stdout).expect("stdout is JSON")
}

fn write(dir: &Path, name: &str, body: &[u8]) -> PathBuf {
    let path = dir.join(name);
    std::fs::write(&path, body).unwrap();
    path
}

fn generate(dir: &Path, name: &str, args: &[&str]) -> PathBuf {
    let out = run(&[&["generate"], args].concat());
    assert_eq!(code(&out), 0, "{}", String::from_utf8_lossy(&out.stderr));
    write(dir, name, &out.stdout)
}

#[test]
fn solve_pm_exit_codes() {
    let dir = TempDir::new().unwrap();
    let pb = generate(dir.path(), "pb.txt", &["parity-barrier", "n=9", "k=3", "x_size=2"]);
    let out = run(&["solve-pm", pb.to_str().unwrap()]);
    assert_eq!(code(&out), 1);
    let v = stdout_json(&out);
    assert_eq!(v["outcome"], "no_pm");
    assert_eq!(v["certificate"]["kind"], "parity_barrier");

    let pm = generate(dir.path(), "pm.txt", &["planted-matching", "n=12", "k=3", "noise_edges=20"]);
    let out = run(&["solve-pm", pm.to_str().unwrap()]);
    assert_eq!(code(&out), 0);
    let v = stdout_json(&out);
    assert_eq!(v["outcome"], "pm");
    assert_eq!(v["matching"].as_array().unwrap().len(), 4);
    assert!(v["stats"]["stages"].is_array());
}

#[test]
fn certificates_round_trip() {
    let dir = TempDir::new().unwrap();
    let sb = generate(dir.path(), "sb.txt", &["space-barrier", "n=9", "k=3", "s_size=2"]);
    let out = run(&["solve-pm", sb.to_str().unwrap()]);
    assert_eq!(code(&out), 1);
    let sol = write(dir.path(), "sol.json", &out.stdout);
    let check = run(&["verify-certificate", sb.to_str().unwrap(), sol.to_str().unwrap()]);
    assert_eq!(code(&check), 0, "{}", String::from_utf8_lossy(&check.stdout));

    // An independent set stays independent in the empty graph but not in a
    // nearly complete one.
    let empty = write(dir.path(), "empty.txt", b"9 3 0\n");
    let full = generate(dir.path(), "full.txt", &["planted-matching", "n=9", "k=3", "noise_edges=80"]);
    let check = run(&["verify-certificate", full.to_str().unwrap(), sol.to_str().unwrap()]);
    assert_eq!(code(&check), 2);
    let check = run(&["verify-certificate", empty.to_str().unwrap(), sol.to_str().unwrap()]);
    assert_eq!(code(&check), 0);
}

#[test]
fn generated_instances_round_trip() {
    let dir = TempDir::new().unwrap();
    let text = generate(dir.path(), "a.txt", &["random-dense", "n=12", "k=3", "c=2", "seed=5"]);
    let json = generate(dir.path(), "a.json", &["random-dense", "n=12", "k=3", "c=2", "seed=5", "--json"]);
    let a = run(&["oracle", text.to_str().unwrap()]);
    let b = run(&["oracle", json.to_str().unwrap()]);
    assert_eq!(code(&a), 0);
    assert_eq!(a.stdout, b.stdout);
    let v = stdout_json(&a);
    assert!(v["nu"].as_u64().unwrap() <= 4);
    assert_eq!(v["perfect"], v["nu"].as_u64().unwrap() == 4);
}

#[test]
fn matching_sizes() {
    let dir = TempDir::new().unwrap();
    let sb = generate(dir.path(), "sb.txt", &["space-barrier", "n=12", "k=3", "s_size=2"]);
    let path = sb.to_str().unwrap();
    assert_eq!(code(&run(&["solve-matching", "--size", "2", path])), 0);
    assert_eq!(code(&run(&["solve-matching", "--size", "3", path])), 1);
    let found = run(&["find-matching", "--size", "2", path]);
    assert_eq!(code(&found), 0);
    assert_eq!(stdout_json(&found)["outcome"], "found");
    let none = run(&["find-matching", "--size", "3", path]);
    assert_eq!(code(&none), 1);
    assert_eq!(stdout_json(&none)["outcome"], "none");
}

#[test]
fn input_errors_exit_with_three() {
    let dir = TempDir::new().unwrap();
    let bad = write(dir.path(), "bad.txt", b"6 3 1\n2 1 0\n");
    assert_eq!(code(&run(&["solve-pm", bad.to_str().unwrap()])), 3);
    assert_eq!(code(&run(&["solve-pm", "/nonexistent/instance.txt"])), 3);
    assert_eq!(code(&run(&["generate", "parity-barrier", "n=9"])), 3);
    assert_eq!(code(&run(&["solve-pm"])), 3);
    assert_eq!(code(&run(&["--help"])), 0);
}

#[test]
fn bench_prints_stage_timings() {
    let out = run(&["bench", "barriers"]);
    assert_eq!(code(&out), 0);
    let lines: Vec<Value> = String::from_utf8(out.stdout)
        .unwrap()
        .lines()
        .map(|l| serde_json::from_str(l).unwrap())
        .collect();
    assert!(!lines.is_empty());
    for line in &lines {
        assert!(line["stats"]["stages"].as_array().is_some_and(|s| !s.is_empty()));
        assert!(line["stats"]["total_millis"].is_number());
    }
}
