//! Runs the `star` binary end to end.

use std::path::{Path, PathBuf};
use std::process::{Command, Output};

fn star(args: &[&str], dir: &Path) -> Output {
    Command::new(env!("CARGO_BIN_EXE_star")).args(args).current_dir(dir).output().expect("binary runs")
}

fn sample(name: &str) -> PathBuf {
    Path::new(env!("CARGO_MANIFEST_DIR")).join("../../samples").join(name)
}

fn text(b: &[u8]) -> String {
    String::from_utf8_lossy(b).into_owned()
}

#[test]
fn check_reorder_example() {
    let dir = tempfile::tempdir().unwrap();
    let c = sample("reorder6.json");
    let o =
        star(&["check", "--constraints", c.to_str().unwrap(), "--report", "r.txt", "--trace", "t.jsonl"], dir.path());
    assert_eq!(o.status.code(), Some(0), "{}", text(&o.stderr));
    assert!(text(&o.stdout).contains("total cells=3"));
    let report = std::fs::read_to_string(dir.path().join("r.txt")).unwrap();
    assert!(report.contains("total cells=3"));
    let trace = std::fs::read_to_string(dir.path().join("t.jsonl")).unwrap();
    assert!(trace.lines().last().unwrap().contains("\"verdict\":\"pass\""));
}

#[test]
fn invalid_constraints_exit_2() {
    let dir = tempfile::tempdir().unwrap();
    let c = sample("invalid.json");
    let o = star(&["build", "--constraints", c.to_str().unwrap(), "--out", "n.json"], dir.path());
    assert_eq!(o.status.code(), Some(2));
    let err = text(&o.stderr);
    assert!(err.contains("read before write") && err.contains("unknown port"), "{err}");
    assert!(!dir.path().join("n.json").exists());
}

#[test]
fn generated_interleaver_checks() {
    let dir = tempfile::tempdir().unwrap();
    let o = star(
        &["gen-interleaver", "--n", "6", "--scheme", "block:2x3", "--latency", "6", "--out", "il.json"],
        dir.path(),
    );
    assert_eq!(o.status.code(), Some(0), "{}", text(&o.stderr));
    let o = star(&["check", "--constraints", "il.json", "--out", "n.json"], dir.path());
    assert_eq!(o.status.code(), Some(0), "{}", text(&o.stderr));
    let o = star(&["simulate", "--netlist", "n.json", "--constraints", "il.json"], dir.path());
    assert_eq!(o.status.code(), Some(0), "{}", text(&o.stderr));
}

#[test]
fn infeasible_latency_rejected() {
    let dir = tempfile::tempdir().unwrap();
    let o = star(&["gen-interleaver", "--n", "6", "--scheme", "block:2x3", "--latency", "1"], dir.path());
    assert_eq!(o.status.code(), Some(2));
}

#[test]
fn outputs_are_byte_identical() {
    let dir = tempfile::tempdir().unwrap();
    let c = sample("reorder6.json");
    let c = c.to_str().unwrap();
    for k in ["1", "2"] {
        let o = star(
            &[
                "build",
                "--constraints",
                c,
                "--out",
                &format!("n{k}.json"),
                "--report",
                &format!("r{k}.txt"),
                "--dot",
                &format!("g{k}.dot"),
            ],
            dir.path(),
        );
        assert_eq!(o.status.code(), Some(0));
    }
    for (a, b) in [("n1.json", "n2.json"), ("r1.txt", "r2.txt"), ("g1.dot", "g2.dot")] {
        assert_eq!(std::fs::read(dir.path().join(a)).unwrap(), std::fs::read(dir.path().join(b)).unwrap());
    }
}

#[test]
fn graph_dot_has_every_pair() {
    let dir = tempfile::tempdir().unwrap();
    let c = sample("reorder6.json");
    let o = star(&["graph", "--constraints", c.to_str().unwrap()], dir.path());
    assert_eq!(o.status.code(), Some(0));
    let dot = text(&o.stdout);
    assert!(dot.starts_with("digraph"));
    assert_eq!(dot.lines().filter(|l| l.contains("->")).count(), 15);
    assert_eq!(dot.matches("label=\"F\"").count(), 2);
    assert_eq!(dot.matches("label=\"L\"").count(), 3);
}

#[test]
fn tampered_netlist_fails_simulation() {
    let dir = tempfile::tempdir().unwrap();
    let c = sample("reorder6.json");
    let c = c.to_str().unwrap();
    assert_eq!(star(&["build", "--constraints", c, "--out", "n.json"], dir.path()).status.code(), Some(0));
    let path = dir.path().join("n.json");
    let mut n: serde_json::Value = serde_json::from_str(&std::fs::read_to_string(&path).unwrap()).unwrap();
    n["elements"][0]["modes"][0]["depth"] = serde_json::json!(1);
    std::fs::write(&path, n.to_string()).unwrap();
    let o = star(&["simulate", "--netlist", "n.json", "--constraints", c], dir.path());
    assert_eq!(o.status.code(), Some(3));
    assert!(text(&o.stderr).contains("overflow"), "{}", text(&o.stderr));
}

#[test]
fn usage_errors_exit_1() {
    let dir = tempfile::tempdir().unwrap();
    assert_eq!(star(&["frobnicate"], dir.path()).status.code(), Some(1));
    assert_eq!(star(&["build", "--constraints", "missing.json"], dir.path()).status.code(), Some(1));
    assert_eq!(
        star(
            &["build", "--constraints", sample("reorder6.json").to_str().unwrap(), "--weights", "depth=x"],
            dir.path()
        )
        .status
        .code(),
        Some(1)
    );
}

#[test]
fn version_lists_schemas() {
    let o = star(&["--version"], Path::new("."));
    assert_eq!(o.status.code(), Some(0));
    let v = text(&o.stdout);
    assert!(v.contains("constraint schema 1") && v.contains("netlist schema 1"), "{v}");
}
