use std::path::PathBuf;
use std::process::{Command, Output};

use serde_json::Value;

fn fixture(name: &str) -> String {
    PathBuf::from(env!("CARGO_MANIFEST_DIR"))
        .join("tests/fixtures")
        .join(name)
        .display()
        .to_string()
}

fn run(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_operadforge"))
        .args(args)
        .env_remove("OPERADFORGE_SEED")
        .output()
        .expect("binary runs")
}

fn stdout(out: &Output) -> String {
    String::from_utf8(out.stdout.clone()).unwrap()
}

fn json(out: &Output) -> Value {
    serde_json::from_slice(&out.stdout).expect("JSON output")
}

#[test]
fn zero_length_edge_contracts_to_a_corolla() {
    let out = run(&["normalize", &fixture("zero_edge.json"), "--format", "text"]);
    assert_eq!(out.status.code(), Some(0));
    assert_eq!(stdout(&out), "[x2 e x1](#1, #2)\n");
}

#[test]
fn reducible_subtree_becomes_a_point() {
    let out = run(&["normalize", &fixture("reducible.json"), "--variant", "tauW", "--format", "text"]);
    assert_eq!(out.status.code(), Some(0));
    assert_eq!(stdout(&out), "[x1 x2](#1, [e]@1/1)\n");
    // Without the reduction relation the subtree stays.
    let out = run(&["normalize", &fixture("reducible.json"), "--variant", "W", "--format", "text"]);
    assert_eq!(stdout(&out).matches('[').count(), 4);
}

#[test]
fn malformed_json_reports_its_location() {
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("bad.json");
    std::fs::write(&path, "{\n  \"arity\": 1,\n  \"nodes\": [\n").unwrap();
    let out = run(&["normalize", path.to_str().unwrap()]);
    assert_eq!(out.status.code(), Some(1));
    let err = String::from_utf8(out.stderr).unwrap();
    assert!(err.contains("bad.json:4:"), "{err}");
}

#[test]
fn truncation_violation_exits_with_2() {
    let out = run(&["normalize", &fixture("stacked_binary.json"), "--k", "2"]);
    assert_eq!(out.status.code(), Some(2));
    let out = run(&["normalize", &fixture("stacked_binary.json"), "--k", "3"]);
    assert_eq!(out.status.code(), Some(0));
    let out = run(&[
        "compose",
        &fixture("corolla_binary.json"),
        "1",
        &fixture("corolla_binary.json"),
        "--k",
        "2",
    ]);
    assert_eq!(out.status.code(), Some(2));
}

#[test]
fn usage_errors_exit_with_1() {
    assert_eq!(run(&["verify", "nonsense"]).status.code(), Some(1));
    assert_eq!(run(&["enumerate", "9"]).status.code(), Some(1));
    assert_eq!(run(&["enumerate", "3", "--k", "2"]).status.code(), Some(1));
    let out = run(&["compose", &fixture("corolla_binary.json"), "3", &fixture("corolla_unary.json")]);
    assert_eq!(out.status.code(), Some(1));
}

#[test]
fn enumerate_counts() {
    let out = run(&["enumerate", "1"]);
    assert_eq!(out.status.code(), Some(0));
    let v = json(&out);
    assert_eq!(v["count"], 4);
    for (r, count) in [(0, 1), (2, 16), (3, 96)] {
        let v = json(&run(&["enumerate", &r.to_string()]));
        assert_eq!(v["count"], count);
    }
    let text = stdout(&run(&["enumerate", "1", "--format", "text"]));
    assert!(text.ends_with("count: 4\n"));
}

#[test]
fn composition_of_corollas_has_a_unit_junction() {
    let out = run(&[
        "compose",
        &fixture("corolla_binary.json"),
        "2",
        &fixture("corolla_unary.json"),
        "--format",
        "dot",
    ]);
    assert_eq!(out.status.code(), Some(0));
    let dot = stdout(&out);
    assert!(dot.starts_with("digraph"));
    assert!(dot.contains("[label=\"1/1\"]"), "{dot}");
}

#[test]
fn render_reproduces_the_six_vertex_tree() {
    let out = run(&["render", &fixture("six_vertex.json")]);
    assert_eq!(out.status.code(), Some(0));
    let dot = stdout(&out);
    let vertices = dot.lines().filter(|l| l.trim_start().starts_with('v') && l.contains("[label=") && !l.contains("->")).count();
    let inner = dot.lines().filter(|l| l.trim_start().starts_with('v') && l.contains("->") && !l.contains("root")).count();
    let leaves = dot.lines().filter(|l| l.contains("shape=plaintext")).count();
    assert_eq!((vertices, inner, leaves), (6, 5, 3));
}

#[test]
fn normalize_round_trips_its_output() {
    let dir = tempfile::tempdir().unwrap();
    for name in ["zero_edge.json", "reducible.json", "six_vertex.json"] {
        let first = run(&["normalize", &fixture(name), "--variant", "tauW'"]);
        assert_eq!(first.status.code(), Some(0));
        let path = dir.path().join(name);
        std::fs::write(&path, &first.stdout).unwrap();
        let second = run(&["normalize", path.to_str().unwrap()]);
        assert_eq!(second.stdout, first.stdout, "{name}");
    }
}

#[test]
fn lemma1_suite_passes() {
    let out = run(&["verify", "lemma1", "--r", "3", "--n", "2"]);
    assert_eq!(out.status.code(), Some(0));
    assert_eq!(json(&out)["passed"], true);
}

#[test]
fn homotopy_suite_passes_with_classical_witnesses() {
    let out = run(&["verify", "homotopy", "--samples", "500", "--seed", "7"]);
    assert_eq!(out.status.code(), Some(0));
    let v = json(&out);
    assert_eq!(v["report"]["failures"].as_array().unwrap().len(), 0);
    assert!(v["report"]["classical_failure_count"].as_u64().unwrap() >= 1);
    assert!(!v["report"]["classical_witnesses"].as_array().unwrap().is_empty());
}

#[test]
fn confluence_suite_passes() {
    let out = run(&["verify", "confluence", "--count", "1000"]);
    assert_eq!(out.status.code(), Some(0));
    assert_eq!(json(&out)["report"].as_array().unwrap().len(), 4);
}

#[test]
fn remaining_suites_pass() {
    for args in [
        vec!["verify", "axioms", "--r", "3"],
        vec!["verify", "axioms", "--r", "2", "--operad", "band", "--k", "2"],
        vec!["verify", "lemma2", "--n", "1", "--operad", "boolor", "--samples", "200"],
        vec!["verify", "truncated", "--samples", "50"],
        vec!["verify", "tau"],
    ] {
        let out = run(&args);
        assert_eq!(out.status.code(), Some(0), "{args:?}");
    }
}

#[test]
fn tau_search_needs_room() {
    let out = run(&["verify", "tau", "--max-vertices", "2"]);
    assert_eq!(out.status.code(), Some(1));
    assert_eq!(json(&out)["passed"], false);
}

#[test]
fn outputs_are_deterministic_and_the_env_seed_wins() {
    let a = run(&["verify", "confluence", "--count", "20", "--seed", "3", "--variant", "W"]);
    let b = run(&["verify", "confluence", "--count", "20", "--seed", "3", "--variant", "W"]);
    assert_eq!(a.stdout, b.stdout);
    let h1 = run(&["verify", "homotopy", "--samples", "20", "--seed", "5"]);
    let h2 = Command::new(env!("CARGO_BIN_EXE_operadforge"))
        .args(["verify", "homotopy", "--samples", "20", "--seed", "6"])
        .env("OPERADFORGE_SEED", "5")
        .output()
        .unwrap();
    assert_eq!(h1.stdout, h2.stdout);
    let h3 = run(&["verify", "homotopy", "--samples", "20", "--seed", "6"]);
    assert_ne!(h1.stdout, h3.stdout);
}

#[test]
fn custom_time_samples() {
    let out = run(&["verify", "homotopy", "--samples", "30", "--t", "1/3", "--t", "inf", "--variant", "W'"]);
    assert_eq!(out.status.code(), Some(0));
    let v = json(&out);
    assert_eq!(v["report"]["times"], serde_json::json!(["1/3", "inf"]));
    assert_eq!(v["report"]["classical_failure_count"], 0);
    assert_eq!(run(&["verify", "homotopy", "--t", "-1"]).status.code(), Some(1));
}
