//! End-to-end CLI tests: the exit-code contract (0 success, 1 input error,
//! 2 verdict failure), output determinism, and the documented command
//! surfaces.

use std::path::Path;
use std::process::{Command, Output};

fn trellisx(args: &[&str], dir: &Path) -> Output {
    Command::new(env!("CARGO_BIN_EXE_trellisx"))
        .args(args)
        .current_dir(dir)
        .output()
        .expect("binary runs")
}

fn write(dir: &Path, name: &str, content: &str) {
    std::fs::write(dir.join(name), content).expect("fixture written");
}

const BASELINE_GEN: &str =
    r#"{"field": {"p": 2, "e": 1}, "n": 2, "k": 1, "G": [[[1,0,1],[1,1,1]]]}"#;

#[test]
fn conv_freedist_baseline_prints_five() {
    let dir = tempfile::tempdir().unwrap();
    write(dir.path(), "g.json", BASELINE_GEN);
    let out = trellisx(&["conv", "freedist", "--spec", "g.json"], dir.path());
    assert!(out.status.success());
    assert_eq!(String::from_utf8_lossy(&out.stdout).trim(), "5");
}

#[test]
fn conv_bounds_baseline() {
    let dir = tempfile::tempdir().unwrap();
    write(dir.path(), "g.json", BASELINE_GEN);
    let out = trellisx(&["conv", "bounds", "--spec", "g.json"], dir.path());
    assert!(out.status.success());
    // the profile runs through max(L, J) = 4
    let text = String::from_utf8_lossy(&out.stdout);
    assert!(text.contains("[2, 3, 3, 4, 4]"), "got: {text}");
    assert!(text.contains("free 5"));
    assert!(text.contains("free bound 6"));
}

#[test]
fn trellis_example1_values_and_exit() {
    let dir = tempfile::tempdir().unwrap();
    let out = trellisx(
        &[
            "trellis", "example1", "--q", "8", "--M", "4", "--n", "2", "--j", "1",
        ],
        dir.path(),
    );
    assert!(out.status.success());
    let text = String::from_utf8_lossy(&out.stdout);
    assert!(text.contains("d_1^c = 4"), "got: {text}");
    assert!(text.contains("13/3"));
    assert!(text.contains("11/3"));
}

#[test]
fn missing_spec_exits_one() {
    let dir = tempfile::tempdir().unwrap();
    let out = trellisx(
        &["construct", "report", "--spec", "missing.json"],
        dir.path(),
    );
    assert_eq!(out.status.code(), Some(1));
}

#[test]
fn bad_usage_exits_nonzero() {
    let dir = tempfile::tempdir().unwrap();
    let out = trellisx(&["conv", "coldist", "--j", "1"], dir.path());
    assert_ne!(out.status.code(), Some(0));
}

#[test]
fn nondeterministic_trellis_distance_exits_two() {
    let dir = tempfile::tempdir().unwrap();
    write(
        dir.path(),
        "nondet.txt",
        "2 1 2 2\n0 0 0\n0 1 0\n1 0 1\n1 1 0\n",
    );
    let out = trellisx(
        &["trellis", "coldist", "--file", "nondet.txt", "--j", "1"],
        dir.path(),
    );
    assert_eq!(out.status.code(), Some(2));
    let err = String::from_utf8_lossy(&out.stderr);
    assert!(err.contains("deterministic"), "stderr: {err}");
}

#[test]
fn tampered_lift_exits_two() {
    let dir = tempfile::tempdir().unwrap();
    let out = trellisx(
        &[
            "construct",
            "verify",
            "--builtin",
            "micro",
            "--inject-g0",
            "--horizon",
            "0",
            "--samples",
            "8",
        ],
        dir.path(),
    );
    assert_eq!(out.status.code(), Some(2));
}

#[test]
fn untampered_verify_passes() {
    let dir = tempfile::tempdir().unwrap();
    let out = trellisx(
        &[
            "construct",
            "verify",
            "--builtin",
            "micro",
            "--horizon",
            "0",
            "--samples",
            "8",
        ],
        dir.path(),
    );
    assert_eq!(out.status.code(), Some(0));
}

#[test]
fn json_reports_are_byte_identical_across_runs() {
    let dir = tempfile::tempdir().unwrap();
    let args = [
        "construct",
        "report",
        "--builtin",
        "micro",
        "--horizon",
        "0",
        "--samples",
        "16",
        "--format",
        "json",
        "--seed",
        "7",
    ];
    let a = trellisx(&args, dir.path());
    let b = trellisx(&args, dir.path());
    assert!(a.status.success() && b.status.success());
    assert_eq!(a.stdout, b.stdout);
    let parsed: serde_json::Value = serde_json::from_slice(&a.stdout).expect("valid json");
    assert_eq!(parsed["schema"], 1);
    assert_eq!(parsed["report"]["pass"], true);
}

#[test]
fn graph_gen_gamma_mix_pipeline() {
    let dir = tempfile::tempdir().unwrap();
    let gen = trellisx(
        &[
            "graph", "gen", "--type", "random", "--n", "6", "--delta", "3", "--out", "g.txt",
            "--seed", "5",
        ],
        dir.path(),
    );
    assert!(gen.status.success());
    let gamma = trellisx(&["graph", "gamma", "--file", "g.txt"], dir.path());
    assert!(gamma.status.success());
    let mix = trellisx(
        &["graph", "mix", "--file", "g.txt", "--trials", "500"],
        dir.path(),
    );
    assert_eq!(mix.status.code(), Some(0));
    let text = String::from_utf8_lossy(&mix.stdout);
    assert!(text.contains("0 violations"), "got: {text}");
}

#[test]
fn construct_report_from_spec_files() {
    let dir = tempfile::tempdir().unwrap();
    write(
        dir.path(),
        "conv.json",
        r#"{"field": {"p": 2, "e": 1}, "n": 2, "k": 1, "G": [[[1], [1]]]}"#,
    );
    write(
        dir.path(),
        "inner.json",
        r#"{"field": {"p": 2, "e": 1}, "generator": [[1, 1]]}"#,
    );
    write(dir.path(), "k22.txt", "2 2\n1 1\n1 2\n2 1\n2 2\n");
    write(
        dir.path(),
        "spec.json",
        r#"{"conv": "conv.json", "inner": "inner.json", "graph": "k22.txt"}"#,
    );
    let out = trellisx(
        &[
            "construct",
            "report",
            "--spec",
            "spec.json",
            "--horizon",
            "0",
            "--samples",
            "16",
        ],
        dir.path(),
    );
    assert_eq!(out.status.code(), Some(0));
    let text = String::from_utf8_lossy(&out.stdout);
    assert!(text.contains("overall: PASS"), "got: {text}");
}

#[test]
fn verify_all_builtins_pass() {
    let dir = tempfile::tempdir().unwrap();
    let out = trellisx(&["verify-all"], dir.path());
    assert_eq!(out.status.code(), Some(0));
    let text = String::from_utf8_lossy(&out.stdout);
    assert!(text.contains("verify-all: PASS"));
    assert!(!text.contains("FAIL"));
}

#[test]
fn verify_all_with_fixtures_dir() {
    let dir = tempfile::tempdir().unwrap();
    std::fs::create_dir(dir.path().join("fixtures")).unwrap();
    write(dir.path(), "fixtures/baseline.json", BASELINE_GEN);
    write(
        dir.path(),
        "fixtures/loops.txt",
        "2 2 2 1\n0 0 0 0\n0 0 1 1\n",
    );
    let out = trellisx(&["verify-all", "--fixtures", "fixtures"], dir.path());
    assert_eq!(out.status.code(), Some(0));
    let text = String::from_utf8_lossy(&out.stdout);
    assert!(text.contains("baseline.json"));
    assert!(text.contains("loops.txt"));
}

#[test]
fn field_make_rejects_reducible_modulus() {
    let dir = tempfile::tempdir().unwrap();
    let out = trellisx(
        &[
            "field",
            "make",
            "--p",
            "2",
            "--e",
            "2",
            "--modulus",
            "1,0,1",
        ],
        dir.path(),
    );
    assert_eq!(out.status.code(), Some(1));
    assert!(String::from_utf8_lossy(&out.stderr).contains("reducible"));
}

#[test]
fn search_writes_generator_spec() {
    let dir = tempfile::tempdir().unwrap();
    let out = trellisx(
        &[
            "conv",
            "search",
            "--n",
            "2",
            "--k",
            "1",
            "--m",
            "1",
            "--p",
            "2",
            "--e",
            "2",
            "--budget",
            "65536",
            "--equal-row-degrees",
            "--out",
            "best.json",
        ],
        dir.path(),
    );
    assert!(out.status.success());
    let bounds = trellisx(&["conv", "bounds", "--spec", "best.json"], dir.path());
    assert!(bounds.status.success());
    let text = String::from_utf8_lossy(&bounds.stdout);
    assert!(text.contains("MDP: true"), "got: {text}");
}
