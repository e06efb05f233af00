//! End-to-end checks of the command-line contract: exit codes, JSON
//! output shape, and byte reproducibility.

use std::path::{Path, PathBuf};
use std::process::{Command, Output};

fn bin() -> Command {
    Command::new(env!("CARGO_BIN_EXE_ertg"))
}

fn model(name: &str) -> PathBuf {
    PathBuf::from(env!("CARGO_MANIFEST_DIR"))
        .join("../../models")
        .join(name)
}

fn run(args: &[&str]) -> Output {
    bin().args(args).output().expect("binary runs")
}

fn json_of(out: &Output) -> serde_json::Value {
    serde_json::from_slice(&out.stdout).expect("stdout is JSON")
}

fn tmp(name: &str) -> PathBuf {
    Path::new(env!("CARGO_TARGET_TMPDIR")).join(name)
}

#[test]
fn validate_accepts_shipped_models() {
    for name in ["two_clock_game.ptga", "undetermined.ptga", "wait_or_flip.ptga"] {
        let out = run(&["validate", model(name).to_str().unwrap()]);
        assert!(out.status.success(), "{name} should validate");
        let v = json_of(&out);
        assert_eq!(v["errors"].as_array().unwrap().len(), 0);
    }
}

#[test]
fn validate_rejects_non_stochastic_rows_with_exit_2() {
    let path = tmp("broken.ptga");
    std::fs::write(
        &path,
        "clocks t; bound 1;\n\
         location s { }\n\
         location goal { }\n\
         edge min go from s { 0.5 -> goal; 0.6 -> goal }\n\
         edge min hold from goal guard t>=1 { 1 reset t -> goal }\n\
         target goal;",
    )
    .unwrap();
    let out = run(&["validate", path.to_str().unwrap()]);
    assert_eq!(out.status.code(), Some(2));
    let v = json_of(&out);
    let errors = v["errors"].as_array().unwrap();
    assert!(errors
        .iter()
        .any(|e| e["code"] == "distribution-not-stochastic"
            && e["context"].as_str().unwrap().contains("go")));
}

#[test]
fn parse_errors_exit_2_with_position() {
    let path = tmp("syntax.ptga");
    std::fs::write(&path, "clocks x; bound 2;\nlocation l0 { inv x <= }").unwrap();
    let out = run(&["validate", path.to_str().unwrap()]);
    assert_eq!(out.status.code(), Some(2));
    let err = String::from_utf8_lossy(&out.stderr);
    assert!(err.contains("2:"), "diagnostic carries the line: {err}");
}

#[test]
fn decide_exit_codes_follow_the_verdict() {
    let m = model("undetermined.ptga");
    let m = m.to_str().unwrap();
    // Upper value 1: at most 1.
    let out = run(&["decide", m, "--init", "l0 x=0", "--sense", "upper", "--bound", "1"]);
    assert_eq!(out.status.code(), Some(0));
    // Upper value 1: greater than 1/2.
    let out = run(&["decide", m, "--init", "l0 x=0", "--sense", "upper", "--bound", "1/2"]);
    assert_eq!(out.status.code(), Some(1));
    // Lower value 0: at most 1/2.
    let out = run(&["decide", m, "--init", "l0 x=0", "--sense", "lower", "--bound", "1/2"]);
    assert_eq!(out.status.code(), Some(0));
    // No bound: trivially at most.
    let out = run(&["decide", m, "--init", "l0 x=0"]);
    assert_eq!(out.status.code(), Some(0));
    // Exact mode gives the same verdicts.
    let out = run(&["decide", m, "--init", "l0 x=0", "--sense", "upper", "--bound", "1/2", "--exact"]);
    assert_eq!(out.status.code(), Some(1));
}

#[test]
fn solve_output_is_byte_reproducible() {
    let m = model("two_clock_game.ptga");
    let args = [
        "solve",
        m.to_str().unwrap(),
        "--init",
        "l0 x=3/10 y=1/10",
        "--sense",
        "upper",
        "--exact",
    ];
    let a = run(&args);
    let b = run(&args);
    assert!(a.status.success());
    assert_eq!(a.stdout, b.stdout, "identical invocations must match byte for byte");
    let v = json_of(&a);
    assert_eq!(v["schema_version"], 1);
    assert_eq!(v["sense"], "upper");
    // The initial state solves to 9/10 exactly.
    let init_id = v["initial_state"].as_u64().unwrap();
    let state = v["states"]
        .as_array()
        .unwrap()
        .iter()
        .find(|s| s["id"].as_u64() == Some(init_id))
        .unwrap();
    assert_eq!(state["exact"], "9/10");
}

#[test]
fn bra_dump_and_dot() {
    let m = model("two_clock_game.ptga");
    let dot_path = tmp("bra.dot");
    let out = run(&[
        "bra",
        m.to_str().unwrap(),
        "--init",
        "l0 x=3/10 y=1/10",
        "--dot",
        dot_path.to_str().unwrap(),
    ]);
    assert!(out.status.success());
    let v = json_of(&out);
    assert_eq!(v["schema_version"], 1);
    let states = v["states"].as_array().unwrap();
    assert!(states.len() >= 8);
    let moves = v["moves"].as_array().unwrap();
    assert!(moves.iter().any(|mv| mv["delay"] == "7/10"));
    assert!(moves.iter().any(|mv| mv["delay"] == "17/10"));
    assert!(moves
        .iter()
        .all(|mv| mv["op"] == "inf" || mv["op"] == "sup"));
    let dot = std::fs::read_to_string(&dot_path).unwrap();
    assert!(dot.starts_with("digraph"));
    assert!(dot.contains("7/10"));
}

#[test]
fn simulate_reports_summary_json() {
    let m = model("wait_or_flip.ptga");
    let out = run(&[
        "simulate",
        m.to_str().unwrap(),
        "--runs",
        "500",
        "--horizon",
        "64",
        "--seed",
        "5",
    ]);
    assert!(out.status.success());
    let v = json_of(&out);
    assert_eq!(v["runs"], 500);
    assert_eq!(v["hit_fraction"], 1.0);
    assert_eq!(v["seed"], 5);
    let mean = v["mean"].as_f64().unwrap();
    assert!((mean - 0.5).abs() < 0.1);
    // Reproducible.
    let again = run(&[
        "simulate",
        m.to_str().unwrap(),
        "--runs",
        "500",
        "--horizon",
        "64",
        "--seed",
        "5",
    ]);
    assert_eq!(out.stdout, again.stdout);
}

#[test]
fn zeno_models_are_gated_behind_a_flag() {
    let path = tmp("zeno.ptga");
    std::fs::write(
        &path,
        "clocks t; bound 1;\n\
         location s { }\n\
         location goal { }\n\
         edge min spin from s { 1 -> s }\n\
         edge min go from s guard t>=1 { 1 reset t -> goal }\n\
         edge min hold from goal guard t>=1 { 1 reset t -> goal }\n\
         target goal;",
    )
    .unwrap();
    let out = run(&["solve", path.to_str().unwrap()]);
    assert_eq!(out.status.code(), Some(2));
    assert!(String::from_utf8_lossy(&out.stderr).contains("--allow-zeno"));
    let out = run(&["solve", path.to_str().unwrap(), "--allow-zeno"]);
    assert!(out.status.success());
}

#[test]
fn missing_file_exits_2() {
    let out = run(&["validate", "no-such-file.ptga"]);
    assert_eq!(out.status.code(), Some(2));
}
