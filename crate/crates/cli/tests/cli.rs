//! End-to-end checks of the `lbai` binary: subcommands, exit codes, file
//! outputs, and byte determinism.

use std::path::Path;
use std::process::{Command, Output};

fn lbai(dir: &Path, args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_lbai"))
        .current_dir(dir)
        .args(args)
        .output()
        .expect("binary runs")
}

fn stdout(output: &Output) -> String {
    String::from_utf8_lossy(&output.stdout).into_owned()
}

#[test]
fn gen_then_bai_roundtrip() {
    let dir = tempfile::tempdir().unwrap();
    let out = lbai(
        dir.path(),
        &[
            "gen", "--kind", "bernoulli", "--k", "4", "--t", "1024", "--p", "0.5", "--seed", "9",
            "--out", "inst.json",
        ],
    );
    assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stderr));
    assert!(dir.path().join("inst.json").exists());

    let run = lbai(
        dir.path(),
        &[
            "bai", "--instance", "inst.json", "--trials", "10", "--seed", "3", "--out",
            "records.csv",
        ],
    );
    assert!(run.status.success(), "{}", String::from_utf8_lossy(&run.stderr));
    let csv = std::fs::read_to_string(dir.path().join("records.csv")).unwrap();
    assert!(csv.starts_with("seed,m,b,t0,w,arm,error,bits,queries\n"));
    assert_eq!(csv.lines().count(), 11);
    assert!(stdout(&run).contains("metric=error"));
}

#[test]
fn identical_seeds_identical_files() {
    let dir = tempfile::tempdir().unwrap();
    for name in ["a.csv", "b.csv"] {
        let out = lbai(
            dir.path(),
            &["lb-error", "--m", "8", "--trials", "30", "--seed", "11", "--out", name],
        );
        assert!(out.status.success());
    }
    let a = std::fs::read(dir.path().join("a.csv")).unwrap();
    let b = std::fs::read(dir.path().join("b.csv")).unwrap();
    assert_eq!(a, b);
}

#[test]
fn verify_suites_pass_and_exit_zero() {
    let dir = tempfile::tempdir().unwrap();
    for args in [
        vec!["verify", "lemma1", "--trials", "20", "--t", "256", "--lo", "2", "--hi", "7"],
        vec!["verify", "orthogonality", "--trials", "10", "--max-depth", "6"],
        vec!["verify", "claim4", "--max-d", "16"],
        vec![
            "verify", "sparsity", "--k", "8", "--t", "256", "--w", "16", "--r", "1,2",
        ],
    ] {
        let out = lbai(dir.path(), &args);
        assert!(out.status.success(), "{args:?}: {}", String::from_utf8_lossy(&out.stderr));
        assert!(stdout(&out).contains("verification: PASS"), "{args:?}");
    }
}

#[test]
fn validation_errors_exit_one() {
    let dir = tempfile::tempdir().unwrap();
    // Missing instance file.
    let out = lbai(dir.path(), &["bai", "--instance", "missing.json", "--trials", "5"]);
    assert_eq!(out.status.code(), Some(1));
    // Zero trials.
    let out = lbai(dir.path(), &["lb-error", "--m", "6", "--trials", "0"]);
    assert_eq!(out.status.code(), Some(1));
    // Window length not a power of two.
    let out = lbai(
        dir.path(),
        &["sd-demo", "--a", "1", "--b", "1", "--t", "12000", "--c", "3", "--trials", "5"],
    );
    assert_eq!(out.status.code(), Some(1));
}

#[test]
fn config_file_runs_and_rejects_unknown_keys() {
    let dir = tempfile::tempdir().unwrap();
    let config = r#"{
        "kind": "lemma1",
        "trials": 15,
        "master_seed": 21,
        "format": "json",
        "out": "gap.json",
        "params": {"t": 128, "lo": 2, "hi": 6}
    }"#;
    std::fs::write(dir.path().join("config.json"), config).unwrap();
    let out = lbai(dir.path(), &["--config", "config.json"]);
    assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stderr));
    let rendered = std::fs::read_to_string(dir.path().join("gap.json")).unwrap();
    assert!(rendered.contains("\"records\""));

    let bad = config.replace("\"params\"", "\"unknown_key\": 1, \"params\"");
    std::fs::write(dir.path().join("bad.json"), bad).unwrap();
    let out = lbai(dir.path(), &["--config", "bad.json"]);
    assert_eq!(out.status.code(), Some(1));
}

#[test]
fn sd_demo_json_format() {
    let dir = tempfile::tempdir().unwrap();
    let out = lbai(
        dir.path(),
        &[
            "sd-demo", "--n", "7", "--a", "1,3", "--b", "3", "--t", "4096", "--trials", "50",
            "--seed", "2", "--format", "json", "--out", "sd.json",
        ],
    );
    assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stderr));
    let text = std::fs::read_to_string(dir.path().join("sd.json")).unwrap();
    let value: serde_json::Value = serde_json::from_str(&text).unwrap();
    assert_eq!(value["kind"], "sd-demo");
    assert_eq!(value["records"].as_array().unwrap().len(), 50);
    assert!(stdout(&out).contains("hit_rate"));
}

#[test]
fn trial_failures_exit_two_and_are_listed() {
    let dir = tempfile::tempdir().unwrap();
    let gen = lbai(
        dir.path(),
        &[
            "gen", "--kind", "bernoulli", "--k", "4", "--t", "1024", "--p", "0.5", "--seed", "1",
            "--out", "inst.json",
        ],
    );
    assert!(gen.status.success());
    // phi this large blows every per-trial sketch past its bit cap.
    let out = lbai(
        dir.path(),
        &["sparse-bai", "--instance", "inst.json", "--phi", "1e9", "--trials", "3", "--seed", "1"],
    );
    assert_eq!(out.status.code(), Some(2));
    assert!(stdout(&out).contains("failure trial=0"));
    assert!(stdout(&out).contains("failed=3"));
}

#[test]
fn sketch_bench_runs() {
    let dir = tempfile::tempdir().unwrap();
    let out = lbai(
        dir.path(),
        &["sketch-bench", "--k", "16", "--heavy-count", "300", "--trials", "20", "--seed", "4"],
    );
    assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stderr));
    assert!(stdout(&out).contains("metric=success"));
}

#[test]
fn regret_subcommand_with_pool_learner() {
    let dir = tempfile::tempdir().unwrap();
    let gen = lbai(
        dir.path(),
        &[
            "gen", "--kind", "bernoulli", "--k", "6", "--t", "600", "--p", "0.5", "--seed", "1",
            "--out", "inst.json",
        ],
    );
    assert!(gen.status.success());
    let out = lbai(
        dir.path(),
        &[
            "regret", "--instance", "inst.json", "--learner", "pool-hedge", "--q", "30", "--s",
            "3", "--trials", "4", "--seed", "6",
        ],
    );
    assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stderr));
    assert!(stdout(&out).contains("metric=regret"));
}
