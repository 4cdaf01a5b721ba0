// Copyright 2026 The qexpander Authors
// SPDX-License-Identifier: Apache-2.0

use std::path::{Path, PathBuf};
use std::process::{Command, Output};

use serde_json::Value;

fn root() -> PathBuf {
    Path::new(env!("CARGO_MANIFEST_DIR")).join("../..")
}

fn corpus(rel: &str) -> String {
    root().join("corpus").join(rel).display().to_string()
}

fn fixture(name: &str) -> String {
    Path::new(env!("CARGO_MANIFEST_DIR"))
        .join("tests/fixtures")
        .join(name)
        .display()
        .to_string()
}

fn run(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_qexpander"))
        .args(args)
        .output()
        .expect("binary runs")
}

fn json(out: &Output) -> Value {
    serde_json::from_slice(&out.stdout).unwrap_or_else(|e| {
        panic!(
            "stdout is not JSON ({e}): {}\nstderr: {}",
            String::from_utf8_lossy(&out.stdout),
            String::from_utf8_lossy(&out.stderr)
        )
    })
}

fn code(out: &Output) -> i32 {
    out.status.code().expect("exit code")
}

fn keys(v: &Value) -> Vec<&str> {
    let mut k: Vec<&str> = v.as_object().expect("object").keys().map(String::as_str).collect();
    k.sort_unstable();
    k
}

#[test]
fn gap_oracles() {
    let out = run(&["gap", &corpus("instances/depolarizer.json")]);
    assert_eq!(code(&out), 0);
    let v = json(&out);
    assert!(v["kappa"].as_f64().unwrap().abs() < 1e-12);
    assert_eq!(v["method"], "dense");
    assert_eq!(keys(&v), ["converged", "gap", "iterations", "kappa", "method", "residual"]);

    let out = run(&["gap", &corpus("instances/iz.json"), "--method", "iterative", "--seed", "3"]);
    assert_eq!(code(&out), 0);
    let v = json(&out);
    assert!((v["kappa"].as_f64().unwrap() - 1.0).abs() < 1e-9);
    assert_eq!(v["method"], "iterative");
}

#[test]
fn malformed_file_reports_location() {
    let out = run(&["gap", &fixture("malformed.json")]);
    assert_eq!(code(&out), 2);
    assert!(out.stdout.is_empty());
    let err = String::from_utf8_lossy(&out.stderr);
    assert!(err.contains("malformed.json") && err.contains("line 6"), "{err}");
}

#[test]
fn missing_file_and_bad_flags_are_input_errors() {
    assert_eq!(code(&run(&["gap", "/nonexistent/instance.json"])), 2);
    assert_eq!(code(&run(&["gap", &corpus("instances/iz.json"), "--method", "magic"])), 2);
    assert_eq!(code(&run(&["verify", &corpus("instances/iz.json"), "--shots", "0"])), 2);
    assert_eq!(code(&run(&["thermalize", &corpus("models/depolarizer.json"), "--times", "3,1"])), 2);
    // The random channel file has no thresholds.
    assert_eq!(code(&run(&["decide", &corpus("instances/random_2q.json")])), 2);
}

#[test]
fn decide_exit_codes() {
    let out = run(&["decide", &corpus("instances/depolarizer.json")]);
    assert_eq!(code(&out), 0);
    assert_eq!(json(&out)["decision"], "NO");

    let out = run(&["decide", &corpus("instances/iz.json")]);
    assert_eq!(code(&out), 1);
    assert_eq!(json(&out)["decision"], "YES");

    let out = run(&["decide", &fixture("promise.json")]);
    assert_eq!(code(&out), 3);
    let v = json(&out);
    assert_eq!(v["decision"], "PROMISE_VIOLATED");
    assert!((v["kappa"].as_f64().unwrap() - 0.5).abs() < 1e-12);
}

#[test]
fn verify_accepts_and_rejects() {
    let out = run(&["verify", &corpus("instances/iz.json"), "--seed", "1"]);
    assert_eq!(code(&out), 0, "{}", String::from_utf8_lossy(&out.stdout));
    let v = json(&out);
    assert_eq!(v["accepted"], true);
    assert_eq!(v["orthogonality_passed"], true);
    assert!(v["shots_per_pair"].as_u64().unwrap() >= 1);

    let out = run(&["verify", &corpus("instances/depolarizer.json"), "--witness", &fixture("no_witness.json"), "--shots", "exact"]);
    assert_eq!(code(&out), 1);
    let v = json(&out);
    assert_eq!(v["accepted"], false);
    assert!(v["estimated_contraction_sq"].as_f64().unwrap().abs() < 1e-12);
    assert_eq!(v["shots_per_pair"], Value::Null);

    // A witness with a trace component fails the orthogonality check.
    let out = run(&["verify", &corpus("instances/iz.json"), "--witness", &fixture("mixed_state.json"), "--shots", "exact"]);
    assert_eq!(code(&out), 1);
    assert_eq!(json(&out)["orthogonality_passed"], false);
}

#[test]
fn outputs_are_deterministic() {
    let args = ["verify", &corpus("instances/depolarizer.json"), "--shots", "40", "--seed", "9"];
    let a = run(&args);
    let b = run(&args);
    assert_eq!(a.stdout, b.stdout);
    assert!(!a.stdout.is_empty());
}

#[test]
fn synth_and_reduce_round_trip() {
    let dir = tempfile::tempdir().unwrap();
    let base = dir.path().join("base.json");
    let out = run(&["synth-expander", "--qubits", "4", "--seed", "7", "--degree", "8", "--out", base.to_str().unwrap()]);
    assert_eq!(code(&out), 0);
    let v = json(&out);
    assert!(v["kappa"].as_f64().unwrap() <= 0.1);
    let gap = json(&run(&["gap", base.to_str().unwrap()]));
    assert!((gap["kappa"].as_f64().unwrap() - v["kappa"].as_f64().unwrap()).abs() < 1e-9);

    for (spec, yes) in [("toy_no.json", false), ("toy_yes.json", true)] {
        let channel = dir.path().join(format!("phi_{spec}"));
        let out = run(&["reduce", &corpus(&format!("specs/{spec}")), "--out", channel.to_str().unwrap()]);
        assert_eq!(code(&out), 0, "{}", String::from_utf8_lossy(&out.stderr));
        let red = json(&out);
        assert_eq!(red["degree"].as_u64().unwrap(), 64 * red["base_degree"].as_u64().unwrap());
        let kappa = json(&run(&["gap", channel.to_str().unwrap()]))["kappa"].as_f64().unwrap();
        if yes {
            assert!(kappa >= red["alpha"].as_f64().unwrap(), "{spec}: kappa {kappa}");
        } else {
            assert!(kappa <= red["beta"].as_f64().unwrap(), "{spec}: kappa {kappa}");
        }
        // The exact YES verifier gives alpha = 1 = kappa, which the strict
        // tie rule reports as a promise violation rather than YES.
        let decision = run(&["decide", channel.to_str().unwrap()]);
        assert_eq!(code(&decision), if yes { 3 } else { 0 });
    }
}

#[test]
fn synthesis_failure_is_non_convergence() {
    // Two-element stages can never contract, so no power certifies.
    let out = run(&["synth-expander", "--qubits", "1", "--degree", "2", "--target-kappa", "0.1"]);
    assert_eq!(code(&out), 3, "{}", String::from_utf8_lossy(&out.stderr));
}

#[test]
fn thermalize_writes_csv() {
    let dir = tempfile::tempdir().unwrap();
    let csv = dir.path().join("traj.csv");
    let out = run(&["thermalize", &corpus("models/hadamard_bell.json"), "--times", "log:5:9", "--csv", csv.to_str().unwrap()]);
    assert_eq!(code(&out), 0);
    let v = json(&out);
    assert_eq!(v["holds"], true);
    assert_eq!(v["points"].as_array().unwrap().len(), 9);
    let text = std::fs::read_to_string(&csv).unwrap();
    let mut lines = text.lines();
    assert_eq!(lines.next(), Some("t,residual,bound"));
    assert_eq!(lines.count(), 9);

    // The depolarizer model meets the bound with equality.
    let out = run(&["thermalize", &corpus("models/depolarizer.json"), "--rho0", &fixture("mixed_state.json"), "--times", "lin:0:2:5"]);
    assert_eq!(code(&out), 0);
    for p in json(&out)["points"].as_array().unwrap() {
        let (r, b) = (p["residual"].as_f64().unwrap(), p["bound"].as_f64().unwrap());
        assert!((r - b).abs() < 1e-8, "{r} vs {b}");
    }
}
