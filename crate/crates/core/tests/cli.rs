use std::path::Path;
use std::process::Command;

use serde_json::Value;
use thermostat::cli::run_with_io;

fn run(args: &[&str]) -> (i32, String, String) {
    let mut argv = vec!["thermostat"];
    argv.extend_from_slice(args);
    let (mut out, mut err) = (Vec::new(), Vec::new());
    let code = run_with_io(argv, &mut out, &mut err);
    (code, String::from_utf8(out).unwrap(), String::from_utf8(err).unwrap())
}

fn csv_column(csv: &str, name: &str) -> Vec<f64> {
    let mut lines = csv.lines();
    let header: Vec<&str> = lines.next().unwrap().split(',').collect();
    let idx = header.iter().position(|h| *h == name).unwrap();
    lines.map(|l| l.split(',').nth(idx).unwrap().parse().unwrap()).collect()
}

fn read_json(path: &Path) -> Value {
    serde_json::from_str(&std::fs::read_to_string(path).unwrap()).unwrap()
}

#[test]
fn beta0_prints_constants() {
    let (code, out, err) = run(&["beta0"]);
    assert_eq!(code, 0);
    assert!(err.contains("omega0 = 1.13344388") && err.contains("beta0 = 5.6654"));
    assert!((csv_column(&out, "beta0")[0] - 5.6655).abs() < 1e-3);
}

#[test]
fn local_nyquist_has_positive_real_part() {
    let (code, out, _) = run(&["nyquist", "--which", "loc"]);
    assert_eq!(code, 0);
    let re = csv_column(&out, "re");
    assert!(!re.is_empty() && re.iter().all(|&r| r > 0.0));
}

#[test]
fn sweep_splits_at_critical_gain() {
    let (code, out, _) = run(&["sweep", "--beta", "0.5:7:0.5", "--observable", "tail_sup", "--format", "json"]);
    assert_eq!(code, 0);
    let v: Value = serde_json::from_str(&out).unwrap();
    assert_eq!(v["summary"]["monotone"], true);
    let stable = v["summary"]["last_decayed_beta"].as_f64().unwrap();
    let unstable = v["summary"]["first_persistent_beta"].as_f64().unwrap();
    let beta0 = 5.6655;
    assert!(stable < beta0 + 0.5 && unstable > beta0 - 0.5, "split {stable} / {unstable}");
    assert_eq!(v["columns"]["value"].as_array().unwrap().len(), 14);
}

#[test]
fn csv_output_is_deterministic() {
    let dir = tempfile::tempdir().unwrap();
    let (a, b) = (dir.path().join("a.csv"), dir.path().join("b.csv"));
    for p in [&a, &b] {
        let (code, _, _) = run(&["popov", "--n", "300", "--out", p.to_str().unwrap()]);
        assert_eq!(code, 0);
    }
    let (x, y) = (std::fs::read(&a).unwrap(), std::fs::read(&b).unwrap());
    assert_eq!(x, y);
    let text = String::from_utf8(x).unwrap();
    assert!(text.starts_with("omega,re,im\n") && !text.contains('\r'));
}

#[test]
fn report_requires_inputs() {
    let (code, _, err) = run(&["report"]);
    assert_eq!(code, 66);
    assert!(err.contains("beta0.json"));
    let dir = tempfile::tempdir().unwrap();
    let (code, _, err) = run(&["report", "--inputs", dir.path().to_str().unwrap()]);
    assert_eq!(code, 66);
    assert!(err.contains("mq.json") && err.contains("simulate.json"));
}

#[test]
fn report_from_generated_artifacts() {
    let dir = tempfile::tempdir().unwrap();
    let path = |f: &str| dir.path().join(f).to_str().unwrap().to_string();
    for (sub, extra) in [
        ("beta0", vec![]),
        ("mq", vec![]),
        ("lyapunov", vec![]),
        ("simulate", vec!["--compare-volterra"]),
    ] {
        let out = path(&format!("{sub}.json"));
        let mut args = vec![sub, "--format", "json", "--out", out.as_str()];
        args.extend(extra);
        assert_eq!(run(&args).0, 0, "{sub}");
    }
    let report = path("report.json");
    let (code, _, _) = run(&["report", "--inputs", dir.path().to_str().unwrap(), "--out", &report]);
    assert_eq!(code, 0);
    let v = read_json(Path::new(&report));
    let (a, b) = (v["beta0_crossing"].as_f64().unwrap(), v["beta0_popov"].as_f64().unwrap());
    assert!((a - b).abs() <= 1e-3);
    assert!((v["lyapunov_threshold"].as_f64().unwrap() - 4.0 / std::f64::consts::PI).abs() <= 0.01);
    assert_eq!(v["all_pass"], true);
}

#[test]
fn regenerated_report() {
    let (code, out, _) = run(&["report", "--regenerate"]);
    assert_eq!(code, 0);
    let v: Value = serde_json::from_str(&out).unwrap();
    assert_eq!(v["all_pass"], true);
    assert!(v["invariants"].as_array().unwrap().len() >= 8);
}

#[test]
fn config_file_with_flag_override() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = dir.path().join("run.json");
    std::fs::write(&cfg, r#"{"subcommand": "lyapunov", "alpha": 1.0, "format": "json"}"#).unwrap();
    let (code, out, _) = run(&["--config", cfg.to_str().unwrap()]);
    assert_eq!(code, 0);
    let v: Value = serde_json::from_str(&out).unwrap();
    assert_eq!(v["columns"]["alpha"][0], 1.0);
    assert!(v["columns"]["fixed_point"][0].is_null());
    let (code, out, _) = run(&["--config", cfg.to_str().unwrap(), "--alpha", "1.5"]);
    assert_eq!(code, 0);
    let v: Value = serde_json::from_str(&out).unwrap();
    assert_eq!(v["columns"]["alpha"][0], 1.5);
    assert!(v["columns"]["fixed_point"][0].as_f64().unwrap() > 0.0);
}

#[test]
fn exit_codes() {
    assert_eq!(run(&["frobnicate"]).0, 64);
    assert_eq!(run(&[]).0, 64);
    assert_eq!(run(&["--config", "/definitely/not/here.json", "beta0"]).0, 66);
    let dir = tempfile::tempdir().unwrap();
    let bad = dir.path().join("bad.json");
    std::fs::write(&bad, "{ not json").unwrap();
    assert_eq!(run(&["--config", bad.to_str().unwrap()]).0, 66);
    assert_eq!(run(&["transfer", "--re", "0", "--im", "0"]).0, 2);
    assert_eq!(run(&["beta0", "--lo", "2", "--hi", "5"]).0, 2);
    assert_eq!(run(&["volterra", "--dt", "-1"]).0, 2);
    assert_eq!(run(&["beta0", "--tol", "0"]).0, 2);
    assert_eq!(run(&["kernel", "--n", "1"]).0, 2);
}

#[test]
fn tolerance_flag_is_honoured() {
    let (_, coarse, _) = run(&["beta0", "--tol", "1e-3"]);
    let (_, fine, _) = run(&["beta0", "--tol", "1e-13"]);
    let (c, f) = (csv_column(&coarse, "omega0")[0], csv_column(&fine, "omega0")[0]);
    assert!((f - 1.1334438817827324).abs() < 1e-12);
    assert!((c - f).abs() > 1e-9 && (c - f).abs() < 1e-3);
}

#[test]
fn every_subcommand_runs() {
    for args in [
        vec!["kernel"],
        vec!["transfer", "--re", "1", "--im", "2"],
        vec!["popov", "--n", "200"],
        vec!["mq", "--n", "11", "--grid-n", "400"],
        vec!["volterra", "--horizon", "5"],
        vec!["simulate", "--horizon", "1", "--k", "16"],
        vec!["eigenvalues", "--beta", "2"],
    ] {
        let (code, out, err) = run(&args);
        assert_eq!(code, 0, "{args:?}: {err}");
        assert!(out.lines().count() >= 2);
    }
}

#[test]
fn binary_entry_point() {
    let out = Command::new(env!("CARGO_BIN_EXE_thermostat")).args(["beta0", "--format", "json"]).output().unwrap();
    assert!(out.status.success());
    let v: Value = serde_json::from_slice(&out.stdout).unwrap();
    assert!((v["summary"]["beta0"].as_f64().unwrap() - 5.6655).abs() < 1e-3);
    let status = Command::new(env!("CARGO_BIN_EXE_thermostat")).arg("nope").status().unwrap();
    assert_eq!(status.code(), Some(64));
}
