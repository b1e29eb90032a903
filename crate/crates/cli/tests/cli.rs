// SPDX-License-Identifier: Apache-2.0

use std::fs;
use std::path::Path;
use std::process::{Command, Output};

use serde_json::Value;

const BIN: &str = env!("CARGO_BIN_EXE_cprsim");

fn run(args: &[&str]) -> Output {
    Command::new(BIN).args(args).output().unwrap()
}

fn run_in(dir: &Path, args: &[&str]) -> Output {
    let mut full: Vec<&str> = args.to_vec();
    let out = dir.display().to_string();
    full.extend(["--output", &out]);
    run(&full)
}

fn code(o: &Output) -> i32 {
    o.status.code().unwrap()
}

fn stderr(o: &Output) -> String {
    String::from_utf8_lossy(&o.stderr).into_owned()
}

fn json(path: &Path) -> Value {
    serde_json::from_str(&fs::read_to_string(path).unwrap()).unwrap()
}

#[test]
fn equilibria_for_linear_rule_reports_stable_interior_point() {
    let dir = tempfile::tempdir().unwrap();
    let o = run_in(dir.path(), &["equilibria", "--rule", "linear"]);
    assert_eq!(code(&o), 0, "{}", stderr(&o));
    let doc = json(&dir.path().join("equilibria.json"));
    assert_eq!(doc["rule"], "linear");
    assert_eq!(doc["params"]["T"], 2.0);
    let point = doc["equilibria"]
        .as_array()
        .unwrap()
        .iter()
        .find(|e| e["kind"] == "sustainable_point")
        .unwrap();
    assert!((point["R"].as_f64().unwrap() - 0.1304348).abs() < 1e-7);
    assert!((point["x"].as_f64().unwrap() - 0.8695652).abs() < 1e-7);
    assert_eq!(point["stability"], "stable");
    for key in ["det", "trace", "eigenvalues", "jacobian"] {
        assert!(point.get(key).is_some(), "{key}");
    }
    let manifest = json(&dir.path().join("equilibria.manifest.json"));
    assert_eq!(manifest["outputs"][0], "equilibria.json");
    assert_eq!(manifest["params"]["w"], -1.0);
}

#[test]
fn simulate_from_fixed_point_is_constant() {
    let dir = tempfile::tempdir().unwrap();
    let o = run_in(
        dir.path(),
        &[
            "simulate",
            "--rule",
            "replicator",
            "--r0",
            "0.3",
            "--x0",
            "1",
        ],
    );
    assert_eq!(code(&o), 0, "{}", stderr(&o));
    let text = fs::read_to_string(dir.path().join("trajectory.csv")).unwrap();
    let mut lines = text.lines();
    assert_eq!(lines.next(), Some("t,R,x"));
    let rows: Vec<&str> = lines.collect();
    assert!(!rows.is_empty());
    for row in rows {
        let cols: Vec<&str> = row.split(',').collect();
        assert_eq!(&cols[1..], &["0.3", "1"], "{row}");
    }
    let manifest = json(&dir.path().join("trajectory.manifest.json"));
    assert_eq!(manifest["command"], "simulate");
    assert_eq!(manifest["initial_state"]["R"], 0.3);
}

#[test]
fn logistic_low_intensity_sweep_is_all_depleted() {
    let dir = tempfile::tempdir().unwrap();
    let o = run_in(
        dir.path(),
        &[
            "sweep", "--rule", "logistic", "--k", "0.1", "--grid", "21x21", "--dt", "0.01",
        ],
    );
    assert_eq!(code(&o), 0, "{}", stderr(&o));
    let text = fs::read_to_string(dir.path().join("sweep.csv")).unwrap();
    let mut lines = text.lines();
    assert_eq!(lines.next(), Some("R0,x0,R_star,x_star,class,steps"));
    let classes: Vec<&str> = lines.map(|l| l.split(',').nth(4).unwrap()).collect();
    assert_eq!(classes.len(), 441);
    assert!(classes.iter().all(|&c| c == "depleted"));
    let manifest = json(&dir.path().join("sweep.manifest.json"));
    assert_eq!(manifest["grid"]["n_r"], 21);
    assert_eq!(manifest["integrator"]["dt"], 0.01);
    assert!(manifest["tool_version"].is_string());
}

#[test]
fn ensemble_writes_statistics_and_seeded_manifest() {
    let dir = tempfile::tempdir().unwrap();
    let o = run_in(
        dir.path(),
        &[
            "ensemble",
            "--N",
            "50",
            "--replicas",
            "4",
            "--t-end",
            "1",
            "--seed",
            "9",
            "--samples",
            "4",
        ],
    );
    assert_eq!(code(&o), 0, "{}", stderr(&o));
    let text = fs::read_to_string(dir.path().join("ensemble.csv")).unwrap();
    assert_eq!(text.lines().next(), Some("t,mean_R,std_R,mean_x,std_x"));
    assert_eq!(text.lines().count(), 6);
    let manifest = json(&dir.path().join("ensemble.manifest.json"));
    assert_eq!(manifest["seed"], 9);
    assert_eq!(manifest["params"]["N"], 50);
    assert_eq!(manifest["ensemble"]["replicas"], 4);
}

#[test]
fn invalid_parameters_exit_with_validation_code() {
    let o = run(&["simulate", "--ec-hat", "1.2"]);
    assert_eq!(code(&o), 1);
    assert!(stderr(&o).contains("ec_hat < 1"), "{}", stderr(&o));

    let o = run(&[
        "simulate", "--rule", "moran", "--w", "-1", "--ed-hat", "2", "--N", "1",
    ]);
    assert_eq!(code(&o), 1);
    assert!(stderr(&o).contains("Moran denominator"), "{}", stderr(&o));

    let o = run(&["equilibria", "--rule", "imitation"]);
    assert_eq!(code(&o), 1);
    assert!(stderr(&o).contains("replicator, moran, fermi, linear, unit-step, logistic"));

    assert_eq!(code(&run(&["sweep", "--grid", "1x5"])), 1);
    assert_eq!(code(&run(&["simulate", "--dt", "0"])), 1);
    assert_eq!(code(&run(&["simulate", "--no-such-flag"])), 1);
}

#[test]
fn blown_up_integration_exits_with_numerical_code() {
    let dir = tempfile::tempdir().unwrap();
    let o = run_in(
        dir.path(),
        &[
            "simulate", "--rule", "linear", "--dt", "1e100", "--t-max", "1e101",
        ],
    );
    assert_eq!(code(&o), 2, "{}", stderr(&o));
}

#[test]
fn unwritable_output_exits_with_io_code() {
    let dir = tempfile::tempdir().unwrap();
    let blocker = dir.path().join("file");
    fs::write(&blocker, "").unwrap();
    let o = run_in(&blocker.join("sub"), &["equilibria"]);
    assert_eq!(code(&o), 3, "{}", stderr(&o));
}

#[test]
fn flags_override_config_file_values() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = dir.path().join("run.toml");
    fs::write(&cfg, "rule = \"fermi\"\nec-hat = 0.6\nw = -0.5\nN = 80\n").unwrap();
    let cfg_arg = cfg.display().to_string();
    let o = run_in(
        dir.path(),
        &["equilibria", "--config", &cfg_arg, "--ec-hat", "0.65"],
    );
    assert_eq!(code(&o), 0, "{}", stderr(&o));
    let m = json(&dir.path().join("equilibria.manifest.json"));
    assert_eq!(m["rule"], "fermi");
    assert_eq!(m["params"]["ec_hat"], 0.65);
    assert_eq!(m["params"]["w"], -0.5);
    assert_eq!(m["params"]["N"], 80);
    assert_eq!(m["config"]["ec-hat"], 0.65);

    fs::write(&cfg, "ec_hat = 0.6\n").unwrap();
    assert_eq!(code(&run(&["equilibria", "--config", &cfg_arg])), 1);
}

#[test]
fn json_config_files_are_accepted() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = dir.path().join("run.json");
    fs::write(&cfg, r#"{"rule": "unit-step", "c": 0.4, "format": "csv"}"#).unwrap();
    let o = run_in(
        dir.path(),
        &["equilibria", "--config", &cfg.display().to_string()],
    );
    assert_eq!(code(&o), 0, "{}", stderr(&o));
    let text = fs::read_to_string(dir.path().join("equilibria.csv")).unwrap();
    assert!(text.starts_with("kind,R,x,det,trace,eig1_re,eig1_im,eig2_re,eig2_im,stability\n"));
    assert!(text.contains("sustainable_point,0.30000000000000004,1,"));
}

#[test]
fn manifest_replay_reproduces_outputs() {
    let dir = tempfile::tempdir().unwrap();
    let first = dir.path().join("first");
    let o = run_in(
        &first,
        &[
            "simulate", "--rule", "moran", "--r0", "0.7", "--x0", "0.6", "--t-max", "5",
            "--format", "json",
        ],
    );
    assert_eq!(code(&o), 0, "{}", stderr(&o));
    let manifest = first.join("trajectory.manifest.json");
    let second = dir.path().join("second");
    let o = run_in(
        &second,
        &["simulate", "--config", &manifest.display().to_string()],
    );
    assert_eq!(code(&o), 0, "{}", stderr(&o));
    assert_eq!(
        fs::read(first.join("trajectory.json")).unwrap(),
        fs::read(second.join("trajectory.json")).unwrap()
    );
    let (a, b) = (
        json(&manifest),
        json(&second.join("trajectory.manifest.json")),
    );
    for key in ["rule", "params", "initial_state", "integrator", "outputs"] {
        assert_eq!(a[key], b[key], "{key}");
    }
}

#[test]
fn rules_lists_every_rule() {
    let o = run(&["rules"]);
    assert_eq!(code(&o), 0);
    let text = String::from_utf8(o.stdout).unwrap();
    for name in [
        "replicator",
        "moran",
        "fermi",
        "linear",
        "unit-step",
        "logistic",
    ] {
        assert!(
            text.lines().any(|l| l.starts_with(&format!("{name},"))),
            "{name}"
        );
    }
    let o = run(&["rules", "--format", "json"]);
    let v: Value = serde_json::from_slice(&o.stdout).unwrap();
    assert_eq!(v.as_array().unwrap().len(), 6);
}
