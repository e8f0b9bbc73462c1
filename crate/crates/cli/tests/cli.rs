//! End-to-end tests of the `termpool` binary: exit codes, output files,
//! and byte-level determinism of repeated runs.

use std::fs;
use std::path::PathBuf;
use std::process::{Command, Output};

fn bin() -> Command {
    Command::new(env!("CARGO_BIN_EXE_termpool"))
}

/// A fresh scratch directory under the target-controlled temp root.
fn scratch(name: &str) -> PathBuf {
    let dir = std::env::temp_dir().join(format!(
        "termpool-cli-{}-{}",
        std::process::id(),
        name
    ));
    let _ = fs::remove_dir_all(&dir);
    fs::create_dir_all(&dir).unwrap();
    dir
}

const CONFIG: &str = r#"{
    "sigma": "0.5",
    "phi_n": "0",
    "phi_m": "0",
    "phi_g": "0",
    "phi_g_zombie": "0",
    "d_c": 86400,
    "position_duration": 31536000,
    "z_min": "1"
}"#;

const SCENARIO: &str = r#"{
    "events": [
        {"type": "init", "contribution": "1000", "target_price": "0.5"},
        {"type": "set_rate", "model": {"kind": "stochastic", "seed": 11,
            "drift": "0.04", "volatility": "0.05", "step": 43200}},
        {"type": "open_long", "actor": "alice", "base": "50"},
        {"type": "advance_time", "seconds": 2592000},
        {"type": "open_short", "actor": "bob", "bonds": "40"},
        {"type": "advance_time", "seconds": 7776000},
        {"type": "close_long", "actor": "alice", "receipt": 1},
        {"type": "remove_liquidity", "actor": "initializer", "lp_shares": "100"},
        {"type": "advance_time", "seconds": 31536000},
        {"type": "close_short", "actor": "bob", "receipt": 2}
    ]
}"#;

fn write_inputs(dir: &PathBuf) -> (PathBuf, PathBuf) {
    let config = dir.join("config.json");
    let scenario = dir.join("scenario.json");
    fs::write(&config, CONFIG).unwrap();
    fs::write(&scenario, SCENARIO).unwrap();
    (config, scenario)
}

fn run_simulate(dir: &PathBuf, out: &str, seed: &str) -> Output {
    let (config, scenario) = write_inputs(dir);
    bin()
        .args(["simulate", "--config"])
        .arg(&config)
        .arg("--scenario")
        .arg(&scenario)
        .arg("--out")
        .arg(dir.join(out))
        .args(["--seed", seed])
        .output()
        .unwrap()
}

#[test]
fn simulate_succeeds_and_writes_both_formats() {
    let dir = scratch("both");
    let output = run_simulate(&dir, "out", "5");
    assert!(
        output.status.success(),
        "stderr: {}",
        String::from_utf8_lossy(&output.stderr)
    );
    let jsonl = fs::read_to_string(dir.join("out/trajectory.jsonl")).unwrap();
    assert_eq!(jsonl.lines().count(), 10, "one record per event");
    let first: serde_json::Value = serde_json::from_str(jsonl.lines().next().unwrap()).unwrap();
    assert_eq!(first["outcome"]["event"], "init");
    assert_eq!(first["checks"]["solvent"], true);
    assert_eq!(first["state"]["share_reserves"], "1000.000000000000000000");

    let csv = fs::read_to_string(dir.join("out/summary.csv")).unwrap();
    let header = csv.lines().next().unwrap();
    assert_eq!(
        header,
        "index,event,time,share_price,share_reserves,bond_reserves,share_adjustment,\
         effective_share_reserves,spot_price,present_value,lp_share_price,\
         global_exposure,idle_liquidity"
    );
    assert_eq!(csv.lines().count(), 11, "header plus one row per event");
}

#[test]
fn repeated_runs_are_byte_identical() {
    let dir = scratch("determinism");
    assert!(run_simulate(&dir, "a", "7").status.success());
    assert!(run_simulate(&dir, "b", "7").status.success());
    let a = fs::read(dir.join("a/trajectory.jsonl")).unwrap();
    let b = fs::read(dir.join("b/trajectory.jsonl")).unwrap();
    assert_eq!(a, b, "same seed must replay byte-identically");
    let a_csv = fs::read(dir.join("a/summary.csv")).unwrap();
    let b_csv = fs::read(dir.join("b/summary.csv")).unwrap();
    assert_eq!(a_csv, b_csv);

    // A different seed must change the stochastic rate path.
    assert!(run_simulate(&dir, "c", "8").status.success());
    let c = fs::read(dir.join("c/trajectory.jsonl")).unwrap();
    assert_ne!(a, c);
}

#[test]
fn malformed_inputs_exit_one() {
    let dir = scratch("parse");
    let config = dir.join("config.json");
    let scenario = dir.join("scenario.json");
    fs::write(&config, CONFIG).unwrap();
    fs::write(&scenario, "{ not json").unwrap();
    let output = bin()
        .args(["simulate", "--config"])
        .arg(&config)
        .arg("--scenario")
        .arg(&scenario)
        .arg("--out")
        .arg(dir.join("out"))
        .output()
        .unwrap();
    assert_eq!(output.status.code(), Some(1));

    // Structurally invalid: no init event.
    fs::write(&scenario, r#"{"events": [{"type": "mint_checkpoint"}]}"#).unwrap();
    let output = bin()
        .args(["simulate", "--config"])
        .arg(&config)
        .arg("--scenario")
        .arg(&scenario)
        .arg("--out")
        .arg(dir.join("out"))
        .output()
        .unwrap();
    assert_eq!(output.status.code(), Some(1));
    assert!(String::from_utf8_lossy(&output.stderr).contains("missing init"));

    // Unknown config keys are rejected.
    fs::write(&config, r#"{"sigma": "0.5", "mystery": 1}"#).unwrap();
    let output = bin()
        .args(["oracle", "--config"])
        .arg(&config)
        .arg("--scenario")
        .arg(&scenario)
        .output()
        .unwrap();
    assert_eq!(output.status.code(), Some(1));
}

#[test]
fn oracle_passes_and_reports_deviations() {
    let dir = scratch("oracle");
    let (config, scenario) = write_inputs(&dir);
    let output = bin()
        .args(["oracle", "--config"])
        .arg(&config)
        .arg("--scenario")
        .arg(&scenario)
        .output()
        .unwrap();
    assert!(
        output.status.success(),
        "stderr: {}",
        String::from_utf8_lossy(&output.stderr)
    );
    let report: serde_json::Value =
        serde_json::from_slice(&output.stdout).unwrap();
    assert_eq!(report["passed"], true);
    assert!(report["curve_checks"].as_u64().unwrap() >= 3);
}

#[test]
fn oracle_rejects_fee_configs_with_exit_one() {
    let dir = scratch("oracle-fees");
    let (config, scenario) = write_inputs(&dir);
    fs::write(
        &config,
        CONFIG.replace(r#""phi_n": "0""#, r#""phi_n": "0.01""#),
    )
    .unwrap();
    let output = bin()
        .args(["oracle", "--config"])
        .arg(&config)
        .arg("--scenario")
        .arg(&scenario)
        .output()
        .unwrap();
    assert_eq!(output.status.code(), Some(1));
    assert!(String::from_utf8_lossy(&output.stderr).contains("fee-free"));
}
