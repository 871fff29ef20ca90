use std::fs;
use std::path::{Path, PathBuf};
use std::process::{Command, Output};

fn flpg(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_flpg"))
        .args(args)
        .output()
        .expect("binary runs")
}

fn repo_config(name: &str) -> String {
    PathBuf::from(env!("CARGO_MANIFEST_DIR"))
        .join("../../configs")
        .join(name)
        .display()
        .to_string()
}

fn write_demo_config(dir: &Path) -> String {
    let path = dir.join("demo.json");
    fs::copy(repo_config("demo.json"), &path).unwrap();
    path.display().to_string()
}

#[test]
fn missing_config_is_a_usage_error() {
    let out = flpg(&["equilibrium"]);
    assert_eq!(out.status.code(), Some(1));
    let stderr = String::from_utf8_lossy(&out.stderr);
    assert!(stderr.contains("--config"), "usage text mentions the flag: {stderr}");
}

#[test]
fn unknown_config_field_exits_one() {
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("bad.json");
    let mut text = fs::read_to_string(repo_config("demo.json")).unwrap();
    text = text.replacen('{', "{\"mystery\": 1,", 1);
    fs::write(&path, text).unwrap();
    let out = flpg(&["equilibrium", "--config", path.to_str().unwrap()]);
    assert_eq!(out.status.code(), Some(1));
}

#[test]
fn equilibrium_on_threshold_negative_config_reports_zero_equilibrium() {
    let out = flpg(&["equilibrium", "--config", &repo_config("figure_b.json")]);
    assert_eq!(out.status.code(), Some(0), "{}", String::from_utf8_lossy(&out.stderr));
    let report: serde_json::Value =
        serde_json::from_slice(&out.stdout).expect("report re-parses");
    assert_eq!(report["classification"], "zero_equilibrium");
    assert_eq!(report["attack_rounds"], 0.0);
    assert!(report["threshold"].as_f64().unwrap() < 0.0);
}

#[test]
fn equilibrium_exits_two_on_regularity_error() {
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("irregular.json");
    let mut text = fs::read_to_string(repo_config("demo.json")).unwrap();
    // y = 0.2 < 1 - p = 0.5 breaks the exponent assumption.
    text = text.replace("\"y\": 1.0", "\"y\": 0.2");
    fs::write(&path, text).unwrap();
    let out = flpg(&["equilibrium", "--config", path.to_str().unwrap()]);
    assert_eq!(out.status.code(), Some(2));
    assert!(String::from_utf8_lossy(&out.stderr).contains("exponent_ok"));
}

#[test]
fn scan_emits_grid_with_zero_column() {
    let out = flpg(&[
        "scan",
        "--config",
        &repo_config("figure_a.json"),
        "--delta-steps",
        "101",
        "--rounds-steps",
        "101",
    ]);
    assert_eq!(out.status.code(), Some(0));
    let text = String::from_utf8_lossy(&out.stdout);
    let lines: Vec<&str> = text.lines().collect();
    assert_eq!(lines[0], "delta,rounds,sign,value");
    assert_eq!(lines.len(), 1 + 101 * 101);
    for line in &lines[1..] {
        let fields: Vec<&str> = line.split(',').collect();
        if fields[1].parse::<f64>().unwrap() == 0.0 {
            assert_eq!(fields[2], "zero");
        }
    }
}

#[test]
fn bounds_report_round_trips() {
    let dir = tempfile::tempdir().unwrap();
    let config = write_demo_config(dir.path());
    let out_path = dir.path().join("bounds.json");
    let out = flpg(&[
        "bounds",
        "--config",
        &config,
        "--deltas",
        "0.25",
        "--rounds",
        "4",
        "--out",
        out_path.to_str().unwrap(),
    ]);
    assert_eq!(out.status.code(), Some(0), "{}", String::from_utf8_lossy(&out.stderr));
    let report: serde_json::Value =
        serde_json::from_str(&fs::read_to_string(&out_path).unwrap()).unwrap();
    assert_eq!(report["manifest"]["subcommand"], "bounds");
    let lower = report["attacker_payoff"]["lower"].as_f64().unwrap();
    let upper = report["attacker_payoff"]["upper"].as_f64().unwrap();
    assert!(lower <= upper);
}

#[test]
fn oracle_solves_and_flags_infeasible() {
    let dir = tempfile::tempdir().unwrap();
    // Feasible by hand: x = (1/2, 0, 0, 1/2) clears all four constraints.
    let feasible = dir.path().join("oracle.json");
    fs::write(
        &feasible,
        r#"{
            "defender_payoff": [[0.5, 0.0], [0.2, 0.4]],
            "attacker_payoff": [[0.1, -0.2], [-0.1, 0.3]],
            "cost": [0.1, 0.9, 0.2, 0.8],
            "margin": 1e-6
        }"#,
    )
    .unwrap();
    let out = flpg(&["oracle", "--input", feasible.to_str().unwrap()]);
    assert_eq!(out.status.code(), Some(0), "{}", String::from_utf8_lossy(&out.stderr));
    let report: serde_json::Value = serde_json::from_slice(&out.stdout).unwrap();
    let x: Vec<f64> =
        report["x"].as_array().unwrap().iter().map(|v| v.as_f64().unwrap()).collect();
    assert!((x.iter().sum::<f64>() - 1.0).abs() < 1e-9);
    for margin in report["margins"].as_array().unwrap() {
        assert!(margin.as_f64().unwrap() >= 1e-6 - 1e-12);
    }

    let infeasible = dir.path().join("zero.json");
    fs::write(
        &infeasible,
        r#"{
            "defender_payoff": [[0.5, 0.5], [0.5, 0.5]],
            "attacker_payoff": [[0.5, 0.5], [0.5, 0.5]],
            "cost": [1.0, 1.0, 1.0, 1.0]
        }"#,
    )
    .unwrap();
    let out = flpg(&["oracle", "--input", infeasible.to_str().unwrap()]);
    assert_eq!(out.status.code(), Some(2));
    let report: serde_json::Value = serde_json::from_slice(&out.stdout).unwrap();
    assert_eq!(report["family"], "infeasible");
}

#[test]
fn dynamics_is_deterministic_per_seed() {
    let dir = tempfile::tempdir().unwrap();
    let config = write_demo_config(dir.path());
    let run = |out_name: &str| {
        let out_path = dir.path().join(out_name);
        let out = flpg(&[
            "dynamics",
            "--config",
            &config,
            "--rounds",
            "400",
            "--seed",
            "7",
            "--delta-levels",
            "5",
            "--attacker-actions",
            "6",
            "--out",
            out_path.to_str().unwrap(),
        ]);
        assert_eq!(out.status.code(), Some(0), "{}", String::from_utf8_lossy(&out.stderr));
        let mut report: serde_json::Value =
            serde_json::from_str(&fs::read_to_string(&out_path).unwrap()).unwrap();
        report.as_object_mut().unwrap().remove("manifest");
        report
    };
    let a = run("a.json");
    let b = run("b.json");
    assert_eq!(a, b);
    let gap = a["cce_gap"].as_f64().unwrap();
    let regrets: Vec<f64> = a["per_player_regret"]
        .as_array()
        .unwrap()
        .iter()
        .map(|v| v.as_f64().unwrap())
        .collect();
    let max_regret = regrets.iter().cloned().fold(f64::NEG_INFINITY, f64::max);
    assert!(gap <= max_regret + 1e-9);
}

#[test]
fn sandbox_reports_containment() {
    let dir = tempfile::tempdir().unwrap();
    let out_path = dir.path().join("sandbox.json");
    let csv_dir = dir.path().join("traces");
    let out = flpg(&[
        "sandbox",
        "--dim",
        "8",
        "--delta",
        "0.15",
        "--rounds",
        "300",
        "--seeds",
        "1,2,3",
        "--horizons",
        "50,100,200,400",
        "--out",
        out_path.to_str().unwrap(),
        "--csv-dir",
        csv_dir.to_str().unwrap(),
    ]);
    assert_eq!(out.status.code(), Some(0), "{}", String::from_utf8_lossy(&out.stderr));
    let report: serde_json::Value =
        serde_json::from_str(&fs::read_to_string(&out_path).unwrap()).unwrap();
    assert_eq!(report["total"], 3);
    assert_eq!(report["contained_count"], 3);
    let csv = fs::read_to_string(csv_dir.join("trace_1.csv")).unwrap();
    assert!(csv.starts_with("t,distance,residual\n"));
    assert_eq!(csv.lines().count(), 1 + 300);
}
