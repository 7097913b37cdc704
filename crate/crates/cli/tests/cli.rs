use std::fs;
use std::path::Path;
use std::process::{Command, Output};

use serde_json::Value;

fn beltrami(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_beltrami"))
        .args(args)
        .output()
        .expect("binary runs")
}

fn json(out: &Output) -> Value {
    assert!(
        out.status.success(),
        "{}",
        String::from_utf8_lossy(&out.stderr)
    );
    serde_json::from_slice(&out.stdout).unwrap()
}

fn path(p: &Path) -> &str {
    p.to_str().unwrap()
}

#[test]
fn spectrum_degree_two() {
    let v = json(&beltrami(&["spectrum", "--max-degree", "2"]));
    assert_eq!(v["schema"], 1);
    assert_eq!(v["K"], 2);
    let clusters = v["clusters"].as_array().unwrap();
    let four = clusters
        .iter()
        .find(|c| (c["mu"].as_f64().unwrap() - 4.0).abs() < 1e-9)
        .unwrap();
    assert_eq!(four["multiplicity"], 15);
    let total: u64 = clusters
        .iter()
        .map(|c| c["multiplicity"].as_u64().unwrap())
        .sum();
    assert_eq!(total, v["rankG"].as_u64().unwrap());
    assert_eq!(total, 3 * (1 + 4 + 9));
}

#[test]
fn identity_energy_is_four_pi_squared() {
    let out = beltrami(&["energy", "--map", "identity", "--c", "2"]);
    let text = String::from_utf8(out.stdout.clone()).unwrap();
    assert!(text.contains("\"E\": 39.478"), "{text}");
    let v = json(&out);
    assert!((v["ratio"].as_f64().unwrap() - 1.0).abs() < 1e-6);
    assert_eq!(v["c_used"], "constant");
}

#[test]
fn unit_suspension_passes_every_check() {
    for coupling in ["constant", "pointwise"] {
        let v = json(&beltrami(&[
            "check",
            "--map",
            "suspension",
            "--a",
            "1",
            "--coupling",
            coupling,
        ]));
        assert_eq!(v["all_passed"], true);
        let cpt = &v["pointwise_coupling"];
        assert!((cpt["min"].as_f64().unwrap() - 2.0).abs() < 1e-6);
        assert!((cpt["max"].as_f64().unwrap() - 2.0).abs() < 1e-6);
        assert_eq!(cpt["critical_points"], 0);
    }
}

#[test]
fn failed_checks_exit_with_one() {
    let out = beltrami(&[
        "check",
        "--map",
        "fourier",
        "--seed",
        "4",
        "--n-s",
        "8",
        "--n-theta",
        "6",
        "--n-psi",
        "6",
    ]);
    assert_eq!(out.status.code(), Some(1));
    assert!(String::from_utf8_lossy(&out.stderr).contains("collinearity"));
    let v: Value = serde_json::from_slice(&out.stdout).unwrap();
    assert_eq!(v["all_passed"], false);
}

#[test]
fn usage_errors_exit_with_two() {
    assert_eq!(beltrami(&["energy", "--frobnicate"]).status.code(), Some(2));
    assert_eq!(beltrami(&["nonsense"]).status.code(), Some(2));
    assert_eq!(beltrami(&["energy", "--c", "-1"]).status.code(), Some(2));
    assert_eq!(beltrami(&["flow", "--B", "0"]).status.code(), Some(2));
    assert_eq!(
        beltrami(&["energy", "--map", "identity", "--radial-csv", "/dev/null"])
            .status
            .code(),
        Some(2)
    );
    let dir = tempfile::tempdir().unwrap();
    let cfg = dir.path().join("bad.json");
    fs::write(&cfg, r#"{"unknown_key": 1}"#).unwrap();
    let out = beltrami(&["energy", "--config", path(&cfg)]);
    assert_eq!(out.status.code(), Some(2));
}

#[test]
fn selftest_passes() {
    let v = json(&beltrami(&["selftest"]));
    assert_eq!(v["passed"], true);
    let names: Vec<&str> = v["checks"]
        .as_array()
        .unwrap()
        .iter()
        .map(|c| c["name"].as_str().unwrap())
        .collect();
    for n in [
        "structure_constants",
        "integration_by_parts",
        "curl_self_adjoint",
        "div_curl_zero",
    ] {
        assert!(names.contains(&n), "{n}");
    }
}

#[test]
fn output_is_deterministic() {
    let dir = tempfile::tempdir().unwrap();
    let out = dir.path().join("r.json");
    let run = |threads: &str| {
        let o = beltrami(&[
            "--out",
            path(&out),
            "--threads",
            threads,
            "--seed",
            "7",
            "energy",
            "--map",
            "fourier",
            "--n-s",
            "12",
            "--n-theta",
            "8",
            "--n-psi",
            "8",
        ]);
        assert!(o.status.success());
        fs::read(&out).unwrap()
    };
    let first = run("1");
    assert_eq!(first, run("1"));
    let without_threads = |bytes: &[u8]| {
        let mut v: Value = serde_json::from_slice(bytes).unwrap();
        v["config"].as_object_mut().unwrap().remove("threads");
        v
    };
    assert_eq!(without_threads(&first), without_threads(&run("2")));
}

#[test]
fn flags_override_the_config_file() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = dir.path().join("run.json");
    fs::write(
        &cfg,
        r#"{"c": 3.0, "map": {"family": "suspension", "a": 0.5},
            "grid": {"n_s": 16, "n_theta": 12, "n_psi": 12}}"#,
    )
    .unwrap();
    let v = json(&beltrami(&["--config", path(&cfg), "energy", "--c", "2"]));
    assert_eq!(v["config"]["c"].as_f64(), Some(2.0));
    assert_eq!(v["config"]["map"]["a"].as_f64(), Some(0.5));
    assert_eq!(v["config"]["grid"]["n_s"], 16);
    let v = json(&beltrami(&["--config", path(&cfg), "energy", "--a", "2"]));
    assert_eq!(v["config"]["map"]["a"].as_f64(), Some(2.0));
    assert_eq!(v["config"]["c"].as_f64(), Some(3.0));
}

#[test]
fn floats_carry_seventeen_significant_digits() {
    let out = beltrami(&["energy", "--map", "identity"]);
    let text = String::from_utf8(out.stdout).unwrap();
    for line in text.lines().filter(|l| l.contains("\"E\":")) {
        let num = line.split(':').nth(1).unwrap().trim().trim_end_matches(',');
        let digits = num.chars().filter(|c| c.is_ascii_digit()).count();
        assert_eq!(digits, 17, "{num}");
    }
}

#[test]
fn flow_writes_profiles_that_load_as_maps() {
    let dir = tempfile::tempdir().unwrap();
    let (prof, trace) = (dir.path().join("p.csv"), dir.path().join("t.csv"));
    let v = json(&beltrami(&[
        "flow",
        "--B",
        "1",
        "--c",
        "2",
        "--nodes",
        "16",
        "--per-interval",
        "3",
        "--profile-csv",
        path(&prof),
        "--trace-csv",
        path(&trace),
    ]));
    assert_eq!(v["trace_monotone"], true);
    assert!((v["deg"].as_f64().unwrap() - 1.0).abs() < 1e-4);
    let text = fs::read_to_string(&prof).unwrap();
    assert!(text.starts_with("s,alpha\n0.0000000000000000,0.0000000000000000\n"));
    let trace_text = fs::read_to_string(&trace).unwrap();
    assert!(trace_text.starts_with("iteration,energy\n0,"));
    let n_trace = v["energy_trace"].as_array().unwrap().len();
    assert_eq!(trace_text.lines().count(), n_trace + 1);

    let e = json(&beltrami(&[
        "energy",
        "--map",
        "profile",
        "--table",
        path(&prof),
    ]));
    assert!((e["deg"].as_f64().unwrap() - 1.0).abs() < 1e-6);
    assert!((e["E"].as_f64().unwrap() - v["E"].as_f64().unwrap()).abs() < 1e-3 * 39.5);
}

#[test]
fn radial_csv_for_suspensions() {
    let dir = tempfile::tempdir().unwrap();
    let csv = dir.path().join("r.csv");
    json(&beltrami(&[
        "energy",
        "--map",
        "suspension",
        "--a",
        "2",
        "--coupling",
        "pointwise",
        "--radial-csv",
        path(&csv),
        "--radial-samples",
        "50",
    ]));
    let text = fs::read_to_string(&csv).unwrap();
    let mut lines = text.lines();
    assert_eq!(
        lines.next(),
        Some("s,beta_sq,c_pt,lambda1_sq,lambda2_sq,lambda3_sq")
    );
    assert_eq!(lines.count(), 50);
}

#[test]
fn convergence_reports_three_levels() {
    let v = json(&beltrami(&[
        "convergence",
        "--map",
        "fourier",
        "--seed",
        "3",
        "--n-s",
        "16",
        "--n-theta",
        "12",
        "--n-psi",
        "12",
    ]));
    let levels = v["levels"].as_array().unwrap();
    assert_eq!(levels.len(), 3);
    assert_eq!(levels[2]["grid"], serde_json::json!([16, 12, 12]));
    assert_eq!(levels[0]["grid"], serde_json::json!([4, 4, 4]));
    let slope = v["fd_richardson_slope"].as_f64().unwrap();
    assert!((1.8..=2.2).contains(&slope), "{slope}");
    assert!(v["energy_order"][0].as_f64().unwrap() > 0.0);
}
