use std::path::Path;
use std::process::{Command, Output};

use supergeom::cli_reports::{Report, SuiteConfig, CONFIG_ENV};

fn bin() -> Command {
    let mut c = Command::new(env!("CARGO_BIN_EXE_supergeom"));
    c.env_remove(CONFIG_ENV);
    c
}

fn run(args: &[&str], config: Option<&Path>) -> Output {
    let mut c = bin();
    if let Some(p) = config {
        c.env(CONFIG_ENV, p);
    }
    c.args(args).output().expect("binary runs")
}

fn small_config(dir: &Path) -> std::path::PathBuf {
    let mut cfg = SuiteConfig::default();
    cfg.fixtures.algebra = 50;
    cfg.fixtures.toy = 5;
    cfg.fixtures.susy = 1;
    cfg.grids.susy = 8;
    let path = dir.join("config.json");
    cfg.save(&path).unwrap();
    path
}

#[test]
fn verify_is_deterministic_and_reports_round_trip() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = small_config(dir.path());
    let a = dir.path().join("a.json");
    let b = dir.path().join("b.json");
    for out in [&a, &b] {
        let o = run(
            &["verify", "toy", "--seed", "3", "--json", out.to_str().unwrap()],
            Some(&cfg),
        );
        // the reference closed-form toy value disagrees with the invariant sign
        assert_eq!(o.status.code(), Some(1), "{}", String::from_utf8_lossy(&o.stderr));
    }
    let text = std::fs::read_to_string(&a).unwrap();
    assert_eq!(text, std::fs::read_to_string(&b).unwrap());
    let report: Report = serde_json::from_str(&text).unwrap();
    assert_eq!(report.header.seed, 3);
    assert_eq!(report.checks.len(), 4);
    assert!(report.checks.iter().all(|c| c.runtime_ms.is_none()));
    let failed: Vec<&str> = report
        .checks
        .iter()
        .filter(|c| !c.passed)
        .map(|c| c.name.as_str())
        .collect();
    assert_eq!(failed, ["toy.closed_form"]);
    let again = serde_json::to_string_pretty(&report).unwrap();
    assert_eq!(again.trim_end(), text.trim_end());

    let value: serde_json::Value = serde_json::from_str(&text).unwrap();
    for key in ["seed", "config_hash", "conventions"] {
        assert!(value["header"].get(key).is_some(), "missing header.{key}");
    }
}

#[test]
fn timings_are_opt_in() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = small_config(dir.path());
    let o = run(&["verify", "algebra", "--timings"], Some(&cfg));
    let report: Report = serde_json::from_slice(&o.stdout).unwrap();
    assert!(report.checks.iter().all(|c| c.runtime_ms.is_some()));
}

#[test]
fn zero_tolerance_fails_with_exit_one() {
    let dir = tempfile::tempdir().unwrap();
    let path = small_config(dir.path());
    let mut cfg = SuiteConfig::load(&path).unwrap();
    cfg.tolerances.toy = 0.0;
    cfg.save(&path).unwrap();
    let o = run(&["verify", "toy"], Some(&path));
    assert_eq!(o.status.code(), Some(1));
    let report: Report = serde_json::from_slice(&o.stdout).unwrap();
    let inv = report.checks.iter().find(|c| c.name == "toy.invariance").unwrap();
    assert!(inv.residual > 0.0 && !inv.passed);
}

#[test]
fn bad_input_exits_with_two() {
    assert_eq!(run(&["verify", "nonsense"], None).status.code(), Some(2));
    let dir = tempfile::tempdir().unwrap();
    let missing = dir.path().join("missing.json");
    assert_eq!(run(&["verify", "algebra"], Some(&missing)).status.code(), Some(2));
    let bad = dir.path().join("bad.json");
    std::fs::write(&bad, r#"{"tolerances": {"toy": -1.0}}"#).unwrap();
    assert_eq!(run(&["verify", "algebra"], Some(&bad)).status.code(), Some(2));
}

#[test]
fn calibrate_is_idempotent() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = small_config(dir.path());
    let before = SuiteConfig::load(&cfg).unwrap();
    assert!(before.conventions.is_none());
    assert_eq!(run(&["calibrate"], Some(&cfg)).status.code(), Some(0));
    let once = std::fs::read_to_string(&cfg).unwrap();
    assert_eq!(
        run(&["calibrate", "--config", cfg.to_str().unwrap()], None)
            .status
            .code(),
        Some(0)
    );
    assert_eq!(once, std::fs::read_to_string(&cfg).unwrap());
    let after = SuiteConfig::load(&cfg).unwrap();
    let c = after.conventions.unwrap().action;
    assert_eq!((c.s1, c.s2, c.s3, c.c4, c.c5), (1.0, 1.0, -1.0, -2.0, -0.5));
    assert_eq!(
        SuiteConfig {
            conventions: None,
            ..after
        },
        before
    );
}

#[test]
fn flow_and_decompose_commands() {
    let o = run(&["flow", "--steps", "5000", "--dt", "0.001"], None);
    assert_eq!(o.status.code(), Some(0));
    let v: serde_json::Value = serde_json::from_slice(&o.stdout).unwrap();
    assert!((v["energy"].as_f64().unwrap() - 8.0 * std::f64::consts::PI.powi(2)).abs() < 1e-6);
    assert_eq!(run(&["flow", "--steps", "10"], None).status.code(), Some(1));

    let dir = tempfile::tempdir().unwrap();
    let fx = dir.path().join("fixture.json");
    std::fs::write(&fx, r#"{"grid": 16, "seed": 2, "frame_sign": -1.0}"#).unwrap();
    let o = run(&["decompose", "--fixture", fx.to_str().unwrap()], None);
    assert_eq!(o.status.code(), Some(0), "{}", String::from_utf8_lossy(&o.stderr));
    let v: serde_json::Value = serde_json::from_slice(&o.stdout).unwrap();
    assert_eq!(v["dimensions"], serde_json::json!([2, 2]));
    assert!(v["summary"]["residuals"]["reassembly_even"].as_f64().unwrap() < 1e-8);
}
