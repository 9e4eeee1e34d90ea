use std::path::Path;
use std::process::{Command, Output};

use serde_json::Value;

fn cohpert(args: &[&str], dir: &Path) -> Output {
    Command::new(env!("CARGO_BIN_EXE_cohpert"))
        .args(args)
        .current_dir(dir)
        .env_remove("COHPERT_JOBS")
        .output()
        .expect("binary runs")
}

fn write(dir: &Path, name: &str, text: &str) -> String {
    let path = dir.join(name);
    std::fs::write(&path, text).unwrap();
    path.to_string_lossy().into_owned()
}

fn stdout_json(out: &Output) -> Value {
    assert!(out.status.success(), "stderr: {}", String::from_utf8_lossy(&out.stderr));
    serde_json::from_slice(&out.stdout).expect("stdout is JSON")
}

const IDENTITY_ZERO: &str = r#"{
  "scenario": "custom",
  "channel": {"family": "identity", "params": {"dim": 2}},
  "family": {
    "base": [[[0.5, 0], [0, 0]], [[0, 0], [0.5, 0]]],
    "a1": [[[0, 0], [0, 0]], [[0, 0], [0, 0]]]
  },
  "criterion": "c3",
  "sense": "positive_f"
}"#;

const DEPOLARIZING_PAIR: &str = r#"{
  "scenario": "custom",
  "channel": {"family": "tensor", "children": [
    {"family": "depolarizing", "params": {"p": 0.2}},
    {"family": "depolarizing", "params": {"p": 0.2}}
  ]},
  "family": {"preset": "plus_zero_pair"},
  "criterion": "c3",
  "sense": "positive_f"
}"#;

#[test]
fn identity_with_zero_perturbation_fails_with_zero_margin() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = write(dir.path(), "id.json", IDENTITY_ZERO);
    let r = stdout_json(&cohpert(&["check", &cfg], dir.path()));
    assert_eq!(r["criterion"], "C3");
    assert_eq!(r["verdict"], "fails");
    assert_eq!(r["margin"].as_f64().unwrap(), 0.0);
}

#[test]
fn depolarizing_pair_check_reports_c3() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = write(dir.path(), "pair.json", DEPOLARIZING_PAIR);
    let r = stdout_json(&cohpert(&["check", &cfg], dir.path()));
    assert_eq!(r["criterion"], "C3");
    // Tr W_Nc − Tr W_N is negative at p = 0.2 (root near 0.28).
    assert_eq!(r["verdict"], "fails");
    assert!(r["margin"].as_f64().unwrap() < 0.0);
}

#[test]
fn malformed_json_exits_nonzero_with_location() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = write(dir.path(), "bad.json", "{\n  \"scenario\": \"custom\",\n  \"params\": {\"p\": }\n}");
    let out = cohpert(&["check", &cfg], dir.path());
    assert!(!out.status.success());
    let err = String::from_utf8_lossy(&out.stderr);
    assert!(err.contains("line 3"), "{err}");
}

#[test]
fn schema_violation_names_the_field() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = write(dir.path(), "bad.json", r#"{"scenario": "custom", "channel": {"family": "depolarising"}}"#);
    let out = cohpert(&["check", &cfg], dir.path());
    assert!(!out.status.success());
    let err = String::from_utf8_lossy(&out.stderr);
    assert!(err.contains("channel.family"), "{err}");
}

#[test]
fn non_cptp_kraus_reports_residual() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = write(
        dir.path(),
        "k.json",
        r#"{"scenario": "custom",
            "channel": {"family": "custom_kraus", "kraus": [[[[1, 0], [0, 0]], [[0, 0], [0.5, 0]]]]},
            "family": {"preset": "z_flip"}}"#,
    );
    let out = cohpert(&["check", &cfg], dir.path());
    assert!(!out.status.success());
    assert!(String::from_utf8_lossy(&out.stderr).contains("residual"));
}

#[test]
fn bad_arguments_exit_nonzero() {
    let dir = tempfile::tempdir().unwrap();
    assert!(!cohpert(&["scenario", "nope"], dir.path()).status.success());
    assert!(!cohpert(&["scenario", "hashing-curve", "--tol", "bogus=1"], dir.path()).status.success());
    assert!(!cohpert(&["scenario", "hashing-curve", "--grid", "0.3:0.1:5"], dir.path()).status.success());
    assert!(!cohpert(&["check", "missing.json"], dir.path()).status.success());
}

#[test]
fn scans_are_byte_identical_across_runs_and_job_counts() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = write(
        dir.path(),
        "scan.json",
        r#"{"scenario": "custom",
            "channel": {"family": "depolarizing", "params": {"p": 0.1}},
            "family": {"preset": "random", "params": {"scale": 0.3}},
            "criterion": "thm1",
            "scan_param": "p",
            "grid": {"lo": 0.02, "hi": 0.3, "steps": 15},
            "seed": 11}"#,
    );
    let run = |out: &str, jobs: &str| {
        let o = cohpert(&["scan", &cfg, "--out", out, "--jobs", jobs], dir.path());
        assert!(o.status.success(), "{}", String::from_utf8_lossy(&o.stderr));
        (
            std::fs::read(dir.path().join(out).join("custom.csv")).unwrap(),
            std::fs::read(dir.path().join(out).join("custom.json")).unwrap(),
        )
    };
    let a = run("a", "1");
    let b = run("b", "4");
    assert_eq!(a, b);
    let text = String::from_utf8(a.0).unwrap();
    assert_eq!(text.lines().count(), 16);
    let params: Vec<f64> = text.lines().skip(1).map(|l| l.split(',').next().unwrap().parse().unwrap()).collect();
    assert!(params.windows(2).all(|w| w[0] < w[1]));
}

#[test]
fn gap_depolarizing_scenario_report() {
    let dir = tempfile::tempdir().unwrap();
    let out = cohpert(&["scenario", "gap-depolarizing", "--out", "o"], dir.path());
    assert!(out.status.success());
    let report: Value = serde_json::from_slice(&std::fs::read(dir.path().join("o/gap-depolarizing.json")).unwrap()).unwrap();
    let point = report["points"]
        .as_array()
        .unwrap()
        .iter()
        .find(|p| (p["parameter"].as_f64().unwrap() - 0.1).abs() < 1e-12)
        .unwrap();
    let detector = &point["result"]["detector"];
    assert_eq!(detector["conclusion"], "gap_detected");
    assert!((detector["admissible_r"].as_f64().unwrap() - 0.5).abs() <= 1e-6);
    assert!(point["result"]["kernel_trace_abs_error"].as_f64().unwrap() < 1e-12);
}

#[test]
fn hashing_curve_csv_and_zero_crossing() {
    let dir = tempfile::tempdir().unwrap();
    let out = cohpert(&["scenario", "hashing-curve", "--out", "o"], dir.path());
    assert!(out.status.success());
    let csv = std::fs::read_to_string(dir.path().join("o/hashing-curve.csv")).unwrap();
    assert!(csv.starts_with("parameter,criterion,verdict,margin,"));
    assert_eq!(csv.lines().count(), 62);
    let report: Value = serde_json::from_slice(&std::fs::read(dir.path().join("o/hashing-curve.json")).unwrap()).unwrap();
    let root = report["summary"]["zero_crossing"]["root"].as_f64().unwrap();
    assert!((root - 0.2524).abs() <= 5e-4);
}

#[test]
fn format_flag_limits_outputs() {
    let dir = tempfile::tempdir().unwrap();
    let out = cohpert(&["scenario", "hashing-curve", "--out", "o", "--format", "csv", "--grid", "0:0.3:4"], dir.path());
    assert!(out.status.success());
    assert!(dir.path().join("o/hashing-curve.csv").exists());
    assert!(!dir.path().join("o/hashing-curve.json").exists());
}

#[test]
fn check_on_named_scenario_uses_param_override() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = write(dir.path(), "g.json", r#"{"scenario": "gap-depolarizing"}"#);
    let r = stdout_json(&cohpert(&["check", &cfg, "--param", "p=0.2"], dir.path()));
    let rhs = r["detector"]["criterion_report"]["rhs"].as_f64().unwrap();
    assert!((rhs - 0.2 * 2.6 / 1.8).abs() < 1e-12);
}
