use std::path::Path;
use std::process::{Command, Output};

use momentlab::report::{TheoremRef, VerificationReport};

fn run(args: &[&str], out: &Path) -> Output {
    Command::new(env!("CARGO_BIN_EXE_momentlab"))
        .args(args)
        .arg("--out")
        .arg(out)
        .output()
        .expect("binary runs")
}

fn read_report(dir: &Path, command: &str) -> VerificationReport {
    let text = std::fs::read_to_string(dir.join(format!("{command}.json"))).unwrap();
    VerificationReport::from_json(&text).unwrap()
}

#[test]
fn lt_check_passes_and_round_trips() {
    let dir = tempfile::tempdir().unwrap();
    let out = run(&["lt-check", "--potential", "sech2:g=6", "--sigma", "2", "--alpha", "1"], dir.path());
    assert_eq!(out.status.code(), Some(0), "{}", String::from_utf8_lossy(&out.stderr));
    let report = read_report(dir.path(), "lt-check");
    assert!(report.passed());
    assert_eq!(report.schema, momentlab::report::SCHEMA);
    let ratio = report.checks[0].values["value"];
    assert!((ratio - 0.9640).abs() < 2e-3);
    assert!(report.checks.iter().all(|c| c.theorem_ref == TheoremRef::SharpLiebThirring));
    let again = VerificationReport::from_json(&report.to_json().unwrap()).unwrap();
    assert_eq!(again, report);
}

#[test]
fn identical_runs_differ_only_in_runtime() {
    let a = tempfile::tempdir().unwrap();
    let b = tempfile::tempdir().unwrap();
    let args = ["moments", "--potential", "sech2:g=6", "--sigma", "2", "--alpha-points", "12", "--grid-n", "999"];
    assert_eq!(run(&args, a.path()).status.code(), Some(0));
    assert_eq!(run(&args, b.path()).status.code(), Some(0));
    let strip = |p: &Path| {
        std::fs::read_to_string(p.join("moments.json"))
            .unwrap()
            .lines()
            .filter(|l| !l.contains("\"runtime_seconds\""))
            .collect::<Vec<_>>()
            .join("\n")
    };
    assert_eq!(strip(a.path()), strip(b.path()));
    assert_eq!(
        std::fs::read(a.path().join("moments-curve.csv")).unwrap(),
        std::fs::read(b.path().join("moments-curve.csv")).unwrap()
    );
}

#[test]
fn moment_curve_csv_columns() {
    let dir = tempfile::tempdir().unwrap();
    let out = run(&["moments", "--potential", "sech2:g=6", "--alpha-points", "6", "--grid-n", "999", "--format", "csv"], dir.path());
    assert_eq!(out.status.code(), Some(0));
    let csv = std::fs::read_to_string(dir.path().join("moments-curve.csv")).unwrap();
    let mut lines = csv.lines();
    assert_eq!(lines.next(), Some("alpha,value,bound_state_count"));
    assert_eq!(lines.count(), 6);
}

#[test]
fn json_format_skips_csv() {
    let dir = tempfile::tempdir().unwrap();
    let out = run(&["moments", "--potential", "sech2:g=6", "--alpha-points", "4", "--grid-n", "999", "--format", "json"], dir.path());
    assert_eq!(out.status.code(), Some(0));
    assert!(dir.path().join("moments.json").exists());
    assert!(!dir.path().join("moments-curve.csv").exists());
}

#[test]
fn oscillator_zero_derivative_at_first_point() {
    let dir = tempfile::tempdir().unwrap();
    let out = run(&["oscillator", "--d", "1", "--sigma", "2", "--point", "first"], dir.path());
    assert_eq!(out.status.code(), Some(0));
    let report = read_report(dir.path(), "oscillator");
    assert!(report.checks.iter().any(|c| c.name == "derivative-zero" && c.passed));
}

#[test]
fn usage_errors_exit_two() {
    let dir = tempfile::tempdir().unwrap();
    for args in [
        &["lt-check", "--potential", "sech2:g=6", "--sigma", "1"][..],
        &["lt-check", "--potential", "morse:a=1"][..],
        &["lt-check"][..],
        &["frobnicate"][..],
        &["lt-check", "--potential", "sech2", "--alpha", "-1"][..],
        &["heat-trace", "--potential", "sech2"][..],
        &["oscillator", "--point", "zeroth"][..],
    ] {
        let out = run(args, dir.path());
        assert_eq!(out.status.code(), Some(2), "{args:?}");
        assert!(!out.stderr.is_empty(), "{args:?}");
    }
}

#[test]
fn malformed_config_exits_two() {
    let dir = tempfile::tempdir().unwrap();
    let conf = dir.path().join("bad.conf");
    std::fs::write(&conf, "potential sech2\n").unwrap();
    let out = run(&["lt-check", "--config", conf.to_str().unwrap()], dir.path());
    assert_eq!(out.status.code(), Some(2));
}

#[test]
fn config_supplies_settings_and_flags_override() {
    let dir = tempfile::tempdir().unwrap();
    let conf = dir.path().join("sweep.conf");
    std::fs::write(&conf, "# sweep\npotential = sech2:g=6\nsigma = 3\nalpha = 10\n").unwrap();
    let out = run(&["lt-check", "--config", conf.to_str().unwrap(), "--alpha", "1"], dir.path());
    assert_eq!(out.status.code(), Some(0));
    let report = read_report(dir.path(), "lt-check");
    assert_eq!(report.parameters["alpha"], "1");
    assert_eq!(report.parameters["sigma"], "3");
}

#[test]
fn failed_check_exits_one() {
    // a coarse box truncates the single shallow state at alpha = 100
    let dir = tempfile::tempdir().unwrap();
    let out = run(&["spectrum", "--potential", "sech2:g=6", "--alpha", "100"], dir.path());
    assert_eq!(out.status.code(), Some(1));
    let report = read_report(dir.path(), "spectrum");
    assert!(!report.passed());
}
