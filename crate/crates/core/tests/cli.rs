use std::fs;
use std::path::Path;
use std::process::{Command, Output};

use hardyvx::cli::RunReport;

const SMALL: &str = r#""grid": {"x_min": 1e-8, "n": 241}"#;

fn hardyvx(args: &[&str], dir: &Path, threads: Option<&str>) -> Output {
    let mut cmd = Command::new(env!("CARGO_BIN_EXE_hardyvx"));
    cmd.args(args).current_dir(dir).env_remove("HARDYVX_THREADS");
    if let Some(t) = threads {
        cmd.env("HARDYVX_THREADS", t);
    }
    cmd.output().unwrap()
}

fn write_config(dir: &Path, name: &str, body: &str) -> String {
    let path = dir.join(name);
    fs::write(&path, body).unwrap();
    path.to_str().unwrap().to_string()
}

fn stderr(o: &Output) -> String {
    String::from_utf8_lossy(&o.stderr).into_owned()
}

#[test]
fn catalog_lists_builtins() {
    let dir = tempfile::tempdir().unwrap();
    let o = hardyvx(&["catalog"], dir.path(), None);
    assert_eq!(o.status.code(), Some(0));
    let text = String::from_utf8(o.stdout).unwrap();
    for name in ["constant-2", "p-one", "dyadic-jump-default", "nonincreasing-log"] {
        assert!(text.contains(name), "{name} missing from\n{text}");
    }
}

#[test]
fn run_writes_csv_series() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = write_config(
        dir.path(),
        "c.json",
        &format!(r#"{{"exponent": {{"catalog": "constant-3"}}, {SMALL}, "criteria": ["C2", "C5", "C1"]}}"#),
    );
    let o = hardyvx(&["run", "--config", &cfg, "--out", "res", "--format", "csv"], dir.path(), None);
    assert_eq!(o.status.code(), Some(0), "{}", stderr(&o));
    let res = dir.path().join("res");
    let c2 = fs::read_to_string(res.join("c2.csv")).unwrap();
    assert!(c2.starts_with("a,value,lo,hi\n"));
    assert!(c2.lines().count() > 100);
    assert!(res.join("c5.csv").exists());
    assert!(res.join("c1-power.csv").exists());
    assert!(!res.join("a.csv").exists());
    let report = RunReport::from_json(&fs::read_to_string(res.join("report.json")).unwrap()).unwrap();
    assert!(report.consistent);
    assert_eq!(report.config.label(), "constant-3");
}

#[test]
fn output_dir_from_config() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = write_config(
        dir.path(),
        "c.json",
        &format!(
            r#"{{"exponent": {{"catalog": "p-one"}}, {SMALL}, "criteria": ["C4"], "output": {{"dir": "from-config", "format": "csv"}}}}"#
        ),
    );
    let o = hardyvx(&["run", "--config", &cfg], dir.path(), None);
    assert_eq!(o.status.code(), Some(0), "{}", stderr(&o));
    assert!(dir.path().join("from-config/c4.csv").exists());
    // The command-line format wins over the config.
    let o = hardyvx(&["run", "--config", &cfg, "--out", "json-only", "--format", "json"], dir.path(), None);
    assert_eq!(o.status.code(), Some(0));
    let names: Vec<_> =
        fs::read_dir(dir.path().join("json-only")).unwrap().map(|e| e.unwrap().file_name()).collect();
    assert_eq!(names, ["report.json"]);
}

#[test]
fn invalid_config_exits_one_with_field_paths() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = write_config(
        dir.path(),
        "bad.json",
        r#"{"exponent": {"family": "constant", "p0": 0.5}, "grid": {"x_min": 1e-8, "n": 3}}"#,
    );
    let o = hardyvx(&["run", "--config", &cfg], dir.path(), None);
    assert_eq!(o.status.code(), Some(1));
    let err = stderr(&o);
    assert!(err.contains("exponent.p0: p0 < 1"), "{err}");
    assert!(err.contains("grid.n"), "{err}");
    assert!(!dir.path().join("hardyvx-out").exists());
}

#[test]
fn missing_config_names_the_path() {
    let dir = tempfile::tempdir().unwrap();
    let o = hardyvx(&["run", "--config", "nowhere.json"], dir.path(), None);
    assert_eq!(o.status.code(), Some(1));
    assert!(stderr(&o).contains("nowhere.json"));
}

#[test]
fn inconclusive_scan_exits_two() {
    // Too shallow a grid for the scale criteria to settle.
    let dir = tempfile::tempdir().unwrap();
    let cfg = write_config(
        dir.path(),
        "c.json",
        r#"{"exponent": {"family": "log-log-perturbed", "p0": 2, "c": 1}, "grid": {"x_min": 1e-6, "n": 200}, "criteria": ["C2"]}"#,
    );
    let o = hardyvx(&["run", "--config", &cfg, "--out", "o"], dir.path(), None);
    assert_eq!(o.status.code(), Some(2), "{}", stderr(&o));
    assert!(String::from_utf8_lossy(&o.stdout).contains("INCONSISTENT"));
    let report =
        RunReport::from_json(&fs::read_to_string(dir.path().join("o/report.json")).unwrap()).unwrap();
    assert!(!report.consistent);
}

#[test]
fn reports_are_deterministic_across_thread_counts() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = write_config(
        dir.path(),
        "c.json",
        &format!(r#"{{"exponent": {{"catalog": "dyadic-jump-default"}}, {SMALL}}}"#),
    );
    let mut canon = Vec::new();
    for (out, threads) in [("t1", Some("1")), ("t3", Some("3")), ("td", None)] {
        let o = hardyvx(&["run", "--config", &cfg, "--out", out], dir.path(), threads);
        assert!(matches!(o.status.code(), Some(0 | 2)), "{}", stderr(&o));
        let text = fs::read_to_string(dir.path().join(out).join("report.json")).unwrap();
        canon.push(RunReport::from_json(&text).unwrap().canonical_json().unwrap());
    }
    assert_eq!(canon[0], canon[1]);
    assert_eq!(canon[0], canon[2]);
}

#[test]
fn bad_thread_count_is_an_input_error() {
    let dir = tempfile::tempdir().unwrap();
    let o = hardyvx(&["catalog"], dir.path(), Some("zero"));
    assert_eq!(o.status.code(), Some(1));
    assert!(stderr(&o).contains("HARDYVX_THREADS"));
}
