use std::path::Path;
use std::process::{Command, Output};

fn zklab(args: &[&str], out_root: &Path) -> Output {
    Command::new(env!("CARGO_BIN_EXE_zklab"))
        .args(args)
        .env("ZKLAB_OUT", out_root)
        .output()
        .expect("binary runs")
}

fn stdout(o: &Output) -> String {
    String::from_utf8_lossy(&o.stdout).into_owned()
}

fn stderr(o: &Output) -> String {
    String::from_utf8_lossy(&o.stderr).into_owned()
}

fn run_dir(o: &Output) -> std::path::PathBuf {
    let line = stdout(o).lines().find(|l| l.starts_with("results: ")).expect("results line").to_string();
    line.trim_start_matches("results: ").into()
}

#[test]
fn thresholds_prints_value() {
    let tmp = tempfile::tempdir().unwrap();
    let o = zklab(&["thresholds", "--kind", "spacetime_necessary", "--d", "3", "--p", "4"], tmp.path());
    assert_eq!(o.status.code(), Some(0), "{}", stderr(&o));
    assert!(stdout(&o).lines().any(|l| l.trim() == "1.25"), "{}", stdout(&o));
}

#[test]
fn unknown_subcommand_exits_one() {
    let tmp = tempfile::tempdir().unwrap();
    let o = zklab(&["frobnicate"], tmp.path());
    assert_eq!(o.status.code(), Some(1));
    assert!(stderr(&o).contains("Usage"), "{}", stderr(&o));
}

#[test]
fn unknown_config_key_is_named() {
    let tmp = tempfile::tempdir().unwrap();
    let cfg = tmp.path().join("bad.toml");
    std::fs::write(&cfg, "subcommand = \"thresholds\"\n[params]\nbogus = 1\n").unwrap();
    let o = zklab(&["thresholds", "--config", cfg.to_str().unwrap()], tmp.path());
    assert_eq!(o.status.code(), Some(1));
    assert!(stderr(&o).contains("params.bogus"), "{}", stderr(&o));
}

#[test]
fn bad_value_reports_field() {
    let tmp = tempfile::tempdir().unwrap();
    let o = zklab(&["thresholds", "--p", "four"], tmp.path());
    assert_eq!(o.status.code(), Some(1));
    assert!(stderr(&o).contains("p"), "{}", stderr(&o));
}

#[test]
fn flags_override_file() {
    let tmp = tempfile::tempdir().unwrap();
    let cfg = tmp.path().join("t.toml");
    std::fs::write(&cfg, "subcommand = \"thresholds\"\n[params]\nkind = \"spacetime_necessary\"\nd = 3\np = \"4\"\n").unwrap();
    let o = zklab(&["thresholds", "--config", cfg.to_str().unwrap(), "--d", "2"], tmp.path());
    assert_eq!(o.status.code(), Some(0), "{}", stderr(&o));
    assert!(stdout(&o).lines().any(|l| l.trim() == "0.75"), "{}", stdout(&o));
    let resolved = std::fs::read_to_string(run_dir(&o).join("config.toml")).unwrap();
    assert!(resolved.contains("d = 2"), "{resolved}");
}

#[test]
fn empty_sweep_writes_header_only() {
    let tmp = tempfile::tempdir().unwrap();
    let o = zklab(&["paraproduct-check", "--n-inputs", "0"], tmp.path());
    assert_eq!(o.status.code(), Some(0), "{}", stderr(&o));
    let csv = std::fs::read_to_string(run_dir(&o).join("results.csv")).unwrap();
    assert_eq!(csv.lines().count(), 1);
    assert!(csv.starts_with("experiment,"));
}

#[test]
fn failed_expectation_exits_two() {
    let tmp = tempfile::tempdir().unwrap();
    let args = [
        "probe-kato", "--d", "2", "--bands", "0..3", "--n-seeds", "2", "--n-times", "5", "--expect-slope", "5..6",
    ];
    let o = zklab(&args, tmp.path());
    assert_eq!(o.status.code(), Some(2), "{}", stderr(&o));
    let summary = std::fs::read_to_string(run_dir(&o).join("summary.txt")).unwrap();
    assert!(summary.contains("FAILED"));
}

#[test]
fn estimate_rows_and_plot() {
    let tmp = tempfile::tempdir().unwrap();
    let o = zklab(&["probe-kato", "--d", "2", "--bands", "0..3", "--n-seeds", "3", "--n-times", "5"], tmp.path());
    assert_eq!(o.status.code(), Some(0), "{}", stderr(&o));
    let dir = run_dir(&o);
    assert!(dir.starts_with(tmp.path()));
    let mut rdr = csv::Reader::from_path(dir.join("results.csv")).unwrap();
    let kinds: Vec<String> = rdr.records().map(|r| r.unwrap()[12].to_string()).collect();
    assert_eq!(kinds.iter().filter(|k| *k == "ratio").count(), 4 * 3);
    let svg = std::fs::read_to_string(dir.join("plot.svg")).unwrap();
    assert!(svg.contains("log₂k") && svg.contains("log₂R"));
    let json: serde_json::Value = serde_json::from_str(&std::fs::read_to_string(dir.join("results.json")).unwrap()).unwrap();
    assert!(json.is_object());
}

#[test]
fn formats_flag_limits_outputs() {
    let tmp = tempfile::tempdir().unwrap();
    let out = tmp.path().join("only-csv");
    let o = zklab(&["thresholds", "--formats", "csv", "--out", out.to_str().unwrap()], tmp.path());
    assert_eq!(o.status.code(), Some(0), "{}", stderr(&o));
    assert!(out.join("results.csv").exists());
    assert!(!out.join("results.json").exists());
    assert!(out.join("config.toml").exists());
}

#[test]
fn kind_not_allowed_for_subcommand() {
    let tmp = tempfile::tempdir().unwrap();
    let o = zklab(&["probe-kato", "--kind", "strichartz"], tmp.path());
    assert_eq!(o.status.code(), Some(1));
    assert!(stderr(&o).contains("kind"), "{}", stderr(&o));
}
