use std::path::Path;
use std::process::{Command, Output};

fn run(out: &Path, args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_subconc"))
        .args(args)
        .arg("--out")
        .arg(out)
        .output()
        .expect("spawn subconc")
}

const GRID: &str = "0.05,0.1,0.15,0.2,0.25,0.3,0.35,0.4,0.45,0.5";

fn code(o: &Output) -> i32 {
    o.status.code().expect("exited normally")
}

#[test]
fn bounds_writes_three_rows_per_t() {
    let dir = tempfile::tempdir().unwrap();
    let o = run(dir.path(), &["bounds", "--n", "1000", "--d", "1", "--sigma-sq", "0.25", "--t-grid", GRID]);
    assert_eq!(code(&o), 0, "{}", String::from_utf8_lossy(&o.stderr));
    let text = std::fs::read_to_string(dir.path().join("bounds.csv")).unwrap();
    let lines: Vec<&str> = text.lines().collect();
    assert_eq!(lines[0], "bound_name,n,d,M,sigma_sq,t,raw,clamped,exponent,prefactor,regime");
    assert_eq!(lines.len(), 31);
    assert!(dir.path().join("manifest.json").exists());
}

#[test]
fn bounds_in_three_dimensions_keep_dimfree_below_bernstein() {
    let dir = tempfile::tempdir().unwrap();
    let o = run(dir.path(), &["bounds", "--d", "3", "--sigma-sq", "0.25", "--t-grid", GRID]);
    assert_eq!(code(&o), 0);
    let mut reader = csv::Reader::from_path(dir.path().join("bounds.csv")).unwrap();
    let rows: Vec<(String, f64, f64)> = reader
        .records()
        .map(|r| {
            let r = r.unwrap();
            (r[0].to_string(), r[5].parse().unwrap(), r[6].parse().unwrap())
        })
        .collect();
    let raw = |name: &str| -> Vec<f64> { rows.iter().filter(|r| r.0 == name).map(|r| r.2).collect() };
    let (bern, dimfree) = (raw("bernstein"), raw("dimfree"));
    assert_eq!(bern.len(), 10);
    assert!(bern.iter().zip(&dimfree).all(|(b, f)| f <= b));
}

#[test]
fn empty_grid_is_a_config_error() {
    let dir = tempfile::tempdir().unwrap();
    assert_eq!(code(&run(dir.path(), &["bounds", "--t-grid", ""])), 2);
    assert_eq!(code(&run(dir.path(), &["bounds", "--t-grid", "0.3,0.1"])), 2);
}

#[test]
fn simulate_needs_a_seed_and_is_reproducible() {
    let dir = tempfile::tempdir().unwrap();
    assert_eq!(code(&run(dir.path(), &["simulate"])), 2);

    let args = ["simulate", "--seed", "11", "--n", "200", "--replicates", "3000", "--t-grid", "0.02,0.05,0.1"];
    let a = tempfile::tempdir().unwrap();
    let b = tempfile::tempdir().unwrap();
    assert_eq!(code(&run(a.path(), &args)), 0);
    let mut with_workers = args.to_vec();
    with_workers.extend(["--workers", "3"]);
    assert_eq!(code(&run(b.path(), &with_workers)), 0);
    let ca = std::fs::read(a.path().join("sandwich.csv")).unwrap();
    let cb = std::fs::read(b.path().join("sandwich.csv")).unwrap();
    assert_eq!(ca, cb);
    let svg = std::fs::read_to_string(a.path().join("tail.svg")).unwrap();
    assert!(svg.starts_with("<svg"));
}

#[test]
fn net_sizes_and_dimension_limit() {
    let dir = tempfile::tempdir().unwrap();
    assert_eq!(code(&run(dir.path(), &["net", "--d", "1", "--samples", "1000", "--transfer-trials", "100"])), 0);
    let rows = std::fs::read_to_string(dir.path().join("net.csv")).unwrap();
    assert_eq!(rows.lines().count(), 1 + 2);

    assert_eq!(code(&run(dir.path(), &["net", "--d", "2", "--samples", "20000", "--transfer-trials", "1000"])), 0);
    let rows = std::fs::read_to_string(dir.path().join("net.csv")).unwrap();
    assert!(rows.lines().count() - 1 <= 25);
    let summary: serde_json::Value =
        serde_json::from_str(&std::fs::read_to_string(dir.path().join("net.json")).unwrap()).unwrap();
    assert!(summary["covering_radius"].as_f64().unwrap() <= 0.5);

    assert_eq!(code(&run(dir.path(), &["net", "--d", "9"])), 2);
}

#[test]
fn oracle_reports_shipped_verdicts() {
    let dir = tempfile::tempdir().unwrap();
    let o = run(dir.path(), &["oracle"]);
    assert_eq!(code(&o), 0, "{}", String::from_utf8_lossy(&o.stderr));
    let report: serde_json::Value =
        serde_json::from_str(&std::fs::read_to_string(dir.path().join("oracle.json")).unwrap()).unwrap();
    assert_eq!(report["all_ok"], true);
    let spaces = report["spaces"].as_array().unwrap();
    let control = spaces.iter().find(|s| s["space"] == "negative_control").unwrap();
    assert_eq!(control["independence"]["passed"], false);
    assert_eq!(control["verdict_ok"], true);

    assert_eq!(code(&run(dir.path(), &["oracle", "--spaces", ""])), 2);
    assert_eq!(code(&run(dir.path(), &["oracle", "--spaces", "no_such_space"])), 2);
}

#[test]
fn unknown_config_keys_are_rejected() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = dir.path().join("bad.toml");
    std::fs::write(&cfg, "seed = 1\nbogus = true\n").unwrap();
    let o = run(dir.path(), &["bounds", "--config", cfg.to_str().unwrap()]);
    assert_eq!(code(&o), 2);
}
