use std::process::{Command, Output};

use serde_json::Value;

fn degenwell(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_degenwell"))
        .args(args)
        .env_remove("DEGENWELL_JOBS")
        .output()
        .expect("binary runs")
}

fn records(out: &Output) -> Vec<Value> {
    String::from_utf8_lossy(&out.stdout)
        .lines()
        .map(|l| serde_json::from_str(l).expect("json line"))
        .collect()
}

#[test]
fn delta_reports_widths_and_residual() {
    let out = degenwell(&["delta", "--potential", r#"{"family":"exp_flat","params":{"alpha":1}}"#, "--h", "1e-6"]);
    assert!(out.status.success());
    let r = records(&out);
    assert_eq!(r.len(), 1);
    let d = r[0]["delta_plus"].as_f64().unwrap();
    // 4 d^2 exp(-1/d) = h^2
    let defect = (4.0 * d * d).ln() - 1.0 / d - 2.0 * 1e-6f64.ln();
    assert!(defect.abs() < 1e-10);
    assert_eq!(r[0]["delta_minus"].as_f64().unwrap(), -d);
    assert!(r[0]["residual"].as_f64().unwrap() < 1e-10);
    assert_eq!(r[0]["record"], "delta");
    assert_eq!(r[0]["config_hash"].as_str().unwrap().len(), 64);
}

#[test]
fn solve_harmonic_levels() {
    let out = degenwell(&["solve", "--potential", "power2", "--h", "1e-3", "--k", "3"]);
    assert!(out.status.success());
    let r = records(&out);
    let levels: Vec<f64> = r[0]["eigenvalues"]
        .as_array()
        .unwrap()
        .iter()
        .map(|v| v.as_f64().unwrap() / 1e-3)
        .collect();
    for (l, want) in levels.iter().zip([1.0, 3.0, 5.0]) {
        assert!((l - want).abs() < 1e-4 * want, "{l} vs {want}");
    }
}

#[test]
fn potential_from_file() {
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("p.json");
    std::fs::write(&path, r#"{"family":"power","params":{"exponent":2}}"#).unwrap();
    let a = degenwell(&["delta", "--potential", path.to_str().unwrap(), "--h", "1e-2"]);
    let b = degenwell(&["delta", "--potential", "power2", "--h", "1e-2"]);
    assert!(a.status.success());
    assert_eq!(records(&a)[0]["delta_plus"], records(&b)[0]["delta_plus"]);
}

#[test]
fn usage_errors_exit_2() {
    assert_eq!(degenwell(&["solve", "--h", "1e-3"]).status.code(), Some(2));
    assert_eq!(degenwell(&["no-such-command"]).status.code(), Some(2));
    let out = degenwell(&["solve", "--potential", "no_such_family", "--h", "1e-3"]);
    assert_eq!(out.status.code(), Some(2));
    let r = records(&out);
    assert_eq!(r[0]["record"], "error");
    assert_eq!(r[0]["kind"], "unknown_family");
}

#[test]
fn numerical_failure_exits_1_with_record() {
    // A fixed box far too small for the level requested.
    let out = degenwell(&[
        "solve",
        "--potential",
        "log_power1",
        "--h",
        "1e-2",
        "--k",
        "3",
        "--box=-0.1,1.1",
        "--fixed-box",
    ]);
    assert_eq!(out.status.code(), Some(1));
    let r = records(&out);
    assert_eq!(r.last().unwrap()["record"], "error");
    assert_eq!(r.last().unwrap()["kind"], "truncation");
}

#[test]
fn jobs_do_not_change_output() {
    let args = ["sweep", "--potential", "exp_flat1", "--h-grid", "1e-3:1e-6", "--n", "1024"];
    let one = degenwell(&[&args[..], &["--jobs", "1"]].concat());
    let four = degenwell(&[&args[..], &["--jobs", "4"]].concat());
    assert!(one.status.success());
    assert_eq!(one.stdout, four.stdout);
    assert_eq!(records(&one).len(), 5);
}

#[test]
fn env_overrides_jobs_flag() {
    let out = Command::new(env!("CARGO_BIN_EXE_degenwell"))
        .args(["zoo", "--jobs", "2"])
        .env("DEGENWELL_JOBS", "zero")
        .output()
        .unwrap();
    assert_eq!(out.status.code(), Some(2));
}

#[test]
fn zoo_lists_catalogue() {
    let r = records(&degenwell(&["zoo"]));
    assert_eq!(r.len(), 9);
    assert!(r.iter().all(|e| e["origin"].is_string() && e["potential"]["family"].is_string()));
}

#[test]
fn sweep_writes_csv_and_svg() {
    let dir = tempfile::tempdir().unwrap();
    let csv = dir.path().join("s.csv");
    let svg = dir.path().join("s.svg");
    let out = degenwell(&[
        "sweep",
        "--potential",
        "exp_flat2",
        "--h",
        "1e-3,1e-5",
        "--k",
        "2",
        "--n",
        "1024",
        "--csv",
        csv.to_str().unwrap(),
        "--svg",
        svg.to_str().unwrap(),
    ]);
    assert!(out.status.success());
    let table = std::fs::read_to_string(csv).unwrap();
    assert_eq!(table.lines().count(), 1 + 2 * 2);
    assert!(std::fs::read_to_string(svg).unwrap().starts_with("<svg"));
}

#[test]
fn config_hash_ignores_output_paths() {
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("o.jsonl");
    let a = degenwell(&["delta", "--potential", "power4", "--h", "1e-3"]);
    let b = degenwell(&["delta", "--potential", "power4", "--h", "1e-3", "--out", path.to_str().unwrap()]);
    assert!(b.stdout.is_empty());
    assert_eq!(a.stdout, std::fs::read(path).unwrap());
}
