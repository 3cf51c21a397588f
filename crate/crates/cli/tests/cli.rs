use std::fs;
use std::path::Path;
use std::process::{Command, Output};

use monise_cli::{RunReport, RunStatus};

fn monise(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_monise"))
        .args(args)
        .output()
        .expect("binary runs")
}

fn path_str(p: &Path) -> &str {
    p.to_str().unwrap()
}

#[test]
fn generate_run_compare_round_trip() {
    let dir = tempfile::tempdir().unwrap();
    let inst = dir.path().join("knap.json");
    let out = monise(&[
        "generate",
        "--problem",
        "knapsack",
        "--q",
        "12",
        "--m",
        "3",
        "--coverage",
        "0.5",
        "--instance-seed",
        "7",
        "-o",
        path_str(&inst),
    ]);
    assert!(
        out.status.success(),
        "{}",
        String::from_utf8_lossy(&out.stderr)
    );
    let text = fs::read_to_string(&inst).unwrap();
    assert!(text.contains("\"type\": \"knapsack\""));

    let mut reports = Vec::new();
    for algorithm in ["monise", "random-weights"] {
        let report = dir.path().join(format!("{algorithm}.json"));
        let out = monise(&[
            "run",
            "--instance",
            path_str(&inst),
            "--algorithm",
            algorithm,
            "--max-iter",
            "6",
            "--solution-budget",
            "10",
            "--seed",
            "3",
            "-o",
            path_str(&report),
        ]);
        assert_eq!(
            out.status.code(),
            Some(0),
            "{}",
            String::from_utf8_lossy(&out.stderr)
        );
        let parsed = RunReport::read(&report).unwrap();
        assert_eq!(parsed.status, RunStatus::Complete);
        // Reports round-trip through their file form.
        let again = dir.path().join("again.json");
        parsed.write(&again).unwrap();
        assert_eq!(RunReport::read(&again).unwrap(), parsed);
        reports.push(report);
    }

    let out = monise(&["compare", path_str(&reports[0]), path_str(&reports[1])]);
    assert!(out.status.success());
    let table = String::from_utf8(out.stdout).unwrap();
    let lines: Vec<&str> = table.lines().collect();
    assert_eq!(lines[0], "algorithm,m,solutions,hypervolume,seconds");
    assert_eq!(lines.len(), 3);
    assert!(lines[1].starts_with("monise,3,"));
}

#[test]
fn usage_errors_exit_with_two() {
    let out = monise(&[
        "run",
        "--problem",
        "quadratic",
        "--m",
        "3",
        "--algorithm",
        "nise",
    ]);
    assert_eq!(out.status.code(), Some(2));
    assert!(String::from_utf8_lossy(&out.stderr).contains("m = 2"));

    let out = monise(&[
        "run",
        "--problem",
        "knapsack",
        "--m",
        "3",
        "--algorithm",
        "monise",
    ]);
    assert_eq!(out.status.code(), Some(2));
    assert!(String::from_utf8_lossy(&out.stderr).contains("--q"));

    let out = monise(&[
        "run",
        "--problem",
        "quadratic",
        "--m",
        "3",
        "--algorithm",
        "monise",
        "--mu-stop",
        "0",
    ]);
    assert_eq!(out.status.code(), Some(2));
    assert!(String::from_utf8_lossy(&out.stderr).contains("mu_stop"));

    let out = monise(&["run", "--algorithm", "monise"]);
    assert_eq!(out.status.code(), Some(2));
}

#[test]
fn node_budget_exits_with_four_and_keeps_the_report() {
    let dir = tempfile::tempdir().unwrap();
    let report = dir.path().join("r.json");
    let out = monise(&[
        "run",
        "--problem",
        "knapsack",
        "--q",
        "12",
        "--m",
        "4",
        "--algorithm",
        "monise",
        "--max-nodes",
        "1",
        "-o",
        path_str(&report),
    ]);
    assert_eq!(out.status.code(), Some(4));
    let parsed = RunReport::read(&report).unwrap();
    assert_eq!(parsed.status, RunStatus::Timeout);
    assert!(!parsed.solutions.is_empty());
}

#[test]
fn mismatched_reports_are_rejected() {
    let dir = tempfile::tempdir().unwrap();
    let mut paths = Vec::new();
    for m in ["2", "3"] {
        let p = dir.path().join(format!("q{m}.json"));
        let out = monise(&[
            "run",
            "--problem",
            "quadratic",
            "--m",
            m,
            "--algorithm",
            "monise",
            "--max-iter",
            "2",
            "-o",
            path_str(&p),
        ]);
        assert!(out.status.success());
        paths.push(p);
    }
    let out = monise(&["compare", path_str(&paths[0]), path_str(&paths[1])]);
    assert_eq!(out.status.code(), Some(2));
    assert!(String::from_utf8_lossy(&out.stderr).contains("different instances"));
}

#[test]
fn hv_of_a_point_file() {
    let dir = tempfile::tempdir().unwrap();
    let json = dir.path().join("pts.json");
    fs::write(&json, "[[0.0, 0.5], [0.5, 0.0]]").unwrap();
    let out = monise(&["hv", path_str(&json), "--reference", "1,1"]);
    assert!(out.status.success());
    let v: serde_json::Value = serde_json::from_slice(&out.stdout).unwrap();
    assert_eq!(v["value"], 0.75);
    assert_eq!(v["mode"], "exact");

    let csv = dir.path().join("pts.csv");
    fs::write(&csv, "0.0,0.5\n0.5,0.0\n2.0,2.0\n").unwrap();
    let out = monise(&["hv", path_str(&csv), "--reference", "1,1"]);
    let v: serde_json::Value = serde_json::from_slice(&out.stdout).unwrap();
    assert_eq!(v["value"], 0.75);
    assert_eq!(v["clipped"], 1);
}
