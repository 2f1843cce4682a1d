use std::fs;
use std::path::Path;
use std::process::{Command, Output};

fn route(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_route")).args(args).output().unwrap()
}

fn ok(args: &[&str]) -> String {
    let out = route(args);
    assert!(out.status.success(), "{args:?}: {}", String::from_utf8_lossy(&out.stderr));
    String::from_utf8(out.stdout).unwrap()
}

fn p(path: &Path) -> &str {
    path.to_str().unwrap()
}

#[test]
fn generate_and_run_a_churn_trace() {
    let dir = tempfile::tempdir().unwrap();
    let graph = dir.path().join("g.txt");
    let trace = dir.path().join("t.txt");
    let json = dir.path().join("report.json");
    ok(&["gen", "--n", "600", "--d", "30", "--seed", "1", "--out", p(&graph)]);
    ok(&[
        "gen-workload", "--kind", "churn", "--n", "600", "--ops", "300", "--target", "60", "--r", "150", "--out",
        p(&trace),
    ]);
    let args = [
        "run", "--graph", p(&graph), "--preset", "desk", "--trace", p(&trace), "--verify-every", "5", "--no-timing",
        "--json", p(&json),
    ];
    let first = ok(&args);
    let report: serde_json::Value = serde_json::from_str(&fs::read_to_string(&json).unwrap()).unwrap();
    assert_eq!(report["requests_served"], 300);
    assert_eq!(report["failures"].as_array().unwrap().len(), 0);
    assert!(report["wall_clock_per_request"].is_null());
    let saved = fs::read(&json).unwrap();
    assert_eq!(ok(&args), first);
    assert_eq!(fs::read(&json).unwrap(), saved);
}

#[test]
fn failing_trace_exits_with_one() {
    let dir = tempfile::tempdir().unwrap();
    let graph = dir.path().join("g.txt");
    let trace = dir.path().join("t.txt");
    ok(&["gen", "--n", "600", "--d", "30", "--out", p(&graph)]);
    fs::write(&trace, "find 0 1\nfind 0 2\n").unwrap();
    let out = route(&["run", "--graph", p(&graph), "--preset", "desk", "--trace", p(&trace)]);
    assert_eq!(out.status.code(), Some(1));
    let stdout = String::from_utf8(out.stdout).unwrap();
    assert!(stdout.starts_with("PATH 0 0 1 "));
    assert!(stdout.contains("FAIL 2 caller-error"));
}

#[test]
fn malformed_trace_exits_with_two() {
    let dir = tempfile::tempdir().unwrap();
    let graph = dir.path().join("g.txt");
    let trace = dir.path().join("t.txt");
    ok(&["gen", "--n", "600", "--d", "30", "--out", p(&graph)]);
    fs::write(&trace, "find 0\n").unwrap();
    let out = route(&["run", "--graph", p(&graph), "--preset", "desk", "--trace", p(&trace)]);
    assert_eq!(out.status.code(), Some(2));
    assert!(String::from_utf8_lossy(&out.stderr).contains("line 1"));
}

#[test]
fn profile_file_drives_a_run() {
    let dir = tempfile::tempdir().unwrap();
    let graph = dir.path().join("g.txt");
    let prof = dir.path().join("p.txt");
    let trace = dir.path().join("t.txt");
    ok(&["gen", "--n", "600", "--d", "30", "--out", p(&graph)]);
    let text = ok(&["profile", "--n", "600", "--d", "30", "--preset", "desk", "--set", "r=3"]);
    assert!(text.lines().any(|l| l == "r=3"));
    fs::write(&prof, text).unwrap();
    fs::write(&trace, "find 0 1\nfind 2 3\nfind 4 5\nfind 6 7\n").unwrap();
    let out = route(&["run", "--graph", p(&graph), "--profile", p(&prof), "--trace", p(&trace)]);
    assert_eq!(out.status.code(), Some(1));
    assert!(String::from_utf8(out.stdout).unwrap().contains("FAIL 4 caller-error"));
}

#[test]
fn preprocess_writes_split_files() {
    let dir = tempfile::tempdir().unwrap();
    let graph = dir.path().join("g.txt");
    ok(&["gen", "--n", "100", "--d", "21", "--out", p(&graph)]);
    let prefix = format!("{}/split-", dir.path().display());
    ok(&["preprocess", p(&graph), &prefix]);
    let header = fs::read_to_string(format!("{prefix}split.txt")).unwrap();
    assert!(header.starts_with("n=100\nd=21\nk=10\nd_prime=1\n"));
    for (name, k) in [("D", 10), ("G1", 1), ("G2", 1), ("G3", 8)] {
        let text = fs::read_to_string(format!("{prefix}{name}.txt")).unwrap();
        assert_eq!(text.lines().next().unwrap(), format!("100 {} directed", 100 * k));
    }
}

#[test]
fn expansion_check_reports_a_witness() {
    let dir = tempfile::tempdir().unwrap();
    let graph = dir.path().join("tri.txt");
    fs::write(&graph, "6 6 undirected\n0 1\n1 2\n2 0\n3 4\n4 5\n5 3\n").unwrap();
    let out = route(&["check-expansion", "--graph", p(&graph), "--beta", "0.5", "--gamma", "0.3", "--max-size", "3"]);
    assert_eq!(out.status.code(), Some(1));
    let report: serde_json::Value = serde_json::from_slice(&out.stdout).unwrap();
    assert_eq!(report["holds"], false);
    assert_eq!(report["witness"], serde_json::json!([0, 1, 2]));
    assert_eq!(report["mode"], "Exhaustive");
}

#[test]
fn spectrum_of_k5() {
    let dir = tempfile::tempdir().unwrap();
    let graph = dir.path().join("k5.txt");
    fs::write(&graph, "5 10 undirected\n0 1\n0 2\n0 3\n0 4\n1 2\n1 3\n1 4\n2 3\n2 4\n3 4\n").unwrap();
    let report: serde_json::Value = serde_json::from_str(&ok(&["spectrum", "--graph", p(&graph)])).unwrap();
    assert!((report["lambda_estimate"].as_f64().unwrap() - 1.0).abs() < 1e-6);
    assert_eq!(report["converged"], true);
}

#[test]
fn strict_profile_rejects_large_gamma() {
    let text = ok(&["profile", "--n", "1000000", "--d", "400", "--preset", "derived", "--beta", "0.01", "--gamma", "0.0005"]);
    assert!(text.lines().any(|l| l == "r=1"));
    let out = route(&["profile", "--n", "1000000", "--d", "400", "--preset", "derived", "--gamma", "0.002"]);
    assert_eq!(out.status.code(), Some(2));
}
