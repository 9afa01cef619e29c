use std::fs;
use std::process::{Command, Output};

fn pcc(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_pcc")).args(args).output().unwrap()
}

fn json(out: &Output) -> serde_json::Value {
    serde_json::from_slice(&out.stdout).unwrap()
}

#[test]
fn detect_karate_scores_and_writes_labels() {
    let dir = tempfile::tempdir().unwrap();
    let labels = dir.path().join("labels.txt");
    let out = pcc(&["detect", "karate", "--method", "pcc", "--out", labels.to_str().unwrap()]);
    assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stderr));
    let report = json(&out);
    assert_eq!(report["score"]["mismatches"], 0);
    assert_eq!(report["score"]["nodes"], 34);
    assert!(report["error_bound"]["err_n"].as_f64().unwrap() > 0.0);
    let text = fs::read_to_string(&labels).unwrap();
    assert_eq!(text.lines().count(), 34);
    assert!(text.lines().all(|l| l.ends_with(" 1") || l.ends_with(" 2")));
}

#[test]
fn detect_without_labels_has_no_score() {
    let dir = tempfile::tempdir().unwrap();
    let edges = dir.path().join("g.txt");
    fs::write(&edges, "a b\nb c\nc a\nd e\ne f\nf d\nc d\n").unwrap();
    let out = pcc(&["detect", edges.to_str().unwrap(), "--method", "npcc", "--k", "2"]);
    assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stderr));
    let report = json(&out);
    assert!(report.get("score").is_none());
    // τ omitted: mean degree 14/6
    assert!((report["tau"].as_f64().unwrap() - 14.0 / 6.0).abs() < 1e-12);
}

#[test]
fn input_errors_exit_with_one() {
    let out = pcc(&["detect", "/nonexistent/graph.txt", "--k", "2"]);
    assert_eq!(out.status.code(), Some(1));
    assert!(String::from_utf8_lossy(&out.stderr).contains("/nonexistent/graph.txt"));
    let out = pcc(&["detect", "karate", "--method", "spectral"]);
    assert_eq!(out.status.code(), Some(1));
    let out = pcc(&["simulate", "--experiment", "1a", "--reps", "0"]);
    assert_eq!(out.status.code(), Some(1));
    assert!(String::from_utf8_lossy(&out.stderr).contains("no repetitions"));
    let out = pcc(&["bogus"]);
    assert_eq!(out.status.code(), Some(1));
}

#[test]
fn print_spec_shows_builtin_parameters() {
    let out = pcc(&["simulate", "--experiment", "2c", "--print-spec"]);
    assert!(out.status.success());
    let spec = json(&out);
    assert_eq!(spec["grid"].as_array().unwrap().len(), 12);
    assert_eq!(spec["n"], 400);
}

#[test]
fn simulate_writes_csv_and_svg() {
    let dir = tempfile::tempdir().unwrap();
    let csv = dir.path().join("out.csv");
    let svg = dir.path().join("out.svg");
    let raw = dir.path().join("raw.csv");
    let args = [
        "simulate", "--experiment", "1a", "--grid", "100,200", "--reps", "3", "--methods", "pcc,npcc",
        "--no-timing", "--out", csv.to_str().unwrap(), "--svg", svg.to_str().unwrap(), "--raw", raw.to_str().unwrap(),
    ];
    assert!(pcc(&args).status.success());
    let first = fs::read(&csv).unwrap();
    assert_eq!(String::from_utf8_lossy(&first).lines().count(), 5);
    assert!(fs::read_to_string(&svg).unwrap().contains("<polyline"));
    assert_eq!(fs::read_to_string(&raw).unwrap().lines().count(), 1 + 2 * 3 * 2);
    assert!(pcc(&args).status.success());
    assert_eq!(fs::read(&csv).unwrap(), first);
}

#[test]
fn sweeps_on_karate() {
    let out = pcc(&["sweep-mk", "karate", "--method", "pcc*", "--grid", "2:20"]);
    assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stderr));
    let text = String::from_utf8(out.stdout).unwrap();
    let rows: Vec<&str> = text.lines().skip(1).collect();
    assert_eq!(rows.len(), 19);
    assert!(rows.iter().all(|r| r.split(',').nth(3) == Some("0")));

    let out = pcc(&["sweep-tau", "karate", "--method", "npcc", "--grid", "0:10"]);
    assert!(out.status.success());
    let text = String::from_utf8(out.stdout).unwrap();
    assert_eq!(text.lines().count(), 1 + 11 + 1);
    assert!(text.lines().last().unwrap().ends_with("true"));
}

#[test]
fn oracle_passes_on_population_inputs() {
    let out = pcc(&["oracle", "--draws", "5"]);
    assert_eq!(out.status.code(), Some(0), "{}", String::from_utf8_lossy(&out.stderr));
    assert_eq!(json(&out).as_array().unwrap().len(), 6);

    let dir = tempfile::tempdir().unwrap();
    let params = dir.path().join("p.json");
    fs::write(
        &params,
        r#"{"n": 40, "K": 2, "P": [0.9, 0.1, 0.1, 0.7], "theta": {"kind": "power", "args": {"base": 0.3, "scale": 0.6, "exponent": 1}},
            "labels": {"kind": "proportions", "args": {"fractions": [1, 1]}}}"#,
    )
    .unwrap();
    let out = pcc(&["oracle", "--params", params.to_str().unwrap()]);
    assert_eq!(out.status.code(), Some(0));
}
