use std::process::{Command, Output};

use serde_json::Value;

fn commdist(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_commdist")).args(args).output().expect("binary runs")
}

fn report(args: &[&str]) -> Value {
    let out = commdist(args);
    assert!(out.status.success(), "{args:?}: {}", String::from_utf8_lossy(&out.stderr));
    serde_json::from_slice(&out.stdout).expect("stdout is json")
}

#[test]
fn distance_example_from_bundled_names() {
    let v = report(&["distance", "--field", "qq", "--a", "ex25_A.json", "--b", "ex25_B.json"]);
    assert_eq!(v["kind"], "exact");
    assert_eq!(v["value"], 2);
    assert_eq!(v["config"]["command"], "distance");
    assert_eq!(v["config"]["field"], "qq");
}

#[test]
fn derogatory_reports_true_for_the_4x4_example() {
    let v = report(&["derogatory", "--field", "qq", "--a", "ex46_A"]);
    assert_eq!(v["derogatory"], true);
}

#[test]
fn matrix_file_and_field_inference() {
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("a.json");
    std::fs::write(&path, r#"{"field": "gf(3)", "rows": [[1,1],[0,1]]}"#).unwrap();
    let v = report(&["centralizer", "--a", path.to_str().unwrap()]);
    assert_eq!(v["dimension"], 2);
    assert_eq!(v["config"]["field"], "gf(3)");
}

#[test]
fn rational_fixture_reduces_into_a_prime_field() {
    let v = report(&["distance", "--field", "gf(3)", "--a", "ex410_A", "--b", "ex410_B"]);
    assert_eq!(v["kind"], "exact");
    assert_eq!(v["value"], 4);
    let v = report(&["distance", "--field", "gf(9):1,0,1", "--a", "ex410_A", "--b", "ex410_B"]);
    assert_eq!(v["value"], 3);
}

#[test]
fn out_file_matches_stdout() {
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("r.json");
    let args = ["dist2", "--field", "gf(7)", "--a", "ex46_A", "--b", "ex46_B"];
    let stdout = commdist(&args).stdout;
    let mut with_out = args.to_vec();
    with_out.extend(["--out", path.to_str().unwrap()]);
    let out = commdist(&with_out);
    assert!(out.status.success());
    assert!(out.stdout.is_empty());
    let written: Value = serde_json::from_str(&std::fs::read_to_string(&path).unwrap()).unwrap();
    let printed: Value = serde_json::from_slice(&stdout).unwrap();
    assert_eq!(written["dist_le_2"], false);
    assert_eq!(written["rank"], printed["rank"]);
}

#[test]
fn replay_is_byte_identical() {
    let args = ["dist2", "--field", "gf(5)", "--a", "[[1,2,0],[0,1,0],[0,0,3]]", "--b", "[[0,0,1],[1,0,0],[0,1,0]]", "--minors", "--samples", "40", "--seed", "9"];
    assert_eq!(commdist(&args).stdout, commdist(&args).stdout);
}

#[test]
fn certificate_round_trip() {
    let dir = tempfile::tempdir().unwrap();
    let found = report(&["pc-search", "--field", "gf(9):1,0,1", "--a", "ex46_A", "--b", "ex46_B"]);
    assert_eq!(found["status"], "found", "{found}");
    let path = dir.path().join("cert.json");
    std::fs::write(&path, found["certificate"].to_string()).unwrap();
    let args = ["pc-verify", "--field", "gf(9):1,0,1", "--a", "ex46_A", "--b", "ex46_B", "--cert", path.to_str().unwrap()];
    assert_eq!(report(&args)["valid"], true);
}

#[test]
fn zi_witness_mode() {
    let args = ["zi", "--field", "gf(2)", "--a", "[[1,1,0],[0,1,0],[0,0,0]]", "--b", "[[1,0,0],[1,1,0],[0,0,0]]", "--i", "1"];
    let enumerated = report(&args);
    assert_eq!(enumerated["member"], true);
    let mut with_p = args.to_vec();
    with_p.extend(["--p", "[[0,0,0],[0,0,0],[0,0,1]]"]);
    assert_eq!(report(&with_p)["member"], true);
}

#[test]
fn graph_commands() {
    let v = report(&["components", "--field", "gf(2)", "--n", "2"]);
    assert_eq!(v["count"], 7);
    let v = report(&["diameter", "--field", "gf(2)", "--n", "2"]);
    assert_eq!(v["diameter"], 1);
    let v = report(&["bfs", "--field", "gf(2)", "--a", "[[1,1],[0,1]]", "--b", "[[1,0],[1,1]]"]);
    assert_eq!(v["outcome"], "infinite", "{v}");
}

#[test]
fn census_exhaustive_and_sampled() {
    let v = report(&["census", "--field", "gf(2)", "--n", "2", "--quantity", "commuting"]);
    assert_eq!(v["value"], 88);
    let v = report(&["census", "--field", "gf(2)", "--n", "3", "--quantity", "dist2", "--samples", "200", "--seed", "1"]);
    assert_eq!(v["mode"], "sampled", "{v}");
    assert_eq!(v["value"]["samples"], 200);
}

#[test]
fn exit_codes() {
    let cap = commdist(&["bfs", "--field", "gf(2)", "--a", "[[0,1,0],[0,0,1],[1,0,0]]", "--cap", "10"]);
    assert_eq!(cap.status.code(), Some(2));
    let bad_field = commdist(&["distance", "--field", "gf(6)", "--a", "[[1]]", "--b", "[[1]]"]);
    assert_eq!(bad_field.status.code(), Some(1));
    let no_sub = commdist(&["frobnicate"]);
    assert_eq!(no_sub.status.code(), Some(1));
    assert!(String::from_utf8_lossy(&no_sub.stderr).contains("distance"));
    let missing = commdist(&["distance", "--field", "qq", "--a", "ex25_A"]);
    assert_eq!(missing.status.code(), Some(1));
    let mismatch = commdist(&["centralizer", "--field", "gf(3)", "--a", "ex410_C"]);
    assert_eq!(mismatch.status.code(), Some(1));
}

#[test]
fn table_format() {
    let out = commdist(&["derogatory", "--field", "qq", "--a", "ex46_A", "--format", "table"]);
    let text = String::from_utf8(out.stdout).unwrap();
    assert!(text.lines().any(|l| l.starts_with("derogatory") && l.ends_with("true")), "{text}");
}

#[test]
fn verify_paper_passes() {
    let out = commdist(&["verify-paper", "--format", "json"]);
    let v: Value = serde_json::from_slice(&out.stdout).unwrap();
    assert!(out.status.success(), "{v}");
    assert_eq!(v["passed"], v["total"]);
}
