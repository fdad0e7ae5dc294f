use std::path::PathBuf;
use std::process::{Command, Output};

use serde_json::Value;

fn fixture(name: &str) -> String {
    PathBuf::from(env!("CARGO_MANIFEST_DIR"))
        .join("tests/fixtures")
        .join(name)
        .display()
        .to_string()
}

fn run(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_biform")).args(args).output().expect("binary runs")
}

fn json(out: &Output) -> Value {
    serde_json::from_slice(&out.stdout).unwrap_or_else(|e| {
        panic!("{e}: {}", String::from_utf8_lossy(&out.stdout));
    })
}

fn profiles(v: &Value, key: &str) -> Vec<Vec<String>> {
    v[key]
        .as_array()
        .unwrap()
        .iter()
        .map(|e| serde_json::from_value(e["profile"].clone()).unwrap())
        .collect()
}

fn csv_column(out: &Output, name: &str) -> Vec<String> {
    let text = String::from_utf8(out.stdout.clone()).unwrap();
    let mut reader = csv::Reader::from_reader(text.as_bytes());
    let k = reader.headers().unwrap().iter().position(|h| h == name).expect("column present");
    reader.records().map(|r| r.unwrap()[k].to_string()).collect()
}

fn numbers(col: &[String]) -> Vec<f64> {
    col.iter().map(|s| s.parse().unwrap()).collect()
}

#[test]
fn nash_on_the_herder_table() {
    let out = run(&["nash", "--game", &fixture("table1.json")]);
    assert_eq!(out.status.code(), Some(0));
    let v = json(&out);
    assert_eq!(profiles(&v, "equilibria"), vec![vec!["NC", "NC"]]);
    assert_eq!(v["equilibria"][0]["payoffs"], serde_json::json!([5.0, 5.0]));
}

#[test]
fn constant_game_has_every_profile() {
    let out = run(&["nash", "--game", &fixture("constant.json")]);
    assert_eq!(out.status.code(), Some(0));
    assert_eq!(profiles(&json(&out), "equilibria").len(), 4);
}

#[test]
fn matching_pennies_exits_with_two() {
    let out = run(&["nash", "--game", &fixture("pennies.json")]);
    assert_eq!(out.status.code(), Some(2));
    assert_eq!(json(&out)["equilibria"], serde_json::json!([]));
}

#[test]
fn biform_rules() {
    let game = fixture("table1.json");
    let equal = json(&run(&["biform", "--game", &game, "--rule", "equal"]));
    assert_eq!(profiles(&equal, "solutions"), vec![vec!["C", "C"]]);
    assert_eq!(equal["solutions"][0]["payoffs"], serde_json::json!([10.0, 10.0]));
    let shap = json(&run(&["solve", "--game", &game, "--rule", "shapley"]));
    assert_eq!(profiles(&shap, "solutions"), vec![vec!["NC", "NC"]]);
    assert_eq!(shap["classification"]["egalitarian"]["holds"], false);
    let restricted = json(&run(&["biform", "--game", &game, "--rule", "equal", "--restrict", &fixture("cc_only.json")]));
    assert_eq!(profiles(&restricted, "solutions"), vec![vec!["C", "C"]]);
    assert_eq!(restricted["restricted"], true);
}

#[test]
fn shapley_of_a_table_file() {
    let v = json(&run(&["shapley", "--table", &fixture("table1_table.json")]));
    assert_eq!(v["shapley"], serde_json::json!([0.0, 12.0]));
    let per_profile = run(&["shapley", "--game", &fixture("table1.json"), "--profile", "C,C"]);
    assert_eq!(per_profile.status.code(), Some(0));
    assert!(String::from_utf8_lossy(&per_profile.stdout).contains("10"));
}

#[test]
fn bertrand_sweep_moves_with_mu() {
    let out = run(&["sweep", "bertrand", "--params", &fixture("bertrand_mu.json")]);
    assert_eq!(out.status.code(), Some(0));
    let psi = numbers(&csv_column(&out, "psi"));
    assert_eq!(psi.len(), 3);
    assert!(psi.windows(2).all(|w| w[1] < w[0]), "{psi:?}");
    assert!(csv_column(&out, "status").iter().all(|s| s == "ok"));
}

#[test]
fn supply_chain_sweep_value_decreases() {
    let out = run(&["sweep", "supplychain", "--params", &fixture("supply_mu.json")]);
    let v = numbers(&csv_column(&out, "v_star"));
    assert!(v.windows(2).all(|w| w[1] < w[0]), "{v:?}");
}

#[test]
fn empty_grid_prints_only_the_header() {
    let dir = tempfile::tempdir().unwrap();
    let grid = dir.path().join("grid.json");
    std::fs::write(&grid, "[]").unwrap();
    let out = run(&["sweep", "commons", "--params", grid.to_str().unwrap()]);
    assert_eq!(out.status.code(), Some(0));
    let text = String::from_utf8(out.stdout).unwrap();
    assert_eq!(text.lines().count(), 1);
    assert!(text.starts_with("M,c0,"));
}

#[test]
fn case_reports_and_json_format() {
    let out = run(&["case", "bertrand"]);
    assert_eq!(csv_column(&out, "theta_star"), vec!["0.8"]);
    let out = run(&["case", "supply-chain", "--format", "json"]);
    let rows = json(&out);
    let v = rows[0]["v_star"].as_f64().unwrap();
    assert!((v - 64.0 / 3.0).abs() < 1e-12);
}

#[test]
fn invalid_case_parameters_are_input_errors() {
    let dir = tempfile::tempdir().unwrap();
    let params = dir.path().join("p.json");
    std::fs::write(&params, r#"{"mu": -1}"#).unwrap();
    let out = run(&["case", "bertrand", "--params", params.to_str().unwrap()]);
    assert_eq!(out.status.code(), Some(1));
}

#[test]
fn verify_batches() {
    let out = run(&["verify", "--prop", "marginalist", "-n", "200", "--seed", "7"]);
    assert_eq!(out.status.code(), Some(0));
    assert_eq!(json(&out)["passed"], 200);
    let out = run(&["verify", "--prop", "egalitarian", "-n", "200", "--seed", "7"]);
    assert_eq!(json(&out)["holds"], true);
    let out = run(&["verify", "--prop", "egalitarian", "-n", "0"]);
    assert_eq!(out.status.code(), Some(0));
    assert!(json(&out)["warnings"][0].as_str().unwrap().contains("vacuous"));
}

#[test]
fn malformed_json_names_the_line() {
    let out = run(&["nash", "--game", &fixture("malformed.json")]);
    assert_eq!(out.status.code(), Some(1));
    let err = String::from_utf8_lossy(&out.stderr);
    assert!(err.contains("line 4"), "{err}");
}

#[test]
fn unknown_flags_and_missing_files() {
    assert_eq!(run(&["nash", "--bogus"]).status.code(), Some(1));
    assert_eq!(run(&["nash", "--game", "/nonexistent.json"]).status.code(), Some(1));
    assert_eq!(run(&["verify", "--prop", "other"]).status.code(), Some(1));
    assert_eq!(run(&["--help"]).status.code(), Some(0));
}

#[test]
fn out_flag_writes_a_file() {
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("r.csv");
    let out = run(&["case", "commons", "--out", path.to_str().unwrap()]);
    assert_eq!(out.status.code(), Some(0));
    assert!(out.stdout.is_empty());
    let text = std::fs::read_to_string(path).unwrap();
    assert!(text.lines().nth(1).unwrap().contains(",ok,"));
}
