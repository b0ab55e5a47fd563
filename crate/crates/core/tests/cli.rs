use std::process::{Command, Output};

use serde_json::Value;

fn canvar(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_canvar"))
        .args(args)
        .env_remove("CANVAR_PRIME")
        .env_remove("CANVAR_SEED")
        .output()
        .expect("binary runs")
}

fn json(out: &Output) -> Value {
    serde_json::from_slice(&out.stdout).unwrap_or_else(|e| panic!("{e}: {}", String::from_utf8_lossy(&out.stdout)))
}

#[test]
fn decide_reports_normal_for_h() {
    let out = canvar(&["decide", "--type", "2,2,2", "--d", r#"{"alpha":1,"arms":[[1],[1],[1]],"omega":1}"#]);
    assert_eq!(out.status.code(), Some(0));
    let v = json(&out);
    assert_eq!(v["result"]["is_normal"], true);
    assert_eq!(v["config"]["command"], "decide");
    assert_eq!(v["config"]["args"]["type"], "2,2,2");
}

#[test]
fn flat_vector_syntax() {
    let out = canvar(&["classify", "--type", "2,2,2", "--d", "1,1,1,1,1"]);
    assert_eq!(out.status.code(), Some(0));
    let v = json(&out);
    assert_eq!(v["result"]["in_R"], true);
    assert_eq!(v["result"]["in_Rprime"], true);
}

#[test]
fn witness_value_and_not_applicable() {
    let out = canvar(&["witness", "--type", "2,2,3,4"]);
    assert_eq!(out.status.code(), Some(0));
    let v = json(&out);
    assert_eq!(v["result"]["witness"]["value"], 16);
    assert_eq!(v["result"]["witness"]["scale"], 16);
    assert!(v["result"]["lift"]["value"].as_i64().unwrap() > 0);

    let out = canvar(&["witness", "--type", "2,2,2"]);
    assert_eq!(out.status.code(), Some(3));
    assert_eq!(json(&out)["status"], "not_applicable");
}

#[test]
fn verify_lemmas_all_pass() {
    let out = canvar(&["verify-lemmas", "--max", "12"]);
    assert_eq!(out.status.code(), Some(0));
    let v = json(&out);
    assert_eq!(v["result"]["passed"], true);
    assert_eq!(v["result"]["reports"].as_array().unwrap().len(), 6);
}

#[test]
fn certify_emits_chain() {
    let out = canvar(&["certify", "--type", "2,2,2", "--d", "1,1,1,1,1", "--dprime", "1,0,0,0,0"]);
    assert_eq!(out.status.code(), Some(0));
    let v = json(&out);
    assert_eq!(v["result"]["conclusion"], "StrictlyNegative");
    assert_eq!(v["result"]["steps"].as_array().unwrap().len(), 0);

    let out = canvar(&["certify", "--type", "5,5,5", "--d", "0,0,0,0,0,0,0,0,0,0,0,0,0,0", "--dprime", "0,0,0,0,0,0,0,0,0,0,0,0,0,0"]);
    assert_eq!(out.status.code(), Some(3));
}

#[test]
fn usage_errors_exit_1() {
    assert_eq!(canvar(&["decide", "--type", "2,2"]).status.code(), Some(1));
    assert_eq!(canvar(&["decide", "--type", "2,2,2", "--d", "1,2"]).status.code(), Some(1));
    assert_eq!(canvar(&["frobnicate"]).status.code(), Some(1));
    assert_eq!(canvar(&["classify", "--type", "2,2,2", "--d", "1,1,1,1,1", "--format", "csv"]).status.code(), Some(1));
    assert_eq!(canvar(&["--help"]).status.code(), Some(0));
}

#[test]
fn scan_csv_and_json() {
    let out = canvar(&["scan", "--type", "2,2,2", "--bound", "2", "--format", "csv"]);
    assert_eq!(out.status.code(), Some(0));
    let text = String::from_utf8(out.stdout).unwrap();
    let mut lines = text.lines();
    assert!(lines.next().unwrap().starts_with("alpha,"));
    assert!(lines.count() > 1);

    let out = canvar(&["scan", "--type", "4,4,4", "--bound", "2"]);
    let v = json(&out);
    assert_eq!(v["result"]["consistent"], true);
    assert_eq!(v["result"]["ci_failures"], 0);
}

#[test]
fn rep_dimensions() {
    let out = canvar(&["rep", "--type", "2,2,2", "ext2", "simple:omega", "simple:alpha"]);
    assert_eq!(json(&out)["result"]["ext2"], 1);
    let out = canvar(&["rep", "--type", "2,3,4", "dims", "homog:2,3", "homog:2,3"]);
    let v = json(&out);
    assert_eq!(v["result"]["euler"]["hom"], 1);
    assert_eq!(v["result"]["euler"]["ext1"], 1);
    assert_eq!(v["status"], "ok");
    let out = canvar(&["rep", "--type", "2,2,2", "check", "homog:0,1"]);
    assert_eq!(out.status.code(), Some(1));
}

#[test]
fn rep_sampling_is_deterministic() {
    let args = ["rep", "--type", "2,3,3", "--seed", "5", "sample", "--d", "2,2,2,2,2,2,2"];
    let a = canvar(&args);
    let b = canvar(&args);
    assert_eq!(a.status.code(), Some(0));
    assert_eq!(a.stdout, b.stdout);
    let v = json(&a);
    assert_eq!(v["result"]["absent"], false);
    assert_eq!(v["config"]["field"]["seed"], 5);
}

#[test]
fn absent_sample_is_reported() {
    // every arm factors through a 1-dimensional space while d_α = d_ω = 2
    let out = canvar(&["rep", "--type", "2,3,3", "sample", "--d", "2,1,1,2,1,2,2"]);
    assert_eq!(out.status.code(), Some(0));
    let v = json(&out);
    assert_eq!(v["result"]["absent"], true);
    assert!(v["result"]["rep"].is_null());
}

#[test]
fn prime_from_environment() {
    let out = Command::new(env!("CARGO_BIN_EXE_canvar"))
        .args(["rep", "--type", "2,2,2", "euler-test", "--pairs", "20"])
        .env("CANVAR_PRIME", "101")
        .output()
        .unwrap();
    assert_eq!(out.status.code(), Some(0));
    let v = json(&out);
    assert_eq!(v["config"]["field"]["prime"], 101);
    assert_eq!(v["result"]["passed"], true);
}

#[test]
fn threshold_text_output() {
    let out = canvar(&["threshold", "--type", "4,4,4", "--format", "text"]);
    let text = String::from_utf8(out.stdout).unwrap();
    assert!(text.contains("sign: 0"));
    assert!(text.contains(r#"["0","-1/4"]"#));
}
