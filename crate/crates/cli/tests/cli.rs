use std::process::{Command, Output};

use serde_json::Value;

fn symclass(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_symclass")).args(args).output().expect("binary runs")
}

fn report(out: &Output) -> Value {
    serde_json::from_slice(&out.stdout).expect("stdout is JSON")
}

#[test]
fn bracket_of_opposite_exponential_boosts() {
    let out = symclass(&["bracket", "--a", "G(exp(2*t))", "--b", "G(exp(-2*t))"]);
    assert_eq!(out.status.code(), Some(0));
    assert_eq!(report(&out)["result"]["bracket"], "-2*M(1)");
}

#[test]
fn linear_potential_admits_the_combined_operator() {
    let out = symclass(&["check-symmetry", "--potential", "x", "--op", "D(2*t)+G(3*t^2)+M(t^3)"]);
    assert_eq!(out.status.code(), Some(0));
    let r = report(&out);
    assert_eq!(r["status"], "pass");
    assert_eq!(r["result"]["decision"], "exact");
}

#[test]
fn failed_check_carries_the_residual() {
    let out = symclass(&["check-symmetry", "--potential", "0", "--op", "G(t^2)"]);
    assert_eq!(out.status.code(), Some(1));
    let r = report(&out);
    assert_eq!(r["status"], "fail");
    assert_eq!(r["result"]["residual"], "-x");
}

#[test]
fn tables_verify() {
    let out = symclass(&["verify-tables"]);
    assert_eq!(out.status.code(), Some(0));
    let r = report(&out);
    assert_eq!(r["result"]["cases"].as_array().unwrap().len(), 16);
    assert!(r["result"]["mappings"].as_array().unwrap().iter().all(|m| m["pass"] == true));
}

#[test]
fn output_is_byte_identical_across_runs() {
    for args in [
        &["verify-tables"][..],
        &["classify", "--potential", "-x^2 + i/3"],
        &["check-symmetry", "--potential", "x^2", "--op", "D(exp(4*t))"],
    ] {
        let (a, b) = (symclass(args), symclass(args));
        assert_eq!(a.stdout, b.stdout, "{args:?}");
        assert_eq!(a.status.code(), b.status.code());
    }
}

#[test]
fn keys_are_sorted() {
    let out = symclass(&["classify", "--potential", "x^2 + i*3"]);
    let text = String::from_utf8(out.stdout).unwrap();
    let top: Vec<&str> = text.lines().filter(|l| l.starts_with("  \"")).map(|l| l.trim()).collect();
    let mut sorted = top.clone();
    sorted.sort();
    assert_eq!(top, sorted);
    let r: Value = serde_json::from_str(&text).unwrap();
    for key in ["schema_version", "version", "seed", "status", "command"] {
        assert!(r.get(key).is_some(), "{key}");
    }
}

#[test]
fn classify_reports_case_and_witness() {
    let out = symclass(&["classify", "--potential", "4*x^2 + 12*i"]);
    assert_eq!(out.status.code(), Some(0));
    let r = &report(&out)["result"];
    assert_eq!((r["table"].as_u64(), r["case"].as_u64()), (Some(2), Some(6)));
    assert_eq!(r["params"]["nu"], "6");
    assert_eq!(r["verified"], true);
    assert!(r["witness"]["T"].is_string());
}

#[test]
fn seed_comes_from_the_environment() {
    let out = Command::new(env!("CARGO_BIN_EXE_symclass"))
        .args(["bracket", "--a", "D(1)", "--b", "D(t)"])
        .env("SYMCLASS_SEED", "42")
        .output()
        .unwrap();
    assert_eq!(report(&out)["seed"], 42);
    let bad = Command::new(env!("CARGO_BIN_EXE_symclass"))
        .args(["bracket", "--a", "D(1)", "--b", "D(t)"])
        .env("SYMCLASS_SEED", "0x5EED")
        .output()
        .unwrap();
    assert_eq!(bad.status.code(), Some(2));
}

#[test]
fn usage_errors_exit_with_two() {
    assert_eq!(symclass(&["frobnicate"]).status.code(), Some(2));
    assert_eq!(symclass(&["classify"]).status.code(), Some(2));
    assert_eq!(symclass(&["classify", "--potential", "x^^2"]).status.code(), Some(2));
    assert_eq!(symclass(&["bracket", "--a", "Q(t)", "--b", "D(1)"]).status.code(), Some(2));
    let out = symclass(&["residual-check", "--solution", "soliton", "--grid", "0,1,-10,10,4,4"]);
    assert_eq!(out.status.code(), Some(2));
    assert!(out.stdout.is_empty());
}

#[test]
fn residual_check_on_a_boosted_soliton() {
    let dir = std::env::temp_dir().join(format!("symclass-cli-{}", std::process::id()));
    std::fs::create_dir_all(&dir).unwrap();
    let file = dir.join("boost.json");
    std::fs::write(&file, r#"{"T": "t", "T_inv": "t", "X": "t", "Psi": "t/4"}"#).unwrap();
    let path = file.to_str().unwrap();
    let out = symclass(&["residual-check", "--solution", "soliton", "--transform", path, "--grid", "0,1,-10,10,128,256"]);
    let r = report(&out);
    assert_eq!(r["result"]["path"], "exact");
    assert!(r["result"]["max_residual"].as_f64().unwrap() < 1e-3);

    let t = report(&symclass(&["transform", "--file", path, "--potential", "0"]));
    assert_eq!((t["status"].as_str(), t["result"]["potential"].as_str()), (Some("pass"), Some("0")));
    let reflected = dir.join("reflect.json");
    std::fs::write(&reflected, r#"{"T": "-t", "T_inv": "-t"}"#).unwrap();
    let out = symclass(&["transform", "--file", reflected.to_str().unwrap(), "--potential", "x"]);
    assert_eq!(out.status.code(), Some(1));
    assert_eq!(report(&out)["result"]["valid"], false);
}
