//! End-to-end runs of the binary: report contents, exit codes, file input,
//! and byte-for-byte determinism of the JSON reports.

use std::process::{Command, Output};

fn run(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_orbivert"))
        .args(args)
        .output()
        .expect("binary runs")
}

fn run_with_threads(args: &[&str], threads: &str) -> Output {
    Command::new(env!("CARGO_BIN_EXE_orbivert"))
        .args(args)
        .env("ORBIVERT_THREADS", threads)
        .output()
        .expect("binary runs")
}

fn stdout_json(out: &Output) -> serde_json::Value {
    assert!(
        out.status.success(),
        "exit {:?}, stderr: {}",
        out.status.code(),
        String::from_utf8_lossy(&out.stderr)
    );
    serde_json::from_slice(&out.stdout).expect("stdout is one JSON document")
}

#[test]
fn info_reports_the_builtin() {
    let v = stdout_json(&run(&["info", "--lattice", "e8", "--json"]));
    assert_eq!(v["rank"], 8);
    assert_eq!(v["det"], "1");
    assert_eq!(v["unimodular"], true);
}

#[test]
fn twist_reports_the_sign_involution() {
    let v = stdout_json(&run(&[
        "twist",
        "--lattice",
        "e8",
        "--aut",
        "neg-identity",
        "--json",
    ]));
    assert_eq!(v["rho"], "1/2");
    assert_eq!(v["verdict"], "conjecture_holds");
    assert_eq!(v["g_order"], 2);
}

#[test]
fn fusion_prints_the_standard_model() {
    let v = stdout_json(&run(&["fusion", "--json"]));
    assert_eq!(v["verlinde_ok"], true);
    assert_eq!(v["s_matrix"]["rows"][0], serde_json::json!(["1/2", "1/2", "1/2", "1/2"]));
    assert_eq!(v["qdim_positive_form"], serde_json::json!(["1", "1", "1", "1"]));
    assert_eq!(v["qdim_degenerate_form"], serde_json::json!(["1", "0", "1", "0"]));

    let text = run(&["fusion"]);
    let body = String::from_utf8(text.stdout).unwrap();
    assert!(body.contains("1/2 1/2 1/2 1/2"));
    assert!(body.contains("verlinde_ok true"));
}

#[test]
fn fusion_extrapolates_higher_orders() {
    let v = stdout_json(&run(&["fusion", "--order", "3", "--json"]));
    assert_eq!(v["verlinde_ok"], true);
    assert_eq!(v["extrapolation"], true);
}

#[test]
fn unknown_lattice_is_a_validation_error() {
    let out = run(&["info", "--lattice", "leech"]);
    assert_eq!(out.status.code(), Some(1));
    assert!(String::from_utf8_lossy(&out.stderr).contains("error"));
}

#[test]
fn tripped_tail_guard_is_a_numeric_error() {
    let out = run(&[
        "scheck",
        "--lattice",
        "e8",
        "--aut",
        "neg-identity",
        "--trunc",
        "2",
        "--points",
        "0.05",
    ]);
    assert_eq!(out.status.code(), Some(2));
}

#[test]
fn file_input_is_validated_like_builtins() {
    let path = std::env::temp_dir().join("orbivert-cli-scaled-line.toml");
    std::fs::write(
        &path,
        "name = \"scaled-line\"\ngram = [[2]]\nautomorphism = [[-1]]\n",
    )
    .unwrap();
    let path = path.to_str().unwrap();

    let v = stdout_json(&run(&["info", "--lattice", path, "--json"]));
    assert_eq!(v["rank"], 1);
    assert_eq!(v["det"], "2");
    assert_eq!(v["unimodular"], false);

    let v = stdout_json(&run(&["aut", "--lattice", path, "--json"]));
    assert_eq!(v["order"], 2);
    assert_eq!(v["frame"], serde_json::json!({"1": -1, "2": 1}));

    // The weight formula needs a self-dual lattice, so this is rejected.
    let out = run(&["twist", "--lattice", path]);
    assert_eq!(out.status.code(), Some(1));
}

#[test]
fn positivity_covers_the_catalog() {
    let v = stdout_json(&run(&["positivity", "--json"]));
    assert_eq!(v["violated"], false);
    assert_eq!(v["reports"].as_array().unwrap().len(), 7);
    for rep in v["reports"].as_array().unwrap() {
        assert_ne!(rep["verdict"], "conjecture_violated");
    }
}

#[test]
fn perm_agrees_with_the_lattice_route() {
    let v = stdout_json(&run(&[
        "perm",
        "--central-charge",
        "8",
        "--shape",
        "2:1",
        "--json",
    ]));
    assert_eq!(v["rho"], "1/2");
    assert_eq!(v["cusp_pole"], true);

    let out = run(&["perm", "--central-charge", "8", "--shape", "2:1", "--tensor-k", "3"]);
    assert_eq!(out.status.code(), Some(1));
}

#[test]
fn suite_runs_a_single_criterion() {
    let v = stdout_json(&run(&["suite", "--only", "1", "--json"]));
    assert_eq!(v["all_passed"], true);
    assert_eq!(v["criteria"][0]["id"], 1);
    assert_eq!(v["criteria"][0]["passed"], true);

    let out = run(&["suite", "--only", "42"]);
    assert_eq!(out.status.code(), Some(1));
}

#[test]
fn reports_are_deterministic() {
    let args = ["twist", "--lattice", "e8", "--aut", "neg-identity", "--json"];
    assert_eq!(run(&args).stdout, run(&args).stdout);

    let args = [
        "scheck",
        "--lattice",
        "e8",
        "--aut",
        "neg-identity",
        "--trunc",
        "8",
        "--points",
        "0.9,1.1",
        "--json",
    ];
    let one = run_with_threads(&args, "1");
    let two = run_with_threads(&args, "2");
    assert!(one.status.success() && two.status.success());
    assert_eq!(one.stdout, two.stdout);
}

#[test]
fn char_emits_exact_coefficients() {
    let v = stdout_json(&run(&[
        "char",
        "--lattice",
        "e8",
        "--aut",
        "neg-identity",
        "--trunc",
        "4",
        "--json",
    ]));
    assert_eq!(v["kind"], "id_g");
    assert_eq!(v["series"]["mode"], "exact");
    let terms = v["series"]["terms"].as_array().unwrap();
    assert_eq!(terms[0], serde_json::json!(["-1/3", "1"]));
    assert_eq!(terms[1], serde_json::json!(["2/3", "-8"]));
    assert_eq!(terms[2], serde_json::json!(["5/3", "28"]));
}
