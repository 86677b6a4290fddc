use std::process::Command;

use serde_json::Value;

fn run(args: &[&str]) -> (i32, String, String) {
    let out = Command::new(env!("CARGO_BIN_EXE_resperm"))
        .args(args)
        .env_remove("RESPERM_JOBS")
        .output()
        .expect("binary runs");
    (
        out.status.code().expect("exit code"),
        String::from_utf8(out.stdout).expect("utf8"),
        String::from_utf8(out.stderr).expect("utf8"),
    )
}

fn json(args: &[&str]) -> Value {
    let (code, out, err) = run(args);
    assert_eq!(code, 0, "{args:?}: {err}");
    serde_json::from_str(out.trim()).expect("json output")
}

fn error_code(args: &[&str]) -> String {
    let (code, out, err) = run(args);
    assert_eq!(code, 1, "{args:?}");
    assert!(out.is_empty());
    let v: Value = serde_json::from_str(err.trim()).expect("json error");
    v["error"].as_str().expect("error code").to_string()
}

#[test]
fn classify_reports_the_empty_cell() {
    let v = json(&["classify", "--p", "13", "--a", "5", "--k", "1", "--n", "3"]);
    assert_eq!(v["report"]["type_iv"], true);
    assert_eq!(v["report"]["empty_cells"], serde_json::json!([[2, 2]]));
    assert_eq!(v["matrix"], serde_json::json!([[1, 1, 2], [1, 1, 2], [2, 2, 0]]));
}

#[test]
fn classify_reports_a_class_permutation() {
    let v = json(&["classify", "--p", "5", "--a", "-2", "--k", "3", "--n", "2"]);
    assert_eq!(v["report"]["type_i"], true);
    assert_eq!(v["report"]["class_permutation"], serde_json::json!([[0, 0], [1, 1]]));
}

#[test]
fn invalid_specs_exit_one() {
    assert_eq!(
        error_code(&["classify", "--p", "13", "--a", "5", "--k", "2", "--n", "3"]),
        "exponent-not-coprime"
    );
    assert_eq!(
        error_code(&["classify", "--p", "12", "--a", "5", "--k", "1", "--n", "3"]),
        "not-odd-prime"
    );
    assert_eq!(error_code(&["classify", "--p", "13"]), "usage");
    assert_eq!(error_code(&["bogus"]), "usage");
}

#[test]
fn critical_families_table() {
    let (code, out, _) = run(&[
        "--format",
        "table",
        "tables",
        "--which",
        "critical-families",
        "--n",
        "4",
    ]);
    assert_eq!(code, 0);
    assert_eq!(out.trim(), "1,2,3, (p-1)/2,(p±1)/3");
}

#[test]
fn ratrep_finds_the_critical_representation() {
    let v = json(&["ratrep", "--c", "6", "--p", "13", "--n", "3"]);
    let c = &v["critical"];
    assert_eq!((c["r"].as_i64(), c["s"].as_i64(), c["t"].as_i64()), (Some(1), Some(2), Some(1)));
}

#[test]
fn certify_guards_small_critical_coefficients() {
    let v = json(&["certify", "--p", "167", "--a", "5", "--k", "1", "--n", "3"]);
    assert_eq!(v["verdict"], "no-type4-guaranteed");
}

#[test]
fn search_emits_json_lines_and_csv() {
    let (code, out, _) = run(&["search", "--n", "2", "--p-min", "2", "--p-max", "13"]);
    assert_eq!(code, 0);
    let rows: Vec<Value> = out.lines().map(|l| serde_json::from_str(l).unwrap()).collect();
    assert!(!rows.is_empty());
    assert!(rows.iter().all(|r| r["n"] == 2 && r["p"].as_u64().unwrap() <= 13));

    let (code, out, _) = run(&[
        "--format", "csv", "search", "--n", "2", "--p-min", "2", "--p-max", "13",
    ]);
    assert_eq!(code, 0);
    let mut lines = out.lines();
    assert_eq!(lines.next(), Some("p,A,k,n,k_mode,witnesses"));
    assert_eq!(lines.count(), rows.len());
}

#[test]
fn search_table_groups_rows() {
    let (code, out, _) = run(&[
        "--format", "table", "search", "--n", "3", "--p-min", "120", "--p-max", "130",
        "--k-mode", "other",
    ]);
    assert_eq!(code, 0);
    assert_eq!(out.trim(), "127 | 45,53 | 71 | (2,2)");
}

#[test]
fn jobs_variable_does_not_change_output() {
    let args = ["search", "--n", "4", "--p-min", "3", "--p-max", "400"];
    let (_, one, _) = run(&args);
    let out = Command::new(env!("CARGO_BIN_EXE_resperm"))
        .args(args)
        .env("RESPERM_JOBS", "4")
        .output()
        .unwrap();
    assert_eq!(String::from_utf8(out.stdout).unwrap(), one);
}

#[test]
fn verify_frontier_suites_pass() {
    for suite in ["frontier-n3", "critical-equivalence"] {
        let v = json(&["verify", "--suite", suite, "--jobs", "4"]);
        assert_eq!(v["passed"], true, "{suite}");
    }
}

#[test]
fn verify_unknown_suite_exits_one() {
    assert_eq!(error_code(&["verify", "--suite", "nosuch"]), "unknown-suite");
}
