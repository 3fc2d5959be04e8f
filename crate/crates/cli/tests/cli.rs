use std::path::PathBuf;
use std::process::{Command, Output};

fn data(name: &str) -> String {
    PathBuf::from(env!("CARGO_MANIFEST_DIR")).join("tests/data").join(name).display().to_string()
}

fn pzeta(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_pzeta")).args(args).output().expect("run pzeta")
}

fn json(out: &Output) -> serde_json::Value {
    serde_json::from_slice(&out.stdout).expect("JSON on stdout")
}

fn scratch(name: &str) -> PathBuf {
    let dir = std::env::temp_dir().join(format!("pzeta-cli-{}", std::process::id()));
    std::fs::create_dir_all(&dir).unwrap();
    dir.join(name)
}

#[test]
fn analyze_is_byte_stable() {
    let args = ["analyze", &data("elliptic_f3.var"), "--kmax", "8"];
    let a = pzeta(&args);
    let b = pzeta(&args);
    assert_eq!(a.status.code(), Some(0), "{}", String::from_utf8_lossy(&a.stderr));
    assert_eq!(a.stdout, b.stdout);
    let v = json(&a);
    assert_eq!(v["schema_version"], "1");
    assert_eq!(v["recurrence"]["order"], 3);
    assert_eq!(v["verdicts"]["rh"], "pass");
    assert_eq!(v["verdicts"]["prediction"], "match");
    assert!(v.get("timings").is_none());
}

#[test]
fn elliptic_counts_are_affine_point_counts() {
    let out = pzeta(&["count", &data("elliptic_f3.var"), "--kmax", "4", "--oracle"]);
    assert_eq!(out.status.code(), Some(0));
    let v = json(&out);
    let counts: Vec<&str> = v["counts"].as_array().unwrap().iter().map(|c| c["value"].as_str().unwrap()).collect();
    assert_eq!(counts, ["6", "6", "27", "90"]);
}

#[test]
fn timings_only_on_request() {
    let out = pzeta(&["analyze", &data("conic_f2.var"), "--kmax", "4", "--timings"]);
    assert!(json(&out).get("timings").is_some());
}

#[test]
fn parse_errors_exit_with_one_and_a_location() {
    let path = scratch("bad.var");
    std::fs::write(&path, "p = 2\nvars = x1 x2\neq x1^^2 + x2\n").unwrap();
    let out = pzeta(&["count", path.to_str().unwrap()]);
    assert_eq!(out.status.code(), Some(1));
    let err = String::from_utf8_lossy(&out.stderr);
    assert!(err.contains("line 3"), "{err}");
    assert!(out.stdout.is_empty());
}

#[test]
fn wrong_d_length_is_rejected() {
    let out = pzeta(&["count", &data("conic_f2.var"), "--d", "1,2,3"]);
    assert_eq!(out.status.code(), Some(1));
}

#[test]
fn budget_exhaustion_gives_partial_report_and_exit_two() {
    let out = pzeta(&["analyze", &data("surface_f5.var"), "--d", "2,2,1", "--kmax", "2", "--budget", "10000"]);
    assert_eq!(out.status.code(), Some(2));
    let v = json(&out);
    assert_eq!(v["partial"], true);
    assert_eq!(v["counts"][0]["value"], "141");
    assert!(v["budget_error"].as_str().unwrap().contains("budget"));

    let out = pzeta(&["count", &data("surface_f5.var"), "--d", "2,2,1", "--kmax", "2", "--budget", "10000"]);
    assert_eq!(out.status.code(), Some(2));
}

#[test]
fn out_flag_writes_the_report() {
    let path = scratch("report.json");
    let out = pzeta(&["count", &data("conic_f2.var"), "--d", "2,3", "--kmax", "3", "--out", path.to_str().unwrap()]);
    assert_eq!(out.status.code(), Some(0));
    assert!(out.stdout.is_empty());
    let v: serde_json::Value = serde_json::from_str(&std::fs::read_to_string(&path).unwrap()).unwrap();
    assert_eq!(v["command"], "count");
    assert_eq!(v["counts"].as_array().unwrap().len(), 3);
}

#[test]
fn faltings_and_axkatz_subcommands() {
    let out = pzeta(&["faltings-verify", &data("conic_f2.var"), "--d", "2,3"]);
    assert_eq!(out.status.code(), Some(0), "{}", String::from_utf8_lossy(&out.stderr));
    let out = pzeta(&["axkatz", &data("surface_f5.var"), "--d", "2,2,1", "--kmax", "1"]);
    assert_eq!(out.status.code(), Some(0));
}

#[test]
fn identity_check_passes() {
    let out = pzeta(&["identity-check", "--trials", "50", "--matrices", "10"]);
    assert_eq!(out.status.code(), Some(0));
    let v = json(&out);
    assert_eq!(v["pass"], true);
    assert_eq!(v["sign_demo"]["printed_sign"], "-9");
}

#[test]
fn search_on_dividing_chains_logs_nothing() {
    let out = pzeta(&["search", "--trials", "4", "--d", "1,2", "--kmax", "6"]);
    assert_eq!(out.status.code(), Some(0), "{}", String::from_utf8_lossy(&out.stderr));
    let v = json(&out);
    assert!(v["events"].as_array().unwrap().is_empty());
    assert!(v["inconsistencies"].as_array().unwrap().is_empty());
}

#[test]
fn search_with_empty_grid_is_empty() {
    let out = pzeta(&["search", "--primes", ""]);
    assert_eq!(out.status.code(), Some(0));
    let v = json(&out);
    assert_eq!(v["analyzed"], 0);
    assert!(v["events"].as_array().unwrap().is_empty());
}

#[test]
fn reorder_flag_changes_cost_not_counts() {
    let base = ["count", &data("surface_f5.var"), "--d", "2,2,1", "--kmax", "2"];
    let plain = json(&pzeta(&base));
    let sorted = json(&pzeta(&[&base[..], &["--reorder"]].concat()));
    for k in 0..2 {
        assert_eq!(plain["counts"][k]["value"], sorted["counts"][k]["value"]);
    }
    assert_ne!(plain["counts"][1]["nodes_bound"], sorted["counts"][1]["nodes_bound"]);
}
