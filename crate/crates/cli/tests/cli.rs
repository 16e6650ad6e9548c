//! End-to-end tests of the command-line interface: report shapes, exit
//! codes, and byte-identical reruns.

use std::process::Command;

fn laps() -> Command {
    Command::new(env!("CARGO_BIN_EXE_laps"))
}

#[test]
fn classify_trivial_character_is_case_a() {
    let out = laps()
        .args([
            "classify",
            "--p",
            "5",
            "--chi",
            "m=0;cond=0;unit=;at_p=1",
        ])
        .output()
        .unwrap();
    assert!(out.status.success());
    let v: serde_json::Value = serde_json::from_slice(&out.stdout).unwrap();
    assert_eq!(v["verdict"], "reducible");
    assert_eq!(v["case"], "a");
    assert_eq!(v["topological_length"], "3");
    assert_eq!(v["constituents"].as_array().unwrap().len(), 3);
}

#[test]
fn classify_squared_absolute_twist_is_case_b() {
    let out = laps()
        .args([
            "classify",
            "--p",
            "5",
            "--chi",
            "m=1;cond=0;unit=;at_p=p^-2",
        ])
        .output()
        .unwrap();
    assert!(out.status.success());
    let v: serde_json::Value = serde_json::from_slice(&out.stdout).unwrap();
    assert_eq!(v["case"], "b");
    assert_eq!(v["topological_length"], "3");
}

#[test]
fn classify_negative_exponent_is_simple() {
    let out = laps()
        .args([
            "classify",
            "--p",
            "5",
            "--chi",
            "m=-1;cond=0;unit=;at_p=1",
        ])
        .output()
        .unwrap();
    assert!(out.status.success());
    let v: serde_json::Value = serde_json::from_slice(&out.stdout).unwrap();
    assert_eq!(v["verdict"], "simple");
    assert_eq!(v["c_of_chi"], "0:100000000000000000000000000000:30");
}

#[test]
fn bad_character_spec_is_a_usage_error() {
    let out = laps()
        .args(["classify", "--p", "5", "--chi", "nonsense"])
        .output()
        .unwrap();
    assert_eq!(out.status.code(), Some(2));
    // unknown flags are usage errors as well (clap uses exit code 2)
    let out = laps().args(["suite", "--bogus"]).output().unwrap();
    assert_eq!(out.status.code(), Some(2));
}

#[test]
fn empty_suite_selection_trivially_passes() {
    let out = laps()
        .args(["suite", "--p", "5", "--suite", "", "--format", "text"])
        .output()
        .unwrap();
    assert_eq!(out.status.code(), Some(0));
    let text = String::from_utf8(out.stdout).unwrap();
    assert!(text.contains("ALL PASS: 0 checks"));
}

#[test]
fn cheap_suites_pass_and_rerun_byte_identically() {
    let args = [
        "suite",
        "--p",
        "5",
        "--suite",
        "finite-identities,generation",
        "--seed",
        "777",
    ];
    let a = laps().args(args).output().unwrap();
    assert_eq!(a.status.code(), Some(0), "{}", String::from_utf8_lossy(&a.stderr));
    let b = laps().args(args).output().unwrap();
    assert_eq!(a.stdout, b.stdout);
    let v: serde_json::Value = serde_json::from_slice(&a.stdout).unwrap();
    assert_eq!(v["passed"], true);
    assert_eq!(v["config"]["seed"], 777);
}

#[test]
fn negative_control_fails_with_the_named_check() {
    let out = laps()
        .args([
            "suite",
            "--p",
            "5",
            "--suite",
            "equivariance",
            "--negative-control",
            "intertwine-sign",
        ])
        .output()
        .unwrap();
    assert_eq!(out.status.code(), Some(1));
    let v: serde_json::Value = serde_json::from_slice(&out.stdout).unwrap();
    let failed: Vec<&str> = v["checks"]
        .as_array()
        .unwrap()
        .iter()
        .filter(|c| c["passed"] == false)
        .map(|c| c["name"].as_str().unwrap())
        .collect();
    assert!(!failed.is_empty());
    assert!(failed.iter().all(|n| n.starts_with("intertwiner-equivariance")));
}

#[test]
fn report_writes_to_file() {
    let dir = std::env::temp_dir().join("laps-cli-test");
    std::fs::create_dir_all(&dir).unwrap();
    let path = dir.join("report.json");
    let out = laps()
        .args([
            "suite",
            "--p",
            "5",
            "--suite",
            "generation",
            "--out",
            path.to_str().unwrap(),
        ])
        .output()
        .unwrap();
    assert_eq!(out.status.code(), Some(0));
    let text = std::fs::read_to_string(&path).unwrap();
    let v: serde_json::Value = serde_json::from_str(&text).unwrap();
    assert_eq!(v["passed"], true);
}
