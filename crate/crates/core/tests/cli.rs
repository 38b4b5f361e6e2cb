use std::process::Command;

fn goi(args: &[&str]) -> std::process::Output {
    Command::new(env!("CARGO_BIN_EXE_goi")).args(args).output().expect("binary runs")
}

#[test]
fn reduce_identity_application_gives_two_records() {
    let out = goi(&["reduce", "(\\x.x) (\\y.y)", "--calculus", "lcf"]);
    assert!(out.status.success());
    let text = String::from_utf8(out.stdout).unwrap();
    let records: Vec<serde_json::Value> = text.lines().map(|l| serde_json::from_str(l).unwrap()).collect();
    assert_eq!(records.len(), 2);
    assert_eq!(records[0]["rule"], "Beta");
    assert_eq!(records[1]["rule"], "Var");
    assert_eq!(records[1]["step"], 2);
}

#[test]
fn check_confluence_exits_zero_and_writes_a_report() {
    let dir = tempfile::tempdir().unwrap();
    let d = dir.path().to_str().unwrap();
    let out = goi(&["check", "confluence", "--calculus", "lca", "--out", d]);
    assert_eq!(out.status.code(), Some(0), "{}", String::from_utf8_lossy(&out.stderr));
    let report: serde_json::Value =
        serde_json::from_str(&std::fs::read_to_string(dir.path().join("confluence-lca.json")).unwrap()).unwrap();
    assert_eq!(report["failures"].as_array().unwrap().len(), 0);
}

#[test]
fn net_dot_output_is_deterministic() {
    let args = ["net", "(\\x.x x) (\\y.y)", "--translation", "cbn", "--format", "dot"];
    let a = goi(&args);
    let b = goi(&args);
    assert!(a.status.success());
    assert_eq!(a.stdout, b.stdout);
    let dot = String::from_utf8(a.stdout).unwrap();
    assert!(dot.starts_with("digraph"));
    assert_eq!(dot.matches('{').count(), dot.matches('}').count());
    assert!(dot.contains("cluster_"));
}

#[test]
fn bad_input_is_reported_as_json() {
    let out = goi(&["reduce", "(\\x."]);
    assert_eq!(out.status.code(), Some(2));
    let err: serde_json::Value = serde_json::from_str(String::from_utf8_lossy(&out.stderr).trim()).unwrap();
    assert!(err["error"].is_string());
}

#[test]
fn env_overrides_flags() {
    let out = Command::new(env!("CARGO_BIN_EXE_goi"))
        .args(["reduce", "(\\x.x) (\\y.y)"])
        .env("GOI_CALCULUS", "lca")
        .output()
        .unwrap();
    let first: serde_json::Value =
        serde_json::from_str(String::from_utf8(out.stdout).unwrap().lines().next().unwrap()).unwrap();
    assert_eq!(first["calculus"], "lca");
}

#[test]
fn failing_check_exits_one() {
    // Invariance at a tiny bound is cut short on this term and the sets differ.
    let out = goi(&["check", "invariance", "--corpus-max-size", "1", "--term", "(\\x.x x) (\\x.x)", "--max-steps", "6"]);
    assert_eq!(out.status.code(), Some(1));
}
