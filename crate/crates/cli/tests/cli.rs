use std::process::{Command, Output};

use serde_json::Value;

fn immsnap(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_immsnap")).args(args).env_remove("IMMSNAP_MAX_SIMPLICES").output().expect("binary runs")
}

fn stdout(out: &Output) -> String {
    String::from_utf8(out.stdout.clone()).unwrap()
}

fn json(out: &Output) -> Value {
    serde_json::from_slice(&out.stdout).expect("stdout is JSON")
}

#[test]
fn facet_count() {
    let out = immsnap(&["facets", "-r", "1,1,1", "--count"]);
    assert!(out.status.success());
    assert_eq!(stdout(&out).trim(), "13");
    let out = immsnap(&["facets", "-r", "1,1"]);
    assert_eq!(json(&out).as_array().unwrap().len(), 3);
}

#[test]
fn verify_reports_euler() {
    let out = immsnap(&["verify", "-r", "2,1,1", "--checks", "pseudomanifold,euler"]);
    assert_eq!(out.status.code(), Some(0));
    let doc = json(&out);
    assert_eq!(doc["passed"], Value::Bool(true));
    assert_eq!(doc["checks"][1]["details"]["euler"], 1);
}

#[test]
fn failing_suite_exits_one_with_report() {
    let out = immsnap(&["verify", "-r", "1,1,1", "--checks", "strata-intersections"]);
    assert_eq!(out.status.code(), Some(1));
    assert_eq!(json(&out)["passed"], Value::Bool(false));
}

#[test]
fn intersection_of_first_layer_strata() {
    let out = immsnap(&["strata", "-r", "2,1,1", "--intersect", "{0}", "{1}"]);
    assert!(out.status.success());
    assert_eq!(stdout(&out).trim(), "Z_{{0,1}}");
    let out = immsnap(&["strata", "-r", "2,1,1", "--intersect", "{0,1}", "{0}", "{2}"]);
    assert_eq!(stdout(&out).trim(), "Z_{{0,1,2}}");
}

#[test]
fn exit_codes() {
    assert_eq!(immsnap(&["facets", "-r", "1,q"]).status.code(), Some(2));
    assert_eq!(immsnap(&["verify", "-r", "1,1", "--checks", "nonsense"]).status.code(), Some(2));
    assert_eq!(immsnap(&["frobnicate"]).status.code(), Some(2));
    assert_eq!(immsnap(&["build", "-r", "1,1,1", "--max-simplices", "10"]).status.code(), Some(3));
    assert_eq!(immsnap(&["export", "-r", "1,1,1,1", "--format", "svg"]).status.code(), Some(2));
    let capped = Command::new(env!("CARGO_BIN_EXE_immsnap"))
        .args(["build", "-r", "1,1,1"])
        .env("IMMSNAP_MAX_SIMPLICES", "10")
        .output()
        .unwrap();
    assert_eq!(capped.status.code(), Some(3));
}

#[test]
fn collapse_full_is_validated() {
    let out = immsnap(&["collapse", "-r", "1,1,1", "--full", "--validate"]);
    assert!(out.status.success());
    let doc = json(&out);
    assert_eq!(doc["pairs"], 25);
    assert_eq!(doc["validation"]["valid"], Value::Bool(true));
    assert_eq!(doc["provenance"]["greedy-fallback"], 0);
    let out = immsnap(&["collapse", "-r", "1,1", "--pivot", "1", "--validate"]);
    assert_eq!(json(&out)["pairs"], 3);
}

#[test]
fn outputs_are_deterministic() {
    for args in [
        &["build", "-r", "2,1,1"][..],
        &["verify", "-r", "1,1,1"],
        &["export", "-r", "2,1,1", "--format", "svg"],
        &["export", "-r", "1,1", "--format", "dot"],
        &["strata", "-r", "2,1,1", "--nerve"],
    ] {
        assert_eq!(immsnap(args).stdout, immsnap(args).stdout, "{args:?}");
    }
}

#[test]
fn exports() {
    let dot = stdout(&immsnap(&["export", "-r", "1,1", "--format", "dot"]));
    // four vertices over the empty simplex, three edges with two ends each
    assert_eq!(dot.matches(" -> ").count(), 4 + 3 * 2);
    let svg = stdout(&immsnap(&["export", "-r", "1,1,1", "--format", "svg"]));
    assert_eq!(svg.matches("<polygon").count(), 13);
    assert_eq!(svg.matches("<circle").count(), 12);
    let list = json(&immsnap(&["strata", "-r", "1,1", "--list"]));
    assert!(list["strata"].as_array().unwrap().iter().any(|s| s["stratum"] == "Z_{{0,1}}"));
}
