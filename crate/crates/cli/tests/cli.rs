use std::path::Path;
use std::process::{Command, Output};

use serde_json::Value;

fn jumpcode(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_jumpcode"))
        .args(args)
        .env_remove(jumpcode_cli::DEPTH_CAP_ENV)
        .output()
        .expect("binary runs")
}

fn json_of(out: &Output) -> Value {
    serde_json::from_slice(&out.stdout).unwrap_or_else(|e| {
        panic!("stdout is not JSON ({e}): {}", String::from_utf8_lossy(&out.stdout))
    })
}

fn write(dir: &Path, name: &str, text: &str) -> String {
    let path = dir.join(name);
    std::fs::write(&path, text).unwrap();
    path.to_str().unwrap().to_string()
}

#[test]
fn encode_then_decode_round_trips() {
    let dir = tempfile::tempdir().unwrap();
    let input = write(
        dir.path(),
        "prefix.json",
        r#"{"words": ["", "1", "010", "11"], "payload": "1001", "depth": 4}"#,
    );
    let encoded = dir.path().join("encoded.json");
    let out = jumpcode(&["encode", "--config", &input, "--out", encoded.to_str().unwrap()]);
    assert_eq!(out.status.code(), Some(0), "{}", String::from_utf8_lossy(&out.stderr));

    let out = jumpcode(&["decode", "--config", encoded.to_str().unwrap()]);
    assert_eq!(out.status.code(), Some(0));
    let back = json_of(&out);
    let original: Value = serde_json::from_str(&std::fs::read_to_string(&input).unwrap()).unwrap();
    assert_eq!(back, original);
}

#[test]
fn seeded_encode_round_trips() {
    let dir = tempfile::tempdir().unwrap();
    let encoded = dir.path().join("encoded.json");
    let out = jumpcode(&["encode", "--seed", "0x5eed", "--bits", "12", "--out", encoded.to_str().unwrap()]);
    assert_eq!(out.status.code(), Some(0));
    let out = jumpcode(&["decode", "--config", encoded.to_str().unwrap()]);
    assert_eq!(out.status.code(), Some(0));
    let decoded = json_of(&out);
    assert_eq!(decoded["depth"], 12);
    assert_eq!(decoded["words"].as_array().unwrap().len(), 12);
}

#[test]
fn decode_rejects_a_column_without_its_flag() {
    let dir = tempfile::tempdir().unwrap();
    // "11" has no zero-flag-then-payload tail, so it is not a jump code column
    let bad = write(dir.path(), "bad.json", r#"{"depth": 1, "skolem": [1], "columns": ["11"]}"#);
    let out = jumpcode(&["decode", "--config", &bad]);
    assert_ne!(out.status.code(), Some(0));
}

#[test]
fn pair_and_inverse() {
    let out = jumpcode(&["pair", "3", "4"]);
    assert_eq!(json_of(&out)["pair"], "32");
    let out = jumpcode(&["pair", "--inverse", "32"]);
    let v = json_of(&out);
    assert_eq!((v["n"].as_str(), v["m"].as_str()), (Some("3"), Some("4")));
    assert_eq!(jumpcode(&["pair", "3"]).status.code(), Some(2));
}

#[test]
fn verify_hom_passes_on_the_default_seed() {
    let out = jumpcode(&["verify-hom", "--seed", "0xDEAD", "--bits", "256"]);
    assert_eq!(out.status.code(), Some(0), "{}", String::from_utf8_lossy(&out.stdout));
    let report = json_of(&out);
    assert_eq!(report["op"], "verify-hom");
    assert_eq!(report["pass"], true);
    assert_eq!(report["components"].as_array().unwrap().len(), 4);
}

#[test]
fn verify_hom_reports_an_injected_flip() {
    let dir = tempfile::tempdir().unwrap();
    let fixture = write(
        dir.path(),
        "flip.json",
        r#"{"config": {"kind": "seeded", "seed": "0x1", "shift": ""}, "inject_flip": {"column": 9}}"#,
    );
    let out = jumpcode(&["verify-hom", "--config", &fixture, "--bits", "256"]);
    assert_eq!(out.status.code(), Some(1));
    let report = json_of(&out);
    assert_eq!(report["pass"], false);
    assert!(report["mismatch_index"].is_u64());
    let failing: Vec<&Value> = report["components"].as_array().unwrap().iter().filter(|c| c["pass"] == false).collect();
    assert_eq!(failing.len(), 1);
}

#[test]
fn zero_bits_are_vacuous_not_failures() {
    let out = jumpcode(&["verify-hom", "--bits", "0"]);
    assert_eq!(out.status.code(), Some(0));
    let report = json_of(&out);
    assert!(report["components"].as_array().unwrap().iter().all(|c| c["vacuous"] == true));

    let out = jumpcode(&["verify-cohom", "--bits", "0", "--depth", "1"]);
    assert_eq!(out.status.code(), Some(0));
    assert!(json_of(&out)["components"].as_array().unwrap().iter().all(|c| c["vacuous"] == true));
}

#[test]
fn verify_cohom_fails_when_y_is_in_the_orbit() {
    let dir = tempfile::tempdir().unwrap();
    let pair = write(
        dir.path(),
        "xy.json",
        r#"{"x": {"kind": "seeded", "seed": "0x7", "shift": ""},
            "y": {"kind": "seeded", "seed": "0x7", "shift": "ab"}}"#,
    );
    let out = jumpcode(&["verify-cohom", "--config", &pair, "--depth", "2", "--bits", "64"]);
    assert_eq!(out.status.code(), Some(1));
    let report = json_of(&out);
    assert_eq!(report["op"], "verify-cohom");
    let f_parts = &report["components"][1];
    assert_eq!(f_parts["name"], "f_parts");
    assert_eq!(f_parts["detail"]["matches"], serde_json::json!(["ab"]));
}

#[test]
fn verify_cohom_passes_for_unrelated_points() {
    let out = jumpcode(&["verify-cohom", "--depth", "2", "--bits", "64"]);
    assert_eq!(out.status.code(), Some(0), "{}", String::from_utf8_lossy(&out.stdout));
}

#[test]
fn usage_and_io_errors_have_their_own_codes() {
    assert_eq!(jumpcode(&["no-such-command"]).status.code(), Some(2));
    assert_eq!(jumpcode(&["verify-hom", "--seed", "xyz"]).status.code(), Some(2));
    assert_eq!(jumpcode(&["words", "--depth", "5"]).status.code(), Some(2));
    assert_eq!(jumpcode(&["decode", "--config", "/definitely/not/here.json"]).status.code(), Some(3));

    let dir = tempfile::tempdir().unwrap();
    let bad = write(dir.path(), "bad.json", "{");
    assert_eq!(jumpcode(&["decode", "--config", &bad]).status.code(), Some(2));

    let help = jumpcode(&["--help"]);
    assert_eq!(help.status.code(), Some(0));
    assert!(String::from_utf8_lossy(&help.stdout).contains("verify-hom"));
}

#[test]
fn raising_the_depth_cap_reports_unaddressable_bits() {
    let out = Command::new(env!("CARGO_BIN_EXE_jumpcode"))
        .args(["words", "--depth", "5", "--bits", "8"])
        .env(jumpcode_cli::DEPTH_CAP_ENV, "5")
        .output()
        .unwrap();
    assert_eq!(out.status.code(), Some(1));
    assert!(String::from_utf8_lossy(&out.stderr).contains("no address below 2^128"));
}

#[test]
fn words_lists_content_parts() {
    let out = jumpcode(&["words", "--depth", "1", "--bits", "16"]);
    assert_eq!(out.status.code(), Some(0));
    let v = json_of(&out);
    assert_eq!(v["jump_marker"], 1);
    assert_eq!(v["f_parts"].as_array().unwrap().len(), 4);
    assert_eq!(v["g_parts"].as_array().unwrap().len(), 1);
}

#[test]
fn embed_prints_prefix_and_certificates() {
    let dir = tempfile::tempdir().unwrap();
    let config = write(dir.path(), "x.json", r#"{"kind": "finite", "default": 0, "exceptions": {"ab": 1}}"#);
    let out = jumpcode(&["embed", "--config", &config, "--bits", "40"]);
    assert_eq!(out.status.code(), Some(0), "{}", String::from_utf8_lossy(&out.stderr));
    let v = json_of(&out);
    assert_eq!(v["prefix"].as_str().unwrap().len(), 40);
    assert_eq!(v["skolem"].as_array().unwrap().len(), 32);
}

#[test]
fn generic_with_audit_meets_every_set() {
    let dir = tempfile::tempdir().unwrap();
    let sets = write(
        dir.path(),
        "dense.json",
        r#"{"coords": 2, "sets": [
            {"kind": "min_length", "coord": 0, "index": 3, "length": 2},
            {"kind": "seeded_word", "coord": 1, "index": 2, "seed": "0xbeef", "max_len": 5},
            {"kind": "differ", "index": 0, "coords": [0, 1]},
            {"kind": "lifted", "coords": [1], "inner": {"kind": "jump_decision",
                "layout": ["zero", {"jump": 0}],
                "functional": {"query": 7, "on0": {"leaf": "halt", "output": 1}, "on1": {"leaf": "diverge"}}}}
        ]}"#,
    );
    let out = jumpcode(&["generic", "--dense", &sets, "--audit"]);
    assert_eq!(out.status.code(), Some(0), "{}", String::from_utf8_lossy(&out.stdout));
    let v = json_of(&out);
    assert_eq!(v["pass"], true);
    assert_eq!(v["audits"].as_array().unwrap().len(), 4);
    assert_eq!(v["conditions"][0]["3"].as_str().unwrap().len(), 2);
}

#[test]
fn generic_rejects_a_set_that_cannot_be_met() {
    let dir = tempfile::tempdir().unwrap();
    let sets = write(
        dir.path(),
        "dense.json",
        r#"{"coords": 1, "start": [{"3": "0"}], "sets": [{"kind": "min_length", "index": 3, "length": 4}]}"#,
    );
    assert_eq!(jumpcode(&["generic", "--dense", &sets]).status.code(), Some(1));
}

#[test]
fn audit_keeps_going_past_a_depth_over_the_cap() {
    let out = jumpcode(&["audit", "--depth", "5", "--bits", "16"]);
    assert_eq!(out.status.code(), Some(1));
    let report = json_of(&out);
    let components = report["components"].as_array().unwrap();
    assert_eq!(components.len(), 11);
    assert!(components.iter().filter(|c| c["pass"] == true).count() >= 7);
    let text = report.to_string();
    assert!(text.contains("exceeds the cap"));
    // timings go to stderr, never into the report
    assert!(String::from_utf8_lossy(&out.stderr).contains("1 codec round-trip"));
}

#[test]
fn run_is_callable_in_process() {
    let mut stdout = Vec::new();
    let mut stderr = Vec::new();
    let code = jumpcode_cli::run(["jumpcode", "pair", "0", "0"], &mut stdout, &mut stderr);
    assert_eq!(code, 0);
    let v: Value = serde_json::from_slice(&stdout).unwrap();
    assert_eq!(v["pair"], "0");
}
