//! End-to-end tests of the `solvlin` binary.

use std::fs;
use std::path::Path;
use std::process::{Command, Output};

use jsonschema::JSONSchema;
use serde_json::Value;
use solvlin::flows::read_trajectory_csv;

const CASE1: &str = r#"{"a":1,"b":0,"alpha":0,"beta":1,"omega":[-1,1]}"#;
const CASE2: &str = r#"{"a":0,"b":-1,"alpha":0,"beta":1,"omega":[-1,2]}"#;
const CASE3: &str = r#"{"a":-1,"b":1,"alpha":1,"beta":1,"omega":[-1,1]}"#;
const SHEAR: &str = r#"{"a":1,"b":0,"alpha":1,"beta":1,"omega":[-1,1]}"#;
const CONE: &str = r#"{"a":1,"b":-1,"alpha":1,"beta":0,"omega":[-1,1]}"#;
const CONE_NORMAL: &str = r#"{"a":0,"b":-1,"alpha":1,"beta":1,"omega":[-1,1]}"#;

fn solvlin(args: &[&str], dir: &Path) -> Output {
    Command::new(env!("CARGO_BIN_EXE_solvlin")).args(args).current_dir(dir).output().unwrap()
}

fn ok_json(args: &[&str], dir: &Path) -> Value {
    let out = solvlin(args, dir);
    assert_eq!(out.status.code(), Some(0), "{}", String::from_utf8_lossy(&out.stderr));
    serde_json::from_slice(&out.stdout).unwrap()
}

fn schema(name: &str) -> JSONSchema {
    let path = Path::new(env!("CARGO_MANIFEST_DIR")).join("schemas").join(format!("{name}.schema.json"));
    let value: Value = serde_json::from_str(&fs::read_to_string(path).unwrap()).unwrap();
    JSONSchema::compile(&value).unwrap()
}

fn assert_valid(schema: &JSONSchema, doc: &Value) {
    if let Err(errors) = schema.validate(doc) {
        let msgs: Vec<String> = errors.map(|e| format!("{} at {}", e, e.instance_path)).collect();
        panic!("schema violations: {msgs:?}");
    }
}

#[test]
fn classify_reports_match_the_examples() {
    let dir = tempfile::tempdir().unwrap();
    let v = ok_json(&["classify", "--system", CASE1], dir.path());
    assert_eq!(v["case"], 1);
    assert_eq!(v["description"]["interval"], serde_json::json!([0.5, null]));
    let v = ok_json(&["classify", "--system", CONE], dir.path());
    assert_eq!(v["case"], 5);
    assert_eq!(v["description"]["apex"], serde_json::json!([0.0, -1.0]));
    assert_eq!(v["description"]["lower"]["slope"], 0.5);
    assert_eq!(v["invariance"], "positively-invariant");
}

#[test]
fn every_json_report_validates() {
    let dir = tempfile::tempdir().unwrap();
    let (classify, steer, verify) = (schema("classify"), schema("steer"), schema("verify"));
    let reversed = r#"{"a":1,"b":2,"alpha":1,"beta":0,"omega":[-1,1]}"#;
    for sys in [CASE1, CASE2, CASE3, SHEAR, CONE, reversed] {
        assert_valid(&classify, &ok_json(&["classify", "--system", sys], dir.path()));
        let out = solvlin(&["steer", "--system", sys, "--from", "1,0", "--to", "1.5,0.2", "--budget", "300"], dir.path());
        assert!(matches!(out.status.code(), Some(0 | 1)));
        assert_valid(&steer, &serde_json::from_slice(&out.stdout).unwrap());
        let out = solvlin(&["verify", "--system", sys, "--pairs", "3", "--invariance-samples", "50"], dir.path());
        assert!(matches!(out.status.code(), Some(0 | 1)));
        assert_valid(&verify, &serde_json::from_slice(&out.stdout).unwrap());
    }
}

#[test]
fn invalid_system_exits_2_naming_the_invariant() {
    let dir = tempfile::tempdir().unwrap();
    let out = solvlin(&["classify", "--system", r#"{"a":1,"b":1,"alpha":0,"beta":0,"omega":[-1,1]}"#], dir.path());
    assert_eq!(out.status.code(), Some(2));
    assert!(String::from_utf8_lossy(&out.stderr).contains("(α, β) ≠ (0, 0)"));
    let out = solvlin(&["classify", "--system", r#"{"a":0,"b":0,"alpha":1,"beta":0,"omega":[-1,1]}"#], dir.path());
    assert_eq!(out.status.code(), Some(2));
    let out = solvlin(&["classify", "--system", CASE1, "--omega", "0,1"], dir.path());
    assert_eq!(out.status.code(), Some(2));
    let out = solvlin(&["classify", "--system", "missing.json"], dir.path());
    assert_eq!(out.status.code(), Some(2));
    let out = solvlin(&["steer", "--system", SHEAR, "--from", "1,0", "--to", "2,1", "--eps", "-1"], dir.path());
    assert_eq!(out.status.code(), Some(2));
}

#[test]
fn flags_override_config_file() {
    let dir = tempfile::tempdir().unwrap();
    fs::write(dir.path().join("sys.json"), CASE1).unwrap();
    fs::write(
        dir.path().join("run.json"),
        r#"{"system": "sys.json", "omega": [-2, 1], "seed": 5, "eps": 0.05, "horizon": 3}"#,
    )
    .unwrap();
    let v = ok_json(&["steer", "--config", "run.json", "--from", "1,0", "--to", "1,0.5"], dir.path());
    assert_eq!(v["config"]["seed"], 5);
    assert_eq!(v["config"]["eps"], 0.05);
    assert_eq!(v["config"]["horizon"], 3.0);
    assert_eq!(v["config"]["system"]["omega"], serde_json::json!([-2.0, 1.0]));
    assert_eq!(v["config"]["budget"], 4000);
    let v = ok_json(&["steer", "--config", "run.json", "--seed", "7", "--omega", "-1,1", "--from", "1,0", "--to", "1,0.5"], dir.path());
    assert_eq!(v["config"]["seed"], 7);
    assert_eq!(v["config"]["system"]["omega"], serde_json::json!([-1.0, 1.0]));

    fs::write(dir.path().join("bad.json"), r#"{"system": "sys.json", "sed": 5}"#).unwrap();
    assert_eq!(solvlin(&["classify", "--config", "bad.json"], dir.path()).status.code(), Some(2));
}

#[test]
fn simulate_shear_example_with_audit() {
    let dir = tempfile::tempdir().unwrap();
    fs::write(dir.path().join("c.csv"), "dt,u\n3,0\n").unwrap();
    let out = solvlin(&["simulate", "--system", SHEAR, "--point", "2,0", "--control", "c.csv", "--rk4"], dir.path());
    assert_eq!(out.status.code(), Some(0));
    let rows = read_trajectory_csv(out.stdout.as_slice()).unwrap();
    let last = rows.last().unwrap();
    assert_eq!((last.t, last.x, last.y), (3.0, 2.0, 3.0));
    for r in &rows {
        let (xa, ya) = r.audit.unwrap();
        assert!((xa - r.x).abs() <= 1e-6 * r.x.abs().max(1.0));
        assert!((ya - r.y).abs() <= 1e-6 * r.y.abs().max(1.0));
    }
}

#[test]
fn simulate_empty_control_is_one_row() {
    let dir = tempfile::tempdir().unwrap();
    fs::write(dir.path().join("c.csv"), "dt,u\n").unwrap();
    let out = solvlin(&["simulate", "--system", CONE, "--point", "1.5,-0.25", "--control", "c.csv"], dir.path());
    assert_eq!(out.status.code(), Some(0));
    assert_eq!(String::from_utf8(out.stdout).unwrap(), "t,x,y,u\n0.0,1.5,-0.25,0.0\n");
}

#[test]
fn simulate_csv_round_trips_through_out_file() {
    let dir = tempfile::tempdir().unwrap();
    fs::write(dir.path().join("c.csv"), "dt,u\n0.3,1\n0.7,-0.25\n1.1,0.5\n").unwrap();
    let out = solvlin(
        &["simulate", "--system", CONE, "--point", "0.7,0.1", "--control", "c.csv", "--out", "t.csv", "--divisions", "5"],
        dir.path(),
    );
    assert_eq!(out.status.code(), Some(0));
    assert!(out.stdout.is_empty());
    let text = fs::read_to_string(dir.path().join("t.csv")).unwrap();
    let rows = read_trajectory_csv(text.as_bytes()).unwrap();
    assert_eq!(rows.len(), 16);
    // re-emitting the parsed values reproduces the file byte for byte
    let mut again = String::from("t,x,y,u\n");
    for r in &rows {
        again.push_str(&format!("{:?},{:?},{:?},{:?}\n", r.t, r.x, r.y, r.u));
    }
    assert_eq!(again, text);
}

#[test]
fn simulate_rejects_bad_rows_by_number() {
    let dir = tempfile::tempdir().unwrap();
    fs::write(dir.path().join("range.csv"), "dt,u\n1,0.5\n1,3\n").unwrap();
    fs::write(dir.path().join("dwell.csv"), "dt,u\n1,0.5\n0,0\n").unwrap();
    for (file, row) in [("range.csv", "row 3"), ("dwell.csv", "row 3")] {
        let out = solvlin(&["simulate", "--system", CONE, "--control", file], dir.path());
        assert_eq!(out.status.code(), Some(2));
        let err = String::from_utf8_lossy(&out.stderr);
        assert!(err.contains(row), "{err}");
    }
}

#[test]
fn steer_exit_codes() {
    let dir = tempfile::tempdir().unwrap();
    let v = ok_json(&["steer", "--system", SHEAR, "--from", "0.5,-1", "--to", "2,3"], dir.path());
    assert_eq!(v["result"]["found"], true);
    assert!(v["result"]["terminal_error"].as_f64().unwrap() <= 1e-2);

    let out = solvlin(&["steer", "--system", CONE_NORMAL, "--from", "1,0.4", "--to", "1,1", "--budget", "50"], dir.path());
    assert_eq!(out.status.code(), Some(1));
    let v: Value = serde_json::from_slice(&out.stdout).unwrap();
    assert_eq!(v["result"]["found"], false);
    assert_eq!(v["result"]["verdict"], "barrier-certified");
}

#[test]
fn verify_exit_codes() {
    let dir = tempfile::tempdir().unwrap();
    let v = ok_json(&["verify", "--system", CONE_NORMAL, "--pairs", "4", "--invariance-samples", "200"], dir.path());
    assert_eq!(v["clean"], true);
    assert_eq!(v["report"]["pairs_steered"], 4);
    assert_eq!(v["report"]["invariance_violations"], 0);
    assert_eq!(v["verify"]["slack"], 1e-9);
}

#[test]
fn plot_writes_svg_and_rejects_unwritable_paths() {
    let dir = tempfile::tempdir().unwrap();
    let out = solvlin(&["plot", "--system", CONE, "--out", "cone.svg", "--trajectories", "5"], dir.path());
    assert_eq!(out.status.code(), Some(0));
    let svg = fs::read_to_string(dir.path().join("cone.svg")).unwrap();
    assert!(svg.starts_with("<svg") || svg.starts_with("<?xml"));
    assert!(svg.contains("polyline"));
    let out = solvlin(&["plot", "--system", CONE, "--out", "no/such/dir/x.svg"], dir.path());
    assert_eq!(out.status.code(), Some(2));
    let out = solvlin(&["plot", "--system", CONE, "--viewport", "0,1,-1,1"], dir.path());
    assert_eq!(out.status.code(), Some(2));
}

#[test]
fn outputs_are_byte_identical() {
    let dir = tempfile::tempdir().unwrap();
    let args: [&[&str]; 3] = [
        &["verify", "--system", CASE2, "--pairs", "3", "--invariance-samples", "100", "--seed", "4"],
        &["plot", "--system", CASE2, "--trajectories", "6", "--seed", "4"],
        &["steer", "--system", CASE3, "--from", "1,0", "--to", "3,0", "--seed", "4"],
    ];
    for a in args {
        let first = solvlin(a, dir.path());
        let second = solvlin(a, dir.path());
        assert!(!first.stdout.is_empty());
        assert_eq!(first.stdout, second.stdout, "{a:?}");
    }
}

#[test]
fn help_and_unknown_commands() {
    let dir = tempfile::tempdir().unwrap();
    assert_eq!(solvlin(&["--help"], dir.path()).status.code(), Some(0));
    assert_eq!(solvlin(&["classify", "--help"], dir.path()).status.code(), Some(0));
    assert_eq!(solvlin(&["animate"], dir.path()).status.code(), Some(2));
}

#[test]
fn schemas_reject_malformed_reports() {
    let dir = tempfile::tempdir().unwrap();
    let classify = schema("classify");
    let mut v = ok_json(&["classify", "--system", CONE], dir.path());
    v["case"] = serde_json::json!(6);
    assert!(!classify.is_valid(&v));
    let mut v = ok_json(&["classify", "--system", CASE1], dir.path());
    v["description"]["interval"] = serde_json::json!([0.5]);
    assert!(!classify.is_valid(&v));
    let steer = schema("steer");
    let mut v = ok_json(&["steer", "--system", SHEAR, "--from", "1,0", "--to", "2,1"], dir.path());
    v["result"].as_object_mut().unwrap().remove("verdict");
    assert!(!steer.is_valid(&v));
}
