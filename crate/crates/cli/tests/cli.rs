use serde_json::Value;
use std::fs;
use std::path::Path;
use std::process::{Command, Output};

fn run(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_bispectral")).args(args).env_remove("BISPECTRAL_LOG").output().unwrap()
}

fn json(path: &Path) -> Value {
    serde_json::from_str(&fs::read_to_string(path).unwrap()).unwrap()
}

fn stdout_json(out: &Output) -> Value {
    serde_json::from_slice(&out.stdout).unwrap()
}

fn without_timing(mut v: Value) -> Value {
    v.as_object_mut().unwrap().remove("timing");
    v
}

fn p(dir: &Path, name: &str) -> String {
    dir.join(name).display().to_string()
}

/// `<1, (x - 5/2) e^x>` with `z = (3/2, 0)`
const PADDED_LINE: &str = r#"{"variable":"x","basis":[
  {"terms":[{"lambda":{"re":"0","im":"0"},"num":[{"re":"1","im":"0"}]}]},
  {"terms":[{"lambda":{"re":"1","im":"0"},"num":[{"re":"-5/2","im":"0"},{"re":"1","im":"0"}]}]}
],"z":[{"re":"3/2","im":"0"},{"re":"0","im":"0"}]}"#;

fn assert_report_shape(r: &Value) {
    for c in r["checks"].as_array().unwrap() {
        for key in ["name", "property", "status", "residual", "tolerance"] {
            assert!(c.get(key).is_some(), "{} missing in {}", key, c);
        }
    }
    assert!(r["timing"]["elapsed_ms"].is_number());
}

#[test]
fn demo_passes() {
    let out = run(&["demo"]);
    assert_eq!(out.status.code(), Some(0), "{}", String::from_utf8_lossy(&out.stdout));
    let r = stdout_json(&out);
    assert_eq!(r["status"], "pass");
    assert_eq!(r["result"]["points"].as_array().unwrap().len(), 2);
    assert_report_shape(&r);
    let names: Vec<&str> = r["checks"].as_array().unwrap().iter().map(|c| c["name"].as_str().unwrap()).collect();
    for want in ["orbit count", "coefficient duality", "three-term recurrence", "KZ eigenvalues", "baker involution"] {
        assert!(names.contains(&want), "{:?}", names);
    }
}

#[test]
fn demo_is_deterministic() {
    let a = stdout_json(&run(&["demo", "--seed", "3"]));
    let b = stdout_json(&run(&["demo", "--seed", "3"]));
    assert_eq!(without_timing(a), without_timing(b));
}

#[test]
fn unknown_flag_is_a_usage_error() {
    let out = run(&["demo", "--frobnicate"]);
    assert_eq!(out.status.code(), Some(2));
    assert!(String::from_utf8_lossy(&out.stderr).contains("Usage"));
    assert_eq!(run(&["nonsense"]).status.code(), Some(2));
}

#[test]
fn bad_log_level_is_rejected() {
    let out = Command::new(env!("CARGO_BIN_EXE_bispectral")).arg("demo").env("BISPECTRAL_LOG", "loud").output().unwrap();
    assert_eq!(out.status.code(), Some(2));
    let out = Command::new(env!("CARGO_BIN_EXE_bispectral")).arg("demo").env("BISPECTRAL_LOG", "info").output().unwrap();
    assert_eq!(out.status.code(), Some(0));
}

#[test]
fn special_transform_on_a_non_special_space() {
    let dir = tempfile::tempdir().unwrap();
    // both basis elements share λ = 0
    let space = r#"{"variable":"x","basis":[
      {"terms":[{"lambda":{"re":"0","im":"0"},"num":[{"re":"1","im":"0"}]}]},
      {"terms":[{"lambda":{"re":"0","im":"0"},"num":[{"re":"0","im":"0"},{"re":"0","im":"0"},{"re":"0","im":"0"},{"re":"1","im":"0"}]}]}
    ],"z":[{"re":"0","im":"0"}]}"#;
    fs::write(dir.path().join("v.json"), space).unwrap();
    let out = run(&["transform", "--input", &p(dir.path(), "v.json"), "--special", "--output", &p(dir.path(), "u.json")]);
    assert_eq!(out.status.code(), Some(2));
    assert!(String::from_utf8_lossy(&out.stderr).contains("not special"));
}

#[test]
fn special_transform_round_trip() {
    let dir = tempfile::tempdir().unwrap();
    fs::write(dir.path().join("v.json"), PADDED_LINE).unwrap();
    let args = |i: &str, o: &str, r: &str| {
        run(&["transform", "--input", &p(dir.path(), i), "--special", "--output", &p(dir.path(), o), "--report", &p(dir.path(), r)])
    };
    assert_eq!(args("v.json", "u.json", "r1.json").status.code(), Some(0));
    assert_eq!(args("u.json", "w.json", "r2.json").status.code(), Some(0));
    let r = json(&dir.path().join("r1.json"));
    assert_eq!(r["status"], "pass");
    assert_report_shape(&r);
    assert_eq!(r["result"]["n"], serde_json::json!([1, 0]));
    let read = |name: &str| {
        let f: bispectral::io::SpaceFile = serde_json::from_value(json(&dir.path().join(name))).unwrap();
        bispectral::io::space_from_json::<bispectral::Exact>(&f).unwrap()
    };
    let (v, _) = read("v.json");
    let (w, z) = read("w.json");
    assert!(w.span_eq(&v));
    assert_eq!(z.unwrap().len(), 2);
    // the dual file is also a valid Baker input
    assert_eq!(run(&["baker", "verify", "--space", &p(dir.path(), "u.json")]).status.code(), Some(0));
}

fn basis_file(dir: &Path, name: &str, basis: &str) -> String {
    fs::write(dir.join(name), format!(r#"{{"variable":"x","basis":[{}]}}"#, basis)).unwrap();
    p(dir, name)
}

const ONE: &str = r#"{"terms":[{"lambda":{"re":"0","im":"0"},"num":[{"re":"1","im":"0"}]}]}"#;
const X: &str = r#"{"terms":[{"lambda":{"re":"0","im":"0"},"num":[{"re":"0","im":"0"},{"re":"1","im":"0"}]}]}"#;

#[test]
fn regular_transform() {
    let dir = tempfile::tempdir().unwrap();
    // <x, (x^2 - 2x - 1) e^x>, Wronskian (x-1)^2 (x+1) e^x
    let second = r#"{"terms":[{"lambda":{"re":"1","im":"0"},"num":[{"re":"-1","im":"0"},{"re":"-2","im":"0"},{"re":"1","im":"0"}]}]}"#;
    let v = basis_file(dir.path(), "v.json", &format!("{},{}", X, second));
    let out = run(&["transform", "--input", &v, "--output", &p(dir.path(), "u.json")]);
    assert_eq!(out.status.code(), Some(0), "{}", String::from_utf8_lossy(&out.stdout));
    assert_eq!(stdout_json(&out)["result"]["dim"], 2);
    let back = run(&["transform", "--input", &p(dir.path(), "u.json"), "--output", &p(dir.path(), "w.json")]);
    assert_eq!(back.status.code(), Some(0));
    let out = run(&["baker", "verify", "--space", &v, "--grid", "4", "--seed", "2"]);
    assert_eq!(out.status.code(), Some(0), "{}", String::from_utf8_lossy(&out.stdout));
}

#[test]
fn constant_parts_break_the_regular_involution() {
    let dir = tempfile::tempdir().unwrap();
    // <1, x e^x>: e^{0x} lies in the space
    let xe = r#"{"terms":[{"lambda":{"re":"1","im":"0"},"num":[{"re":"0","im":"0"},{"re":"1","im":"0"}]}]}"#;
    let v = basis_file(dir.path(), "v.json", &format!("{},{}", ONE, xe));
    let out = run(&["transform", "--input", &v, "--output", &p(dir.path(), "u.json")]);
    assert_eq!(out.status.code(), Some(1));
    let r = stdout_json(&out);
    let failed: Vec<&str> =
        r["checks"].as_array().unwrap().iter().filter(|c| c["status"] == "fail").map(|c| c["name"].as_str().unwrap()).collect();
    assert!(failed.contains(&"involution"), "{:?}", failed);
}

#[test]
fn approximate_input_uses_the_approx_backend() {
    let dir = tempfile::tempdir().unwrap();
    let approx = PADDED_LINE.replace("\"-5/2\"", "-2.5").replace("\"3/2\"", "1.5").replace("\"0\"", "0").replace("\"1\"", "1");
    fs::write(dir.path().join("v.json"), approx).unwrap();
    let out = run(&["transform", "--input", &p(dir.path(), "v.json"), "--special", "--output", &p(dir.path(), "u.json")]);
    assert_eq!(out.status.code(), Some(0), "{}", String::from_utf8_lossy(&out.stdout));
    assert_eq!(stdout_json(&out)["result"]["backend"], "approx");
    let exact = run(&["transform", "--input", &p(dir.path(), "v.json"), "--special", "--exact", "--output", &p(dir.path(), "w.json")]);
    assert_eq!(exact.status.code(), Some(2));
}

#[test]
fn solve_then_verify() {
    let dir = tempfile::tempdir().unwrap();
    let spec = r#"{"lambda":[{"re":0.0,"im":0.0},{"re":1.0,"im":0.0}],"z":[{"re":0.0,"im":0.0},{"re":1.0,"im":0.0}],"n":[2,1],"m":[2,1]}"#;
    fs::write(dir.path().join("spec.json"), spec).unwrap();
    let solve = |out: &str| run(&["bethe", "solve", "--spec", &p(dir.path(), "spec.json"), "--seed", "5", "--out", &p(dir.path(), out)]);
    let s1 = solve("a.json");
    assert_eq!(s1.status.code(), Some(0));
    let s2 = solve("b.json");
    assert_eq!(fs::read(dir.path().join("a.json")).unwrap(), fs::read(dir.path().join("b.json")).unwrap());
    assert_eq!(without_timing(stdout_json(&s1)), without_timing(stdout_json(&s2)));
    let points = json(&dir.path().join("a.json"));
    assert_eq!(points["points"].as_array().unwrap().len(), 2);
    let v = run(&["bethe", "verify", "--input", &p(dir.path(), "a.json"), "--out", &p(dir.path(), "r.json")]);
    assert_eq!(v.status.code(), Some(0));
    let r = json(&dir.path().join("r.json"));
    assert_eq!(r["status"], "pass");
    assert_eq!(r["inputs"][0]["sha256"].as_str().unwrap().len(), 64);
}

#[test]
fn verify_rejects_inconsistent_points() {
    let dir = tempfile::tempdir().unwrap();
    let file = r#"{"spec":{"lambda":[0.0,1.0],"z":[0.0,1.0],"n":[1,1],"m":[1,1]},
      "points":[{"levels":[[0.5,0.25]],"residual":0.0}],"starts":1,"converged":1,"bound":2,"generic":true}"#;
    fs::write(dir.path().join("pts.json"), file).unwrap();
    assert_eq!(run(&["bethe", "verify", "--input", &p(dir.path(), "pts.json")]).status.code(), Some(2));
    // right shape, not critical
    let file = file.replace("[0.5,0.25]", "[0.5]");
    fs::write(dir.path().join("pts.json"), file).unwrap();
    assert_eq!(run(&["bethe", "verify", "--input", &p(dir.path(), "pts.json")]).status.code(), Some(1));
}

#[test]
fn spectrum_feeds_verify_duality() {
    let dir = tempfile::tempdir().unwrap();
    let out = run(&[
        "gaudin", "spectrum", "--N", "3", "--M", "2", "--m", "2,1", "--n", "1,1,1", "--lambda", "0,1,-1/2", "--z", "0,1", "--out",
        &p(dir.path(), "spec.json"),
    ]);
    assert_eq!(out.status.code(), Some(0), "{}", String::from_utf8_lossy(&out.stderr));
    let s = json(&dir.path().join("spec.json"));
    assert_eq!(s["dim"], 3);
    assert_eq!(s["operators"].as_array().unwrap().len(), 5);
    let out = run(&["gaudin", "verify-duality", "--instance", &p(dir.path(), "spec.json")]);
    assert_eq!(out.status.code(), Some(0));
    let r = stdout_json(&out);
    assert!(r["checks"].as_array().unwrap().iter().all(|c| c["residual"] == 0.0));
    let bad = run(&["gaudin", "spectrum", "--N", "2", "--M", "2", "--m", "1,1", "--n", "1,2", "--lambda", "0,1", "--z", "0,1", "--out", &p(dir.path(), "x.json")]);
    assert_eq!(bad.status.code(), Some(2));
}
