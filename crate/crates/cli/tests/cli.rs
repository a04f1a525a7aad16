use std::process::{Command, Output};

use serde_json::Value;

fn weightlab(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_weightlab"))
        .args(args)
        .output()
        .expect("binary runs")
}

fn stdout(o: &Output) -> String {
    String::from_utf8(o.stdout.clone()).unwrap()
}

fn json(o: &Output) -> Value {
    serde_json::from_slice(&o.stdout).expect("stdout is JSON")
}

#[test]
fn constants_of_trivial_weight() {
    let o = weightlab(&["constants", "--weight", "const:c=1", "--p", "2"]);
    assert!(o.status.success());
    let v = json(&o);
    for key in ["ap_2", "a1", "fw", "rh_2"] {
        assert!((v[key].as_f64().unwrap() - 1.0).abs() < 1e-12, "{key} = {}", v[key]);
    }
}

#[test]
fn constants_of_step_weight_at_res_14() {
    let o = weightlab(&["constants", "--weight", "step:K=4", "--p", "2", "--res", "14"]);
    assert!(o.status.success());
    let ap2 = json(&o)["ap_2"].as_f64().unwrap();
    assert!((ap2 / 1.5625 - 1.0).abs() < 0.02, "ap_2 = {ap2}");
}

#[test]
fn constants_list_and_csv() {
    let o = weightlab(&["--format", "csv", "constants", "--weight", "power:a=0.5", "--p", "1.5,2,3", "--r", "2"]);
    assert!(o.status.success());
    let s = stdout(&o);
    assert!(s.starts_with("key,value\n"));
    for key in ["ap_1.5,", "ap_2,", "ap_3,", "rh_2,", "doubling,"] {
        assert!(s.contains(key), "{key} missing in\n{s}");
    }
}

#[test]
fn transform_csv_shape() {
    let o = weightlab(&["transform", "--op", "maximal", "--weight", "step:K=4", "--res", "5"]);
    assert!(o.status.success());
    let s = stdout(&o);
    let mut lines = s.lines();
    assert_eq!(lines.next(), Some("fiber,cell,x,f,tf"));
    let rows: Vec<Vec<f64>> = lines.map(|l| l.split(',').map(|x| x.parse().unwrap()).collect()).collect();
    assert_eq!(rows.len(), 32);
    for r in &rows {
        assert!(r[4] >= r[3] - 1e-12, "Mw >= w fails at {r:?}");
    }
}

#[test]
fn transform_json_matches_csv() {
    let c = weightlab(&["transform", "--op", "hilbert", "--weight", "const:c=1", "--res", "4"]);
    let j = weightlab(&["--json", "transform", "--op", "hilbert", "--weight", "const:c=1", "--res", "4"]);
    let v = json(&j);
    let tf = v["fibers"][0]["tf"].as_array().unwrap();
    for (line, t) in stdout(&c).lines().skip(1).zip(tf) {
        let last: f64 = line.rsplit(',').next().unwrap().parse().unwrap();
        assert_eq!(last, t.as_f64().unwrap());
    }
}

#[test]
fn shift_ap2_report() {
    let o = weightlab(&["verify", "shift-ap2", "--weight", "step:K=4", "--shift", "3"]);
    assert!(o.status.success());
    let v = json(&o);
    for key in ["c", "m", "worst_ratio"] {
        assert!(v[key].as_f64().unwrap() > 0.0, "{key}");
    }
    assert_eq!(v["pass"], Value::Bool(true));
}

#[test]
fn majorant_checks_pass() {
    let o = weightlab(&["majorant", "--f", "power:a=-0.3", "--p", "2", "--depth", "24", "--res", "7"]);
    assert!(o.status.success(), "{}", String::from_utf8_lossy(&o.stderr));
    let s = stdout(&o);
    let (table, block) = s.split_once("\n\n").unwrap();
    assert_eq!(table.lines().count(), 129);
    let v: Value = serde_json::from_str(block).unwrap();
    for key in ["dominates", "norm_ok", "a1_ok", "pass"] {
        assert_eq!(v[key], Value::Bool(true), "{key}");
    }
}

#[test]
fn majorant_csv_to_file() {
    let dir = std::env::temp_dir().join(format!("weightlab-cli-{}", std::process::id()));
    std::fs::create_dir_all(&dir).unwrap();
    let path = dir.join("w.csv");
    let o = weightlab(&["majorant", "--seed", "4", "--res", "6", "--csv", path.to_str().unwrap()]);
    assert!(o.status.success());
    assert_eq!(json(&o)["pass"], Value::Bool(true));
    let written = std::fs::read_to_string(&path).unwrap();
    assert!(written.starts_with("cell,x,f,w\n"));
    std::fs::remove_dir_all(dir).unwrap();
}

#[test]
fn chain_suites_pass() {
    for suite in ["a1apt", "a2rdiv", "btsbge"] {
        let o = weightlab(&["verify", suite, "--seed", "5"]);
        assert!(o.status.success(), "{suite}: {}", String::from_utf8_lossy(&o.stderr));
        let v = json(&o);
        assert!(v["steps"].as_array().unwrap().iter().all(|s| s["pass"] == Value::Bool(true)));
    }
}

#[test]
fn derive_main_chain() {
    let o = weightlab(&["derive", "--script", "main-chain", "--p", "2"]);
    assert!(o.status.success());
    let s = stdout(&o);
    assert!(s.trim_end().lines().last().unwrap().starts_with("#28: X′ A_2-regular"), "{s}");
    let j = json(&weightlab(&["--json", "derive", "--script", "main-chain"]));
    assert_eq!(j["ok"], Value::Bool(true));
    assert_eq!(j["values"]["t"], "8");
    assert_eq!(j["values"]["r"], "3/2");
    assert_eq!(j["steps"].as_array().unwrap().len(), 28);
}

#[test]
fn derive_other_scripts() {
    for (script, last) in [("themcr2", "X′ A_1-regular"), ("frdiv-from-duality", "X F(a1 + b0, a0 + b1)-regular")] {
        let o = weightlab(&["derive", "--script", script]);
        assert!(o.status.success(), "{script}");
        assert!(stdout(&o).contains(last), "{script}");
    }
}

#[test]
fn reruns_are_byte_identical() {
    let runs = [
        vec!["verify", "a2rdiv", "--seed", "7"],
        vec!["majorant", "--seed", "7", "--res", "6"],
        vec!["constants", "--weight", "power:a=0.5", "--p", "2"],
        vec!["derive", "--script", "main-chain"],
    ];
    for args in runs {
        let a = weightlab(&args);
        let b = weightlab(&args);
        assert_eq!(a.stdout, b.stdout, "{args:?}");
    }
}

#[test]
fn thread_count_does_not_change_output() {
    let args = ["constants", "--weight", "step:K=10", "--p", "2", "--res", "9"];
    let one = Command::new(env!("CARGO_BIN_EXE_weightlab")).env("WEIGHTLAB_THREADS", "1").args(args).output().unwrap();
    let three = Command::new(env!("CARGO_BIN_EXE_weightlab")).env("WEIGHTLAB_THREADS", "3").args(args).output().unwrap();
    assert!(one.status.success() && three.status.success());
    assert_eq!(one.stdout, three.stdout);
    let bad = Command::new(env!("CARGO_BIN_EXE_weightlab")).env("WEIGHTLAB_THREADS", "zero").args(args).output().unwrap();
    assert_eq!(bad.status.code(), Some(2));
}

#[test]
fn exit_codes() {
    assert_eq!(weightlab(&["constants", "--weight", "nonsense"]).status.code(), Some(2));
    assert_eq!(weightlab(&["constants", "--weight", "const:c=-1"]).status.code(), Some(2));
    assert_eq!(weightlab(&["constants"]).status.code(), Some(2));
    assert_eq!(weightlab(&["derive", "--script", "nope"]).status.code(), Some(2));
    assert_eq!(weightlab(&["derive", "--script", "main-chain", "--p", "3"]).status.code(), Some(2));
    assert_eq!(weightlab(&["derive", "--script", "main-chain", "--p", "x"]).status.code(), Some(2));
    assert_eq!(weightlab(&["constants", "--weight", "const:c=1", "--p", "0.5"]).status.code(), Some(2));
    assert_eq!(weightlab(&["transform", "--op", "hilbert", "--weight", "const:c=1", "--res", "0"]).status.code(), Some(2));
    assert_eq!(weightlab(&["--version"]).status.code(), Some(0));
}

#[test]
fn failing_check_exits_one() {
    // 2 <= t(3-p)/4 needs p <= 2
    let o = weightlab(&["derive", "--script", "main-chain", "--p", "5/2"]);
    assert_eq!(o.status.code(), Some(1));
    assert!(stdout(&o).contains("FAILED: rule check failed"));
    assert!(String::from_utf8_lossy(&o.stderr).contains("check failed: derive main-chain"));
    let o = weightlab(&["derive", "--script", "main-chain", "--p", "3/2"]);
    assert_eq!(o.status.code(), Some(0));
}
