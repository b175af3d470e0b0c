use std::process::{Command, Output};

use serde_json::Value;

fn siegel(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_siegel")).args(args).output().expect("binary runs")
}

fn json(out: &Output) -> Value {
    serde_json::from_slice(&out.stdout).expect("stdout is JSON")
}

#[test]
fn ample_example() {
    let out = siegel(&["invariants", "ample", "--n", "5"]);
    assert_eq!(out.status.code(), Some(0));
    assert_eq!(json(&out), serde_json::json!({ "kc": "3", "ample_boundary": true }));
    let out = siegel(&["invariants", "ample", "--n", "4"]);
    assert_eq!(json(&out)["ample_boundary"], false);
}

#[test]
fn delta10_vanishes_at_diag_i() {
    let out = siegel(&["theta", "delta10", "--tau", "diag-i", "--tol", "1e-20"]);
    assert_eq!(out.status.code(), Some(0));
    let v = json(&out);
    let (re, im) = (v["value"][0].as_f64().unwrap(), v["value"][1].as_f64().unwrap());
    assert!(re.hypot(im) < 1e-20);
    assert!(v["tail_bound"].as_f64().unwrap() < 1e-20);
}

#[test]
fn non_symplectic_member_is_a_precondition_error() {
    let out = siegel(&["groups", "member", "--matrix", "[[1,1,0,0],[0,1,0,0],[0,0,1,0],[0,0,0,1]]"]);
    assert_eq!(out.status.code(), Some(2));
    assert_eq!(json(&out)["error"]["kind"], "precondition");
}

#[test]
fn member_verdicts() {
    let m = "[[1,0,0,0],[0,1,0,0],[0,0,1,0],[0,0,0,1]]";
    let v = json(&siegel(&["groups", "member", "--d", "3", "--flavor", "lev", "--matrix", m]));
    assert_eq!(v["member"], true);
    assert_eq!(v["pattern"], true);
    assert_eq!(v["dual_action"], serde_json::json!([[1, 0], [0, 1]]));
    let t = "[[1,0,1,0],[0,1,0,0],[0,0,1,0],[0,0,0,1]]";
    let v = json(&siegel(&["groups", "member", "--d", "3", "--n", "2", "--flavor", "level_n", "--matrix", t]));
    assert_eq!(v["member"], false);
}

#[test]
fn usage_errors_exit_64() {
    assert_eq!(siegel(&["frobnicate"]).status.code(), Some(64));
    assert_eq!(siegel(&[]).status.code(), Some(64));
    assert_eq!(siegel(&["invariants", "ample"]).status.code(), Some(64));
    assert_eq!(siegel(&["--help"]).status.code(), Some(0));
    assert_eq!(siegel(&["--version"]).status.code(), Some(0));
}

#[test]
fn conditioning_exit_code() {
    let out = siegel(&["theta", "eval", "--tau", "[[0,1],[0,0],[0,0.0005]]"]);
    assert_eq!(out.status.code(), Some(3));
    assert_eq!(json(&out)["error"]["kind"], "conditioning");
    let out = siegel(&["theta", "eval", "--tau", "[[0,1],[0,0],[0,-1]]"]);
    assert_eq!(out.status.code(), Some(2));
}

#[test]
fn cusp_commands() {
    let v = json(&siegel(&["cusps", "stab", "--d", "2", "--plane", "[[0,0,1,0],[0,0,0,1]]"]));
    assert_eq!(v["elementary_divisors_vs_reference"], serde_json::json!(["1/1", "2/1", "2/1"]));
    assert_eq!(v["direction"], "coarser");
    let v = json(&siegel(&["cusps", "stab", "--d", "2", "--line", "[0,0,1,0]"]));
    assert_eq!(v["basis"], serde_json::json!([["1/1"]]));
    let v = json(&siegel(&["cusps", "counts", "--p", "5"]));
    assert_eq!(v, serde_json::json!({ "central_lines": 1, "peripheral_lines": 12, "planes": 6 }));
    assert_eq!(siegel(&["cusps", "counts", "--p", "9"]).status.code(), Some(2));
}

#[test]
fn invariants_table_formats() {
    let v = json(&siegel(&["invariants", "table", "--k-min", "3", "--k-max", "5"]));
    assert_eq!(v.as_array().unwrap().len(), 3);
    assert_eq!(v[0]["t"], 4);
    let out = siegel(&["invariants", "table", "--k-min", "5", "--k-max", "5", "--csv"]);
    assert_eq!(String::from_utf8(out.stdout).unwrap(), "k,t,genus,deg_l\n5,12,0,5/1\n");
    let v = json(&siegel(&["invariants", "claims", "--n", "3", "--d", "1"]));
    assert_eq!(v["discrepancy_ok"], false);
    assert_eq!(json(&siegel(&["invariants", "prop22", "--n", "5", "--p", "3"]))["nc_dot_f"], "-30/1");
}

#[test]
fn voronoi_commands() {
    let v = json(&siegel(&["voronoi", "smooth", "--p", "3", "--n", "4"]));
    assert_eq!(v["smooth"], true);
    assert_eq!(v["planes"].as_array().unwrap().len(), 4);
    let v = json(&siegel(&["voronoi", "basic", "--lattice", "[[1,0,0],[0,1,0],[0,0,1]]"]));
    assert_eq!(v["basic"], true);
    assert_eq!(v["determinant"], "1");
}

#[test]
fn out_file_receives_the_output() {
    let dir = std::env::temp_dir().join(format!("siegel-cli-{}", std::process::id()));
    std::fs::create_dir_all(&dir).unwrap();
    let path = dir.join("counts.json");
    let out = siegel(&["cusps", "counts", "--p", "3", "--out", path.to_str().unwrap()]);
    assert_eq!(out.status.code(), Some(0));
    assert!(out.stdout.is_empty());
    let v: Value = serde_json::from_str(&std::fs::read_to_string(&path).unwrap()).unwrap();
    assert_eq!(v["planes"], 4);
    std::fs::remove_dir_all(&dir).unwrap();
}

#[test]
fn tau_file_input() {
    let dir = std::env::temp_dir().join(format!("siegel-tau-{}", std::process::id()));
    std::fs::create_dir_all(&dir).unwrap();
    let path = dir.join("tau.json");
    std::fs::write(&path, "[[0.0, 1.0], [0.0, 0.0], [0.0, 1.0]]").unwrap();
    let v = json(&siegel(&["theta", "eval", "--tau", path.to_str().unwrap(), "--char", "0,0,0,0"]));
    assert!((v["value"][0].as_f64().unwrap() - 1.1803405990).abs() < 1e-9);
    std::fs::remove_dir_all(&dir).unwrap();
    assert_eq!(siegel(&["theta", "eval", "--tau", "/nonexistent/tau.json"]).status.code(), Some(2));
}

#[test]
fn verify_report_shape() {
    let out = siegel(&["verify", "--seed", "7"]);
    assert_eq!(out.status.code(), Some(0));
    let v = json(&out);
    assert_eq!(v["seed"], 7);
    assert_eq!(v["tool_version"], env!("CARGO_PKG_VERSION"));
    let sections = v["sections"].as_array().unwrap();
    let mut names: Vec<&str> = sections.iter().map(|s| s["name"].as_str().unwrap()).collect();
    names.sort();
    names.dedup();
    assert_eq!(names.len(), sections.len());
    for s in sections {
        assert!(["pass", "fail", "skip"].contains(&s["status"].as_str().unwrap()));
    }
    let status = |name: &str| sections.iter().find(|s| s["name"] == name).unwrap()["status"].clone();
    for name in ["groups", "cusps", "invariants", "determinism"] {
        assert_eq!(status(name), "pass", "{name}");
    }
}
