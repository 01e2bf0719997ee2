use std::process::{Command, Output};

use serde_json::Value;

fn infree(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_infree")).args(args).output().expect("binary runs")
}

fn json_of(args: &[&str]) -> Value {
    let out = infree(args);
    assert!(out.status.success(), "{args:?}: {}", String::from_utf8_lossy(&out.stderr));
    serde_json::from_slice(&out.stdout).expect("valid JSON")
}

fn stdout(out: &Output) -> String {
    String::from_utf8(out.stdout.clone()).unwrap()
}

#[test]
fn goe_octic_polynomial() {
    let v = json_of(&["goe-moments", "--n", "8"]);
    assert_eq!(v["polynomial"]["variable"], "N^-1");
    let terms = &v["polynomial"]["terms"];
    for (k, c) in [("0", "14"), ("1", "93"), ("2", "374"), ("3", "690"), ("4", "509")] {
        assert_eq!(terms[k], c, "N^-{k}");
    }
    assert_eq!(v["infinitesimal"], "93");
    let pretty = stdout(&infree(&["--pretty", "goe-moments", "--n", "8"]));
    assert_eq!(pretty.trim(), "14 + 93N^-1 + 374N^-2 + 690N^-3 + 509N^-4");
}

#[test]
fn wishart_moments_with_shape() {
    let v = json_of(&["wishart-moments", "--n", "2", "--c", "2", "--cprime", "3"]);
    assert_eq!(v["limit"], "6");
    assert_eq!(v["infinitesimal"], "15");
}

#[test]
fn enumeration_counts() {
    let v = json_of(&["enumerate", "nc2delta", "--n", "6", "--count"]);
    assert_eq!(v["count"], 22);
    let v = json_of(&["enumerate", "nc", "--n", "5"]);
    assert_eq!(v["count"], 42);
    assert_eq!(v["items"].as_array().unwrap().len(), 42);
    let csv = stdout(&infree(&["--csv", "enumerate", "pairings", "--n", "4"]));
    assert_eq!(csv.lines().count(), 4);
}

#[test]
fn wishart_density_csv() {
    let out = infree(&["--csv", "density", "--ensemble", "wishart", "--c", "3", "--grid", "5"]);
    assert!(out.status.success());
    let text = stdout(&out);
    let mut lines = text.lines();
    assert_eq!(lines.next(), Some("x,mu_density,mu_prime_density"));
    let (a, b) = ((1.0 - 3f64.sqrt()).powi(2), (1.0 + 3f64.sqrt()).powi(2));
    let rows: Vec<Vec<f64>> = lines.map(|l| l.split(',').map(|c| c.parse().unwrap()).collect()).collect();
    assert_eq!(rows.len(), 5);
    for r in &rows {
        assert!(r[0] > a && r[0] < b, "x = {}", r[0]);
        assert!(r[1] > 0.0);
    }
}

#[test]
fn transforms_of_the_goe() {
    let v = json_of(&["transform", "g-from-r", "--order", "6"]);
    let got: Vec<&str> = v["inf_moments"].as_array().unwrap().iter().map(|x| x.as_str().unwrap()).collect();
    assert_eq!(got, ["0", "1", "0", "5", "0", "22"]);
    let v = json_of(&["transform", "r-from-g", "--order", "4", "--ensemble", "wishart", "--c", "1/2", "--cprime", "-1"]);
    assert!(v["r"].as_array().unwrap().iter().all(|x| x == "-1"));
}

#[test]
fn cumulants_from_a_file() {
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("m.json");
    std::fs::write(&path, r#"{"moments":[0,1,0,2,0,5],"inf_moments":[0,1,0,5,0,22]}"#).unwrap();
    let v = json_of(&["cumulants", "--moments-file", path.to_str().unwrap(), "--infinitesimal"]);
    assert_eq!(v["words"]["1,1,1,1"], serde_json::json!(["0", "1"]));
    assert_eq!(v["words"]["1,1"], serde_json::json!(["1", "1"]));
}

#[test]
fn simulation_is_reproducible() {
    let args = ["simulate", "goe", "--n", "4", "--N", "8", "--samples", "3000", "--seed", "7"];
    let (a, b) = (infree(&args), infree(&args));
    assert!(a.status.success());
    assert_eq!(a.stdout, b.stdout);
    let other = infree(&["simulate", "goe", "--n", "4", "--N", "8", "--samples", "3000", "--seed", "8"]);
    assert_ne!(a.stdout, other.stdout);
}

#[test]
fn verifications_pass() {
    for args in [
        &["verify", "universal-rule", "--n", "2"][..],
        &["verify", "universal-rule", "--family", "tiled", "--pattern", "1,2;0,-1/2", "--n", "2"],
        &["verify", "non-freeness"],
        &["verify", "wishart-freeness", "--n", "4"],
    ] {
        let out = infree(args);
        assert!(out.status.success(), "{args:?}: {}", String::from_utf8_lossy(&out.stderr));
    }
    let v = json_of(&["verify", "non-freeness"]);
    assert_eq!(v["discrepant_orders"], serde_json::json!([4]));
}

#[test]
fn exit_codes() {
    assert_eq!(infree(&["goe-moments", "--n", "2", "--bogus"]).status.code(), Some(2));
    assert_eq!(infree(&["wishart-moments", "--word", "1,x"]).status.code(), Some(2));
    assert_eq!(infree(&["--csv", "verify", "universal-rule", "--family", "tiled", "--n", "2"]).status.code(), Some(2));
    let capped = Command::new(env!("CARGO_BIN_EXE_infree"))
        .env("INFREE_GOE_MAX_N", "4")
        .args(["goe-moments", "--n", "6"])
        .output()
        .unwrap();
    assert_eq!(capped.status.code(), Some(3));
    assert_eq!(infree(&["enumerate", "pairings", "--n", "40", "--count"]).status.code(), Some(3));
}
