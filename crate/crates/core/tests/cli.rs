use std::fs;
use std::path::Path;
use std::process::Command as Process;

use liouville::cli_io::{parse_config, profile_csv, read_profile_csv, run, Command, Status};
use liouville::radial::{integrate, residual, InitialHeights};
use liouville::Error;
use serde_json::Value;

const SOLVE: &str = r#"{"command":"solve","A":[[1]],"beta":[0],"c":[2.0794415416798357]}"#;

fn cli(command: &str, config: &str, dir: &Path, extra: &[&str]) -> i32 {
    let path = dir.join(format!("{command}.json"));
    fs::write(&path, config).unwrap();
    Process::new(env!("CARGO_BIN_EXE_liouville"))
        .arg(command)
        .arg("--config")
        .arg(&path)
        .arg("--out-dir")
        .arg(dir.join("out"))
        .args(extra)
        .output()
        .unwrap()
        .status
        .code()
        .unwrap()
}

fn report(dir: &Path) -> Value {
    serde_json::from_str(&fs::read_to_string(dir.join("out/report.json")).unwrap()).unwrap()
}

#[test]
fn minimal_config_gets_defaults() {
    let config = parse_config(SOLVE).unwrap();
    assert_eq!(config.command, Command::Solve);
    let spec = config.spec.as_ref().unwrap();
    assert_eq!(spec.tol_step, 1e-10);
    assert_eq!(spec.tol_energy, 1e-9);
    assert_eq!(config.shoot_tol, 1e-8);
    assert_eq!((spec.t_min, spec.t_max), (-18.0, 60.0));
}

#[test]
fn overrides_are_applied() {
    let text = r#"{"command":"solve","A":[[1]],"beta":[0],"c":[0],
        "tolerances":{"tol_step":1e-9,"shoot_tol":1e-6},"window":{"t_max":30}}"#;
    let config = parse_config(text).unwrap();
    let spec = config.spec.unwrap();
    assert_eq!(spec.tol_step, 1e-9);
    assert_eq!(spec.tol_energy, 1e-9);
    assert_eq!(spec.t_max, 30.0);
    assert_eq!(config.shoot_tol, 1e-6);
}

#[test]
fn validation_errors() {
    let e = parse_config(r#"{"command":"solve","A":[[1]],"beta":[-2],"c":[0]}"#).unwrap_err();
    assert!(matches!(&e, Error::Validation(inner) if matches!(**inner, Error::BetaOutOfRange { .. })));
    assert_eq!(e.code(), "ValidationError");

    let e = parse_config(r#"{"command":"solve","A":[[1,0],[0,1]],"beta":[0,0]}"#).unwrap_err();
    assert!(matches!(&e, Error::Validation(inner) if matches!(**inner, Error::Reducible { .. })));

    let e = parse_config(r#"{"command":"solve","A":[[1]],"beta":[0],"c":[0,1]}"#).unwrap_err();
    assert_eq!(e.code(), "ValidationError");
}

#[test]
fn schema_errors_report_the_path() {
    let e = parse_config(r#"{"command":"solve","A":[[1]],"beta":[0],"tolerances":{"tol_step":"x"}}"#).unwrap_err();
    match e {
        Error::Schema { path, .. } => assert_eq!(path, "tolerances.tol_step"),
        other => panic!("{other:?}"),
    }
    let e = parse_config(r#"{"command":"fly"}"#).unwrap_err();
    assert_eq!(e.code(), "SchemaError");
    let e = parse_config(r#"{"command":"solve","A":[[1]],"beta":[0],"colour":1}"#).unwrap_err();
    assert_eq!(e.code(), "SchemaError");
    assert_eq!(parse_config("not json").unwrap_err().code(), "SchemaError");
}

#[test]
fn solve_oracle_config() {
    let outcome = run(&parse_config(SOLVE).unwrap(), None).unwrap();
    assert_eq!(outcome.status, Status::Success);
    let sigma = outcome.report["sigma"][0].as_f64().unwrap();
    assert!((sigma - 4.0).abs() <= 1e-8);
    assert!(outcome.report["lambda_I_residual"].as_f64().unwrap() <= 1e-8);
    assert_eq!(outcome.report["converged"], Value::Bool(true));
}

#[test]
fn shoot_symmetric_config() {
    let text = r#"{"command":"shoot","A":[[2,1],[1,2]],"beta":[0,0],
        "target":[1.3333333333333333,1.3333333333333333]}"#;
    let outcome = run(&parse_config(text).unwrap(), None).unwrap();
    assert_eq!(outcome.status, Status::Success);
    for v in outcome.report["c"].as_array().unwrap() {
        assert!(v.as_f64().unwrap().abs() <= 1e-6);
    }
    let lambda_j = outcome.report["lambda_J"].as_object().unwrap();
    assert!(lambda_j.contains_key("{1}") && lambda_j.contains_key("{2}"));
}

#[test]
fn binary_round_trip() {
    let dir = tempfile::tempdir().unwrap();
    assert_eq!(cli("solve", SOLVE, dir.path(), &[]), 0);
    let r = report(dir.path());
    assert!((r["sigma"][0].as_f64().unwrap() - 4.0).abs() <= 1e-8);
    let csv = fs::read_to_string(dir.path().join("out/profile.csv")).unwrap();
    let mut lines = csv.lines();
    assert_eq!(lines.next(), Some("t,r,u_1,rdu_1"));
    let first: Vec<&str> = lines.next().unwrap().split(',').collect();
    // 17 significant digits
    assert!(first[2].trim_start_matches('-').split('e').next().unwrap().len() >= 17);
}

#[test]
fn exit_codes() {
    let dir = tempfile::tempdir().unwrap();
    let bad = r#"{"command":"solve","A":[[1,0],[0,1]],"beta":[0,0],"c":[0,0]}"#;
    assert_eq!(cli("solve", bad, dir.path(), &[]), 1);
    let r = report(dir.path());
    assert_eq!(r["error"]["code"], "ValidationError");
    assert_eq!(r["error"]["cause"], "Reducible");

    let short = r#"{"command":"solve","A":[[1]],"beta":[0],"c":[0],"window":{"t_max":-2}}"#;
    assert_eq!(cli("solve", short, dir.path(), &[]), 2);
    assert_eq!(report(dir.path())["converged"], Value::Bool(false));

    // command line and config disagree
    assert_eq!(cli("energy", SOLVE, dir.path(), &[]), 1);
}

#[test]
fn reports_are_deterministic() {
    let a = tempfile::tempdir().unwrap();
    let b = tempfile::tempdir().unwrap();
    let text = r#"{"command":"shoot","A":[[1,0.5],[0.5,2]],"beta":[0.5,-0.5],
        "target":[2.0,0.0],"count":3}"#;
    // complete a valid target first
    let config = parse_config(r#"{"command":"sample","A":[[1,0.5],[0.5,2]],"beta":[0.5,-0.5],"count":1}"#).unwrap();
    let sample = run(&config, Some(5)).unwrap();
    let target = sample.report["samples"][0].clone();
    let mut doc: Value = serde_json::from_str(text).unwrap();
    doc["target"] = target;
    let text = doc.to_string();
    assert_eq!(cli("shoot", &text, a.path(), &["--seed", "9"]), 0);
    assert_eq!(cli("shoot", &text, b.path(), &["--seed", "9"]), 0);
    let ra = fs::read(a.path().join("out/report.json")).unwrap();
    let rb = fs::read(b.path().join("out/report.json")).unwrap();
    assert_eq!(ra, rb);
    let pa = fs::read(a.path().join("out/profile.csv")).unwrap();
    let pb = fs::read(b.path().join("out/profile.csv")).unwrap();
    assert_eq!(pa, pb);
}

#[test]
fn csv_reingest_reproduces_residual() {
    let config = parse_config(r#"{"command":"solve","A":[[2,1],[1,2]],"beta":[0.5,-0.5],"c":[1,0]}"#).unwrap();
    let spec = config.spec.unwrap();
    let profile = integrate(&spec, &InitialHeights::new(vec![1.0, 0.0]).unwrap()).unwrap();
    let text = profile_csv(&profile);
    let back = read_profile_csv(&spec, &text).unwrap();
    assert_eq!(back.grid(), profile.grid());
    let (r0, r1) = (residual(&profile), residual(&back));
    assert!((r0.max - r1.max).abs() <= 1e-12);
    for (x, y) in r0.per_point.iter().zip(&r1.per_point) {
        assert!((x - y).abs() <= 1e-12);
    }
    assert!(read_profile_csv(&spec, "t,r,u_1\n0,1,0\n").is_err());
}

#[test]
fn other_commands() {
    let validate = r#"{"command":"validate","A":[[2,1],[1,2]],"beta":[0,0],"target":[1.3333333333333333,1.3333333333333333]}"#;
    let out = run(&parse_config(validate).unwrap(), None).unwrap();
    assert_eq!(out.report["membership"], "inside");

    let oracle = r#"{"command":"oracle","A":[[1]],"beta":[-1],"c":[0.6931471805599453]}"#;
    let out = run(&parse_config(oracle).unwrap(), None).unwrap();
    assert!(out.report["max_error_u"].as_f64().unwrap() < 1e-8);
    assert!(out.report["sigma_error"].as_f64().unwrap() < 1e-8);

    let linearize = r#"{"command":"linearize","A":[[2,1],[1,2]],"beta":[0,0],"c":[0,0]}"#;
    let out = run(&parse_config(linearize).unwrap(), None).unwrap();
    assert!(out.report["kernel_check"]["max_residual"].as_f64().unwrap() < 1e-6);
    assert!(out.report["condition_M"].as_f64().unwrap() >= 1.0);
    assert_eq!(out.files.len(), 2);

    let modes = r#"{"command":"modes","A":[[1]],"beta":[-1],"c":[0.6931471805599453],"k":2}"#;
    let out = run(&parse_config(modes).unwrap(), None).unwrap();
    assert_eq!(out.report["comparison"]["all_hold"], Value::Bool(true));

    let sample = r#"{"command":"sample","A":[[2,1],[1,2]],"beta":[0,0],"count":4}"#;
    let out = run(&parse_config(sample).unwrap(), Some(1)).unwrap();
    assert_eq!(out.report["samples"].as_array().unwrap().len(), 4);

    let ladder = r#"{"command":"shoot","A":[[0,1],[1,0]],"beta":[0,0],"target":[4,4],"epsilon_ladder":[0.1,0.01]}"#;
    let out = run(&parse_config(ladder).unwrap(), None).unwrap();
    assert_eq!(out.report["rungs"].as_array().unwrap().len(), 2);
}
