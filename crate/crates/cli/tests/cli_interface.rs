use std::path::Path;
use std::process::{Command, Output};

use serde_json::Value;

fn tomolab(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_tomolab")).args(args).output().expect("run tomolab")
}

fn json(out: &Output) -> Value {
    assert!(out.status.success(), "stderr: {}", String::from_utf8_lossy(&out.stderr));
    serde_json::from_slice(&out.stdout).expect("json on stdout")
}

fn stderr(out: &Output) -> String {
    String::from_utf8_lossy(&out.stderr).into_owned()
}

#[test]
fn theory_mse_for_mixed_qubit() {
    let v = json(&tomolab(&["theory", "mse", "--d", "2"]));
    assert_eq!(v["mse"].as_f64(), Some(4.5));
    let preds = v["predictions"].as_array().unwrap();
    assert!(preds.iter().all(|p| p["equation"].as_str().is_some_and(|s| !s.is_empty())));
}

#[test]
fn usage_errors_exit_2() {
    for args in [
        &["theory", "mse", "--d", "1"][..],
        &["theory", "mse", "--d", "2", "--purity", "2"],
        &["simulate", "--pom", "tetra", "--n", "0"],
        &["simulate", "--pom", "sic", "--d", "3", "--alpha", "0.5"],
        &["no-such-command"],
    ] {
        assert_eq!(tomolab(args).status.code(), Some(2), "{args:?}");
    }
}

#[test]
fn missing_fiducial_names_the_search_command() {
    let out = tomolab(&["simulate", "--pom", "sic", "--d", "11", "--trials", "2"]);
    assert_eq!(out.status.code(), Some(3));
    assert!(stderr(&out).contains("tomolab fiducial find --d 11"), "{}", stderr(&out));
}

#[test]
fn verify_rejects_computational_basis_state() {
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("zero.json");
    std::fs::write(&path, r#"{"d":2,"amplitudes":[[1,0],[0,0]]}"#).unwrap();
    let out = tomolab(&["fiducial", "verify", "--fiducial", path.to_str().unwrap()]);
    assert_eq!(out.status.code(), Some(3));
    let v: Value = serde_json::from_slice(&out.stdout).unwrap();
    assert_eq!(v["passed"], Value::Bool(false));
    let dev = v["max_deviation"].as_f64().unwrap();
    assert!((dev - 1.0 / 3f64.sqrt()).abs() < 1e-12, "{dev}");
}

#[test]
fn bundled_fiducials_verify() {
    for d in 2..=8 {
        let v = json(&tomolab(&["fiducial", "verify", "--d", &d.to_string()]));
        assert!(v["max_deviation"].as_f64().unwrap() < 1e-8, "d={d}");
    }
}

#[test]
fn fiducial_search_is_reproducible_and_usable() {
    let dir = tempfile::tempdir().unwrap();
    let a = dir.path().join("a").join("d3.json");
    let b = dir.path().join("b").join("d3.json");
    for p in [&a, &b] {
        std::fs::create_dir_all(p.parent().unwrap()).unwrap();
        json(&tomolab(&["fiducial", "find", "--d", "3", "--seed", "4", "--out", p.to_str().unwrap()]));
    }
    assert_eq!(std::fs::read(&a).unwrap(), std::fs::read(&b).unwrap());
    assert!(a.with_extension("manifest.json").exists());
    let v = json(&tomolab(&["fiducial", "verify", "--fiducial", a.to_str().unwrap()]));
    assert!(v["max_deviation"].as_f64().unwrap() < 1e-8);
    let fdir = a.parent().unwrap().to_str().unwrap();
    json(&tomolab(&["validate", "--pom", "sic", "--d", "3", "--fiducials", fdir]));
}

#[test]
fn validate_reports_tightness() {
    let v = json(&tomolab(&["validate", "--pom", "octa"]));
    let text = v.to_string();
    assert!(text.contains("\"informationally_complete\":true"), "{text}");
}

#[test]
fn simulate_is_deterministic_and_writes_manifest() {
    let dir = tempfile::tempdir().unwrap();
    let out = dir.path().join("sim.json");
    let args = ["simulate", "--pom", "tetra", "--trials", "50", "-N", "200", "--seed", "3"];
    let first = json(&tomolab(&args));
    let second = json(&tomolab(&args));
    assert_eq!(first, second);

    let mut with_out = args.to_vec();
    with_out.extend(["--out", out.to_str().unwrap()]);
    assert!(tomolab(&with_out).status.success());
    let manifest = out.with_extension("manifest.json");
    let m: Value = serde_json::from_slice(&std::fs::read(&manifest).unwrap()).unwrap();
    assert_eq!(m["master_seed"].as_u64(), Some(3));
    assert_eq!(m["config"]["command"].as_str(), Some("simulate"));
    let check = tomolab(&["replay", manifest.to_str().unwrap(), "--check"]);
    assert!(check.status.success(), "{}", stderr(&check));
}

#[test]
fn replay_check_detects_tampering() {
    let dir = tempfile::tempdir().unwrap();
    let out = dir.path().to_str().unwrap();
    let run = tomolab(&["reproduce", "fig3", "--dmax", "4", "--out", out]);
    assert!(run.status.success(), "{}", stderr(&run));
    let csv = dir.path().join("fig3.csv");
    let text = std::fs::read_to_string(&csv).unwrap();
    assert!(text.starts_with("# tomolab fig3 schema_version="));
    assert!(text.contains("d1,d2,mse_ratio"));
    std::fs::write(&csv, text.replace("mse_ratio", "tampered")).unwrap();
    let manifest = dir.path().join("fig3.manifest.json");
    let check = tomolab(&["replay", manifest.to_str().unwrap(), "--check"]);
    assert_eq!(check.status.code(), Some(3));
}

#[test]
fn reproduce_writes_all_targets() {
    let dir = tempfile::tempdir().unwrap();
    let out = dir.path().to_str().unwrap();
    let small: [(&str, &[&str]); 4] = [
        ("fig1", &["--dmax", "3", "--trials", "50", "--states", "5", "--state-trials", "10"]),
        ("fig2", &["--points", "3", "--states", "5", "--state-trials", "10"]),
        ("table1", &["--trials", "50", "--states", "5", "--state-trials", "10"]),
        ("fig4", &["--kmax-theory", "3", "--kmax-sim", "2", "--trials", "50", "--states", "5", "--state-trials", "10"]),
    ];
    for (target, extra) in small {
        let mut args = vec!["reproduce", target, "--out", out];
        args.extend_from_slice(extra);
        let run = tomolab(&args);
        assert!(run.status.success(), "{target}: {}", stderr(&run));
        assert!(Path::new(out).join(format!("{target}.csv")).exists());
        assert!(Path::new(out).join(format!("{target}.manifest.json")).exists());
    }
}
