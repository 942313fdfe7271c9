use std::fs;
use std::path::Path;
use std::process::{Command, Output};

use ifl::cli::manifest::RunManifest;
use ifl::cli::ExperimentConfig;

fn ifl(dir: &Path, workers: &str, args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_ifl"))
        .args(args)
        .arg("--out")
        .arg(dir)
        .env("IFL_WORKERS", workers)
        .output()
        .unwrap()
}

fn manifest(dir: &Path, sub: &str) -> RunManifest {
    serde_json::from_str(&fs::read_to_string(dir.join(RunManifest::file_name(sub))).unwrap()).unwrap()
}

#[test]
fn bounds_reports_riesz_upper() {
    let dir = tempfile::tempdir().unwrap();
    let out = ifl(dir.path(), "1", &["bounds"]);
    assert_eq!(out.status.code(), Some(0));
    let v: serde_json::Value = serde_json::from_str(&fs::read_to_string(dir.path().join("bounds.json")).unwrap()).unwrap();
    let ru = v["bounds"]["riesz_upper"].as_f64().unwrap();
    assert!((ru - 5.220).abs() < 1e-3, "{ru}");
    assert_eq!(v["input"]["lambda"]["family"], "riesz");
}

#[test]
fn moment_csv_header_and_reruns_are_identical() {
    let dirs = [tempfile::tempdir().unwrap(), tempfile::tempdir().unwrap()];
    let args = ["moment", "--p", "2", "--t", "1", "--x", "0.5", "--reps", "4000", "--steps", "16", "--seed", "9"];
    for (d, w) in dirs.iter().zip(["1", "2"]) {
        assert_eq!(ifl(d.path(), w, &args).status.code(), Some(0));
    }
    let a = fs::read_to_string(dirs[0].path().join("moment.csv")).unwrap();
    let b = fs::read_to_string(dirs[1].path().join("moment.csv")).unwrap();
    assert_eq!(a, b);
    assert_eq!(
        a.lines().next().unwrap(),
        "t,x_radius,p,lambda,value,stderr,log_value,n_rep,n_steps,seed,clip_events"
    );
    assert!(a.lines().nth(1).unwrap().starts_with("1.0,0.5,2,1.0,"));
}

#[test]
fn manifest_reproduces_the_run() {
    let first = tempfile::tempdir().unwrap();
    let args = ["front", "--rho-min", "0.2", "--rho-max", "4", "--rho-steps", "3", "--t-grid", "1,2", "--reps", "1500", "--steps", "16"];
    assert_eq!(ifl(first.path(), "3", &args).status.code(), Some(0));
    let m = manifest(first.path(), "front");
    let files: Vec<_> = m.outputs.iter().map(|o| o.file.as_str()).collect();
    assert_eq!(files, ["front.csv", "front_summary.json"]);
    for o in &m.outputs {
        assert_eq!(fs::metadata(first.path().join(&o.file)).unwrap().len(), o.bytes);
    }

    // rerun from the echoed config alone
    let second = tempfile::tempdir().unwrap();
    let cfg_path = second.path().join("echo.json");
    fs::write(&cfg_path, m.config.to_json()).unwrap();
    let out = ifl(second.path(), "1", &["front", "--config", cfg_path.to_str().unwrap()]);
    assert_eq!(out.status.code(), Some(0), "{}", String::from_utf8_lossy(&out.stderr));
    let again = manifest(second.path(), "front");
    let digests = |m: &RunManifest| m.outputs.iter().map(|o| o.sha256.clone()).collect::<Vec<_>>();
    assert_eq!(digests(&m), digests(&again));
}

#[test]
fn config_errors_exit_2_and_leave_no_outputs() {
    let dir = tempfile::tempdir().unwrap();
    let mut cfg = ExperimentConfig::default();
    cfg.front.delta = 1.5;
    let path = dir.path().join("bad.json");
    fs::write(&path, serde_json::to_string(&cfg).unwrap()).unwrap();
    let out_dir = dir.path().join("out");
    let out = ifl(&out_dir, "1", &["bounds", "--config", path.to_str().unwrap()]);
    assert_eq!(out.status.code(), Some(2));
    assert!(String::from_utf8_lossy(&out.stderr).contains("front.delta"));
    assert!(!out_dir.exists());

    let out = ifl(&out_dir, "1", &["moment", "--reps", "1"]);
    assert_eq!(out.status.code(), Some(2));
    assert!(String::from_utf8_lossy(&out.stderr).contains("mc.n_rep"));

    let out = ifl(&out_dir, "zero", &["bounds"]);
    assert_eq!(out.status.code(), Some(2));
}

#[test]
fn white_noise_moment_is_a_config_error() {
    let dir = tempfile::tempdir().unwrap();
    let mut v: serde_json::Value = serde_json::from_str(&ExperimentConfig::default().to_json()).unwrap();
    v["lambda"] = serde_json::json!({ "family": "white1d" });
    let path = dir.path().join("white.json");
    fs::write(&path, v.to_string()).unwrap();
    let out_dir = dir.path().join("out");
    let out = ifl(&out_dir, "1", &["moment", "--config", path.to_str().unwrap()]);
    assert_eq!(out.status.code(), Some(2));
    assert!(String::from_utf8_lossy(&out.stderr).contains("lambda.family"));
    assert!(!out_dir.join("moment.csv").exists());
    assert!(!out_dir.join("moment.manifest.json").exists());
    // the same config is fine for closed-form bounds
    assert_eq!(ifl(&out_dir, "1", &["bounds", "--config", path.to_str().unwrap()]).status.code(), Some(0));
}

#[test]
fn numerical_failure_exits_4_and_removes_partial_outputs() {
    let dir = tempfile::tempdir().unwrap();
    // x far outside any reachable region: no replica lands in the support
    let out = ifl(dir.path(), "1", &["moment", "--x", "400", "--t", "1", "--reps", "200", "--steps", "8"]);
    assert_eq!(out.status.code(), Some(4), "{}", String::from_utf8_lossy(&out.stderr));
    assert_eq!(fs::read_dir(dir.path()).unwrap().count(), 0);
}

#[test]
fn smallball_writes_the_oracle_column() {
    let dir = tempfile::tempdir().unwrap();
    let args = ["smallball", "--eps", "1.5", "--reps", "5000", "--steps", "64", "--monitoring", "bridge_kill"];
    assert_eq!(ifl(dir.path(), "2", &args).status.code(), Some(0));
    let csv = fs::read_to_string(dir.path().join("smallball.csv")).unwrap();
    let row: Vec<&str> = csv.lines().nth(1).unwrap().split(',').collect();
    assert_eq!(row[5], "bridge_kill");
    let exact: f64 = row[9].parse().unwrap();
    let p: f64 = row[6].parse().unwrap();
    let se: f64 = row[7].parse().unwrap();
    assert!((p - exact).abs() < 4.0 * se);
}

#[test]
fn selftest_passes_on_a_correct_build() {
    let dir = tempfile::tempdir().unwrap();
    let out = ifl(dir.path(), "2", &["selftest"]);
    assert_eq!(out.status.code(), Some(0), "{}", String::from_utf8_lossy(&out.stdout));
    let m = manifest(dir.path(), "selftest");
    assert_eq!(m.counters["failed"], 0);
    assert!(m.counters["checks"] > 50);
}
