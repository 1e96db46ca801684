use std::fs;
use std::path::Path;
use std::process::{Command, Output};

use serde_json::Value;

fn hjvar(dir: &Path, args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_hjvar")).args(args).arg("--out").arg(dir).output().expect("binary runs")
}

fn configs() -> &'static Path {
    Path::new(concat!(env!("CARGO_MANIFEST_DIR"), "/configs"))
}

fn manifest(dir: &Path) -> Value {
    serde_json::from_slice(&fs::read(dir.join("manifest.json")).unwrap()).unwrap()
}

#[test]
fn solve_prints_value_and_reference() {
    let tmp = tempfile::tempdir().unwrap();
    let cfg = configs().join("hopf_lax.json");
    let out = hjvar(tmp.path(), &["solve", "--config", cfg.to_str().unwrap()]);
    assert_eq!(out.status.code(), Some(0), "{}", String::from_utf8_lossy(&out.stderr));
    let stdout = String::from_utf8(out.stdout).unwrap();
    assert!(stdout.contains("u = 16"));
    assert!(stdout.contains("reference = 16"));
    let m = manifest(tmp.path());
    assert_eq!(m["status"], "ok");
    assert_eq!(m["command"], "solve");
    let files: Vec<&str> = m["outputs"].as_array().unwrap().iter().map(|o| o["file"].as_str().unwrap()).collect();
    assert!(files.contains(&"value.json") && files.contains(&"paths.jsonl"));
}

#[test]
fn invalid_alpha_exits_one_and_names_key() {
    let tmp = tempfile::tempdir().unwrap();
    let cfg = tmp.path().join("bad.json");
    fs::write(&cfg, r#"{"campaign": {"model": {"alpha": 1.5}}}"#).unwrap();
    let out = hjvar(&tmp.path().join("out"), &["solve", "--config", cfg.to_str().unwrap()]);
    assert_eq!(out.status.code(), Some(1));
    assert!(String::from_utf8_lossy(&out.stderr).contains("alpha"));
}

#[test]
fn unknown_keys_and_bad_usage_exit_one() {
    let tmp = tempfile::tempdir().unwrap();
    let out = hjvar(tmp.path(), &["solve", "--set", "solve.horizn=4"]);
    assert_eq!(out.status.code(), Some(1));
    assert!(String::from_utf8_lossy(&out.stderr).contains("solve.horizn"));
    assert_eq!(hjvar(tmp.path(), &["frobnicate"]).status.code(), Some(1));
}

#[test]
fn budget_overrun_exits_two_with_manifest() {
    let tmp = tempfile::tempdir().unwrap();
    let out = hjvar(tmp.path(), &["campaign", "--set", "campaign.samples=40", "--set", "campaign.budget_seconds=0.000001"]);
    assert_eq!(out.status.code(), Some(2));
    assert!(manifest(tmp.path())["status"]["failed"].is_string());
}

#[test]
fn campaign_reruns_from_manifest_byte_identically() {
    let tmp = tempfile::tempdir().unwrap();
    let first = tmp.path().join("first");
    let args = [
        "campaign",
        "--set",
        "campaign.samples=30",
        "--set",
        "campaign.horizons=[8,16,32]",
        "--set",
        "campaign.bootstrap_resamples=300",
        "--set",
        "campaign.shift_averaging=true",
        "--jobs",
        "2",
    ];
    assert_eq!(hjvar(&first, &args).status.code(), Some(0));
    let second = tmp.path().join("second");
    let m = first.join("manifest.json");
    assert_eq!(hjvar(&second, &["campaign", "--config", m.to_str().unwrap(), "--jobs", "1"]).status.code(), Some(0));
    for f in ["samples.csv", "curve.json", "plot.csv", "config.resolved.json"] {
        assert_eq!(fs::read(first.join(f)).unwrap(), fs::read(second.join(f)).unwrap(), "{f}");
    }
    assert_eq!(manifest(&first)["config_sha256"], manifest(&second)["config_sha256"]);
}

#[test]
fn hash_check_and_fpp_write_outputs() {
    let tmp = tempfile::tempdir().unwrap();
    let h = tmp.path().join("h");
    assert_eq!(hjvar(&h, &["hash-check", "--set", "hash_check.random_flips=500"]).status.code(), Some(0));
    let rep: Value = serde_json::from_slice(&fs::read(h.join("hash_check.json")).unwrap()).unwrap();
    assert!(rep["rows"].as_array().unwrap().iter().all(|r| r["lipschitz_violations"] == 0 && r["uniform_ok"] == true));
    let f = tmp.path().join("f");
    let out = hjvar(&f, &["fpp", "--set", "fpp.samples=20", "--set", "fpp.lengths=[4,8]", "--set", "fpp.bootstrap_resamples=100"]);
    assert_eq!(out.status.code(), Some(0));
    let plot = fs::read_to_string(f.join("fpp_plot.csv")).unwrap();
    assert!(plot.starts_with("t,var,ci_lo,ci_hi"));
}

#[test]
fn sample_env_and_influence_run() {
    let tmp = tempfile::tempdir().unwrap();
    let e = tmp.path().join("e");
    assert_eq!(hjvar(&e, &["sample-env", "--set", "sample_env.lo=[0,0]", "--set", "sample_env.hi=[10,10]"]).status.code(), Some(0));
    let env = hjb_variance::env::read_snapshot(fs::File::open(e.join("env.snapshot")).unwrap()).unwrap();
    assert_eq!(env.bbox().len(), 100);
    let i = tmp.path().join("i");
    assert_eq!(hjvar(&i, &["influence", "--set", "influence.horizon=4"]).status.code(), Some(0));
    let csv = fs::read_to_string(i.join("survey.csv")).unwrap();
    assert!(csv.starts_with("env_seed,j0,j1,omega_j,u,sigma_u,rho,delta_weighted,important,very_important,G_flag"));
}
