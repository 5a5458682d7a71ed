use std::path::Path;
use std::process::{Command, Output};

const SMALL: &str = r#"
[grid]
values = [0.05, 0.2]

[integrator]
depth = 6
"#;

fn run(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_qubit-heom")).args(args).output().expect("binary runs")
}

fn write_config(dir: &Path, text: &str) -> String {
    let p = dir.join("cfg.toml");
    std::fs::write(&p, text).unwrap();
    p.to_str().unwrap().to_string()
}

#[test]
fn sweep_eq_writes_csv_and_sidecar() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = write_config(dir.path(), SMALL);
    let out = dir.path().join("out");
    let o = run(&["sweep-eq", "--config", &cfg, "--out", out.to_str().unwrap()]);
    assert_eq!(o.status.code(), Some(0), "{}", String::from_utf8_lossy(&o.stderr));

    let csv = std::fs::read_to_string(out.join("equilibrium.csv")).unwrap();
    assert_eq!(csv.lines().count(), 3);
    let side: serde_json::Value =
        serde_json::from_str(&std::fs::read_to_string(out.join("equilibrium.json")).unwrap()).unwrap();
    assert_eq!(side["kind"], "equilibrium");
    assert_eq!(side["grid"].as_array().unwrap().len(), 2);
}

#[test]
fn sweep_ness_uses_flag_temperatures() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = write_config(dir.path(), SMALL);
    let out = dir.path().join("out");
    let o = run(&["sweep-ness", "--config", &cfg, "--out", out.to_str().unwrap(), "--t1", "3", "--t2", "1"]);
    assert_eq!(o.status.code(), Some(0), "{}", String::from_utf8_lossy(&o.stderr));
    assert!(out.join("ness.csv").exists());
    assert!(out.join("ness_effective.csv").exists());
    let side: serde_json::Value =
        serde_json::from_str(&std::fs::read_to_string(out.join("ness.json")).unwrap()).unwrap();
    assert_eq!(side["effective_temperature"], 2.0);
}

#[test]
fn equal_ness_temperatures_are_a_config_error() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = write_config(dir.path(), SMALL);
    let out = dir.path().join("out");
    let o = run(&["sweep-ness", "--config", &cfg, "--out", out.to_str().unwrap(), "--t1", "1.5", "--t2", "1.5"]);
    assert_eq!(o.status.code(), Some(3));
}

#[test]
fn bad_config_exits_with_config_code() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = write_config(dir.path(), "[grid]\nvalues = [0.5, 0.1]\n");
    let o = run(&["sweep-eq", "--config", &cfg]);
    assert_eq!(o.status.code(), Some(3));

    let o = run(&["sweep-eq", "--config", dir.path().join("missing.toml").to_str().unwrap()]);
    assert_eq!(o.status.code(), Some(3));

    let o = run(&["sweep-eq", "--config", &write_config(dir.path(), SMALL), "--dt=-1"]);
    assert_eq!(o.status.code(), Some(3));
}

#[test]
fn relax_records_a_trajectory() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = write_config(
        dir.path(),
        "[relax]\nlambda_b = 0.05\n[integrator]\ndepth = 4\ndt = 0.02\nt_max = 20.0\nrecord_every = 100\n",
    );
    let out = dir.path().join("out");
    let o = run(&["relax", "--config", &cfg, "--out", out.to_str().unwrap()]);
    assert_eq!(o.status.code(), Some(0), "{}", String::from_utf8_lossy(&o.stderr));
    let csv = std::fs::read_to_string(out.join("relax.csv")).unwrap();
    assert!(csv.starts_with("t,lambda_b,"));
    assert!(csv.lines().count() >= 3);
}
