use std::path::{Path, PathBuf};
use std::process::{Command, Output};

use qwalk_topo::config::{Experiment, ExperimentConfig};
use qwalk_topo::experiments::{run, CSV_VERSION};

fn configs_dir() -> PathBuf {
    Path::new(env!("CARGO_MANIFEST_DIR")).join("../../configs")
}

fn qwalk(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_qwalk-topo")).args(args).output().unwrap()
}

fn run_config(sub: &str, config: &Path, out: &Path) -> Output {
    qwalk(&[sub, "--config", config.to_str().unwrap(), "--out", out.to_str().unwrap()])
}

#[test]
fn every_shipped_config_loads() {
    let mut n = 0;
    for entry in std::fs::read_dir(configs_dir()).unwrap() {
        let path = entry.unwrap().path();
        let cfg = ExperimentConfig::load(&path).unwrap_or_else(|e| panic!("{}: {e}", path.display()));
        let round = ExperimentConfig::from_json(&cfg.to_json().unwrap()).unwrap();
        assert_eq!(round, cfg, "{}", path.display());
        n += 1;
    }
    assert!(n >= 10);
}

#[test]
fn boundary_walk_configs_meet_their_bounds() {
    for name in ["winding_wall_walk.json", "trivial_wall_walk.json"] {
        let cfg = ExperimentConfig::load(&configs_dir().join(name)).unwrap();
        assert!(matches!(cfg.experiment, Experiment::Walk1d(_)));
        let report = run(&cfg).unwrap();
        assert!(report.warnings.is_empty(), "{name}: {:?}", report.warnings);
    }
}

#[test]
fn walk_output_is_versioned_and_deterministic() {
    let dir = tempfile::tempdir().unwrap();
    let config = configs_dir().join("winding_wall_walk.json");
    let (a, b) = (dir.path().join("a"), dir.path().join("b"));
    for out in [&a, &b] {
        let o = run_config("walk1d", &config, out);
        assert!(o.status.success(), "{}", String::from_utf8_lossy(&o.stderr));
    }
    for file in ["distribution.csv", "window.csv", "summary.json"] {
        let first = std::fs::read(a.join(file)).unwrap();
        assert_eq!(first, std::fs::read(b.join(file)).unwrap(), "{file} differs between runs");
        if file.ends_with(".csv") {
            assert!(first.starts_with(format!("{CSV_VERSION}\n").as_bytes()));
        }
    }
}

#[test]
fn spectrum_and_boundstate_run() {
    let dir = tempfile::tempdir().unwrap();
    for (sub, name, artifact) in [
        ("spectrum", "zero_pi_spectrum.json", "spectrum.csv"),
        ("boundstate", "boundstate.json", "eigenphases.csv"),
    ] {
        let out = dir.path().join(sub);
        let o = run_config(sub, &configs_dir().join(name), &out);
        assert!(o.status.success(), "{sub}: {}", String::from_utf8_lossy(&o.stderr));
        assert!(out.join(artifact).exists());
        assert!(out.join("summary.json").exists());
    }
}

#[test]
fn input_errors_exit_with_one() {
    let dir = tempfile::tempdir().unwrap();
    let out = dir.path().join("out");
    let wrong_command = run_config("phase1d", &configs_dir().join("winding_wall_walk.json"), &out);
    assert_eq!(wrong_command.status.code(), Some(1));

    let bad = dir.path().join("bad.json");
    std::fs::write(&bad, r#"{"experiment": "walk1d", "steps": 3}"#).unwrap();
    assert_eq!(run_config("walk1d", &bad, &out).status.code(), Some(1));

    assert_eq!(run_config("walk1d", &dir.path().join("missing.json"), &out).status.code(), Some(1));
    assert_eq!(qwalk(&["walk1d"]).status.code(), Some(1));
    assert!(!out.exists());
}

#[test]
fn selftest_passes() {
    let o = qwalk(&["walk1d", "--selftest"]);
    assert!(o.status.success(), "{}", String::from_utf8_lossy(&o.stdout));
    assert!(String::from_utf8_lossy(&o.stdout).contains("0 failed"));
}
