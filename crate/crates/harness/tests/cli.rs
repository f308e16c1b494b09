use std::fs;
use std::path::Path;
use std::process::Command;

use schemanet_harness::plot::{render, Figure};
use schemanet_harness::run::{read_json, Phased, DETOUR_TRIALS, MANIFEST, MATRIX_TSV};
use schemanet_harness::{run, ExperimentConfig, HarnessError, RunManifest, Scenario};
use schemanet_scenarios::detour::TrialOutcome;

fn bin() -> Command {
    Command::new(env!("CARGO_BIN_EXE_schemanet"))
}

fn detour(seed: u64) -> ExperimentConfig {
    let mut c = ExperimentConfig::new(Scenario::Detour);
    c.seed = seed;
    c
}

#[test]
fn detour_seed_seven_writes_five_learning_paths() {
    let dir = tempfile::tempdir().unwrap();
    let out = run(&detour(7), Some(dir.path())).unwrap();
    let trials: Vec<Phased<TrialOutcome>> = read_json(dir.path(), DETOUR_TRIALS).unwrap();
    let learning: Vec<_> = trials.iter().filter(|t| t.phase == "learning").collect();
    assert_eq!(learning.len(), 5);
    for t in &learning {
        assert_eq!(t.outcome.path.len(), t.outcome.ticks + 1, "start pose plus one per tick");
        assert_eq!(t.outcome.barrier_width, Some(20.0));
    }
    assert_eq!(out.manifest.trials.iter().filter(|m| m.phase == "learning").count(), 5);
    let csv = fs::read_to_string(dir.path().join("metrics.csv")).unwrap();
    assert!(csv.starts_with("trial,phase,captured,bumps,ticks,aperture,construction_events\n"));
}

#[test]
fn equal_seeds_give_equal_manifest_hashes() {
    for scenario in [Scenario::SyntheticCauseEffect, Scenario::Detour, Scenario::Snap] {
        let mut cfg = ExperimentConfig::new(scenario);
        cfg.seed = 3;
        cfg.trials = Some(2);
        let (a, b) = (tempfile::tempdir().unwrap(), tempfile::tempdir().unwrap());
        let first = run(&cfg, Some(a.path())).unwrap();
        let second = run(&cfg, Some(b.path())).unwrap();
        assert_eq!(first.manifest_hash, second.manifest_hash, "{scenario:?}");
        let reread: RunManifest = read_json(a.path(), MANIFEST).unwrap();
        assert_eq!(reread, first.manifest);
    }
}

#[test]
fn manifest_config_reproduces_the_run() {
    let dir = tempfile::tempdir().unwrap();
    let first = run(&detour(4), Some(dir.path())).unwrap();
    let again = tempfile::tempdir().unwrap();
    let second = run(&first.manifest.config, Some(again.path())).unwrap();
    assert_eq!(first.manifest.artifacts, second.manifest.artifacts);
    assert_eq!(first.manifest.config_hash, second.manifest.config_hash);
}

#[test]
fn unknown_key_exits_with_config_error_naming_it() {
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("bad.toml");
    fs::write(&path, "scenario = \"detour\"\n[detour]\nbarier_width = 20.0\n").unwrap();
    let out = bin().args(["run", "--config"]).arg(&path).output().unwrap();
    assert_eq!(out.status.code(), Some(2));
    let err = String::from_utf8_lossy(&out.stderr);
    assert!(err.contains("`barier_width`") && err.contains("line 3"), "{err}");
}

#[test]
fn plot_on_empty_dir_is_missing_artifact() {
    let dir = tempfile::tempdir().unwrap();
    for f in [Figure::Path, Figure::Mhm, Figure::Traces, Figure::Matrix] {
        assert!(matches!(render(dir.path(), f), Err(HarnessError::MissingArtifact(_))));
    }
    let out = bin().args(["plot", "--figure", "path", "--out"]).arg(dir.path()).output().unwrap();
    assert_eq!(out.status.code(), Some(1));
}

fn copy_artifacts(from: &Path, to: &Path) {
    for entry in fs::read_dir(from).unwrap() {
        let entry = entry.unwrap();
        if entry.file_type().unwrap().is_file() {
            fs::copy(entry.path(), to.join(entry.file_name())).unwrap();
        }
    }
}

#[test]
fn plots_read_artifacts_only() {
    let dir = tempfile::tempdir().unwrap();
    run(&detour(1), Some(dir.path())).unwrap();
    let moved = tempfile::tempdir().unwrap();
    copy_artifacts(dir.path(), moved.path());
    for f in [Figure::Path, Figure::Mhm, Figure::Traces, Figure::Matrix] {
        let a = render(dir.path(), f).unwrap();
        assert!(a.starts_with("<svg"), "{}", f.name());
        assert_eq!(a, render(moved.path(), f).unwrap(), "{}", f.name());
    }
}

#[test]
fn cli_run_overrides_and_dump_matrix() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = dir.path().join("synthetic.toml");
    fs::write(&cfg, "scenario = \"synthetic-cause-effect\"\nseed = 1\n").unwrap();
    let out_dir = dir.path().join("run");
    let out = bin().args(["run", "--seed", "9", "--trials", "2", "--config"]).arg(&cfg).arg("--out").arg(&out_dir).output().unwrap();
    assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stderr));
    let manifest: RunManifest = read_json(&out_dir, MANIFEST).unwrap();
    assert_eq!((manifest.seed, manifest.trials.len()), (9, 2));
    let stdout = String::from_utf8_lossy(&out.stdout);
    assert!(stdout.contains("manifest sha256 "));

    let dump = bin().args(["dump-matrix", "--out"]).arg(&out_dir).output().unwrap();
    assert!(dump.status.success());
    assert_eq!(dump.stdout, fs::read(out_dir.join(MATRIX_TSV)).unwrap());
}

#[test]
fn oracle_writes_report_and_references() {
    let dir = tempfile::tempdir().unwrap();
    let out = bin().args(["oracle", "dual-inverse", "--out"]).arg(dir.path()).output().unwrap();
    assert!(out.status.success());
    let report = fs::read_to_string(dir.path().join("oracle_report.txt")).unwrap();
    assert!(report.contains("4/4 checks passed"), "{report}");
    assert!(dir.path().join("dual_inverse.tsv").exists());
}
