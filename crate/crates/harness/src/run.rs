//! Seeded scenario runs and their on-disk artifacts.

use std::collections::BTreeMap;
use std::fs;
use std::path::{Path, PathBuf};

use schemanet::cause_effect::{Relation, ReliabilityMatrix};
use schemanet::constructor::ConstructionRecord;
use schemanet::rng;
use schemanet::kernel::{JsonLines, SharedBuffer};
use schemanet::TraceRow;
use schemanet_scenarios::detour::{DetourWorld, TrialOutcome};
use schemanet_scenarios::snap::{lesion_study_observed, CaptureOutcome, SnapWorld, StudyPhase};
use schemanet_scenarios::synthetic;
use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

use crate::config::{hex, ExperimentConfig, Scenario};
use crate::error::HarnessError;

pub const ENGINE_VERSION: &str = env!("CARGO_PKG_VERSION");

pub const RESOLVED: &str = "resolved.toml";
pub const MANIFEST: &str = "manifest.json";
pub const METRICS: &str = "metrics.csv";
pub const TRACES: &str = "traces.jsonl";
pub const MATRIX: &str = "matrix.json";
pub const MATRIX_TSV: &str = "matrix.tsv";
pub const CONSTRUCTIONS: &str = "constructions.json";
pub const DETOUR_TRIALS: &str = "detour_trials.json";
pub const SNAP_TRIALS: &str = "snap_trials.json";
pub const RELATIONS: &str = "relations.json";

/// One row of `metrics.csv`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TrialMetrics {
    pub trial: usize,
    pub phase: String,
    pub captured: bool,
    pub bumps: Option<usize>,
    pub ticks: usize,
    pub aperture: Option<f64>,
    pub construction_events: usize,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Phased<T> {
    pub phase: String,
    pub index: usize,
    pub outcome: T,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RunManifest {
    pub engine_version: String,
    pub scenario: Scenario,
    pub seed: u64,
    pub config_hash: String,
    pub config: ExperimentConfig,
    pub trials: Vec<TrialMetrics>,
    pub constructions: Vec<ConstructionRecord>,
    /// File holding the final reliability matrix.
    pub matrix: String,
    /// SHA-256 of every other artifact, by file name.
    pub artifacts: BTreeMap<String, String>,
}

#[derive(Debug, Clone)]
pub struct RunOutput {
    pub dir: PathBuf,
    pub manifest: RunManifest,
    /// SHA-256 of the manifest file bytes.
    pub manifest_hash: String,
}

/// Everything a scenario produces before it is written out.
struct Collected {
    metrics: Vec<TrialMetrics>,
    constructions: Vec<ConstructionRecord>,
    matrix: ReliabilityMatrix,
    traces: Vec<u8>,
    /// Scenario-specific JSON artifact.
    detail: (&'static str, String),
}

fn sha256(bytes: &[u8]) -> String {
    hex(&Sha256::digest(bytes))
}

fn json<T: Serialize>(v: &T) -> String {
    serde_json::to_string_pretty(v).expect("artifact serializes")
}

/// Execute the configured scenario and write its artifacts under `out`
/// (falling back to the config's `out`, then `./runs/<scenario>-<seed>`).
pub fn run(cfg: &ExperimentConfig, out: Option<&Path>) -> Result<RunOutput, HarnessError> {
    let cfg = cfg.clone().resolve();
    let dir = out
        .map(Path::to_path_buf)
        .or_else(|| cfg.out.clone())
        .unwrap_or_else(|| PathBuf::from(format!("runs/{}-{}", scenario_label(cfg.scenario), cfg.seed)));
    let collected = match cfg.scenario {
        Scenario::Detour => run_detour(&cfg)?,
        Scenario::Snap => run_snap(&cfg)?,
        Scenario::SyntheticCauseEffect => run_synthetic(&cfg)?,
    };
    write_artifacts(&cfg, &dir, collected)
}

pub fn scenario_label(s: Scenario) -> &'static str {
    match s {
        Scenario::Detour => "detour",
        Scenario::Snap => "snap",
        Scenario::SyntheticCauseEffect => "synthetic-cause-effect",
    }
}

fn write_artifacts(cfg: &ExperimentConfig, dir: &Path, c: Collected) -> Result<RunOutput, HarnessError> {
    fs::create_dir_all(dir).map_err(HarnessError::io(dir))?;
    let mut metrics_csv = csv::Writer::from_writer(Vec::new());
    for m in &c.metrics {
        metrics_csv.serialize(m).expect("metrics row serializes");
    }
    let files: Vec<(&str, Vec<u8>)> = vec![
        (RESOLVED, cfg.to_toml().into_bytes()),
        (METRICS, metrics_csv.into_inner().expect("in-memory writer")),
        (TRACES, c.traces),
        (MATRIX, json(&c.matrix).into_bytes()),
        (MATRIX_TSV, c.matrix.dump().into_bytes()),
        (CONSTRUCTIONS, json(&c.constructions).into_bytes()),
        (c.detail.0, c.detail.1.into_bytes()),
    ];
    let mut artifacts = BTreeMap::new();
    for (name, bytes) in &files {
        let path = dir.join(name);
        fs::write(&path, bytes).map_err(HarnessError::io(&path))?;
        artifacts.insert(name.to_string(), sha256(bytes));
    }
    let manifest = RunManifest {
        engine_version: ENGINE_VERSION.to_string(),
        scenario: cfg.scenario,
        seed: cfg.seed,
        config_hash: cfg.hash(),
        config: cfg.clone(),
        trials: c.metrics,
        constructions: c.constructions,
        matrix: MATRIX.to_string(),
        artifacts,
    };
    let text = json(&manifest);
    let path = dir.join(MANIFEST);
    fs::write(&path, &text).map_err(HarnessError::io(&path))?;
    Ok(RunOutput { dir: dir.to_path_buf(), manifest_hash: sha256(text.as_bytes()), manifest })
}

fn run_detour(cfg: &ExperimentConfig) -> Result<Collected, HarnessError> {
    let mut w = DetourWorld::new(cfg.seed, cfg.detour.clone()).map_err(HarnessError::scenario("detour setup"))?;
    let buffer = SharedBuffer::default();
    w.attach_sink(Box::new(JsonLines(buffer.clone())));
    let mut trials: Vec<Phased<TrialOutcome>> = Vec::new();
    let mut metrics = Vec::new();
    let mut record = |w: &DetourWorld, phase: &str, index: usize, o: TrialOutcome, events_before: usize| {
        metrics.push(TrialMetrics {
            trial: metrics.len() + 1,
            phase: phase.to_string(),
            captured: o.captured,
            bumps: Some(o.bumps),
            ticks: o.ticks,
            aperture: None,
            construction_events: w.constructor.events.len() - events_before,
        });
        trials.push(Phased { phase: phase.to_string(), index, outcome: o });
    };

    // calibration runs with discovery off, so it raises no events
    let calibration = w.calibrate().map_err(HarnessError::scenario("detour calibration"))?;
    for (i, o) in calibration.into_iter().enumerate() {
        record(&w, "calibration", i + 1, o, w.constructor.events.len());
    }
    let before = w.constructor.events.len();
    let innate = w.run_innate(cfg.detour.narrow_barrier_width).map_err(HarnessError::scenario("detour innate trial"))?;
    record(&w, "innate", 1, innate, before);
    for i in 0..cfg.trials() {
        let before = w.constructor.events.len();
        let o = w.run_trial().map_err(HarnessError::scenario(format!("detour learning trial {}", i + 1)))?;
        record(&w, "learning", i + 1, o, before);
    }
    Ok(Collected {
        metrics,
        constructions: w.constructor.records.clone(),
        matrix: w.matrix.clone(),
        traces: buffer.contents(),
        detail: (DETOUR_TRIALS, json(&trials)),
    })
}

fn run_snap(cfg: &ExperimentConfig) -> Result<Collected, HarnessError> {
    let mut w = SnapWorld::new(cfg.seed, cfg.snap.clone()).map_err(HarnessError::scenario("snap setup"))?;
    let buffer = SharedBuffer::default();
    w.attach_sink(Box::new(JsonLines(buffer.clone())));
    let mut trials: Vec<Phased<CaptureOutcome>> = Vec::new();
    let mut metrics = Vec::new();
    let mut seen_events = 0;
    let mut counts: BTreeMap<&'static str, usize> = BTreeMap::new();
    let result = lesion_study_observed(&mut w, cfg.lesion, |phase, o, w| {
        let label = match phase {
            StudyPhase::Healthy => "healthy",
            StudyPhase::Probe => "probe",
            StudyPhase::Recovery => "recovery",
        };
        let index = counts.entry(label).or_default();
        *index += 1;
        let events = w.constructor.events.len();
        metrics.push(TrialMetrics {
            trial: metrics.len() + 1,
            phase: label.to_string(),
            captured: o.captured,
            bumps: None,
            ticks: o.dm.len(),
            aperture: Some(o.aperture),
            construction_events: events - seen_events,
        });
        seen_events = events;
        trials.push(Phased { phase: label.to_string(), index: *index, outcome: o.clone() });
    });
    if let Err(source) = result {
        return Err(HarnessError::Scenario { context: format!("snap trial {}", metrics.len() + 1), source });
    }
    Ok(Collected {
        metrics,
        constructions: w.constructor.records.clone(),
        matrix: w.matrix.clone(),
        traces: buffer.contents(),
        detail: (SNAP_TRIALS, json(&trials)),
    })
}

fn run_synthetic(cfg: &ExperimentConfig) -> Result<Collected, HarnessError> {
    let mut metrics = Vec::new();
    let mut traces = Vec::new();
    let mut relations: Vec<Phased<Vec<Relation>>> = Vec::new();
    let mut last = None;
    let mut offset = 0u64;
    for i in 0..cfg.trials() {
        let seed = rng::derive_seed(cfg.seed, &format!("synthetic/{i}"));
        let out = synthetic::run(seed, &cfg.synthetic, &cfg.cause_effect)
            .map_err(HarnessError::scenario(format!("synthetic stream {}", i + 1)))?;
        let ticks = cfg.synthetic.ticks;
        for t in 1..=ticks {
            for (name, series) in &out.traces {
                let row = TraceRow { tick: offset + t as u64, schema: name.clone(), port: "out".into(), values: vec![series[t]] };
                serde_json::to_writer(&mut traces, &row).expect("trace row serializes");
                traces.push(b'\n');
            }
        }
        offset += ticks as u64;
        metrics.push(TrialMetrics {
            trial: i + 1,
            phase: "stream".into(),
            captured: false,
            bumps: None,
            ticks,
            aperture: None,
            construction_events: out.relations.len(),
        });
        relations.push(Phased { phase: "stream".into(), index: i + 1, outcome: out.relations.clone() });
        last = Some(out.matrix);
    }
    let matrix = match last {
        Some(m) => m,
        None => {
            let net = synthetic::build(cfg.seed, &cfg.synthetic).map_err(HarnessError::scenario("synthetic setup"))?;
            let space = schemanet::cause_effect::CandidateSpace::from_network(
                &net,
                cfg.cause_effect.max_delay,
                cfg.cause_effect.open_candidates,
            );
            ReliabilityMatrix::new(space, cfg.cause_effect.clone())
        }
    };
    Ok(Collected { metrics, constructions: Vec::new(), matrix, traces, detail: (RELATIONS, json(&relations)) })
}

/// Read and parse a JSON artifact from a run directory.
pub fn read_json<T: for<'de> Deserialize<'de>>(dir: &Path, name: &str) -> Result<T, HarnessError> {
    let path = dir.join(name);
    let text = fs::read_to_string(&path).map_err(|_| HarnessError::MissingArtifact(path.clone()))?;
    serde_json::from_str(&text).map_err(|e| HarnessError::Malformed { path, message: e.to_string() })
}

/// Parse `traces.jsonl` from a run directory.
pub fn read_traces(dir: &Path) -> Result<Vec<TraceRow>, HarnessError> {
    let path = dir.join(TRACES);
    let text = fs::read_to_string(&path).map_err(|_| HarnessError::MissingArtifact(path.clone()))?;
    text.lines()
        .filter(|l| !l.is_empty())
        .map(|l| serde_json::from_str(l).map_err(|e| HarnessError::Malformed { path: path.clone(), message: e.to_string() }))
        .collect()
}
