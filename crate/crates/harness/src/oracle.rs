//! Reference checks run independently of the main build: brute-force scans,
//! finite differences and closed forms, each reported as pass/fail with the
//! reference values it computed.

use std::collections::BTreeMap;
use std::fmt::Write as _;
use std::fs;
use std::path::Path;

use rand::{Rng, SeedableRng};
use schemanet::cause_effect::{instantaneous_c, CandidateSpace, CauseEffectConfig, ReliabilityMatrix};
use schemanet::constructor::{override_behavior, ConstructionRecord};
use schemanet::drives::DriveState;
use schemanet::dual::DualSchema;
use schemanet::map::DifferentiableMap;
use schemanet::oracle::{best_matching_lag, central_gradient, central_jacobian, max_relative_error};
use schemanet::predictive::PredictiveSchema;
use schemanet::kernel::{JsonLines, SharedBuffer};
use schemanet::{ActivityPattern, BehaviorFn, Emission, Network, PortRef, PortSpec, SchemaNode, SemanticTag, TraceRow};
use schemanet_scenarios::detour::{DetourConfig, DetourWorld};
use schemanet_scenarios::snap::{lesion_study_in, LesionProtocol, SnapConfig, SnapWorld};
use schemanet_scenarios::synthetic::{self, SyntheticConfig, MOTORS, PERCEPTS};

type Rng64 = rand_chacha::ChaCha8Rng;

use crate::error::HarnessError;

pub const REPORT: &str = "oracle_report.txt";

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Suite {
    Drive,
    CauseEffect,
    Gradient,
    DualInverse,
    Override,
    All,
}

impl Suite {
    pub const EACH: [Suite; 5] = [Suite::Drive, Suite::CauseEffect, Suite::Gradient, Suite::DualInverse, Suite::Override];

    pub fn name(self) -> &'static str {
        match self {
            Suite::Drive => "drive",
            Suite::CauseEffect => "cause-effect",
            Suite::Gradient => "gradient",
            Suite::DualInverse => "dual-inverse",
            Suite::Override => "override",
            Suite::All => "all",
        }
    }

    pub fn parse(s: &str) -> Option<Self> {
        Self::EACH.into_iter().chain([Suite::All]).find(|x| x.name() == s)
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct Check {
    pub name: String,
    pub passed: bool,
    pub detail: String,
}

#[derive(Debug, Clone, PartialEq, Default)]
pub struct OracleReport {
    pub checks: Vec<Check>,
    /// Reference artifacts computed by the oracles, by file name.
    pub references: BTreeMap<String, String>,
}

impl OracleReport {
    pub fn passed(&self) -> bool {
        self.checks.iter().all(|c| c.passed)
    }

    fn check(&mut self, name: &str, passed: bool, detail: impl Into<String>) {
        self.checks.push(Check { name: name.to_string(), passed, detail: detail.into() });
    }

    fn merge(&mut self, other: OracleReport) {
        self.checks.extend(other.checks);
        self.references.extend(other.references);
    }

    /// Write the rendered report and every reference file into `dir`.
    pub fn write(&self, dir: &Path) -> Result<(), HarnessError> {
        fs::create_dir_all(dir).map_err(HarnessError::io(dir))?;
        let report = self.render();
        for (name, body) in std::iter::once((REPORT, &report)).chain(self.references.iter().map(|(k, v)| (k.as_str(), v))) {
            let path = dir.join(name);
            fs::write(&path, body).map_err(HarnessError::io(&path))?;
        }
        Ok(())
    }

    pub fn render(&self) -> String {
        let mut s = String::new();
        for c in &self.checks {
            let _ = writeln!(s, "{} {}: {}", if c.passed { "PASS" } else { "FAIL" }, c.name, c.detail);
        }
        let n = self.checks.iter().filter(|c| c.passed).count();
        let _ = writeln!(s, "{n}/{} checks passed", self.checks.len());
        s
    }
}

pub fn run_suite(suite: Suite) -> OracleReport {
    match suite {
        Suite::Drive => drive_suite(),
        Suite::CauseEffect => cause_effect_suite(),
        Suite::Gradient => gradient_suite(),
        Suite::DualInverse => dual_inverse_suite(),
        Suite::Override => override_suite(),
        Suite::All => {
            let mut r = OracleReport::default();
            for s in Suite::EACH {
                r.merge(run_suite(s));
            }
            r
        }
    }
}

// ---------------------------------------------------------------------------
// drive

/// Closed-form one-tick drive update, written out independently.
fn drive_reference(value: f64, max: f64, growth: f64, reduction: f64, incentive: f64) -> f64 {
    let headroom = (max - value).abs();
    (value + growth * headroom - reduction * value.abs() + incentive * headroom).clamp(0.0, max)
}

fn drive_suite() -> OracleReport {
    let mut r = OracleReport::default();
    let at_ceiling = DriveState::hunger(1.0, 1.0, 0.1).update(0.0, 0.0).value;
    r.check("drive fixed point at ceiling", at_ceiling == 1.0, format!("d = {at_ceiling}"));
    let from_empty = DriveState::hunger(0.0, 1.0, 0.1).update(0.0, 0.0).value;
    r.check("drive growth from empty", from_empty == 0.1, format!("d = {from_empty}, expected 0.1"));
    let sated = DriveState::hunger(0.6, 1.0, 0.1).update(1.0, 0.0).value;
    let expect = drive_reference(0.6, 1.0, 0.1, 1.0, 0.0);
    r.check("drive reduction on capture", sated == expect, format!("d = {sated}, closed form {expect}"));

    let mut rng = Rng64::seed_from_u64(71);
    let (mut worst_gap, mut bounded, mut monotone) = (0.0f64, true, true);
    for _ in 0..500 {
        let max = rng.gen_range(0.5..3.0);
        let growth = rng.gen_range(0.01..0.99);
        let mut d = DriveState::hunger(rng.gen_range(0.0..max), max, growth);
        for _ in 0..100 {
            let (red, inc) = (rng.gen_range(-2.0..2.0), rng.gen_range(-2.0..2.0));
            let next = d.update(red, inc);
            worst_gap = worst_gap.max((next.value - drive_reference(d.value, max, growth, red, inc)).abs());
            bounded &= (0.0..=max).contains(&next.value);
            let more = d.update(0.0, inc.abs() + 0.1).value;
            monotone &= more >= d.update(0.0, inc.abs()).value;
            d = next;
        }
    }
    r.check("drive matches closed form", worst_gap == 0.0, format!("max |d - ref| = {worst_gap:e} over 50000 ticks"));
    r.check("drive stays in [0, d_max]", bounded, "500 random sequences of 100 ticks");
    r.check("drive monotone in incentive", monotone, "a = 0, increasing I");
    r
}

// ---------------------------------------------------------------------------
// cause-effect

/// Offline scan of every (effect, cause) pair of the synthetic world: a pair is
/// related when the effect reproduces the cause exactly on most active ticks at
/// some lag.
pub fn brute_force_relations(traces: &[(String, Vec<f64>)], max_lag: usize) -> Vec<(String, String, usize)> {
    let get = |n: &str| &traces.iter().find(|(k, _)| k == n).expect("schema traced").1;
    let mut found = Vec::new();
    for e in PERCEPTS {
        for c in MOTORS {
            let (ev, cv) = (get(e), get(c));
            let lag = best_matching_lag(ev, cv, max_lag, 0.05);
            let active = cv.iter().filter(|v| v.abs() > 0.05).count();
            let hits = (lag..ev.len()).filter(|&t| cv[t - lag].abs() > 0.05 && (ev[t] - cv[t - lag]).abs() < 1e-12).count();
            if hits * 10 > active * 9 {
                found.push((e.to_string(), c.to_string(), lag));
            }
        }
    }
    found.sort();
    found
}

pub const MONTE_CARLO_SEEDS: u64 = 20;

fn cause_effect_suite() -> OracleReport {
    let mut r = OracleReport::default();
    let ce = CauseEffectConfig::default();

    // closed forms on one pair
    let a = ActivityPattern::scalar(0.4);
    let zero = ActivityPattern::scalar(0.0);
    let both = instantaneous_c(&a, &a, ce.alpha, ce.theta_act);
    let lone = instantaneous_c(&zero, &a, ce.alpha, ce.theta_act);
    let silent = instantaneous_c(&zero, &zero, ce.alpha, ce.theta_act);
    r.check("c(equal active) = 1", both == 1.0, format!("{both}"));
    r.check("c(lone cause) = -alpha a^2", (lone + ce.alpha * 0.16).abs() < 1e-15, format!("{lone}"));
    r.check("c(both silent) = 0", silent == 0.0, format!("{silent}"));

    let pair = CandidateSpace::new(vec![PortRef::new("E", "out")], vec![PortRef::new("C", "out")], 0);
    let mut m = ReliabilityMatrix::new(pair.clone(), ce.clone());
    let n = 250;
    for _ in 0..n {
        m.accumulate_with(|_, _| Ok(a.clone())).expect("reader");
    }
    let closed = n as f64 * ce.beta;
    r.check(
        "constant co-activation r = n beta",
        (m.get(0, 0, 0) - closed).abs() < 1e-12,
        format!("r = {}, closed form {closed}", m.get(0, 0, 0)),
    );
    let mut quiet = ReliabilityMatrix::new(pair, ce.clone());
    for _ in 0..n {
        quiet.accumulate_with(|_, _| Ok(zero.clone())).expect("reader");
    }
    r.check("symmetric silence keeps r = 0", quiet.get(0, 0, 0) == 0.0, format!("r = {}", quiet.get(0, 0, 0)));

    // planted delays, Monte Carlo over seeds
    let cfg = SyntheticConfig::default();
    let planted = vec![("ONE".to_string(), "B".to_string(), cfg.delay_one), ("TWO".to_string(), "C".to_string(), cfg.delay_two)];
    let (mut false_pos, mut missed, mut oracle_disagrees, mut worst_offline) = (0, 0, 0, 0.0f64);
    let mut nested = true;
    let mut reference = String::from("seed\teffect\tcause\ttau\n");
    for seed in 0..MONTE_CARLO_SEEDS {
        let out = synthetic::run(seed, &cfg, &ce).expect("synthetic run");
        let mut got: Vec<(String, String, usize)> =
            out.relations.iter().map(|x| (x.effect.schema.clone(), x.cause.schema.clone(), x.tau)).collect();
        got.sort();
        let oracle = brute_force_relations(&out.traces, ce.max_delay);
        for (e, c, t) in &oracle {
            let _ = writeln!(reference, "{seed}\t{e}\t{c}\t{t}");
        }
        oracle_disagrees += usize::from(oracle != planted);
        false_pos += got.iter().filter(|x| !planted.contains(x)).count();
        missed += planted.iter().filter(|x| !got.contains(x)).count();
        worst_offline = worst_offline.max(offline_gap(&out.matrix, &out.traces, &ce));
        let mut prev: Option<usize> = None;
        for k in 0..20 {
            let count = out.matrix.extract_above(k as f64 * 0.25).len();
            nested &= prev.is_none_or(|p| count <= p);
            prev = Some(count);
        }
    }
    r.check(
        "brute-force scan recovers planted layout",
        oracle_disagrees == 0,
        format!("{oracle_disagrees}/{MONTE_CARLO_SEEDS} seeds disagree"),
    );
    r.check("no false extractions", false_pos == 0, format!("{false_pos} false over {MONTE_CARLO_SEEDS} seeds"));
    r.check("no missed planted relations", missed == 0, format!("{missed} missed over {MONTE_CARLO_SEEDS} seeds"));
    r.check("online equals offline sum", worst_offline < 1e-9, format!("max |r_online - r_offline| = {worst_offline:e}"));
    r.check("raising threshold never adds relations", nested, "thresholds 0..5 step 0.25");
    r.references.insert("cause_effect_reference.tsv".into(), reference);
    r
}

/// Largest difference between the matrix and beta times the offline sum of
/// instantaneous scores over the recorded traces.
fn offline_gap(m: &ReliabilityMatrix, traces: &[(String, Vec<f64>)], ce: &CauseEffectConfig) -> f64 {
    let get = |p: &PortRef| &traces.iter().find(|(k, _)| *k == p.schema).expect("schema traced").1;
    let mut worst = 0.0f64;
    for (e, ep) in m.space.effects.iter().enumerate() {
        for (c, cp) in m.space.causes.iter().enumerate() {
            for (d, &tau) in m.space.delays.iter().enumerate() {
                let (ev, cv) = (get(ep), get(cp));
                let mut sum = 0.0;
                for t in 1..ev.len() {
                    let lagged = if t >= tau { cv[t - tau] } else { 0.0 };
                    sum += instantaneous_c(&ActivityPattern::scalar(ev[t]), &ActivityPattern::scalar(lagged), ce.alpha, ce.theta_act);
                }
                worst = worst.max((m.get(e, c, d) - ce.beta * sum).abs());
            }
        }
    }
    worst
}

// ---------------------------------------------------------------------------
// gradients

pub const PROBES: usize = 100;
pub const GRADIENT_TOLERANCE: f64 = 1e-4;
/// Central-difference step. At 1e-6 round-off alone reaches 1e-4 relative on
/// near-zero entries of the hidden-layer Jacobian.
const STEP: f64 = 1e-5;
const FLOOR: f64 = 1e-6;

/// Map structures in use: generic blocks, a hidden-layer variant, and the
/// raster-sized forward, inverse and goal maps of the detour pair.
pub fn map_structures() -> Vec<(String, DifferentiableMap)> {
    let mut rng = Rng64::seed_from_u64(11);
    let mut v = vec![
        ("scalar [1,1]->1".to_string(), DifferentiableMap::random(&[1, 1], 1, None, 1.0, &mut rng)),
        ("blocks [3,2]->4".to_string(), DifferentiableMap::random(&[3, 2], 4, None, 1.0, &mut rng)),
        ("hidden [5,2,3]->5 h6".to_string(), DifferentiableMap::random(&[5, 2, 3], 5, Some(6), 1.0, &mut rng)),
    ];
    let n = DetourConfig::default().bins;
    v.push((format!("raster [{n},{n},{n}]->{n}"), DifferentiableMap::random(&[n, n, n], n, None, 0.1, &mut rng)));
    v.push((format!("goal [{n}]->{n}"), DifferentiableMap::random(&[n], n, None, 0.1, &mut rng)));
    v
}

/// Worst relative error of the analytic input Jacobian and parameter
/// gradient against central differences over `PROBES` random points. Maps with
/// many parameters are checked along random directions.
pub fn gradient_error(map: &DifferentiableMap, seed: u64) -> f64 {
    let mut rng = Rng64::seed_from_u64(seed);
    let n = map.in_total();
    let small = map.params().len() <= 400;
    let mut worst = 0.0f64;
    let dir_err = |a: f64, b: f64| (a - b).abs() / a.abs().max(b.abs()).max(FLOOR);
    for _ in 0..PROBES {
        let x: Vec<f64> = (0..n).map(|_| rng.gen_range(-1.0..1.0)).collect();
        let v: Vec<f64> = (0..map.out_dim()).map(|_| rng.gen_range(-1.0..1.0)).collect();
        let fw = map.forward(&x);
        let theta = map.params().to_vec();
        let loss = |p: &[f64], x: &[f64]| {
            let mut m = map.clone();
            m.set_params(p.to_vec());
            m.eval(x).iter().zip(&v).map(|(a, b)| a * b).sum::<f64>()
        };
        if small {
            let num = central_jacobian(|p| map.eval(p), &x, STEP);
            for (a, b) in map.input_jacobian(&fw).iter().zip(&num) {
                worst = worst.max(max_relative_error(a, b, FLOOR));
            }
            let pnum = central_gradient(|p| loss(p, &x), &theta, STEP);
            worst = worst.max(max_relative_error(&map.param_vjp(&fw, &v), &pnum, FLOOR));
        } else {
            let dx: Vec<f64> = (0..n).map(|_| rng.gen_range(-1.0..1.0)).collect();
            let plus: Vec<f64> = x.iter().zip(&dx).map(|(a, b)| a + STEP * b).collect();
            let minus: Vec<f64> = x.iter().zip(&dx).map(|(a, b)| a - STEP * b).collect();
            let num = (loss(&theta, &plus) - loss(&theta, &minus)) / (2.0 * STEP);
            let ana: f64 = map.input_vjp(&fw, &v).iter().zip(&dx).map(|(a, b)| a * b).sum();
            worst = worst.max(dir_err(ana, num));

            let dp: Vec<f64> = (0..theta.len()).map(|_| rng.gen_range(-1.0..1.0)).collect();
            let tp: Vec<f64> = theta.iter().zip(&dp).map(|(a, b)| a + STEP * b).collect();
            let tm: Vec<f64> = theta.iter().zip(&dp).map(|(a, b)| a - STEP * b).collect();
            let num = (loss(&tp, &x) - loss(&tm, &x)) / (2.0 * STEP);
            let ana: f64 = map.param_vjp(&fw, &v).iter().zip(&dp).map(|(a, b)| a * b).sum();
            worst = worst.max(dir_err(ana, num));
        }
    }
    worst
}

fn gradient_suite() -> OracleReport {
    let mut r = OracleReport::default();
    let mut table = String::from("structure\tmax_relative_error\n");
    for (i, (name, map)) in map_structures().into_iter().enumerate() {
        let err = gradient_error(&map, 100 + i as u64);
        let _ = writeln!(table, "{name}\t{err:.3e}");
        r.check(&format!("gradient {name}"), err < GRADIENT_TOLERANCE, format!("max relative error {err:.3e} at {PROBES} probes"));
    }
    r.references.insert("gradient_errors.tsv".into(), table);
    r
}

// ---------------------------------------------------------------------------
// distal learning on a scalar plant

pub const PLANT_GAIN: f64 = 2.0;
pub const DISTAL_STEPS: usize = 2000;
pub const DISTAL_TOLERANCE: f64 = 1e-3;

/// Forward model of `effect(t+1) = gain * command(t)` trained on random commands.
fn scalar_forward_model(seed: u64, gain: f64) -> PredictiveSchema {
    let mut rng = Rng64::seed_from_u64(seed);
    let map = DifferentiableMap::random(&[1, 1], 1, None, 0.01, &mut rng);
    let mut p = PredictiveSchema::new("P", "X", "Y", None, map, 1);
    let mut effect = ActivityPattern::scalar(0.0);
    for _ in 0..3000 {
        let u = ActivityPattern::scalar(rng.gen_range(-0.4..0.4));
        p.predict(&effect, &u, None).expect("scalar dims");
        effect = ActivityPattern::scalar(gain * u.get(0));
        p.tune(&effect).expect("scalar dims");
    }
    p
}

/// Command the inverse model settles on for `goal`, trained only through the
/// forward model's transported error.
pub fn distal_command(goal: f64, steps: usize) -> f64 {
    let p = scalar_forward_model(4, PLANT_GAIN);
    let mut rng = Rng64::seed_from_u64(17);
    let map = DifferentiableMap::random(&[1, 1], 1, None, 0.01, &mut rng);
    let mut d = DualSchema::new("D", "X", "Y", None, map, 1);
    let g = ActivityPattern::scalar(goal);
    let mut effect = ActivityPattern::scalar(0.0);
    let mut u = ActivityPattern::scalar(0.0);
    for _ in 0..steps {
        u = d.emit(&effect, &g, None, Some(&p)).expect("scalar dims");
        effect = ActivityPattern::scalar(PLANT_GAIN * u.get(0));
        d.tune(&effect, Some(&p)).expect("paired");
    }
    u.get(0)
}

fn dual_inverse_suite() -> OracleReport {
    let mut r = OracleReport::default();
    let mut table = String::from("goal\tcommand\tanalytic\n");
    for goal in [-0.6, -0.2, 0.3, 0.7] {
        let u = distal_command(goal, DISTAL_STEPS);
        let analytic = goal / PLANT_GAIN;
        let _ = writeln!(table, "{goal}\t{u:.6}\t{analytic}");
        r.check(
            &format!("distal inverse goal {goal}"),
            (u - analytic).abs() < DISTAL_TOLERANCE,
            format!("command {u:.6}, analytic {analytic} after {DISTAL_STEPS} steps"),
        );
    }
    r.references.insert("dual_inverse.tsv".into(), table);
    r
}

// ---------------------------------------------------------------------------
// modulatory override

/// Result of auditing adapted schemas against their dual commands in a trace.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub struct OverrideAudit {
    /// Ticks where the command was active and the output was compared.
    pub active_ticks: usize,
    pub mismatches: usize,
}

/// For every construction, wherever the dual's committed command at tick t-1 is
/// active, the adapted cause output committed at tick t must equal it.
pub fn audit_override(rows: &[TraceRow], records: &[ConstructionRecord], threshold: f64) -> OverrideAudit {
    let mut index: BTreeMap<(&str, &str, u64), &[f64]> = BTreeMap::new();
    for r in rows {
        index.insert((r.schema.as_str(), r.port.as_str(), r.tick), &r.values);
    }
    let mut audit = OverrideAudit::default();
    for rec in records {
        let cause = &rec.trigger.cause;
        for r in rows.iter().filter(|r| r.schema == rec.dual && r.port == "command") {
            let cmd = ActivityPattern::new(r.values.clone()).expect("finite trace");
            if cmd.mean_abs() <= threshold {
                continue;
            }
            if let Some(out) = index.get(&(cause.schema.as_str(), cause.port.as_str(), r.tick + 1)) {
                audit.active_ticks += 1;
                audit.mismatches += usize::from(*out != r.values.as_slice());
            }
        }
    }
    audit
}

fn parse_rows(bytes: &[u8]) -> Vec<TraceRow> {
    String::from_utf8_lossy(bytes).lines().map(|l| serde_json::from_str(l).expect("trace row")).collect()
}

/// Both branches of the override law on a one-schema network, for random inputs.
fn override_law_samples(threshold: f64, samples: usize) -> usize {
    let mut net = Network::new(0);
    let node = SchemaNode::new("X", |ctx, _| Emission::outputs(vec![ctx.input("sense").clone()]))
        .with_input(PortSpec::input("sense", 3, SemanticTag::Generic))
        .with_input(PortSpec::modulatory("mod", 3, SemanticTag::Command))
        .with_output(PortSpec::output("out", 3, SemanticTag::Motor));
    let original: BehaviorFn = node.behavior.clone();
    net.add_schema(node).expect("fresh network");
    net.replace_behavior("X", override_behavior(original, "mod".into(), 0, threshold)).expect("schema exists");
    let (sense_port, mod_port, out) = (PortRef::new("X", "sense"), PortRef::new("X", "mod"), PortRef::new("X", "out"));
    let mut rng = Rng64::seed_from_u64(19);
    let mut bad = 0;
    for _ in 0..samples {
        let sense = ActivityPattern::new((0..3).map(|_| rng.gen_range(-1.0..1.0)).collect()).expect("finite");
        let scale = if rng.gen_bool(0.5) { threshold * 0.5 } else { 1.0 };
        let m = ActivityPattern::new((0..3).map(|_| scale * rng.gen_range(-1.0..1.0)).collect()).expect("finite");
        net.set_external(&sense_port, sense.clone()).expect("free input");
        net.set_external(&mod_port, m.clone()).expect("free input");
        net.step().expect("tick");
        let got = net.read_port(&out, 0).expect("committed output");
        let expect = if m.mean_abs() > threshold { m } else { sense };
        bad += usize::from(got != expect);
    }
    bad
}

fn override_suite() -> OracleReport {
    let mut r = OracleReport::default();
    let bad = override_law_samples(0.05, 2000);
    r.check("override law on random inputs", bad == 0, format!("{bad} of 2000 samples violate it"));

    let cfg = DetourConfig::default();
    let threshold = cfg.constructor.override_threshold;
    let mut w = DetourWorld::new(0, cfg).expect("detour world");
    let buf = SharedBuffer::default();
    w.attach_sink(Box::new(JsonLines(buf.clone())));
    w.calibrate().expect("calibration");
    for _ in 0..3 {
        w.run_trial().expect("detour trial");
    }
    let a = audit_override(&parse_rows(&buf.contents()), &w.constructor.records, threshold);
    r.check(
        "override audit, detour SIDE",
        a.mismatches == 0 && a.active_ticks > 0,
        format!("{} active ticks, {} mismatches", a.active_ticks, a.mismatches),
    );

    let cfg = SnapConfig::default();
    let threshold = cfg.constructor.override_threshold;
    let mut w = SnapWorld::new(0, cfg).expect("snap world");
    let buf = SharedBuffer::default();
    w.attach_sink(Box::new(JsonLines(buf.clone())));
    lesion_study_in(&mut w, LesionProtocol { recovery_trials: 20, ..LesionProtocol::default() }).expect("lesion study");
    let a = audit_override(&parse_rows(&buf.contents()), &w.constructor.records, threshold);
    r.check(
        "override audit, snap LM",
        a.mismatches == 0 && a.active_ticks > 0,
        format!("{} active ticks, {} mismatches", a.active_ticks, a.mismatches),
    );
    r
}
