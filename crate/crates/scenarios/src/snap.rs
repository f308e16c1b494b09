//! Prey-catching motor circuit: premotor burst programs, proprioceptive
//! feedback, the hypoglossal lesion, and recovery through a dormant
//! predictive/dual pair built during healthy behavior.

use rand::Rng;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use schemanet::cause_effect::{CandidateSpace, CauseEffectConfig, Relation, ReliabilityMatrix};
use schemanet::constructor::{Constructor, ConstructorConfig};
use schemanet::drives::DriveState;
use schemanet::goal::GoalSchema;
use schemanet::{rng, ActivityPattern, Emission, KernelError, Network, PortRef, PortSpec, SchemaNode, SemanticTag, TraceSink};

pub const PREMOTOR: [&str; 6] = ["LU", "HE", "DM", "LM", "GG", "HO"];
pub const RECEPTORS: [&str; 5] = ["HG_REC", "JAW_REC", "TONGUE_REC", "DISTX", "DISTY"];
pub const GOAL: &str = "G_PREY_JAW_REC";

/// Raised-cosine burst centred on `peak` with half-width `width`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Burst {
    pub peak: i64,
    pub width: i64,
    pub amp: f64,
}

impl Burst {
    pub fn at(&self, k: i64) -> f64 {
        let d = k - self.peak;
        if d.abs() < self.width {
            self.amp * 0.5 * (1.0 + (std::f64::consts::PI * d as f64 / self.width as f64).cos())
        } else {
            0.0
        }
    }

    pub fn envelope(&self, len: usize) -> Vec<f64> {
        (0..len as i64).map(|k| self.at(k)).collect()
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum Program {
    TonguePrehension,
    JawPrehension,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ProgramSpec {
    pub dm: Burst,
    pub gg: Option<Burst>,
    pub ho: Option<Burst>,
    pub lu: Option<Burst>,
    pub he: Option<Burst>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct SnapConfig {
    pub program_ticks: usize,
    pub gap_ticks: usize,
    /// Per-trial timing jitter (ticks, uniform in +-jitter).
    pub jitter: i64,
    /// Per-trial amplitude scale spread (uniform in 1 +- amp_jitter).
    pub amp_jitter: f64,
    pub tongue: ProgramSpec,
    pub jaw: ProgramSpec,
    /// Levator lag behind the depressor while the hypoglossal nerve is intact.
    pub hg_delay: i64,
    pub jaw_delay: usize,
    pub tongue_delay: usize,
    pub lunge_delay: usize,
    pub head_delay: usize,
    pub disty_lunge_gain: f64,
    pub hg_spont_amp: f64,
    pub hg_spont_period: f64,
    pub aperture_gain: f64,
    pub small_prey: f64,
    pub large_prey: f64,
    pub prey_distance: f64,
    pub goal_lr: f64,
    /// Passes over a rewarded trial's samples.
    pub goal_epochs: usize,
    pub drive_growth: f64,
    pub cause_effect: CauseEffectConfig,
    pub constructor: ConstructorConfig,
}

impl Default for SnapConfig {
    fn default() -> Self {
        let b = |peak, width, amp| Burst { peak, width, amp };
        Self {
            program_ticks: 44,
            gap_ticks: 10,
            jitter: 2,
            amp_jitter: 0.15,
            tongue: ProgramSpec { dm: b(12, 6, 0.85), gg: Some(b(17, 2, 0.95)), ho: Some(b(26, 2, 0.95)), lu: None, he: Some(b(6, 2, 0.4)) },
            jaw: ProgramSpec { dm: b(12, 6, 1.0), gg: None, ho: None, lu: Some(b(20, 2, 0.6)), he: Some(b(4, 3, 0.4)) },
            hg_delay: 4,
            jaw_delay: 3,
            tongue_delay: 2,
            lunge_delay: 2,
            head_delay: 1,
            disty_lunge_gain: 0.55,
            hg_spont_amp: 0.04,
            hg_spont_period: 25.0,
            aperture_gain: 0.25,
            small_prey: 0.3,
            large_prey: 0.5,
            prey_distance: 0.4,
            goal_lr: 0.1,
            goal_epochs: 10,
            drive_growth: 0.05,
            cause_effect: CauseEffectConfig::default(),
            constructor: ConstructorConfig {
                error_tolerance: 0.15,
                engage_on_construction: false,
                override_threshold: 1e-6,
                defer_relations: true,
                recovery_lr_scale: 10.0,
                ..ConstructorConfig::default()
            },
        }
    }
}

impl SnapConfig {
    pub fn trial_len(&self) -> usize {
        self.program_ticks + self.gap_ticks
    }
}

/// Per-trial summary with the traces needed for timing and override audits.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CaptureOutcome {
    pub program: Program,
    pub prey_size: f64,
    pub mouth_opened: bool,
    pub contact: bool,
    pub captured: bool,
    pub aperture: f64,
    pub dm_peak: usize,
    pub lm_peak: usize,
    /// Committed values by trial phase.
    pub dm: Vec<f64>,
    pub lm: Vec<f64>,
    pub jaw_rec: Vec<f64>,
    pub goal: Vec<f64>,
    /// Dual command by phase; empty until the pair exists.
    pub command: Vec<f64>,
}

impl CaptureOutcome {
    pub fn peak_lag(&self) -> i64 {
        self.lm_peak as i64 - self.dm_peak as i64
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RecoveryCurve {
    pub trials: Vec<CaptureOutcome>,
    pub first_success_trial: Option<usize>,
    pub first_success_aperture: Option<f64>,
}

fn first_argmax(v: &[f64]) -> usize {
    v.iter().enumerate().fold(0, |b, (i, x)| if *x > v[b] { i } else { b })
}

/// Aperture from peak timing: positive exactly when the levator peak trails the
/// depressor peak by at least two ticks.
pub fn aperture(gain: f64, lm_peak: usize, dm_peak: usize, dm_amp: f64) -> f64 {
    let lag = lm_peak as i64 - dm_peak as i64;
    gain * ((lag - 1).max(0) as f64) * dm_amp
}

fn scheduled(name: &str, tag: SemanticTag, modulatory: bool) -> SchemaNode {
    let mut node = SchemaNode::new(name, |ctx, params| {
        let phase = ctx.tick as i64 - params["start"][0] as i64;
        let env = &params["envelope"];
        let v = if phase >= 0 && (phase as usize) < env.len() { env[phase as usize] } else { 0.0 };
        Emission::outputs(vec![ActivityPattern::scalar(v)])
    })
    .with_output(PortSpec::output("out", 1, tag))
    .with_param("start", vec![0.0])
    .with_param("envelope", vec![]);
    if modulatory {
        node = node.with_input(PortSpec::modulatory("mod", 1, SemanticTag::Command));
    }
    node
}

fn receptor(name: &str) -> SchemaNode {
    SchemaNode::new(name, |ctx, _| Emission::outputs(vec![ctx.input("sense").clone()]))
        .with_input(PortSpec::input("sense", 1, SemanticTag::Proprioceptive))
        .with_output(PortSpec::output("out", 1, SemanticTag::Proprioceptive))
}

fn prey_schema(program_ticks: usize) -> SchemaNode {
    SchemaNode::new("PREY", move |ctx, params| {
        let phase = ctx.tick as i64 - params["start"][0] as i64;
        let size = params["size"][0];
        let v = if (0..program_ticks as i64).contains(&phase) && size > 0.0 { vec![1.0, size] } else { vec![0.0, 0.0] };
        Emission::outputs(vec![ActivityPattern::new(v).expect("finite")])
    })
    .with_output(PortSpec::output("out", 2, SemanticTag::Perceptual))
    .with_param("start", vec![0.0])
    .with_param("size", vec![0.0])
}

/// One-hot trial-phase clock used as goal context.
fn phase_clock(len: usize) -> SchemaNode {
    SchemaNode::new("INT1", move |ctx, params| {
        let phase = ctx.tick as i64 - params["start"][0] as i64;
        let mut v = vec![0.0; len];
        if (0..len as i64).contains(&phase) {
            v[phase as usize] = 1.0;
        }
        Emission::outputs(vec![ActivityPattern::new(v).expect("finite")])
    })
    .with_output(PortSpec::output("out", len, SemanticTag::Interneuron))
    .with_param("start", vec![0.0])
}

pub struct SnapWorld {
    pub cfg: SnapConfig,
    pub net: Network,
    pub matrix: ReliabilityMatrix,
    pub constructor: Constructor,
    pub goal: GoalSchema,
    pub drive: DriveState,
    pub lesioned: bool,
    /// Tuning and construction enabled.
    pub learning: bool,
    /// Cause-effect accumulation enabled.
    pub discovering: bool,
    pub trials_run: usize,
    rng: ChaCha8Rng,
}

impl SnapWorld {
    pub fn new(seed: u64, cfg: SnapConfig) -> Result<Self, KernelError> {
        let mut net = Network::new(rng::derive_seed(seed, "snap/net"));
        for name in PREMOTOR {
            net.add_schema(scheduled(name, SemanticTag::Premotor, name == "LM"))?;
        }
        for name in RECEPTORS {
            net.add_schema(receptor(name))?;
        }
        net.add_schema(prey_schema(cfg.program_ticks))?;
        net.add_schema(phase_clock(cfg.trial_len()))?;
        let mut goal = GoalSchema::new(GOAL, "PREY", "JAW_REC", 2, 1, Some(cfg.trial_len()));
        goal.lr = cfg.goal_lr;
        net.add_schema(goal.node(SemanticTag::Perceptual))?;
        net.connect(&PortRef::new("PREY", "out"), &PortRef::new(GOAL, "source"), 0)?;
        net.connect(&PortRef::new("INT1", "out"), &PortRef::new(GOAL, "ctx"), 0)?;

        let space = CandidateSpace::new(
            RECEPTORS.iter().map(|r| PortRef::new(r, "out")).collect(),
            PREMOTOR.iter().map(|c| PortRef::new(c, "out")).collect(),
            cfg.cause_effect.max_delay,
        );
        let matrix = ReliabilityMatrix::new(space, cfg.cause_effect.clone());
        let constructor = Constructor::new(cfg.constructor.clone(), rng::derive_seed(seed, "snap/constructor"))
            .with_goal("JAW_REC", PortRef::new(GOAL, "goal"));
        Ok(Self {
            drive: DriveState::hunger(1.0, 1.0, cfg.drive_growth),
            cfg,
            net,
            matrix,
            constructor,
            goal,
            lesioned: false,
            learning: true,
            discovering: true,
            trials_run: 0,
            rng: rng::stream(seed, "snap/trials"),
        })
    }

    pub fn attach_sink(&mut self, sink: Box<dyn TraceSink>) {
        self.net.attach_sink(sink);
    }

    /// Bilateral hypoglossal transection. Idempotent.
    pub fn lesion(&mut self) {
        self.lesioned = true;
    }

    pub fn program_for(&self, size: f64) -> Program {
        if size <= self.cfg.small_prey {
            Program::TonguePrehension
        } else {
            Program::JawPrehension
        }
    }

    /// Draw a prey size and run its program.
    pub fn run_random_capture(&mut self) -> Result<CaptureOutcome, KernelError> {
        let size = if self.rng.gen_bool(0.5) { self.cfg.small_prey } else { self.cfg.large_prey };
        let program = self.program_for(size);
        self.run_capture(program, size)
    }

    fn jitter_burst(&mut self, b: &Burst, shift: i64) -> Burst {
        let j = self.cfg.jitter;
        let a = self.cfg.amp_jitter;
        Burst {
            peak: b.peak + shift + self.rng.gen_range(-j..=j),
            width: b.width,
            amp: (b.amp * (1.0 + a * (2.0 * self.rng.gen::<f64>() - 1.0))).min(1.0),
        }
    }

    fn schedule(&mut self, program: Program) -> Vec<(&'static str, Vec<f64>)> {
        let spec = match program {
            Program::TonguePrehension => self.cfg.tongue.clone(),
            Program::JawPrehension => self.cfg.jaw.clone(),
        };
        let len = self.cfg.trial_len();
        let dm = self.jitter_burst(&spec.dm, 0);
        // LM shares the depressor timing; the hypoglossal loop adds its lag.
        let lag = if self.lesioned { 0 } else { self.cfg.hg_delay };
        let scale = 1.0 + self.cfg.amp_jitter * (2.0 * self.rng.gen::<f64>() - 1.0);
        let lm = Burst { peak: dm.peak + lag, width: dm.width, amp: (spec.dm.amp * scale).min(1.0) };
        let mut out = vec![("DM", dm.envelope(len)), ("LM", lm.envelope(len))];
        for (name, b) in [("GG", spec.gg), ("HO", spec.ho), ("LU", spec.lu), ("HE", spec.he)] {
            let env = match b {
                Some(b) => self.jitter_burst(&b, 0).envelope(len),
                None => vec![0.0; len],
            };
            out.push((name, env));
        }
        out
    }

    fn read(&self, schema: &str, lag: usize) -> Result<f64, KernelError> {
        Ok(self.net.read_port(&PortRef::new(schema, "out"), lag)?.get(0))
    }

    pub fn pair(&self) -> Option<(String, String)> {
        self.constructor.record_for("JAW_REC", "LM").map(|r| (r.predictive.clone(), r.dual.clone()))
    }

    fn pair_engaged(&self) -> Result<bool, KernelError> {
        match self.pair() {
            Some((_, dual)) => Ok(self.net.params(&dual)?.get("engaged").is_some_and(|v| v.first().is_some_and(|&e| e != 0.0))),
            None => Ok(false),
        }
    }

    /// One full trial: program, gap, outcome, drive update and goal tuning.
    pub fn run_capture(&mut self, program: Program, size: f64) -> Result<CaptureOutcome, KernelError> {
        let len = self.cfg.trial_len();
        let start = self.net.tick() as f64;
        for (name, env) in self.schedule(program) {
            self.net.set_param(name, "envelope", env)?;
            self.net.set_param(name, "start", vec![start])?;
        }
        for name in ["PREY", "INT1"] {
            self.net.set_param(name, "start", vec![start])?;
        }
        self.net.set_param("PREY", "size", vec![size])?;
        self.constructor.begin_trial();

        let mut dm = Vec::with_capacity(len);
        let mut lm = Vec::with_capacity(len);
        let mut jaw = Vec::with_capacity(len);
        let mut goal = Vec::with_capacity(len);
        let mut command = Vec::new();
        let mut goal_samples = Vec::new();
        let mut tongue_peak: f64 = 0.0;
        let mut lunge_peak: f64 = 0.0;

        for _ in 0..len {
            let t = self.net.tick();
            // feedback committed at t + 1
            let open = {
                let dp = first_argmax(&dm);
                let lp = first_argmax(&lm);
                !lm.is_empty() && lm[lp] > self.cfg.cause_effect.theta_act && lp as i64 - dp as i64 >= 2
            };
            let c = &self.cfg;
            let jaw_in = if open { self.read("LM", c.jaw_delay - 1)? } else { 0.0 };
            let tongue_in = (self.read("GG", c.tongue_delay - 1)? + self.read("HO", c.tongue_delay - 1)?).clamp(0.0, 1.0);
            let distx_in = self.read("LU", c.lunge_delay - 1)?;
            let disty_in = (c.disty_lunge_gain * self.read("LU", c.lunge_delay - 1)? + self.read("HE", c.head_delay - 1)?).clamp(0.0, 1.0);
            let hg_in = if self.lesioned {
                0.0
            } else {
                c.hg_spont_amp * 0.5 * (1.0 + (2.0 * std::f64::consts::PI * (t + 1) as f64 / c.hg_spont_period).sin())
            };
            for (name, v) in [("JAW_REC", jaw_in), ("TONGUE_REC", tongue_in), ("DISTX", distx_in), ("DISTY", disty_in), ("HG_REC", hg_in)] {
                self.net.set_external(&PortRef::new(name, "sense"), ActivityPattern::scalar(v))?;
            }

            let prey_now = self.net.read_port(&PortRef::new("PREY", "out"), 0)?;
            let int1_now = self.net.read_port(&PortRef::new("INT1", "out"), 0)?;
            self.net.step()?;
            if self.discovering {
                self.matrix.accumulate(&self.net)?;
            }
            if self.learning {
                let events = self.constructor.observe(&self.net, &self.matrix)?;
                self.constructor.handle(&mut self.net, &events);
            }

            dm.push(self.read("DM", 0)?);
            lm.push(self.read("LM", 0)?);
            let j = self.read("JAW_REC", 0)?;
            jaw.push(j);
            goal.push(self.net.read_port(&PortRef::new(GOAL, "goal"), 0)?.get(0));
            goal_samples.push((prey_now, int1_now, j));
            tongue_peak = tongue_peak.max(self.read("TONGUE_REC", 0)?);
            lunge_peak = lunge_peak.max(self.read("DISTX", 0)?);
            if let Some((_, dual)) = self.pair() {
                command.push(self.net.read_port(&PortRef::new(&dual, "command"), 0)?.get(0));
            }
        }

        if self.learning {
            let events = self.constructor.end_trial(&self.net);
            self.constructor.handle(&mut self.net, &events);
        }

        let dm_peak = first_argmax(&dm);
        let lm_peak = first_argmax(&lm);
        let ap = aperture(self.cfg.aperture_gain, lm_peak, dm_peak, dm[dm_peak]);
        let reach = tongue_peak + lunge_peak;
        let contact = reach >= self.cfg.prey_distance;
        let captured = ap > 0.0 && ap >= size && contact;

        self.drive = self.drive.update(if captured { 1.0 } else { 0.0 }, 0.0);
        // While a dual drives the jaw, its own output would become the target.
        if self.learning && captured && !self.pair_engaged()? {
            // each sample pairs source and context committed at t with jaw_rec at t + 1
            self.goal.load(self.net.params(GOAL)?);
            for _ in 0..self.cfg.goal_epochs {
                for (prey, int1, jaw) in &goal_samples {
                    self.goal
                        .tune(prey, Some(int1), &ActivityPattern::scalar(*jaw), true)
                        .expect("goal dims fixed at build");
                }
            }
            let mut ps = self.net.params(GOAL)?.clone();
            self.goal.store(&mut ps);
            self.net.set_param(GOAL, "map", ps["map"].clone())?;
        }
        self.trials_run += 1;
        Ok(CaptureOutcome {
            program,
            prey_size: size,
            mouth_opened: ap > 0.0,
            contact,
            captured,
            aperture: ap,
            dm_peak,
            lm_peak,
            dm,
            lm,
            jaw_rec: jaw,
            goal,
            command,
        })
    }

    /// Freeze every learnable map; the world keeps running.
    pub fn set_learning(&mut self, on: bool) -> Result<(), KernelError> {
        self.learning = on;
        if let Some((p, _)) = self.pair() {
            self.net.set_param(&p, "frozen", vec![f64::from(u8::from(!on))])?;
        }
        Ok(())
    }

    /// Recovery protocol: constructor active, one random prey per trial.
    pub fn run_recovery(&mut self, trials: usize) -> Result<RecoveryCurve, KernelError> {
        self.set_learning(true)?;
        let mut out = Vec::with_capacity(trials);
        for _ in 0..trials {
            out.push(self.run_random_capture()?);
        }
        let first = out.iter().position(|o| o.mouth_opened);
        Ok(RecoveryCurve {
            first_success_trial: first.map(|i| i + 1),
            first_success_aperture: first.map(|i| out[i].aperture),
            trials: out,
        })
    }
}

/// Full lesion study outcome.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LesionStudy {
    pub healthy: Vec<CaptureOutcome>,
    pub probe: Vec<CaptureOutcome>,
    pub recovery: RecoveryCurve,
    pub pair_built: bool,
    pub reactivated: bool,
}

impl LesionStudy {
    pub fn healthy_rate(&self) -> f64 {
        rate(&self.healthy)
    }

    pub fn probe_rate(&self) -> f64 {
        rate(&self.probe)
    }

    pub fn healthy_mean_aperture(&self) -> f64 {
        self.healthy.iter().map(|o| o.aperture).sum::<f64>() / self.healthy.len().max(1) as f64
    }

    /// Capture rate over the last `window` recovery trials.
    pub fn final_rate(&self, window: usize) -> f64 {
        let t = &self.recovery.trials;
        rate(&t[t.len().saturating_sub(window)..])
    }
}

pub fn rate(trials: &[CaptureOutcome]) -> f64 {
    trials.iter().filter(|o| o.captured).count() as f64 / trials.len().max(1) as f64
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct LesionProtocol {
    pub healthy_trials: usize,
    pub probe_trials: usize,
    pub recovery_trials: usize,
}

impl Default for LesionProtocol {
    fn default() -> Self {
        Self { healthy_trials: 40, probe_trials: 10, recovery_trials: 40 }
    }
}

pub fn lesion_study(seed: u64, cfg: SnapConfig, protocol: LesionProtocol) -> Result<LesionStudy, KernelError> {
    let mut w = SnapWorld::new(seed, cfg)?;
    lesion_study_in(&mut w, protocol)
}

pub fn lesion_study_in(w: &mut SnapWorld, protocol: LesionProtocol) -> Result<LesionStudy, KernelError> {
    lesion_study_observed(w, protocol, |_, _, _| {})
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum StudyPhase {
    Healthy,
    Probe,
    Recovery,
}

/// The lesion protocol with `observe` called after every trial.
pub fn lesion_study_observed(
    w: &mut SnapWorld,
    protocol: LesionProtocol,
    mut observe: impl FnMut(StudyPhase, &CaptureOutcome, &SnapWorld),
) -> Result<LesionStudy, KernelError> {
    let mut block = |w: &mut SnapWorld, phase, n| -> Result<Vec<CaptureOutcome>, KernelError> {
        let mut out = Vec::with_capacity(n);
        for _ in 0..n {
            let o = w.run_random_capture()?;
            observe(phase, &o, w);
            out.push(o);
        }
        Ok(out)
    };
    let healthy = block(w, StudyPhase::Healthy, protocol.healthy_trials)?;
    let pair_built = w.pair().is_some();
    w.lesion();
    w.set_learning(false)?;
    let probe = block(w, StudyPhase::Probe, protocol.probe_trials)?;
    w.set_learning(true)?;
    let trials = block(w, StudyPhase::Recovery, protocol.recovery_trials)?;
    let first = trials.iter().position(|o| o.mouth_opened);
    let recovery = RecoveryCurve {
        first_success_trial: first.map(|i| i + 1),
        first_success_aperture: first.map(|i| trials[i].aperture),
        trials,
    };
    let reactivated = !w.constructor.activations.is_empty();
    Ok(LesionStudy { healthy, probe, recovery, pair_built, reactivated })
}

/// Extraction results of the three cause-effect runs.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ExtractionRuns {
    pub tongue_only: ReliabilityMatrix,
    pub jaw_only: ReliabilityMatrix,
    pub combined: ReliabilityMatrix,
}

pub fn pairs(rel: &[Relation]) -> Vec<(String, String)> {
    let mut v: Vec<(String, String)> = rel.iter().map(|r| (r.effect.schema.clone(), r.cause.schema.clone())).collect();
    v.sort();
    v
}

/// Healthy discovery runs: tongue-only, jaw-only, and tongue then jaw.
pub fn extraction_runs(seed: u64, cfg: &SnapConfig, trials: usize) -> Result<ExtractionRuns, KernelError> {
    let run = |label: &str, programs: &[Program]| -> Result<ReliabilityMatrix, KernelError> {
        let mut w = SnapWorld::new(rng::derive_seed(seed, label), cfg.clone())?;
        w.learning = false;
        for &p in programs {
            for _ in 0..trials {
                let size = match p {
                    Program::TonguePrehension => cfg.small_prey,
                    Program::JawPrehension => cfg.large_prey,
                };
                w.run_capture(p, size)?;
            }
        }
        Ok(w.matrix)
    };
    Ok(ExtractionRuns {
        tongue_only: run("extraction/tp", &[Program::TonguePrehension])?,
        jaw_only: run("extraction/jp", &[Program::JawPrehension])?,
        combined: run("extraction/both", &[Program::TonguePrehension, Program::JawPrehension])?,
    })
}
