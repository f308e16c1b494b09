//! Detour world: a frog-like agent, one prey and a pailing fence on a plane.
//!
//! Perception and the innate motor repertoire are computed by the world and
//! fed to pass-through schemas; the heading-map integration, goal, and every
//! constructed predictive/dual pair run inside the network.

use std::f64::consts::PI;

use rand::Rng;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use schemanet::cause_effect::{CandidateSpace, CauseEffectConfig, ReliabilityMatrix};
use schemanet::constructor::{Constructor, ConstructorConfig};
use schemanet::drives::DriveState;
use schemanet::goal::GoalSchema;
use schemanet::{rng, ActivityPattern, Emission, KernelError, Network, PatternError, PortRef, PortSpec, SchemaNode, SemanticTag, TraceSink};

pub const GOAL: &str = "G_PREY_MHM";
pub const MOTORS: [&str; 5] = ["FORWARD", "SIDE", "ORIENT", "SNAP", "BACKUP"];

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Pose {
    pub x: f64,
    pub y: f64,
    /// World angle of the body axis, radians; pi/2 faces +y.
    pub heading: f64,
}

/// Horizontal pailing fence: transparent to vision, solid to the body.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Fence {
    pub y: f64,
    pub x_min: f64,
    pub x_max: f64,
}

impl Fence {
    pub fn centred(y: f64, width: f64) -> Self {
        Self { y, x_min: -width / 2.0, x_max: width / 2.0 }
    }

    /// Parameter along `from -> to` where the path meets the fence, if it does.
    fn crossing(&self, from: (f64, f64), to: (f64, f64)) -> Option<f64> {
        let dy = to.1 - from.1;
        if dy.abs() < 1e-12 {
            return None;
        }
        let s = (self.y - from.1) / dy;
        if !(0.0..=1.0).contains(&s) {
            return None;
        }
        let x = from.0 + s * (to.0 - from.0);
        (self.x_min..=self.x_max).contains(&x).then_some(s)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum Side {
    Left,
    Right,
}

impl Side {
    fn sign(self) -> f64 {
        match self {
            Side::Left => 1.0,
            Side::Right => -1.0,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub enum MotorCommand {
    Forward,
    Sidestep(Side),
    Orient(Side),
    Snap,
    Backup,
}

/// Which rule produced a command.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum Drive {
    Snap,
    Backup,
    BumpAvoid,
    Heading,
    Modulated,
    Frontal,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct DetourConfig {
    pub bins: usize,
    pub prey_sigma_bins: f64,
    pub prey_truncate_bins: f64,
    pub prey_distance_scale: f64,
    pub repellent_depth: f64,
    pub side_sigma_bins: f64,
    /// Smallest heading-map peak that counts as a lobe.
    pub lobe_threshold: f64,
    /// A lobe this strong takes over from an active sidestep modulation.
    pub release_threshold: f64,
    pub forward_step: f64,
    pub side_step: f64,
    pub backup_step: f64,
    pub orient_step_deg: f64,
    pub orient_tolerance_deg: f64,
    /// Without a lobe the agent walks straight while the prey is inside this cone.
    pub frontal_cone_deg: f64,
    pub snap_radius: f64,
    pub snap_half_angle_deg: f64,
    /// Clearance kept from the fence after a collision.
    pub pushback: f64,
    pub start: Pose,
    pub prey: (f64, f64),
    pub fence_y: f64,
    /// Wide barrier used for learning trials; the narrow one tests innate detours.
    pub barrier_width: f64,
    pub narrow_barrier_width: f64,
    /// Ticks at trial start with the prey in view and no movement.
    pub settle_ticks: usize,
    pub trial_ticks: usize,
    pub innate_trial_ticks: usize,
    pub gap_ticks: usize,
    pub calibration_trials: usize,
    pub calibration_radius: (f64, f64),
    pub goal_lr: f64,
    pub goal_epochs: usize,
    pub drive_growth: f64,
    pub cause_effect: CauseEffectConfig,
    pub constructor: ConstructorConfig,
}

impl Default for DetourConfig {
    fn default() -> Self {
        Self {
            bins: 64,
            prey_sigma_bins: 3.0,
            prey_truncate_bins: 8.0,
            prey_distance_scale: 20.0,
            repellent_depth: 1.2,
            side_sigma_bins: 2.0,
            lobe_threshold: 0.05,
            release_threshold: 0.2,
            forward_step: 4.0,
            side_step: 3.0,
            backup_step: 2.0,
            orient_step_deg: 15.0,
            orient_tolerance_deg: 7.5,
            frontal_cone_deg: 30.0,
            snap_radius: 5.0,
            snap_half_angle_deg: 30.0,
            pushback: 0.5,
            start: Pose { x: 0.0, y: 0.0, heading: PI / 2.0 },
            prey: (0.0, 30.0),
            fence_y: 10.0,
            barrier_width: 20.0,
            narrow_barrier_width: 10.0,
            settle_ticks: 3,
            trial_ticks: 20,
            innate_trial_ticks: 200,
            gap_ticks: 9,
            calibration_trials: 6,
            calibration_radius: (15.0, 30.0),
            goal_lr: 0.05,
            goal_epochs: 5,
            drive_growth: 0.05,
            cause_effect: CauseEffectConfig { theta_act: 0.01, beta: 0.5, max_delay: 2, ..CauseEffectConfig::default() },
            constructor: ConstructorConfig {
                override_threshold: 0.01,
                replay_epochs: 20,
                dual_lr: 0.002,
                predictive_lr: 0.02,
                defer_relations: true,
                ..ConstructorConfig::default()
            },
        }
    }
}

impl DetourConfig {
    fn bin_width(&self) -> f64 {
        2.0 * PI / self.bins as f64
    }

    /// Egocentric bearing of bin `i`; bin `bins / 2` is straight ahead, left positive.
    pub fn bin_bearing(&self, i: usize) -> f64 {
        -PI + i as f64 * self.bin_width()
    }

    pub fn bearing_bin(&self, bearing: f64) -> usize {
        ((wrap(bearing) + PI) / self.bin_width()).round() as usize % self.bins
    }

    pub fn side_pattern(&self, side: Side) -> ActivityPattern {
        let centre = side.sign() * PI / 2.0;
        let v = (0..self.bins)
            .map(|i| {
                let d = wrap(self.bin_bearing(i) - centre) / self.bin_width();
                (-d * d / (2.0 * self.side_sigma_bins * self.side_sigma_bins)).exp()
            })
            .collect();
        ActivityPattern::new(v).expect("finite")
    }
}

pub fn wrap(a: f64) -> f64 {
    let mut a = (a + PI).rem_euclid(2.0 * PI) - PI;
    if a <= -PI {
        a += 2.0 * PI;
    }
    a
}

fn bearing_to(pose: &Pose, p: (f64, f64)) -> f64 {
    wrap((p.1 - pose.y).atan2(p.0 - pose.x) - pose.heading)
}

fn dist(a: (f64, f64), b: (f64, f64)) -> f64 {
    ((a.0 - b.0).powi(2) + (a.1 - b.1).powi(2)).sqrt()
}

/// Sensory patterns for one tick.
#[derive(Debug, Clone, PartialEq)]
pub struct Percept {
    pub prey: ActivityPattern,
    pub sor: ActivityPattern,
    pub tactile: ActivityPattern,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct WorldState {
    pub pose: Pose,
    pub prey: Option<(f64, f64)>,
    pub fence: Option<Fence>,
    pub contact: bool,
    pub captured: bool,
    pub bumps: usize,
    pub ticks: usize,
}

impl WorldState {
    pub fn new(cfg: &DetourConfig, fence: Option<Fence>) -> Self {
        Self { pose: cfg.start, prey: Some(cfg.prey), fence, contact: false, captured: false, bumps: 0, ticks: 0 }
    }

    pub fn perceive(&self, cfg: &DetourConfig) -> Percept {
        let n = cfg.bins;
        let mut prey = vec![0.0; n];
        if let Some(p) = self.prey {
            let b = bearing_to(&self.pose, p);
            let amp = 1.0 / (1.0 + dist((self.pose.x, self.pose.y), p) / cfg.prey_distance_scale);
            for (i, v) in prey.iter_mut().enumerate() {
                let off = wrap(cfg.bin_bearing(i) - b) / cfg.bin_width();
                if off.abs() <= cfg.prey_truncate_bins {
                    *v = amp * (-off * off / (2.0 * cfg.prey_sigma_bins * cfg.prey_sigma_bins)).exp();
                }
            }
        }
        let mut sor = vec![0.0; n];
        if let Some(f) = self.fence {
            let a = bearing_to(&self.pose, (f.x_min, f.y));
            let b = bearing_to(&self.pose, (f.x_max, f.y));
            // a segment subtends the shorter arc between its ends
            let span = wrap(b - a);
            let (lo, width) = if span >= 0.0 { (a, span) } else { (b, -span) };
            for (i, v) in sor.iter_mut().enumerate() {
                if wrap(cfg.bin_bearing(i) - lo).rem_euclid(2.0 * PI) <= width {
                    *v = cfg.repellent_depth;
                }
            }
            if sor.iter().all(|v| *v == 0.0) {
                sor[cfg.bearing_bin(lo + width / 2.0)] = cfg.repellent_depth;
            }
        }
        Percept {
            prey: ActivityPattern::new(prey).expect("finite"),
            sor: ActivityPattern::new(sor).expect("finite"),
            tactile: ActivityPattern::scalar(if self.contact { 1.0 } else { 0.0 }),
        }
    }

    fn obstructed(&self, to: (f64, f64)) -> bool {
        self.fence.is_some_and(|f| f.crossing((self.pose.x, self.pose.y), to).is_some())
    }

    pub fn can_snap(&self, cfg: &DetourConfig) -> bool {
        self.prey.is_some_and(|p| {
            dist((self.pose.x, self.pose.y), p) <= cfg.snap_radius
                && bearing_to(&self.pose, p).abs() <= cfg.snap_half_angle_deg.to_radians()
                && !self.obstructed(p)
        })
    }

    /// Translate by `step` along world angle `angle`, stopping short of the fence.
    fn translate(&mut self, angle: f64, step: f64, pushback: f64) {
        let from = (self.pose.x, self.pose.y);
        let to = (from.0 + step * angle.cos(), from.1 + step * angle.sin());
        match self.fence.and_then(|f| f.crossing(from, to)) {
            Some(s) => {
                let reach = (s * step - pushback).max(0.0);
                self.pose.x = from.0 + reach * angle.cos();
                self.pose.y = from.1 + reach * angle.sin();
                // never rest within the clearance band
                if let Some(f) = self.fence {
                    if (self.pose.y - f.y).abs() < pushback && (f.x_min..=f.x_max).contains(&self.pose.x) {
                        self.pose.y = f.y - pushback * (f.y - from.1).signum();
                    }
                }
                self.contact = true;
                self.bumps += 1;
            }
            None => {
                self.pose.x = to.0;
                self.pose.y = to.1;
            }
        }
    }

    pub fn act(&mut self, cfg: &DetourConfig, cmd: MotorCommand) {
        self.contact = false;
        let h = self.pose.heading;
        match cmd {
            MotorCommand::Forward => self.translate(h, cfg.forward_step, cfg.pushback),
            MotorCommand::Backup => self.translate(h + PI, cfg.backup_step, cfg.pushback),
            MotorCommand::Sidestep(s) => self.translate(h + s.sign() * PI / 2.0, cfg.side_step, cfg.pushback),
            MotorCommand::Orient(s) => self.pose.heading = wrap(h + s.sign() * cfg.orient_step_deg.to_radians()),
            MotorCommand::Snap => {
                if self.can_snap(cfg) {
                    self.captured = true;
                    self.prey = None;
                }
            }
        }
        self.ticks += 1;
    }
}

/// Rectified sum of attractant, repellent and any modulatory contribution.
pub fn integrate_mhm(prey: &ActivityPattern, sor: &ActivityPattern, modulatory: &ActivityPattern) -> Result<ActivityPattern, PatternError> {
    prey.check_dim(sor.dim())?;
    prey.check_dim(modulatory.dim())?;
    Ok(prey.sub(sor)?.add(modulatory)?.rectify())
}

/// Left minus right mass of a pattern over egocentric bins.
fn lateral_balance(cfg: &DetourConfig, p: &ActivityPattern) -> f64 {
    p.values()
        .iter()
        .enumerate()
        .map(|(i, v)| {
            let b = cfg.bin_bearing(i);
            if b > 1e-9 && b < PI - 1e-9 {
                v.abs()
            } else if b < -1e-9 {
                -v.abs()
            } else {
                0.0
            }
        })
        .sum()
}

/// Sidestep direction whose template best matches a command pattern; `None`
/// when neither matches positively.
pub fn decode_side(cfg: &DetourConfig, command: &ActivityPattern) -> Option<Side> {
    let score = |side| cfg.side_pattern(side).values().iter().zip(command.values()).map(|(t, c)| t * c).sum::<f64>();
    let (left, right) = (score(Side::Left), score(Side::Right));
    if left.max(right) <= 0.0 {
        None
    } else if left >= right {
        Some(Side::Left)
    } else {
        Some(Side::Right)
    }
}

fn turn_or_go(cfg: &DetourConfig, bearing: f64) -> MotorCommand {
    if bearing.abs() > cfg.orient_tolerance_deg.to_radians() {
        MotorCommand::Orient(if bearing > 0.0 { Side::Left } else { Side::Right })
    } else {
        MotorCommand::Forward
    }
}

/// Per-trial controller state: the lobe being pursued (world angle), the
/// side taken after the first bump, and the last turn.
#[derive(Debug, Clone, Copy, Default, PartialEq, Serialize, Deserialize)]
pub struct ControllerMemory {
    pub lobe: Option<f64>,
    pub avoid: Option<Side>,
    /// Direction of the previous command if it was a turn.
    pub turned: Option<Side>,
}

/// No repellent in the straight-ahead bin.
fn ahead_clear(cfg: &DetourConfig, sor: &ActivityPattern) -> bool {
    sor.get(cfg.bins / 2) <= 0.0
}

/// Local maxima of the heading map at or above the lobe threshold.
fn lobes(cfg: &DetourConfig, mhm: &ActivityPattern) -> Vec<usize> {
    let v = mhm.values();
    let n = v.len();
    (0..n)
        .filter(|&i| v[i] >= cfg.lobe_threshold && v[i] >= v[(i + n - 1) % n] && v[i] > v[(i + 1) % n])
        .collect()
}

/// Mass-weighted bearing of the contiguous run of positive bins around `peak`.
/// A lobe clipped by a repellent edge steers away from that edge.
fn lobe_centroid(cfg: &DetourConfig, mhm: &ActivityPattern, peak: usize) -> f64 {
    let n = mhm.dim();
    let (mut lo, mut hi) = (0usize, 0usize);
    while lo + 1 < n && mhm.get((peak + n - lo - 1) % n) > 0.0 {
        lo += 1;
    }
    while hi + 1 < n && mhm.get((peak + hi + 1) % n) > 0.0 {
        hi += 1;
    }
    let (mut mass, mut moment) = (0.0, 0.0);
    for k in 0..=lo + hi {
        let offset = k as f64 - lo as f64;
        let v = mhm.get((peak + n - lo + k) % n);
        mass += v;
        moment += v * offset;
    }
    cfg.bin_bearing(peak) + cfg.bin_width() * moment / mass
}

/// Innate arbitration plus the modulated sidestep. `coin` breaks lateral ties.
/// A turn that would undo the previous turn becomes a step forward when the
/// way ahead is clear.
pub fn arbitrate(
    cfg: &DetourConfig,
    world: &WorldState,
    percept: &Percept,
    mhm: &ActivityPattern,
    modulation: Option<&ActivityPattern>,
    memory: &mut ControllerMemory,
    coin: &mut impl FnMut() -> bool,
) -> Option<(MotorCommand, Drive)> {
    let mut decided = select(cfg, world, percept, mhm, modulation, memory, coin);
    if let Some((MotorCommand::Orient(side), drive)) = decided {
        if memory.turned.is_some_and(|prev| prev != side) && ahead_clear(cfg, &percept.sor) {
            decided = Some((MotorCommand::Forward, drive));
        }
    }
    memory.turned = match decided {
        Some((MotorCommand::Orient(side), _)) => Some(side),
        _ => None,
    };
    decided
}

fn select(
    cfg: &DetourConfig,
    world: &WorldState,
    percept: &Percept,
    mhm: &ActivityPattern,
    modulation: Option<&ActivityPattern>,
    memory: &mut ControllerMemory,
    coin: &mut impl FnMut() -> bool,
) -> Option<(MotorCommand, Drive)> {
    if world.can_snap(cfg) {
        return Some((MotorCommand::Snap, Drive::Snap));
    }
    if world.contact {
        let side = *memory.avoid.get_or_insert_with(|| {
            let balance = lateral_balance(cfg, &percept.sor);
            if balance > 1e-9 {
                Side::Right
            } else if balance < -1e-9 || coin() {
                Side::Left
            } else {
                Side::Right
            }
        });
        let mut probe = world.clone();
        probe.translate(world.pose.heading + side.sign() * PI / 2.0, cfg.side_step, cfg.pushback);
        if probe.contact && dist((probe.pose.x, probe.pose.y), (world.pose.x, world.pose.y)) < 1e-9 {
            return Some((MotorCommand::Backup, Drive::Backup));
        }
        return Some((MotorCommand::Sidestep(side), Drive::BumpAvoid));
    }
    let modulated = modulation.filter(|m| m.mean_abs() > cfg.constructor.override_threshold);
    let strongest = mhm.max_abs();
    let candidates = lobes(cfg, mhm);
    if !candidates.is_empty() && (modulated.is_none() || strongest >= cfg.release_threshold) {
        let h = world.pose.heading;
        let pick = match memory.lobe {
            // stay with the lobe nearest the one already pursued
            Some(target) => candidates.iter().copied().min_by(|&a, &b| {
                let da = wrap(cfg.bin_bearing(a) + h - target).abs();
                let db = wrap(cfg.bin_bearing(b) + h - target).abs();
                da.total_cmp(&db)
            }),
            // otherwise the strongest, ties toward the smaller turn
            None => candidates.iter().copied().max_by(|&a, &b| {
                mhm.get(a).total_cmp(&mhm.get(b)).then(cfg.bin_bearing(b).abs().total_cmp(&cfg.bin_bearing(a).abs()))
            }),
        }
        .expect("non-empty");
        let bearing = lobe_centroid(cfg, mhm, pick);
        memory.lobe = Some(wrap(bearing + h));
        let cmd = match turn_or_go(cfg, bearing) {
            MotorCommand::Forward if !ahead_clear(cfg, &percept.sor) => {
                MotorCommand::Orient(if bearing >= 0.0 { Side::Left } else { Side::Right })
            }
            c => c,
        };
        return Some((cmd, Drive::Heading));
    }
    if let Some(side) = modulated.and_then(|m| decode_side(cfg, m)) {
        return Some((MotorCommand::Sidestep(side), Drive::Modulated));
    }
    let prey = world.prey?;
    let bearing = bearing_to(&world.pose, prey);
    let cmd = if bearing.abs() > cfg.frontal_cone_deg.to_radians() { turn_or_go(cfg, bearing) } else { MotorCommand::Forward };
    Some((cmd, Drive::Frontal))
}

fn relay(name: &str, dim: usize, in_tag: SemanticTag, out_tag: SemanticTag) -> SchemaNode {
    SchemaNode::new(name, |ctx, _| Emission::outputs(vec![ctx.input("sense").clone()]))
        .with_input(PortSpec::input("sense", dim, in_tag))
        .with_output(PortSpec::output("out", dim, out_tag))
}

fn mhm_schema(dim: usize) -> SchemaNode {
    SchemaNode::new("MHM", |ctx, _| {
        let out = integrate_mhm(ctx.input("prey"), ctx.input("sor"), ctx.input("mod")).expect("dims fixed at wiring");
        Emission::outputs(vec![out])
    })
    .with_input(PortSpec::input("prey", dim, SemanticTag::Perceptual))
    .with_input(PortSpec::input("sor", dim, SemanticTag::Perceptual))
    .with_input(PortSpec::modulatory("mod", dim, SemanticTag::Sensorimotor))
    .with_output(PortSpec::output("out", dim, SemanticTag::Sensorimotor))
}

fn side_schema(dim: usize) -> SchemaNode {
    relay("SIDE", dim, SemanticTag::Generic, SemanticTag::Motor).with_input(PortSpec::modulatory("mod", dim, SemanticTag::Command))
}

/// One executed tick of a trial.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TickRecord {
    pub pose: Pose,
    pub command: Option<MotorCommand>,
    pub drive: Option<Drive>,
    pub bumped: bool,
    /// Committed heading map, and the forward model's prediction for it.
    pub mhm: Vec<f64>,
    pub predicted: Option<Vec<f64>>,
    pub goal: Vec<f64>,
    /// Sidestep command from the constructed inverse model, when one exists.
    pub modulation: Option<Vec<f64>>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TrialOutcome {
    pub barrier_width: Option<f64>,
    pub captured: bool,
    pub bumps: usize,
    pub ticks: usize,
    pub path: Vec<Pose>,
    pub records: Vec<TickRecord>,
    /// Pairs built during this trial.
    pub constructed: Vec<String>,
}

impl TrialOutcome {
    /// Ticks by which the forward model's prediction shows a lobe at the eventual
    /// open-field bearing before the real mhm does. The bearing is taken where the
    /// real lobe first reaches the release threshold; a predicted lobe must rise
    /// above the prediction on the last settle tick, before any movement, so a
    /// constant baseline does not count. `None` when either never appears.
    pub fn anticipation(&self, cfg: &DetourConfig, tolerance_bins: usize) -> Option<i64> {
        let peak = |v: &[f64]| v.iter().cloned().fold(0.0, f64::max);
        let settled = self.records.iter().position(|r| peak(&r.mhm) >= cfg.release_threshold)?;
        let bin = argmax(&self.records[settled].mhm);
        let near = |i: usize| {
            let d = (i as i64 - bin as i64).rem_euclid(cfg.bins as i64);
            d.min(cfg.bins as i64 - d) as usize <= tolerance_bins
        };
        let real = self
            .records
            .iter()
            .position(|r| r.mhm.iter().enumerate().any(|(i, &v)| near(i) && v >= cfg.lobe_threshold))?;
        let baseline = self.records.get(cfg.settle_ticks.saturating_sub(1))?.predicted.clone()?;
        let predicted = self.records.iter().position(|r| {
            r.predicted.as_deref().is_some_and(|p| {
                p.iter().zip(&baseline).enumerate().any(|(i, (&v, &b))| near(i) && v >= cfg.lobe_threshold && v - b >= cfg.lobe_threshold)
            })
        })?;
        Some(real as i64 - predicted as i64)
    }
}

fn argmax(v: &[f64]) -> usize {
    v.iter().enumerate().fold(0, |b, (i, x)| if *x > v[b] { i } else { b })
}

pub struct DetourWorld {
    pub cfg: DetourConfig,
    pub net: Network,
    pub matrix: ReliabilityMatrix,
    pub constructor: Constructor,
    pub goal: GoalSchema,
    pub drive: DriveState,
    memory: ControllerMemory,
    pub learning: bool,
    pub discovering: bool,
    rng: ChaCha8Rng,
}

impl DetourWorld {
    pub fn new(seed: u64, cfg: DetourConfig) -> Result<Self, KernelError> {
        let n = cfg.bins;
        let mut net = Network::new(rng::derive_seed(seed, "detour/net"));
        net.add_schema(relay("PREY", n, SemanticTag::Perceptual, SemanticTag::Perceptual))?;
        net.add_schema(relay("SOR", n, SemanticTag::Perceptual, SemanticTag::Perceptual))?;
        net.add_schema(relay("TACTILE", 1, SemanticTag::Perceptual, SemanticTag::Perceptual))?;
        net.add_schema(mhm_schema(n))?;
        net.add_schema(relay("BUMP_AVOID", n, SemanticTag::Perceptual, SemanticTag::Sensorimotor))?;
        net.add_schema(relay("FORWARD", 1, SemanticTag::Generic, SemanticTag::Motor))?;
        net.add_schema(side_schema(n))?;
        net.add_schema(relay("ORIENT", 1, SemanticTag::Generic, SemanticTag::Motor))?;
        net.add_schema(relay("SNAP", 1, SemanticTag::Generic, SemanticTag::Motor))?;
        net.add_schema(relay("BACKUP", 1, SemanticTag::Generic, SemanticTag::Motor))?;
        let mut goal = GoalSchema::new(GOAL, "PREY", "MHM", n, n, None);
        goal.lr = cfg.goal_lr;
        net.add_schema(goal.node(SemanticTag::Perceptual))?;
        net.connect(&PortRef::new("PREY", "out"), &PortRef::new(GOAL, "source"), 0)?;

        let space = CandidateSpace::from_network(&net, cfg.cause_effect.max_delay, cfg.cause_effect.open_candidates);
        let matrix = ReliabilityMatrix::new(space, cfg.cause_effect.clone());
        let constructor = Constructor::new(cfg.constructor.clone(), rng::derive_seed(seed, "detour/constructor"))
            .with_goal("MHM", PortRef::new(GOAL, "goal"))
            .with_context(PortRef::new("SOR", "out"));
        Ok(Self {
            drive: DriveState::hunger(1.0, 1.0, cfg.drive_growth),
            cfg,
            net,
            matrix,
            constructor,
            goal,
            memory: ControllerMemory::default(),
            learning: false,
            discovering: false,
            rng: rng::stream(seed, "detour/world"),
        })
    }

    pub fn attach_sink(&mut self, sink: Box<dyn TraceSink>) {
        self.net.attach_sink(sink);
    }

    pub fn pair(&self) -> Option<(String, String)> {
        self.constructor.record_for("MHM", "SIDE").map(|r| (r.predictive.clone(), r.dual.clone()))
    }

    fn feed(&mut self, percept: &Percept, cmd: Option<MotorCommand>, drive: Option<Drive>) -> Result<(), KernelError> {
        let n = self.cfg.bins;
        let set = |net: &mut Network, s: &str, p: &str, v: ActivityPattern| net.set_external(&PortRef::new(s, p), v);
        set(&mut self.net, "PREY", "sense", percept.prey.clone())?;
        set(&mut self.net, "SOR", "sense", percept.sor.clone())?;
        set(&mut self.net, "TACTILE", "sense", percept.tactile.clone())?;
        set(&mut self.net, "MHM", "prey", percept.prey.clone())?;
        set(&mut self.net, "MHM", "sor", percept.sor.clone())?;
        let scalar = |on: bool| ActivityPattern::scalar(if on { 1.0 } else { 0.0 });
        let bump_side = match (cmd, drive) {
            (Some(MotorCommand::Sidestep(s)), Some(Drive::BumpAvoid)) => Some(self.cfg.side_pattern(s)),
            _ => None,
        };
        let silent = ActivityPattern::zeros(n);
        set(&mut self.net, "BUMP_AVOID", "sense", bump_side.clone().unwrap_or_else(|| silent.clone()))?;
        set(&mut self.net, "SIDE", "sense", bump_side.unwrap_or(silent))?;
        set(&mut self.net, "FORWARD", "sense", scalar(cmd == Some(MotorCommand::Forward)))?;
        let orient = match cmd {
            Some(MotorCommand::Orient(s)) => s.sign(),
            _ => 0.0,
        };
        set(&mut self.net, "ORIENT", "sense", ActivityPattern::scalar(orient))?;
        set(&mut self.net, "SNAP", "sense", scalar(cmd == Some(MotorCommand::Snap)))?;
        set(&mut self.net, "BACKUP", "sense", scalar(cmd == Some(MotorCommand::Backup)))?;
        Ok(())
    }

    fn tick(&mut self, world: &mut WorldState, records: &mut Vec<TickRecord>, settling: bool) -> Result<(), KernelError> {
        let percept = world.perceive(&self.cfg);
        let zero = ActivityPattern::zeros(self.cfg.bins);
        let mhm = integrate_mhm(&percept.prey, &percept.sor, &zero).expect("same raster");
        let modulation = match self.pair() {
            Some((_, dual)) => Some(self.net.read_port(&PortRef::new(&dual, "command"), 0)?),
            None => None,
        };
        let rng = &mut self.rng;
        let decided = if settling {
            None
        } else {
            arbitrate(&self.cfg, world, &percept, &mhm, modulation.as_ref(), &mut self.memory, &mut || rng.gen_bool(0.5))
        };
        let (cmd, drive) = (decided.map(|d| d.0), decided.map(|d| d.1));
        self.feed(&percept, cmd, drive)?;
        self.net.step()?;
        if self.discovering {
            self.matrix.accumulate(&self.net)?;
        }
        if self.learning {
            let events = self.constructor.observe(&self.net, &self.matrix)?;
            self.constructor.handle(&mut self.net, &events);
        }
        let predicted = match self.pair() {
            Some((p, _)) => Some(self.net.read_port(&PortRef::new(&p, "prediction"), 0)?.into_values()),
            None => None,
        };
        let before = world.bumps;
        if let Some(c) = cmd {
            world.act(&self.cfg, c);
        } else {
            world.ticks += 1;
        }
        records.push(TickRecord {
            pose: world.pose,
            command: cmd,
            drive,
            bumped: world.bumps > before,
            mhm: self.net.read_port(&PortRef::new("MHM", "out"), 0)?.into_values(),
            predicted,
            goal: self.net.read_port(&PortRef::new(GOAL, "goal"), 0)?.into_values(),
            modulation: modulation.map(ActivityPattern::into_values),
        });
        Ok(())
    }

    /// Idle ticks with an empty scene so lagged statistics do not bridge trials.
    fn gap(&mut self) -> Result<(), KernelError> {
        let blank = WorldState { prey: None, fence: None, ..WorldState::new(&self.cfg, None) };
        let percept = blank.perceive(&self.cfg);
        for _ in 0..self.cfg.gap_ticks {
            self.feed(&percept, None, None)?;
            self.net.step()?;
            if self.discovering {
                self.matrix.accumulate(&self.net)?;
            }
            if self.learning {
                let events = self.constructor.observe(&self.net, &self.matrix)?;
                self.constructor.handle(&mut self.net, &events);
            }
        }
        Ok(())
    }

    /// One closed-loop episode from the start pose; ends on capture or after `bound` ticks.
    pub fn run_episode(&mut self, mut world: WorldState, bound: usize) -> Result<TrialOutcome, KernelError> {
        let built_before = self.constructor.records.len();
        self.constructor.begin_trial();
        self.memory = ControllerMemory::default();
        let mut records = Vec::new();
        let mut path = vec![world.pose];
        let mut prey_samples = Vec::new();
        while !world.captured && world.ticks < bound {
            prey_samples.push(world.perceive(&self.cfg).prey);
            let settling = records.len() < self.cfg.settle_ticks;
            self.tick(&mut world, &mut records, settling)?;
            path.push(world.pose);
        }
        if self.learning {
            let events = self.constructor.end_trial(&self.net);
            self.constructor.handle(&mut self.net, &events);
        }
        self.drive = self.drive.update(if world.captured { 1.0 } else { 0.0 }, 0.0);
        if world.captured && self.cfg.goal_lr > 0.0 {
            // the rewarded heading map is the one seen just before the snap
            let target = ActivityPattern::new(records[records.len() - 1].mhm.clone()).expect("finite");
            self.goal.load(self.net.params(GOAL)?);
            for _ in 0..self.cfg.goal_epochs {
                for prey in &prey_samples {
                    self.goal.tune(prey, None, &target, true).expect("raster dims fixed");
                }
            }
            let mut ps = self.net.params(GOAL)?.clone();
            self.goal.store(&mut ps);
            self.net.set_param(GOAL, "map", ps["map"].clone())?;
        }
        self.gap()?;
        Ok(TrialOutcome {
            barrier_width: world.fence.map(|f| f.x_max - f.x_min),
            captured: world.captured,
            bumps: world.bumps,
            ticks: world.ticks,
            path,
            records,
            constructed: self.constructor.records[built_before..].iter().map(|r| r.dual.clone()).collect(),
        })
    }

    pub fn barrier(&self, width: f64) -> Fence {
        Fence::centred(self.cfg.fence_y, width)
    }

    /// Open-field captures at random prey positions that calibrate the goal.
    pub fn calibrate(&mut self) -> Result<Vec<TrialOutcome>, KernelError> {
        let (learning, discovering) = (self.learning, self.discovering);
        self.learning = false;
        self.discovering = false;
        let mut out = Vec::new();
        for _ in 0..self.cfg.calibration_trials {
            let r = self.rng.gen_range(self.cfg.calibration_radius.0..self.cfg.calibration_radius.1);
            let a = self.rng.gen_range(PI / 4.0..3.0 * PI / 4.0);
            let mut w = WorldState::new(&self.cfg, None);
            w.prey = Some((r * a.cos(), r * a.sin()));
            out.push(self.run_episode(w, self.cfg.innate_trial_ticks)?);
        }
        self.learning = learning;
        self.discovering = discovering;
        Ok(out)
    }

    /// Naive behavior at a barrier, no discovery or construction.
    pub fn run_innate(&mut self, width: f64) -> Result<TrialOutcome, KernelError> {
        let w = WorldState::new(&self.cfg, Some(self.barrier(width)));
        self.run_episode(w, self.cfg.innate_trial_ticks)
    }

    /// A learning trial at the configured wide barrier.
    pub fn run_trial(&mut self) -> Result<TrialOutcome, KernelError> {
        self.learning = true;
        self.discovering = true;
        let w = WorldState::new(&self.cfg, Some(self.barrier(self.cfg.barrier_width)));
        self.run_episode(w, self.cfg.trial_ticks)
    }
}

/// Calibrate, then run `trials` learning trials at the wide barrier.
pub fn learning_run(seed: u64, cfg: DetourConfig, trials: usize) -> Result<(DetourWorld, Vec<TrialOutcome>), KernelError> {
    let mut w = DetourWorld::new(seed, cfg)?;
    w.calibrate()?;
    let mut out = Vec::with_capacity(trials);
    for _ in 0..trials {
        out.push(w.run_trial()?);
    }
    Ok((w, out))
}
