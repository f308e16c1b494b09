//! Structural learning: classify incoherence, build predictive/dual pairs,
//! and graft a modulatory override onto the cause schema.

use std::collections::{BTreeMap, BTreeSet};
use std::sync::Arc;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::cause_effect::{active, Relation, ReliabilityMatrix};
use crate::dual::DualSchema;
use crate::kernel::{BehaviorFn, Emission, KernelError, Network, PortRef};
use crate::map::DifferentiableMap;
use crate::pattern::ActivityPattern;
use crate::predictive::{ErrorWindow, PredictiveSchema};
use crate::rng;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub enum EventKind {
    /// Both endpoints active but the forward model was wrong (I).
    IncorrectExpectation,
    /// A relation newly crossed the reliability threshold (U1).
    UnexpectedNewRelation,
    /// Prediction error while the cause or effect is silent (U2).
    UnexpectedInactiveEndpoint,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub enum GoalTrend {
    Closer,
    Farther,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct IncoherenceEvent {
    pub kind: EventKind,
    pub effect: PortRef,
    pub cause: PortRef,
    pub tau: usize,
    pub goal_trend: GoalTrend,
    pub tick: u64,
    pub magnitude: f64,
}

impl IncoherenceEvent {
    /// Short label such as `U1.A` or `U2.B`.
    pub fn label(&self) -> String {
        let k = match self.kind {
            EventKind::IncorrectExpectation => "I",
            EventKind::UnexpectedNewRelation => "U1",
            EventKind::UnexpectedInactiveEndpoint => "U2",
        };
        let t = match self.goal_trend {
            GoalTrend::Closer => "A",
            GoalTrend::Farther => "B",
        };
        format!("{k}.{t}")
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ConstructionRecord {
    pub trigger: IncoherenceEvent,
    pub predictive: String,
    pub dual: String,
    pub adapted_cause: String,
    pub goal: String,
    pub context: Option<PortRef>,
    pub modulatory_port: String,
    pub tick: u64,
}

#[derive(Debug, Error, PartialEq)]
pub enum ConstructError {
    #[error("a pair for ({effect}, {cause}) already exists")]
    DuplicatePair { effect: String, cause: String },
    #[error("no goal schema targets effect `{0}`")]
    NoGoalSchemaForEffect(String),
    #[error("cause `{0}` has no free modulatory input")]
    NoFreeModulatoryChannel(String),
    #[error("event {0} does not call for construction")]
    NotConstructive(String),
    #[error("no existing pair for ({effect}, {cause}) to reactivate")]
    NoExistingPair { effect: String, cause: String },
    #[error("pair for ({effect}, {cause}) is already active")]
    AlreadyActive { effect: String, cause: String },
    #[error(transparent)]
    Kernel(#[from] KernelError),
}

/// Per-tick status of a built forward model, as read from the network.
#[derive(Debug, Clone, PartialEq)]
pub struct PredictionReport {
    pub effect: PortRef,
    pub cause: PortRef,
    pub tau: usize,
    pub error: f64,
    pub cause_active: bool,
    pub effect_active: bool,
}

/// Relative goal distance at the first goal-bearing tick of the trial and now.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct GoalProgress {
    pub start: f64,
    pub now: f64,
    /// Smallest distance seen this trial.
    pub best: f64,
}

impl GoalProgress {
    pub fn trend(&self) -> GoalTrend {
        if self.now < self.start {
            GoalTrend::Closer
        } else {
            GoalTrend::Farther
        }
    }
}

/// ||goal - observed|| / ||goal||, or 1 when no goal is posted.
pub fn relative_goal_distance(goal: &ActivityPattern, observed: &ActivityPattern) -> f64 {
    let g = goal.norm();
    if g == 0.0 {
        return 1.0;
    }
    let d: f64 = goal.values().iter().zip(observed.values()).map(|(a, b)| (a - b) * (a - b)).sum();
    d.sqrt() / g
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct ConstructorConfig {
    /// Prediction RMS error above this counts as incoherent.
    pub error_tolerance: f64,
    /// Activity threshold on endpoints (mean |.|).
    pub activity_threshold: f64,
    /// Modulatory input activity (mean |.|) above which it overrides the cause.
    pub override_threshold: f64,
    pub init_scale: f64,
    pub hidden: Option<usize>,
    pub predictive_lr: f64,
    pub dual_lr: f64,
    pub readiness: f64,
    /// Dual learning-rate multiplier once a U2.B event reactivates a pair.
    pub recovery_lr_scale: f64,
    /// Whether a freshly built dual drives its cause right away.
    pub engage_on_construction: bool,
    /// Hold newly extracted relations until `end_trial` and judge them on the
    /// trial's best goal distance instead of the extraction tick.
    pub defer_relations: bool,
    /// Passes over retained history used to warm-start a new forward model.
    pub replay_epochs: usize,
}

impl Default for ConstructorConfig {
    fn default() -> Self {
        Self {
            error_tolerance: 0.05,
            activity_threshold: 0.05,
            override_threshold: 0.05,
            init_scale: 0.01,
            hidden: None,
            predictive_lr: crate::predictive::DEFAULT_PREDICTIVE_LR,
            dual_lr: crate::dual::DEFAULT_DUAL_LR,
            readiness: crate::dual::DEFAULT_READINESS,
            recovery_lr_scale: 10.0,
            engage_on_construction: true,
            defer_relations: false,
            replay_epochs: 0,
        }
    }
}

/// Pure classification of one tick's observations.
pub fn classify(
    tick: u64,
    new_relations: &[Relation],
    predictions: &[PredictionReport],
    goals: &BTreeMap<String, GoalProgress>,
    error_tolerance: f64,
) -> Vec<IncoherenceEvent> {
    let trend = |effect: &PortRef| goals.get(&effect.schema).map_or(GoalTrend::Farther, GoalProgress::trend);
    let mut out: Vec<IncoherenceEvent> = new_relations
        .iter()
        .map(|r| IncoherenceEvent {
            kind: EventKind::UnexpectedNewRelation,
            effect: r.effect.clone(),
            cause: r.cause.clone(),
            tau: r.tau,
            goal_trend: trend(&r.effect),
            tick,
            magnitude: r.r,
        })
        .collect();
    for p in predictions.iter().filter(|p| p.error > error_tolerance) {
        let kind = if p.cause_active && p.effect_active {
            EventKind::IncorrectExpectation
        } else {
            EventKind::UnexpectedInactiveEndpoint
        };
        out.push(IncoherenceEvent {
            kind,
            effect: p.effect.clone(),
            cause: p.cause.clone(),
            tau: p.tau,
            goal_trend: trend(&p.effect),
            tick,
            magnitude: p.error,
        });
    }
    // larger magnitude first; ties by earliest tick then names
    out.sort_by(|a, b| {
        b.magnitude
            .total_cmp(&a.magnitude)
            .then(a.tick.cmp(&b.tick))
            .then_with(|| a.effect.cmp(&b.effect))
            .then_with(|| a.cause.cmp(&b.cause))
    });
    out
}

/// Wrap a behavior so that output `out_index` is replaced by the modulatory
/// input whenever that input is active; otherwise the original output stands.
pub fn override_behavior(original: BehaviorFn, modulatory_port: String, out_index: usize, threshold: f64) -> BehaviorFn {
    Arc::new(move |ctx, params| {
        let mut em: Emission = original(ctx, params);
        let m = ctx.input(&modulatory_port);
        if m.mean_abs() > threshold {
            em.outputs[out_index] = m.clone();
            let a = em.outputs.iter().map(ActivityPattern::max_abs).fold(0.0, f64::max);
            em.activity = Some(a.min(1.0));
        }
        em
    })
}

/// Route the dual's command into the cause's free modulatory input and
/// install the override on the matching output.
pub fn adapt_cause_schema(net: &mut Network, cause: &PortRef, command: &PortRef, threshold: f64) -> Result<String, ConstructError> {
    let port = free_modulatory_port(net, cause)?;
    let node = net.schema(&cause.schema).ok_or_else(|| KernelError::UnknownSchema(cause.schema.clone()))?;
    let out_index = node
        .outputs
        .iter()
        .position(|p| p.name == cause.port)
        .ok_or_else(|| KernelError::UnknownPort(cause.to_string()))?;
    let original = node.behavior.clone();
    net.connect(command, &PortRef::new(&cause.schema, &port), 0)?;
    net.replace_behavior(&cause.schema, override_behavior(original, port.clone(), out_index, threshold))?;
    Ok(port)
}

fn free_modulatory_port(net: &Network, cause: &PortRef) -> Result<String, ConstructError> {
    let node = net.schema(&cause.schema).ok_or_else(|| KernelError::UnknownSchema(cause.schema.clone()))?;
    let dim = node
        .output_spec(&cause.port)
        .ok_or_else(|| KernelError::UnknownPort(cause.to_string()))?
        .dim();
    for p in node.inputs.iter().filter(|p| p.modulatory && p.dim() == dim) {
        if net.input_is_free(&PortRef::new(&cause.schema, &p.name))? {
            return Ok(p.name.clone());
        }
    }
    Err(ConstructError::NoFreeModulatoryChannel(cause.schema.clone()))
}

/// Runtime state of the construction machinery for one network.
#[derive(Debug, Clone)]
pub struct Constructor {
    pub config: ConstructorConfig,
    pub seed: u64,
    /// Effect schema -> goal schema output feeding its dual.
    pub goals: BTreeMap<String, PortRef>,
    /// Context port wired into every new pair, if the scenario names one.
    pub context: Option<PortRef>,
    pub records: Vec<ConstructionRecord>,
    pub activations: Vec<ConstructionRecord>,
    pub events: Vec<IncoherenceEvent>,
    /// Events that asked for structure but could not get it.
    pub unresolved: Vec<(IncoherenceEvent, String)>,
    seen_relations: BTreeSet<(PortRef, PortRef)>,
    pending_relations: Vec<Relation>,
    progress: BTreeMap<String, GoalProgress>,
}

impl Constructor {
    pub fn new(config: ConstructorConfig, seed: u64) -> Self {
        Self {
            config,
            seed,
            goals: BTreeMap::new(),
            context: None,
            records: Vec::new(),
            activations: Vec::new(),
            events: Vec::new(),
            unresolved: Vec::new(),
            seen_relations: BTreeSet::new(),
            pending_relations: Vec::new(),
            progress: BTreeMap::new(),
        }
    }

    pub fn with_goal(mut self, effect_schema: &str, goal_output: PortRef) -> Self {
        self.goals.insert(effect_schema.into(), goal_output);
        self
    }

    pub fn with_context(mut self, ctx: PortRef) -> Self {
        self.context = Some(ctx);
        self
    }

    pub fn names(effect: &PortRef, cause: &PortRef) -> (String, String) {
        (format!("P_{}_{}", effect.schema, cause.schema), format!("S_{}_{}", cause.schema, effect.schema))
    }

    pub fn record_for(&self, effect: &str, cause: &str) -> Option<&ConstructionRecord> {
        self.records.iter().find(|r| r.trigger.effect.schema == effect && r.trigger.cause.schema == cause)
    }

    /// Forget per-trial goal progress; call at each trial boundary.
    pub fn begin_trial(&mut self) {
        self.progress.clear();
    }

    /// Classify relations held back during the trial. No-op unless relations
    /// are deferred.
    pub fn end_trial(&mut self, net: &Network) -> Vec<IncoherenceEvent> {
        let pending = std::mem::take(&mut self.pending_relations);
        let trial: BTreeMap<String, GoalProgress> = self
            .progress
            .iter()
            .map(|(k, p)| (k.clone(), GoalProgress { now: p.best, ..*p }))
            .collect();
        let events = classify(net.tick(), &pending, &[], &trial, self.config.error_tolerance);
        self.events.extend(events.iter().cloned());
        events
    }

    /// Mark relations already extracted so they are not reported as new.
    pub fn acknowledge(&mut self, matrix: &ReliabilityMatrix) {
        for r in matrix.extract() {
            self.seen_relations.insert((r.effect, r.cause));
        }
    }

    fn update_goal_progress(&mut self, net: &Network) -> Result<(), KernelError> {
        for (effect, goal_port) in &self.goals {
            let goal = net.read_port(goal_port, 0)?;
            if goal.is_silent() {
                continue;
            }
            let node = net.schema(effect).ok_or_else(|| KernelError::UnknownSchema(effect.clone()))?;
            let port = node
                .outputs
                .iter()
                .find(|p| p.dim() == goal.dim())
                .ok_or_else(|| KernelError::UnknownPort(format!("{effect}.<dim {}>", goal.dim())))?;
            let observed = net.read_port(&PortRef::new(effect, &port.name), 0)?;
            let d = relative_goal_distance(&goal, &observed);
            self.progress.entry(effect.clone()).and_modify(|p| {
                    p.now = d;
                    p.best = p.best.min(d);
                })
                .or_insert(GoalProgress { start: d, now: d, best: d });
        }
        Ok(())
    }

    pub fn goal_progress(&self) -> &BTreeMap<String, GoalProgress> {
        &self.progress
    }

    /// Status of every built forward model at the current committed tick.
    pub fn prediction_reports(&self, net: &Network) -> Result<Vec<PredictionReport>, KernelError> {
        let theta = self.config.activity_threshold;
        let mut out = Vec::new();
        for r in &self.records {
            let e = &r.trigger.effect;
            let c = &r.trigger.cause;
            let horizon = r.trigger.tau.max(1);
            // The committed error compares the effect one tick back with the
            // prediction made from the cause `horizon` ticks before that.
            // A model still learning its mapping is not evidence of incoherence.
            let window = ErrorWindow::from_samples(net.params(&r.predictive)?.get("errors").map_or(&[][..], Vec::as_slice));
            if !window.is_below(self.config.readiness) {
                continue;
            }
            let error = net.read_port(&PortRef::new(&r.predictive, "error"), 0)?.get(0);
            let effect_active = active(&net.read_port(e, 1)?, theta) > 0.0;
            let cause_active = active(&net.read_port(c, horizon + 1)?, theta) > 0.0;
            out.push(PredictionReport { effect: e.clone(), cause: c.clone(), tau: r.trigger.tau, error, cause_active, effect_active });
        }
        Ok(out)
    }

    /// Classify the current tick. Newly extracted relations are remembered so
    /// each pair produces at most one U1 event per run.
    pub fn observe(&mut self, net: &Network, matrix: &ReliabilityMatrix) -> Result<Vec<IncoherenceEvent>, KernelError> {
        self.update_goal_progress(net)?;
        let fresh: Vec<Relation> = matrix
            .extract()
            .into_iter()
            .filter(|r| !self.seen_relations.contains(&(r.effect.clone(), r.cause.clone())))
            .collect();
        for r in &fresh {
            self.seen_relations.insert((r.effect.clone(), r.cause.clone()));
        }
        let fresh = if self.config.defer_relations {
            self.pending_relations.extend(fresh);
            Vec::new()
        } else {
            fresh
        };
        let reports = self.prediction_reports(net)?;
        let events = classify(net.tick(), &fresh, &reports, &self.progress, self.config.error_tolerance);
        self.events.extend(events.iter().cloned());
        Ok(events)
    }

    /// Act on the events that call for structure (U1.A builds, U2.B reactivates);
    /// everything else is only logged. Returns the records produced.
    pub fn handle(&mut self, net: &mut Network, events: &[IncoherenceEvent]) -> Vec<ConstructionRecord> {
        let mut made = Vec::new();
        for ev in events {
            let wants = matches!(
                (ev.kind, ev.goal_trend),
                (EventKind::UnexpectedNewRelation, GoalTrend::Closer) | (EventKind::UnexpectedInactiveEndpoint, GoalTrend::Farther)
            );
            if !wants {
                continue;
            }
            match self.construct_pair(net, ev) {
                Ok(rec) => made.push(rec),
                Err(ConstructError::AlreadyActive { .. }) => {}
                Err(e) => self.unresolved.push((ev.clone(), e.to_string())),
            }
        }
        made
    }

    /// Build (U1.A) or reactivate (U2.B) the pair named by the event.
    pub fn construct_pair(&mut self, net: &mut Network, ev: &IncoherenceEvent) -> Result<ConstructionRecord, ConstructError> {
        if net.is_mid_tick() {
            return Err(KernelError::MidTickMutation.into());
        }
        match (ev.kind, ev.goal_trend) {
            (EventKind::UnexpectedNewRelation, GoalTrend::Closer) => self.build(net, ev),
            (EventKind::UnexpectedInactiveEndpoint, GoalTrend::Farther) => self.reactivate(net, ev),
            _ => Err(ConstructError::NotConstructive(ev.label())),
        }
    }

    fn reactivate(&mut self, net: &mut Network, ev: &IncoherenceEvent) -> Result<ConstructionRecord, ConstructError> {
        let (effect, cause) = (ev.effect.schema.clone(), ev.cause.schema.clone());
        let rec = self.record_for(&effect, &cause).cloned().ok_or(ConstructError::NoExistingPair {
            effect: effect.clone(),
            cause: cause.clone(),
        })?;
        if self.activations.iter().any(|a| a.dual == rec.dual) {
            return Err(ConstructError::AlreadyActive { effect, cause });
        }
        net.set_param(&rec.dual, "engaged", vec![1.0])?;
        net.set_param(&rec.dual, "lr_scale", vec![self.config.recovery_lr_scale])?;
        net.set_param(&rec.predictive, "frozen", vec![1.0])?;
        let act = ConstructionRecord { trigger: ev.clone(), tick: net.tick(), ..rec };
        self.activations.push(act.clone());
        Ok(act)
    }

    fn build(&mut self, net: &mut Network, ev: &IncoherenceEvent) -> Result<ConstructionRecord, ConstructError> {
        let (pname, dname) = Self::names(&ev.effect, &ev.cause);
        if self.record_for(&ev.effect.schema, &ev.cause.schema).is_some() || net.contains(&pname) || net.contains(&dname) {
            return Err(ConstructError::DuplicatePair { effect: ev.effect.schema.clone(), cause: ev.cause.schema.clone() });
        }
        let goal = self.goals.get(&ev.effect.schema).cloned().ok_or_else(|| ConstructError::NoGoalSchemaForEffect(ev.effect.schema.clone()))?;
        let mod_port = free_modulatory_port(net, &ev.cause)?;

        let effect_spec = net
            .schema(&ev.effect.schema)
            .and_then(|n| n.output_spec(&ev.effect.port))
            .cloned()
            .ok_or_else(|| KernelError::UnknownPort(ev.effect.to_string()))?;
        let cause_spec = net
            .schema(&ev.cause.schema)
            .and_then(|n| n.output_spec(&ev.cause.port))
            .cloned()
            .ok_or_else(|| KernelError::UnknownPort(ev.cause.to_string()))?;
        let ctx_dim = match &self.context {
            Some(c) => Some(
                net.schema(&c.schema)
                    .and_then(|n| n.output_spec(&c.port))
                    .ok_or_else(|| KernelError::UnknownPort(c.to_string()))?
                    .dim(),
            ),
            None => None,
        };
        let (ed, cd) = (effect_spec.dim(), cause_spec.dim());
        let horizon = ev.tau.max(1);
        let cfg = &self.config;

        let mut dims = vec![ed, cd];
        dims.extend(ctx_dim);
        let mut prng = rng::stream(self.seed, &pname);
        let pmap = DifferentiableMap::random(&dims, ed, cfg.hidden, cfg.init_scale, &mut prng);
        let mut pred = PredictiveSchema::new(&pname, &ev.effect.schema, &ev.cause.schema, self.context.as_ref().map(|c| c.schema.as_str()), pmap, horizon);
        pred.lr = cfg.predictive_lr;
        if cfg.replay_epochs > 0 {
            self.replay(net, &mut pred, ev, horizon)?;
        }

        let mut ddims = vec![ed, ed];
        ddims.extend(ctx_dim);
        let mut drng = rng::stream(self.seed, &dname);
        let dmap = DifferentiableMap::random(&ddims, cd, cfg.hidden, cfg.init_scale, &mut drng);
        // command at t reaches the cause output at t + 2, the effect `tau` later
        let mut dual = DualSchema::new(&dname, &ev.effect.schema, &ev.cause.schema, self.context.as_ref().map(|c| c.schema.as_str()), dmap, ev.tau + 2);
        dual.lr = cfg.dual_lr;
        dual.readiness = cfg.readiness;
        if cfg.replay_epochs > 0 {
            self.replay_dual(net, &mut dual, &pred, ev, &goal)?;
        }
        dual.engaged = cfg.engage_on_construction;

        net.add_schema(pred.node(effect_spec.port_type.tag, cause_spec.port_type.tag))?;
        net.add_schema(dual.node(&pred, effect_spec.port_type.tag))?;
        net.connect(&ev.effect, &PortRef::new(&pname, "effect"), 0)?;
        net.connect(&ev.cause, &PortRef::new(&pname, "cause"), 0)?;
        net.connect(&ev.effect, &PortRef::new(&dname, "effect"), 0)?;
        net.connect(&goal, &PortRef::new(&dname, "goal"), 0)?;
        if let Some(c) = &self.context {
            net.connect(c, &PortRef::new(&pname, "ctx"), 0)?;
            net.connect(c, &PortRef::new(&dname, "ctx"), 0)?;
        }
        let port = adapt_cause_schema(net, &ev.cause, &PortRef::new(&dname, "command"), self.config.override_threshold)?;
        debug_assert_eq!(port, mod_port);

        let rec = ConstructionRecord {
            trigger: ev.clone(),
            predictive: pname,
            dual: dname,
            adapted_cause: ev.cause.schema.clone(),
            goal: goal.schema.clone(),
            context: self.context.clone(),
            modulatory_port: port,
            tick: net.tick(),
        };
        self.records.push(rec.clone());
        Ok(rec)
    }

    /// Fit a new forward model on the history the kernel still retains.
    fn replay(&self, net: &Network, pred: &mut PredictiveSchema, ev: &IncoherenceEvent, horizon: usize) -> Result<(), KernelError> {
        let span = (net.tick() as usize).min(net.horizon());
        if span <= horizon {
            return Ok(());
        }
        let mut samples = Vec::new();
        for lag in (horizon..=span).rev() {
            let e = net.read_port(&ev.effect, lag)?;
            let c = net.read_port(&ev.cause, lag)?;
            let x = match &self.context {
                Some(cp) => Some(net.read_port(cp, lag)?),
                None => None,
            };
            let target = net.read_port(&ev.effect, lag - horizon)?;
            samples.push((e, c, x, target));
        }
        let frozen = pred.frozen;
        for _ in 0..self.config.replay_epochs {
            for (e, c, x, target) in &samples {
                let v = pred.input_vector(e, c, x.as_ref()).expect("dims from network");
                let fw = pred.map.forward(&v);
                let err: Vec<f64> = fw.y.iter().zip(target.values()).map(|(y, o)| y - o).collect();
                pred.map.descend(&fw, &err, pred.lr);
            }
        }
        pred.frozen = frozen;
        Ok(())
    }

    /// Warm-start a new dual on retained history, in hindsight: each past state
    /// is paired with the effect observed `dual.horizon` ticks later, and the
    /// distal error is carried back through the freshly fitted forward model.
    fn replay_dual(&self, net: &Network, dual: &mut DualSchema, pred: &PredictiveSchema, ev: &IncoherenceEvent, goal: &PortRef) -> Result<(), KernelError> {
        let span = (net.tick() as usize).min(net.horizon());
        if span <= dual.horizon {
            return Ok(());
        }
        let mut states = Vec::new();
        for lag in (0..=span).rev() {
            let x = match &self.context {
                Some(cp) => Some(net.read_port(cp, lag)?),
                None => None,
            };
            states.push((net.read_port(&ev.effect, lag)?, net.read_port(goal, lag)?, x));
        }
        dual.engaged = true;
        for _ in 0..self.config.replay_epochs {
            dual.clear_issued();
            for (effect, g, x) in &states {
                dual.tune(effect, Some(pred)).expect("paired at construction");
                dual.emit(effect, g, x.as_ref(), Some(pred)).expect("paired at construction");
            }
        }
        dual.clear_issued();
        Ok(())
    }

    /// Rebuild the recorded topology on a fresh network carrying the same seed schemas.
    pub fn replay_log(&self, net: &mut Network) -> Result<(), ConstructError> {
        let mut fresh = Constructor::new(ConstructorConfig { replay_epochs: 0, ..self.config.clone() }, self.seed);
        fresh.goals = self.goals.clone();
        fresh.context = self.context.clone();
        for r in &self.records {
            fresh.build(net, &r.trigger)?;
        }
        Ok(())
    }
}
