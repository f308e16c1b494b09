//! Inverse models. A dual schema turns a posted goal for an effect into a
//! command for the cause, and learns from the error measured in effect space,
//! carried back to the command through its paired forward model.

use std::collections::VecDeque;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::kernel::{Emission, ParamStore, PortSpec, SchemaNode, SemanticTag};
use crate::map::DifferentiableMap;
use crate::pattern::{ActivityPattern, PatternError};
use crate::predictive::PredictiveSchema;

pub const DEFAULT_DUAL_LR: f64 = 0.02;
pub const DEFAULT_READINESS: f64 = 0.05;

#[derive(Debug, Error, PartialEq)]
pub enum DualError {
    #[error("dual `{0}` has no paired predictive over the same effect and cause")]
    NoPairedPredictive(String),
    #[error(transparent)]
    Pattern(#[from] PatternError),
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
struct Issued {
    dual_x: Vec<f64>,
    pred_x: Vec<f64>,
    goal: Vec<f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DualSchema {
    pub name: String,
    pub effect: String,
    pub cause: String,
    pub context: Option<String>,
    pub map: DifferentiableMap,
    pub horizon: usize,
    pub lr: f64,
    /// Multiplier on `lr`; raised by the constructor during recovery.
    pub lr_scale: f64,
    /// Predictive windowed error must fall below this before tuning starts.
    pub readiness: f64,
    /// A dormant dual stays silent and does not learn.
    pub engaged: bool,
    issued: VecDeque<Option<Issued>>,
}

impl DualSchema {
    /// `map` takes `[effect, goal, (context)]` and emits a cause-space command.
    pub fn new(name: &str, effect: &str, cause: &str, context: Option<&str>, map: DifferentiableMap, horizon: usize) -> Self {
        assert!(horizon >= 1);
        assert_eq!(map.in_dims().len(), 2 + usize::from(context.is_some()), "map inputs are effect, goal[, context]");
        assert_eq!(map.in_dims()[0], map.in_dims()[1], "goal lives in effect space");
        Self {
            name: name.into(),
            effect: effect.into(),
            cause: cause.into(),
            context: context.map(Into::into),
            map,
            horizon,
            lr: DEFAULT_DUAL_LR,
            lr_scale: 1.0,
            readiness: DEFAULT_READINESS,
            engaged: true,
            issued: VecDeque::new(),
        }
    }

    pub fn effect_dim(&self) -> usize {
        self.map.in_dims()[0]
    }

    pub fn cause_dim(&self) -> usize {
        self.map.out_dim()
    }

    pub fn context_dim(&self) -> Option<usize> {
        self.context.as_ref().map(|_| self.map.in_dims()[2])
    }

    pub fn pairs_with(&self, p: &PredictiveSchema) -> bool {
        p.effect == self.effect && p.cause == self.cause && p.cause_dim() == self.cause_dim() && p.effect_dim() == self.effect_dim()
    }

    fn ctx_or_zero(&self, ctx: Option<&ActivityPattern>) -> Option<ActivityPattern> {
        self.context_dim().map(|d| ctx.cloned().unwrap_or_else(|| ActivityPattern::zeros(d)))
    }

    /// Command for the cause's modulatory channel. A silent goal yields silence.
    pub fn emit(
        &mut self,
        effect_now: &ActivityPattern,
        goal: &ActivityPattern,
        ctx: Option<&ActivityPattern>,
        paired: Option<&PredictiveSchema>,
    ) -> Result<ActivityPattern, DualError> {
        let paired = paired.filter(|p| self.pairs_with(p)).ok_or_else(|| DualError::NoPairedPredictive(self.name.clone()))?;
        let c = self.ctx_or_zero(ctx);
        let mut parts = vec![effect_now, goal];
        parts.extend(c.as_ref());
        let dual_x = self.map.concat(&parts)?;
        let (out, record) = if goal.is_silent() || !self.engaged {
            (ActivityPattern::zeros(self.cause_dim()), None)
        } else {
            let u = ActivityPattern::new(self.map.eval(&dual_x))?;
            let pred_x = paired.input_vector(effect_now, &u, c.as_ref())?;
            (u, Some(Issued { dual_x, pred_x, goal: goal.values().to_vec() }))
        };
        self.issued.push_back(record);
        while self.issued.len() > self.horizon {
            self.issued.pop_front();
        }
        Ok(out)
    }

    /// Effect-space error mapped to cause space through the forward model's
    /// input Jacobian, evaluated where the command was issued.
    pub fn transport(&self, paired: &PredictiveSchema, pred_x: &[f64], distal: &[f64]) -> Vec<f64> {
        let fw = paired.map.forward(pred_x);
        let full = paired.map.input_vjp(&fw, distal);
        let off = paired.map.block_offset(1);
        full[off..off + self.cause_dim()].to_vec()
    }

    /// Learn from the effect observed `horizon` ticks after a command.
    /// Returns the RMS distal error when a matured command existed.
    pub fn tune(&mut self, observed: &ActivityPattern, paired: Option<&PredictiveSchema>) -> Result<Option<f64>, DualError> {
        let paired = paired.filter(|p| self.pairs_with(p)).ok_or_else(|| DualError::NoPairedPredictive(self.name.clone()))?;
        observed.check_dim(self.effect_dim())?;
        if self.issued.len() < self.horizon {
            return Ok(None);
        }
        let Some(rec) = self.issued.pop_front().flatten() else {
            return Ok(None);
        };
        let distal: Vec<f64> = rec.goal.iter().zip(observed.values()).map(|(g, o)| g - o).collect();
        let rms = (distal.iter().map(|e| e * e).sum::<f64>() / distal.len() as f64).sqrt();
        let proximal = self.transport(paired, &rec.pred_x, &distal);
        let fw = self.map.forward(&rec.dual_x);
        let descent: Vec<f64> = proximal.iter().map(|p| -p).collect();
        self.map.descend(&fw, &descent, self.lr * self.lr_scale);
        Ok(Some(rms))
    }

    /// Drop queued commands without learning from them.
    pub fn clear_issued(&mut self) {
        self.issued.clear();
    }

    pub fn store(&self, ps: &mut ParamStore) {
        ps.insert("map".into(), self.map.params().to_vec());
        ps.insert("lr_scale".into(), vec![self.lr_scale]);
        ps.insert("engaged".into(), vec![f64::from(u8::from(self.engaged))]);
        let mut flat = Vec::new();
        for rec in &self.issued {
            match rec {
                None => flat.push(0.0),
                Some(r) => {
                    flat.push(1.0);
                    flat.extend(&r.dual_x);
                    flat.extend(&r.pred_x);
                    flat.extend(&r.goal);
                }
            }
        }
        ps.insert("issued".into(), flat);
    }

    pub fn load(&mut self, ps: &ParamStore, paired_in: usize) {
        if let Some(p) = ps.get("map") {
            self.map.set_params(p.clone());
        }
        if let Some(s) = ps.get("lr_scale") {
            self.lr_scale = s[0];
        }
        if let Some(e) = ps.get("engaged") {
            self.engaged = e[0] != 0.0;
        }
        if let Some(flat) = ps.get("issued") {
            let (nd, ng) = (self.map.in_total(), self.effect_dim());
            self.issued.clear();
            let mut i = 0;
            while i < flat.len() {
                if flat[i] == 0.0 {
                    self.issued.push_back(None);
                    i += 1;
                } else {
                    let s = i + 1;
                    self.issued.push_back(Some(Issued {
                        dual_x: flat[s..s + nd].to_vec(),
                        pred_x: flat[s + nd..s + nd + paired_in].to_vec(),
                        goal: flat[s + nd + paired_in..s + nd + paired_in + ng].to_vec(),
                    }));
                    i = s + nd + paired_in + ng;
                }
            }
        }
    }

    /// Kernel node. Inputs `effect`, `goal`[, `ctx`]; output `command`. The paired
    /// predictive is read from peer parameters; tuning waits for its readiness.
    pub fn node(&self, paired: &PredictiveSchema, effect_tag: SemanticTag) -> SchemaNode {
        let template = self.clone();
        let pred_template = paired.clone();
        let pred_name = paired.name.clone();
        let mut node = SchemaNode::new(&self.name, move |ctx, params| {
            let mut d = template.clone();
            d.load(params, pred_template.map.in_total());
            let pred = ctx.peer_params(&pred_name).map(|ps| PredictiveSchema::from_params(&pred_template, ps));
            let effect = ctx.input("effect");
            if pred.as_ref().is_some_and(|p| p.errors.is_below(d.readiness)) {
                d.tune(effect, pred.as_ref()).expect("paired at construction");
            } else if d.issued.len() >= d.horizon {
                d.issued.pop_front();
            }
            let c = d.context_dim().map(|_| ctx.input("ctx"));
            let out = d.emit(effect, ctx.input("goal"), c, pred.as_ref()).expect("paired at construction");
            let mut ps = params.clone();
            d.store(&mut ps);
            Emission { activity: Some(out.max_abs()), outputs: vec![out], params: Some(ps) }
        })
        .with_input(PortSpec::input("effect", self.effect_dim(), effect_tag))
        .with_input(PortSpec::input("goal", self.effect_dim(), SemanticTag::Goal))
        .with_output(PortSpec::output("command", self.cause_dim(), SemanticTag::Command));
        if let Some(dim) = self.context_dim() {
            node = node.with_input(PortSpec::input("ctx", dim, SemanticTag::Perceptual));
        }
        self.store(&mut node.params);
        node
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::oracle::{central_jacobian, max_relative_error};
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    fn pretrained_scalar_predictive(seed: u64, gain: f64) -> PredictiveSchema {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let map = DifferentiableMap::random(&[1, 1], 1, None, 0.01, &mut rng);
        let mut p = PredictiveSchema::new("P", "X", "Y", None, map, 1);
        let mut effect = ActivityPattern::scalar(0.0);
        for _ in 0..3000 {
            let u = ActivityPattern::scalar(rng.gen_range(-0.4..0.4));
            p.predict(&effect, &u, None).unwrap();
            effect = ActivityPattern::scalar(gain * u.get(0));
            p.tune(&effect).unwrap();
        }
        p
    }

    #[test]
    fn silent_goal_silent_command() {
        let p = PredictiveSchema::new("P", "X", "Y", None, DifferentiableMap::zeros(&[2, 3], 2, None), 1);
        let mut rng = ChaCha8Rng::seed_from_u64(0);
        let mut d = DualSchema::new("D", "X", "Y", None, DifferentiableMap::random(&[2, 2], 3, None, 0.5, &mut rng), 1);
        d.map.output_bias_mut().iter_mut().for_each(|b| *b = 0.7);
        let out = d.emit(&ActivityPattern::new(vec![0.3, -0.2]).unwrap(), &ActivityPattern::zeros(2), None, Some(&p)).unwrap();
        assert!(out.is_silent());
    }

    #[test]
    fn dormant_dual_is_silent() {
        let p = PredictiveSchema::new("P", "X", "Y", None, DifferentiableMap::zeros(&[1, 1], 1, None), 1);
        let mut d = DualSchema::new("D", "X", "Y", None, DifferentiableMap::zeros(&[1, 1], 1, None), 1);
        d.map.output_bias_mut()[0] = 0.5;
        d.engaged = false;
        let out = d.emit(&ActivityPattern::scalar(0.0), &ActivityPattern::scalar(0.4), None, Some(&p)).unwrap();
        assert!(out.is_silent());
        assert_eq!(d.tune(&ActivityPattern::scalar(0.0), Some(&p)).unwrap(), None);
    }

    #[test]
    fn missing_pair_is_an_error() {
        let other = PredictiveSchema::new("P", "X", "Z", None, DifferentiableMap::zeros(&[1, 1], 1, None), 1);
        let mut d = DualSchema::new("D", "X", "Y", None, DifferentiableMap::zeros(&[1, 1], 1, None), 1);
        let z = ActivityPattern::scalar(0.0);
        assert!(matches!(d.emit(&z, &z, None, None), Err(DualError::NoPairedPredictive(_))));
        assert!(matches!(d.tune(&z, Some(&other)), Err(DualError::NoPairedPredictive(_))));
    }

    #[test]
    fn goal_reached_means_no_update() {
        let p = pretrained_scalar_predictive(1, 2.0);
        let mut d = DualSchema::new("D", "X", "Y", None, DifferentiableMap::zeros(&[1, 1], 1, None), 1);
        let g = ActivityPattern::scalar(0.4);
        d.emit(&ActivityPattern::scalar(0.1), &g, None, Some(&p)).unwrap();
        let before = d.map.clone();
        assert_eq!(d.tune(&g, Some(&p)).unwrap(), Some(0.0));
        assert_eq!(d.map, before);
    }

    #[test]
    fn transport_matches_finite_difference() {
        let mut rng = ChaCha8Rng::seed_from_u64(9);
        let pmap = DifferentiableMap::random(&[3, 2, 2], 3, None, 1.0, &mut rng);
        let p = PredictiveSchema::new("P", "X", "Y", Some("V"), pmap, 1);
        let d = DualSchema::new("D", "X", "Y", Some("V"), DifferentiableMap::zeros(&[3, 3, 2], 2, None), 1);
        for _ in 0..100 {
            let x: Vec<f64> = (0..7).map(|_| rng.gen_range(-1.0..1.0)).collect();
            let e: Vec<f64> = (0..3).map(|_| rng.gen_range(-1.0..1.0)).collect();
            let jac = central_jacobian(
                |u| {
                    let mut probe = x.clone();
                    probe[3..5].copy_from_slice(u);
                    p.map.eval(&probe)
                },
                &x[3..5],
                1e-6,
            );
            let reference: Vec<f64> = (0..2).map(|j| (0..3).map(|i| jac[i][j] * e[i]).sum()).collect();
            assert!(max_relative_error(&d.transport(&p, &x, &e), &reference, 1e-6) < 1e-4);
        }
    }

    #[test]
    fn converges_to_analytic_inverse_of_scalar_plant() {
        // Plant: effect(t+1) = 2 * command(t). Analytic inverse: command = goal / 2.
        let p = pretrained_scalar_predictive(4, 2.0);
        for &goal in &[-0.6, -0.2, 0.3, 0.7] {
            let mut rng = ChaCha8Rng::seed_from_u64(17);
            let map = DifferentiableMap::random(&[1, 1], 1, None, 0.01, &mut rng);
            let mut d = DualSchema::new("D", "X", "Y", None, map, 1);
            let g = ActivityPattern::scalar(goal);
            let mut effect = ActivityPattern::scalar(0.0);
            let mut u = ActivityPattern::scalar(0.0);
            for _ in 0..2000 {
                u = d.emit(&effect, &g, None, Some(&p)).unwrap();
                effect = ActivityPattern::scalar(2.0 * u.get(0));
                d.tune(&effect, Some(&p)).unwrap();
            }
            assert!((u.get(0) - goal / 2.0).abs() < 1e-3, "goal {goal}: command {}", u.get(0));
        }
    }

    #[test]
    fn params_round_trip() {
        let p = pretrained_scalar_predictive(2, 2.0);
        let mut d = DualSchema::new("D", "X", "Y", None, DifferentiableMap::zeros(&[1, 1], 1, None), 2);
        d.emit(&ActivityPattern::scalar(0.1), &ActivityPattern::scalar(0.5), None, Some(&p)).unwrap();
        d.emit(&ActivityPattern::scalar(0.1), &ActivityPattern::scalar(0.0), None, Some(&p)).unwrap();
        let mut ps = ParamStore::new();
        d.store(&mut ps);
        let mut back = DualSchema::new("D", "X", "Y", None, DifferentiableMap::zeros(&[1, 1], 1, None), 2);
        back.load(&ps, p.map.in_total());
        assert_eq!(back, d);
    }
}
