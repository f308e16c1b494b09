//! Forward models: predict an effect pattern `horizon` ticks ahead from the
//! current effect, cause and optional context, tuned online on the squared error.

use std::collections::VecDeque;

use serde::{Deserialize, Serialize};

use crate::kernel::{Emission, ParamStore, PortSpec, SchemaNode, SemanticTag};
use crate::map::DifferentiableMap;
use crate::pattern::{ActivityPattern, PatternError};

pub const DEFAULT_PREDICTIVE_LR: f64 = 0.05;
pub const ERROR_WINDOW: usize = 100;
/// Fewer samples than this never count as ready.
pub const MIN_READY_SAMPLES: usize = 20;

/// Rolling record of prediction-error magnitudes.
#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
pub struct ErrorWindow {
    samples: VecDeque<f64>,
}

impl ErrorWindow {
    pub fn from_samples(samples: &[f64]) -> Self {
        let skip = samples.len().saturating_sub(ERROR_WINDOW);
        Self { samples: samples[skip..].iter().copied().collect() }
    }

    pub fn push(&mut self, e: f64) {
        self.samples.push_back(e);
        if self.samples.len() > ERROR_WINDOW {
            self.samples.pop_front();
        }
    }

    pub fn len(&self) -> usize {
        self.samples.len()
    }

    pub fn is_empty(&self) -> bool {
        self.samples.is_empty()
    }

    pub fn mean(&self) -> Option<f64> {
        (!self.samples.is_empty()).then(|| self.samples.iter().sum::<f64>() / self.samples.len() as f64)
    }

    pub fn is_below(&self, threshold: f64) -> bool {
        self.samples.len() >= MIN_READY_SAMPLES && self.mean().is_some_and(|m| m < threshold)
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PredictiveSchema {
    pub name: String,
    pub effect: String,
    pub cause: String,
    pub context: Option<String>,
    pub map: DifferentiableMap,
    pub horizon: usize,
    pub lr: f64,
    pub frozen: bool,
    pending: VecDeque<Vec<f64>>,
    last_prediction: Option<ActivityPattern>,
    pub errors: ErrorWindow,
}

impl PredictiveSchema {
    pub fn new(name: &str, effect: &str, cause: &str, context: Option<&str>, map: DifferentiableMap, horizon: usize) -> Self {
        assert!(horizon >= 1, "prediction horizon is at least one tick");
        assert_eq!(map.in_dims().len(), 2 + usize::from(context.is_some()), "map inputs are effect, cause[, context]");
        assert_eq!(map.in_dims()[0], map.out_dim(), "prediction lives in effect space");
        Self {
            name: name.into(),
            effect: effect.into(),
            cause: cause.into(),
            context: context.map(Into::into),
            map,
            horizon,
            lr: DEFAULT_PREDICTIVE_LR,
            frozen: false,
            pending: VecDeque::new(),
            last_prediction: None,
            errors: ErrorWindow::default(),
        }
    }

    pub fn effect_dim(&self) -> usize {
        self.map.out_dim()
    }

    pub fn cause_dim(&self) -> usize {
        self.map.in_dims()[1]
    }

    pub fn context_dim(&self) -> Option<usize> {
        self.context.as_ref().map(|_| self.map.in_dims()[2])
    }

    pub fn last_prediction(&self) -> Option<&ActivityPattern> {
        self.last_prediction.as_ref()
    }

    pub fn input_vector(
        &self,
        effect_now: &ActivityPattern,
        cause_now: &ActivityPattern,
        ctx: Option<&ActivityPattern>,
    ) -> Result<Vec<f64>, PatternError> {
        match (self.context_dim(), ctx) {
            (Some(_), Some(c)) => self.map.concat(&[effect_now, cause_now, c]),
            (Some(d), None) => self.map.concat(&[effect_now, cause_now, &ActivityPattern::zeros(d)]),
            (None, _) => self.map.concat(&[effect_now, cause_now]),
        }
    }

    /// Anticipated effect `horizon` ticks ahead; the input is queued for tuning.
    pub fn predict(
        &mut self,
        effect_now: &ActivityPattern,
        cause_now: &ActivityPattern,
        ctx: Option<&ActivityPattern>,
    ) -> Result<ActivityPattern, PatternError> {
        let x = self.input_vector(effect_now, cause_now, ctx)?;
        let out = ActivityPattern::new(self.map.eval(&x))?;
        self.pending.push_back(x);
        while self.pending.len() > self.horizon {
            self.pending.pop_front();
        }
        self.last_prediction = Some(out.clone());
        Ok(out)
    }

    /// Compare `observed` with the prediction issued `horizon` ticks ago and take
    /// one gradient step on half the squared error. Returns the RMS error, or
    /// `None` while no matured prediction exists.
    pub fn tune(&mut self, observed: &ActivityPattern) -> Result<Option<f64>, PatternError> {
        observed.check_dim(self.effect_dim())?;
        if self.pending.len() < self.horizon {
            return Ok(None);
        }
        let x = self.pending.pop_front().expect("non-empty");
        let fw = self.map.forward(&x);
        let err: Vec<f64> = fw.y.iter().zip(observed.values()).map(|(y, o)| y - o).collect();
        let rms = (err.iter().map(|e| e * e).sum::<f64>() / err.len() as f64).sqrt();
        // A frozen model keeps its fit record untouched so readiness survives.
        if !self.frozen {
            self.map.descend(&fw, &err, self.lr);
            self.errors.push(rms);
        }
        Ok(Some(rms))
    }

    pub fn store(&self, ps: &mut ParamStore) {
        ps.insert("map".into(), self.map.params().to_vec());
        ps.insert("pending".into(), self.pending.iter().flatten().copied().collect());
        ps.insert("errors".into(), self.errors.samples.iter().copied().collect());
        ps.insert("frozen".into(), vec![f64::from(u8::from(self.frozen))]);
        if let Some(p) = &self.last_prediction {
            ps.insert("prediction".into(), p.values().to_vec());
        }
    }

    pub fn load(&mut self, ps: &ParamStore) {
        if let Some(p) = ps.get("map") {
            self.map.set_params(p.clone());
        }
        if let Some(p) = ps.get("pending") {
            let n = self.map.in_total();
            self.pending = p.chunks(n).map(<[f64]>::to_vec).collect();
        }
        if let Some(e) = ps.get("errors") {
            self.errors.samples = e.iter().copied().collect();
        }
        if let Some(f) = ps.get("frozen") {
            self.frozen = f.first().is_some_and(|&v| v != 0.0);
        }
        self.last_prediction = ps.get("prediction").map(|p| ActivityPattern::new(p.clone()).expect("finite"));
    }

    pub fn from_params(template: &Self, ps: &ParamStore) -> Self {
        let mut p = template.clone();
        p.load(ps);
        p
    }

    /// Kernel node. Inputs `effect`, `cause`[, `ctx`]; outputs `prediction` and
    /// the scalar incoherence signal `error`.
    pub fn node(&self, effect_tag: SemanticTag, cause_tag: SemanticTag) -> SchemaNode {
        let template = self.clone();
        let mut node = SchemaNode::new(&self.name, move |ctx, params| {
            let mut p = PredictiveSchema::from_params(&template, params);
            let effect = ctx.input("effect");
            let err = p.tune(effect).expect("wired dims").unwrap_or(0.0);
            let c = p.context_dim().map(|_| ctx.input("ctx"));
            let pred = p.predict(effect, ctx.input("cause"), c).expect("wired dims");
            let mut ps = params.clone();
            p.store(&mut ps);
            Emission { outputs: vec![pred.clone(), ActivityPattern::scalar(err)], params: Some(ps), activity: Some(pred.max_abs()) }
        })
        .with_input(PortSpec::input("effect", self.effect_dim(), effect_tag))
        .with_input(PortSpec::input("cause", self.cause_dim(), cause_tag))
        .with_output(PortSpec::output("prediction", self.effect_dim(), SemanticTag::Prediction))
        .with_output(PortSpec::output("error", 1, SemanticTag::Generic));
        if let Some(d) = self.context_dim() {
            node = node.with_input(PortSpec::input("ctx", d, SemanticTag::Perceptual));
        }
        self.store(&mut node.params);
        node
    }
}

/// Windowed-mean error sequence over consecutive non-overlapping windows.
pub fn window_means(errors: &[f64], window: usize) -> Vec<f64> {
    errors.chunks_exact(window).map(|w| w.iter().sum::<f64>() / window as f64).collect()
}

/// True when no window mean rises by more than `tolerance` times the largest mean.
pub fn is_windowed_nonincreasing(means: &[f64], tolerance: f64) -> bool {
    let top = means.iter().copied().fold(0.0, f64::max);
    means.windows(2).all(|w| w[1] <= w[0] + tolerance * top)
}
