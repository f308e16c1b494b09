//! Goal schemas: a triggering source posts a desired pattern for an effect schema.

use serde::{Deserialize, Serialize};

use crate::kernel::{Emission, ParamStore, PortSpec, SchemaNode, SemanticTag};
use crate::map::DifferentiableMap;
use crate::pattern::{ActivityPattern, PatternError};

pub const DEFAULT_GOAL_LR: f64 = 0.05;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GoalSchema {
    pub name: String,
    pub source: String,
    pub objective: String,
    pub context_dim: Option<usize>,
    pub map: DifferentiableMap,
    pub lr: f64,
    /// Source activity (max |.|) at or below this posts no goal.
    pub activity_threshold: f64,
}

impl GoalSchema {
    pub fn new(name: &str, source: &str, objective: &str, source_dim: usize, objective_dim: usize, context_dim: Option<usize>) -> Self {
        let mut dims = vec![source_dim];
        dims.extend(context_dim);
        Self {
            name: name.into(),
            source: source.into(),
            objective: objective.into(),
            context_dim,
            map: DifferentiableMap::zeros(&dims, objective_dim, None),
            lr: DEFAULT_GOAL_LR,
            activity_threshold: 0.05,
        }
    }

    fn input(&self, source_out: &ActivityPattern, context: Option<&ActivityPattern>) -> Result<Vec<f64>, PatternError> {
        match (self.context_dim, context) {
            (Some(_), Some(c)) => self.map.concat(&[source_out, c]),
            (Some(d), None) => self.map.concat(&[source_out, &ActivityPattern::zeros(d)]),
            (None, _) => self.map.concat(&[source_out]),
        }
    }

    pub fn is_triggered(&self, source_out: &ActivityPattern) -> bool {
        source_out.max_abs() > self.activity_threshold
    }

    /// Desired objective pattern for the next tick; zero while the source is quiet.
    pub fn emit(&self, source_out: &ActivityPattern, context: Option<&ActivityPattern>) -> Result<ActivityPattern, PatternError> {
        let x = self.input(source_out, context)?;
        if !self.is_triggered(source_out) {
            return Ok(ActivityPattern::zeros(self.map.out_dim()));
        }
        ActivityPattern::new(self.map.eval(&x))
    }

    /// One regression step toward a pattern observed on a rewarded trial.
    /// Unrewarded trials leave the map untouched.
    pub fn tune(
        &mut self,
        source_out: &ActivityPattern,
        context: Option<&ActivityPattern>,
        observed: &ActivityPattern,
        rewarded: bool,
    ) -> Result<(), PatternError> {
        observed.check_dim(self.map.out_dim())?;
        let x = self.input(source_out, context)?;
        if !rewarded || self.lr == 0.0 || !self.is_triggered(source_out) {
            return Ok(());
        }
        let fw = self.map.forward(&x);
        let err: Vec<f64> = fw.y.iter().zip(observed.values()).map(|(y, o)| y - o).collect();
        self.map.descend(&fw, &err, self.lr);
        Ok(())
    }

    pub fn store(&self, ps: &mut ParamStore) {
        ps.insert("map".into(), self.map.params().to_vec());
    }

    pub fn load(&mut self, ps: &ParamStore) {
        if let Some(p) = ps.get("map") {
            self.map.set_params(p.clone());
        }
    }

    /// Kernel node with input `source` (plus `ctx` when configured) and output `goal`.
    pub fn node(&self, source_tag: SemanticTag) -> SchemaNode {
        let template = self.clone();
        let mut node = SchemaNode::new(&self.name, move |ctx, params| {
            let mut g = template.clone();
            g.load(params);
            let c = g.context_dim.map(|_| ctx.input("ctx"));
            let out = g.emit(ctx.input("source"), c).expect("goal inputs validated at wiring");
            Emission::outputs(vec![out])
        })
        .with_input(PortSpec::input("source", self.map.in_dims()[0], source_tag))
        .with_output(PortSpec::output("goal", self.map.out_dim(), SemanticTag::Goal));
        if let Some(d) = self.context_dim {
            node = node.with_input(PortSpec::input("ctx", d, SemanticTag::Interneuron));
        }
        self.store(&mut node.params);
        node
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn prey_bump(dim: usize, centre: usize, amp: f64) -> ActivityPattern {
        let v = (0..dim).map(|i| amp * (-((i as f64 - centre as f64).powi(2)) / 18.0).exp()).collect();
        ActivityPattern::new(v).unwrap()
    }

    #[test]
    fn quiet_source_posts_nothing() {
        let mut g = GoalSchema::new("G", "PREY", "MHM", 16, 16, None);
        g.map.output_bias_mut().iter_mut().for_each(|b| *b = 0.4);
        let out = g.emit(&ActivityPattern::zeros(16), None).unwrap();
        assert!(out.is_silent());
    }

    #[test]
    fn zero_rate_leaves_map() {
        let mut g = GoalSchema::new("G", "PREY", "MHM", 16, 16, None);
        g.lr = 0.0;
        let before = g.map.clone();
        g.tune(&prey_bump(16, 8, 0.5), None, &prey_bump(16, 8, 0.9), true).unwrap();
        assert_eq!(g.map, before);
    }

    #[test]
    fn unrewarded_trial_leaves_map() {
        let mut g = GoalSchema::new("G", "PREY", "MHM", 16, 16, None);
        let before = g.map.clone();
        g.tune(&prey_bump(16, 8, 0.5), None, &prey_bump(16, 8, 0.9), false).unwrap();
        assert_eq!(g.map, before);
    }

    #[test]
    fn converges_to_mean_of_rewarded_patterns() {
        // Closed-form reference: the least-squares fixed point for a constant
        // input is the elementwise mean of the observed patterns.
        let dim = 16;
        let prey = prey_bump(dim, 8, 0.5);
        let observed: Vec<ActivityPattern> = [0.58, 0.6, 0.62, 0.6].iter().map(|&a| prey_bump(dim, 8, a)).collect();
        let mean: Vec<f64> =
            (0..dim).map(|i| observed.iter().map(|o| o.get(i)).sum::<f64>() / observed.len() as f64).collect();
        let mut g = GoalSchema::new("G", "PREY", "MHM", dim, dim, None);
        for k in 0..500 {
            g.tune(&prey, None, &observed[k % observed.len()], true).unwrap();
        }
        let out = g.emit(&prey, None).unwrap();
        let err = out.values().iter().zip(&mean).map(|(a, b)| (a - b).abs()).fold(0.0, f64::max);
        assert!(err < 1e-3, "max abs error {err}");
    }
}
