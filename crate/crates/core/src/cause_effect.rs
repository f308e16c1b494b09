//! Online discovery of delayed cause-effect relations between output ports.
//!
//! For every (effect, cause, delay) triple an instantaneous score compares the
//! effect now with the cause `delay` ticks ago: both active earns 1, any
//! mismatch in level costs `alpha` times the squared difference. Scores are
//! summed with rate `beta` into a reliability matrix; reliable triples are
//! extracted once they cross a threshold.

use serde::{Deserialize, Serialize};

use crate::kernel::{KernelError, Network, PortRef};
use crate::pattern::ActivityPattern;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct CauseEffectConfig {
    pub theta_act: f64,
    pub alpha: f64,
    pub beta: f64,
    pub r_threshold: f64,
    pub max_delay: usize,
    /// Consider every output port as both cause and effect.
    pub open_candidates: bool,
}

impl Default for CauseEffectConfig {
    fn default() -> Self {
        Self { theta_act: 0.05, alpha: 0.5, beta: 0.01, r_threshold: 0.3, max_delay: 8, open_candidates: false }
    }
}

/// 1 when the pattern's mean absolute value exceeds `theta_act`.
pub fn active(v: &ActivityPattern, theta_act: f64) -> f64 {
    if v.mean_abs() > theta_act {
        1.0
    } else {
        0.0
    }
}

/// Mean squared difference, or squared difference of mean |.| when dims differ.
pub fn distance(a: &ActivityPattern, b: &ActivityPattern) -> f64 {
    if a.dim() == b.dim() {
        a.values().iter().zip(b.values()).map(|(x, y)| (x - y) * (x - y)).sum::<f64>() / a.dim() as f64
    } else {
        (a.mean_abs() - b.mean_abs()).powi(2)
    }
}

pub fn instantaneous_c(effect_now: &ActivityPattern, cause_lagged: &ActivityPattern, alpha: f64, theta_act: f64) -> f64 {
    active(effect_now, theta_act) * active(cause_lagged, theta_act) - alpha * distance(cause_lagged, effect_now)
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CandidateSpace {
    pub effects: Vec<PortRef>,
    pub causes: Vec<PortRef>,
    pub delays: Vec<usize>,
}

impl CandidateSpace {
    pub fn new(effects: Vec<PortRef>, causes: Vec<PortRef>, max_delay: usize) -> Self {
        let mut e = effects;
        let mut c = causes;
        e.dedup();
        c.dedup();
        Self { effects: e, causes: c, delays: (0..=max_delay).collect() }
    }

    /// Causes are motor/premotor outputs, effects perceptual/sensorimotor/proprioceptive
    /// outputs; `open` takes every output on both sides.
    pub fn from_network(net: &Network, max_delay: usize, open: bool) -> Self {
        let mut effects = Vec::new();
        let mut causes = Vec::new();
        for name in net.schema_names() {
            let node = net.schema(&name).expect("listed");
            for p in &node.outputs {
                let r = PortRef::new(&name, &p.name);
                if open || p.port_type.tag.is_effect_like() {
                    effects.push(r.clone());
                }
                if open || p.port_type.tag.is_cause_like() {
                    causes.push(r);
                }
            }
        }
        Self::new(effects, causes, max_delay)
    }

    pub fn len(&self) -> usize {
        self.effects.len() * self.causes.len() * self.delays.len()
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Relation {
    pub effect: PortRef,
    pub cause: PortRef,
    pub tau: usize,
    pub r: f64,
    /// Best r at any other delay for the same pair.
    pub runner_up: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ReliabilityMatrix {
    pub space: CandidateSpace,
    pub config: CauseEffectConfig,
    r: Vec<f64>,
    pub ticks: u64,
}

impl ReliabilityMatrix {
    pub fn new(space: CandidateSpace, config: CauseEffectConfig) -> Self {
        let n = space.len();
        Self { space, config, r: vec![0.0; n], ticks: 0 }
    }

    fn idx(&self, e: usize, c: usize, d: usize) -> usize {
        (e * self.space.causes.len() + c) * self.space.delays.len() + d
    }

    pub fn get(&self, e: usize, c: usize, d: usize) -> f64 {
        self.r[self.idx(e, c, d)]
    }

    pub fn lookup(&self, effect: &str, cause: &str, tau: usize) -> Option<f64> {
        let e = self.space.effects.iter().position(|p| p.schema == effect)?;
        let c = self.space.causes.iter().position(|p| p.schema == cause)?;
        let d = self.space.delays.iter().position(|&t| t == tau)?;
        Some(self.get(e, c, d))
    }

    /// One update per triple from any history reader `(port, lag) -> pattern`.
    pub fn accumulate_with<F>(&mut self, mut read: F) -> Result<(), KernelError>
    where
        F: FnMut(&PortRef, usize) -> Result<ActivityPattern, KernelError>,
    {
        let (alpha, beta, theta) = (self.config.alpha, self.config.beta, self.config.theta_act);
        let effects: Vec<ActivityPattern> = self.space.effects.iter().map(|p| read(p, 0)).collect::<Result<_, _>>()?;
        for c in 0..self.space.causes.len() {
            for d in 0..self.space.delays.len() {
                let lagged = read(&self.space.causes[c], self.space.delays[d])?;
                for (e, now) in effects.iter().enumerate() {
                    let i = self.idx(e, c, d);
                    self.r[i] += beta * instantaneous_c(now, &lagged, alpha, theta);
                }
            }
        }
        self.ticks += 1;
        Ok(())
    }

    /// Update from the network's committed history at its current tick.
    pub fn accumulate(&mut self, net: &Network) -> Result<(), KernelError> {
        self.accumulate_with(|p, lag| net.read_port(p, lag))
    }

    pub fn extract(&self) -> Vec<Relation> {
        self.extract_above(self.config.r_threshold)
    }

    /// Best-delay triple per (effect, cause) pair whose r exceeds `threshold`,
    /// sorted by r descending.
    pub fn extract_above(&self, threshold: f64) -> Vec<Relation> {
        let nd = self.space.delays.len();
        let mut out = Vec::new();
        for (e, effect) in self.space.effects.iter().enumerate() {
            for (c, cause) in self.space.causes.iter().enumerate() {
                if effect == cause {
                    continue;
                }
                let row: Vec<f64> = (0..nd).map(|d| self.get(e, c, d)).collect();
                let best = (0..nd).fold(0, |b, d| if row[d] > row[b] { d } else { b });
                if row[best] > threshold {
                    let runner_up = (0..nd).filter(|&d| d != best).map(|d| row[d]).fold(f64::NEG_INFINITY, f64::max);
                    out.push(Relation {
                        effect: effect.clone(),
                        cause: cause.clone(),
                        tau: self.space.delays[best],
                        r: row[best],
                        runner_up,
                    });
                }
            }
        }
        out.sort_by(|a, b| {
            b.r.total_cmp(&a.r)
                .then_with(|| a.effect.cmp(&b.effect))
                .then_with(|| a.cause.cmp(&b.cause))
        });
        out
    }

    /// Tab-separated `effect cause tau r` rows, one per triple.
    pub fn dump(&self) -> String {
        let mut s = String::from("effect\tcause\ttau\tr\n");
        for (e, effect) in self.space.effects.iter().enumerate() {
            for (c, cause) in self.space.causes.iter().enumerate() {
                for (d, tau) in self.space.delays.iter().enumerate() {
                    s.push_str(&format!("{effect}\t{cause}\t{tau}\t{:.6}\n", self.get(e, c, d)));
                }
            }
        }
        s
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::kernel::{Emission, PortSpec, SchemaNode, SemanticTag};
    use crate::oracle::best_matching_lag;
    use proptest::prelude::*;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    fn s(v: f64) -> ActivityPattern {
        ActivityPattern::scalar(v)
    }

    #[test]
    fn both_inactive_scores_zero() {
        assert_eq!(instantaneous_c(&s(0.0), &s(0.0), 0.5, 0.05), 0.0);
    }

    #[test]
    fn equal_active_scores_one() {
        assert_eq!(instantaneous_c(&s(0.5), &s(0.5), 0.5, 0.05), 1.0);
    }

    #[test]
    fn lone_cause_pays_distance() {
        assert_eq!(instantaneous_c(&s(0.0), &s(1.0), 0.5, 0.05), -0.5);
    }

    #[test]
    fn constant_score_sums_closed_form() {
        let space = CandidateSpace::new(vec![PortRef::new("E", "out")], vec![PortRef::new("C", "out")], 0);
        let mut m = ReliabilityMatrix::new(space, CauseEffectConfig::default());
        for _ in 0..37 {
            m.accumulate_with(|_, _| Ok(s(0.5))).unwrap();
        }
        assert!((m.get(0, 0, 0) - 0.01 * 37.0).abs() < 1e-12);
    }

    #[test]
    fn empty_matrix_extracts_nothing() {
        let space = CandidateSpace::new(vec![PortRef::new("E", "out")], vec![PortRef::new("C", "out")], 8);
        assert!(ReliabilityMatrix::new(space, CauseEffectConfig::default()).extract().is_empty());
    }

    /// Network of replay sources: each schema emits its recorded signal by tick.
    fn replay_network(signals: &[(&str, SemanticTag, Vec<f64>)]) -> Network {
        let mut net = Network::new(0);
        for (name, tag, sig) in signals {
            let sig = sig.clone();
            net.add_schema(
                SchemaNode::new(name, move |ctx, _| Emission::outputs(vec![s(sig.get(ctx.tick as usize).copied().unwrap_or(0.0))]))
                    .with_output(PortSpec::output("out", 1, *tag)),
            )
            .unwrap();
        }
        net
    }

    fn sparse_signal(rng: &mut ChaCha8Rng, len: usize) -> Vec<f64> {
        (0..len).map(|_| if rng.gen_bool(0.15) { rng.gen_range(0.2..0.6) } else { 0.0 }).collect()
    }

    #[test]
    fn unrelated_signals_never_extracted() {
        // Monte-Carlo reference: independent sparse signals give E[c] near 0.
        let mut worst: f64 = 0.0;
        for seed in 0..20 {
            let mut rng = ChaCha8Rng::seed_from_u64(seed);
            let sigs: Vec<(&str, SemanticTag, Vec<f64>)> = vec![
                ("A", SemanticTag::Motor, sparse_signal(&mut rng, 2000)),
                ("B", SemanticTag::Motor, sparse_signal(&mut rng, 2000)),
                ("C", SemanticTag::Motor, sparse_signal(&mut rng, 2000)),
                ("ONE", SemanticTag::Perceptual, sparse_signal(&mut rng, 2000)),
                ("TWO", SemanticTag::Perceptual, sparse_signal(&mut rng, 2000)),
            ];
            let mut net = replay_network(&sigs);
            let mut m = ReliabilityMatrix::new(CandidateSpace::from_network(&net, 8, false), CauseEffectConfig::default());
            for _ in 0..2000 {
                net.step().unwrap();
                m.accumulate(&net).unwrap();
            }
            assert!(m.extract().is_empty(), "seed {seed}: {:?}", m.extract());
            worst = worst.max(m.r.iter().fold(0.0, |a: f64, b| a.max(b.abs())));
        }
        assert!(worst < 0.3);
    }

    #[test]
    fn online_equals_offline_sum() {
        let mut rng = ChaCha8Rng::seed_from_u64(3);
        let cause = sparse_signal(&mut rng, 300);
        let effect = sparse_signal(&mut rng, 300);
        let mut net = replay_network(&[("C", SemanticTag::Motor, cause.clone()), ("E", SemanticTag::Perceptual, effect.clone())]);
        let cfg = CauseEffectConfig::default();
        let mut m = ReliabilityMatrix::new(CandidateSpace::from_network(&net, 4, false), cfg.clone());
        for _ in 0..300 {
            net.step().unwrap();
            m.accumulate(&net).unwrap();
        }
        // Commit labelled k holds signal[k - 1].
        for tau in 0..=4usize {
            let mut sum = 0.0;
            for k in 1..=300usize {
                let lagged = if k > tau { cause[k - 1 - tau] } else { 0.0 };
                sum += instantaneous_c(&s(effect[k - 1]), &s(lagged), cfg.alpha, cfg.theta_act);
            }
            assert!((m.get(0, 0, tau) - cfg.beta * sum).abs() < 1e-9);
        }
    }

    #[test]
    fn planted_delay_is_recovered() {
        for k in [0usize, 2, 3, 5, 8] {
            let mut rng = ChaCha8Rng::seed_from_u64(k as u64 + 100);
            let cause = sparse_signal(&mut rng, 800);
            let effect: Vec<f64> = (0..800).map(|t| if t >= k { cause[t - k] } else { 0.0 }).collect();
            let events = cause.iter().filter(|v| **v > 0.0).count();
            assert!(events >= 50);
            let mut net = replay_network(&[("C", SemanticTag::Motor, cause.clone()), ("E", SemanticTag::Perceptual, effect.clone())]);
            let mut m = ReliabilityMatrix::new(CandidateSpace::from_network(&net, 8, false), CauseEffectConfig::default());
            for _ in 0..800 {
                net.step().unwrap();
                m.accumulate(&net).unwrap();
            }
            let rel = m.extract();
            assert_eq!(rel.len(), 1);
            assert_eq!(rel[0].tau, k);
            assert_eq!(best_matching_lag(&effect, &cause, 8, 0.05), k);
        }
    }

    #[test]
    fn silent_ports_keep_zero() {
        let mut net = replay_network(&[("C", SemanticTag::Motor, vec![]), ("E", SemanticTag::Perceptual, vec![])]);
        let mut m = ReliabilityMatrix::new(CandidateSpace::from_network(&net, 8, false), CauseEffectConfig::default());
        for _ in 0..200 {
            net.step().unwrap();
            m.accumulate(&net).unwrap();
        }
        assert!(m.r.iter().all(|&v| v == 0.0));
    }

    #[test]
    fn lag_beyond_horizon_surfaces() {
        let net = Network::with_horizon(0, 4);
        let space = CandidateSpace::new(vec![PortRef::new("E", "out")], vec![PortRef::new("C", "out")], 8);
        let mut m = ReliabilityMatrix::new(space, CauseEffectConfig::default());
        let err = m.accumulate_with(|p, lag| net.read_port(p, lag).or_else(|e| match e {
            KernelError::UnknownPort(_) if lag <= net.horizon() => Ok(s(0.0)),
            other => Err(other),
        }));
        assert!(matches!(err, Err(KernelError::LagBeyondHorizon { .. })));
    }

    proptest! {
        #[test]
        fn raising_threshold_never_adds(values in prop::collection::vec(-1.0f64..1.0, 2 * 3 * 4), lo in -0.5f64..0.5, bump in 0.0f64..0.5) {
            let space = CandidateSpace::new(
                vec![PortRef::new("E1", "o"), PortRef::new("E2", "o")],
                vec![PortRef::new("C1", "o"), PortRef::new("C2", "o"), PortRef::new("C3", "o")],
                3,
            );
            let mut m = ReliabilityMatrix::new(space, CauseEffectConfig::default());
            m.r = values;
            let low: Vec<_> = m.extract_above(lo).into_iter().map(|r| (r.effect, r.cause)).collect();
            let high = m.extract_above(lo + bump);
            prop_assert!(high.iter().all(|r| low.contains(&(r.effect.clone(), r.cause.clone()))));
            prop_assert!(high.iter().all(|r| r.r > lo + bump));
        }
    }
}
