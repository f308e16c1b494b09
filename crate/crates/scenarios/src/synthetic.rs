//! Five-schema toy world: three motor sources emitting sparse random bursts and
//! two perceptual schemas that echo one of them after a fixed delay.

use rand::Rng;
use serde::{Deserialize, Serialize};

use schemanet::cause_effect::{CandidateSpace, CauseEffectConfig, Relation, ReliabilityMatrix};
use schemanet::{ActivityPattern, Emission, KernelError, Network, PortRef, PortSpec, SchemaNode, SemanticTag};

pub const MOTORS: [&str; 3] = ["A", "B", "C"];
pub const PERCEPTS: [&str; 2] = ["ONE", "TWO"];

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct SyntheticConfig {
    pub ticks: usize,
    pub p_active: f64,
    pub amp_lo: f64,
    pub amp_hi: f64,
    /// Delay from B to ONE.
    pub delay_one: usize,
    /// Delay from C to TWO.
    pub delay_two: usize,
}

impl Default for SyntheticConfig {
    fn default() -> Self {
        Self { ticks: 2000, p_active: 0.15, amp_lo: 0.2, amp_hi: 0.6, delay_one: 5, delay_two: 2 }
    }
}

#[derive(Debug, Clone)]
pub struct SyntheticOutcome {
    pub matrix: ReliabilityMatrix,
    pub relations: Vec<Relation>,
    /// Committed scalar value per schema, indexed by commit tick (entry 0 is the pre-start zero).
    pub traces: Vec<(String, Vec<f64>)>,
}

fn motor(name: &str, p: f64, lo: f64, hi: f64) -> SchemaNode {
    SchemaNode::new(name, move |ctx, _| {
        let mut rng = ctx.rng();
        let v = if rng.gen_bool(p) { rng.gen_range(lo..hi) } else { 0.0 };
        Emission::outputs(vec![ActivityPattern::scalar(v)])
    })
    .with_output(PortSpec::output("out", 1, SemanticTag::Motor))
}

fn percept(name: &str) -> SchemaNode {
    SchemaNode::new(name, |ctx, _| Emission::outputs(vec![ctx.input("sense").clone()]))
        .with_input(PortSpec::input("sense", 1, SemanticTag::Perceptual))
        .with_output(PortSpec::output("out", 1, SemanticTag::Perceptual))
}

pub fn build(seed: u64, cfg: &SyntheticConfig) -> Result<Network, KernelError> {
    assert!(cfg.delay_one >= 1 && cfg.delay_two >= 1, "sensor echoes need at least one tick");
    let mut net = Network::new(seed);
    for m in MOTORS {
        net.add_schema(motor(m, cfg.p_active, cfg.amp_lo, cfg.amp_hi))?;
    }
    for p in PERCEPTS {
        net.add_schema(percept(p))?;
    }
    Ok(net)
}

pub fn run(seed: u64, cfg: &SyntheticConfig, ce: &CauseEffectConfig) -> Result<SyntheticOutcome, KernelError> {
    let mut net = build(seed, cfg)?;
    let mut matrix = ReliabilityMatrix::new(CandidateSpace::from_network(&net, ce.max_delay, ce.open_candidates), ce.clone());
    let names: Vec<String> = net.schema_names();
    let mut traces: Vec<(String, Vec<f64>)> = names.iter().map(|n| (n.clone(), vec![0.0])).collect();
    let wiring = [("ONE", "B", cfg.delay_one), ("TWO", "C", cfg.delay_two)];
    for _ in 0..cfg.ticks {
        // The sensor commit at t+1 echoes the motor commit at t+1-delay.
        for (effect, cause, delay) in wiring {
            let v = net.read_port(&PortRef::new(cause, "out"), delay - 1)?;
            net.set_external(&PortRef::new(effect, "sense"), v)?;
        }
        net.step()?;
        matrix.accumulate(&net)?;
        for (name, trace) in &mut traces {
            trace.push(net.read_port(&PortRef::new(name, "out"), 0)?.get(0));
        }
    }
    let relations = matrix.extract();
    Ok(SyntheticOutcome { matrix, relations, traces })
}
