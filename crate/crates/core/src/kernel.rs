//! Schema network runtime.
//!
//! A tick runs in two phases. `evaluate` calls every behavior against a frozen
//! view of committed history and stages the results; `commit` publishes them
//! all at once. Structural edits are refused while a tick is staged.

use std::collections::{BTreeMap, HashMap, VecDeque};
use std::io::Write;
use std::sync::{Arc, Mutex};

use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::pattern::ActivityPattern;
use crate::rng;

pub const DEFAULT_HORIZON: usize = 64;

#[derive(Debug, Error, PartialEq)]
pub enum KernelError {
    #[error("schema name `{0}` already present")]
    DuplicateName(String),
    #[error("structural mutation attempted while a tick is staged")]
    MidTickMutation,
    #[error("port type mismatch: {src} has dim {src_dim}, {dst} has dim {dst_dim}")]
    TypeMismatch { src: String, src_dim: usize, dst: String, dst_dim: usize },
    #[error("unknown port `{0}`")]
    UnknownPort(String),
    #[error("unknown schema `{0}`")]
    UnknownSchema(String),
    #[error("invalid port declaration: {0}")]
    InvalidPort(String),
    #[error("input port `{0}` already has a connection")]
    PortOccupied(String),
    #[error("behavior of `{schema}` produced an invalid output: {detail}")]
    BehaviorPanic { schema: String, detail: String },
    #[error("lag {lag} exceeds retention horizon {horizon}")]
    LagBeyondHorizon { lag: usize, horizon: usize },
    #[error("no staged tick to commit")]
    NothingStaged,
}

// ---------------------------------------------------------------------------
// ports

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub enum SemanticTag {
    Perceptual,
    Proprioceptive,
    Sensorimotor,
    Motor,
    Premotor,
    Interneuron,
    Goal,
    Prediction,
    Command,
    Generic,
}

impl SemanticTag {
    pub fn is_cause_like(self) -> bool {
        matches!(self, SemanticTag::Motor | SemanticTag::Premotor)
    }

    pub fn is_effect_like(self) -> bool {
        matches!(self, SemanticTag::Perceptual | SemanticTag::Proprioceptive | SemanticTag::Sensorimotor)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct PortType {
    pub dim: usize,
    pub tag: SemanticTag,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum Direction {
    Input,
    Output,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PortSpec {
    pub name: String,
    pub port_type: PortType,
    pub direction: Direction,
    pub modulatory: bool,
}

impl PortSpec {
    pub fn input(name: &str, dim: usize, tag: SemanticTag) -> Self {
        Self { name: name.into(), port_type: PortType { dim, tag }, direction: Direction::Input, modulatory: false }
    }

    pub fn output(name: &str, dim: usize, tag: SemanticTag) -> Self {
        Self { name: name.into(), port_type: PortType { dim, tag }, direction: Direction::Output, modulatory: false }
    }

    /// An input channel reserved for a later modulatory override.
    pub fn modulatory(name: &str, dim: usize, tag: SemanticTag) -> Self {
        Self { modulatory: true, ..Self::input(name, dim, tag) }
    }

    pub fn dim(&self) -> usize {
        self.port_type.dim
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub struct PortRef {
    pub schema: String,
    pub port: String,
}

impl PortRef {
    pub fn new(schema: &str, port: &str) -> Self {
        Self { schema: schema.into(), port: port.into() }
    }
}

impl std::fmt::Display for PortRef {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        write!(f, "{}.{}", self.schema, self.port)
    }
}

// ---------------------------------------------------------------------------
// schemas

/// Named real vectors holding a schema's internal variables.
pub type ParamStore = BTreeMap<String, Vec<f64>>;

/// What a behavior hands back for one tick.
#[derive(Debug, Clone, Default)]
pub struct Emission {
    pub outputs: Vec<ActivityPattern>,
    pub params: Option<ParamStore>,
    pub activity: Option<f64>,
}

impl Emission {
    pub fn outputs(outputs: Vec<ActivityPattern>) -> Self {
        Self { outputs, ..Default::default() }
    }

    pub fn with_params(mut self, params: ParamStore) -> Self {
        self.params = Some(params);
        self
    }
}

/// Read-only view given to a behavior during phase one.
pub struct BehaviorContext<'a> {
    pub schema: &'a str,
    pub tick: u64,
    seed: u64,
    names: &'a [PortSpec],
    inputs: &'a [ActivityPattern],
    peers: &'a HashMap<String, ParamStore>,
}

impl<'a> BehaviorContext<'a> {
    pub fn input(&self, name: &str) -> &ActivityPattern {
        let i = self
            .names
            .iter()
            .position(|p| p.name == name)
            .unwrap_or_else(|| panic!("schema `{}` has no input `{name}`", self.schema));
        &self.inputs[i]
    }

    pub fn input_at(&self, i: usize) -> &ActivityPattern {
        &self.inputs[i]
    }

    pub fn has_input(&self, name: &str) -> bool {
        self.names.iter().any(|p| p.name == name)
    }

    /// Parameters of another schema as committed at the end of the last tick.
    pub fn peer_params(&self, schema: &str) -> Option<&ParamStore> {
        self.peers.get(schema)
    }

    /// Deterministic stream for this (schema, tick).
    pub fn rng(&self) -> ChaCha8Rng {
        rng::stream(self.seed, &format!("{}#{}", self.schema, self.tick))
    }
}

pub type BehaviorFn = Arc<dyn Fn(&BehaviorContext<'_>, &ParamStore) -> Emission + Send + Sync>;

#[derive(Clone)]
pub struct SchemaNode {
    pub name: String,
    pub inputs: Vec<PortSpec>,
    pub outputs: Vec<PortSpec>,
    pub params: ParamStore,
    pub behavior: BehaviorFn,
    pub activity: f64,
}

impl std::fmt::Debug for SchemaNode {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.debug_struct("SchemaNode")
            .field("name", &self.name)
            .field("inputs", &self.inputs)
            .field("outputs", &self.outputs)
            .field("activity", &self.activity)
            .finish()
    }
}

impl SchemaNode {
    pub fn new<F>(name: &str, behavior: F) -> Self
    where
        F: Fn(&BehaviorContext<'_>, &ParamStore) -> Emission + Send + Sync + 'static,
    {
        Self {
            name: name.into(),
            inputs: Vec::new(),
            outputs: Vec::new(),
            params: ParamStore::new(),
            behavior: Arc::new(behavior),
            activity: 0.0,
        }
    }

    pub fn with_input(mut self, p: PortSpec) -> Self {
        self.inputs.push(p);
        self
    }

    pub fn with_output(mut self, p: PortSpec) -> Self {
        self.outputs.push(p);
        self
    }

    pub fn with_param(mut self, key: &str, v: Vec<f64>) -> Self {
        self.params.insert(key.into(), v);
        self
    }

    pub fn input_spec(&self, name: &str) -> Option<&PortSpec> {
        self.inputs.iter().find(|p| p.name == name)
    }

    pub fn output_spec(&self, name: &str) -> Option<&PortSpec> {
        self.outputs.iter().find(|p| p.name == name)
    }

    fn validate(&self) -> Result<(), KernelError> {
        let mut seen = std::collections::HashSet::new();
        for p in self.inputs.iter().chain(&self.outputs) {
            if !seen.insert(p.name.as_str()) {
                return Err(KernelError::InvalidPort(format!("{}.{} declared twice", self.name, p.name)));
            }
            if p.dim() == 0 {
                return Err(KernelError::InvalidPort(format!("{}.{} has zero dimension", self.name, p.name)));
            }
        }
        if let Some(p) = self.outputs.iter().find(|p| p.modulatory || p.direction != Direction::Output) {
            return Err(KernelError::InvalidPort(format!("{}.{} listed as output must be a plain output", self.name, p.name)));
        }
        if let Some(p) = self.inputs.iter().find(|p| p.direction != Direction::Input) {
            return Err(KernelError::InvalidPort(format!("{}.{} listed as input must be input-direction", self.name, p.name)));
        }
        Ok(())
    }
}

// ---------------------------------------------------------------------------
// tracing

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TraceRow {
    pub tick: u64,
    pub schema: String,
    pub port: String,
    pub values: Vec<f64>,
}

pub trait TraceSink: Send {
    fn record(&mut self, row: &TraceRow);
}

/// Writes one JSON object per line.
pub struct JsonLines<W: Write + Send>(pub W);

impl<W: Write + Send> TraceSink for JsonLines<W> {
    fn record(&mut self, row: &TraceRow) {
        serde_json::to_writer(&mut self.0, row).expect("trace write");
        self.0.write_all(b"\n").expect("trace write");
    }
}

/// In-memory line buffer that can be cloned and read back while attached.
#[derive(Clone, Default)]
pub struct SharedBuffer(pub Arc<Mutex<Vec<u8>>>);

impl SharedBuffer {
    pub fn contents(&self) -> Vec<u8> {
        self.0.lock().unwrap().clone()
    }
}

impl Write for SharedBuffer {
    fn write(&mut self, buf: &[u8]) -> std::io::Result<usize> {
        self.0.lock().unwrap().extend_from_slice(buf);
        Ok(buf.len())
    }
    fn flush(&mut self) -> std::io::Result<()> {
        Ok(())
    }
}

// ---------------------------------------------------------------------------
// network

pub type SchemaId = usize;
pub type ConnectionId = usize;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Connection {
    pub source: PortRef,
    pub target: PortRef,
    pub delay_ticks: usize,
}

#[derive(Debug, Clone)]
pub struct TickReport {
    pub tick: u64,
    pub activities: Vec<(String, f64)>,
}

struct Slot {
    node: SchemaNode,
    /// Per output port, most recent commit first. Entry `i` is the commit of tick `now - i`.
    history: Vec<VecDeque<ActivityPattern>>,
    /// Per input port, the feeding connection if any.
    feeds: Vec<Option<ConnectionId>>,
    external: Vec<Option<ActivityPattern>>,
}

struct Staged {
    outputs: Vec<Vec<ActivityPattern>>,
    params: Vec<Option<ParamStore>>,
    activities: Vec<f64>,
}

pub struct Network {
    slots: Vec<Slot>,
    index: HashMap<String, SchemaId>,
    connections: Vec<Connection>,
    tick: u64,
    horizon: usize,
    seed: u64,
    staged: Option<Staged>,
    sink: Option<Box<dyn TraceSink>>,
}

impl Default for Network {
    fn default() -> Self {
        Self::new(0)
    }
}

impl Network {
    pub fn new(seed: u64) -> Self {
        Self::with_horizon(seed, DEFAULT_HORIZON)
    }

    pub fn with_horizon(seed: u64, horizon: usize) -> Self {
        Self {
            slots: Vec::new(),
            index: HashMap::new(),
            connections: Vec::new(),
            tick: 0,
            horizon,
            seed,
            staged: None,
            sink: None,
        }
    }

    pub fn attach_sink(&mut self, sink: Box<dyn TraceSink>) {
        self.sink = Some(sink);
    }

    pub fn detach_sink(&mut self) -> Option<Box<dyn TraceSink>> {
        self.sink.take()
    }

    pub fn tick(&self) -> u64 {
        self.tick
    }

    pub fn horizon(&self) -> usize {
        self.horizon
    }

    pub fn len(&self) -> usize {
        self.slots.len()
    }

    pub fn is_empty(&self) -> bool {
        self.slots.is_empty()
    }

    pub fn is_mid_tick(&self) -> bool {
        self.staged.is_some()
    }

    pub fn schema_names(&self) -> Vec<String> {
        self.slots.iter().map(|s| s.node.name.clone()).collect()
    }

    pub fn contains(&self, name: &str) -> bool {
        self.index.contains_key(name)
    }

    pub fn schema(&self, name: &str) -> Option<&SchemaNode> {
        self.index.get(name).map(|&i| &self.slots[i].node)
    }

    pub fn connections(&self) -> &[Connection] {
        &self.connections
    }

    fn guard(&self) -> Result<(), KernelError> {
        if self.staged.is_some() {
            Err(KernelError::MidTickMutation)
        } else {
            Ok(())
        }
    }

    fn slot_id(&self, name: &str) -> Result<SchemaId, KernelError> {
        self.index.get(name).copied().ok_or_else(|| KernelError::UnknownSchema(name.into()))
    }

    pub fn add_schema(&mut self, node: SchemaNode) -> Result<SchemaId, KernelError> {
        self.guard()?;
        if self.index.contains_key(&node.name) {
            return Err(KernelError::DuplicateName(node.name));
        }
        node.validate()?;
        let history = node
            .outputs
            .iter()
            .map(|p| VecDeque::from(vec![ActivityPattern::zeros(p.dim())]))
            .collect();
        let feeds = vec![None; node.inputs.len()];
        let external = vec![None; node.inputs.len()];
        let id = self.slots.len();
        self.index.insert(node.name.clone(), id);
        self.slots.push(Slot { node, history, feeds, external });
        Ok(id)
    }

    pub fn connect(&mut self, src: &PortRef, dst: &PortRef, delay_ticks: usize) -> Result<ConnectionId, KernelError> {
        self.guard()?;
        let s = self.index.get(&src.schema).copied().ok_or_else(|| KernelError::UnknownPort(src.to_string()))?;
        let d = self.index.get(&dst.schema).copied().ok_or_else(|| KernelError::UnknownPort(dst.to_string()))?;
        let sp = self.slots[s].node.output_spec(&src.port).ok_or_else(|| KernelError::UnknownPort(src.to_string()))?;
        let di = self.slots[d]
            .node
            .inputs
            .iter()
            .position(|p| p.name == dst.port)
            .ok_or_else(|| KernelError::UnknownPort(dst.to_string()))?;
        let dp = &self.slots[d].node.inputs[di];
        if sp.dim() != dp.dim() {
            return Err(KernelError::TypeMismatch {
                src: src.to_string(),
                src_dim: sp.dim(),
                dst: dst.to_string(),
                dst_dim: dp.dim(),
            });
        }
        if delay_ticks > self.horizon {
            return Err(KernelError::LagBeyondHorizon { lag: delay_ticks, horizon: self.horizon });
        }
        if self.slots[d].feeds[di].is_some() {
            return Err(KernelError::PortOccupied(dst.to_string()));
        }
        let id = self.connections.len();
        self.connections.push(Connection { source: src.clone(), target: dst.clone(), delay_ticks });
        self.slots[d].feeds[di] = Some(id);
        Ok(id)
    }

    /// True when the input port has no connection feeding it.
    pub fn input_is_free(&self, port: &PortRef) -> Result<bool, KernelError> {
        let id = self.slot_id(&port.schema)?;
        let slot = &self.slots[id];
        let i = slot
            .node
            .inputs
            .iter()
            .position(|p| p.name == port.port)
            .ok_or_else(|| KernelError::UnknownPort(port.to_string()))?;
        Ok(slot.feeds[i].is_none())
    }

    /// Swap a schema's behavior; outputs and history are kept.
    pub fn replace_behavior(&mut self, schema: &str, behavior: BehaviorFn) -> Result<(), KernelError> {
        self.guard()?;
        let id = self.slot_id(schema)?;
        self.slots[id].node.behavior = behavior;
        Ok(())
    }

    /// Value fed to an unconnected input port on subsequent ticks.
    pub fn set_external(&mut self, port: &PortRef, value: ActivityPattern) -> Result<(), KernelError> {
        self.guard()?;
        let id = self.slot_id(&port.schema)?;
        let slot = &mut self.slots[id];
        let i = slot
            .node
            .inputs
            .iter()
            .position(|p| p.name == port.port)
            .ok_or_else(|| KernelError::UnknownPort(port.to_string()))?;
        let want = slot.node.inputs[i].dim();
        if value.dim() != want {
            return Err(KernelError::TypeMismatch {
                src: "external".into(),
                src_dim: value.dim(),
                dst: port.to_string(),
                dst_dim: want,
            });
        }
        slot.external[i] = Some(value);
        Ok(())
    }

    pub fn params(&self, schema: &str) -> Result<&ParamStore, KernelError> {
        Ok(&self.slots[self.slot_id(schema)?].node.params)
    }

    pub fn set_param(&mut self, schema: &str, key: &str, value: Vec<f64>) -> Result<(), KernelError> {
        self.guard()?;
        let id = self.slot_id(schema)?;
        self.slots[id].node.params.insert(key.into(), value);
        Ok(())
    }

    pub fn activity(&self, schema: &str) -> Result<f64, KernelError> {
        Ok(self.slots[self.slot_id(schema)?].node.activity)
    }

    /// Committed output at `tick - lag`; zero before the network started.
    pub fn read_port(&self, port: &PortRef, lag: usize) -> Result<ActivityPattern, KernelError> {
        if lag > self.horizon {
            return Err(KernelError::LagBeyondHorizon { lag, horizon: self.horizon });
        }
        let id = self.index.get(&port.schema).copied().ok_or_else(|| KernelError::UnknownPort(port.to_string()))?;
        let slot = &self.slots[id];
        let k = slot
            .node
            .outputs
            .iter()
            .position(|p| p.name == port.port)
            .ok_or_else(|| KernelError::UnknownPort(port.to_string()))?;
        Ok(Self::lagged(&slot.history[k], lag, slot.node.outputs[k].dim()))
    }

    fn lagged(h: &VecDeque<ActivityPattern>, lag: usize, dim: usize) -> ActivityPattern {
        h.get(lag).cloned().unwrap_or_else(|| ActivityPattern::zeros(dim))
    }

    fn gather_inputs(&self, id: SchemaId) -> Vec<ActivityPattern> {
        let slot = &self.slots[id];
        slot.node
            .inputs
            .iter()
            .enumerate()
            .map(|(i, spec)| match slot.feeds[i] {
                Some(cid) => {
                    let c = &self.connections[cid];
                    let src = &self.slots[self.index[&c.source.schema]];
                    let k = src.node.outputs.iter().position(|p| p.name == c.source.port).expect("validated");
                    Self::lagged(&src.history[k], c.delay_ticks, spec.dim())
                }
                None => slot.external[i].clone().unwrap_or_else(|| ActivityPattern::zeros(spec.dim())),
            })
            .collect()
    }

    /// Phase one: evaluate every behavior against committed state and stage results.
    pub fn evaluate(&mut self) -> Result<(), KernelError> {
        self.guard()?;
        let peers: HashMap<String, ParamStore> =
            self.slots.iter().map(|s| (s.node.name.clone(), s.node.params.clone())).collect();
        let mut staged = Staged { outputs: Vec::new(), params: Vec::new(), activities: Vec::new() };
        for id in 0..self.slots.len() {
            let inputs = self.gather_inputs(id);
            let node = &self.slots[id].node;
            let ctx = BehaviorContext {
                schema: &node.name,
                tick: self.tick,
                seed: self.seed,
                names: &node.inputs,
                inputs: &inputs,
                peers: &peers,
            };
            let em = (node.behavior)(&ctx, &node.params);
            let panic = |detail: String| KernelError::BehaviorPanic { schema: node.name.clone(), detail };
            if em.outputs.len() != node.outputs.len() {
                return Err(panic(format!("{} outputs for {} ports", em.outputs.len(), node.outputs.len())));
            }
            for (o, spec) in em.outputs.iter().zip(&node.outputs) {
                if o.dim() != spec.dim() {
                    return Err(panic(format!("port {} got dim {}, declared {}", spec.name, o.dim(), spec.dim())));
                }
                if !o.is_finite() {
                    return Err(panic(format!("non-finite value on port {}", spec.name)));
                }
            }
            if let Some(p) = &em.params {
                if p.values().flatten().any(|v| !v.is_finite()) {
                    return Err(panic("non-finite parameter update".into()));
                }
            }
            let activity = em
                .activity
                .unwrap_or_else(|| em.outputs.iter().map(|o| o.max_abs()).fold(0.0, f64::max))
                .clamp(0.0, 1.0);
            staged.outputs.push(em.outputs);
            staged.params.push(em.params);
            staged.activities.push(activity);
        }
        self.staged = Some(staged);
        Ok(())
    }

    /// Output staged by phase one for this tick (not yet committed).
    pub fn staged_output(&self, port: &PortRef) -> Result<ActivityPattern, KernelError> {
        let staged = self.staged.as_ref().ok_or(KernelError::NothingStaged)?;
        let id = self.index.get(&port.schema).copied().ok_or_else(|| KernelError::UnknownPort(port.to_string()))?;
        let k = self.slots[id]
            .node
            .outputs
            .iter()
            .position(|p| p.name == port.port)
            .ok_or_else(|| KernelError::UnknownPort(port.to_string()))?;
        Ok(staged.outputs[id][k].clone())
    }

    pub fn discard_staged(&mut self) {
        self.staged = None;
    }

    /// Phase two: publish staged outputs and parameter updates, advance the clock.
    pub fn commit(&mut self) -> Result<TickReport, KernelError> {
        let staged = self.staged.take().ok_or(KernelError::NothingStaged)?;
        self.tick += 1;
        let keep = self.horizon + 1;
        let mut activities = Vec::with_capacity(self.slots.len());
        for (id, (outs, (params, act))) in
            staged.outputs.into_iter().zip(staged.params.into_iter().zip(staged.activities)).enumerate()
        {
            let slot = &mut self.slots[id];
            for (k, o) in outs.into_iter().enumerate() {
                if let Some(sink) = self.sink.as_mut() {
                    sink.record(&TraceRow {
                        tick: self.tick,
                        schema: slot.node.name.clone(),
                        port: slot.node.outputs[k].name.clone(),
                        values: o.values().to_vec(),
                    });
                }
                let h = &mut slot.history[k];
                h.push_front(o);
                h.truncate(keep);
            }
            if let Some(p) = params {
                slot.node.params = p;
            }
            slot.node.activity = act;
            activities.push((slot.node.name.clone(), act));
        }
        Ok(TickReport { tick: self.tick, activities })
    }

    pub fn step(&mut self) -> Result<TickReport, KernelError> {
        self.evaluate()?;
        self.commit()
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn source(name: &str, dim: usize) -> SchemaNode {
        // emits tick-dependent ramp so lags are observable
        SchemaNode::new(name, move |ctx, _| {
            Emission::outputs(vec![ActivityPattern::new(vec![ctx.tick as f64 + 1.0; dim]).unwrap()])
        })
        .with_output(PortSpec::output("out", dim, SemanticTag::Motor))
    }

    fn sink(name: &str, dim: usize) -> SchemaNode {
        SchemaNode::new(name, |ctx, _| Emission::outputs(vec![ctx.input("in").clone()]))
            .with_input(PortSpec::input("in", dim, SemanticTag::Perceptual))
            .with_output(PortSpec::output("out", dim, SemanticTag::Perceptual))
    }

    #[test]
    fn add_schema_registers_and_keeps_tick() {
        let mut net = Network::new(0);
        net.add_schema(source("PREY", 2)).unwrap();
        assert_eq!(net.len(), 1);
        assert_eq!(net.tick(), 0);
        assert!(net.read_port(&PortRef::new("PREY", "out"), 0).unwrap().is_silent());
    }

    #[test]
    fn duplicate_name_rejected() {
        let mut net = Network::new(0);
        net.add_schema(source("A", 1)).unwrap();
        assert_eq!(net.add_schema(source("A", 1)), Err(KernelError::DuplicateName("A".into())));
    }

    #[test]
    fn mutation_while_staged_rejected() {
        let mut net = Network::new(0);
        net.add_schema(source("A", 1)).unwrap();
        net.evaluate().unwrap();
        assert_eq!(net.add_schema(source("B", 1)), Err(KernelError::MidTickMutation));
        assert_eq!(
            net.connect(&PortRef::new("A", "out"), &PortRef::new("A", "out"), 0),
            Err(KernelError::MidTickMutation)
        );
        net.commit().unwrap();
        net.add_schema(source("B", 1)).unwrap();
    }

    #[test]
    fn connect_checks_dims_and_ports() {
        let mut net = Network::new(0);
        net.add_schema(source("A", 8)).unwrap();
        net.add_schema(sink("B", 4)).unwrap();
        assert!(matches!(
            net.connect(&PortRef::new("A", "out"), &PortRef::new("B", "in"), 0),
            Err(KernelError::TypeMismatch { .. })
        ));
        assert!(matches!(
            net.connect(&PortRef::new("A", "nope"), &PortRef::new("B", "in"), 0),
            Err(KernelError::UnknownPort(_))
        ));
    }

    #[test]
    fn delay_zero_reads_previous_commit() {
        let mut net = Network::new(0);
        net.add_schema(source("A", 1)).unwrap();
        net.add_schema(sink("B", 1)).unwrap();
        net.connect(&PortRef::new("A", "out"), &PortRef::new("B", "in"), 0).unwrap();
        net.step().unwrap(); // A commits 1.0, B saw the pre-start zero
        assert_eq!(net.read_port(&PortRef::new("B", "out"), 0).unwrap().get(0), 0.0);
        net.step().unwrap();
        assert_eq!(net.read_port(&PortRef::new("B", "out"), 0).unwrap().get(0), 1.0);
    }

    #[test]
    fn delay_three_reads_tick_minus_three() {
        let mut net = Network::new(0);
        net.add_schema(source("A", 1)).unwrap();
        net.add_schema(sink("B", 1)).unwrap();
        net.connect(&PortRef::new("A", "out"), &PortRef::new("B", "in"), 3).unwrap();
        for _ in 0..10 {
            net.step().unwrap();
        }
        // evaluation at tick 10 sees A's commit of tick 7, whose value is 7
        net.evaluate().unwrap();
        assert_eq!(net.staged_output(&PortRef::new("B", "out")).unwrap().get(0), 7.0);
        net.commit().unwrap();
    }

    #[test]
    fn read_port_lag_rules() {
        let mut net = Network::new(0);
        net.add_schema(source("A", 1)).unwrap();
        let p = PortRef::new("A", "out");
        net.step().unwrap();
        assert_eq!(net.read_port(&p, 0).unwrap().get(0), 1.0);
        assert!(net.read_port(&p, 5).unwrap().is_silent());
        assert_eq!(net.read_port(&p, 65), Err(KernelError::LagBeyondHorizon { lag: 65, horizon: 64 }));
    }

    #[test]
    fn nan_output_names_schema() {
        let mut net = Network::new(0);
        net.add_schema(
            SchemaNode::new("BAD", |_, _| Emission::outputs(vec![ActivityPattern::unchecked(vec![f64::NAN])]))
                .with_output(PortSpec::output("out", 1, SemanticTag::Generic)),
        )
        .unwrap();
        match net.step() {
            Err(KernelError::BehaviorPanic { schema, .. }) => assert_eq!(schema, "BAD"),
            other => panic!("expected BehaviorPanic, got {other:?}"),
        }
        assert_eq!(net.tick(), 0);
        assert!(!net.is_mid_tick());
    }

    #[test]
    fn modulatory_output_rejected() {
        let mut bad = source("A", 1);
        bad.outputs[0].modulatory = true;
        assert!(matches!(Network::new(0).add_schema(bad), Err(KernelError::InvalidPort(_))));
    }

    fn echo(name: &str) -> SchemaNode {
        SchemaNode::new(name, move |ctx, _| {
            use rand::Rng;
            let x = ctx.input("in").get(0);
            let noise: f64 = ctx.rng().gen_range(-0.1..0.1);
            Emission::outputs(vec![ActivityPattern::scalar((0.9 * x + 0.3 + noise).tanh())])
        })
        .with_input(PortSpec::input("in", 1, SemanticTag::Generic))
        .with_output(PortSpec::output("out", 1, SemanticTag::Generic))
    }

    fn ring(order_ab: bool, seed: u64) -> (Network, SharedBuffer) {
        let mut net = Network::new(seed);
        if order_ab {
            net.add_schema(echo("A")).unwrap();
            net.add_schema(echo("B")).unwrap();
        } else {
            net.add_schema(echo("B")).unwrap();
            net.add_schema(echo("A")).unwrap();
        }
        net.connect(&PortRef::new("A", "out"), &PortRef::new("B", "in"), 0).unwrap();
        net.connect(&PortRef::new("B", "out"), &PortRef::new("A", "in"), 1).unwrap();
        let buf = SharedBuffer::default();
        net.attach_sink(Box::new(JsonLines(buf.clone())));
        (net, buf)
    }

    #[test]
    fn evaluation_order_does_not_matter() {
        let (mut ab, _) = ring(true, 4);
        let (mut ba, _) = ring(false, 4);
        for _ in 0..50 {
            ab.step().unwrap();
            ba.step().unwrap();
            for s in ["A", "B"] {
                let p = PortRef::new(s, "out");
                assert_eq!(ab.read_port(&p, 0).unwrap(), ba.read_port(&p, 0).unwrap());
            }
        }
    }

    #[test]
    fn same_seed_same_trace_bytes() {
        let run = |seed| {
            let (mut net, buf) = ring(true, seed);
            for _ in 0..40 {
                net.step().unwrap();
            }
            buf.contents()
        };
        assert_eq!(run(3), run(3));
        assert_ne!(run(3), run(4));
        let first = String::from_utf8(run(3)).unwrap();
        let row: TraceRow = serde_json::from_str(first.lines().next().unwrap()).unwrap();
        assert_eq!(row.tick, 1);
    }

    mod delay_property {
        use super::*;
        use proptest::prelude::*;

        proptest! {
            #[test]
            fn reads_match_lagged_commits(signal in prop::collection::vec(-1.0f64..1.0, 1..80), k in 0usize..10) {
                let sig = signal.clone();
                let mut net = Network::new(0);
                net.add_schema(
                    SchemaNode::new("SRC", move |ctx, _| {
                        Emission::outputs(vec![ActivityPattern::scalar(sig.get(ctx.tick as usize).copied().unwrap_or(0.0))])
                    })
                    .with_output(PortSpec::output("out", 1, SemanticTag::Motor)),
                ).unwrap();
                net.add_schema(sink("DST", 1)).unwrap();
                net.connect(&PortRef::new("SRC", "out"), &PortRef::new("DST", "in"), k).unwrap();
                let mut commits = vec![0.0];
                for _ in 0..signal.len() {
                    net.evaluate().unwrap();
                    let t = net.tick() as usize;
                    let seen = net.staged_output(&PortRef::new("DST", "out")).unwrap().get(0);
                    let want = if t >= k { commits[t - k] } else { 0.0 };
                    prop_assert_eq!(seen, want);
                    net.commit().unwrap();
                    commits.push(net.read_port(&PortRef::new("SRC", "out"), 0).unwrap().get(0));
                }
            }
        }
    }
}
