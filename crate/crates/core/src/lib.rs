//! Schema network runtime with learned forward and inverse models, online
//! cause-effect discovery and structural construction of new schema pairs.

pub mod cause_effect;
pub mod constructor;
pub mod drives;
pub mod dual;
pub mod goal;
pub mod kernel;
pub mod map;
pub mod oracle;
pub mod pattern;
pub mod predictive;
pub mod rng;

pub use kernel::{
    BehaviorContext, BehaviorFn, Connection, Emission, KernelError, Network, ParamStore, PortRef, PortSpec,
    SchemaNode, SemanticTag, TraceRow, TraceSink,
};
pub use pattern::{ActivityPattern, PatternError};
