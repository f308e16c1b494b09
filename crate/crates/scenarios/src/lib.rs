//! Scenario packs driving the schemanet runtime: a synthetic delayed-echo world,
//! the detour task and the snap task with its lesion and recovery protocol.

pub mod synthetic;
pub mod snap;
pub mod detour;
