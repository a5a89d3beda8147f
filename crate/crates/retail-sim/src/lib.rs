//! Scenario files, decision agents, the benchmark harness and the HTTP
//! gateway around the `retail-sim-core` engine.

pub mod agents;
pub mod fixtures;
pub mod format;
pub mod gateway;
pub mod harness;
pub mod scenario;
