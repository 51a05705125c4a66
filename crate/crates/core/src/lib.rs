//! Interference-limited coverage maps under the protocol (disk) and SINR
//! models: static power-diagram construction, randomized dynamic maintenance,
//! Monte-Carlo area estimation and transmit-power optimization.

pub mod geometry;
pub mod power_diagram;
pub mod protocol_coverage;
pub mod sinr_model;
pub mod optimizer;
pub mod dynamic_coverage;
pub mod cli_io;
