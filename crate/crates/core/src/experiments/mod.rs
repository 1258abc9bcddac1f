//! Monte Carlo simulation of the first-best solution and the efficiency-loss
//! construction for disruptor-pays.

pub mod poa;
pub mod simulation;
pub mod svg;

pub use poa::{calibrate_poa_technology, poa_delta, run_poa, PoaConfig, PoaOutcome};
pub use simulation::{run_simulation, SimConfig, SimOutput, SimRecord};
