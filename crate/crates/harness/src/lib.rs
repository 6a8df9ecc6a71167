//! Experiment orchestration for multi-graph alignment: phase-diagram sweeps,
//! exact free-energy probes, oracle verification sweeps, and their CSV/JSON
//! outputs.

pub mod config;
pub mod error;
pub mod free_energy;
pub mod phase;
pub mod records;
pub mod sample_io;
pub mod threads;
pub mod verify;

pub use config::{ExperimentConfig, Grid, Model};
pub use error::{HarnessError, Result};
pub use phase::{run_phase, PhaseRun};
pub use verify::{run_verify, Suite, VerifyOptions, VerifyReport};
