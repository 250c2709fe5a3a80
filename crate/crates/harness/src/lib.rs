//! Workload generation, oracle-checked replay and lightness sweeps for
//! `dynspan`. The `dynspan-bench` binary is a thin CLI over this crate.

#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod config;
pub mod generate;
pub mod run;
pub mod sweep;

pub use config::{Check, FaultArg, ModeArg, Ops, Scenario, ScenarioConfig};
pub use generate::{generate, Event, Stream};
pub use run::{run, run_stream, RunOptions, RunOutcome, RunSummary, UpdateLine, ViolationRecord};
pub use sweep::{lightness_sweep, write_csv, SweepRow};
