//! Library surface of the `weakspot` command-line driver, split out so
//! integration tests can run subcommands in-process.

// validations use `!(x > 0)` so NaN fails the check
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod commands;
pub mod config;
pub mod meshgen;
pub mod output;
pub mod scenario;

pub use commands::{
    forward, gradcheck, invert, inversion_sensors, sweep, synthesize_cmd, ForwardOutcome,
    GradcheckOutcome, InvertOutcome,
};
pub use config::{Experiment, Scenario, ScenarioMode, WeakPatch, WeightsMode};
pub use scenario::synthesize;
