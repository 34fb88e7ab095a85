//! Experiment runner for the UAV ISAC optimizer: strict JSON configs,
//! reproducible run directories and cross-run hypervolume comparison.

// `!(a < b)` is used deliberately so NaN lands on the error path.
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod compare;
pub mod config;
pub mod experiment;

pub use compare::{compare, Comparison};
pub use config::{load_config, parse_config, AlgoId, BackendKind, ConfigError, Overrides, RunConfig};
pub use experiment::{run_experiment, scenario_hash, RunArtifacts, Summary};
