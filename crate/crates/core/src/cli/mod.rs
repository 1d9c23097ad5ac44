//! Configuration parsing and experiment runner behind the `semiq` binary.

pub mod config;
pub mod run;

pub use config::{parse_config, parse_overrides, Experiment, InitialSpec, RunConfig, KEYS};
pub use run::{
    manifest_path, num, run, RunSummary, LIMIT_HEADER, LYAPUNOV_HEADER, POINCARE_HEADER, SIMULATE_HEADER, SWEEP_HEADER,
};
