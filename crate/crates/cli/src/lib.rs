//! Experiment runner behind the `teichkit` binary.

pub mod app;
pub mod cache;
pub mod commands;
pub mod config;
pub mod error;
pub mod result;

pub use commands::run;
pub use config::ExperimentConfig;
pub use result::ExperimentResult;
