//! Experiment harness: configuration, the end-to-end inference runner,
//! budget accounting, benchmark sweeps, reports and plots.

pub mod budget;
pub mod config;
pub mod csvio;
pub mod image_demo;
pub mod oracle_cache;
pub mod report;
pub mod runner;
pub mod svg;
pub mod sweep;

pub use budget::BudgetLedger;
pub use config::ExperimentConfig;
