//! Command-line pipeline around `isar3d-core`: configuration, dwell files,
//! run products and the acceptance self-test.

pub mod acceptance;
pub mod config;
pub mod dwell_io;
pub mod error;
pub mod output;
pub mod pipeline;

pub use config::{RunConfig, ShipChoice};
pub use dwell_io::{load_dwell, save_dwell};
pub use error::RunError;
pub use pipeline::{analyze, run_analyze, run_simulate, Analysis, RunReport};
