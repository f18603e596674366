//! Std companion to [`flexkal_core`]: file formats, trace execution with
//! wall-clock latency measurement, and the `flexkal` command-line tool.
//!
//! The core crate owns the numerics and never touches the operating system;
//! everything here does. Traces travel as comma-separated text, calibration
//! as versioned TOML, and latency reports as stable `key: value` lines.

pub mod cli;
pub mod config_io;
pub mod error;
pub mod report;
pub mod runner;
pub mod trace_io;

pub use config_io::{load_config, save_config};
pub use error::{Error, Result};
pub use report::{render_report, trace_checksum};
pub use runner::{
    run_offline, run_realtime, LatencyReport, RunOutput, EVENT_TIME_REFERENCE_MS,
    HANDOFF_CAPACITY,
};
pub use trace_io::{read_trace, write_trace};
