//! Scenario runner for the Ref-OFDM LDACS simulator.
//!
//! A scenario file lists users (bandwidth, band centres, modulation,
//! waveform), the channel, optional DME and GGI interferers, an SNR grid and
//! seeds. [`run_experiment`] executes it and [`emit_reports`] writes
//! `psd.csv`, `ber.csv`, `interference.csv`, `complexity.csv` and a
//! `manifest.json` with the SHA-256 of each file.

pub mod cli;
pub mod error;
pub mod experiment;
pub mod report;
pub mod scenario;

pub use error::{HarnessError, Result};
pub use experiment::{run_experiment, RunReport, UserReport};
pub use report::{emit_reports, Manifest};
pub use scenario::{parse_scenario, ScenarioSpec, UserSpec};
