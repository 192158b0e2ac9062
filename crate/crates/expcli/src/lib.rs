//! Configuration-driven experiment runner for sawtooth-map echo studies.
//!
//! A run takes an [`ExperimentConfig`] (TOML, optionally seeded from one of
//! the figure [`Preset`]s), evaluates every sweep point, writes one CSV per
//! series plus `summary.json`, and returns a [`RunRecord`]. The `sawecho`
//! binary exposes the same operations on the command line.

pub mod config;
pub mod csv;
pub mod error;
pub mod plot;
pub mod presets;
pub mod runner;

pub use config::{
    ClassicalSetup, ExperimentConfig, FitConfig, Plateau, PlateauRule, QuantumSetup, SweepPoint, TimeGrid,
};
pub use error::{RunError, RunResult};
pub use plot::{emit_plot_script, plot_script};
pub use presets::{check_preset, Preset};
pub use runner::{run, run_with_threads, RunRecord, SeriesEntry};
