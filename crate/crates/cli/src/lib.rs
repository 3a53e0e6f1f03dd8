//! Sweep runner for the hybrid FSO/RF relay analysis: configuration,
//! experiment execution and CSV output.

pub mod config;
pub mod experiment;

pub use config::{build_spec, parse_settings, validate_config, ConfigError, ExperimentSpec, Method, Metric, Preset, Setting};
pub use experiment::{read_csv, run_experiment, to_csv_bytes, write_csv, write_csv_atomic, CurvePoint, RunError};
