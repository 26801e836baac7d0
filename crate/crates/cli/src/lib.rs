//! Command-line experiment driver: parses a sweep configuration, runs every
//! (scheme, policy, distribution, seed) cell and writes CSV and text reports.

pub mod config;
pub mod sweep;

pub use config::{parse_config, parse_distribution, parse_seeds, ConfigError, DistSpec, SweepConfig};
pub use sweep::{
    execute, format_real, matrix_of, quantize, read_runs_csv, run_sweep, RunRow, SweepError,
    SweepOutcome,
};
