//! Scenario drivers behind the figures: time series, K and σ sweeps,
//! extrema, phase stability, disintegration profiles and the oracle check.

mod config;
mod output;
mod scenarios;

pub use config::{ConfigError, ExperimentConfig, KGrid, OracleConfig, CONFIG_KEYS, ORACLE_KEYS};
pub use output::{
    manifest_text, write_disintegration_csv, write_lyapunov_csv, write_manifest, write_oracle_csv,
    write_orbit_csv, write_phase_stability_csv, write_profiles, write_records_csv,
    write_time_series_classical_csv, RECORD_HEADER,
};
pub use scenarios::*;
