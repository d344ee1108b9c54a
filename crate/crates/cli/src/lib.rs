//! Driver layer over `tunnel-core`: JSON scenarios in, CSV curves and JSON
//! reports out, plus the acceptance suite behind `tunnel verify`.

pub mod commands;
pub mod config;
pub mod run;
pub mod verify;

use std::fmt;

pub use config::{Scenario, ScenarioConfig};
pub use run::{parallel_curve, run, write_csv, RunOutput, RunReport};

/// A command failure with its process exit code.
#[derive(Debug, Clone, PartialEq)]
pub enum Failure {
    /// Invalid configuration or arguments (exit 2).
    Config(String),
    /// Numerical accuracy could not be achieved (exit 3).
    Numerical(String),
    /// Reading or writing files failed (exit 1).
    Io(String),
}

impl Failure {
    pub fn config(msg: impl Into<String>) -> Self {
        Failure::Config(msg.into())
    }

    pub fn exit_code(&self) -> i32 {
        match self {
            Failure::Config(_) => 2,
            Failure::Numerical(_) => 3,
            Failure::Io(_) => 1,
        }
    }
}

impl fmt::Display for Failure {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Failure::Config(m) => write!(f, "configuration error: {m}"),
            Failure::Numerical(m) => write!(f, "numerical error: {m}"),
            Failure::Io(m) => write!(f, "i/o error: {m}"),
        }
    }
}

impl std::error::Error for Failure {}

impl From<tunnel_core::Error> for Failure {
    fn from(e: tunnel_core::Error) -> Self {
        use tunnel_core::Error as E;
        match e {
            E::Configuration(_) | E::Domain(_) | E::Capacity(_) => Failure::Config(e.to_string()),
            _ => Failure::Numerical(e.to_string()),
        }
    }
}

impl From<std::io::Error> for Failure {
    fn from(e: std::io::Error) -> Self {
        Failure::Io(e.to_string())
    }
}

impl From<csv::Error> for Failure {
    fn from(e: csv::Error) -> Self {
        Failure::Io(e.to_string())
    }
}

/// Parse `MIN:MAX`.
pub fn parse_window(s: &str) -> Result<(f64, f64), String> {
    let (lo, hi) = s
        .split_once(':')
        .ok_or_else(|| format!("expected MIN:MAX, got '{s}'"))?;
    let lo: f64 = lo
        .trim()
        .parse()
        .map_err(|e| format!("bad window minimum '{lo}': {e}"))?;
    let hi: f64 = hi
        .trim()
        .parse()
        .map_err(|e| format!("bad window maximum '{hi}': {e}"))?;
    if !(lo > 0.0 && hi > lo) {
        return Err(format!("window needs 0 < MIN < MAX, got {lo}:{hi}"));
    }
    Ok((lo, hi))
}

/// Pretty JSON with sorted keys.
pub fn to_sorted_json<T: serde::Serialize>(value: &T) -> String {
    // serde_json's default map is ordered by key
    let v = serde_json::to_value(value).expect("report types serialize");
    serde_json::to_string_pretty(&v).expect("values serialize")
}
