//! JSON scenario files.

use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};
use tunnel_core::manybody::{Observable, Statistics, WorkingPrecision};
use tunnel_core::model::{EvolutionMethod, ModelParams, Region};
use tunnel_core::numerics::{linear_grid, log_grid};
use tunnel_core::Error;

use crate::Failure;

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ModelConfig {
    #[serde(default = "one")]
    pub a: f64,
    /// Barrier position; defaults to `a`.
    #[serde(default)]
    pub d: Option<f64>,
    #[serde(default)]
    pub eta: f64,
    /// `"barrier"` (region `[0, d]`) or `"box"` (region `[0, a]`).
    #[serde(default = "barrier")]
    pub region: String,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ParticleConfig {
    #[serde(rename = "N")]
    pub n: usize,
    pub statistics: String,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct TimeConfig {
    pub tau_min: f64,
    pub tau_max: f64,
    pub points: usize,
    #[serde(default = "log")]
    pub spacing: String,
}

#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct OutputConfig {
    #[serde(default)]
    pub csv_path: Option<PathBuf>,
    #[serde(default)]
    pub report_path: Option<PathBuf>,
}

/// A scenario as written in the config file.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ScenarioConfig {
    pub model: ModelConfig,
    pub particles: ParticleConfig,
    pub times: TimeConfig,
    pub method: String,
    pub observables: Vec<String>,
    #[serde(default = "standard")]
    pub precision: String,
    #[serde(default)]
    pub output: OutputConfig,
    /// Fit window `[min, max]`; defaults to the last decade of the grid.
    #[serde(default)]
    pub fit_window: Option<[f64; 2]>,
}

fn one() -> f64 {
    1.0
}
fn barrier() -> String {
    "barrier".into()
}
fn log() -> String {
    "log".into()
}
fn standard() -> String {
    "standard".into()
}

/// A validated scenario.
#[derive(Clone, Debug, PartialEq)]
pub struct Scenario {
    pub params: ModelParams,
    pub n: usize,
    pub statistics: Statistics,
    pub taus: Vec<f64>,
    pub method: EvolutionMethod,
    pub observables: Vec<Observable>,
    pub precision: WorkingPrecision,
    pub output: OutputConfig,
    pub fit_window: Option<(f64, f64)>,
}

pub fn parse_precision(s: &str) -> Result<WorkingPrecision, Failure> {
    match s.to_ascii_lowercase().as_str() {
        "standard" | "double" => Ok(WorkingPrecision::Standard),
        "extended" | "double_double" => Ok(WorkingPrecision::Extended),
        other => Err(Failure::config(format!("unknown precision '{other}'"))),
    }
}

fn parse_region(s: &str) -> Result<Region, Failure> {
    match s.to_ascii_lowercase().as_str() {
        "barrier" => Ok(Region::Barrier),
        "box" => Ok(Region::Box),
        other => Err(Failure::config(format!("unknown region '{other}' (barrier or box)"))),
    }
}

impl ModelConfig {
    pub fn params(&self) -> Result<ModelParams, Failure> {
        let p = ModelParams::new(self.a, self.d.unwrap_or(self.a), self.eta)?;
        Ok(p.with_region(parse_region(&self.region)?))
    }
}

impl ScenarioConfig {
    pub fn load(path: &Path) -> Result<Self, Failure> {
        let text = std::fs::read_to_string(path)
            .map_err(|e| Failure::config(format!("cannot read {}: {e}", path.display())))?;
        serde_json::from_str(&text).map_err(|e| Failure::config(format!("{}: {e}", path.display())))
    }

    pub fn validate(&self) -> Result<Scenario, Failure> {
        let params = self.model.params()?;
        let method: EvolutionMethod = self.method.parse()?;
        method.check(&params)?;
        let t = &self.times;
        if !(t.tau_min > 0.0) || !(t.tau_max > t.tau_min) {
            return Err(Failure::config(format!(
                "times need 0 < tau_min < tau_max, got [{}, {}]",
                t.tau_min, t.tau_max
            )));
        }
        if t.points < 2 {
            return Err(Failure::config("times.points must be at least 2"));
        }
        let taus = match t.spacing.to_ascii_lowercase().as_str() {
            "log" => log_grid(t.tau_min, t.tau_max, t.points),
            "linear" => linear_grid(t.tau_min, t.tau_max, t.points),
            other => return Err(Failure::config(format!("unknown spacing '{other}' (log or linear)"))),
        };
        if self.particles.n < 1 {
            return Err(Failure::config("particles.N must be at least 1"));
        }
        if self.observables.is_empty() {
            return Err(Failure::config("no observables requested"));
        }
        let observables = self
            .observables
            .iter()
            .map(|s| s.parse::<Observable>())
            .collect::<Result<Vec<_>, Error>>()?;
        let precision = parse_precision(&self.precision)?;
        if precision == WorkingPrecision::Extended && method != EvolutionMethod::ExactFree {
            return Err(Failure::config("extended precision requires the exact_free method"));
        }
        let fit_window = self.fit_window.map(|[lo, hi]| (lo, hi));
        if let Some((lo, hi)) = fit_window {
            if !(lo > 0.0 && hi > lo) {
                return Err(Failure::config(format!("bad fit window [{lo}, {hi}]")));
            }
        }
        Ok(Scenario {
            params,
            n: self.particles.n,
            statistics: self.particles.statistics.parse()?,
            taus,
            method,
            observables,
            precision,
            output: self.output.clone(),
            fit_window,
        })
    }
}

impl Scenario {
    /// The requested fit window, or the last decade of the time grid.
    pub fn window(&self) -> (f64, f64) {
        let hi = *self.taus.last().expect("validated grid");
        self.fit_window.unwrap_or((self.taus[0].max(hi / 10.0), hi))
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn sample() -> ScenarioConfig {
        serde_json::from_str(
            r#"{
                "model": {"eta": 0},
                "particles": {"N": 2, "statistics": "fermionized"},
                "times": {"tau_min": 1, "tau_max": 100, "points": 5},
                "method": "exact_free",
                "observables": ["survival"]
            }"#,
        )
        .unwrap()
    }

    #[test]
    fn defaults_fill_in() {
        let s = sample().validate().unwrap();
        assert_eq!(s.params, ModelParams::free());
        assert_eq!(s.taus.len(), 5);
        assert_eq!(s.precision, WorkingPrecision::Standard);
        assert_eq!(s.window(), (10.0, 100.0));
    }

    #[test]
    fn exact_free_with_a_barrier_is_a_config_error() {
        let mut c = sample();
        c.model.eta = 1.0;
        let e = c.validate().unwrap_err();
        assert_eq!(e.exit_code(), 2);
        assert!(e.to_string().contains("eta = 0"));
    }

    #[test]
    fn bad_times_are_rejected() {
        let mut c = sample();
        c.times.tau_min = 0.0;
        assert_eq!(c.validate().unwrap_err().exit_code(), 2);
        let mut c = sample();
        c.times.points = 1;
        assert_eq!(c.validate().unwrap_err().exit_code(), 2);
    }

    #[test]
    fn unknown_fields_are_rejected() {
        let r: Result<ScenarioConfig, _> = serde_json::from_str(
            r#"{"model": {"eta": 0, "width": 2}, "particles": {"N": 1, "statistics": "bosons"},
                "times": {"tau_min": 1, "tau_max": 2, "points": 2}, "method": "rse", "observables": []}"#,
        );
        assert!(r.is_err());
    }
}
