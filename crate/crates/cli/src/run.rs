//! Scenario execution.

use std::io::Write;

use rayon::prelude::*;
use serde::Serialize;
use tunnel_core::asymptotics::{derive_law_series, predicted_law, verify_curve, AsymptoticLaw, SERIES_MAX_N};
use tunnel_core::manybody::{decay_rate, DecayCurve, ManyBody, Observable, Statistics};
use tunnel_core::model::find_poles;
use tunnel_core::numerics::PowerLawFit;

use crate::config::{Scenario, ScenarioConfig};
use crate::Failure;

/// Poles listed in a run report when the barrier is present.
const REPORTED_POLES: usize = 5;

/// `ManyBody::curve` with the time grid split across worker threads.
pub fn parallel_curve(
    mb: &ManyBody,
    observable: Observable,
    stats: Statistics,
    n: usize,
    taus: &[f64],
) -> tunnel_core::Result<DecayCurve> {
    let chunk = taus.len().div_ceil(rayon::current_num_threads()).max(1);
    let parts = taus
        .par_chunks(chunk)
        .map(|c| mb.curve(observable, stats, n, c))
        .collect::<tunnel_core::Result<Vec<_>>>()?;
    let mut it = parts.into_iter();
    let mut out = it.next().expect("nonempty grid");
    for part in it {
        out.taus.extend(part.taus);
        out.values.extend(part.values);
        out.flags.extend(part.flags);
    }
    Ok(out)
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct FitSummary {
    pub exponent: f64,
    pub coefficient: f64,
    pub r_squared: f64,
    pub window: [f64; 2],
    pub samples: usize,
}

impl From<&PowerLawFit> for FitSummary {
    fn from(f: &PowerLawFit) -> Self {
        FitSummary {
            exponent: f.exponent,
            coefficient: f.coefficient,
            r_squared: f.r_squared,
            window: [f.window.0, f.window.1],
            samples: f.samples,
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct LawSummary {
    pub exponent: f64,
    pub coefficient: Option<f64>,
    pub source: &'static str,
}

impl From<&AsymptoticLaw> for LawSummary {
    fn from(l: &AsymptoticLaw) -> Self {
        LawSummary {
            exponent: l.exponent,
            coefficient: l.coefficient,
            source: l.source.name(),
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct ObservableSummary {
    pub observable: &'static str,
    pub samples: usize,
    /// Samples carrying a flag (cancellation or failed evaluation).
    pub flagged: usize,
    /// Samples whose evaluation failed outright.
    pub failed: usize,
    pub fit: Option<FitSummary>,
    pub fit_refused: Option<String>,
    pub closed_form: Option<LawSummary>,
    pub series: Option<LawSummary>,
    pub series_error: Option<String>,
    /// Fitted minus closed-form exponent.
    pub exponent_error: Option<f64>,
    /// Fitted over closed-form coefficient.
    pub coefficient_ratio: Option<f64>,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct PoleRow {
    pub j: usize,
    pub re_k: f64,
    pub im_k: f64,
    pub epsilon: f64,
    pub gamma: f64,
    /// `epsilon / gamma`; reported only, a small value marks an early power-law onset.
    pub ratio: f64,
    pub lifetime: f64,
    pub residual: f64,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct RunReport {
    pub scenario: ScenarioConfig,
    pub observables: Vec<ObservableSummary>,
    pub poles: Option<Vec<PoleRow>>,
    pub exit_code: i32,
}

pub struct RunOutput {
    pub curves: Vec<DecayCurve>,
    pub report: RunReport,
}

pub fn pole_rows(p: &tunnel_core::model::ModelParams, count: usize) -> Result<Vec<PoleRow>, Failure> {
    Ok(find_poles(p, count)?
        .iter()
        .map(|q| PoleRow {
            j: q.j,
            re_k: q.k.re,
            im_k: q.k.im,
            epsilon: q.epsilon,
            gamma: q.gamma,
            ratio: q.epsilon / q.gamma,
            lifetime: q.lifetime(),
            residual: q.residual,
        })
        .collect())
}

fn summarize(curve: &DecayCurve, s: &Scenario, window: (f64, f64)) -> ObservableSummary {
    let obs = curve.observable;
    let flagged = curve.flags.iter().filter(|f| f.is_some()).count();
    let failed = curve.values.iter().filter(|v| v.is_nan()).count();
    let mut out = ObservableSummary {
        observable: obs.name(),
        samples: curve.len(),
        flagged,
        failed,
        fit: None,
        fit_refused: None,
        closed_form: None,
        series: None,
        series_error: None,
        exponent_error: None,
        coefficient_ratio: None,
    };
    if obs == Observable::DecayRate {
        return out;
    }
    let law = predicted_law(obs, s.statistics, s.n, &s.params).ok();
    out.closed_form = law.as_ref().map(LawSummary::from);
    if s.n <= SERIES_MAX_N {
        match derive_law_series(obs, s.statistics, s.n, &s.params, None) {
            Ok(l) => out.series = Some((&l).into()),
            Err(e) => out.series_error = Some(e.to_string()),
        }
    }
    match law.map(|l| verify_curve(curve, &l, window)) {
        Some(Ok(v)) => {
            out.fit = Some((&v.fit).into());
            out.exponent_error = Some(v.exponent_error);
            out.coefficient_ratio = v.coefficient_ratio;
        }
        Some(Err(e)) => out.fit_refused = Some(e.to_string()),
        None => {}
    }
    out
}

/// Evaluate every requested observable of a validated scenario.
pub fn run(config: &ScenarioConfig, scenario: &Scenario, window: Option<(f64, f64)>) -> Result<RunOutput, Failure> {
    let s = scenario;
    let window = window.unwrap_or_else(|| s.window());
    let mb = ManyBody::new(&s.params, s.method, s.precision, s.n, s.taus[0])?;
    let mut curves: Vec<DecayCurve> = Vec::new();
    for &obs in &s.observables {
        let curve = if obs == Observable::DecayRate {
            let base = match curves.iter().find(|c| c.observable == Observable::NonEscape) {
                Some(c) => c.clone(),
                None => parallel_curve(&mb, Observable::NonEscape, s.statistics, s.n, &s.taus)?,
            };
            decay_rate(&base)?
        } else {
            parallel_curve(&mb, obs, s.statistics, s.n, &s.taus)?
        };
        curves.push(curve);
    }
    let observables = curves.iter().map(|c| summarize(c, s, window)).collect::<Vec<_>>();
    let poles = if s.params.eta > 0.0 {
        Some(pole_rows(&s.params, REPORTED_POLES)?)
    } else {
        None
    };
    let exit_code = if observables.iter().any(|o| o.failed > 0) { 3 } else { 0 };
    Ok(RunOutput {
        curves,
        report: RunReport {
            scenario: config.clone(),
            observables,
            poles,
            exit_code,
        },
    })
}

fn number(v: f64) -> String {
    if v.is_finite() {
        format!("{v:.16e}")
    } else {
        format!("{v}")
    }
}

/// CSV with columns `tau, value, observable, statistics, N, method, flag`.
pub fn write_csv<W: Write>(w: W, curves: &[DecayCurve], s: &Scenario) -> Result<(), Failure> {
    let mut out = csv::Writer::from_writer(w);
    out.write_record(["tau", "value", "observable", "statistics", "N", "method", "flag"])?;
    let n = s.n.to_string();
    for c in curves {
        for ((t, v), f) in c.taus.iter().zip(&c.values).zip(&c.flags) {
            out.write_record([
                number(*t).as_str(),
                number(*v).as_str(),
                c.observable.name(),
                s.statistics.name(),
                n.as_str(),
                s.method.name(),
                f.as_deref().unwrap_or(""),
            ])?;
        }
    }
    out.flush()?;
    Ok(())
}
