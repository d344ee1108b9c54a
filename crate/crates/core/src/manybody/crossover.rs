//! Where the resonance envelope `A exp(-N gamma_1 tau)` meets the power-law tail.

use super::observables::{ManyBody, WorkingPrecision};
use super::Statistics;
use crate::error::{Error, Result};
use crate::model::{EvolutionMethod, ModelParams};

/// Result of [`crossover_time`].
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Crossover {
    pub tau: f64,
    pub gamma1: f64,
    /// `N gamma_1`.
    pub rate: f64,
    pub envelope_amplitude: f64,
    pub tail_coefficient: f64,
    pub tail_exponent: f64,
}

/// Root of `ln(A) - rate tau = ln(C) + exponent ln(tau)` inside `bracket`, by bisection.
pub fn envelope_tail_intersection(
    amplitude: f64,
    rate: f64,
    coefficient: f64,
    exponent: f64,
    bracket: (f64, f64),
) -> Result<f64> {
    let h = |t: f64| amplitude.ln() - rate * t - coefficient.ln() - exponent * t.ln();
    let (mut lo, mut hi) = bracket;
    let (hlo, hhi) = (h(lo), h(hi));
    if !(lo > 0.0 && lo < hi) || !(hlo.is_finite() && hhi.is_finite()) || hlo.signum() == hhi.signum() {
        return Err(Error::NotFound(format!(
            "envelope and tail do not cross inside [{lo:e}, {hi:e}]"
        )));
    }
    let rising = hlo < 0.0;
    for _ in 0..200 {
        let mid = 0.5 * (lo + hi);
        if (h(mid) < 0.0) == rising {
            lo = mid;
        } else {
            hi = mid;
        }
        if hi - lo <= 1e-15 * hi {
            break;
        }
    }
    Ok(0.5 * (lo + hi))
}

/// Power-law exponent of the tail of `P_N` (negative).
fn tail_exponent(n: usize, stats: Statistics) -> f64 {
    let n = n as f64;
    match stats {
        Statistics::Fermionized => -n * (2.0 * n + 1.0),
        _ => -3.0 * n,
    }
}

/// Crossover time of `P_N` computed with `method` (which must resolve the
/// resonances, so `eta > 0`).
///
/// The envelope amplitude is read off at two lifetimes `2 / (N gamma_1)`; the
/// tail coefficient at the first doubling of that time where the local
/// log-log slope is within 2% of the tail exponent.
pub fn crossover_time(p: &ModelParams, n: usize, stats: Statistics, method: EvolutionMethod) -> Result<Crossover> {
    if !(p.eta > 0.0) {
        return Err(Error::config("a crossover needs a resonance era (eta > 0)"));
    }
    let gamma1 = crate::model::find_poles(p, 1)?[0].gamma;
    let rate = n as f64 * gamma1;
    let t_env = 2.0 / rate;
    let mb = ManyBody::new(p, method, WorkingPrecision::Standard, n, t_env)?;
    let value = |t: f64| -> Result<f64> {
        let o = mb.nonescape(t, n, stats)?;
        if !o.trusted || !(o.value > 0.0) {
            return Err(Error::Inconclusive(format!(
                "P_{n} at tau = {t:e} is lost to cancellation ({:.1e})",
                o.cancellation
            )));
        }
        Ok(o.value)
    };
    let amplitude = value(t_env)? * (rate * t_env).exp();
    let exponent = tail_exponent(n, stats);
    let mut t = 4.0 * t_env;
    for _ in 0..40 {
        let (lo, hi) = (value(t / 1.1)?, value(t * 1.1)?);
        let slope = (hi.ln() - lo.ln()) / (2.0 * 1.1f64.ln());
        if (slope - exponent).abs() <= 0.02 * exponent.abs() {
            let coefficient = value(t)? * t.powf(-exponent);
            let tau = envelope_tail_intersection(amplitude, rate, coefficient, exponent, (t_env, t))?;
            return Ok(Crossover {
                tau,
                gamma1,
                rate,
                envelope_amplitude: amplitude,
                tail_coefficient: coefficient,
                tail_exponent: exponent,
            });
        }
        t *= 2.0;
    }
    Err(Error::NotFound(format!(
        "no power-law tail reached by tau = {t:e}; the resonance may be too long-lived"
    )))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn bisection_matches_a_dense_scan() {
        let (a, g, c, e) = (1.0, 1.0, 0.04, -3.0);
        let tau = envelope_tail_intersection(a, g, c, e, (1.0, 100.0)).unwrap();
        // dense scan for the sign change of the log difference
        let h = |t: f64| -g * t - c.ln() - e * t.ln();
        let mut prev = 1.0;
        let mut scan = f64::NAN;
        for i in 0..=990_000 {
            let t = 1.0 + i as f64 * 1e-4;
            if h(t) < 0.0 {
                scan = 0.5 * (prev + t);
                break;
            }
            prev = t;
        }
        assert!((tau - scan).abs() < 1e-4);
        // the scan step limits the oracle; refine it with its own bisection
        let (mut lo, mut hi) = (scan - 1e-4, scan + 1e-4);
        for _ in 0..60 {
            let m = 0.5 * (lo + hi);
            if h(m) > 0.0 {
                lo = m
            } else {
                hi = m
            }
        }
        assert!((tau - lo).abs() < 1e-6);
        assert!(envelope_tail_intersection(a, g, c, e, (1.0, 2.0)).is_err());
    }
}
