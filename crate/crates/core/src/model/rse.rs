//! Resonant-state expansion: a sum over the proper poles plus the integral
//! along the steepest-descent line `k = s e^{-i pi/4}`.

use num_complex::Complex64;
use std::f64::consts::{FRAC_1_SQRT_2, PI};

use super::green::{green_hat_many, hat_residue};
use super::poles::{find_poles, Pole};
use super::ModelParams;
use crate::error::{Error, Result};
use crate::numerics::{integrate_vec_tol, GaussLegendre};

/// Default accepted estimate of the neglected pole terms.
pub const POLE_TRUNCATION_TOL: f64 = 1e-10;

/// Largest pole set [`RsePropagator::for_times`] will build.
pub const MAX_POLES: usize = 4096;

/// RSE evaluator with its pole set computed once.
#[derive(Clone, Debug)]
pub struct RsePropagator {
    params: ModelParams,
    poles: Vec<Pole>,
}

impl RsePropagator {
    pub fn new(p: &ModelParams, pole_count: usize) -> Result<Self> {
        if !(p.eta > 0.0) {
            return Err(Error::config("RSE evolution requires eta > 0"));
        }
        Ok(RsePropagator {
            params: *p,
            poles: find_poles(p, pole_count)?,
        })
    }

    /// Smallest pole set, doubled from 32, whose truncation estimate for
    /// states `1..=n_max` is below tolerance at every `tau >= tau_min`.
    pub fn for_times(p: &ModelParams, n_max: usize, tau_min: f64) -> Result<Self> {
        let ns: Vec<usize> = (1..=n_max.max(1)).collect();
        let mut count = 32;
        loop {
            let rse = RsePropagator::new(p, count)?;
            if rse.truncation_estimate(&ns, tau_min) <= POLE_TRUNCATION_TOL {
                return Ok(rse);
            }
            if count >= MAX_POLES {
                return Err(Error::Capacity(format!(
                    "more than {MAX_POLES} poles needed at tau = {tau_min}"
                )));
            }
            count = (2 * count).min(MAX_POLES);
        }
    }

    pub fn poles(&self) -> &[Pole] {
        &self.poles
    }

    pub fn params(&self) -> &ModelParams {
        &self.params
    }

    /// `phi_n(x, tau)` for `x` in `[0, d]`.
    pub fn wavefunction(&self, n: usize, x: f64, tau: f64) -> Result<Complex64> {
        let mut out = [Complex64::new(0.0, 0.0)];
        self.wavefunctions(&[n], x, tau, &mut out)?;
        Ok(out[0])
    }

    /// `phi_n(x, tau)` for every `n` in `ns`, sharing one contour quadrature.
    pub fn wavefunctions(&self, ns: &[usize], x: f64, tau: f64, out: &mut [Complex64]) -> Result<()> {
        let p = &self.params;
        if !(tau > 0.0) {
            return Err(Error::domain(format!("evolution needs tau > 0, got {tau}")));
        }
        if x < 0.0 || x > p.d * (1.0 + 1e-14) {
            return Err(Error::domain(format!(
                "the resonant-state expansion holds for 0 <= x <= d = {}, got x = {x}",
                p.d
            )));
        }
        if ns.iter().any(|&n| n < 1) {
            return Err(Error::domain("box states are numbered from n = 1"));
        }
        self.pole_terms(ns, x, tau, out)?;
        let resonant = out.iter().map(|v| v.norm()).fold(0.0, f64::max);
        let contour = self.contour(ns, x, tau, 1e-14 * resonant)?;
        for (o, c) in out.iter_mut().zip(contour) {
            *o += c;
        }
        Ok(())
    }

    /// Size of the neglected pole terms, from the last three retained ones.
    pub fn truncation_estimate(&self, ns: &[usize], tau: f64) -> f64 {
        let p = &self.params;
        let last = self.poles.len().saturating_sub(3);
        let mut tail = 0.0f64;
        for &n in ns {
            for pole in &self.poles[last..] {
                let k = pole.k;
                let amp = hat_residue(n, pole, p) * 2.0 * k;
                let decay = (Complex64::new(0.0, -0.5) * k * k * tau).exp();
                // sup over [0, d] of |sin(kx)| is at most cosh(Im k d)
                tail = tail.max(amp.norm() * (k.im * p.d).cosh() * decay.norm());
            }
        }
        3.0 * tail
    }

    fn pole_terms(&self, ns: &[usize], x: f64, tau: f64, out: &mut [Complex64]) -> Result<()> {
        let p = &self.params;
        for (slot, &n) in out.iter_mut().zip(ns) {
            *slot = Complex64::new(0.0, 0.0);
            for pole in &self.poles {
                let k = pole.k;
                let amp = hat_residue(n, pole, p) * 2.0 * k;
                let decay = (Complex64::new(0.0, -0.5) * k * k * tau).exp();
                *slot += amp * (k * x).sin() * decay;
            }
        }
        let estimate = self.truncation_estimate(ns, tau);
        if estimate > POLE_TRUNCATION_TOL {
            return Err(Error::accuracy(
                format!(
                    "{} poles leave a truncation error near {estimate:.1e} at tau = {tau}; use more poles",
                    self.poles.len()
                ),
                out.first().map_or(0.0, |v| v.norm()),
                estimate,
            ));
        }
        Ok(())
    }

    /// `(1/pi) int s G_hat(x, s e^{-i pi/4}) e^{-s^2 tau / 2} ds` over the real `s` line.
    fn contour(&self, ns: &[usize], x: f64, tau: f64, abs_tol: f64) -> Result<Vec<Complex64>> {
        let p = &self.params;
        let rot = Complex64::new(FRAC_1_SQRT_2, -FRAC_1_SQRT_2);
        // |G_hat| grows at most like exp(sqrt(2) * 2d * |s|) along the line; cut where the
        // Gaussian has beaten that growth by e^{-40}
        let c = 2.0 * std::f64::consts::SQRT_2 * p.d;
        let s_max = (c + (c * c + 80.0 * tau).sqrt()) / tau;
        let w = (1.0 / tau.sqrt()).min(s_max / 2.0);
        let breaks = [-s_max, -w, 0.0, w, s_max];
        let xs = [x];
        let mut tmp = [Complex64::new(0.0, 0.0)];
        let mut integrand = |s: f64, out: &mut [Complex64]| {
            if s == 0.0 {
                return;
            }
            let k = rot * s;
            let weight = s * (-0.5 * s * s * tau).exp() / PI;
            for (o, &n) in out.iter_mut().zip(ns) {
                green_hat_many(n, &xs, k, p, &mut tmp);
                *o = tmp[0] * weight;
            }
        };
        // The integrand is dominated by an odd part that cancels, so the result is
        // smaller than int |f| by about 1/tau; rounding limits it to eps times that.
        let rule = GaussLegendre::<f64>::new(16);
        let mut buf = vec![Complex64::new(0.0, 0.0); ns.len()];
        let mut l1 = 0.0f64;
        for w in breaks.windows(2) {
            for (s, wt) in rule.mapped(w[0], w[1]) {
                integrand(s, &mut buf);
                l1 += wt * buf.iter().map(|z| z.norm()).fold(0.0, f64::max);
            }
        }
        let rounding = 64.0 * f64::EPSILON * l1;
        let floor = (1e-16 * tau.powf(-1.5).min(1.0) / p.barrier_factor().powi(2))
            .max(abs_tol)
            .max(rounding);
        let (v, _) = integrate_vec_tol(integrand, ns.len(), &breaks, floor, 1e-12, 4000)?;
        Ok(v)
    }
}

/// `phi_n(x, tau)` by the resonant-state expansion with `pole_count` poles.
pub fn rse_propagate(n: usize, x: f64, tau: f64, p: &ModelParams, pole_count: usize) -> Result<Complex64> {
    RsePropagator::new(p, pole_count)?.wavefunction(n, x, tau)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::model::asymptotic_wavefunction;

    #[test]
    fn too_few_poles_is_reported() {
        let p = ModelParams::winter(10.0).unwrap();
        let rse = RsePropagator::new(&p, 3).unwrap();
        assert!(matches!(rse.wavefunction(1, 0.5, 0.1), Err(Error::Accuracy { .. })));
    }

    #[test]
    fn long_time_leading_term() {
        let p = ModelParams::new(1.0, 1.5, 3.0).unwrap();
        let rse = RsePropagator::new(&p, 60).unwrap();
        let tau = 1e5;
        let v = rse.wavefunction(2, 0.6, tau).unwrap();
        let lead = asymptotic_wavefunction(2, 0.6, tau, &p);
        assert!(((v / lead) - 1.0).norm() < 0.01, "{v} vs {lead}");
    }

    #[test]
    fn pole_set_grows_for_short_times() {
        let p = ModelParams::winter(10.0).unwrap();
        let late = RsePropagator::for_times(&p, 2, 10.0).unwrap();
        let early = RsePropagator::for_times(&p, 2, 0.1).unwrap();
        assert!(early.poles().len() > late.poles().len());
        assert!(early.truncation_estimate(&[1, 2], 0.1) <= POLE_TRUNCATION_TOL);
        assert!(early.wavefunction(2, 0.4, 0.1).is_ok());
    }

    #[test]
    fn outside_the_barrier_is_refused() {
        let p = ModelParams::winter(10.0).unwrap();
        let rse = RsePropagator::new(&p, 50).unwrap();
        assert!(rse.wavefunction(1, 1.2, 1.0).is_err());
    }
}
