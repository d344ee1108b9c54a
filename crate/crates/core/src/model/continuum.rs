//! Spectral evolution over the scattering states of the barrier.
//!
//! Inside the barrier the states are `sin(px)`; beyond it they continue as
//! `sin(pd) cos(p(x-d)) + [cos(pd) + eta sin(pd)/p] sin(p(x-d))`, with squared
//! asymptotic amplitude `R(p)^2`. Completeness reads
//! `delta(x - x') = (2/pi) int_0^inf psi_p(x) psi_p(x') / R(p)^2 dp`.

use num_complex::Complex64;
use std::f64::consts::PI;

use super::{box_wavenumber, ModelParams};
use crate::error::{Error, Result};
use crate::numerics::integrate_vec;

/// Target error of a single spectral evaluation.
pub const CONTINUUM_TOL: f64 = 1e-9;

#[derive(Clone, Copy, Debug)]
pub struct ContinuumPropagator {
    params: ModelParams,
}

fn sinc(x: f64) -> f64 {
    if x.abs() < 1e-4 {
        1.0 - x * x / 6.0
    } else {
        x.sin() / x
    }
}

impl ContinuumPropagator {
    pub fn new(p: &ModelParams) -> Result<Self> {
        p.validate()?;
        Ok(ContinuumPropagator { params: *p })
    }

    /// Scattering state at `x` and its squared amplitude `R(p)^2`.
    fn state(&self, x: f64, p: f64) -> (f64, f64) {
        let (d, eta) = (self.params.d, self.params.eta);
        let (s, c) = (p * d).sin_cos();
        let slope = c + eta * d * sinc(p * d);
        let r2 = s * s + slope * slope;
        let psi = if x <= d {
            (p * x).sin()
        } else {
            let t = p * (x - d);
            s * t.cos() + slope * t.sin()
        };
        (psi, r2)
    }

    /// `<psi_p | phi_n(0)>`, continuous through `p = q`.
    fn overlap(&self, n: usize, p: f64) -> f64 {
        let a = self.params.a;
        let q = box_wavenumber(n, a);
        (2.0 / a).sqrt() * q * a * sinc((p - q) * a) / (p + q)
    }

    /// `phi_n(x, tau)` and an error estimate.
    pub fn wavefunction_with_error(&self, n: usize, x: f64, tau: f64) -> Result<(Complex64, f64)> {
        if n < 1 {
            return Err(Error::domain("box states are numbered from n = 1"));
        }
        if !(tau > 0.0) || !(x >= 0.0) {
            return Err(Error::domain(format!(
                "continuum evolution needs x >= 0, tau > 0 (x = {x}, tau = {tau})"
            )));
        }
        let pr = &self.params;
        let q = box_wavenumber(n, pr.a);
        let c = 2.0 * pr.d + pr.a + x + 1.0;
        let amp = (2.0 / PI) * (2.0 / pr.a).sqrt() * q;
        // the boundary term of one integration by parts is added; the next
        // term is about amp c / (P^4 tau^2)
        let cut_err = 1e-10;
        let p_max = (amp * c * 4.0 / (cut_err * tau * tau))
            .powf(0.25)
            .max(2.0 * (q + pr.eta) + 4.0 * c / tau)
            .max(20.0);
        let m_max = (p_max * p_max * tau / (8.0 * PI)).ceil() as usize;
        if m_max > 2_000_000 {
            return Err(Error::accuracy(
                format!("momentum cutoff {p_max:.3e} needs too many panels at tau = {tau}"),
                f64::NAN,
                f64::NAN,
            ));
        }
        let mut breaks: Vec<f64> = (0..=m_max)
            .map(|m| (8.0 * PI * m as f64 / tau).sqrt())
            .filter(|&p| p < p_max)
            .collect();
        breaks.push(p_max);
        let integrand = |p: f64| -> Complex64 {
            if p == 0.0 {
                return Complex64::new(0.0, 0.0);
            }
            let (psi, r2) = self.state(x, p);
            let h = (2.0 / PI) * psi * self.overlap(n, p) / r2;
            Complex64::from_polar(h, -0.5 * p * p * tau)
        };
        let (v, err) = integrate_vec(
            |p, out: &mut [Complex64]| out[0] = integrand(p),
            1,
            &breaks,
            CONTINUUM_TOL * 0.1,
            4 * breaks.len() + 4000,
        )?;
        let end = integrand(p_max);
        let tail = end / Complex64::new(0.0, p_max * tau);
        let tail_err = tail.norm() * c / (p_max * tau);
        let total_err = err + tail_err;
        if total_err > CONTINUUM_TOL {
            return Err(Error::accuracy(
                "spectral cutoff too small for the requested accuracy",
                (v[0] + tail).norm(),
                total_err,
            ));
        }
        Ok((v[0] + tail, total_err))
    }

    pub fn wavefunction(&self, n: usize, x: f64, tau: f64) -> Result<Complex64> {
        Ok(self.wavefunction_with_error(n, x, tau)?.0)
    }

    /// `(2/pi) int |<psi_p|phi_n>|^2 / R^2 dp`, the norm carried by the
    /// spectral representation (1 when the states are complete).
    pub fn spectral_norm(&self, n: usize) -> Result<f64> {
        let a = self.params.a;
        let q = box_wavenumber(n, a);
        let p_max = 2000.0 * (q + self.params.eta + 1.0);
        let panels = (p_max * self.params.d.max(a) / PI).ceil() as usize;
        let breaks: Vec<f64> = (0..=panels).map(|i| p_max * i as f64 / panels as f64).collect();
        let (v, _) = integrate_vec(
            |p, out: &mut [Complex64]| {
                if p > 0.0 {
                    let (_, r2) = self.state(0.0, p);
                    out[0] = Complex64::from((2.0 / PI) * self.overlap(n, p).powi(2) / r2);
                }
            },
            1,
            &breaks,
            1e-13,
            4 * panels + 1000,
        )?;
        // |overlap|^2 ~ (2/a) q^2 sin^2 / p^4 averages to q^2 / (a p^4)
        let tail = (2.0 / PI) * q * q / (a * 3.0 * p_max.powi(3));
        Ok(v[0].re + tail)
    }
}

/// `phi_n(x, tau)` from the spectral integral over scattering states.
pub fn continuum_propagate(n: usize, x: f64, tau: f64, p: &ModelParams) -> Result<Complex64> {
    ContinuumPropagator::new(p)?.wavefunction(n, x, tau)
}
