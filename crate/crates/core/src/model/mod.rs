//! Single-particle physics of the leaking box: a hard wall at `x = 0`, and at
//! `t = 0` the second wall is lowered to a delta barrier `(eta/2) delta(x - d)`
//! (natural units `hbar = m = 1`).

mod continuum;
mod free;
mod green;
mod poles;
mod rse;

pub use continuum::{continuum_propagate, ContinuumPropagator};
pub use free::{evolve_free, evolve_free_in};
pub use green::{green_hat, outgoing_green, outgoing_green_series, resonant_state};
pub use poles::{find_poles, pole_equation, pole_equation_derivative, winding_count, Pole};
pub use rse::{rse_propagate, RsePropagator};

use num_complex::Complex64;
use std::f64::consts::PI;

use crate::error::{Error, Result};

/// Which interval counts as "inside the trap" for non-escape observables.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum Region {
    /// `(0, a)`: the initial box.
    Box,
    /// `(0, d)`: everything left of the barrier.
    Barrier,
}

/// Trap geometry and barrier strength.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct ModelParams {
    pub a: f64,
    pub d: f64,
    pub eta: f64,
    pub region: Region,
}

impl ModelParams {
    pub fn new(a: f64, d: f64, eta: f64) -> Result<Self> {
        let p = ModelParams {
            a,
            d,
            eta,
            region: Region::Barrier,
        };
        p.validate()?;
        Ok(p)
    }

    /// Barrier at the box edge, `a = d = 1`.
    pub fn winter(eta: f64) -> Result<Self> {
        Self::new(1.0, 1.0, eta)
    }

    /// No barrier at all, `a = d = 1`.
    pub fn free() -> Self {
        ModelParams {
            a: 1.0,
            d: 1.0,
            eta: 0.0,
            region: Region::Barrier,
        }
    }

    pub fn with_region(mut self, region: Region) -> Self {
        self.region = region;
        self
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.a > 0.0 && self.a.is_finite()) {
            return Err(Error::config(format!("box width a must be positive, got {}", self.a)));
        }
        if !(self.d >= self.a && self.d.is_finite()) {
            return Err(Error::config(format!(
                "barrier position d must satisfy d >= a, got d = {} with a = {}",
                self.d, self.a
            )));
        }
        if !(self.eta >= 0.0 && self.eta.is_finite()) {
            return Err(Error::config(format!(
                "barrier strength eta must be >= 0, got {}",
                self.eta
            )));
        }
        Ok(())
    }

    /// Right end of the trap region.
    pub fn delta_end(&self) -> f64 {
        match self.region {
            Region::Box => self.a,
            Region::Barrier => self.d,
        }
    }

    /// Barrier factor `1 + eta * d` that suppresses the long-time tail.
    pub fn barrier_factor(&self) -> f64 {
        1.0 + self.eta * self.d
    }

    pub(crate) fn check_in_region(&self, x: f64) -> Result<()> {
        if x < 0.0 || x > self.delta_end() * (1.0 + 1e-14) {
            return Err(Error::domain(format!(
                "x = {x} lies outside the trap region [0, {}]",
                self.delta_end()
            )));
        }
        Ok(())
    }
}

/// How single-particle states are propagated.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum EvolutionMethod {
    /// Closed form through Moshinsky functions; barrier-free only.
    ExactFree,
    /// Resonant-state expansion plus a contour integral.
    Rse,
    /// Spectral integral over scattering states (slow, independent).
    ContinuumQuadrature,
    /// Leading long-time term only.
    AsymptoticLeading,
}

impl EvolutionMethod {
    pub fn check(&self, p: &ModelParams) -> Result<()> {
        p.validate()?;
        match self {
            EvolutionMethod::ExactFree if p.eta != 0.0 => Err(Error::config(format!(
                "ExactFree evolution requires eta = 0, got eta = {}",
                p.eta
            ))),
            EvolutionMethod::Rse if p.eta <= 0.0 => Err(Error::config(
                "RSE evolution requires eta > 0 (no resonances without a barrier)",
            )),
            _ => Ok(()),
        }
    }

    pub fn name(&self) -> &'static str {
        match self {
            EvolutionMethod::ExactFree => "exact_free",
            EvolutionMethod::Rse => "rse",
            EvolutionMethod::ContinuumQuadrature => "continuum",
            EvolutionMethod::AsymptoticLeading => "asymptotic",
        }
    }
}

impl std::str::FromStr for EvolutionMethod {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        match s.to_ascii_lowercase().as_str() {
            "exact_free" | "exactfree" | "exact" => Ok(EvolutionMethod::ExactFree),
            "rse" => Ok(EvolutionMethod::Rse),
            "continuum" | "continuum_quadrature" | "continuumquadrature" => Ok(EvolutionMethod::ContinuumQuadrature),
            "asymptotic" | "asymptotic_leading" | "asymptoticleading" => Ok(EvolutionMethod::AsymptoticLeading),
            other => Err(Error::config(format!("unknown evolution method '{other}'"))),
        }
    }
}

/// Wavenumber of the `n`-th box state.
pub fn box_wavenumber(n: usize, a: f64) -> f64 {
    n as f64 * PI / a
}

/// `n`-th eigenstate of the initial box, `sqrt(2/a) sin(n pi x / a)` on `[0, a]`.
pub fn box_eigenstate(n: usize, x: f64, p: &ModelParams) -> Result<f64> {
    if n < 1 {
        return Err(Error::domain("box states are numbered from n = 1"));
    }
    if !(0.0..=p.a).contains(&x) {
        return Ok(0.0);
    }
    Ok((2.0 / p.a).sqrt() * (box_wavenumber(n, p.a) * x).sin())
}

/// Leading long-time term of the single-particle wavefunction,
/// `2 e^{i pi/4} / pi^{3/2} (-1)^n x / (n (1 + eta d)^2) (a/tau)^{3/2}`.
pub fn asymptotic_wavefunction(n: usize, x: f64, tau: f64, p: &ModelParams) -> Complex64 {
    let sign = if n.is_multiple_of(2) { 1.0 } else { -1.0 };
    let amp = 2.0 / PI.powf(1.5) * sign * x / (n as f64 * p.barrier_factor().powi(2)) * (p.a / tau).powf(1.5);
    Complex64::from_polar(amp, PI / 4.0)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::numerics::integrate;

    #[test]
    fn ground_state_peaks_at_the_centre() {
        let p = ModelParams::free();
        assert!((box_eigenstate(1, 0.5, &p).unwrap() - 2f64.sqrt()).abs() < 1e-15);
        let q = ModelParams::new(2.0, 2.0, 0.0).unwrap();
        assert!((box_eigenstate(1, 1.0, &q).unwrap() - 1.0).abs() < 1e-15);
    }

    #[test]
    fn box_states_vanish_on_the_walls_and_outside() {
        let p = ModelParams::free();
        for n in 1..6 {
            assert!(box_eigenstate(n, 0.0, &p).unwrap().abs() < 1e-15);
            assert!(box_eigenstate(n, 1.0, &p).unwrap().abs() < 1e-14);
            assert_eq!(box_eigenstate(n, 1.5, &p).unwrap(), 0.0);
        }
        assert!(box_eigenstate(0, 0.5, &p).is_err());
    }

    #[test]
    fn box_states_are_orthonormal() {
        let p = ModelParams::new(1.7, 2.0, 0.0).unwrap();
        for n in 1..5 {
            for m in 1..5 {
                let v = integrate(
                    |x| Complex64::from(box_eigenstate(n, x, &p).unwrap() * box_eigenstate(m, x, &p).unwrap()),
                    (0.0, p.a),
                    1e-14,
                )
                .unwrap();
                let want = if n == m { 1.0 } else { 0.0 };
                assert!((v.re - want).abs() < 1e-13);
            }
        }
    }

    #[test]
    fn exact_free_needs_zero_barrier() {
        let p = ModelParams::winter(1.0).unwrap();
        let e = EvolutionMethod::ExactFree.check(&p).unwrap_err();
        assert!(e.to_string().contains("eta = 0"));
    }

    #[test]
    fn invalid_geometry_is_rejected() {
        assert!(ModelParams::new(1.0, 0.5, 1.0).is_err());
        assert!(ModelParams::new(0.0, 1.0, 1.0).is_err());
        assert!(ModelParams::new(1.0, 1.0, -1.0).is_err());
    }

    #[test]
    fn asymptotic_amplitude_is_linear_in_x_and_inverse_in_n() {
        let p = ModelParams::free();
        let a = asymptotic_wavefunction(1, 0.2, 1e3, &p).norm();
        let b = asymptotic_wavefunction(1, 0.4, 1e3, &p).norm();
        assert!((b / a - 2.0).abs() < 1e-14);
        let c = asymptotic_wavefunction(3, 0.4, 1e3, &p).norm();
        assert!((b / c - 3.0).abs() < 1e-14);
    }
}
