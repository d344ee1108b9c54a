//! Contour term of the resonant-state expansion from the Taylor data of the
//! outgoing Green function at `k = 0`:
//! `(i/pi) int G_hat(x, k) e^{-i k^2 tau / 2} k dk
//!   = (1 + i)/sqrt(pi) sum_s i^{3s} 2^{1-s} / (s-1)! G_hat^{(2s-1)}(x) tau^{-(s + 1/2)}`.

use num_complex::Complex64;

use crate::error::{Error, Result};
use crate::model::{box_eigenstate, outgoing_green_series, ModelParams};
use crate::numerics::{taylor_coeffs, GaussLegendre};

const NODES: usize = 48;

/// Coefficients `c_s`, `s = 1..=s_max`, of `phi_n(x, tau) ~ sum_s c_s tau^{-(s + 1/2)}`.
pub fn contour_coefficients(n: usize, x: f64, p: &ModelParams, s_max: usize) -> Result<Vec<Complex64>> {
    if n == 0 || s_max == 0 {
        return Err(Error::domain("need n >= 1 and s_max >= 1"));
    }
    let order = 2 * s_max - 1;
    // G_hat Taylor coefficients: integrate those of G+(x, x') against phi_n(x'),
    // split at the kink x' = x
    let gl = GaussLegendre::<f64>::new(NODES);
    let mut pieces = vec![(0.0, p.a)];
    if x > 0.0 && x < p.a {
        pieces = vec![(0.0, x), (x, p.a)];
    }
    let mut g = vec![Complex64::new(0.0, 0.0); order + 1];
    for (lo, hi) in pieces {
        for (xp, w) in gl.mapped(lo, hi) {
            let phi = box_eigenstate(n, xp, p)?;
            let c = taylor_coeffs(|k| outgoing_green_series(x, xp, k, p), order)?;
            for (gi, ci) in g.iter_mut().zip(&c) {
                *gi += ci * (w * phi);
            }
        }
    }
    let pre = Complex64::new(1.0, 1.0) / std::f64::consts::PI.sqrt();
    let i = Complex64::new(0.0, 1.0);
    let mut out = Vec::with_capacity(s_max);
    let mut fact = 1.0; // (s-1)!
    let mut deriv_fact = 1.0; // (2s-1)!
    for s in 1..=s_max {
        if s > 1 {
            fact *= (s - 1) as f64;
            deriv_fact *= ((2 * s - 2) * (2 * s - 1)) as f64;
        }
        let derivative = g[2 * s - 1] * deriv_fact;
        out.push(pre * i.powu(3 * s as u32) * 2f64.powi(1 - s as i32) / fact * derivative);
    }
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::asymptotics::wavefunction_series;
    use crate::model::{asymptotic_wavefunction, evolve_free};
    use crate::numerics::real::to_c64;

    #[test]
    fn free_coefficients_match_the_image_series() {
        let p = ModelParams::free();
        for (n, x) in [(1, 0.5), (2, 0.7), (3, 0.25)] {
            let c = contour_coefficients(n, x, &p, 3).unwrap();
            let s = wavefunction_series(n, x, &p, 7).unwrap();
            for (j, cj) in c.iter().enumerate() {
                let img = to_c64(s.coefficient(2 * j as i32 + 3).unwrap());
                assert!((cj - img).norm() < 1e-11 * img.norm(), "n={n} s={} {cj} {img}", j + 1);
            }
        }
    }

    #[test]
    fn three_terms_track_the_free_evolution() {
        let p = ModelParams::free();
        let c = contour_coefficients(1, 0.5, &p, 3).unwrap();
        for tau in [100.0f64, 1000.0] {
            let approx: Complex64 = c
                .iter()
                .enumerate()
                .map(|(j, cj)| cj * tau.powf(-(j as f64 + 1.5)))
                .sum();
            let exact = evolve_free(1, 0.5, tau, &p).unwrap();
            // first omitted term is O(tau^{-9/2})
            assert!((approx - exact).norm() < 20.0 * tau.powf(-4.5), "{tau}");
        }
    }

    #[test]
    fn barrier_scales_the_leading_coefficient() {
        for (d, eta) in [(1.0, 3.0), (2.0, 5.0)] {
            let p = ModelParams::new(1.0, d, eta).unwrap();
            let c = contour_coefficients(2, 0.6, &p, 1).unwrap();
            let expect = asymptotic_wavefunction(2, 0.6, 1.0, &p);
            assert!((c[0] - expect).norm() < 1e-12 * expect.norm(), "{d} {eta}");
        }
    }
}
