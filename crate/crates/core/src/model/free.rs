use num_complex::{Complex, Complex64};
use num_traits::Zero;

use super::ModelParams;
use crate::error::{Error, Result};
use crate::numerics::faddeeva::{moshinsky_split, Precision};
use crate::numerics::real::cis;

/// Barrier-free evolution of the `n`-th box state on the half-line.
pub fn evolve_free(n: usize, x: f64, tau: f64, p: &ModelParams) -> Result<Complex64> {
    if p.eta != 0.0 {
        return Err(Error::config(format!(
            "free evolution requires eta = 0, got eta = {}",
            p.eta
        )));
    }
    evolve_free_in(n, x, tau, p.a)
}

/// Barrier-free evolution in any precision.
///
/// The image construction gives
/// `phi_n = (1 / (i sqrt(2a))) sum_{alpha,beta} alpha beta
///  [(-1)^n M(beta x - a, alpha q) - M(beta x, alpha q)]`, `q = n pi / a`.
/// Both Moshinsky functions of a pair carry the same plane wave, so the plane
/// waves are combined analytically and only the decaying remainders are summed.
pub fn evolve_free_in<T: Precision>(n: usize, x: T, tau: T, a: T) -> Result<Complex<T>> {
    if n < 1 {
        return Err(Error::domain("box states are numbered from n = 1"));
    }
    if !(tau.to_f64() > 0.0) {
        return Err(Error::domain(format!("evolution needs tau > 0, got {}", tau)));
    }
    let q = T::pi() * T::from_i64(n as i64) / a;
    let parity = if n.is_multiple_of(2) { T::one() } else { -T::one() };
    let half = T::from_f64(0.5);
    let kinetic = q * q * tau * half;
    let mut acc = Complex::<T>::zero();
    for alpha in [T::one(), -T::one()] {
        for beta in [T::one(), -T::one()] {
            let bx = beta * x;
            let aq = alpha * q;
            let m1 = moshinsky_split(bx - a, aq, tau)?;
            let m2 = moshinsky_split(bx, aq, tau)?;
            let mut term = m1.remainder * parity - m2.remainder;
            if m1.plane_wave != m2.plane_wave {
                let pw = cis(aq * bx - kinetic);
                term = if m1.plane_wave { term + pw } else { term - pw };
            }
            acc = acc + term * (alpha * beta);
        }
    }
    // 1 / (i sqrt(2a)) = -i / sqrt(2a)
    let scale = T::one() / (a * T::from_f64(2.0)).sqrt();
    Ok(Complex::new(acc.im * scale, -acc.re * scale))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::model::{asymptotic_wavefunction, box_eigenstate};
    use crate::numerics::real::{DoubleDouble, Real};
    use crate::numerics::{integrate, integrate_vec};
    use std::f64::consts::PI;

    /// Direct quadrature of the image propagator against the initial state.
    fn image_oracle(n: usize, x: f64, tau: f64, a: f64) -> Complex64 {
        let q = n as f64 * PI / a;
        let pref = (Complex64::new(0.0, 2.0 * PI * tau)).sqrt().inv();
        let g0 = |y: f64| pref * Complex64::from_polar(1.0, y * y / (2.0 * tau));
        // the kernel oscillates with local wavenumber |x - x'| / tau
        let panels = ((a * (x + a) / tau) / PI).ceil().max(1.0) as usize * 4;
        let breaks: Vec<f64> = (0..=panels).map(|i| a * i as f64 / panels as f64).collect();
        let (v, _) = integrate_vec(
            |xp, out: &mut [Complex64]| {
                out[0] = (g0(x - xp) - g0(x + xp)) * ((2.0 / a).sqrt() * (q * xp).sin());
            },
            1,
            &breaks,
            1e-13,
            20000,
        )
        .unwrap();
        v[0]
    }

    #[test]
    fn matches_image_propagator_quadrature() {
        for &(n, x, tau, a) in &[
            (1, 0.5, 1.0, 1.0),
            (2, 0.3, 0.5, 1.0),
            (3, 1.7, 2.0, 1.0),
            (1, 0.9, 0.05, 1.0),
            (2, 2.5, 0.7, 1.5),
            (4, 0.1, 10.0, 1.0),
        ] {
            let got = evolve_free_in(n, x, tau, a).unwrap();
            let want = image_oracle(n, x, tau, a);
            assert!((got - want).norm() < 1e-9, "n={n} x={x} tau={tau}: {got} vs {want}");
        }
    }

    #[test]
    fn short_time_limit_is_the_initial_state() {
        let p = ModelParams::free();
        for n in 1..4 {
            for &x in &[0.2, 0.5, 0.77] {
                let v = evolve_free(n, x, 1e-7, &p).unwrap();
                let want = box_eigenstate(n, x, &p).unwrap();
                assert!((v - want).norm() < 1e-5, "n={n} x={x}: {v} vs {want}");
            }
        }
    }

    #[test]
    fn long_time_matches_leading_asymptote() {
        let p = ModelParams::free();
        let tau = 1e3;
        let exact = evolve_free(1, 0.5, tau, &p).unwrap();
        let lead = asymptotic_wavefunction(1, 0.5, tau, &p);
        assert!(((exact - lead).norm() / lead.norm()) < 0.01);
        let exact = evolve_free(1, 0.5, 1e4, &p).unwrap();
        let lead = asymptotic_wavefunction(1, 0.5, 1e4, &p);
        assert!(((exact / lead) - 1.0).norm() < 0.005);
    }

    #[test]
    fn norm_is_conserved() {
        let p = ModelParams::free();
        for &tau in &[0.1, 1.0, 10.0] {
            for n in 1..3 {
                // free flight carries the bulk out to roughly a + q tau
                let reach = 1.0 + 40.0 * n as f64 * PI * tau;
                let v = integrate(
                    |x| Complex64::from(evolve_free(n, x, tau, &p).unwrap().norm_sqr()),
                    (0.0, reach),
                    1e-10,
                )
                .unwrap();
                // momentum tail beyond reach / tau: |phi(p)|^2 ~ 2 q^2 / (pi p^4) on average
                let pc = reach / tau;
                let tail = 2.0 * (n as f64 * PI).powi(2) / (3.0 * PI * pc.powi(3));
                assert!((v.re + tail - 1.0).abs() < 1e-6, "tau={tau} n={n}: {}", v.re + tail);
            }
        }
    }

    #[test]
    fn double_double_agrees_with_double() {
        type Dd = DoubleDouble;
        for &(n, x, tau) in &[(1, 0.5, 3.0), (3, 0.2, 100.0), (2, 0.9, 0.3)] {
            let f = evolve_free_in(n, x, tau, 1.0).unwrap();
            let d = evolve_free_in(n, Dd::from(x), Dd::from(tau), Dd::from(1.0)).unwrap();
            let dc = Complex64::new(d.re.to_f64(), d.im.to_f64());
            assert!((f - dc).norm() < 1e-13 * f.norm().max(1e-3), "{f} vs {dc}");
        }
    }
}
