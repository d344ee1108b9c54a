//! Faddeeva function `w(z) = exp(-z^2) erfc(-iz)` and the Moshinsky function.
//!
//! Three evaluators share the work:
//! * the Maclaurin series `sum (iz)^n / Gamma(n/2+1)`, carried in
//!   double-double once `|z| >= 2` so that its `exp(|z|^2)` cancellation
//!   still leaves full double precision up to `|z| = 6`;
//! * the asymptotic (Laplace) series in the upper half-plane for large `|z|`;
//! * the Laplace continued fraction, used by the double-double evaluator
//!   between the two.
//!
//! The lower half-plane is reached through `w(z) = 2 exp(-z^2) - w(-z)`.

use num_complex::{Complex, Complex64};
use num_traits::{One, Zero};

use super::real::{cabs, cexp, cis, from_c64, to_c64, DoubleDouble, Real};
use crate::error::{Error, Result};

/// Scalars for which the special functions are available.
pub trait Precision: Real {
    /// Faddeeva function in this precision.
    fn faddeeva_w(z: Complex<Self>) -> Result<Complex<Self>>;
}

impl Precision for f64 {
    fn faddeeva_w(z: Complex<f64>) -> Result<Complex<f64>> {
        faddeeva(z)
    }
}

impl Precision for DoubleDouble {
    fn faddeeva_w(z: Complex<DoubleDouble>) -> Result<Complex<DoubleDouble>> {
        faddeeva_dd(z)
    }
}

fn two_over_sqrt_pi<T: Real>() -> T {
    T::from_f64(2.0) / T::pi().sqrt()
}

/// Maclaurin series, split into the even chain `exp(-z^2)` and the odd chain.
fn maclaurin<T: Real>(z: Complex<T>) -> Complex<T> {
    let mz2 = -(z * z);
    let mag2 = (z.re * z.re + z.im * z.im).to_f64();
    let floor = T::EPSILON * 1e-3;

    let mut even = Complex::<T>::zero();
    let mut term = Complex::<T>::one();
    let mut m = 0i64;
    loop {
        even = even + term;
        m += 1;
        term = term * mz2 / T::from_i64(m);
        if (m as f64) > mag2 && cabs(term).to_f64() < floor {
            break;
        }
    }

    let mut odd = Complex::<T>::zero();
    let mut term = Complex::<T>::one();
    let mut m = 0i64;
    loop {
        odd = odd + term;
        m += 1;
        term = term * mz2 * T::from_f64(2.0) / T::from_i64(2 * m + 1);
        if (m as f64) > mag2 && cabs(term).to_f64() < floor {
            break;
        }
    }

    let iz = Complex::new(-z.im, z.re);
    even + iz * odd * two_over_sqrt_pi::<T>()
}

/// `i/(sqrt(pi) z) * sum (2n-1)!! / (2 z^2)^n`, truncated at the smallest term.
///
/// Returns the sum and the size of the last retained term relative to it.
fn asymptotic<T: Real>(z: Complex<T>) -> (Complex<T>, f64) {
    let inv_2z2 = Complex::<T>::one() / (z * z * T::from_f64(2.0));
    let mut sum = Complex::<T>::one();
    let mut term = Complex::<T>::one();
    let mut last = 1.0f64;
    let mut n = 1i64;
    loop {
        let next = term * inv_2z2 * T::from_i64(2 * n - 1);
        let size = cabs(next).to_f64();
        if size >= last {
            break;
        }
        sum = sum + next;
        term = next;
        last = size;
        if size < T::EPSILON * 0.1 * cabs(sum).to_f64() {
            break;
        }
        n += 1;
    }
    let pref = Complex::new(T::zero(), T::one()) / (z * T::pi().sqrt());
    (pref * sum, last / cabs(sum).to_f64())
}

/// Laplace continued fraction `w = (i/sqrt(pi)) / (z - (1/2)/(z - 1/(z - (3/2)/(z - ...))))`,
/// modified Lentz evaluation. Upper half-plane only.
fn continued_fraction<T: Real>(z: Complex<T>, max_iter: usize) -> Option<Complex<T>> {
    let tiny = Complex::new(T::from_f64(1e-280), T::zero());
    let mut f = z;
    if cabs(f).to_f64() == 0.0 {
        f = tiny;
    }
    let mut c = f;
    let mut d = Complex::<T>::zero();
    for n in 1..=max_iter {
        let a = T::from_f64(-(n as f64) * 0.5);
        d = z + d * a;
        if cabs(d).to_f64() == 0.0 {
            d = tiny;
        }
        c = z + Complex::new(a, T::zero()) / c;
        if cabs(c).to_f64() == 0.0 {
            c = tiny;
        }
        d = Complex::<T>::one() / d;
        let delta = c * d;
        f = f * delta;
        if cabs(delta - Complex::<T>::one()).to_f64() < T::EPSILON * 0.5 {
            let i_over_sqrt_pi = Complex::new(T::zero(), T::one() / T::pi().sqrt());
            return Some(i_over_sqrt_pi / f);
        }
    }
    None
}

fn check_finite(z: Complex64) -> Result<()> {
    if z.re.is_finite() && z.im.is_finite() {
        Ok(())
    } else {
        Err(Error::domain(format!("faddeeva argument {z} is not finite")))
    }
}

fn reflect<T: Real>(z: Complex<T>, w_minus_z: Complex<T>) -> Result<Complex<T>> {
    // Re(-z^2) = y^2 - x^2
    let growth = (z.im * z.im - z.re * z.re).to_f64();
    if growth > 708.0 {
        return Err(Error::Range(format!(
            "w({}, {}) overflows: exp(-z^2) has exponent {growth:.1}",
            z.re.to_f64(),
            z.im.to_f64()
        )));
    }
    let e = cexp(-(z * z));
    Ok(e * T::from_f64(2.0) - w_minus_z)
}

/// Faddeeva function in double precision.
///
/// Relative accuracy is at the 1e-14 level for `|z| <= 50` away from the
/// zeros of `w` in the lower half-plane.
pub fn faddeeva(z: Complex64) -> Result<Complex64> {
    check_finite(z)?;
    let r = z.norm();
    if r < 2.0 {
        return Ok(maclaurin(z));
    }
    if r < 6.0 {
        let zd: Complex<DoubleDouble> = from_c64(z);
        return Ok(to_c64(maclaurin(zd)));
    }
    if z.im >= 0.0 {
        Ok(asymptotic(z).0)
    } else {
        let w = asymptotic(-z).0;
        reflect(z, w)
    }
}

/// Faddeeva function in double-double precision (28 digits or better).
///
/// Between `|z| = 3` and `|z| = 9` the continued fraction is used, which
/// converges slowly close to the real axis; an accuracy error is returned if
/// it has not settled within the iteration budget.
pub fn faddeeva_dd(z: Complex<DoubleDouble>) -> Result<Complex<DoubleDouble>> {
    check_finite(to_c64(z))?;
    let r = cabs(z).to_f64();
    if r < 3.0 {
        return Ok(maclaurin(z));
    }
    let upper = |z: Complex<DoubleDouble>| -> Result<Complex<DoubleDouble>> {
        if r >= 9.0 {
            return Ok(asymptotic(z).0);
        }
        continued_fraction(z, 200_000).ok_or_else(|| {
            Error::accuracy(
                "continued fraction for w(z) did not converge (argument too close to the real axis)",
                to_c64(maclaurin(z)).norm(),
                f64::NAN,
            )
        })
    };
    if z.im.to_f64() >= 0.0 {
        upper(z)
    } else {
        let w = upper(-z)?;
        reflect(z, w)
    }
}

/// Moshinsky function `M(x, k, tau) = exp(i x^2 / 2tau) w(-z) / 2`,
/// `z = ((1+i)/2) sqrt(tau) (k - x/tau)`.
pub fn moshinsky(x: f64, k: Complex64, tau: f64) -> Result<Complex64> {
    if !(tau > 0.0) {
        return Err(Error::domain(format!("moshinsky needs tau > 0, got {tau}")));
    }
    let z = Complex64::new(0.5, 0.5) * tau.sqrt() * (k - x / tau);
    let w = faddeeva(-z)?;
    Ok(cis(x * x / (2.0 * tau)) * w * 0.5)
}

/// Moshinsky function for real `q`, with the free plane wave split off.
///
/// `M(x, q, tau) = [plane_wave] exp(i(qx - q^2 tau/2)) + remainder`. The
/// remainder only ever needs `w` on the upper diagonal `arg z = pi/4`, where it
/// is small and smooth, and callers can cancel plane waves exactly.
#[derive(Clone, Copy, Debug)]
pub struct MoshinskySplit<T> {
    pub plane_wave: bool,
    pub remainder: Complex<T>,
}

pub fn moshinsky_split<T: Precision>(x: T, q: T, tau: T) -> Result<MoshinskySplit<T>> {
    if !(tau.to_f64() > 0.0) {
        return Err(Error::domain("moshinsky needs tau > 0"));
    }
    let st = tau.sqrt();
    let r = q * st - x / st;
    let half = T::from_f64(0.5);
    let a = r.abs() * half;
    let w = T::faddeeva_w(Complex::new(a, a))?;
    let phase = cis(x * x / (tau * T::from_f64(2.0)));
    let plane_wave = r.to_f64() > 0.0;
    let sign = if plane_wave { -half } else { half };
    Ok(MoshinskySplit {
        plane_wave,
        remainder: phase * w * sign,
    })
}
