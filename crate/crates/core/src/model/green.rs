//! Outgoing Green function of `psi'' + k^2 psi = eta delta(x - d) psi` on the
//! half-line with a hard wall at the origin.

use num_complex::{Complex, Complex64};

use super::poles::{pole_equation, pole_equation_derivative, Pole};
use super::{box_wavenumber, ModelParams};
use crate::error::Result;
use crate::numerics::real::DoubleDouble;
use crate::numerics::TruncatedSeries;

const I: Complex64 = Complex64::new(0.0, 1.0);

/// `G+(x, x'; k)` for `0 <= x, x' <= delta_end`:
/// `-sin(k x<) [k cos(k(x> - d)) + (ik - eta) sin(k(x> - d))] / (k F(k))`.
pub fn outgoing_green(x: f64, xp: f64, k: Complex64, p: &ModelParams) -> Result<Complex64> {
    p.check_in_region(x)?;
    p.check_in_region(xp)?;
    let (lo, hi) = if x <= xp { (x, xp) } else { (xp, x) };
    if k == Complex64::new(0.0, 0.0) {
        return Ok(Complex64::from(-lo * (1.0 + p.eta * (p.d - hi)) / p.barrier_factor()));
    }
    let t = k * (hi - p.d);
    let outgoing = k * t.cos() + (I * k - p.eta) * t.sin();
    Ok(-(k * lo).sin() * outgoing / (k * pole_equation(k, p)))
}

/// `G+(x, x'; k)` evaluated on a truncated series in `k` (for Taylor data at `k = 0`).
pub fn outgoing_green_series(x: f64, xp: f64, k: &TruncatedSeries, p: &ModelParams) -> Result<TruncatedSeries> {
    p.check_in_region(x)?;
    p.check_in_region(xp)?;
    let (lo, hi) = if x <= xp { (x, xp) } else { (xp, x) };
    let c = |re: f64, im: f64| Complex::new(DoubleDouble::from(re), DoubleDouble::from(im));
    let ik = k.scale(c(0.0, 1.0));
    let t = k.scale(c(hi - p.d, 0.0));
    let outgoing = &(k * &t.cos()?) + &(&ik.add_constant(c(-p.eta, 0.0)) * &t.sin()?);
    let kd = k.scale(c(p.d, 0.0));
    let f = &(k * &kd.cos()?) + &(&ik.scale(c(-1.0, 0.0)).add_constant(c(p.eta, 0.0)) * &kd.sin()?);
    let num = -(&k.scale(c(lo, 0.0)).sin()? * &outgoing);
    num.div(&(k * &f))
}

/// Pieces of `G_hat(x, k) = int_0^a G+(x, x'; k) phi_n(x') dx'`.
struct HatCoefficients {
    k: Complex64,
    q: f64,
    norm: f64,
    a_coef: Complex64,
    dp_over_k: Complex64,
}

fn hat_coefficients(n: usize, k: Complex64, p: &ModelParams) -> HatCoefficients {
    let q = box_wavenumber(n, p.a);
    let norm = (2.0 / p.a).sqrt();
    let parity = if n.is_multiple_of(2) { 1.0 } else { -1.0 };
    let dp = norm * q * parity / (k * k - q * q);
    let theta = k * (p.d - p.a);
    let l = I * k - p.eta;
    let a_coef = -(dp / k) * (k * theta.cos() - l * theta.sin()) / pole_equation(k, p);
    HatCoefficients {
        k,
        q,
        norm,
        a_coef,
        dp_over_k: dp / k,
    }
}

impl HatCoefficients {
    fn eval(&self, x: f64, p: &ModelParams) -> Complex64 {
        let k = self.k;
        if x <= p.a {
            let particular = self.norm * (self.q * x).sin() / (k * k - self.q * self.q);
            particular + self.a_coef * (k * x).sin()
        } else {
            let c = self.a_coef * (k * p.a).sin();
            let b = self.dp_over_k + self.a_coef * (k * p.a).cos();
            let t = k * (x - p.a);
            b * t.sin() + c * t.cos()
        }
    }
}

/// `G_hat(x, k) = int_0^a G+(x, x'; k) phi_n(x', 0) dx'` in closed form, `0 <= x <= d`.
pub fn green_hat(n: usize, x: f64, k: Complex64, p: &ModelParams) -> Complex64 {
    hat_coefficients(n, k, p).eval(x, p)
}

/// Evaluate `G_hat(x_i, k)` for every `x_i` at one `k`.
pub(crate) fn green_hat_many(n: usize, xs: &[f64], k: Complex64, p: &ModelParams, out: &mut [Complex64]) {
    let h = hat_coefficients(n, k, p);
    for (o, &x) in out.iter_mut().zip(xs) {
        *o = h.eval(x, p);
    }
}

/// Residue at a pole of the coefficient `A(k)` of `sin(kx)` in `G_hat`;
/// `Res G_hat(x, k_j) = A_j sin(k_j x)` on the whole of `[0, d]`.
pub(crate) fn hat_residue(n: usize, pole: &Pole, p: &ModelParams) -> Complex64 {
    let k = pole.k;
    let q = box_wavenumber(n, p.a);
    let parity = if n.is_multiple_of(2) { 1.0 } else { -1.0 };
    let dp = (2.0 / p.a).sqrt() * q * parity / (k * k - q * q);
    let theta = k * (p.d - p.a);
    let l = I * k - p.eta;
    -(dp / k) * (k * theta.cos() - l * theta.sin()) / pole_equation_derivative(k, p)
}

/// Normalization `C_j` of the resonant state `u_j(x) = C_j sin(k_j x)` on `[0, d]`,
/// fixed by `int_0^d u_j^2 dx + i u_j(d)^2 / (2 k_j) = 1`.
pub fn resonant_state(pole: &Pole, p: &ModelParams) -> Complex64 {
    let k = pole.k;
    let d = p.d;
    let s = (k * d).sin();
    let integral = d / 2.0 - (k * 2.0 * d).sin() / (4.0 * k) + I * s * s / (2.0 * k);
    integral.sqrt().inv()
}
