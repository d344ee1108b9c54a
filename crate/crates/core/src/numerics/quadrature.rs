//! Adaptive Gauss-Kronrod quadrature for complex integrands, and fixed
//! Gauss-Legendre rules in any [`Real`] precision.

use std::cmp::Ordering;
use std::collections::BinaryHeap;

use num_complex::{Complex, Complex64};
use num_traits::Zero;

use super::real::Real;
use crate::error::{Error, Result};

#[allow(clippy::excessive_precision)]
const XGK: [f64; 11] = [
    0.995_657_163_025_808_080_735_527_280_689_003,
    0.973_906_528_517_171_720_077_964_012_084_452,
    0.930_157_491_355_708_226_001_207_180_059_508,
    0.865_063_366_688_984_510_732_096_688_423_493,
    0.780_817_726_586_416_897_063_717_578_345_042,
    0.679_409_568_299_024_406_234_327_365_114_874,
    0.562_757_134_668_604_683_339_000_099_272_694,
    0.433_395_394_129_247_190_799_265_943_165_784,
    0.294_392_862_701_460_198_131_126_603_103_866,
    0.148_874_338_981_631_210_884_826_001_129_720,
    0.0,
];

#[allow(clippy::excessive_precision)]
const WG: [f64; 5] = [
    0.066_671_344_308_688_137_593_568_809_893_332,
    0.149_451_349_150_580_593_145_776_339_657_697,
    0.219_086_362_515_982_043_995_534_934_228_163,
    0.269_266_719_309_996_355_091_226_921_569_469,
    0.295_524_224_714_752_870_173_892_994_651_338,
];

#[allow(clippy::excessive_precision)]
const WGK: [f64; 11] = [
    0.011_694_638_867_371_874_278_064_396_062_192,
    0.032_558_162_307_964_727_478_818_972_459_390,
    0.054_755_896_574_351_996_031_381_300_244_580,
    0.075_039_674_810_919_952_767_043_140_916_190,
    0.093_125_454_583_697_605_535_065_465_083_366,
    0.109_387_158_802_297_641_899_210_590_325_805,
    0.123_491_976_262_065_851_077_958_109_831_074,
    0.134_709_217_311_473_325_928_054_001_771_707,
    0.142_775_938_577_060_080_797_094_273_138_717,
    0.147_739_104_901_338_491_374_841_515_972_068,
    0.149_445_554_002_916_905_664_936_468_389_821,
];

/// Default cap on the number of panels an adaptive integration may create.
pub const DEFAULT_PANEL_BUDGET: usize = 4000;

struct Panel {
    lo: f64,
    hi: f64,
    value: Vec<Complex64>,
    error: f64,
}

impl PartialEq for Panel {
    fn eq(&self, other: &Self) -> bool {
        self.error == other.error
    }
}
impl Eq for Panel {}
impl PartialOrd for Panel {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}
impl Ord for Panel {
    fn cmp(&self, other: &Self) -> Ordering {
        self.error.total_cmp(&other.error)
    }
}

/// One 21-point Kronrod panel for a vector integrand; the error is the
/// Euclidean norm of the Kronrod-Gauss difference.
fn gk21<F>(f: &mut F, dim: usize, lo: f64, hi: f64, buf: &mut [Complex64]) -> Panel
where
    F: FnMut(f64, &mut [Complex64]),
{
    let c = 0.5 * (lo + hi);
    let h = 0.5 * (hi - lo);
    let mut kron = vec![Complex64::zero(); dim];
    let mut gauss = vec![Complex64::zero(); dim];
    let mut eval = |x: f64, wk: f64, wg: f64, f: &mut F, buf: &mut [Complex64]| {
        buf.iter_mut().for_each(|v| *v = Complex64::zero());
        f(x, buf);
        for i in 0..dim {
            kron[i] += buf[i] * wk;
            gauss[i] += buf[i] * wg;
        }
    };
    eval(c, WGK[10], 0.0, f, buf);
    for j in 0..10 {
        let wg = if j % 2 == 1 { WG[j / 2] } else { 0.0 };
        let dx = h * XGK[j];
        eval(c - dx, WGK[j], wg, f, buf);
        eval(c + dx, WGK[j], wg, f, buf);
    }
    let mut err2 = 0.0;
    for i in 0..dim {
        kron[i] *= h;
        gauss[i] *= h;
        err2 += (kron[i] - gauss[i]).norm_sqr();
    }
    Panel {
        lo,
        hi,
        value: kron,
        error: err2.sqrt(),
    }
}

/// Adaptive integration of a vector-valued integrand.
///
/// `f(x, out)` writes the `dim` integrand components at `x` into `out`.
/// Integration starts from the panels delimited by `breaks` (sorted, at least
/// two points) and bisects the worst panel until the total error estimate is
/// below `max(tol, tol * max_i |I_i|)`. Returns the integrals and the final
/// error estimate.
pub fn integrate_vec<F>(f: F, dim: usize, breaks: &[f64], tol: f64, max_panels: usize) -> Result<(Vec<Complex64>, f64)>
where
    F: FnMut(f64, &mut [Complex64]),
{
    integrate_vec_tol(f, dim, breaks, tol, tol, max_panels)
}

/// [`integrate_vec`] with separate absolute and relative targets: stops once
/// the error estimate is below `max(abs_tol, rel_tol * max_i |I_i|)`.
pub fn integrate_vec_tol<F>(
    mut f: F,
    dim: usize,
    breaks: &[f64],
    abs_tol: f64,
    rel_tol: f64,
    max_panels: usize,
) -> Result<(Vec<Complex64>, f64)>
where
    F: FnMut(f64, &mut [Complex64]),
{
    if breaks.len() < 2 || breaks.windows(2).any(|w| !(w[0] < w[1])) {
        return Err(Error::domain("integration needs increasing breakpoints lo < hi"));
    }
    if !(abs_tol > 0.0 && rel_tol > 0.0) {
        return Err(Error::domain("integration tolerances must be positive"));
    }
    let mut buf = vec![Complex64::zero(); dim];
    let mut heap = BinaryHeap::new();
    for w in breaks.windows(2) {
        heap.push(gk21(&mut f, dim, w[0], w[1], &mut buf));
    }
    loop {
        let mut total = vec![Complex64::zero(); dim];
        let mut err = 0.0;
        for p in heap.iter() {
            for (t, v) in total.iter_mut().zip(&p.value) {
                *t += v;
            }
            err += p.error;
        }
        if !err.is_finite() || total.iter().any(|v| !(v.re.is_finite() && v.im.is_finite())) {
            return Err(Error::Range("integrand produced a non-finite value".into()));
        }
        let scale = total.iter().map(|v| v.norm()).fold(0.0, f64::max);
        let target = abs_tol.max(rel_tol * scale);
        if err <= target {
            return Ok((total, err));
        }
        if heap.len() >= max_panels {
            return Err(Error::accuracy(
                format!("tolerance {target:.1e} not met within {max_panels} panels"),
                total.first().map_or(0.0, |v| v.norm()),
                err,
            ));
        }
        let worst = heap.pop().expect("heap is nonempty");
        let mid = 0.5 * (worst.lo + worst.hi);
        if !(worst.lo < mid && mid < worst.hi) {
            return Err(Error::accuracy(
                "panel width reached machine resolution",
                total.first().map_or(0.0, |v| v.norm()),
                err,
            ));
        }
        heap.push(gk21(&mut f, dim, worst.lo, mid, &mut buf));
        heap.push(gk21(&mut f, dim, mid, worst.hi, &mut buf));
    }
}

/// Adaptive integration of a complex scalar integrand over `(lo, hi)`.
pub fn integrate<F>(mut f: F, interval: (f64, f64), tol: f64) -> Result<Complex64>
where
    F: FnMut(f64) -> Complex64,
{
    let (v, _) = integrate_vec(
        |x, out: &mut [Complex64]| out[0] = f(x),
        1,
        &[interval.0, interval.1],
        tol,
        DEFAULT_PANEL_BUDGET,
    )?;
    Ok(v[0])
}

/// Gauss-Legendre rule with nodes and weights computed in precision `T`.
#[derive(Clone, Debug)]
pub struct GaussLegendre<T> {
    nodes: Vec<T>,
    weights: Vec<T>,
}

impl<T: Real> GaussLegendre<T> {
    /// `n`-point rule on `[-1, 1]`, nodes by Newton iteration on `P_n`.
    pub fn new(n: usize) -> Self {
        assert!(n >= 1, "Gauss-Legendre rule needs at least one node");
        let one = T::one();
        let two = T::from_f64(2.0);
        let mut nodes = vec![T::zero(); n];
        let mut weights = vec![T::zero(); n];
        for i in 0..n.div_ceil(2) {
            let guess = (std::f64::consts::PI * (i as f64 + 0.75) / (n as f64 + 0.5)).cos();
            let mut x = T::from_f64(guess);
            let mut dp = one;
            for iter in 0..100 {
                // P_n(x) and P_n'(x) by the three-term recurrence
                let mut p0 = one;
                let mut p1 = x;
                for k in 2..=n {
                    let kf = T::from_i64(k as i64);
                    let p2 = ((two * kf - one) * x * p1 - (kf - one) * p0) / kf;
                    p0 = p1;
                    p1 = p2;
                }
                let pn = if n == 1 { x } else { p1 };
                let pm = if n == 1 { one } else { p0 };
                dp = T::from_i64(n as i64) * (x * pn - pm) / (x * x - one);
                let dx = pn / dp;
                x -= dx;
                if dx.abs().to_f64() <= T::EPSILON * 4.0 && iter > 0 {
                    break;
                }
            }
            if n == 1 {
                dp = one;
            }
            let w = two / ((one - x * x) * dp * dp);
            nodes[i] = x;
            nodes[n - 1 - i] = -x;
            weights[i] = w;
            weights[n - 1 - i] = w;
        }
        if n % 2 == 1 {
            nodes[n / 2] = T::zero();
        }
        GaussLegendre { nodes, weights }
    }

    pub fn len(&self) -> usize {
        self.nodes.len()
    }

    pub fn is_empty(&self) -> bool {
        self.nodes.is_empty()
    }

    /// Nodes and weights mapped to `[lo, hi]`.
    pub fn mapped(&self, lo: T, hi: T) -> impl Iterator<Item = (T, T)> + '_ {
        let half = T::from_f64(0.5);
        let c = (lo + hi) * half;
        let h = (hi - lo) * half;
        self.nodes
            .iter()
            .zip(&self.weights)
            .map(move |(&x, &w)| (c + h * x, h * w))
    }

    /// Composite rule over `panels` equal subintervals of `[lo, hi]`.
    pub fn integrate<F>(&self, mut f: F, lo: T, hi: T, panels: usize) -> Complex<T>
    where
        F: FnMut(T) -> Complex<T>,
    {
        let width = (hi - lo) / T::from_i64(panels as i64);
        let mut acc = Complex::<T>::zero();
        for p in 0..panels {
            let a = lo + width * T::from_i64(p as i64);
            for (x, w) in self.mapped(a, a + width) {
                acc = acc + f(x) * w;
            }
        }
        acc
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::numerics::real::DoubleDouble;
    use std::f64::consts::PI;

    #[test]
    fn box_ground_state_is_normalized() {
        let v = integrate(|x| Complex64::from(2.0 * (PI * x).sin().powi(2)), (0.0, 1.0), 1e-13).unwrap();
        assert!((v.re - 1.0).abs() < 1e-13 && v.im.abs() < 1e-15);
    }

    #[test]
    fn box_states_are_orthogonal() {
        let v = integrate(
            |x| Complex64::from(2.0 * (PI * x).sin() * (2.0 * PI * x).sin()),
            (0.0, 1.0),
            1e-13,
        )
        .unwrap();
        assert!(v.norm() < 1e-13);
    }

    #[test]
    fn linear_times_sine() {
        let v = integrate(|x| Complex64::from(x * (3.0 * PI * x).sin()), (0.0, 1.0), 1e-14).unwrap();
        assert!((v.re - 1.0 / (3.0 * PI)).abs() < 1e-14);
    }

    #[test]
    fn budget_exhaustion_is_an_accuracy_error() {
        let r = integrate(|x| Complex64::from((1.0 / x).sin()), (1e-9, 1.0), 1e-15);
        assert!(matches!(r, Err(Error::Accuracy { .. })));
    }

    #[test]
    fn vector_integrand_integrates_each_component() {
        let (v, _) = integrate_vec(
            |x, out: &mut [Complex64]| {
                out[0] = Complex64::from(x);
                out[1] = Complex64::new(0.0, x * x);
            },
            2,
            &[0.0, 0.5, 2.0],
            1e-13,
            100,
        )
        .unwrap();
        assert!((v[0].re - 2.0).abs() < 1e-13);
        assert!((v[1].im - 8.0 / 3.0).abs() < 1e-13);
    }

    #[test]
    fn gauss_legendre_is_exact_for_polynomials() {
        let rule = GaussLegendre::<f64>::new(7);
        // degree 13 is the highest exact degree for 7 nodes
        let v = rule.integrate(|x| Complex::new(x.powi(12) + x.powi(13), 0.0), -1.0, 1.0, 1);
        assert!((v.re - 2.0 / 13.0).abs() < 1e-15);
        let weights: f64 = rule.mapped(0.0, 1.0).map(|(_, w)| w).sum();
        assert!((weights - 1.0).abs() < 1e-15);
    }

    #[test]
    fn gauss_legendre_in_double_double() {
        type Dd = DoubleDouble;
        let rule = GaussLegendre::<Dd>::new(24);
        let v = rule.integrate(
            |x| Complex::new(x.sin() * x.sin() * Dd::from(2.0), Dd::from(0.0)),
            Dd::from(0.0),
            Dd::PI,
            4,
        );
        // integral of 2 sin^2 over [0, pi] is pi
        let err = (v.re - Dd::PI).abs().to_f64();
        assert!(err < 1e-29, "{err:e}");
    }
}
