//! Long-time expansion of the barrier-free propagation by the image kernel.
//!
//! With `u = tau^{-1/2}` the half-line kernel is
//! `g0(x - x') - g0(x + x') = (2 pi i)^{-1/2} u e^{i (x^2 + x'^2) u^2 / 2} (-2i) sin(x x' u^2)`,
//! entire in `u`. Expanding both factors and integrating against the initial
//! box state turns `phi_n(x, tau)` into a series in `u` whose coefficients are
//! odd polynomials in `x`.

use num_complex::Complex;
use num_traits::{One, Zero};

use crate::error::{Error, Result};
use crate::manybody::MatrixKind;
use crate::model::ModelParams;
use crate::numerics::real::{DoubleDouble, Real};
use crate::numerics::series::Coeff;
use crate::numerics::TruncatedSeries;

type Dd = DoubleDouble;

fn dd(v: f64) -> Dd {
    Dd::from(v)
}

fn re(v: Dd) -> Coeff {
    Complex::new(v, Dd::zero())
}

/// `int_0^1 t^q sin(m pi t) dt` for `q = 0..=q_max`, from the power series
/// of the sine: `sum_j (-1)^j (m pi)^{2j+1} / ((2j+1)! (q + 2j + 2))`.
pub(crate) fn sine_moments(m: usize, q_max: usize) -> Vec<Dd> {
    let w = Dd::PI * Dd::from_i64(m as i64);
    let w2 = w * w;
    // terms t_j = w^{2j+1} / (2j+1)! until they drop below the double-double floor
    let mut terms = Vec::new();
    let mut t = w;
    let mut peak = 0.0f64;
    let mut j = 0i64;
    loop {
        peak = peak.max(t.to_f64());
        terms.push(t);
        if t.to_f64() < 1e-36 * peak && j > 2 {
            break;
        }
        t = t * w2 / Dd::from_i64((2 * j + 2) * (2 * j + 3));
        j += 1;
    }
    (0..=q_max)
        .map(|q| {
            let mut s = Dd::zero();
            for (j, &t) in terms.iter().enumerate() {
                let v = t / Dd::from_i64((q + 2 * j + 2) as i64);
                if j % 2 == 0 {
                    s += v;
                } else {
                    s -= v;
                }
            }
            s
        })
        .collect()
}

/// `phi_n(x, tau) = sum_e u^e sum_m levels[e][m] x^m`, exact through `u^order`.
#[derive(Clone, Debug)]
pub(crate) struct ImageExpansion {
    pub levels: Vec<Vec<Coeff>>,
    /// `int_0^a x^q phi_n(x, 0) dx`.
    pub moments: Vec<Dd>,
}

impl ImageExpansion {
    pub fn new(n: usize, a: f64, order: usize) -> Self {
        let a = dd(a);
        let q_max = order + 2;
        let norm = (dd(2.0) / a).sqrt();
        let mut a_pow = a;
        let moments: Vec<Dd> = sine_moments(n, q_max)
            .into_iter()
            .map(|i| {
                let v = norm * a_pow * i;
                a_pow *= a;
                v
            })
            .collect();
        // -(1 + i) / sqrt(pi) = (2 pi i)^{-1/2} (-2i)
        let inv_sqrt_pi = Dd::one() / Dd::PI.sqrt();
        let pre = Complex::new(-inv_sqrt_pi, -inv_sqrt_pi);
        let half_i = Complex::new(Dd::zero(), dd(0.5));
        let mut levels = vec![Vec::<Coeff>::new(); order + 1];
        // e = 3 + 2p + 4s, x power 2l + 2s + 1, x' power 2(p - l) + 2s + 1
        let mut phase = Coeff::one(); // (i/2)^p / p!
        let mut p = 0usize;
        while 3 + 2 * p <= order {
            let mut sine = Dd::one(); // (-1)^s / (2s+1)!
            let mut s = 0usize;
            while 3 + 2 * p + 4 * s <= order {
                let e = 3 + 2 * p + 4 * s;
                let lvl = &mut levels[e];
                let mut binom = Dd::one();
                for l in 0..=p {
                    let m = 2 * l + 2 * s + 1;
                    let q = 2 * (p - l) + 2 * s + 1;
                    if lvl.len() <= m {
                        lvl.resize(m + 1, Coeff::zero());
                    }
                    lvl[m] += pre * phase * re(sine * binom * moments[q]);
                    binom = binom * Dd::from_i64((p - l) as i64) / Dd::from_i64(l as i64 + 1);
                }
                sine = -sine / Dd::from_i64(((2 * s + 2) * (2 * s + 3)) as i64);
                s += 1;
            }
            p += 1;
            phase = phase * half_i / re(Dd::from_i64(p as i64));
        }
        ImageExpansion { levels, moments }
    }

    /// The series in `u` at a fixed position.
    pub fn at(&self, x: f64, order: i32) -> TruncatedSeries {
        let x = dd(x);
        let coeffs = self
            .levels
            .iter()
            .map(|poly| {
                let mut acc = Coeff::zero();
                for c in poly.iter().rev() {
                    acc = acc * re(x) + c;
                }
                acc
            })
            .collect();
        TruncatedSeries::new(0, coeffs, order)
    }
}

/// Series in `u = tau^{-1/2}` of the barrier-free wavefunction `phi_n(x, tau)`,
/// exact through `u^order`.
pub fn wavefunction_series(n: usize, x: f64, p: &ModelParams, order: usize) -> Result<TruncatedSeries> {
    check_free(n, p)?;
    p.check_in_region(x)?;
    Ok(ImageExpansion::new(n, p.a, order).at(x, order as i32))
}

fn check_free(n: usize, p: &ModelParams) -> Result<()> {
    if n == 0 {
        return Err(Error::domain("mode numbers start at 1"));
    }
    if p.eta != 0.0 {
        return Err(Error::config(
            "the image expansion needs eta = 0; the barrier enters through (1 + eta d)^(-4N)",
        ));
    }
    Ok(())
}

/// Lowest power of `u` in an overlap entry.
pub fn leading_power(kind: MatrixKind) -> i32 {
    match kind {
        MatrixKind::Region => 6,
        MatrixKind::Survival => 3,
    }
}

/// Region entry `int_0^delta conj(phi_n) phi_k dx` from two expansions.
pub(crate) fn region_entry(en: &ImageExpansion, ek: &ImageExpansion, delta: f64, order: usize) -> TruncatedSeries {
    let delta = dd(delta);
    let m_max = en.levels.iter().chain(&ek.levels).map(Vec::len).max().unwrap_or(0);
    // h[j] = delta^{j+1} / (j+1)
    let mut h = Vec::with_capacity(2 * m_max);
    let mut pw = delta;
    for j in 0..2 * m_max {
        h.push(pw / Dd::from_i64(j as i64 + 1));
        pw *= delta;
    }
    let mut out = vec![Coeff::zero(); order + 1];
    for (e1, a) in en.levels.iter().enumerate() {
        if a.is_empty() || e1 + 3 > order {
            continue;
        }
        // v[m2] = sum_m1 conj(a[m1]) h[m1 + m2]
        let v: Vec<Coeff> = (0..m_max)
            .map(|m2| {
                a.iter()
                    .enumerate()
                    .fold(Coeff::zero(), |acc, (m1, c)| acc + c.conj() * re(h[m1 + m2]))
            })
            .collect();
        for (e2, b) in ek.levels.iter().enumerate() {
            if e1 + e2 > order {
                break;
            }
            for (m2, c) in b.iter().enumerate() {
                out[e1 + e2] += v[m2] * c;
            }
        }
    }
    TruncatedSeries::new(0, out, order as i32)
}

/// Survival entry `int_0^a phi_n(x, 0) phi_k(x, tau) dx`.
pub(crate) fn survival_entry(en: &ImageExpansion, ek: &ImageExpansion, order: usize) -> TruncatedSeries {
    let coeffs = ek
        .levels
        .iter()
        .take(order + 1)
        .map(|poly| {
            poly.iter()
                .enumerate()
                .fold(Coeff::zero(), |acc, (m, c)| acc + c * re(en.moments[m]))
        })
        .collect();
    TruncatedSeries::new(0, coeffs, order as i32)
}

/// Series in `u` of the `(n, k)` overlap entry at `eta = 0`, exact through
/// `u^order`.
pub fn element_series(n: usize, k: usize, kind: MatrixKind, p: &ModelParams, order: usize) -> Result<TruncatedSeries> {
    check_free(n, p)?;
    check_free(k, p)?;
    if (order as i32) < leading_power(kind) {
        return Err(Error::Capacity(format!(
            "order {order} stops before the leading power u^{} of the entry",
            leading_power(kind)
        )));
    }
    let en = ImageExpansion::new(n, p.a, order);
    let ek = ImageExpansion::new(k, p.a, order);
    Ok(match kind {
        MatrixKind::Region => region_entry(&en, &ek, p.delta_end(), order),
        MatrixKind::Survival => survival_entry(&en, &ek, order),
    })
}
