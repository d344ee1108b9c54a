//! Truncated power series in a single variable `u` with double-double complex
//! coefficients.
//!
//! A series carries its base exponent (the power of the first slot) and its
//! order (the highest power of `u` that is known). Every operation keeps only
//! the powers that are determined by its operands: adding truncates at the
//! smaller order, multiplying keeps the smaller relative precision, so a
//! result is never reported to a higher order than its inputs justify.

use std::fmt;
use std::ops::{Add, Mul, Neg, Sub};

use num_complex::{Complex, Complex64};
use num_traits::{One, Zero};

use super::real::{cabs, ccos, cexp, csin, to_c64, DoubleDouble, Real};
use crate::error::{Error, Result};

/// Coefficient type of [`TruncatedSeries`].
pub type Coeff = Complex<DoubleDouble>;

#[derive(Clone, PartialEq)]
pub struct TruncatedSeries {
    base_exponent: i32,
    coeffs: Vec<Coeff>,
    order: i32,
}

impl fmt::Debug for TruncatedSeries {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "TruncatedSeries[")?;
        let mut first = true;
        for (p, c) in self.terms() {
            if c.is_zero() {
                continue;
            }
            if !first {
                write!(f, " + ")?;
            }
            first = false;
            let c = to_c64(c);
            write!(f, "({:.6e}{:+.6e}i)u^{p}", c.re, c.im)?;
        }
        write!(f, " + O(u^{})]", self.order + 1)
    }
}

impl TruncatedSeries {
    /// Series `sum_i coeffs[i] u^(base + i)`, truncated at `u^order`.
    pub fn new(base_exponent: i32, mut coeffs: Vec<Coeff>, order: i32) -> Self {
        let len = (order - base_exponent + 1).max(0) as usize;
        coeffs.resize(len, Coeff::zero());
        TruncatedSeries {
            base_exponent,
            coeffs,
            order,
        }
    }

    pub fn from_c64(base_exponent: i32, coeffs: &[Complex64], order: i32) -> Self {
        let c = coeffs
            .iter()
            .map(|z| Complex::new(DoubleDouble::from(z.re), DoubleDouble::from(z.im)))
            .collect();
        Self::new(base_exponent, c, order)
    }

    /// The zero series known through `u^order`.
    pub fn zero(order: i32) -> Self {
        Self::new(order + 1, Vec::new(), order)
    }

    pub fn constant(c: Coeff, order: i32) -> Self {
        Self::new(0, vec![c], order)
    }

    /// `c u^power + O(u^(order+1))`.
    pub fn monomial(c: Coeff, power: i32, order: i32) -> Self {
        Self::new(power, vec![c], order)
    }

    /// The expansion variable `u` itself.
    pub fn variable(order: i32) -> Self {
        Self::monomial(Coeff::one(), 1, order)
    }

    pub fn base_exponent(&self) -> i32 {
        self.base_exponent
    }

    pub fn order(&self) -> i32 {
        self.order
    }

    pub fn coeffs(&self) -> &[Coeff] {
        &self.coeffs
    }

    /// Coefficient of `u^power`; zero below the base, `None` beyond the order.
    pub fn coefficient(&self, power: i32) -> Option<Coeff> {
        if power > self.order {
            None
        } else if power < self.base_exponent {
            Some(Coeff::zero())
        } else {
            Some(self.coeffs[(power - self.base_exponent) as usize])
        }
    }

    /// `(power, coefficient)` pairs of the stored slots.
    pub fn terms(&self) -> impl Iterator<Item = (i32, Coeff)> + '_ {
        self.coeffs
            .iter()
            .enumerate()
            .map(move |(i, &c)| (self.base_exponent + i as i32, c))
    }

    pub fn is_zero(&self) -> bool {
        self.coeffs.iter().all(|c| c.is_zero())
    }

    /// Power of the first exactly nonzero coefficient.
    pub fn valuation(&self) -> Option<i32> {
        self.terms().find(|(_, c)| !c.is_zero()).map(|(p, _)| p)
    }

    /// First exactly nonzero term.
    pub fn leading(&self) -> Option<(i32, Coeff)> {
        self.terms().find(|(_, c)| !c.is_zero())
    }

    /// Drop leading exact zeros so the base equals the valuation.
    pub fn normalized(&self) -> Self {
        match self.valuation() {
            None => Self::zero(self.order),
            Some(v) => {
                let skip = (v - self.base_exponent) as usize;
                Self::new(v, self.coeffs[skip..].to_vec(), self.order)
            }
        }
    }

    /// Truncate to a lower order.
    pub fn truncate(&self, order: i32) -> Self {
        Self::new(self.base_exponent, self.coeffs.clone(), order.min(self.order))
    }

    pub fn scale(&self, c: Coeff) -> Self {
        Self::new(
            self.base_exponent,
            self.coeffs.iter().map(|&x| x * c).collect(),
            self.order,
        )
    }

    /// Coefficient-wise complex conjugate (the conjugate for real `u`).
    pub fn conj(&self) -> Self {
        Self::new(
            self.base_exponent,
            self.coeffs.iter().map(|c| c.conj()).collect(),
            self.order,
        )
    }

    /// Coefficient-wise modulus, as a series with real coefficients.
    pub fn magnitudes(&self) -> Self {
        Self::new(
            self.base_exponent,
            self.coeffs
                .iter()
                .map(|&c| Complex::new(cabs(c), DoubleDouble::zero()))
                .collect(),
            self.order,
        )
    }

    /// Substitute `u -> u^2`.
    pub fn square_variable(&self) -> Self {
        let mut c = vec![Coeff::zero(); 2 * self.coeffs.len()];
        for (i, &v) in self.coeffs.iter().enumerate() {
            c[2 * i] = v;
        }
        Self::new(2 * self.base_exponent, c, 2 * self.order + 1)
    }

    fn add_impl(&self, other: &Self, sign: DoubleDouble) -> Self {
        let order = self.order.min(other.order);
        let base = self.base_exponent.min(other.base_exponent);
        let mut out = Self::new(base, Vec::new(), order);
        for (p, c) in self.terms().filter(|(p, _)| *p <= order) {
            out.coeffs[(p - base) as usize] += c;
        }
        for (p, c) in other.terms().filter(|(p, _)| *p <= order) {
            out.coeffs[(p - base) as usize] += c * sign;
        }
        out
    }

    fn mul_impl(&self, other: &Self) -> Self {
        let a = self.normalized();
        let b = other.normalized();
        let rel = (a.order - a.base_exponent).min(b.order - b.base_exponent);
        let base = a.base_exponent + b.base_exponent;
        let order = if a.is_zero() || b.is_zero() {
            // a zero factor known through its order absorbs the product
            (self.order + other.valuation_or_base()).min(other.order + self.valuation_or_base())
        } else {
            base + rel
        };
        let mut out = Self::new(base, Vec::new(), order);
        let len = out.coeffs.len();
        for (i, &x) in a.coeffs.iter().enumerate() {
            if x.is_zero() {
                continue;
            }
            for (j, &y) in b.coeffs.iter().enumerate() {
                if i + j >= len {
                    break;
                }
                out.coeffs[i + j] += x * y;
            }
        }
        out
    }

    fn valuation_or_base(&self) -> i32 {
        self.valuation().unwrap_or(self.base_exponent.min(self.order + 1))
    }

    /// `self / other`; the divisor must have a nonzero coefficient.
    pub fn div(&self, other: &Self) -> Result<Self> {
        let b = other.normalized();
        let Some((vb, lead)) = b.leading() else {
            return Err(Error::domain("series division by the zero series"));
        };
        let a = self.normalized();
        let rel = (a.order - a.base_exponent).min(b.order - vb);
        let base = a.base_exponent - vb;
        if a.is_zero() {
            return Ok(Self::zero(a.order - vb));
        }
        let len = (rel + 1).max(0) as usize;
        let inv_lead = Coeff::one() / lead;
        let mut q = vec![Coeff::zero(); len];
        for i in 0..len {
            let mut acc = a.coeffs.get(i).copied().unwrap_or_else(Coeff::zero);
            for j in 1..=i.min(b.coeffs.len() - 1) {
                acc -= b.coeffs[j] * q[i - j];
            }
            q[i] = acc * inv_lead;
        }
        Ok(Self::new(base, q, base + rel))
    }

    /// Split `c0 + h` with `h` of positive valuation; needs no negative powers.
    fn split_constant(&self) -> Result<(Coeff, Self)> {
        if self.valuation().is_some_and(|v| v < 0) {
            return Err(Error::domain(
                "transcendental function of a series with negative powers",
            ));
        }
        let c0 = self.coefficient(0).unwrap_or_else(Coeff::zero);
        let h = self.sub_impl_const(c0);
        Ok((c0, h))
    }

    fn sub_impl_const(&self, c0: Coeff) -> Self {
        let mut h = self.clone();
        if let Some(slot) = (0 - h.base_exponent)
            .try_into()
            .ok()
            .and_then(|i: usize| h.coeffs.get_mut(i))
        {
            *slot -= c0;
        }
        h.normalized()
    }

    /// `sum_k coef(k) h^k` for `h` of positive valuation.
    fn compose_power_series(h: &Self, order: i32, coef: impl Fn(usize) -> DoubleDouble) -> Self {
        let mut acc = Self::constant(Coeff::one() * coef(0), order);
        let Some(v) = h.valuation() else {
            return acc;
        };
        let mut power = Self::constant(Coeff::one(), order);
        let mut k = 1usize;
        while (k as i32) * v <= order {
            power = &power * h;
            acc = &acc + &power.scale(Complex::new(coef(k), DoubleDouble::zero()));
            k += 1;
        }
        acc
    }

    pub fn exp(&self) -> Result<Self> {
        let (c0, h) = self.split_constant()?;
        let mut fact = vec![DoubleDouble::one()];
        for k in 1..=(self.order.max(0) as usize + 1) {
            let prev = fact[k - 1];
            fact.push(prev / DoubleDouble::from(k as f64));
        }
        let eh = Self::compose_power_series(&h, self.order, |k| fact[k]);
        Ok(eh.scale(cexp(c0)))
    }

    fn sin_cos_parts(&self) -> Result<(Coeff, Coeff, Self, Self)> {
        let (c0, h) = self.split_constant()?;
        let n = self.order.max(0) as usize + 1;
        let mut inv_fact = vec![DoubleDouble::one()];
        for k in 1..=n {
            let prev = inv_fact[k - 1];
            inv_fact.push(prev / DoubleDouble::from(k as f64));
        }
        let sign = |k: usize| {
            if (k / 2).is_multiple_of(2) {
                DoubleDouble::one()
            } else {
                -DoubleDouble::one()
            }
        };
        let sin_h = Self::compose_power_series(&h, self.order, |k| {
            if k % 2 == 1 {
                sign(k) * inv_fact[k]
            } else {
                DoubleDouble::zero()
            }
        });
        let cos_h = Self::compose_power_series(&h, self.order, |k| {
            if k % 2 == 0 {
                sign(k) * inv_fact[k]
            } else {
                DoubleDouble::zero()
            }
        });
        Ok((csin(c0), ccos(c0), sin_h, cos_h))
    }

    pub fn sin(&self) -> Result<Self> {
        let (s0, c0, sh, ch) = self.sin_cos_parts()?;
        Ok(&ch.scale(s0) + &sh.scale(c0))
    }

    pub fn cos(&self) -> Result<Self> {
        let (s0, c0, sh, ch) = self.sin_cos_parts()?;
        Ok(&ch.scale(c0) - &sh.scale(s0))
    }

    /// Add a constant.
    pub fn add_constant(&self, c: Coeff) -> Self {
        self + &Self::constant(c, self.order)
    }
}

impl Add for &TruncatedSeries {
    type Output = TruncatedSeries;
    fn add(self, rhs: Self) -> TruncatedSeries {
        self.add_impl(rhs, DoubleDouble::one())
    }
}

impl Sub for &TruncatedSeries {
    type Output = TruncatedSeries;
    fn sub(self, rhs: Self) -> TruncatedSeries {
        self.add_impl(rhs, -DoubleDouble::one())
    }
}

impl Mul for &TruncatedSeries {
    type Output = TruncatedSeries;
    fn mul(self, rhs: Self) -> TruncatedSeries {
        self.mul_impl(rhs)
    }
}

impl Neg for &TruncatedSeries {
    type Output = TruncatedSeries;
    fn neg(self) -> TruncatedSeries {
        self.scale(-Coeff::one())
    }
}

impl Add for TruncatedSeries {
    type Output = TruncatedSeries;
    fn add(self, rhs: Self) -> TruncatedSeries {
        &self + &rhs
    }
}

impl Sub for TruncatedSeries {
    type Output = TruncatedSeries;
    fn sub(self, rhs: Self) -> TruncatedSeries {
        &self - &rhs
    }
}

impl Mul for TruncatedSeries {
    type Output = TruncatedSeries;
    fn mul(self, rhs: Self) -> TruncatedSeries {
        &self * &rhs
    }
}

impl Neg for TruncatedSeries {
    type Output = TruncatedSeries;
    fn neg(self) -> TruncatedSeries {
        -&self
    }
}

pub fn series_add(s1: &TruncatedSeries, s2: &TruncatedSeries) -> TruncatedSeries {
    s1 + s2
}

pub fn series_mul(s1: &TruncatedSeries, s2: &TruncatedSeries) -> TruncatedSeries {
    s1 * s2
}

/// A series together with the per-order sum of the moduli of every product
/// that contributed to it. The ratio of the two exposes cancellation.
#[derive(Clone, Debug)]
pub struct SeriesExpansion {
    pub value: TruncatedSeries,
    pub magnitude: TruncatedSeries,
}

impl SeriesExpansion {
    /// First order whose coefficient exceeds `rel_floor` times the summed
    /// contribution magnitudes at that order.
    pub fn leading_surviving(&self, rel_floor: f64) -> Option<(i32, Coeff)> {
        self.value.terms().find(|&(p, c)| {
            let mag = self.magnitude.coefficient(p).map_or(0.0, |m| m.re.to_f64());
            let v = cabs(c).to_f64();
            v > 0.0 && v > rel_floor * mag
        })
    }

    /// `|value|` relative to the contribution magnitude at `power`.
    pub fn survival_ratio(&self, power: i32) -> f64 {
        let v = self.value.coefficient(power).map_or(0.0, |c| cabs(c).to_f64());
        let m = self.magnitude.coefficient(power).map_or(0.0, |c| c.re.to_f64());
        if m == 0.0 {
            0.0
        } else {
            v / m
        }
    }
}

/// All permutations of `0..n` with their signs (Heap's algorithm).
fn permutations(n: usize) -> Vec<(Vec<usize>, bool)> {
    let mut out = Vec::new();
    let mut a: Vec<usize> = (0..n).collect();
    let mut c = vec![0usize; n];
    let mut even = true;
    out.push((a.clone(), even));
    let mut i = 0;
    while i < n {
        if c[i] < i {
            if i % 2 == 0 {
                a.swap(0, i);
            } else {
                a.swap(c[i], i);
            }
            even = !even;
            out.push((a.clone(), even));
            c[i] += 1;
            i = 0;
        } else {
            c[i] = 0;
            i += 1;
        }
    }
    out
}

fn check_square(m: &[Vec<TruncatedSeries>]) -> Result<usize> {
    let n = m.len();
    if n == 0 || m.iter().any(|r| r.len() != n) {
        return Err(Error::domain("series matrix must be square and nonempty"));
    }
    Ok(n)
}

fn leibniz(m: &[Vec<TruncatedSeries>], signed: bool) -> Result<SeriesExpansion> {
    let n = check_square(m)?;
    let mags: Vec<Vec<TruncatedSeries>> = m.iter().map(|r| r.iter().map(|s| s.magnitudes()).collect()).collect();
    let mut value: Option<TruncatedSeries> = None;
    let mut magnitude: Option<TruncatedSeries> = None;
    for (perm, even) in permutations(n) {
        let mut term = m[0][perm[0]].clone();
        let mut mag = mags[0][perm[0]].clone();
        for r in 1..n {
            term = &term * &m[r][perm[r]];
            mag = &mag * &mags[r][perm[r]];
        }
        if signed && !even {
            term = -term;
        }
        value = Some(match value {
            None => term,
            Some(v) => &v + &term,
        });
        magnitude = Some(match magnitude {
            None => mag,
            Some(v) => &v + &mag,
        });
    }
    let value = value.expect("at least one permutation");
    let magnitude = magnitude.expect("at least one permutation");
    Ok(SeriesExpansion { value, magnitude })
}

/// Determinant over the series ring, with contribution magnitudes.
pub fn series_det_expansion(m: &[Vec<TruncatedSeries>]) -> Result<SeriesExpansion> {
    leibniz(m, true)
}

/// Permanent over the series ring, with contribution magnitudes.
pub fn series_per_expansion(m: &[Vec<TruncatedSeries>]) -> Result<SeriesExpansion> {
    leibniz(m, false)
}

pub fn series_det(m: &[Vec<TruncatedSeries>]) -> Result<TruncatedSeries> {
    Ok(series_det_expansion(m)?.value)
}

pub fn series_per(m: &[Vec<TruncatedSeries>]) -> Result<TruncatedSeries> {
    Ok(series_per_expansion(m)?.value)
}

/// Taylor coefficients of `f` at 0 through `k^order`.
///
/// `f` is evaluated once on the jet `k + O(k^(order+pad+1))` in truncated
/// Taylor arithmetic, so divisions by functions vanishing at 0 are allowed as
/// long as the singularity is removable. The padding grows until the result
/// is known through the requested order.
pub fn taylor_coeffs<F>(f: F, order: usize) -> Result<Vec<Complex64>>
where
    F: Fn(&TruncatedSeries) -> Result<TruncatedSeries>,
{
    let order = order as i32;
    for pad in [0, 2, 4, 8, 16] {
        let k = TruncatedSeries::variable(order + pad);
        let s = f(&k)?;
        if s.order() >= order {
            if s.valuation().is_some_and(|v| v < 0) {
                return Err(Error::domain("function has a pole at 0"));
            }
            return Ok((0..=order)
                .map(|p| to_c64(s.coefficient(p).expect("within order")))
                .collect());
        }
    }
    Err(Error::accuracy(
        "jet lost too many orders to cancellation at k = 0",
        f64::NAN,
        f64::NAN,
    ))
}

#[cfg(test)]
mod tests {
    use super::*;

    fn c(re: f64, im: f64) -> Coeff {
        Complex::new(DoubleDouble::from(re), DoubleDouble::from(im))
    }

    #[test]
    fn monomials_multiply() {
        let a = TruncatedSeries::monomial(c(1.0, 0.0), 3, 20);
        let p = &a * &a;
        assert_eq!(p.leading(), Some((6, c(1.0, 0.0))));
        assert_eq!(p.valuation(), Some(6));
        assert!(p.terms().filter(|(_, x)| !x.is_zero()).count() == 1);
    }

    #[test]
    fn self_difference_is_zero() {
        let a = TruncatedSeries::monomial(c(1.0, 0.0), 3, 20);
        assert!((&a - &a).is_zero());
    }

    #[test]
    fn difference_of_squares() {
        let (c1, c2) = (c(0.7, -0.2), c(1.3, 0.4));
        let plus = TruncatedSeries::new(3, vec![c1, Coeff::zero(), c2], 14);
        let minus = TruncatedSeries::new(3, vec![c1, Coeff::zero(), -c2], 14);
        let p = &plus * &minus;
        let diff = (p.coefficient(6).unwrap() - c1 * c1).norm_sqr().to_f64();
        assert!(diff < 1e-60);
        let diff = (p.coefficient(10).unwrap() + c2 * c2).norm_sqr().to_f64();
        assert!(diff < 1e-60);
        for q in [7, 8, 9, 11, 12, 13, 14] {
            assert!(p.coefficient(q).unwrap().is_zero());
        }
    }

    #[test]
    fn zero_absorbs() {
        let z = TruncatedSeries::zero(10);
        let a = TruncatedSeries::new(2, vec![c(1.0, 1.0), c(2.0, 0.0)], 10);
        assert!((&z * &a).is_zero());
    }

    #[test]
    fn determinant_of_rank_one_cancels() {
        let s = TruncatedSeries::monomial(c(0.3, 0.1), 3, 12);
        let m = vec![vec![s.clone(), s.clone()], vec![s.clone(), s]];
        let e = series_det_expansion(&m).unwrap();
        assert!(e.value.is_zero());
        assert!(e.magnitude.coefficient(6).unwrap().re.to_f64() > 0.0);
    }

    #[test]
    fn one_by_one_determinant_is_the_entry() {
        let s = TruncatedSeries::new(3, vec![c(1.0, 2.0), c(3.0, 0.0)], 8);
        assert_eq!(series_det(&[vec![s.clone()]]).unwrap(), s);
    }

    #[test]
    fn permanent_two_by_two() {
        let a = TruncatedSeries::constant(c(1.0, 0.0), 4);
        let b = TruncatedSeries::constant(c(2.0, 0.0), 4);
        let cc = TruncatedSeries::constant(c(3.0, 0.0), 4);
        let d = TruncatedSeries::constant(c(4.0, 0.0), 4);
        let m = vec![vec![a, b], vec![cc, d]];
        assert_eq!(series_per(&m).unwrap().coefficient(0), Some(c(10.0, 0.0)));
        assert_eq!(series_det(&m).unwrap().coefficient(0), Some(c(-2.0, 0.0)));
    }

    #[test]
    fn permutation_signs() {
        let perms = permutations(4);
        assert_eq!(perms.len(), 24);
        let odd = perms.iter().filter(|(_, e)| !e).count();
        assert_eq!(odd, 12);
        for (p, even) in perms {
            let mut inv = 0;
            for i in 0..4 {
                for j in i + 1..4 {
                    if p[i] > p[j] {
                        inv += 1;
                    }
                }
            }
            assert_eq!(inv % 2 == 0, even);
        }
    }

    #[test]
    fn division_with_valuation_shift() {
        // sin(k)/k
        let got = taylor_coeffs(|k| k.sin()?.div(k), 8).unwrap();
        let want = [
            1.0,
            0.0,
            -1.0 / 6.0,
            0.0,
            1.0 / 120.0,
            0.0,
            -1.0 / 5040.0,
            0.0,
            1.0 / 362880.0,
        ];
        for (g, w) in got.iter().zip(want) {
            assert!((g - w).norm() < 1e-16, "{g} vs {w}");
        }
    }

    #[test]
    fn exponential_of_imaginary_jet() {
        let got = taylor_coeffs(|k| k.scale(c(0.0, 1.0)).exp(), 4).unwrap();
        let want = [
            Complex64::new(1.0, 0.0),
            Complex64::new(0.0, 1.0),
            Complex64::new(-0.5, 0.0),
            Complex64::new(0.0, -1.0 / 6.0),
            Complex64::new(1.0 / 24.0, 0.0),
        ];
        for (g, w) in got.iter().zip(want) {
            assert!((g - w).norm() < 1e-16);
        }
    }

    #[test]
    fn high_order_coefficients_keep_relative_accuracy() {
        let got = taylor_coeffs(|k| k.sin()?.div(k), 24).unwrap();
        let mut f = 1.0f64;
        for j in 1..=25 {
            f *= j as f64;
        }
        let want = 1.0 / f;
        assert!(((got[24].re - want) / want).abs() < 1e-12);
    }

    #[test]
    fn cos_squared_plus_sin_squared() {
        let x = TruncatedSeries::new(0, vec![c(0.4, 0.1), c(1.0, 0.0), c(0.0, 0.5)], 12);
        let s = x.sin().unwrap();
        let co = x.cos().unwrap();
        let one = &(&s * &s) + &(&co * &co);
        assert!((one.coefficient(0).unwrap() - c(1.0, 0.0)).norm_sqr().to_f64() < 1e-60);
        for p in 1..=12 {
            assert!(one.coefficient(p).unwrap().norm_sqr().to_f64() < 1e-58, "{p}");
        }
    }
}
