//! Reference values computed with exact big-integer fixed-point arithmetic.
//!
//! Nothing here shares code with `tunnel-core`. The Faddeeva reference sums the
//! defining Maclaurin series `w(z) = sum_n (iz)^n / Gamma(n/2 + 1)` with enough
//! fractional bits that the alternating cancellation of the series (up to
//! `exp(|z|^2)`) leaves the result correct to well beyond double precision.

use num_bigint::{BigInt, Sign};
use num_traits::{One, Signed, ToPrimitive, Zero};

/// Fractional bits of the fixed-point representation.
const FRAC_BITS: u64 = 640;

#[derive(Clone, Debug)]
struct Fixed {
    re: BigInt,
    im: BigInt,
}

impl Fixed {
    fn zero() -> Self {
        Fixed {
            re: BigInt::zero(),
            im: BigInt::zero(),
        }
    }

    fn one() -> Self {
        Fixed {
            re: BigInt::one() << FRAC_BITS,
            im: BigInt::zero(),
        }
    }

    fn add_assign(&mut self, other: &Fixed) {
        self.re += &other.re;
        self.im += &other.im;
    }

    fn is_negligible(&self) -> bool {
        self.re.bits() <= 1 && self.im.bits() <= 1
    }
}

/// `value = mantissa * 2^-shift`, exactly.
fn dyadic(value: f64) -> (BigInt, i64) {
    assert!(value.is_finite(), "reference values need finite input");
    if value == 0.0 {
        return (BigInt::zero(), 0);
    }
    let bits = value.to_bits();
    let sign = if bits >> 63 == 1 { Sign::Minus } else { Sign::Plus };
    let exp = ((bits >> 52) & 0x7ff) as i64;
    let frac = bits & ((1u64 << 52) - 1);
    let (mant, e) = if exp == 0 {
        (frac, -1074)
    } else {
        (frac | (1u64 << 52), exp - 1075)
    };
    (BigInt::from_biguint(sign, mant.into()), -e)
}

fn to_f64(n: &BigInt, frac_bits: u64) -> f64 {
    if n.is_zero() {
        return 0.0;
    }
    let bits = n.bits();
    let drop = bits.saturating_sub(64);
    let head = (n >> drop).to_f64().expect("64-bit head converts");
    let mut exp = drop as i64 - frac_bits as i64;
    let mut v = head;
    while exp > 0 {
        let step = exp.min(1000);
        v *= 2f64.powi(step as i32);
        exp -= step;
    }
    while exp < 0 {
        let step = (-exp).min(1000);
        v *= 2f64.powi(-(step as i32));
        exp += step;
    }
    v
}

/// `atan(1/x)` scaled by `2^FRAC_BITS`.
fn atan_inv(x: u64) -> BigInt {
    let x = BigInt::from(x);
    let x2 = &x * &x;
    let mut power = (BigInt::one() << FRAC_BITS) / &x;
    let mut sum = BigInt::zero();
    let mut k: u64 = 0;
    while !power.is_zero() {
        let term = &power / BigInt::from(2 * k + 1);
        if k.is_multiple_of(2) {
            sum += term;
        } else {
            sum -= term;
        }
        power /= &x2;
        k += 1;
    }
    sum
}

/// pi scaled by `2^FRAC_BITS` (Machin's formula).
fn pi_fixed() -> BigInt {
    atan_inv(5) * 16 - atan_inv(239) * 4
}

/// Reference Faddeeva function `w(z) = exp(-z^2) erfc(-iz)` as `(re, im)`.
///
/// Intended for `|z| <~ 20`; the cost grows like `|z|^2` terms.
pub fn faddeeva(re: f64, im: f64) -> (f64, f64) {
    let (wr, wi) = faddeeva_fixed(re, im);
    (signed_to_f64(&wr), signed_to_f64(&wi))
}

/// Reference Faddeeva value split into double-double parts `((re_hi, re_lo), (im_hi, im_lo))`.
pub fn faddeeva_parts(re: f64, im: f64) -> ((f64, f64), (f64, f64)) {
    let (wr, wi) = faddeeva_fixed(re, im);
    (split_parts(&wr), split_parts(&wi))
}

fn split_parts(fixed: &BigInt) -> (f64, f64) {
    let hi = signed_to_f64(fixed);
    let (m, s) = dyadic(hi);
    let hi_fixed = if FRAC_BITS as i64 >= s {
        m << (FRAC_BITS as i64 - s) as u64
    } else {
        m >> (s - FRAC_BITS as i64) as u64
    };
    (hi, signed_to_f64(&(fixed - hi_fixed)))
}

fn faddeeva_fixed(re: f64, im: f64) -> (BigInt, BigInt) {
    let (a, sa) = dyadic(re);
    let (b, sb) = dyadic(im);
    // common denominator 2^shift
    let shift = sa.max(sb).max(0);
    let a = a << ((shift - sa) as u64);
    let b = b << ((shift - sb) as u64);
    // -z^2 = (u + i v) / 2^(2 shift)
    let u = -(&a * &a - &b * &b);
    let v = -(BigInt::from(2) * &a * &b);
    let zsq_shift = (2 * shift) as u64;
    let mag2 = re * re + im * im;

    let mul_mz2 = |t: &Fixed| -> Fixed {
        let re = &t.re * &u - &t.im * &v;
        let im = &t.re * &v + &t.im * &u;
        Fixed {
            re: re >> zsq_shift,
            im: im >> zsq_shift,
        }
    };

    // even chain: sum (-z^2)^m / m!
    let mut even = Fixed::zero();
    let mut term = Fixed::one();
    let mut m: u64 = 0;
    loop {
        even.add_assign(&term);
        m += 1;
        term = mul_mz2(&term);
        term.re /= BigInt::from(m);
        term.im /= BigInt::from(m);
        if term.is_negligible() && (m as f64) > mag2 + 2.0 {
            break;
        }
    }

    // odd chain: sum (-z^2)^m / prod_{j=1..m} (j + 1/2)
    let mut odd = Fixed::zero();
    let mut term = Fixed::one();
    let mut m: u64 = 0;
    loop {
        odd.add_assign(&term);
        m += 1;
        term = mul_mz2(&term);
        term.re = (term.re * 2) / BigInt::from(2 * m + 1);
        term.im = (term.im * 2) / BigInt::from(2 * m + 1);
        if term.is_negligible() && (m as f64) > mag2 + 2.0 {
            break;
        }
    }

    // odd part times i z (z = (a + i b)/2^shift): i z = (-b + i a)/2^shift
    let ozr = (&odd.re * -&b - &odd.im * &a) >> (shift as u64);
    let ozi = (&odd.re * &a + &odd.im * -&b) >> (shift as u64);
    // times 2/sqrt(pi)
    let one = BigInt::one() << FRAC_BITS;
    let sqrt_pi = (pi_fixed() << FRAC_BITS).sqrt();
    let two_over_sqrt_pi = (one << (FRAC_BITS + 1)) / sqrt_pi;
    let ozr = (ozr * &two_over_sqrt_pi) >> FRAC_BITS;
    let ozi = (ozi * &two_over_sqrt_pi) >> FRAC_BITS;

    (even.re + ozr, even.im + ozi)
}

fn signed_to_f64(n: &BigInt) -> f64 {
    let mag = to_f64(&n.abs(), FRAC_BITS);
    if n.is_negative() {
        -mag
    } else {
        mag
    }
}

/// pi to double precision, computed independently (sanity anchor for the fixed-point code).
pub fn pi() -> f64 {
    to_f64(&pi_fixed(), FRAC_BITS)
}

/// pi as an unevaluated double-double sum `(hi, lo)`.
pub fn pi_parts() -> (f64, f64) {
    split_parts(&pi_fixed())
}
