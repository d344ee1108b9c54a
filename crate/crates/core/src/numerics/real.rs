//! Scalar abstraction over `f64` and a software double-double type.
//!
//! The physics kernels that must survive deep cancellation (fermionic
//! determinants at long times) are written once against [`Real`] and run in
//! either precision.

use std::fmt;
use std::ops::{Add, AddAssign, Div, DivAssign, Mul, MulAssign, Neg, Rem, RemAssign, Sub, SubAssign};

use num_complex::Complex;
use num_traits::{Num, One, Zero};

/// Real scalar with the handful of transcendental functions the kernels need.
pub trait Real:
    Copy
    + fmt::Debug
    + fmt::Display
    + PartialOrd
    + Num
    + Neg<Output = Self>
    + AddAssign
    + SubAssign
    + MulAssign
    + DivAssign
    + Send
    + Sync
    + 'static
{
    /// Unit roundoff of the representation.
    const EPSILON: f64;

    fn from_f64(v: f64) -> Self;
    fn to_f64(self) -> f64;
    fn pi() -> Self;
    fn sqrt(self) -> Self;
    fn exp(self) -> Self;
    fn sin_cos(self) -> (Self, Self);
    fn abs(self) -> Self;
    fn is_finite(self) -> bool;

    fn sin(self) -> Self {
        self.sin_cos().0
    }

    fn cos(self) -> Self {
        self.sin_cos().1
    }

    fn from_i64(v: i64) -> Self {
        Self::from_f64(v as f64)
    }

    /// `(sinh, cosh)` without the cancellation of `(e^x - e^-x)/2` near zero.
    fn sinh_cosh(self) -> (Self, Self) {
        let half = Self::from_f64(0.5);
        if self.abs().to_f64() < 0.5 {
            let x2 = self * self;
            let mut term = self;
            let mut sinh = self;
            let mut k = 1i64;
            loop {
                term = term * x2 / Self::from_i64((2 * k) * (2 * k + 1));
                sinh += term;
                if term.abs().to_f64() <= Self::EPSILON * sinh.abs().to_f64() * 0.25 {
                    break;
                }
                k += 1;
            }
            let cosh = (Self::one() + sinh * sinh).sqrt();
            (sinh, cosh)
        } else {
            let e = self.exp();
            let inv = Self::one() / e;
            ((e - inv) * half, (e + inv) * half)
        }
    }

    fn powi(self, n: i32) -> Self {
        let mut base = if n < 0 { Self::one() / self } else { self };
        let mut e = n.unsigned_abs();
        let mut acc = Self::one();
        while e > 0 {
            if e & 1 == 1 {
                acc *= base;
            }
            base *= base;
            e >>= 1;
        }
        acc
    }

    fn max_of(self, other: Self) -> Self {
        if self >= other {
            self
        } else {
            other
        }
    }
}

impl Real for f64 {
    const EPSILON: f64 = f64::EPSILON / 2.0;

    fn from_f64(v: f64) -> Self {
        v
    }
    fn to_f64(self) -> f64 {
        self
    }
    fn pi() -> Self {
        std::f64::consts::PI
    }
    fn sqrt(self) -> Self {
        f64::sqrt(self)
    }
    fn exp(self) -> Self {
        f64::exp(self)
    }
    fn sin_cos(self) -> (Self, Self) {
        f64::sin_cos(self)
    }
    fn abs(self) -> Self {
        f64::abs(self)
    }
    fn is_finite(self) -> bool {
        f64::is_finite(self)
    }
    fn powi(self, n: i32) -> Self {
        f64::powi(self, n)
    }
}

/// Unevaluated sum `hi + lo` with `|lo| <= ulp(hi)/2`: about 32 significant digits.
#[derive(Clone, Copy, Default, PartialEq, PartialOrd)]
pub struct DoubleDouble {
    hi: f64,
    lo: f64,
}

#[inline]
fn two_sum(a: f64, b: f64) -> (f64, f64) {
    let s = a + b;
    let bb = s - a;
    (s, (a - (s - bb)) + (b - bb))
}

#[inline]
fn quick_two_sum(a: f64, b: f64) -> (f64, f64) {
    let s = a + b;
    (s, b - (s - a))
}

#[inline]
fn two_prod(a: f64, b: f64) -> (f64, f64) {
    let p = a * b;
    (p, a.mul_add(b, -p))
}

impl DoubleDouble {
    pub const PI: DoubleDouble = DoubleDouble {
        hi: std::f64::consts::PI,
        lo: 1.224_646_799_147_353_2e-16,
    };
    pub const FRAC_PI_2: DoubleDouble = DoubleDouble {
        hi: std::f64::consts::FRAC_PI_2,
        lo: 6.123_233_995_736_766e-17,
    };
    pub const LN_2: DoubleDouble = DoubleDouble {
        hi: std::f64::consts::LN_2,
        lo: 2.319_046_813_846_299_6e-17,
    };

    pub const fn from_parts(hi: f64, lo: f64) -> Self {
        DoubleDouble { hi, lo }
    }

    pub fn hi(self) -> f64 {
        self.hi
    }

    pub fn lo(self) -> f64 {
        self.lo
    }

    fn renorm(hi: f64, lo: f64) -> Self {
        let (h, l) = quick_two_sum(hi, lo);
        DoubleDouble { hi: h, lo: l }
    }

    fn mul_f64(self, b: f64) -> Self {
        let (p1, p2) = two_prod(self.hi, b);
        Self::renorm(p1, p2 + self.lo * b)
    }

    fn ldexp(self, e: i32) -> Self {
        let s = 2f64.powi(e);
        DoubleDouble {
            hi: self.hi * s,
            lo: self.lo * s,
        }
    }

    fn round_to_f64_integer(self) -> f64 {
        let r = self.hi.round();
        if r == self.hi {
            // hi is already integral; the fractional part sits in lo
            r + self.lo.round()
        } else if (r - self.hi).abs() == 0.5 {
            // tie on hi: lo decides

            if self.lo > 0.0 {
                self.hi.ceil()
            } else {
                self.hi.floor()
            }
        } else {
            r
        }
    }

    /// `sin` and `cos` on `|r| <= pi/4`.
    fn sin_cos_reduced(r: Self) -> (Self, Self) {
        let r2 = r * r;
        let mut term = r;
        let mut sin = r;
        let mut k = 1i64;
        while term.hi.abs() > 1e-34 * sin.hi.abs().max(1e-300) {
            term = -(term * r2) / DoubleDouble::from((2 * k) as f64 * (2 * k + 1) as f64);
            sin += term;
            k += 1;
            if k > 60 {
                break;
            }
        }
        let mut term = DoubleDouble::one();
        let mut cos = DoubleDouble::one();
        let mut k = 1i64;
        while term.hi.abs() > 1e-34 {
            term = -(term * r2) / DoubleDouble::from((2 * k - 1) as f64 * (2 * k) as f64);
            cos += term;
            k += 1;
            if k > 60 {
                break;
            }
        }
        (sin, cos)
    }
}

impl From<f64> for DoubleDouble {
    fn from(v: f64) -> Self {
        DoubleDouble { hi: v, lo: 0.0 }
    }
}

impl fmt::Debug for DoubleDouble {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "DoubleDouble({:e} + {:e})", self.hi, self.lo)
    }
}

impl fmt::Display for DoubleDouble {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        fmt::Display::fmt(&(self.hi + self.lo), f)
    }
}

impl Add for DoubleDouble {
    type Output = Self;
    fn add(self, b: Self) -> Self {
        let (s1, s2) = two_sum(self.hi, b.hi);
        let (t1, t2) = two_sum(self.lo, b.lo);
        let (s1, s2) = quick_two_sum(s1, s2 + t1);
        Self::renorm(s1, s2 + t2)
    }
}

impl Sub for DoubleDouble {
    type Output = Self;
    fn sub(self, b: Self) -> Self {
        self + (-b)
    }
}

impl Neg for DoubleDouble {
    type Output = Self;
    fn neg(self) -> Self {
        DoubleDouble {
            hi: -self.hi,
            lo: -self.lo,
        }
    }
}

impl Mul for DoubleDouble {
    type Output = Self;
    fn mul(self, b: Self) -> Self {
        let (p1, p2) = two_prod(self.hi, b.hi);
        Self::renorm(p1, p2 + (self.hi * b.lo + self.lo * b.hi))
    }
}

impl Div for DoubleDouble {
    type Output = Self;
    fn div(self, b: Self) -> Self {
        let q1 = self.hi / b.hi;
        let r = self - b.mul_f64(q1);
        let q2 = r.hi / b.hi;
        let r = r - b.mul_f64(q2);
        let q3 = r.hi / b.hi;
        let (h, l) = quick_two_sum(q1, q2);
        DoubleDouble { hi: h, lo: l } + DoubleDouble::from(q3)
    }
}

impl Rem for DoubleDouble {
    type Output = Self;
    fn rem(self, b: Self) -> Self {
        let q = (self / b).hi.trunc();
        self - b.mul_f64(q)
    }
}

macro_rules! assign_ops {
    ($($tr:ident $m:ident $op:tt),*) => {$(
        impl $tr for DoubleDouble {
            fn $m(&mut self, rhs: Self) {
                *self = *self $op rhs;
            }
        }
    )*};
}
assign_ops!(AddAssign add_assign +, SubAssign sub_assign -, MulAssign mul_assign *, DivAssign div_assign /, RemAssign rem_assign %);

impl Zero for DoubleDouble {
    fn zero() -> Self {
        DoubleDouble { hi: 0.0, lo: 0.0 }
    }
    fn is_zero(&self) -> bool {
        self.hi == 0.0
    }
}

impl One for DoubleDouble {
    fn one() -> Self {
        DoubleDouble { hi: 1.0, lo: 0.0 }
    }
}

impl Num for DoubleDouble {
    type FromStrRadixErr = std::num::ParseFloatError;
    fn from_str_radix(s: &str, _radix: u32) -> Result<Self, Self::FromStrRadixErr> {
        s.parse::<f64>().map(DoubleDouble::from)
    }
}

impl Real for DoubleDouble {
    const EPSILON: f64 = 4.93e-32;

    fn from_f64(v: f64) -> Self {
        DoubleDouble::from(v)
    }

    fn to_f64(self) -> f64 {
        self.hi + self.lo
    }

    fn pi() -> Self {
        DoubleDouble::PI
    }

    fn sqrt(self) -> Self {
        if self.hi <= 0.0 {
            return DoubleDouble::from(if self.hi == 0.0 { 0.0 } else { f64::NAN });
        }
        let x = 1.0 / self.hi.sqrt();
        let ax = self.hi * x;
        let (p1, p2) = two_prod(ax, ax);
        let diff = self - DoubleDouble { hi: p1, lo: p2 };
        let (h, l) = two_sum(ax, diff.hi * x * 0.5);
        DoubleDouble::renorm(h, l)
    }

    fn exp(self) -> Self {
        if self.hi > 709.0 {
            return DoubleDouble::from(f64::INFINITY);
        }
        if self.hi < -745.0 {
            return DoubleDouble::zero();
        }
        let k = (self.hi / std::f64::consts::LN_2).round();
        let r = (self - DoubleDouble::LN_2.mul_f64(k)).ldexp(-10);
        // Taylor on |r| <= ln2/2048
        let mut term = r;
        let mut sum = r;
        let mut n = 2.0;
        while term.hi.abs() > 1e-36 {
            term = term * r / DoubleDouble::from(n);
            sum += term;
            n += 1.0;
        }
        // (1 + sum)^(2^10) via expm1 doubling: e^{2r} - 1 = s (s + 2)
        for _ in 0..10 {
            sum = sum * (sum + DoubleDouble::from(2.0));
        }
        (sum + DoubleDouble::one()).ldexp(k as i32)
    }

    fn sin_cos(self) -> (Self, Self) {
        if !self.hi.is_finite() {
            return (DoubleDouble::from(f64::NAN), DoubleDouble::from(f64::NAN));
        }
        let j = (self / DoubleDouble::FRAC_PI_2).round_to_f64_integer();
        let r = self - DoubleDouble::FRAC_PI_2.mul_f64(j);
        let (s, c) = DoubleDouble::sin_cos_reduced(r);
        match (j.rem_euclid(4.0)) as i64 {
            0 => (s, c),
            1 => (c, -s),
            2 => (-s, -c),
            _ => (-c, s),
        }
    }

    fn abs(self) -> Self {
        if self.hi < 0.0 {
            -self
        } else {
            self
        }
    }

    fn is_finite(self) -> bool {
        self.hi.is_finite() && self.lo.is_finite()
    }
}

/// Complex helpers that only need [`Real`] from the component type.
pub fn cexp<T: Real>(z: Complex<T>) -> Complex<T> {
    let m = z.re.exp();
    let (s, c) = z.im.sin_cos();
    Complex::new(m * c, m * s)
}

pub fn csin<T: Real>(z: Complex<T>) -> Complex<T> {
    let (s, c) = z.re.sin_cos();
    let (sh, ch) = z.im.sinh_cosh();
    Complex::new(s * ch, c * sh)
}

pub fn ccos<T: Real>(z: Complex<T>) -> Complex<T> {
    let (s, c) = z.re.sin_cos();
    let (sh, ch) = z.im.sinh_cosh();
    Complex::new(c * ch, -(s * sh))
}

pub fn cabs<T: Real>(z: Complex<T>) -> T {
    (z.re * z.re + z.im * z.im).sqrt()
}

/// `e^{i phase}`.
pub fn cis<T: Real>(phase: T) -> Complex<T> {
    let (s, c) = phase.sin_cos();
    Complex::new(c, s)
}

pub fn real<T: Real>(v: f64) -> Complex<T> {
    Complex::new(T::from_f64(v), T::zero())
}

pub fn to_c64<T: Real>(z: Complex<T>) -> num_complex::Complex64 {
    num_complex::Complex64::new(z.re.to_f64(), z.im.to_f64())
}

pub fn from_c64<T: Real>(z: num_complex::Complex64) -> Complex<T> {
    Complex::new(T::from_f64(z.re), T::from_f64(z.im))
}
