//! Determinants and permanents of small complex matrices in any [`Real`]
//! precision. Matrices are row-major slices of length `n * n`.

use num_complex::Complex;
use num_traits::{One, Zero};

use crate::error::{Error, Result};
use crate::numerics::real::{cabs, Real};

/// Largest matrix the `2^n` permanent will accept.
pub const PERMANENT_MAX_N: usize = 20;

fn side<T>(m: &[T]) -> Result<usize> {
    let n = (m.len() as f64).sqrt().round() as usize;
    if n == 0 || n * n != m.len() {
        return Err(Error::domain(format!("matrix of {} entries is not square", m.len())));
    }
    Ok(n)
}

/// Determinant by Gaussian elimination with partial pivoting.
pub fn determinant<T: Real>(m: &[Complex<T>]) -> Result<Complex<T>> {
    let n = side(m)?;
    let mut a = m.to_vec();
    let mut det = Complex::<T>::one();
    for col in 0..n {
        let pivot = (col..n)
            .max_by(|&i, &j| {
                let (x, y) = (a[i * n + col].norm_sqr(), a[j * n + col].norm_sqr());
                x.partial_cmp(&y).unwrap_or(std::cmp::Ordering::Equal)
            })
            .expect("nonempty range");
        let pv = a[pivot * n + col];
        if pv.is_zero() {
            return Ok(Complex::zero());
        }
        if pivot != col {
            for j in 0..n {
                a.swap(pivot * n + j, col * n + j);
            }
            det = -det;
        }
        det = det * pv;
        for row in col + 1..n {
            let f = a[row * n + col] / pv;
            if f.is_zero() {
                continue;
            }
            for j in col..n {
                let t = a[col * n + j];
                a[row * n + j] = a[row * n + j] - f * t;
            }
        }
    }
    Ok(det)
}

/// Permanent by Ryser's inclusion-exclusion formula, visiting the column
/// subsets in Gray-code order so each step updates the row sums by one column.
pub fn permanent<T: Real>(m: &[Complex<T>]) -> Result<Complex<T>> {
    let n = side(m)?;
    if n > PERMANENT_MAX_N {
        return Err(Error::Capacity(format!(
            "permanent of a {n}x{n} matrix exceeds the {PERMANENT_MAX_N}x{PERMANENT_MAX_N} guard"
        )));
    }
    let mut sums = vec![Complex::<T>::zero(); n];
    let mut total = Complex::<T>::zero();
    let mut gray = 0u32;
    for step in 1u32..(1 << n) {
        let col = step.trailing_zeros() as usize;
        let bit = 1u32 << col;
        let adding = gray & bit == 0;
        gray ^= bit;
        for (i, s) in sums.iter_mut().enumerate() {
            if adding {
                *s = *s + m[i * n + col];
            } else {
                *s = *s - m[i * n + col];
            }
        }
        let prod = sums.iter().fold(Complex::<T>::one(), |acc, &s| acc * s);
        if gray.count_ones() % 2 == n as u32 % 2 {
            total = total + prod;
        } else {
            total = total - prod;
        }
    }
    Ok(total)
}

/// Sum over all permutations of `|prod_i m[i, s(i)]|`, the scale against
/// which a determinant's cancellation is measured. Exact (a permanent of the
/// moduli) up to the permanent guard, Hadamard's bound beyond it.
pub fn leibniz_magnitude<T: Real>(m: &[Complex<T>]) -> Result<f64> {
    let n = side(m)?;
    if n <= PERMANENT_MAX_N {
        let abs: Vec<Complex<f64>> = m.iter().map(|&z| Complex::new(cabs(z).to_f64(), 0.0)).collect();
        return Ok(permanent(&abs)?.re.abs());
    }
    let mut bound = 1.0;
    for i in 0..n {
        let row: f64 = (0..n).map(|j| cabs(m[i * n + j]).to_f64().powi(2)).sum();
        bound *= row.sqrt();
    }
    Ok(bound)
}

/// `|det m|` over [`leibniz_magnitude`]; 1 for diagonal matrices, tiny when the
/// determinant is a near-total cancellation.
pub fn cancellation_ratio<T: Real>(value: Complex<T>, m: &[Complex<T>]) -> Result<f64> {
    let scale = leibniz_magnitude(m)?;
    if scale == 0.0 {
        return Ok(1.0);
    }
    Ok(cabs(value).to_f64() / scale)
}
