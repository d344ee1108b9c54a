//! Resonance poles: zeros of `F(k) = k cos(kd) + (eta - ik) sin(kd)` in the
//! fourth quadrant.

use num_complex::Complex64;
use std::f64::consts::PI;

use super::ModelParams;
use crate::error::{Error, Result};

const I: Complex64 = Complex64::new(0.0, 1.0);

/// One resonance.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Pole {
    pub j: usize,
    pub k: Complex64,
    /// `Re(k^2 / 2)`.
    pub epsilon: f64,
    /// `-2 Im(k^2 / 2)`, the decay rate of `|u_j|^2`.
    pub gamma: f64,
    /// `|F(k)|` relative to the size of its two terms.
    pub residual: f64,
}

impl Pole {
    fn new(j: usize, k: Complex64, p: &ModelParams) -> Self {
        let e = k * k * 0.5;
        Pole {
            j,
            k,
            epsilon: e.re,
            gamma: -2.0 * e.im,
            residual: relative_residual(k, p),
        }
    }

    /// `Re k > |Im k| > 0`: the pole lies between the real axis and the
    /// steepest-descent line.
    pub fn is_proper(&self) -> bool {
        self.k.re > self.k.im.abs() && self.k.im < 0.0
    }

    pub fn lifetime(&self) -> f64 {
        1.0 / self.gamma
    }
}

/// `F(k) = k cos(kd) + (eta - ik) sin(kd)`; its zeros are the S-matrix poles.
pub fn pole_equation(k: Complex64, p: &ModelParams) -> Complex64 {
    let kd = k * p.d;
    k * kd.cos() + (p.eta - I * k) * kd.sin()
}

/// `dF/dk`.
pub fn pole_equation_derivative(k: Complex64, p: &ModelParams) -> Complex64 {
    let d = p.d;
    let kd = k * d;
    let (s, c) = (kd.sin(), kd.cos());
    c - k * d * s - I * s + (p.eta - I * k) * d * c
}

fn relative_residual(k: Complex64, p: &ModelParams) -> f64 {
    let kd = k * p.d;
    let t1 = k * kd.cos();
    let t2 = (p.eta - I * k) * kd.sin();
    (t1 + t2).norm() / (t1.norm() + t2.norm()).max(f64::MIN_POSITIVE)
}

/// Seed for pole `j`: a few sweeps of `k = j pi / d - (i / 2d) Log(1 - 2ik/eta)`,
/// which is `F(k) = 0` rewritten and contracts unless `eta d` is small.
fn seed(j: usize, p: &ModelParams) -> Complex64 {
    let d = p.d;
    let base = j as f64 * PI / d;
    let mut k = Complex64::new(base * (1.0 - 1.0 / (1.0 + p.eta * d)), -1e-3);
    for _ in 0..30 {
        let next = base - I / (2.0 * d) * (1.0 - 2.0 * I * k / p.eta).ln();
        if !(next.re.is_finite() && next.im.is_finite()) {
            break;
        }
        let done = (next - k).norm() < 1e-14 * next.norm();
        k = next;
        if done {
            break;
        }
    }
    k
}

fn newton(j: usize, mut k: Complex64, p: &ModelParams) -> Result<Complex64> {
    for _ in 0..100 {
        let f = pole_equation(k, p);
        let df = pole_equation_derivative(k, p);
        if df.norm() == 0.0 {
            break;
        }
        let step = f / df;
        k -= step;
        if step.norm() <= 1e-15 * k.norm() {
            break;
        }
    }
    let r = relative_residual(k, p);
    if r < 1e-12 && k.re.is_finite() {
        Ok(k)
    } else {
        Err(Error::Convergence {
            index: j,
            message: format!("Newton stalled at k = {k} with residual {r:.2e}"),
        })
    }
}

/// Winding number of `F` around the rectangle `[re.0, re.1] x [im.0, im.1]`,
/// i.e. the number of zeros inside.
pub fn winding_count(p: &ModelParams, re: (f64, f64), im: (f64, f64)) -> usize {
    let corners = [
        Complex64::new(re.0, im.0),
        Complex64::new(re.1, im.0),
        Complex64::new(re.1, im.1),
        Complex64::new(re.0, im.1),
    ];
    let mut total = 0.0;
    for e in 0..4 {
        let (z0, z1) = (corners[e], corners[(e + 1) % 4]);
        total += phase_change(p, z0, z1, 0);
    }
    (total / (2.0 * PI)).round().max(0.0) as usize
}

/// Continuous change of `arg F` along a segment, refining until every step
/// turns the phase by less than a quarter turn.
fn phase_change(p: &ModelParams, z0: Complex64, z1: Complex64, depth: usize) -> f64 {
    // F oscillates on the scale 1/d; start with several samples per unit of k d
    let steps = ((z1 - z0).norm() * p.d * 16.0).ceil().max(16.0) as usize;
    let mut total = 0.0;
    let mut prev = pole_equation(z0, p);
    for s in 1..=steps {
        let z = z0 + (z1 - z0) * (s as f64 / steps as f64);
        let cur = pole_equation(z, p);
        let dphi = (cur / prev).arg();
        if dphi.abs() > PI / 4.0 && depth < 12 {
            let za = z0 + (z1 - z0) * ((s - 1) as f64 / steps as f64);
            total += phase_change(p, za, z, depth + 1);
        } else {
            total += dphi;
        }
        prev = cur;
    }
    total
}

/// The first `count` proper poles, sorted by `Re k`.
///
/// Every pole is Newton-refined from its seed; a seed that lands on an
/// already-known pole is perturbed and retried. The poles found are checked
/// against an argument-principle count over a rectangle that covers them.
pub fn find_poles(p: &ModelParams, count: usize) -> Result<Vec<Pole>> {
    p.validate()?;
    if count < 1 {
        return Err(Error::domain("pole count must be at least 1"));
    }
    if !(p.eta > 0.0) {
        return Err(Error::config("poles need a barrier (eta > 0)"));
    }
    let d = p.d;
    let mut all: Vec<Pole> = Vec::new();
    let mut proper = 0;
    let mut j = 0;
    while proper < count {
        j += 1;
        if j > 20 * count + 100 {
            return Err(Error::Convergence {
                index: j,
                message: "too few proper poles below this index".into(),
            });
        }
        let mut k0 = seed(j, p);
        let mut found = None;
        for attempt in 0..8 {
            match newton(j, k0, p) {
                Ok(k) => {
                    let band = ((j as f64 - 0.5) * PI / d, j as f64 * PI / d);
                    let duplicate = all.iter().any(|q| (q.k - k).norm() < 1e-9 * k.norm());
                    let in_band = k.re > band.0 - 1e-9 && k.re <= band.1 + 1e-9;
                    if !duplicate && in_band && k.im < 0.0 {
                        found = Some(k);
                        break;
                    }
                }
                Err(e) if attempt == 7 => return Err(e),
                Err(_) => {}
            }
            // deflate: restart from a perturbed point inside the band
            let t = (attempt + 1) as f64 / 9.0;
            k0 = Complex64::new(
                (j as f64 - 0.5 + 0.5 * t) * PI / d,
                -(0.05 + t) * (1.0 + seed(j, p).im.abs()),
            );
        }
        let k = found.ok_or_else(|| Error::Convergence {
            index: j,
            message: "no new root in the expected band".into(),
        })?;
        let pole = Pole::new(j, k, p);
        if pole.is_proper() {
            proper += 1;
        }
        all.push(pole);
    }

    let re_max = (j as f64 + 0.25) * PI / d;
    let depth = all.iter().map(|q| q.k.im.abs()).fold(0.0, f64::max);
    let expected = winding_count(p, (0.25 * PI / d, re_max), (-(2.0 * depth + 1.0), 0.5 / d));
    if expected != all.len() {
        return Err(Error::Completeness {
            expected,
            found: all.len(),
        });
    }
    Ok(all.into_iter().filter(Pole::is_proper).collect())
}
