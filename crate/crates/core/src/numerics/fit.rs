//! Least-squares power-law fits in log-log space.

use crate::error::{Error, Result};

/// `value ~ coefficient * tau^exponent` over `window`.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct PowerLawFit {
    pub exponent: f64,
    pub coefficient: f64,
    pub r_squared: f64,
    pub window: (f64, f64),
    pub samples: usize,
}

/// Minimum number of samples a fit accepts.
pub const MIN_FIT_SAMPLES: usize = 8;

/// Unweighted least-squares line through `(ln tau, ln value)` for the samples
/// with `tau` inside the closed `window`.
pub fn fit_power_law(taus: &[f64], values: &[f64], window: (f64, f64)) -> Result<PowerLawFit> {
    if taus.len() != values.len() {
        return Err(Error::domain("taus and values differ in length"));
    }
    if !(window.0 > 0.0 && window.0 < window.1) {
        return Err(Error::domain(format!(
            "fit window must satisfy 0 < min < max, got {:?}",
            window
        )));
    }
    let mut pts = Vec::new();
    for (&t, &v) in taus.iter().zip(values) {
        if t < window.0 || t > window.1 {
            continue;
        }
        if !(v > 0.0) || !v.is_finite() {
            return Err(Error::domain(format!(
                "non-positive value {v:e} at tau = {t:e}; the curve is not in its asymptotic regime or lost precision"
            )));
        }
        pts.push((t.ln(), v.ln()));
    }
    if pts.len() < MIN_FIT_SAMPLES {
        return Err(Error::domain(format!(
            "fit needs at least {MIN_FIT_SAMPLES} samples in the window, found {}",
            pts.len()
        )));
    }
    let n = pts.len() as f64;
    let mx = pts.iter().map(|p| p.0).sum::<f64>() / n;
    let my = pts.iter().map(|p| p.1).sum::<f64>() / n;
    let sxx: f64 = pts.iter().map(|p| (p.0 - mx).powi(2)).sum();
    let sxy: f64 = pts.iter().map(|p| (p.0 - mx) * (p.1 - my)).sum();
    let syy: f64 = pts.iter().map(|p| (p.1 - my).powi(2)).sum();
    if sxx == 0.0 {
        return Err(Error::domain("all samples share one tau"));
    }
    let slope = sxy / sxx;
    let intercept = my - slope * mx;
    let sse: f64 = pts.iter().map(|p| (p.1 - intercept - slope * p.0).powi(2)).sum();
    let r_squared = if syy == 0.0 {
        1.0
    } else {
        (1.0 - sse / syy).clamp(0.0, 1.0)
    };
    Ok(PowerLawFit {
        exponent: slope,
        coefficient: intercept.exp(),
        r_squared,
        window,
        samples: pts.len(),
    })
}

/// `points` log-spaced samples on `[lo, hi]`, endpoints included.
pub fn log_grid(lo: f64, hi: f64, points: usize) -> Vec<f64> {
    if points == 1 {
        return vec![lo];
    }
    let (a, b) = (lo.ln(), hi.ln());
    (0..points)
        .map(|i| {
            if i == points - 1 {
                hi
            } else {
                (a + (b - a) * i as f64 / (points - 1) as f64).exp()
            }
        })
        .collect()
}

/// `points` evenly spaced samples on `[lo, hi]`, endpoints included.
pub fn linear_grid(lo: f64, hi: f64, points: usize) -> Vec<f64> {
    if points == 1 {
        return vec![lo];
    }
    (0..points)
        .map(|i| lo + (hi - lo) * i as f64 / (points - 1) as f64)
        .collect()
}
