//! Long-time power laws of the many-body observables.
//!
//! [`predicted_law`] returns the closed forms; [`derive_law_series`] derives
//! exponents and coefficients independently by exact series arithmetic on
//! the overlap matrix in `u = tau^{-1/2}`; [`verify_curve`] compares a
//! computed curve with either.

mod contour;
mod image;

pub use contour::contour_coefficients;
pub use image::{element_series, leading_power, wavefunction_series};

use std::f64::consts::PI;
use std::fmt;

use num_traits::Zero;

use crate::error::{Error, Result};
use crate::manybody::{DecayCurve, MatrixKind, Observable, Statistics};
use crate::model::ModelParams;
use crate::numerics::real::{cabs, Real};
use crate::numerics::series::Coeff;
use crate::numerics::{series_det_expansion, series_per_expansion, PowerLawFit, SeriesExpansion, TruncatedSeries};

use image::ImageExpansion;

/// A series order counts as surviving when its coefficient exceeds this
/// fraction of the summed moduli of its contributions.
pub const NOISE_FLOOR: f64 = 1e-20;

/// Largest particle number [`derive_law_series`] accepts.
pub const SERIES_MAX_N: usize = 4;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum LawSource {
    ClosedForm,
    SeriesDerived,
}

impl LawSource {
    pub fn name(&self) -> &'static str {
        match self {
            LawSource::ClosedForm => "closed_form",
            LawSource::SeriesDerived => "series",
        }
    }
}

/// `value ~ coefficient * tau^exponent` as `tau -> infinity`.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct AsymptoticLaw {
    pub observable: Observable,
    pub statistics: Statistics,
    pub n_particles: usize,
    pub exponent: f64,
    /// Includes the barrier factor `(1 + eta d)^{-4N}`; `None` when unknown.
    pub coefficient: Option<f64>,
    pub source: LawSource,
}

impl fmt::Display for AsymptoticLaw {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(
            f,
            "{} {} N={}: ",
            self.observable.name(),
            self.statistics.name(),
            self.n_particles
        )?;
        match self.coefficient {
            Some(c) => write!(f, "{c:.10e}")?,
            None => write!(f, "C")?,
        }
        write!(f, " tau^{} ({})", self.exponent, self.source.name())
    }
}

/// Exponent of the power-law tail.
pub fn law_exponent(observable: Observable, stats: Statistics, n: usize) -> Result<f64> {
    let nf = n as f64;
    match observable {
        Observable::OneBody => Ok(-3.0),
        Observable::NonEscape | Observable::Survival => Ok(match stats {
            Statistics::Fermionized => -nf * (2.0 * nf + 1.0),
            Statistics::GroundBosons | Statistics::ExcitedBosons => -3.0 * nf,
        }),
        Observable::DecayRate => Err(Error::domain("decay rates have no power-law tail")),
    }
}

fn fermion_table(observable: Observable, n: usize) -> Option<f64> {
    match (observable, n) {
        (Observable::NonEscape, 1) => Some(4.0 / (3.0 * PI.powi(3))),
        (Observable::NonEscape, 2) => Some(3.0 / (175.0 * PI.powi(10))),
        (Observable::NonEscape, 3) => Some(1024.0 / (6015380679.0 * PI.powi(21))),
        (Observable::Survival, 1) => Some(8.0 / PI.powi(5)),
        (Observable::Survival, 2) => Some(729.0 / (16.0 * PI.powi(18))),
        (Observable::Survival, 3) => Some(8000000.0 / (531441.0 * PI.powi(39))),
        _ => None,
    }
}

/// Closed-form law. The coefficient is known for `d = a` and `N <= 3`
/// (fermionized and ground-state bosons; any statistics at `N = 1`).
pub fn predicted_law(observable: Observable, stats: Statistics, n: usize, p: &ModelParams) -> Result<AsymptoticLaw> {
    if n == 0 {
        return Err(Error::domain("need at least one particle"));
    }
    let exponent = law_exponent(observable, stats, n)?;
    let unit = match (observable, stats) {
        _ if p.d != p.a => None,
        (Observable::OneBody, Statistics::GroundBosons) => fermion_table(Observable::NonEscape, 1),
        (Observable::OneBody, _) if n == 1 => fermion_table(Observable::NonEscape, 1),
        (Observable::OneBody, _) => None,
        (_, Statistics::GroundBosons) => fermion_table(observable, 1).map(|c| c.powi(n as i32)),
        (_, Statistics::ExcitedBosons) if n == 1 => fermion_table(observable, 1),
        (_, Statistics::ExcitedBosons) => None,
        (_, Statistics::Fermionized) => fermion_table(observable, n),
    };
    // (a^2 / tau)^{-exponent} and the barrier suppression
    let nb = if observable == Observable::OneBody { 1 } else { n } as i32;
    let coefficient = unit.map(|c| c * p.a.powf(-2.0 * exponent) * p.barrier_factor().powi(-4 * nb));
    Ok(AsymptoticLaw {
        observable,
        statistics: stats,
        n_particles: n,
        exponent,
        coefficient,
        source: LawSource::ClosedForm,
    })
}

/// Relative series order kept beyond the leading power of the entries.
pub fn default_series_order(n: usize) -> usize {
    2 * (2 * n * n + 2)
}

/// Series in `u` of the many-body amplitude at `eta = 0`, with its
/// per-order contribution magnitudes: the determinant, permanent or product
/// of overlap entries (for `OneBody`, the mean diagonal region entry).
pub fn amplitude_series(
    observable: Observable,
    stats: Statistics,
    n: usize,
    p: &ModelParams,
    order: Option<usize>,
) -> Result<SeriesExpansion> {
    if n == 0 {
        return Err(Error::domain("need at least one particle"));
    }
    if n > SERIES_MAX_N {
        return Err(Error::Capacity(format!(
            "series derivation is limited to N <= {SERIES_MAX_N}, got {n}"
        )));
    }
    let kind = match observable {
        Observable::NonEscape | Observable::OneBody => MatrixKind::Region,
        Observable::Survival => MatrixKind::Survival,
        Observable::DecayRate => return Err(Error::domain("decay rates have no power-law tail")),
    };
    let free = ModelParams { eta: 0.0, ..*p };
    let rel = order.unwrap_or_else(|| default_series_order(n));
    let entry_order = image::leading_power(kind) as usize + rel;
    let wave_order = entry_order;
    let modes: Vec<ImageExpansion> = (1..=n).map(|k| ImageExpansion::new(k, free.a, wave_order)).collect();
    let entry = |r: usize, c: usize| match kind {
        MatrixKind::Region => image::region_entry(&modes[r], &modes[c], free.delta_end(), entry_order),
        MatrixKind::Survival => image::survival_entry(&modes[r], &modes[c], entry_order),
    };
    if observable == Observable::OneBody {
        // every ground-state boson occupies mode 1
        let occupied = if stats == Statistics::GroundBosons { 1 } else { n };
        let scale = Coeff::new((occupied as f64).recip().into(), Zero::zero());
        let mut sum = TruncatedSeries::zero(entry_order as i32);
        for k in 0..occupied {
            sum = &sum + &entry(k, k);
        }
        let value = sum.scale(scale);
        let magnitude = value.magnitudes();
        return Ok(SeriesExpansion { value, magnitude });
    }
    if stats == Statistics::GroundBosons {
        let e = entry(0, 0);
        let mag = e.magnitudes();
        let (mut value, mut magnitude) = (e.clone(), mag.clone());
        for _ in 1..n {
            value = &value * &e;
            magnitude = &magnitude * &mag;
        }
        return Ok(SeriesExpansion { value, magnitude });
    }
    let m: Vec<Vec<TruncatedSeries>> = (0..n).map(|r| (0..n).map(|c| entry(r, c)).collect()).collect();
    match stats {
        Statistics::Fermionized => series_det_expansion(&m),
        _ => series_per_expansion(&m),
    }
}

/// Law derived from the series of the amplitude: first surviving order and
/// its coefficient, times `(1 + eta d)^{-4N}`. `order` is the number of
/// powers of `u` kept beyond the leading power of the entries.
pub fn derive_law_series(
    observable: Observable,
    stats: Statistics,
    n: usize,
    p: &ModelParams,
    order: Option<usize>,
) -> Result<AsymptoticLaw> {
    let expansion = amplitude_series(observable, stats, n, p, order)?;
    let Some((power, c)) = expansion.leading_surviving(NOISE_FLOOR) else {
        return Err(Error::Inconclusive(format!(
            "every order through u^{} cancels below {NOISE_FLOOR:e}; raise the order",
            expansion.value.order()
        )));
    };
    let (exponent, coefficient) = match observable {
        Observable::Survival => {
            let a = cabs(c).to_f64();
            (-(power as f64), a * a)
        }
        _ => (-(power as f64) / 2.0, c.re.to_f64()),
    };
    let nb = if observable == Observable::OneBody { 1 } else { n } as i32;
    Ok(AsymptoticLaw {
        observable,
        statistics: stats,
        n_particles: n,
        exponent,
        coefficient: Some(coefficient * p.barrier_factor().powi(-4 * nb)),
        source: LawSource::SeriesDerived,
    })
}

/// Comparison of a computed curve with a law.
#[derive(Clone, Debug, PartialEq)]
pub struct CurveVerification {
    pub fit: PowerLawFit,
    pub law: AsymptoticLaw,
    /// Fitted minus predicted exponent.
    pub exponent_error: f64,
    /// Fitted over predicted coefficient, when the law has one.
    pub coefficient_ratio: Option<f64>,
}

/// Fit `curve` on `window` and compare with `law`. Discrepancies are reported,
/// not raised; flagged samples in the window are refused.
pub fn verify_curve(curve: &DecayCurve, law: &AsymptoticLaw, window: (f64, f64)) -> Result<CurveVerification> {
    let fit = curve.fit(window)?;
    Ok(CurveVerification {
        exponent_error: fit.exponent - law.exponent,
        coefficient_ratio: law.coefficient.map(|c| fit.coefficient / c),
        fit,
        law: *law,
    })
}
