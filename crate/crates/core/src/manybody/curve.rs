use super::Statistics;
use crate::error::{Error, Result};
use crate::model::{EvolutionMethod, ModelParams};
use crate::numerics::{fit_power_law, PowerLawFit};

/// Quantity sampled by a [`DecayCurve`].
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum Observable {
    NonEscape,
    Survival,
    OneBody,
    DecayRate,
}

impl Observable {
    pub fn name(&self) -> &'static str {
        match self {
            Observable::NonEscape => "nonescape",
            Observable::Survival => "survival",
            Observable::OneBody => "one_body",
            Observable::DecayRate => "decay_rate",
        }
    }

    pub fn is_probability(&self) -> bool {
        !matches!(self, Observable::DecayRate)
    }
}

impl std::str::FromStr for Observable {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        match s.to_ascii_lowercase().replace('-', "_").as_str() {
            "nonescape" | "non_escape" => Ok(Observable::NonEscape),
            "survival" => Ok(Observable::Survival),
            "one_body" | "onebody" => Ok(Observable::OneBody),
            "decay_rate" | "decayrate" => Ok(Observable::DecayRate),
            other => Err(Error::config(format!("unknown observable '{other}'"))),
        }
    }
}

/// Where a computed curve came from.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct CurveMeta {
    pub params: ModelParams,
    pub statistics: Statistics,
    pub n_particles: usize,
    pub method: EvolutionMethod,
}

/// Samples of one observable on a sorted time grid. `flags[i]` is set when
/// sample `i` must not be trusted (cancellation or a failed evaluation).
#[derive(Clone, Debug, PartialEq)]
pub struct DecayCurve {
    pub taus: Vec<f64>,
    pub values: Vec<f64>,
    pub flags: Vec<Option<String>>,
    pub observable: Observable,
    pub meta: Option<CurveMeta>,
}

impl DecayCurve {
    pub fn new(taus: Vec<f64>, values: Vec<f64>, observable: Observable) -> Result<Self> {
        if taus.len() != values.len() {
            return Err(Error::domain("taus and values differ in length"));
        }
        if taus.iter().any(|&t| !(t > 0.0)) || taus.windows(2).any(|w| !(w[0] < w[1])) {
            return Err(Error::domain("curve times must be positive and strictly increasing"));
        }
        let flags = vec![None; taus.len()];
        Ok(DecayCurve {
            taus,
            values,
            flags,
            observable,
            meta: None,
        })
    }

    pub fn len(&self) -> usize {
        self.taus.len()
    }

    pub fn is_empty(&self) -> bool {
        self.taus.is_empty()
    }

    /// Whether any sample inside `window` is flagged.
    pub fn flagged_in(&self, window: (f64, f64)) -> Option<(f64, &str)> {
        self.taus
            .iter()
            .zip(&self.flags)
            .find(|(&t, f)| t >= window.0 && t <= window.1 && f.is_some())
            .map(|(&t, f)| (t, f.as_deref().unwrap_or("")))
    }

    /// Power-law fit over `window`; refuses windows holding flagged samples.
    pub fn fit(&self, window: (f64, f64)) -> Result<PowerLawFit> {
        if let Some((t, why)) = self.flagged_in(window) {
            return Err(Error::Refused(format!(
                "sample at tau = {t:e} inside the fit window is flagged ({why})"
            )));
        }
        fit_power_law(&self.taus, &self.values, window)
    }
}

/// `Gamma(tau) = -d ln P / d tau` by the three-point derivative on the
/// (possibly uneven) grid; one-sided at the ends. Rates that touch a flagged
/// sample inherit its flag.
pub fn decay_rate(curve: &DecayCurve) -> Result<DecayCurve> {
    let n = curve.len();
    if n < 3 {
        return Err(Error::domain("decay rate needs at least three samples"));
    }
    let bad = curve
        .values
        .iter()
        .zip(&curve.flags)
        .position(|(&v, f)| f.is_none() && !(v > 0.0));
    if let Some(i) = bad {
        return Err(Error::domain(format!(
            "decay rate needs positive values, got {:e} at tau = {:e}",
            curve.values[i], curve.taus[i]
        )));
    }
    let t = &curve.taus;
    let y: Vec<f64> = curve.values.iter().map(|v| v.ln()).collect();
    // derivative at t[c] of the parabola through points i, i+1, i+2
    let slope = |i: usize, c: usize| -> f64 {
        let (x0, x1, x2) = (t[i], t[i + 1], t[i + 2]);
        let x = t[c];
        y[i] * ((x - x1) + (x - x2)) / ((x0 - x1) * (x0 - x2))
            + y[i + 1] * ((x - x0) + (x - x2)) / ((x1 - x0) * (x1 - x2))
            + y[i + 2] * ((x - x0) + (x - x1)) / ((x2 - x0) * (x2 - x1))
    };
    let mut values = Vec::with_capacity(n);
    let mut flags = Vec::with_capacity(n);
    for c in 0..n {
        let i = c.saturating_sub(1).min(n - 3);
        values.push(-slope(i, c));
        let flag = (i..i + 3).find_map(|j| curve.flags[j].clone());
        flags.push(flag);
    }
    Ok(DecayCurve {
        taus: curve.taus.clone(),
        values,
        flags,
        observable: Observable::DecayRate,
        meta: curve.meta,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::numerics::log_grid;

    #[test]
    fn exponential_rate_is_constant() {
        let taus = log_grid(0.1, 50.0, 60);
        let vals = taus.iter().map(|t| (-0.3 * t).exp()).collect();
        let c = DecayCurve::new(taus, vals, Observable::NonEscape).unwrap();
        let r = decay_rate(&c).unwrap();
        assert!(r.values.iter().all(|v| (v - 0.3).abs() < 1e-6));
    }

    #[test]
    fn power_law_rate() {
        let taus = log_grid(10.0, 1e4, 200);
        let vals = taus.iter().map(|t| t.powi(-3)).collect();
        let c = DecayCurve::new(taus, vals, Observable::NonEscape).unwrap();
        let r = decay_rate(&c).unwrap();
        for (t, v) in r.taus.iter().zip(&r.values) {
            assert!((v * t / 3.0 - 1.0).abs() < 2e-3, "{t} {v}");
        }
    }

    #[test]
    fn flagged_window_is_refused() {
        let taus = log_grid(1.0, 100.0, 20);
        let vals = taus.iter().map(|t| t.powi(-3)).collect();
        let mut c = DecayCurve::new(taus, vals, Observable::Survival).unwrap();
        assert!((c.fit((1.0, 100.0)).unwrap().exponent + 3.0).abs() < 1e-10);
        c.flags[10] = Some("cancellation 1e-14".into());
        assert!(matches!(c.fit((1.0, 100.0)), Err(Error::Refused(_))));
        assert!(c.fit((1.0, 10.0)).is_ok());
    }

    #[test]
    fn flags_spread_to_neighbouring_rates() {
        let taus = log_grid(1.0, 10.0, 6);
        let vals = taus.iter().map(|t| t.powi(-3)).collect();
        let mut c = DecayCurve::new(taus, vals, Observable::NonEscape).unwrap();
        c.values[3] = f64::NAN;
        c.flags[3] = Some("accuracy".into());
        let r = decay_rate(&c).unwrap();
        let flagged: Vec<bool> = r.flags.iter().map(Option::is_some).collect();
        assert_eq!(flagged, [false, false, true, true, true, true]);
        assert!(r.values[0].is_finite() && r.values[1].is_finite());
    }

    #[test]
    fn nonpositive_values_are_rejected() {
        let c = DecayCurve::new(vec![1.0, 2.0, 3.0], vec![1.0, 0.0, 0.5], Observable::NonEscape).unwrap();
        assert!(decay_rate(&c).is_err());
        assert!(DecayCurve::new(vec![2.0, 1.0], vec![1.0, 1.0], Observable::NonEscape).is_err());
    }
}
