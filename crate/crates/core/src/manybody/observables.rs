use num_complex::Complex;

use super::curve::{DecayCurve, Observable};
use super::overlap::{Evolver, MatrixKind, OverlapMatrix};
use super::Statistics;
use crate::error::{Error, Result};
use crate::model::{EvolutionMethod, ModelParams};
use crate::numerics::real::{cabs, Real};

/// Below this cancellation ratio a standard-precision value is untrusted.
pub const CANCELLATION_FLOOR: f64 = 1e-12;
/// The same floor for double-double evaluation.
pub const CANCELLATION_FLOOR_EXTENDED: f64 = 1e-28;
/// Values this far outside `[0, 1]` are clamped silently.
pub const CLAMP_SLACK: f64 = 1e-9;

/// Arithmetic used for the overlap entries and the determinant.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Hash)]
pub enum WorkingPrecision {
    #[default]
    Standard,
    /// Double-double (about 32 digits), for `ExactFree` only.
    Extended,
}

/// A many-body probability with its cancellation diagnostic.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Observation {
    pub value: f64,
    /// `|det|` (or `|per|`) relative to the summed moduli of its terms; 1 for
    /// product laws.
    pub cancellation: f64,
    /// False when `cancellation` is below the floor of the working precision.
    pub trusted: bool,
}

impl Observation {
    fn exact(value: f64) -> Self {
        Observation {
            value: clamp(value),
            cancellation: 1.0,
            trusted: true,
        }
    }
}

fn clamp(v: f64) -> f64 {
    if (-CLAMP_SLACK..0.0).contains(&v) {
        0.0
    } else if v > 1.0 && v <= 1.0 + CLAMP_SLACK {
        1.0
    } else {
        v
    }
}

/// Many-body observables on top of one prepared [`Evolver`].
#[derive(Clone, Debug)]
pub struct ManyBody {
    evolver: Evolver,
    precision: WorkingPrecision,
}

impl ManyBody {
    pub fn new(
        p: &ModelParams,
        method: EvolutionMethod,
        precision: WorkingPrecision,
        n_max: usize,
        tau_min: f64,
    ) -> Result<Self> {
        if precision == WorkingPrecision::Extended && method != EvolutionMethod::ExactFree {
            return Err(Error::config(format!(
                "extended precision requires the exact_free method, not {}",
                method.name()
            )));
        }
        Ok(ManyBody {
            evolver: Evolver::new(p, method, n_max, tau_min)?,
            precision,
        })
    }

    pub fn evolver(&self) -> &Evolver {
        &self.evolver
    }

    pub fn precision(&self) -> WorkingPrecision {
        self.precision
    }

    /// Standard-precision overlap matrix.
    pub fn overlap(&self, tau: f64, n: usize, kind: MatrixKind) -> Result<OverlapMatrix> {
        self.evolver.overlap(tau, n, kind)
    }

    fn combine<T: Real>(m: &OverlapMatrix<T>, stats: Statistics, floor: f64) -> Result<Observation> {
        let amp = match stats {
            Statistics::Fermionized => m.determinant(),
            Statistics::ExcitedBosons => m.permanent()?,
            Statistics::GroundBosons => unreachable!("product law handled by the caller"),
        };
        let cancellation = m.cancellation(amp);
        let value = match m.kind {
            MatrixKind::Region => amp.re.to_f64(),
            MatrixKind::Survival => {
                let a = cabs(amp).to_f64();
                a * a
            }
        };
        Ok(Observation {
            value: clamp(value),
            cancellation,
            trusted: cancellation >= floor,
        })
    }

    fn observe(&self, tau: f64, n: usize, stats: Statistics, kind: MatrixKind) -> Result<Observation> {
        if n < 1 {
            return Err(Error::domain("need at least one particle"));
        }
        let single = |m: Complex<f64>| match kind {
            MatrixKind::Region => m.re,
            MatrixKind::Survival => m.norm_sqr(),
        };
        if stats == Statistics::GroundBosons || n == 1 {
            let m = self.single_matrix(tau, kind)?;
            return Ok(Observation::exact(single(m).powi(n as i32)));
        }
        match self.precision {
            WorkingPrecision::Standard => {
                let m = self.evolver.overlap(tau, n, kind)?;
                Self::combine(&m, stats, CANCELLATION_FLOOR)
            }
            WorkingPrecision::Extended => {
                let m = self.evolver.overlap_extended(tau, n, kind)?;
                Self::combine(&m, stats, CANCELLATION_FLOOR_EXTENDED)
            }
        }
    }

    fn single_matrix(&self, tau: f64, kind: MatrixKind) -> Result<Complex<f64>> {
        Ok(match self.precision {
            WorkingPrecision::Standard => self.evolver.overlap(tau, 1, kind)?.entry(1, 1),
            WorkingPrecision::Extended => {
                let z = self.evolver.overlap_extended(tau, 1, kind)?.entry(1, 1);
                Complex::new(z.re.to_f64(), z.im.to_f64())
            }
        })
    }

    /// Probability that all `n` particles are inside the trap region.
    pub fn nonescape(&self, tau: f64, n: usize, stats: Statistics) -> Result<Observation> {
        self.observe(tau, n, stats, MatrixKind::Region)
    }

    /// Squared overlap of the evolved and initial `n`-body states.
    pub fn survival(&self, tau: f64, n: usize, stats: Statistics) -> Result<Observation> {
        self.observe(tau, n, stats, MatrixKind::Survival)
    }

    /// Fraction of the density (normalized to one) inside the region:
    /// `(1/N) sum_k <phi_k(t)|chi_Delta|phi_k(t)>` over modes `1..=n`. The same
    /// for fermionized and excited-boson states; ground-state bosons see the
    /// `n = 1` value.
    pub fn one_body(&self, tau: f64, n: usize) -> Result<f64> {
        if n < 1 {
            return Err(Error::domain("need at least one particle"));
        }
        let trace = match self.precision {
            WorkingPrecision::Standard => {
                let m = self.evolver.overlap(tau, n, MatrixKind::Region)?;
                (1..=n).map(|k| m.entry(k, k).re).sum::<f64>()
            }
            WorkingPrecision::Extended => {
                let m = self.evolver.overlap_extended(tau, n, MatrixKind::Region)?;
                (1..=n).map(|k| m.entry(k, k).re.to_f64()).sum::<f64>()
            }
        };
        Ok(clamp(trace / n as f64))
    }

    /// Evaluate `observable` on `taus`. Accuracy failures at single points
    /// become flagged NaN samples; other errors abort.
    pub fn curve(&self, observable: Observable, stats: Statistics, n: usize, taus: &[f64]) -> Result<DecayCurve> {
        let mut values = Vec::with_capacity(taus.len());
        let mut flags = Vec::with_capacity(taus.len());
        for &tau in taus {
            let r = match observable {
                Observable::NonEscape => self.nonescape(tau, n, stats),
                Observable::Survival => self.survival(tau, n, stats),
                Observable::OneBody => {
                    let modes = if stats == Statistics::GroundBosons { 1 } else { n };
                    self.one_body(tau, modes).map(Observation::exact)
                }
                Observable::DecayRate => {
                    return Err(Error::domain("decay rates are derived from a non-escape curve"));
                }
            };
            match r {
                Ok(o) => {
                    values.push(o.value);
                    flags.push(if o.trusted {
                        None
                    } else {
                        Some(format!("cancellation {:.1e}", o.cancellation))
                    });
                }
                Err(Error::Accuracy { message, .. }) => {
                    values.push(f64::NAN);
                    flags.push(Some(format!("accuracy: {message}")));
                }
                Err(e) => return Err(e),
            }
        }
        let mut c = DecayCurve::new(taus.to_vec(), values, observable)?;
        c.flags = flags;
        c.meta = Some(super::curve::CurveMeta {
            params: *self.evolver.params(),
            statistics: stats,
            n_particles: n,
            method: self.evolver.method(),
        });
        Ok(c)
    }
}

/// Region overlap matrix at one time.
pub fn overlap_matrix(
    tau: f64,
    n: usize,
    kind: MatrixKind,
    p: &ModelParams,
    method: EvolutionMethod,
) -> Result<OverlapMatrix> {
    Evolver::new(p, method, n, tau)?.overlap(tau, n, kind)
}

/// `P_N(tau)` for the given statistics.
pub fn nonescape(
    tau: f64,
    n: usize,
    stats: Statistics,
    p: &ModelParams,
    method: EvolutionMethod,
) -> Result<Observation> {
    ManyBody::new(p, method, WorkingPrecision::Standard, n, tau)?.nonescape(tau, n, stats)
}

/// `S_N(tau)` for the given statistics.
pub fn survival(
    tau: f64,
    n: usize,
    stats: Statistics,
    p: &ModelParams,
    method: EvolutionMethod,
) -> Result<Observation> {
    ManyBody::new(p, method, WorkingPrecision::Standard, n, tau)?.survival(tau, n, stats)
}

/// One-body non-escape probability of `n` particles in modes `1..=n`.
pub fn one_body_nonescape(tau: f64, n: usize, p: &ModelParams, method: EvolutionMethod) -> Result<f64> {
    ManyBody::new(p, method, WorkingPrecision::Standard, n, tau)?.one_body(tau, n)
}
