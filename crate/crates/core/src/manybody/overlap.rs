//! Single-particle evolution behind one interface, and the N x N overlap
//! matrices built from it.

use std::cell::RefCell;

use num_complex::{Complex, Complex64};
use num_traits::{One, Zero};

use super::linalg::{cancellation_ratio, determinant, permanent};
use crate::error::{Error, Result};
use crate::model::{
    asymptotic_wavefunction, box_eigenstate, evolve_free_in, ContinuumPropagator, EvolutionMethod, ModelParams,
    RsePropagator,
};
use crate::numerics::real::{cabs, Real};
use crate::numerics::{integrate_vec_tol, DoubleDouble, GaussLegendre};

/// Which matrix of single-particle overlaps.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum MatrixKind {
    /// `<phi_n(t)| chi_Delta |phi_k(t)>`.
    Region,
    /// `<phi_n(0)|phi_k(t)>`.
    Survival,
}

/// Relative accuracy requested from the standard-precision entry quadrature.
pub const ENTRY_REL_TOL: f64 = 1e-12;
/// The same for the RSE and continuum propagators, whose pointwise values
/// carry noise near `1e-12` once pole and contour terms are comparable.
pub const ENTRY_REL_TOL_PROPAGATED: f64 = 1e-10;

/// Adaptive panel budget. Edge ripples carry about `hi^2 / (2 pi tau)`
/// oscillations, each of which must be resolved at short times.
fn panel_budget(hi: f64, tau: f64) -> usize {
    let ripples = hi * hi / (2.0 * std::f64::consts::PI * tau);
    (2000.0f64).max(2.0 * ripples).min(4e6) as usize
}
/// Largest allowed Hermiticity defect of a region matrix, relative to its largest entry.
pub const HERMITIAN_DRIFT_TOL: f64 = 1e-10;

/// `N x N` overlap matrix at one time, row-major, 1-based accessors.
#[derive(Clone, Debug, PartialEq)]
pub struct OverlapMatrix<T: Real = f64> {
    pub n_particles: usize,
    pub kind: MatrixKind,
    pub tau: f64,
    entries: Vec<Complex<T>>,
}

impl<T: Real> OverlapMatrix<T> {
    pub fn from_entries(kind: MatrixKind, tau: f64, entries: Vec<Complex<T>>) -> Result<Self> {
        let n = (entries.len() as f64).sqrt().round() as usize;
        if n == 0 || n * n != entries.len() {
            return Err(Error::domain("overlap matrix must be square and nonempty"));
        }
        Ok(OverlapMatrix {
            n_particles: n,
            kind,
            tau,
            entries,
        })
    }

    pub fn identity(n: usize, kind: MatrixKind, tau: f64) -> Self {
        let entries = (0..n * n)
            .map(|i| {
                if i % (n + 1) == 0 {
                    Complex::one()
                } else {
                    Complex::zero()
                }
            })
            .collect();
        OverlapMatrix {
            n_particles: n,
            kind,
            tau,
            entries,
        }
    }

    /// Entry `(n, k)`, both counted from 1.
    pub fn entry(&self, n: usize, k: usize) -> Complex<T> {
        self.entries[(n - 1) * self.n_particles + (k - 1)]
    }

    pub fn entries(&self) -> &[Complex<T>] {
        &self.entries
    }

    pub fn determinant(&self) -> Complex<T> {
        determinant(&self.entries).expect("square by construction")
    }

    pub fn permanent(&self) -> Result<Complex<T>> {
        permanent(&self.entries)
    }

    /// `|value|` relative to the summed moduli of its Leibniz terms.
    pub fn cancellation(&self, value: Complex<T>) -> f64 {
        cancellation_ratio(value, &self.entries).expect("square by construction")
    }

    /// Largest `|m_nk - conj(m_kn)|`.
    pub fn hermitian_drift(&self) -> f64 {
        let n = self.n_particles;
        let mut drift = 0.0f64;
        for i in 0..n {
            for j in 0..n {
                let d = self.entries[i * n + j] - self.entries[j * n + i].conj();
                drift = drift.max(cabs(d).to_f64());
            }
        }
        drift
    }

    pub fn max_entry(&self) -> f64 {
        self.entries.iter().map(|&z| cabs(z).to_f64()).fold(0.0, f64::max)
    }

    /// Replace the matrix by `(m + m^H) / 2` after checking the defect is small.
    fn symmetrize(&mut self) -> Result<()> {
        let n = self.n_particles;
        let scale = self.max_entry().max(f64::MIN_POSITIVE);
        let drift = self.hermitian_drift();
        if drift > HERMITIAN_DRIFT_TOL * scale {
            return Err(Error::accuracy(
                format!(
                    "region matrix is not Hermitian (defect {drift:.2e} at tau = {})",
                    self.tau
                ),
                scale,
                drift,
            ));
        }
        let half = T::from_f64(0.5);
        for i in 0..n {
            for j in i..n {
                let v = (self.entries[i * n + j] + self.entries[j * n + i].conj()) * half;
                self.entries[i * n + j] = v;
                self.entries[j * n + i] = v.conj();
            }
        }
        Ok(())
    }

    pub fn to_f64(&self) -> OverlapMatrix<f64> {
        OverlapMatrix {
            n_particles: self.n_particles,
            kind: self.kind,
            tau: self.tau,
            entries: self
                .entries
                .iter()
                .map(|z| Complex64::new(z.re.to_f64(), z.im.to_f64()))
                .collect(),
        }
    }
}

/// Evaluates `phi_1 .. phi_N` at a point by one of the propagation methods.
#[derive(Clone, Debug)]
pub struct Evolver {
    params: ModelParams,
    method: EvolutionMethod,
    n_max: usize,
    rse: Option<RsePropagator>,
    continuum: Option<ContinuumPropagator>,
}

impl Evolver {
    /// Prepares states `1..=n_max` for times `tau >= tau_min` (the resonance
    /// set is sized for `tau_min`).
    pub fn new(p: &ModelParams, method: EvolutionMethod, n_max: usize, tau_min: f64) -> Result<Self> {
        method.check(p)?;
        if n_max < 1 {
            return Err(Error::domain("need at least one particle"));
        }
        let rse = match method {
            EvolutionMethod::Rse => Some(RsePropagator::for_times(p, n_max, tau_min.max(1e-12))?),
            _ => None,
        };
        let continuum = match method {
            EvolutionMethod::ContinuumQuadrature => Some(ContinuumPropagator::new(p)?),
            _ => None,
        };
        Ok(Evolver {
            params: *p,
            method,
            n_max,
            rse,
            continuum,
        })
    }

    pub fn params(&self) -> &ModelParams {
        &self.params
    }

    pub fn method(&self) -> EvolutionMethod {
        self.method
    }

    pub fn n_max(&self) -> usize {
        self.n_max
    }

    pub fn rse(&self) -> Option<&RsePropagator> {
        self.rse.as_ref()
    }

    /// `phi_n(x, tau)` for `n = 1..=out.len()`.
    pub fn wavefunctions(&self, x: f64, tau: f64, out: &mut [Complex64]) -> Result<()> {
        if out.len() > self.n_max {
            return Err(Error::domain(format!(
                "evolver prepared for {} states, asked for {}",
                self.n_max,
                out.len()
            )));
        }
        let p = &self.params;
        match self.method {
            EvolutionMethod::ExactFree => {
                for (i, o) in out.iter_mut().enumerate() {
                    *o = evolve_free_in(i + 1, x, tau, p.a)?;
                }
            }
            EvolutionMethod::Rse => {
                let ns: Vec<usize> = (1..=out.len()).collect();
                self.rse
                    .as_ref()
                    .expect("built for Rse")
                    .wavefunctions(&ns, x, tau, out)?;
            }
            EvolutionMethod::ContinuumQuadrature => {
                let c = self.continuum.as_ref().expect("built for continuum");
                for (i, o) in out.iter_mut().enumerate() {
                    *o = c.wavefunction(i + 1, x, tau)?;
                }
            }
            EvolutionMethod::AsymptoticLeading => {
                for (i, o) in out.iter_mut().enumerate() {
                    *o = asymptotic_wavefunction(i + 1, x, tau, p);
                }
            }
        }
        Ok(())
    }

    /// Relative target of the entry quadrature for this method.
    pub fn entry_tolerance(&self) -> f64 {
        match self.method {
            EvolutionMethod::ExactFree | EvolutionMethod::AsymptoticLeading => ENTRY_REL_TOL,
            EvolutionMethod::Rse | EvolutionMethod::ContinuumQuadrature => ENTRY_REL_TOL_PROPAGATED,
        }
    }

    fn interval(&self, kind: MatrixKind) -> (f64, f64) {
        match kind {
            MatrixKind::Region => (0.0, self.params.delta_end()),
            // the initial states live on [0, a]
            MatrixKind::Survival => (0.0, self.params.a),
        }
    }

    /// Overlap matrix of the first `n` states at `tau` by adaptive quadrature.
    pub fn overlap(&self, tau: f64, n: usize, kind: MatrixKind) -> Result<OverlapMatrix> {
        if n < 1 || n > self.n_max {
            return Err(Error::domain(format!("particle number {n} outside 1..={}", self.n_max)));
        }
        if tau == 0.0 {
            return Ok(OverlapMatrix::identity(n, kind, 0.0));
        }
        if !(tau > 0.0) {
            return Err(Error::domain(format!("tau must be >= 0, got {tau}")));
        }
        let p = self.params;
        let (lo, hi) = self.interval(kind);
        let mut breaks: Vec<f64> = Vec::new();
        let mut edges = vec![lo, p.a.min(hi), hi];
        edges.dedup();
        for w in edges.windows(2) {
            for i in 0..16 {
                breaks.push(w[0] + (w[1] - w[0]) * i as f64 / 16.0);
            }
        }
        breaks.push(hi);
        let failure: RefCell<Option<Error>> = RefCell::new(None);
        let mut phi = vec![Complex64::zero(); n];
        let (vals, _) = integrate_vec_tol(
            |x, out: &mut [Complex64]| {
                if failure.borrow().is_some() {
                    return;
                }
                if let Err(e) = self.wavefunctions(x, tau, &mut phi) {
                    *failure.borrow_mut() = Some(e);
                    return;
                }
                match kind {
                    MatrixKind::Region => {
                        for r in 0..n {
                            for c in 0..n {
                                out[r * n + c] = phi[r].conj() * phi[c];
                            }
                        }
                    }
                    MatrixKind::Survival => {
                        for r in 0..n {
                            let init = box_eigenstate(r + 1, x, &p).unwrap_or(0.0);
                            for c in 0..n {
                                out[r * n + c] = phi[c] * init;
                            }
                        }
                    }
                }
            },
            n * n,
            &breaks,
            f64::MIN_POSITIVE,
            self.entry_tolerance(),
            panel_budget(hi, tau),
        )?;
        if let Some(e) = failure.into_inner() {
            return Err(e);
        }
        let mut m = OverlapMatrix::from_entries(kind, tau, vals)?;
        if kind == MatrixKind::Region {
            m.symmetrize()?;
        }
        Ok(m)
    }

    /// Overlap matrix with double-double entries, from the closed-form free
    /// evolution and fixed Gauss-Legendre rules; available for `ExactFree` only.
    pub fn overlap_extended(&self, tau: f64, n: usize, kind: MatrixKind) -> Result<OverlapMatrix<DoubleDouble>> {
        if self.method != EvolutionMethod::ExactFree {
            return Err(Error::config(format!(
                "extended precision is available for exact_free evolution only, not {}",
                self.method.name()
            )));
        }
        if n < 1 || n > self.n_max {
            return Err(Error::domain(format!("particle number {n} outside 1..={}", self.n_max)));
        }
        if tau == 0.0 {
            return Ok(OverlapMatrix::identity(n, kind, 0.0));
        }
        if !(tau > 0.0) {
            return Err(Error::domain(format!("tau must be >= 0, got {tau}")));
        }
        type Dd = DoubleDouble;
        let (lo, hi) = self.interval(kind);
        let a = Dd::from(self.params.a);
        let t = Dd::from(tau);
        // phases vary like x^2 / (2 tau); keep each panel well inside one radian
        let panels = 1 + (4.0 * hi * hi / tau).ceil() as usize;
        let eval = |rule: &GaussLegendre<Dd>| -> Result<Vec<Complex<Dd>>> {
            let mut acc = vec![Complex::<Dd>::zero(); n * n];
            let width = Dd::from(hi - lo) / Dd::from_i64(panels as i64);
            let mut phi = vec![Complex::<Dd>::zero(); n];
            for panel in 0..panels {
                let p0 = Dd::from(lo) + width * Dd::from_i64(panel as i64);
                for (x, w) in rule.mapped(p0, p0 + width) {
                    for (i, f) in phi.iter_mut().enumerate() {
                        *f = evolve_free_in(i + 1, x, t, a)?;
                    }
                    for r in 0..n {
                        for c in 0..n {
                            let v = match kind {
                                MatrixKind::Region => phi[r].conj() * phi[c],
                                MatrixKind::Survival => {
                                    let q = Dd::pi() * Dd::from_i64(r as i64 + 1) / a;
                                    phi[c] * ((Dd::from(2.0) / a).sqrt() * (q * x).sin())
                                }
                            };
                            acc[r * n + c] += v * w;
                        }
                    }
                }
            }
            Ok(acc)
        };
        let coarse = eval(&GaussLegendre::new(24))?;
        let fine = eval(&GaussLegendre::new(32))?;
        let scale = fine.iter().map(|&z| cabs(z).to_f64()).fold(0.0, f64::max);
        let diff = coarse
            .iter()
            .zip(&fine)
            .map(|(&x, &y)| cabs(x - y).to_f64())
            .fold(0.0, f64::max);
        if diff > 1e-26 * scale {
            return Err(Error::accuracy(
                format!("extended-precision overlap did not converge at tau = {tau}"),
                scale,
                diff,
            ));
        }
        let mut m = OverlapMatrix::from_entries(kind, tau, fine)?;
        if kind == MatrixKind::Region {
            m.symmetrize()?;
        }
        Ok(m)
    }
}
