//! N-particle observables from single-particle evolutions: non-escape and
//! survival probabilities under each statistics, the one-body density
//! fraction, decay rates and the crossover time.
//!
//! Fermionized states (spin-polarized fermions, the Tonks-Girardeau gas and
//! hard-core anyons share every `|Psi|^2` observable) use determinants; bosons
//! in the ground mode use the `N`-th power of the single-particle value;
//! bosons in modes `1..=N` use permanents.

mod crossover;
mod curve;
pub mod linalg;
mod observables;
mod overlap;

pub use crossover::{crossover_time, envelope_tail_intersection, Crossover};
pub use curve::{decay_rate, CurveMeta, DecayCurve, Observable};
pub use linalg::{determinant, permanent, PERMANENT_MAX_N};
pub use observables::{
    nonescape, one_body_nonescape, overlap_matrix, survival, ManyBody, Observation, WorkingPrecision,
    CANCELLATION_FLOOR, CANCELLATION_FLOOR_EXTENDED, CLAMP_SLACK,
};
pub use overlap::{Evolver, MatrixKind, OverlapMatrix, ENTRY_REL_TOL, ENTRY_REL_TOL_PROPAGATED, HERMITIAN_DRIFT_TOL};

use crate::error::{Error, Result};

/// Particle statistics.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum Statistics {
    /// All bosons in the ground mode.
    GroundBosons,
    /// Modes `1..=N` filled with hard-core particles.
    Fermionized,
    /// Non-interacting bosons, one in each mode `1..=N`.
    ExcitedBosons,
}

impl Statistics {
    pub const ALL: [Statistics; 3] = [
        Statistics::GroundBosons,
        Statistics::Fermionized,
        Statistics::ExcitedBosons,
    ];

    pub fn name(&self) -> &'static str {
        match self {
            Statistics::GroundBosons => "ground_bosons",
            Statistics::Fermionized => "fermionized",
            Statistics::ExcitedBosons => "excited_bosons",
        }
    }
}

impl std::fmt::Display for Statistics {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(self.name())
    }
}

impl std::str::FromStr for Statistics {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        match s.to_ascii_lowercase().replace('-', "_").as_str() {
            "ground_bosons" | "bosons" | "groundbosons" => Ok(Statistics::GroundBosons),
            "fermionized" | "fermions" | "tonks_girardeau" | "anyons" => Ok(Statistics::Fermionized),
            "excited_bosons" | "excitedbosons" => Ok(Statistics::ExcitedBosons),
            other => Err(Error::config(format!("unknown statistics '{other}'"))),
        }
    }
}
