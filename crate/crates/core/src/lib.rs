//! Many-particle tunneling decay from a leaking one-dimensional trap.
//!
//! [`model`] evolves single-particle box states, [`manybody`] combines them
//! into symmetrized many-body observables, [`asymptotics`] derives the
//! long-time power laws and [`numerics`] holds the special functions,
//! quadrature and extended-precision arithmetic they rest on.

pub mod asymptotics;
pub mod error;
pub mod manybody;
pub mod model;
pub mod numerics;

pub use error::{Error, Result};
