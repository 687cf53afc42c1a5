//! Numerics for the relativistic Scott correction: Thomas–Fermi theory,
//! Weyl phase-space integrals, radial and lattice kinetic operators,
//! operator-inequality checks and the Scott function.

pub mod cli;
pub mod error;
pub mod fields;
pub mod ineq;
pub mod phase_space;
pub mod quad;
pub mod scott;
pub mod spectral;
pub mod tf;

pub use error::{Error, Result};
