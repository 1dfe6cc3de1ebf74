//! Transition rates between macroscopic fluorescence periods of one to three
//! dipole-dipole interacting atoms, and the double/triple jump statistics of
//! the resulting telegraph process.
//!
//! Rates are computed three ways: projection of the weak part of the Bloch
//! generator onto the null space of its strong part, a population times
//! decay-rate bookkeeping over a symmetrized basis, and closed forms for the
//! equilateral three-atom configuration. All rates are in units of the strong
//! Einstein coefficient `A3`; lengths are in units of the strong wavelength.

#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod coupling;
pub mod error;
pub mod linalg;
pub mod liouville;
pub mod model;
pub mod rates;
pub mod sweep;
pub mod telegraph;
pub mod verify;

pub use error::{Error, Result};
pub use num_complex::Complex64 as C64;

/// Version string written into output headers.
pub const VERSION: &str = env!("CARGO_PKG_VERSION");
