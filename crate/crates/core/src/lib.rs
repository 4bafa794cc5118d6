//! Location-assisted compressive-sensing beam alignment for millimeter-wave links.
//!
//! The crate models an access point (AP) and a user equipment (UE), each with a
//! uniform linear array, talking over a sparse geometric channel. Two ways of
//! picking the analog beam pair are provided:
//!
//! * [`locbf::exhaustive_search`] tries every pair of a phase-quantized codebook;
//! * [`locbf::align_location_based`] uses noisy position estimates to bound the
//!   departure/arrival angles, probes only that angular window with designed
//!   measurement beams, and recovers the dominant path with orthogonal matching
//!   pursuit ([`omp::solve`]).
//!
//! The [`harness`] module runs seeded Monte Carlo sweeps of both and writes CSV.

// `!(x > 0.0)` is used on purpose so NaN fails validation.
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod arrays;
pub mod channel;
pub mod error;
pub mod harness;
pub mod locbf;
pub mod metrics;
pub mod omp;
pub mod rng;
pub mod sensing;

pub use error::{Error, Result};

use nalgebra::{DMatrix, DVector};
use num_complex::Complex64;

/// Dense complex matrix (column-major).
pub type CMatrix = DMatrix<Complex64>;
/// Dense complex column vector.
pub type CVector = DVector<Complex64>;
