//! Near-field, spatially non-stationary channel simulation and estimation for
//! extremely large aperture arrays (ELAA).
//!
//! The crate is organised along the processing chain:
//!
//! * [`channel`] draws scatterer geometries, builds visibility-region (VR)
//!   masks (stationary, binary, knife-edge diffraction) and synthesizes the
//!   uplink channel and its noisy pilot observations.
//! * [`dictionary`] builds the polar-domain dictionary of near-field steering
//!   vectors shared by every sparse estimator.
//! * [`hmm`] turns residual reductions into per-antenna emission
//!   probabilities and decodes a binary VR mask with a two-state Viterbi pass.
//! * [`estimators`] holds LS, P-SOMP, subarray P-SOMP, VR-HMM-P-SOMP and the
//!   genie-aided variant.
//! * [`harness`] runs seeded Monte Carlo trials and sweeps and writes CSV/SVG.

// `!(x > 0.0)` is used on purpose: it also rejects NaN.
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod channel;
pub mod dictionary;
pub mod error;
pub mod estimators;
pub mod harness;
pub mod hmm;
pub mod linalg;
pub mod rng;

pub use error::{Error, Result};

/// Complex baseband sample type used throughout the crate.
pub type C64 = num_complex::Complex64;

/// Dense complex matrix (column-major).
pub type CMatrix = nalgebra::DMatrix<C64>;

/// Speed of light in vacuum, m/s.
pub const SPEED_OF_LIGHT: f64 = 299_792_458.0;
