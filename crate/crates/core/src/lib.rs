//! Numerical toolkit for a receiver that splits the incoming signal between
//! a coherent (I/Q) branch and a power-detection branch.
//!
//! - [`model`]: signal model, noise parameters, constellations, sampling.
//! - [`densities`]: branch output densities and detection likelihoods.
//! - [`mi`]: mutual information (closed forms and Monte-Carlo) and gains.
//! - [`detect`]: ML and low-complexity detectors and SER simulation.

// `!(x > 0.0)` is used on purpose: it also rejects NaN.
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod densities;
pub mod detect;
pub mod error;
pub mod mi;
pub mod model;
pub mod quadrature;
pub mod specfun;

pub use densities::{QuadratureKind, QuadratureSpec};
pub use error::{Error, Result};
pub use model::{ComplexValue, Constellation, Family, NoiseEnv, RandomStream, RxSample, SystemConfig};
