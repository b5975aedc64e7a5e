//! Simulation and analysis toolkit for linear quantum state tomography with
//! SIC POMs, product SIC POMs, and tight informationally complete
//! measurements.
//!
//! The crate is organised bottom-up:
//!
//! * [`operators`]: Hermitian-operator algebra, vectorization, distances.
//! * [`povm`]: measurement constructors (SIC, tetrahedron, octahedron,
//!   products, white noise) and fiducial search.
//! * [`designs`]: frame potentials and weighted t-design checks.
//! * [`tomography`]: frame superoperators, canonical reconstruction, MSE
//!   matrices.
//! * [`theory`]: closed-form error predictions.
//! * [`montecarlo`]: deterministic multinomial simulation harness.

// `!(x >= 0.0)` style checks are deliberate: they also reject NaN.
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod designs;
pub mod error;
pub mod montecarlo;
pub mod operators;
pub mod optimize;
pub mod povm;
pub mod stats;
pub mod theory;
pub mod tomography;

pub use error::{Error, Result};
