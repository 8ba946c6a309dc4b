//! Compressed-sensing recovery of wavelet coefficients of piecewise smooth
//! functions from Gaussian, two-level and multilevel Fourier measurements.

// checks like !(x > 0.0) are meant to reject NaN as well
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod diagnostics;
pub mod error;
pub mod experiment;
pub mod fourier;
pub mod quadrature;
pub mod recipes;
pub mod sampling;
pub mod solvers;
pub mod wavelet;

pub use error::{Error, Result};
