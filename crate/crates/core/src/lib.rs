//! Gaussian-process interpolation on the circle with the periodized Matérn
//! covariance.
//!
//! Observations on the regular grid `{k/n}` make every covariance matrix
//! circulant, so likelihoods, samplers and predictors all reduce to
//! operations on the DFT of the data.

// `!(x > a)` rejects NaN along with out-of-range values.
#![allow(clippy::neg_cmp_op_on_partial_ord)]

mod aliasing;
pub mod asymptotics;
pub mod error;
pub mod experiments;
pub mod grid;
pub mod likelihood;
pub mod params;
pub mod prediction;
pub mod sampling;
pub mod special;
pub mod spectrum;
pub mod stats;

pub use error::{Error, Result};
pub use grid::GridSample;
pub use params::{Interval, MaternParams, ParamBox, PhiRange};
pub use spectrum::{covariance_value, eigen_spectrum, fourier_coeff, log_det, quad_form, EigenSpectrum};
