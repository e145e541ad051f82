//! Autocorrelations, diffraction spectra and Eberlein decompositions of
//! weighted Dirac combs whose points live in a real quadratic field.
//!
//! Coordinates are exact ([`QuadValue`]); weights and measure values are
//! generic over [`Scalar`] (`f32` or `f64`). The `f64` instantiations used
//! throughout the CLI are re-exported below as type aliases.

// `!(x > 0.0)` guards deliberately reject NaN as well as non-positive values.
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod autocorr;
pub mod comb;
pub mod config;
pub mod cps;
pub mod error;
pub mod exactnum;
pub mod linalg;
pub mod scalar;
pub mod spectrum;
pub mod verify;

pub use error::{Error, Result};
pub use exactnum::{quad_arith, quad_cmp, ArithOp, QuadValue};
pub use scalar::Scalar;

pub type Comb = comb::WeightedComb<f64>;
pub type Autocorr = autocorr::Autocorrelation<f64>;
pub type Spectrum = spectrum::SpectrumEstimate<f64>;
pub type Decomp = spectrum::Decomposition<f64>;
