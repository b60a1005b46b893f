//! Closed-branch (CB) and BP+CB decoding for quantum LDPC codes.
//!
//! - [`gf2`]: sparse GF(2) matrices and vectors, rank, kernel, quotient bases.
//! - [`bb`]: bivariate-bicycle CSS code construction.
//! - [`noise`]: data-qubit and phenomenological noise models, detector-model files.
//! - [`cb`]: the closed-branch growth engine and decoding schedule.
//! - [`bp`]: sum-product belief propagation and the BP+CB decoder.
//! - [`sim`]: Monte Carlo logical-error-rate estimation.

pub mod bb;
pub mod bp;
pub mod cb;
pub mod error;
pub mod gf2;
pub mod noise;
pub mod sim;

pub use error::{Error, Result};
