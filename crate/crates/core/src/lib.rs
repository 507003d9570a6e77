//! Independence testing for high-dimensional random vectors.
//!
//! The test compares the empirical spectral distribution of the sample
//! covariance matrix `A_n = X* X / n` with the Marčenko–Pastur law through
//! their characteristic functions. Critical values come from Monte-Carlo
//! simulation of the null.

// `!(x > 0.0)` style checks are used on purpose: they also reject NaN.
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod calibrate;
pub mod cf_test;
pub mod eigcore;
pub mod error;
pub mod genmodels;
pub mod lrt;
pub mod mp_law;
pub mod quadrature;
pub mod seeds;

pub use error::{Error, Result};
