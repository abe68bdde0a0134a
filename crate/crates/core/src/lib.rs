//! Numerical laboratory for linear and multilinear Fourier integral operators
//! with rough amplitudes.
//!
//! The crate is organised bottom-up: [`numgrid`] holds grids, norms and the
//! transform convention; [`symbols`] describes amplitudes and phases;
//! [`dyadic`] builds frequency decompositions; [`oscint`] and [`multilinear`]
//! apply operators; [`bounds`] evaluates order thresholds; [`normlab`] runs
//! empirical norm experiments.

pub mod bounds;
pub mod config;
pub mod dyadic;
mod error;
pub mod exec;
pub mod fit;
pub mod multilinear;
pub mod normlab;
pub mod numgrid;
pub mod oscint;
pub mod symbols;

pub use error::{EvalError, FioError};
pub use num_complex::Complex64;

pub type Result<T> = std::result::Result<T, FioError>;
