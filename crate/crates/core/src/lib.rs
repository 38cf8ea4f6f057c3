//! Fundamental solutions of weighted space-time fractional ultrahyperbolic
//! equations on deformed domains.

pub mod config;
pub mod error;
pub mod geometry;
pub mod grid;
pub mod operators;
pub mod quadrature;
pub mod solution;
pub mod specfun;
pub mod timefrac;
pub mod transform;

pub use error::{Error, Result};

/// Complex scalar used throughout.
pub type ComplexValue = num_complex::Complex64;
