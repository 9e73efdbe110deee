//! Harmonic analysis on SU(2) and SO(3).

pub mod cli;
pub mod error;
pub mod groupalgebra;
pub mod haar;
pub mod irreps;
pub mod liealgebra;
pub mod quadrature;
pub mod quasiclassics;
pub mod rotations;

pub use error::{Error, Result};
