//! Numerical toolkit for pairs of subspaces of C^n that admit a common
//! complement.

pub mod bundle;
pub mod cli;
pub mod delta;
pub mod error;
pub mod fuzz;
pub mod grassmann;
pub mod operators;
pub mod random;
pub mod substrate;

pub use error::{Error, Result};
pub use substrate::{CMatrix, Tolerances, TriState};
