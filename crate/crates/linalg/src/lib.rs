//! Exact linear algebra over the rationals.
//!
//! Everything here works on dense [`Matrix`] values with [`Rational`]
//! entries. Elimination never rounds, so ranks, kernels and factorizations are
//! exact.

mod elim;
mod matrix;
mod rational;

pub use elim::{
    extend_basis, inverse, kernel_basis, plu, quotient_dimension, rank, rref, solve, span_rank,
    Plu, Rref,
};
pub use matrix::Matrix;
pub use rational::Rational;

use thiserror::Error;

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum LinalgError {
    #[error("shape mismatch: {0}")]
    ShapeMismatch(String),
    #[error("subspace is not contained in the ambient span")]
    SubNotContained,
    #[error("matrix is singular")]
    Singular,
    #[error("linear system has no solution")]
    Inconsistent,
    #[error("cannot parse rational {0:?}")]
    Parse(String),
}
