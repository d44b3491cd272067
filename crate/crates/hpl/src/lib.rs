//! The perturbation lemma for level-filtered complexes.
//!
//! A big complex carries a level-preserving part `d_0` and level-raising
//! parts `d_k`. Given per-level projections `p_i` onto `d_0`-harmonic
//! representatives and homotopies `H_i` with `id − p_i = d_0 H_i + H_i d_0`,
//! [`perturbed_complex`] builds the small complex on `⊕ im p_i` whose
//! differential sums the zig-zags `p d H d … H d ι`.

mod data;
mod perturb;
mod random;

pub use data::{harmonic_data, verify_perturbation_data, LevelData, PerturbationData};
pub use perturb::{admissible_sequences, perturbed_complex, perturbed_operator, HplSign};
pub use random::{random_big_complex, seeded_family, FamilyConfig};

use flowcat_complexes::ComplexError;
use flowcat_linalg::LinalgError;
use thiserror::Error;

/// A filtered complex whose blocks may include `k = 0`.
pub type BigComplex = flowcat_complexes::GradedComplex;

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum HplError {
    #[error("level {level}: {what}")]
    ShapeMismatch { level: i64, what: String },
    #[error("sequence {0:?} is not strictly increasing from 0 to k")]
    BadSequence(Vec<i64>),
    #[error("no perturbation data for level {0}")]
    MissingLevel(i64),
    #[error("perturbation data fails verification: {0}")]
    Unverified(String),
    #[error(transparent)]
    Complex(#[from] ComplexError),
    #[error(transparent)]
    Linalg(#[from] LinalgError),
}
