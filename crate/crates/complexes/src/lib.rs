//! Cochain complexes whose generators are sorted into integer levels, with the
//! differential stored as blocks `d_k : level s -> level s+k`.

mod cohomology;
mod complex;
mod cone;
mod map;
mod report;
mod twist;

pub use cohomology::{cohomology_betti, induced_rank, nonzero_betti, total_betti, Betti};
pub use complex::{GradedComplex, Generator, Level};
pub use cone::{homotopy_limit, mapping_cone, mapping_cone_filtered, HolimReport, Tower};
pub use map::{ChainMap, Homotopy};
pub use report::{BlockFailure, Report};
pub use twist::twist_differential;

pub use flowcat_linalg::{LinalgError, Matrix, Rational};

use thiserror::Error;

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum ComplexError {
    #[error("block (s={s}, k={k}) has shape {found:?}, expected {expected:?}")]
    ShapeMismatch { s: i64, k: i64, found: (usize, usize), expected: (usize, usize) },
    #[error("level {0} does not exist")]
    UnknownLevel(i64),
    #[error("d∘d is nonzero on blocks {0:?}")]
    NotAComplex(Vec<(i64, i64)>),
    #[error("complex carries no grading, degree-indexed output is unavailable")]
    Ungraded,
    #[error("differential is not homogeneous of degree 1 on blocks {0:?}")]
    NotHomogeneous(Vec<(i64, i64)>),
    #[error("missing dimension for level {0}")]
    MissingDimension(i64),
    #[error("tower has no stages")]
    EmptyTower,
    #[error("maps do not compose: {0}")]
    Incompatible(String),
    #[error(transparent)]
    Linalg(#[from] LinalgError),
}
