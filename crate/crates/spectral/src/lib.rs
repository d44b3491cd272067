//! The spectral sequence of the level filtration `F_p = ⊕_{s ≥ p} C_s`.
//!
//! Page `r` is presented on each level as leading terms: `Z^p_r` collects the
//! level-`p` parts of chains in `F_p` whose differential lands in `F_{p+r}`,
//! and `B^p_r` the level-`p` parts of boundaries of chains in `F_{p−r+1}`.
//! Each representative keeps the chain it was cut from, so `∂_r` is read off
//! directly.

mod compare;
mod filtered;
mod page;

pub use compare::{cone_e1_comparison, e_infinity_vs_graded, induced_e1, ConeRow, GradedRow};
pub use filtered::FilteredComplex;
pub use page::{compute_page, page_differential, spectral_sequence, PageLevel, PageSummary, SpectralSequencePage};

use flowcat_complexes::ComplexError;
use flowcat_linalg::LinalgError;
use thiserror::Error;

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum SpectralError {
    #[error("blocks {0:?} lower the level")]
    NotFiltered(Vec<(i64, i64)>),
    #[error("d² ≠ 0 at blocks {0:?}")]
    NotAComplex(Vec<(i64, i64)>),
    #[error("page index {0} is below 1")]
    BadPage(i64),
    #[error("page has no witnesses for level {0}")]
    WitnessMissing(i64),
    #[error("page {r}, level {p}: expected dimension {expected} from the previous page, found {found}")]
    PageMismatch { r: i64, p: i64, expected: usize, found: usize },
    #[error("page {r}, level {p}: image leaves the cycles")]
    NotInPage { r: i64, p: i64 },
    #[error("page {r}, level {p}: ∂ of a boundary is not a boundary")]
    IllDefined { r: i64, p: i64 },
    #[error("page {r}, level {p}: ∂² ≠ 0")]
    SquareNonzero { r: i64, p: i64 },
    #[error(transparent)]
    Linalg(#[from] LinalgError),
    #[error(transparent)]
    Complex(#[from] ComplexError),
}
