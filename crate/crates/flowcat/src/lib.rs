//! Flow-category models and the assembly of their cochain complexes.
//!
//! A [`FlowCategoryModel`] records the dimensions of critical manifolds and
//! moduli spaces together with a pairing oracle. The assemblers in this crate
//! turn such models, and morphisms and homotopies between them, into
//! rational complexes, chain maps and chain homotopies.

mod assemble;
mod gysin;
mod identity;
mod model;
mod morphism;
mod product;
mod sign;
mod subquotient;

pub use assemble::{
    assemble_composition_homotopy, assemble_differential, assemble_differential_traced, assemble_homotopy_operator,
    assemble_morphism_map, assemble_morphism_map_traced,
    Assembly, TraceEntry,
};
pub use gysin::{euler_bundle_over_sphere, gysin_complex, GysinBundle, GysinReport, LesRow};
pub use identity::{identity_morphism, identity_morphism_between, neumann_inverse, IdentityOracle};
pub use model::{CatLevel, FlowCategoryModel, ReductionModel};
pub use morphism::{CompositionModel, FlowHomotopyModel, FlowMorphismModel};
pub use product::{product_category, ProductFactor};
pub use sign::{sign_dagger, sign_ddagger, SignContext};
pub use subquotient::{subquotient_split, ExactnessReport, SubquotientSplit};

pub use flowcat_complexes::{ChainMap, GradedComplex, Generator, Homotopy, Level};
pub use flowcat_linalg::{Matrix, Rational};
pub use flowcat_oracles::{PairingKey, PairingKind, PairingOracle};

use flowcat_complexes::ComplexError;
use flowcat_linalg::LinalgError;
use flowcat_oracles::OracleError;
use thiserror::Error;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum FlowError {
    #[error("dimension relation fails for ({i},{j},{k}): found {found}, expected {expected}")]
    DimensionRelation { i: i64, j: i64, k: i64, found: i64, expected: i64 },
    #[error("grading relation fails for ({i},{j}): dim {found}, expected {expected}")]
    GradingRelation { i: i64, j: i64, found: i64, expected: i64 },
    #[error("generator {label} on level {level} has degree {degree} outside [0, {c}]")]
    BadGenerator { level: i64, label: String, degree: i64, c: i64 },
    #[error("moduli entry ({i},{j}) is invalid: {reason}")]
    BadModuli { i: i64, j: i64, reason: String },
    #[error("missing dimension for {0}")]
    MissingDimension(String),
    #[error("level {0} needs an explicit pairing matrix")]
    MissingPairingMatrix(i64),
    #[error("oracle has no value for {0}")]
    OracleMissingPairing(PairingKey),
    #[error("morphisms are not composable: {0}")]
    NotComposable(String),
    #[error("map is not unitriangular on blocks {0:?}")]
    NotUnitriangular(Vec<(i64, i64)>),
    #[error("levels do not form a subset: moduli ({i},{j}) leave it")]
    NotASubset { i: i64, j: i64 },
    #[error("product factor has no pairing data")]
    MissingOracleFactor,
    #[error("fiber dimension {0} needs a tabulated bundle")]
    UnsupportedFiberDim(i64),
    #[error("incompatible models: {0}")]
    Incompatible(String),
    #[error(transparent)]
    Oracle(#[from] OracleError),
    #[error(transparent)]
    Complex(#[from] ComplexError),
    #[error(transparent)]
    Linalg(#[from] LinalgError),
}
