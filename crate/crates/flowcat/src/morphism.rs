use std::collections::BTreeMap;
use std::fmt;
use std::sync::Arc;

use flowcat_oracles::PairingOracle;

use crate::{FlowCategoryModel, FlowError};

/// Checks the two dimension relations of a bimodule `X_{i,j}` from `C` to
/// `D` and the grading relation for a map of the given degree.
fn check_bimodule(
    source: &FlowCategoryModel,
    target: &FlowCategoryModel,
    dims: &BTreeMap<(i64, i64), i64>,
    degree: i64,
) -> Result<(), FlowError> {
    for (&(i, j), &x) in dims {
        let (Some(ci), Some(dj)) = (source.level(i), target.level(j)) else {
            return Err(FlowError::BadModuli { i, j, reason: "unknown level".into() });
        };
        if x < 0 {
            return Err(FlowError::BadModuli { i, j, reason: format!("negative dimension {x}") });
        }
        for (&(j2, k), &m) in target.moduli() {
            if j2 != j {
                continue;
            }
            if let Some(&xik) = dims.get(&(i, k)) {
                let expected = x + m - dj.c + 1;
                if xik != expected {
                    return Err(FlowError::DimensionRelation { i, j, k, found: xik, expected });
                }
            }
        }
        for (&(l, i2), &m) in source.moduli() {
            if i2 != i {
                continue;
            }
            if let Some(&xlj) = dims.get(&(l, j)) {
                let expected = m + x - ci.c + 1;
                if xlj != expected {
                    return Err(FlowError::DimensionRelation { i: l, j: i, k: j, found: xlj, expected });
                }
            }
        }
        if let (Some(gi), Some(gj)) = (ci.grading, dj.grading) {
            let expected = gj + dj.c - gi - degree;
            if x != expected {
                return Err(FlowError::GradingRelation { i, j, found: x, expected });
            }
        }
    }
    Ok(())
}

/// Flow morphism `H : C ⇒ D`. `degree` is the cohomological degree of the
/// induced map, zero for ordinary morphisms.
#[derive(Clone)]
pub struct FlowMorphismModel {
    source: FlowCategoryModel,
    target: FlowCategoryModel,
    dims: BTreeMap<(i64, i64), i64>,
    degree: i64,
    oracle: Arc<dyn PairingOracle>,
}

impl fmt::Debug for FlowMorphismModel {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("FlowMorphismModel").field("dims", &self.dims).field("degree", &self.degree).finish()
    }
}

impl FlowMorphismModel {
    pub fn new(
        source: FlowCategoryModel,
        target: FlowCategoryModel,
        dims: impl IntoIterator<Item = (i64, i64, i64)>,
        oracle: Arc<dyn PairingOracle>,
    ) -> Result<Self, FlowError> {
        Self::with_degree(source, target, dims, 0, oracle)
    }

    pub fn with_degree(
        source: FlowCategoryModel,
        target: FlowCategoryModel,
        dims: impl IntoIterator<Item = (i64, i64, i64)>,
        degree: i64,
        oracle: Arc<dyn PairingOracle>,
    ) -> Result<Self, FlowError> {
        let dims: BTreeMap<_, _> = dims.into_iter().map(|(i, j, h)| ((i, j), h)).collect();
        check_bimodule(&source, &target, &dims, degree)?;
        Ok(FlowMorphismModel { source, target, dims, degree, oracle })
    }

    pub fn source(&self) -> &FlowCategoryModel {
        &self.source
    }

    pub fn target(&self) -> &FlowCategoryModel {
        &self.target
    }

    pub fn dims(&self) -> &BTreeMap<(i64, i64), i64> {
        &self.dims
    }

    pub fn dim(&self, i: i64, j: i64) -> Option<i64> {
        self.dims.get(&(i, j)).copied()
    }

    pub fn degree(&self) -> i64 {
        self.degree
    }

    pub fn oracle(&self) -> &Arc<dyn PairingOracle> {
        &self.oracle
    }

    pub fn with_oracle(&self, oracle: Arc<dyn PairingOracle>) -> Self {
        FlowMorphismModel { oracle, ..self.clone() }
    }

    /// Smallest `N` with `H_{i,j}` empty whenever `i − j > N`.
    pub fn cutoff(&self) -> i64 {
        self.dims.keys().map(|(i, j)| i - j).max().unwrap_or(0).max(0)
    }
}

/// Flow homotopy `K` between `F` and `H`, with `k_{i,j} = h_{i,j} + 1`
/// wherever both are defined.
#[derive(Clone)]
pub struct FlowHomotopyModel {
    pub f: FlowMorphismModel,
    pub h: FlowMorphismModel,
    dims: BTreeMap<(i64, i64), i64>,
    oracle: Arc<dyn PairingOracle>,
}

impl fmt::Debug for FlowHomotopyModel {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("FlowHomotopyModel").field("f", &self.f).field("h", &self.h).field("dims", &self.dims).finish()
    }
}

impl FlowHomotopyModel {
    pub fn new(
        f: FlowMorphismModel,
        h: FlowMorphismModel,
        dims: impl IntoIterator<Item = (i64, i64, i64)>,
        oracle: Arc<dyn PairingOracle>,
    ) -> Result<Self, FlowError> {
        if !f.source.same_shape(&h.source) || !f.target.same_shape(&h.target) || f.degree != h.degree {
            return Err(FlowError::Incompatible("homotopy ends have different shapes".into()));
        }
        let dims: BTreeMap<_, _> = dims.into_iter().map(|(i, j, k)| ((i, j), k)).collect();
        check_bimodule(&f.source, &f.target, &dims, f.degree - 1)?;
        Ok(FlowHomotopyModel { f, h, dims, oracle })
    }

    pub fn dims(&self) -> &BTreeMap<(i64, i64), i64> {
        &self.dims
    }

    pub fn oracle(&self) -> &Arc<dyn PairingOracle> {
        &self.oracle
    }
}

/// Composable `H : C ⇒ D` and `F : D ⇒ E` with the composite `F∘H` and the
/// oracle answering mixed pairings.
#[derive(Clone)]
pub struct CompositionModel {
    pub h: FlowMorphismModel,
    pub f: FlowMorphismModel,
    pub composite: FlowMorphismModel,
    pub mixed: Arc<dyn PairingOracle>,
}

impl fmt::Debug for CompositionModel {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("CompositionModel")
            .field("h", &self.h)
            .field("f", &self.f)
            .field("composite", &self.composite)
            .finish()
    }
}

impl CompositionModel {
    /// Derives `dim (F∘H)_{i,k} = h_{i,j} + f_{j,k} − d_j` from every middle
    /// level and rejects inconsistent choices.
    pub fn new(
        h: FlowMorphismModel,
        f: FlowMorphismModel,
        composite_oracle: Arc<dyn PairingOracle>,
        mixed: Arc<dyn PairingOracle>,
    ) -> Result<Self, FlowError> {
        if !h.target.same_shape(&f.source) {
            return Err(FlowError::NotComposable("middle categories differ".into()));
        }
        let mut dims: BTreeMap<(i64, i64), i64> = BTreeMap::new();
        for (&(i, j), &hij) in &h.dims {
            for (&(j2, k), &fjk) in &f.dims {
                if j2 != j {
                    continue;
                }
                let d = hij + fjk - h.target.level(j).map_or(0, |l| l.c);
                if d < 0 {
                    continue;
                }
                if let Some(&prev) = dims.get(&(i, k)) {
                    if prev != d {
                        return Err(FlowError::NotComposable(format!("dimension of (F∘H)_({i},{k}) is ambiguous")));
                    }
                }
                dims.insert((i, k), d);
            }
        }
        let composite = FlowMorphismModel::with_degree(
            h.source.clone(),
            f.target.clone(),
            dims.into_iter().map(|((i, k), d)| (i, k, d)),
            h.degree + f.degree,
            composite_oracle,
        )?;
        Ok(CompositionModel { h, f, composite, mixed })
    }
}
