use std::collections::BTreeMap;
use std::sync::Arc;

use flowcat_complexes::ChainMap;
use flowcat_linalg::Matrix;
use flowcat_oracles::{ChainedOracle, OracleError, PairingKey, PairingKind, PairingOracle, PairingValue};

use crate::{FlowCategoryModel, FlowError, FlowMorphismModel};

/// Pairings of `I_{i,j} = M_{i,j} × [0, j−i]`. Off the diagonal the
/// integrand is constant along the interval, so the pairing vanishes. On the
/// diagonal without kernels it is the level's integration pairing. Diagonal
/// chains with kernels are left to the next oracle.
#[derive(Debug, Clone, Default)]
pub struct IdentityOracle {
    diagonal: BTreeMap<i64, Matrix>,
}

impl IdentityOracle {
    pub fn new(fc: &FlowCategoryModel) -> Result<Self, FlowError> {
        let mut diagonal = BTreeMap::new();
        for l in fc.levels() {
            diagonal.insert(l.index, l.integration_matrix()?);
        }
        Ok(IdentityOracle { diagonal })
    }

    pub fn with_diagonal(diagonal: BTreeMap<i64, Matrix>) -> Self {
        IdentityOracle { diagonal }
    }
}

impl PairingOracle for IdentityOracle {
    fn pairing(&self, key: &PairingKey) -> Result<Option<PairingValue>, OracleError> {
        if key.kind != PairingKind::Morphism || key.chain.len() != 2 {
            return Ok(None);
        }
        let (Some(&from), Some(&to)) = (key.chain[0].last(), key.chain[1].first()) else {
            return Err(OracleError::BadKey(key.to_string()));
        };
        if from != to {
            return Ok(Some(PairingValue::zero()));
        }
        if key.insertions() > 0 {
            return Ok(None);
        }
        let q = self.diagonal.get(&from).ok_or_else(|| OracleError::BadKey(key.to_string()))?;
        if key.alpha >= q.rows() || key.gamma >= q.cols() {
            return Err(OracleError::BadKey(key.to_string()));
        }
        Ok(Some(PairingValue::exact(q[(key.alpha, key.gamma)].clone())))
    }
}

fn identity_dims(fc: &FlowCategoryModel) -> Vec<(i64, i64, i64)> {
    let mut dims: Vec<_> = fc.levels().map(|l| (l.index, l.index, l.c)).collect();
    dims.extend(fc.moduli().iter().map(|(&(i, j), &m)| (i, j, m + 1)));
    dims
}

pub fn identity_morphism(fc: &FlowCategoryModel) -> Result<FlowMorphismModel, FlowError> {
    FlowMorphismModel::new(fc.clone(), fc.clone(), identity_dims(fc), Arc::new(IdentityOracle::new(fc)?))
}

/// Identity flow morphism between two defining data on the same category.
/// `diagonal` answers the diagonal pairings that carry kernels.
pub fn identity_morphism_between(
    from: &FlowCategoryModel,
    to: &FlowCategoryModel,
    diagonal: Arc<dyn PairingOracle>,
) -> Result<FlowMorphismModel, FlowError> {
    if !from.same_shape(to) {
        return Err(FlowError::Incompatible("identity needs two data on one category".into()));
    }
    let oracle = ChainedOracle::new().with(Arc::new(IdentityOracle::new(from)?)).with(diagonal);
    FlowMorphismModel::new(from.clone(), to.clone(), identity_dims(from), Arc::new(oracle))
}

/// Inverse of `id + N` for `N` strictly raising the level.
pub fn neumann_inverse(f: &ChainMap) -> Result<ChainMap, FlowError> {
    if f.source.levels() != f.target.levels() {
        return Err(FlowError::Incompatible("source and target levels differ".into()));
    }
    let mut bad = Vec::new();
    for l in f.source.levels() {
        if !f.block_or_zero(l.index, 0).is_identity() {
            bad.push((l.index, 0));
        }
    }
    for (&(s, k), b) in f.blocks() {
        if k < 0 && !b.is_zero() {
            bad.push((s, k));
        }
    }
    if !bad.is_empty() {
        return Err(FlowError::NotUnitriangular(bad));
    }
    let n = f.source.dim();
    let id = Matrix::identity(n);
    let neg_n = &id - &f.total_matrix();
    let mut term = id.clone();
    let mut inv = id;
    for _ in 0..f.source.levels().len() {
        term = &neg_n * &term;
        if term.is_zero() {
            break;
        }
        inv = &inv + &term;
    }
    Ok(ChainMap::from_total(f.target.clone(), f.source.clone(), &inv)?)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::{assemble_differential, assemble_morphism_map, CatLevel};
    use flowcat_complexes::{GradedComplex, Generator, Level};
    use flowcat_linalg::Rational;
    use flowcat_oracles::MorseCountOracle;

    fn chain3() -> GradedComplex {
        GradedComplex::new(
            (0..3).map(|i| Level::new(i, Some(i), vec![Generator::new(format!("x{i}"), 0)])).collect(),
        )
    }

    fn unipotent(blocks: &[(i64, i64, i64)]) -> ChainMap {
        let c = chain3();
        let mut f = ChainMap::identity(&c);
        for &(s, k, v) in blocks {
            f.set_block(s, k, Matrix::from_i64(&[&[v]])).unwrap();
        }
        f
    }

    #[test]
    fn neumann_of_identity() {
        let f = unipotent(&[]);
        assert!(neumann_inverse(&f).unwrap().is_identity());
    }

    #[test]
    fn neumann_single_block() {
        let f = unipotent(&[(0, 1, 5)]);
        let inv = neumann_inverse(&f).unwrap();
        assert_eq!(inv.block_or_zero(0, 1), Matrix::from_i64(&[&[-5]]));
        assert!(inv.compose(&f).unwrap().is_identity());
    }

    #[test]
    fn neumann_two_steps() {
        let f = unipotent(&[(0, 1, 2), (1, 1, 3)]);
        let inv = neumann_inverse(&f).unwrap();
        // id − N + N² has (0,2) entry 2·3.
        assert_eq!(inv.block_or_zero(0, 2), Matrix::from_i64(&[&[6]]));
        assert!(f.compose(&inv).unwrap().is_identity());
        assert!(inv.compose(&f).unwrap().is_identity());
    }

    #[test]
    fn neumann_rejects_lower_blocks() {
        let f = unipotent(&[(1, -1, 1)]);
        assert_eq!(neumann_inverse(&f).unwrap_err(), FlowError::NotUnitriangular(vec![(1, -1)]));
        let mut g = unipotent(&[]);
        g.set_block(2, 0, Matrix::from_i64(&[&[2]])).unwrap();
        assert!(matches!(neumann_inverse(&g), Err(FlowError::NotUnitriangular(_))));
    }

    #[test]
    fn morse_identity_is_identity() {
        let levels = vec![
            CatLevel::points(0, Some(0), &["a"]),
            CatLevel::points(1, Some(1), &["b", "b'"]),
            CatLevel::points(2, Some(2), &["c"]),
        ];
        let counts = MorseCountOracle::new()
            .with(PairingKind::Category, 0, 1, Matrix::from_i64(&[&[1], &[1]]))
            .with(PairingKind::Category, 1, 2, Matrix::from_i64(&[&[1, -1]]));
        let fc = FlowCategoryModel::new(levels, [(0, 1, 0), (1, 2, 0), (0, 2, 1)], Arc::new(counts)).unwrap();
        let phi = assemble_morphism_map(&identity_morphism(&fc).unwrap()).unwrap();
        assert!(phi.is_identity());
        assert!(phi.verify_chain_map().is_empty());
        assert_eq!(phi.source, assemble_differential(&fc).unwrap());
    }

    #[test]
    fn single_level_identity() {
        let circle = CatLevel::new(0, 1, Some(0), vec![Generator::new("1", 0), Generator::new("vol", 1)]);
        let fc = FlowCategoryModel::new(vec![circle], [], Arc::new(flowcat_oracles::ZeroOracle)).unwrap();
        let phi = assemble_morphism_map(&identity_morphism(&fc).unwrap()).unwrap();
        assert!(phi.is_identity());
        assert_eq!(phi.block_or_zero(0, 0)[(1, 1)], Rational::one());
    }
}
