use std::collections::BTreeSet;
use std::sync::Arc;

use flowcat_complexes::ChainMap;
use flowcat_linalg::{kernel_basis, rank, span_rank};

use crate::{assemble_morphism_map, FlowCategoryModel, FlowError, FlowMorphismModel, IdentityOracle};

/// `C_A`, `C_{/A}` and the inclusion and projection morphisms.
#[derive(Debug, Clone)]
pub struct SubquotientSplit {
    pub sub: FlowCategoryModel,
    pub quotient: FlowCategoryModel,
    pub inclusion: FlowMorphismModel,
    pub projection: FlowMorphismModel,
}

fn restricted_identity(
    from: &FlowCategoryModel,
    to: &FlowCategoryModel,
    whole: &FlowCategoryModel,
) -> Result<FlowMorphismModel, FlowError> {
    let mut dims = Vec::new();
    for l in from.levels() {
        if to.level(l.index).is_some() {
            dims.push((l.index, l.index, l.c));
        }
    }
    for (&(i, j), &m) in whole.moduli() {
        if from.level(i).is_some() && to.level(j).is_some() {
            dims.push((i, j, m + 1));
        }
    }
    FlowMorphismModel::new(from.clone(), to.clone(), dims, Arc::new(IdentityOracle::new(whole)?))
}

/// Splits along a level subset `A` closed under the moduli: `M_{i,j}` must
/// be empty for `i ∈ A`, `j ∉ A`.
pub fn subquotient_split(fc: &FlowCategoryModel, a: &BTreeSet<i64>) -> Result<SubquotientSplit, FlowError> {
    for &(i, j) in fc.moduli().keys() {
        if a.contains(&i) && !a.contains(&j) {
            return Err(FlowError::NotASubset { i, j });
        }
    }
    let sub = fc.restrict(|i| a.contains(&i));
    let quotient = fc.restrict(|i| !a.contains(&i));
    let inclusion = restricted_identity(&sub, fc, fc)?;
    let projection = restricted_identity(fc, &quotient, fc)?;
    Ok(SubquotientSplit { sub, quotient, inclusion, projection })
}

/// Chain-level exactness of `0 → BC^{C_A} → BC^C → BC^{C/A} → 0`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ExactnessReport {
    pub inclusion_rank: usize,
    pub projection_rank: usize,
    pub total_dim: usize,
    pub kernel_is_image: bool,
    pub chain_maps: bool,
}

impl ExactnessReport {
    pub fn is_exact(&self) -> bool {
        self.chain_maps
            && self.kernel_is_image
            && self.inclusion_rank + self.projection_rank == self.total_dim
    }
}

impl SubquotientSplit {
    pub fn maps(&self) -> Result<(ChainMap, ChainMap), FlowError> {
        Ok((assemble_morphism_map(&self.inclusion)?, assemble_morphism_map(&self.projection)?))
    }

    pub fn verify_exact(&self) -> Result<ExactnessReport, FlowError> {
        let (i, p) = self.maps()?;
        let im = i.total_matrix();
        let pm = p.total_matrix();
        let ker = kernel_basis(&pm);
        let dim = im.rows();
        let image = im.columns();
        let mut both = image.clone();
        both.extend(ker.iter().cloned());
        let r = span_rank(&image, dim);
        let kernel_is_image = span_rank(&both, dim) == r && ker.len() == r;
        Ok(ExactnessReport {
            inclusion_rank: rank(&im),
            projection_rank: rank(&pm),
            total_dim: dim,
            kernel_is_image,
            chain_maps: i.verify_chain_map().is_empty() && p.verify_chain_map().is_empty(),
        })
    }
}
