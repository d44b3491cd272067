use std::collections::BTreeMap;
use std::sync::Arc;

use flowcat_complexes::{twist_differential, GradedComplex, Generator};
use flowcat_linalg::{Matrix, Rational};
use flowcat_oracles::{PairingKey, TabulatedOracle};

use crate::{assemble_differential, CatLevel, FlowCategoryModel, FlowError};

/// Closed manifold `B` given by a graded basis of `H*(B)`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ProductFactor {
    pub dim: i64,
    pub generators: Vec<Generator>,
    pub integration: Option<Matrix>,
}

impl ProductFactor {
    pub fn new(dim: i64, generators: Vec<Generator>) -> Self {
        ProductFactor { dim, generators, integration: None }
    }

    pub fn point() -> Self {
        ProductFactor::new(0, vec![Generator::new("1", 0)])
    }

    pub fn circle() -> Self {
        ProductFactor::new(1, vec![Generator::new("1", 0), Generator::new("ψ", 1)])
    }

    pub fn with_integration(mut self, m: Matrix) -> Self {
        self.integration = Some(m);
        self
    }

    pub fn integration_matrix(&self) -> Result<Matrix, FlowError> {
        if self.generators.is_empty() {
            return Err(FlowError::MissingOracleFactor);
        }
        let mut l = CatLevel::new(0, self.dim, None, self.generators.clone());
        l.integration = self.integration.clone();
        l.integration_matrix().map_err(|_| FlowError::MissingOracleFactor)
    }

    /// `∫_B ξ_b`.
    pub fn integrals(&self) -> Result<Vec<Rational>, FlowError> {
        let q = self.integration_matrix()?;
        let unit = self
            .generators
            .iter()
            .position(|g| g.degree == 0)
            .ok_or(FlowError::MissingOracleFactor)?;
        Ok((0..self.generators.len()).map(|b| q[(unit, b)].clone()).collect())
    }
}

fn product_level(l: &CatLevel, b: &ProductFactor, qb: &Matrix) -> Result<CatLevel, FlowError> {
    let qc = l.integration_matrix()?;
    let nb = b.generators.len();
    let mut gens = Vec::new();
    for g in &l.generators {
        for x in &b.generators {
            gens.push(Generator::new(format!("{}⊗{}", g.label, x.label), g.degree + x.degree));
        }
    }
    let n = gens.len();
    let mut q = Matrix::zeros(n, n);
    for a in 0..l.dim() {
        for x in 0..nb {
            for g in 0..l.dim() {
                for y in 0..nb {
                    let v = &qc[(a, g)] * &qb[(x, y)];
                    if !v.is_zero() {
                        let s = Rational::sign_power(b.generators[x].degree * l.generators[g].degree);
                        q[(a * nb + x, g * nb + y)] = &v * &s;
                    }
                }
            }
        }
    }
    Ok(CatLevel::new(l.index, l.c + b.dim, l.grading, gens).with_integration(q))
}

/// `C × B` with `c' = c + dim B` and `m' = m + dim B`. Its pairings are
/// tabulated leading terms reproducing the tensor-product differential.
pub fn product_category(fc: &FlowCategoryModel, b: &ProductFactor) -> Result<FlowCategoryModel, FlowError> {
    let qb = b.integration_matrix()?;
    let d = assemble_differential(fc)?;
    let (dhat, _) = twist_differential(&d, &fc.dims())?;
    let fiber_sign: Vec<Rational> = b.generators.iter().map(|x| Rational::sign_power(x.degree)).collect();
    let mut diag = Matrix::zeros(fiber_sign.len(), fiber_sign.len());
    for (i, s) in fiber_sign.into_iter().enumerate() {
        diag[(i, i)] = s;
    }
    let levels: Vec<CatLevel> = fc.levels().map(|l| product_level(l, b, &qb)).collect::<Result<_, _>>()?;
    let cx_levels: Vec<_> = levels.iter().map(CatLevel::to_level).collect();
    let twisted = GradedComplex::from_total(cx_levels, &dhat.total_matrix().kron(&diag))?;
    let dims: BTreeMap<i64, i64> = levels.iter().map(|l| (l.index, l.c)).collect();
    let (dprod, _) = twist_differential(&twisted, &dims)?;

    let by_index: BTreeMap<i64, &CatLevel> = levels.iter().map(|l| (l.index, l)).collect();
    let mut moduli: BTreeMap<(i64, i64), i64> = fc.moduli().iter().map(|(&k, &m)| (k, m + b.dim)).collect();
    let mut table = TabulatedOracle::default();
    let mut level_diff = false;
    for (&(s, k), coef) in dprod.blocks() {
        if coef.is_zero() {
            continue;
        }
        let (src, tgt) = (by_index[&s], by_index[&(s + k)]);
        let e = &tgt.pairing_matrix()?.transpose() * coef;
        if k == 0 {
            level_diff = true;
        } else if !moduli.contains_key(&(s, s + k)) {
            let (Some(gs), Some(gt)) = (src.grading, tgt.grading) else {
                return Err(FlowError::BadModuli { i: s, j: s + k, reason: "ungraded product needs this moduli".into() });
            };
            moduli.insert((s, s + k), gt - gs + tgt.c - 1);
        }
        for (a, ga) in src.generators.iter().enumerate() {
            let sign = if k == 0 { Rational::one() } else { Rational::sign_power(ga.degree * (src.c + 1)) };
            for g in 0..tgt.dim() {
                if !e[(g, a)].is_zero() {
                    table.insert(PairingKey::category(&[s, s + k], a, g), &e[(g, a)] * &sign);
                }
            }
        }
    }
    let model = FlowCategoryModel::new(levels, moduli.into_iter().map(|((i, j), m)| (i, j, m)), Arc::new(table))?;
    Ok(if level_diff { model.with_level_differential() } else { model })
}
