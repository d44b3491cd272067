use std::collections::BTreeMap;
use std::fmt;
use std::sync::Arc;

use flowcat_complexes::{GradedComplex, Generator, Level};
use flowcat_linalg::{inverse, Matrix, Rational};
use flowcat_oracles::PairingOracle;

use crate::FlowError;

/// One critical manifold together with its reduction basis.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct CatLevel {
    pub index: i64,
    pub c: i64,
    pub grading: Option<i64>,
    pub generators: Vec<Generator>,
    /// Integration matrix `∫ θ_b ∧ θ_g`; derived when absent.
    pub integration: Option<Matrix>,
}

impl CatLevel {
    pub fn new(index: i64, c: i64, grading: Option<i64>, generators: Vec<Generator>) -> Self {
        CatLevel { index, c, grading, generators, integration: None }
    }

    pub fn points(index: i64, grading: Option<i64>, labels: &[&str]) -> Self {
        CatLevel::new(index, 0, grading, labels.iter().map(|l| Generator::new(*l, 0)).collect())
    }

    pub fn with_integration(mut self, m: Matrix) -> Self {
        self.integration = Some(m);
        self
    }

    pub fn dim(&self) -> usize {
        self.generators.len()
    }

    pub fn degrees(&self) -> Vec<i64> {
        self.generators.iter().map(|g| g.degree).collect()
    }

    /// `∫ θ_b ∧ θ_g`. Point levels integrate to the identity. Otherwise each
    /// degree must carry one generator with a partner in the complementary
    /// degree, oriented so that the lower degree comes first.
    pub fn integration_matrix(&self) -> Result<Matrix, FlowError> {
        if let Some(m) = &self.integration {
            return Ok(m.clone());
        }
        let n = self.dim();
        if self.c == 0 {
            return Ok(Matrix::identity(n));
        }
        let mut by_degree: BTreeMap<i64, Vec<usize>> = BTreeMap::new();
        for (i, g) in self.generators.iter().enumerate() {
            by_degree.entry(g.degree).or_default().push(i);
        }
        let mut q = Matrix::zeros(n, n);
        for (&p, idx) in &by_degree {
            let partner = by_degree.get(&(self.c - p));
            match (idx.as_slice(), partner.map(Vec::as_slice)) {
                ([a], Some([b])) if 2 * p != self.c => {
                    q[(*a, *b)] = if p < self.c - p { Rational::one() } else { Rational::sign_power(p * (self.c - p)) };
                }
                _ => return Err(FlowError::MissingPairingMatrix(self.index)),
            }
        }
        Ok(q)
    }

    /// `⟨θ_b, θ_g⟩ = (−1)^{c|θ_g|} ∫ θ_b ∧ θ_g`.
    pub fn pairing_matrix(&self) -> Result<Matrix, FlowError> {
        let mut p = self.integration_matrix()?;
        for g in 0..self.dim() {
            let s = Rational::sign_power(self.c * self.generators[g].degree);
            for b in 0..self.dim() {
                p[(b, g)] = &p[(b, g)] * &s;
            }
        }
        Ok(p)
    }

    /// Columns are the dual basis `θ*_a` in the coordinates of `θ`; also the
    /// matrix turning pairings against `θ` into coefficients.
    pub fn dual_coordinates(&self) -> Result<Matrix, FlowError> {
        if self.dim() == 0 {
            return Ok(Matrix::zeros(0, 0));
        }
        Ok(inverse(&self.pairing_matrix()?)?.transpose())
    }

    pub fn to_level(&self) -> Level {
        Level::new(self.index, self.grading, self.generators.clone())
    }
}

/// Basis and dual basis of one level, with `⟨θ*_a, θ_b⟩ = δ_ab`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ReductionModel {
    pub labels: Vec<String>,
    pub degrees: Vec<i64>,
    pub dual: Matrix,
    pub pairing: Matrix,
}

impl ReductionModel {
    pub fn from_level(l: &CatLevel) -> Result<Self, FlowError> {
        Ok(ReductionModel {
            labels: l.generators.iter().map(|g| g.label.clone()).collect(),
            degrees: l.degrees(),
            dual: l.dual_coordinates()?,
            pairing: l.pairing_matrix()?,
        })
    }

    /// `⟨θ*_a, θ_b⟩` as a matrix indexed by `(a, b)`.
    pub fn dual_pairing(&self) -> Matrix {
        &self.dual.transpose() * &self.pairing
    }

    pub fn verify(&self) -> bool {
        self.dual_pairing().is_identity()
    }
}

#[derive(Clone)]
pub struct FlowCategoryModel {
    levels: BTreeMap<i64, CatLevel>,
    moduli: BTreeMap<(i64, i64), i64>,
    oracle: Arc<dyn PairingOracle>,
    level_differential: bool,
}

impl fmt::Debug for FlowCategoryModel {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("FlowCategoryModel")
            .field("levels", &self.levels.values().collect::<Vec<_>>())
            .field("moduli", &self.moduli)
            .field("level_differential", &self.level_differential)
            .finish()
    }
}

impl FlowCategoryModel {
    pub fn new(
        levels: Vec<CatLevel>,
        moduli: impl IntoIterator<Item = (i64, i64, i64)>,
        oracle: Arc<dyn PairingOracle>,
    ) -> Result<Self, FlowError> {
        let levels: BTreeMap<i64, CatLevel> = levels.into_iter().map(|l| (l.index, l)).collect();
        for l in levels.values() {
            if l.c < 0 {
                return Err(FlowError::MissingDimension(format!("level {}", l.index)));
            }
            for g in &l.generators {
                if g.degree < 0 || g.degree > l.c {
                    return Err(FlowError::BadGenerator {
                        level: l.index,
                        label: g.label.clone(),
                        degree: g.degree,
                        c: l.c,
                    });
                }
            }
        }
        let mut map = BTreeMap::new();
        for (i, j, m) in moduli {
            let reason = if i >= j {
                Some("source level must be below target level".to_string())
            } else if !levels.contains_key(&i) || !levels.contains_key(&j) {
                Some("unknown level".to_string())
            } else if m < 0 {
                Some(format!("negative dimension {m}"))
            } else {
                None
            };
            if let Some(reason) = reason {
                return Err(FlowError::BadModuli { i, j, reason });
            }
            map.insert((i, j), m);
        }
        let model = FlowCategoryModel { levels, moduli: map, oracle, level_differential: false };
        model.validate()?;
        Ok(model)
    }

    fn validate(&self) -> Result<(), FlowError> {
        for (&(i, j), &mij) in &self.moduli {
            for (&(j2, k), &mjk) in self.moduli.range((j, i64::MIN)..) {
                if j2 != j {
                    break;
                }
                if let Some(&mik) = self.moduli.get(&(i, k)) {
                    let expected = mij + mjk - self.levels[&j].c + 1;
                    if mik != expected {
                        return Err(FlowError::DimensionRelation { i, j, k, found: mik, expected });
                    }
                }
            }
            if let (Some(di), Some(dj)) = (self.levels[&i].grading, self.levels[&j].grading) {
                let expected = dj - di + self.levels[&j].c - 1;
                if mij != expected {
                    return Err(FlowError::GradingRelation { i, j, found: mij, expected });
                }
            }
        }
        Ok(())
    }

    /// Marks the model as carrying level-preserving differentials, read from
    /// category pairings keyed by `[s, s]` as `⟨d θ_a, θ_g⟩`.
    pub fn with_level_differential(mut self) -> Self {
        self.level_differential = true;
        self
    }

    pub fn has_level_differential(&self) -> bool {
        self.level_differential
    }

    pub fn with_oracle(&self, oracle: Arc<dyn PairingOracle>) -> Self {
        FlowCategoryModel { oracle, ..self.clone() }
    }

    pub fn levels(&self) -> impl Iterator<Item = &CatLevel> {
        self.levels.values()
    }

    pub fn level(&self, i: i64) -> Option<&CatLevel> {
        self.levels.get(&i)
    }

    pub fn level_indices(&self) -> Vec<i64> {
        self.levels.keys().copied().collect()
    }

    pub fn dims(&self) -> BTreeMap<i64, i64> {
        self.levels.values().map(|l| (l.index, l.c)).collect()
    }

    pub fn moduli(&self) -> &BTreeMap<(i64, i64), i64> {
        &self.moduli
    }

    pub fn moduli_dim(&self, i: i64, j: i64) -> Option<i64> {
        self.moduli.get(&(i, j)).copied()
    }

    pub fn oracle(&self) -> &Arc<dyn PairingOracle> {
        &self.oracle
    }

    pub fn is_graded(&self) -> bool {
        self.levels.values().all(|l| l.grading.is_some())
    }

    pub fn is_morse(&self) -> bool {
        self.levels.values().all(|l| l.c == 0)
    }

    /// Same levels, dimensions, generators and moduli; oracles may differ.
    pub fn same_shape(&self, other: &FlowCategoryModel) -> bool {
        self.moduli == other.moduli
            && self.levels.len() == other.levels.len()
            && self.levels.values().zip(other.levels.values()).all(|(a, b)| {
                a.index == b.index && a.c == b.c && a.grading == b.grading && a.degrees() == b.degrees()
            })
    }

    pub fn complex_levels(&self) -> Vec<Level> {
        self.levels.values().map(CatLevel::to_level).collect()
    }

    pub fn empty_complex(&self) -> GradedComplex {
        GradedComplex::new(self.complex_levels())
    }

    /// Keeps the listed levels and the moduli between them.
    pub fn restrict(&self, keep: impl Fn(i64) -> bool) -> FlowCategoryModel {
        FlowCategoryModel {
            levels: self.levels.iter().filter(|(i, _)| keep(**i)).map(|(i, l)| (*i, l.clone())).collect(),
            moduli: self.moduli.iter().filter(|((i, j), _)| keep(*i) && keep(*j)).map(|(k, v)| (*k, *v)).collect(),
            oracle: self.oracle.clone(),
            level_differential: self.level_differential,
        }
    }
}
