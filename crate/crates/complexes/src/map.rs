use std::collections::BTreeMap;

use crate::complex::{block_report, split_blocks};
use crate::{ComplexError, GradedComplex, Matrix, Report};

/// Linear map between level-indexed complexes. Block `(s, k)` goes from source
/// level `s` to target level `s + k`; `k` may be negative.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ChainMap {
    pub source: GradedComplex,
    pub target: GradedComplex,
    blocks: BTreeMap<(i64, i64), Matrix>,
}

impl ChainMap {
    pub fn new(source: GradedComplex, target: GradedComplex) -> Self {
        ChainMap { source, target, blocks: BTreeMap::new() }
    }

    pub fn identity(c: &GradedComplex) -> Self {
        let mut f = ChainMap::new(c.clone(), c.clone());
        for l in c.levels() {
            if l.dim() > 0 {
                f.blocks.insert((l.index, 0), Matrix::identity(l.dim()));
            }
        }
        f
    }

    pub fn zero(source: &GradedComplex, target: &GradedComplex) -> Self {
        ChainMap::new(source.clone(), target.clone())
    }

    pub fn set_block(&mut self, s: i64, k: i64, m: Matrix) -> Result<(), ComplexError> {
        let src = self.source.level(s).ok_or(ComplexError::UnknownLevel(s))?.dim();
        let dst = self.target.level(s + k).ok_or(ComplexError::UnknownLevel(s + k))?.dim();
        if m.shape() != (dst, src) {
            return Err(ComplexError::ShapeMismatch { s, k, found: m.shape(), expected: (dst, src) });
        }
        if m.is_zero() {
            self.blocks.remove(&(s, k));
        } else {
            self.blocks.insert((s, k), m);
        }
        Ok(())
    }

    pub fn block(&self, s: i64, k: i64) -> Option<&Matrix> {
        self.blocks.get(&(s, k))
    }

    pub fn block_or_zero(&self, s: i64, k: i64) -> Matrix {
        self.block(s, k)
            .cloned()
            .unwrap_or_else(|| Matrix::zeros(self.target.dim_at(s + k), self.source.dim_at(s)))
    }

    pub fn blocks(&self) -> &BTreeMap<(i64, i64), Matrix> {
        &self.blocks
    }

    pub fn total_matrix(&self) -> Matrix {
        let mut m = Matrix::zeros(self.target.dim(), self.source.dim());
        for (&(s, k), b) in &self.blocks {
            let r = self.target.offset(s + k).expect("target level");
            let c = self.source.offset(s).expect("source level");
            m.add_block(r, c, b);
        }
        m
    }

    pub fn from_total(
        source: GradedComplex,
        target: GradedComplex,
        m: &Matrix,
    ) -> Result<Self, ComplexError> {
        if m.shape() != (target.dim(), source.dim()) {
            return Err(ComplexError::ShapeMismatch {
                s: 0,
                k: 0,
                found: m.shape(),
                expected: (target.dim(), source.dim()),
            });
        }
        let mut f = ChainMap::new(source, target);
        for (s, t, b) in split_blocks(&f.source, &f.target, m) {
            f.blocks.insert((s, t - s), b);
        }
        Ok(f)
    }

    /// `self ∘ rhs`.
    pub fn compose(&self, rhs: &ChainMap) -> Result<ChainMap, ComplexError> {
        if rhs.target.levels() != self.source.levels() {
            return Err(ComplexError::Incompatible("middle complexes differ".into()));
        }
        let m = &self.total_matrix() * &rhs.total_matrix();
        ChainMap::from_total(rhs.source.clone(), self.target.clone(), &m)
    }

    pub fn difference(&self, rhs: &ChainMap) -> Result<ChainMap, ComplexError> {
        self.check_parallel(rhs)?;
        let m = &self.total_matrix() - &rhs.total_matrix();
        ChainMap::from_total(self.source.clone(), self.target.clone(), &m)
    }

    pub fn sum(&self, rhs: &ChainMap) -> Result<ChainMap, ComplexError> {
        self.check_parallel(rhs)?;
        let m = &self.total_matrix() + &rhs.total_matrix();
        ChainMap::from_total(self.source.clone(), self.target.clone(), &m)
    }

    fn check_parallel(&self, rhs: &ChainMap) -> Result<(), ComplexError> {
        if self.source.levels() != rhs.source.levels() || self.target.levels() != rhs.target.levels() {
            return Err(ComplexError::Incompatible("maps have different endpoints".into()));
        }
        Ok(())
    }

    /// Blockwise check of `φ∘d − d∘φ = 0`.
    pub fn verify_chain_map(&self) -> Report {
        let f = self.total_matrix();
        let lhs = &f * &self.source.total_matrix();
        let rhs = &self.target.total_matrix() * &f;
        block_report("φ∘d − d∘φ = 0", &self.source, &self.target, &(&lhs - &rhs))
    }

    /// Identity on every level plus blocks that strictly raise the level.
    pub fn is_unitriangular(&self) -> bool {
        if self.source.levels() != self.target.levels() {
            return false;
        }
        let diag_ok = self.source.levels().iter().all(|l| {
            l.dim() == 0 || self.block(l.index, 0).is_some_and(Matrix::is_identity)
        });
        diag_ok && self.blocks.keys().all(|&(_, k)| k >= 0)
    }

    pub fn is_identity(&self) -> bool {
        self.is_unitriangular() && self.blocks.keys().all(|&(_, k)| k == 0)
    }
}

/// Operator `h` with the defining identity `d∘h + h∘d = f − g`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Homotopy {
    pub f: ChainMap,
    pub g: ChainMap,
    pub op: ChainMap,
}

impl Homotopy {
    pub fn new(f: ChainMap, g: ChainMap, op: ChainMap) -> Result<Self, ComplexError> {
        f.check_parallel(&g)?;
        f.check_parallel(&op)?;
        Ok(Homotopy { f, g, op })
    }

    pub fn zero(f: ChainMap, g: ChainMap) -> Result<Self, ComplexError> {
        let op = ChainMap::zero(&f.source, &f.target);
        Homotopy::new(f, g, op)
    }

    pub fn verify_chain_homotopy(&self) -> Report {
        let h = self.op.total_matrix();
        let dh = &self.op.target.total_matrix() * &h;
        let hd = &h * &self.op.source.total_matrix();
        let fg = &self.f.total_matrix() - &self.g.total_matrix();
        let residual = &(&dh + &hd) - &fg;
        block_report("d∘h + h∘d − (f − g) = 0", &self.op.source, &self.op.target, &residual)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::{Generator, Level};

    fn interval() -> GradedComplex {
        let mut c = GradedComplex::new(vec![
            Level::new(0, Some(0), vec![Generator::new("a", 0)]),
            Level::new(1, Some(1), vec![Generator::new("b", 0)]),
        ]);
        c.set_block(0, 1, Matrix::from_i64(&[&[1]])).unwrap();
        c
    }

    #[test]
    fn identity_is_chain_map() {
        let c = interval();
        assert!(ChainMap::identity(&c).verify_chain_map().is_empty());
        assert!(ChainMap::identity(&c).is_unitriangular());
    }

    #[test]
    fn perturbed_entry_fails() {
        let c = interval();
        let mut f = ChainMap::identity(&c);
        f.set_block(1, 0, Matrix::from_i64(&[&[2]])).unwrap();
        assert!(!f.verify_chain_map().is_empty());
    }

    #[test]
    fn homotopy_examples() {
        let c = interval();
        let id = ChainMap::identity(&c);
        assert!(Homotopy::zero(id.clone(), id.clone()).unwrap().verify_chain_homotopy().is_empty());
        let zero = ChainMap::zero(&c, &c);
        assert!(!Homotopy::zero(id.clone(), zero.clone()).unwrap().verify_chain_homotopy().is_empty());
        // The interval is contractible: h = d^{-1} from level 1 back to level 0.
        let mut h = ChainMap::zero(&c, &c);
        h.set_block(1, -1, Matrix::from_i64(&[&[1]])).unwrap();
        assert!(Homotopy::new(id, zero, h).unwrap().verify_chain_homotopy().is_empty());
    }
}
