use flowcat_complexes::GradedComplex;
use flowcat_linalg::{Matrix, Rational};

use crate::SpectralError;

/// A complex whose blocks never lower the level.
#[derive(Debug, Clone)]
pub struct FilteredComplex {
    complex: GradedComplex,
    d: Matrix,
}

impl FilteredComplex {
    pub fn new(complex: GradedComplex) -> Result<Self, SpectralError> {
        let low: Vec<(i64, i64)> =
            complex.blocks().iter().filter(|(&(_, k), m)| k < 0 && !m.is_zero()).map(|(&b, _)| b).collect();
        if !low.is_empty() {
            return Err(SpectralError::NotFiltered(low));
        }
        let rep = complex.verify_d_squared();
        if !rep.is_empty() {
            return Err(SpectralError::NotAComplex(rep.blocks()));
        }
        let d = complex.total_matrix();
        Ok(FilteredComplex { complex, d })
    }

    pub fn complex(&self) -> &GradedComplex {
        &self.complex
    }

    pub fn differential(&self) -> &Matrix {
        &self.d
    }

    pub fn levels(&self) -> Vec<i64> {
        self.complex.level_indices()
    }

    /// `max − min` level index; every page past this one is `E_∞`.
    pub fn span(&self) -> i64 {
        let l = self.levels();
        match (l.first(), l.last()) {
            (Some(a), Some(b)) => b - a,
            _ => 0,
        }
    }

    pub fn dim(&self) -> usize {
        self.complex.dim()
    }

    pub fn dim_at(&self, p: i64) -> usize {
        self.complex.dim_at(p)
    }

    /// Basis positions of the levels in `lo..=hi`.
    pub(crate) fn positions(&self, lo: i64, hi: i64) -> Vec<usize> {
        let mut out = Vec::new();
        for l in self.complex.levels() {
            if l.index >= lo && l.index <= hi {
                let off = self.complex.offset(l.index).unwrap();
                out.extend(off..off + l.dim());
            }
        }
        out
    }

    /// Coordinates of `v` on level `p`.
    pub(crate) fn part(&self, v: &[Rational], p: i64) -> Vec<Rational> {
        self.positions(p, p).into_iter().map(|i| v[i].clone()).collect()
    }

    /// Embed a vector over `pos` into the whole basis.
    pub(crate) fn embed(&self, pos: &[usize], v: &[Rational]) -> Vec<Rational> {
        let mut out = vec![Rational::zero(); self.dim()];
        for (&i, x) in pos.iter().zip(v) {
            out[i] = x.clone();
        }
        out
    }
}

pub(crate) fn restrict(m: &Matrix, rows: &[usize], cols: &[usize]) -> Matrix {
    let mut out = Matrix::zeros(rows.len(), cols.len());
    for (i, &r) in rows.iter().enumerate() {
        for (j, &c) in cols.iter().enumerate() {
            out[(i, j)] = m[(r, c)].clone();
        }
    }
    out
}
