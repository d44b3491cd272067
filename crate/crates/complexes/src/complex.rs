use std::collections::BTreeMap;

use serde::{Deserialize, Serialize};

use crate::{ComplexError, Matrix, Report};

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Generator {
    pub label: String,
    /// Form degree; the total degree adds the level grading when present.
    pub degree: i64,
}

impl Generator {
    pub fn new(label: impl Into<String>, degree: i64) -> Self {
        Generator { label: label.into(), degree }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Level {
    pub index: i64,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub grading: Option<i64>,
    pub generators: Vec<Generator>,
}

impl Level {
    pub fn new(index: i64, grading: Option<i64>, generators: Vec<Generator>) -> Self {
        Level { index, grading, generators }
    }

    pub fn dim(&self) -> usize {
        self.generators.len()
    }
}

/// A cochain complex split into levels. Block `(s, k)` is the matrix of
/// `d_k` from level `s` to level `s + k`; absent blocks are zero.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(try_from = "ComplexRepr", into = "ComplexRepr")]
pub struct GradedComplex {
    levels: Vec<Level>,
    blocks: BTreeMap<(i64, i64), Matrix>,
}

#[derive(Serialize, Deserialize)]
struct BlockRepr {
    s: i64,
    k: i64,
    matrix: Matrix,
}

#[derive(Serialize, Deserialize)]
struct ComplexRepr {
    levels: Vec<Level>,
    blocks: Vec<BlockRepr>,
}

impl From<GradedComplex> for ComplexRepr {
    fn from(c: GradedComplex) -> Self {
        let blocks =
            c.blocks.into_iter().map(|((s, k), matrix)| BlockRepr { s, k, matrix }).collect();
        ComplexRepr { levels: c.levels, blocks }
    }
}

impl TryFrom<ComplexRepr> for GradedComplex {
    type Error = ComplexError;
    fn try_from(r: ComplexRepr) -> Result<Self, ComplexError> {
        let mut c = GradedComplex::new(r.levels);
        for b in r.blocks {
            c.set_block(b.s, b.k, b.matrix)?;
        }
        Ok(c)
    }
}

impl GradedComplex {
    /// Levels are sorted by index; duplicate indices are a programming error.
    pub fn new(mut levels: Vec<Level>) -> Self {
        levels.sort_by_key(|l| l.index);
        for w in levels.windows(2) {
            assert!(w[0].index != w[1].index, "duplicate level {}", w[0].index);
        }
        GradedComplex { levels, blocks: BTreeMap::new() }
    }

    pub fn zero() -> Self {
        GradedComplex::new(Vec::new())
    }

    pub fn levels(&self) -> &[Level] {
        &self.levels
    }

    pub fn level(&self, s: i64) -> Option<&Level> {
        self.levels.iter().find(|l| l.index == s)
    }

    pub fn level_indices(&self) -> Vec<i64> {
        self.levels.iter().map(|l| l.index).collect()
    }

    pub fn dim_at(&self, s: i64) -> usize {
        self.level(s).map_or(0, Level::dim)
    }

    pub fn dim(&self) -> usize {
        self.levels.iter().map(Level::dim).sum()
    }

    /// Position of level `s`'s first generator in the flattened basis.
    pub fn offset(&self, s: i64) -> Option<usize> {
        let mut off = 0;
        for l in &self.levels {
            if l.index == s {
                return Some(off);
            }
            off += l.dim();
        }
        None
    }

    pub fn set_block(&mut self, s: i64, k: i64, m: Matrix) -> Result<(), ComplexError> {
        let src = self.level(s).ok_or(ComplexError::UnknownLevel(s))?.dim();
        let dst = self.level(s + k).ok_or(ComplexError::UnknownLevel(s + k))?.dim();
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

    /// The block, or a zero matrix of the right shape.
    pub fn block_or_zero(&self, s: i64, k: i64) -> Matrix {
        self.block(s, k).cloned().unwrap_or_else(|| Matrix::zeros(self.dim_at(s + k), self.dim_at(s)))
    }

    pub fn blocks(&self) -> &BTreeMap<(i64, i64), Matrix> {
        &self.blocks
    }

    /// True when every stored block has `k >= 1`.
    pub fn is_filtered(&self) -> bool {
        self.blocks.keys().all(|&(_, k)| k >= 1)
    }

    pub fn is_graded(&self) -> bool {
        self.levels.iter().all(|l| l.grading.is_some())
    }

    /// Total degrees of the flattened basis, or `None` if some level is
    /// ungraded.
    pub fn degrees(&self) -> Option<Vec<i64>> {
        let mut out = Vec::with_capacity(self.dim());
        for l in &self.levels {
            let g = l.grading?;
            out.extend(l.generators.iter().map(|x| x.degree + g));
        }
        Some(out)
    }

    /// Form degrees of the flattened basis.
    pub fn form_degrees(&self) -> Vec<i64> {
        self.levels.iter().flat_map(|l| l.generators.iter().map(|g| g.degree)).collect()
    }

    /// Level index of each flattened basis element.
    pub fn level_of_basis(&self) -> Vec<i64> {
        self.levels.iter().flat_map(|l| std::iter::repeat(l.index).take(l.dim())).collect()
    }

    /// The full differential on the flattened basis.
    pub fn total_matrix(&self) -> Matrix {
        let n = self.dim();
        let mut d = Matrix::zeros(n, n);
        for (&(s, k), m) in &self.blocks {
            let r = self.offset(s + k).expect("block target level");
            let c = self.offset(s).expect("block source level");
            d.add_block(r, c, m);
        }
        d
    }

    /// Builds a complex with the given levels from a flattened differential,
    /// keeping only the nonzero blocks.
    pub fn from_total(levels: Vec<Level>, d: &Matrix) -> Result<Self, ComplexError> {
        let mut c = GradedComplex::new(levels);
        let n = c.dim();
        if d.shape() != (n, n) {
            return Err(ComplexError::ShapeMismatch { s: 0, k: 0, found: d.shape(), expected: (n, n) });
        }
        for (s, t, block) in split_blocks(&c, &c, d) {
            c.set_block(s, t - s, block)?;
        }
        Ok(c)
    }

    /// Blockwise check of `Σ_i d_{k-i} d_i = 0`.
    pub fn verify_d_squared(&self) -> Report {
        let d = self.total_matrix();
        let dd = &d * &d;
        block_report("d∘d = 0", self, self, &dd)
    }

    /// Blocks containing an entry that does not raise total degree by one.
    pub fn verify_degrees(&self) -> Result<Report, ComplexError> {
        let deg = self.degrees().ok_or(ComplexError::Ungraded)?;
        let mut rep = Report::new("deg d = 1");
        let lv = self.level_of_basis();
        let d = self.total_matrix();
        let mut bad: BTreeMap<(i64, i64), usize> = BTreeMap::new();
        for i in 0..d.rows() {
            for j in 0..d.cols() {
                if !d[(i, j)].is_zero() && deg[i] != deg[j] + 1 {
                    *bad.entry((lv[j], lv[i] - lv[j])).or_default() += 1;
                }
            }
        }
        for ((s, k), n) in bad {
            rep.failures.push(crate::BlockFailure { s, k, nonzero_entries: n });
        }
        Ok(rep)
    }

    /// Restriction to the levels accepted by `keep`, with the blocks between
    /// them.
    pub fn restrict_levels(&self, keep: impl Fn(i64) -> bool) -> GradedComplex {
        let levels = self.levels.iter().filter(|l| keep(l.index)).cloned().collect();
        let mut c = GradedComplex::new(levels);
        for (&(s, k), m) in &self.blocks {
            if keep(s) && keep(s + k) {
                c.blocks.insert((s, k), m.clone());
            }
        }
        c
    }
}

/// Splits a flattened matrix from `src` to `dst` into nonzero level blocks
/// `(source level, target level, block)`.
pub(crate) fn split_blocks(
    src: &GradedComplex,
    dst: &GradedComplex,
    m: &Matrix,
) -> Vec<(i64, i64, Matrix)> {
    let mut out = Vec::new();
    let mut c0 = 0;
    for ls in src.levels() {
        let mut r0 = 0;
        for lt in dst.levels() {
            if ls.dim() > 0 && lt.dim() > 0 {
                let b = m.submatrix(r0, c0, lt.dim(), ls.dim());
                if !b.is_zero() {
                    out.push((ls.index, lt.index, b));
                }
            }
            r0 += lt.dim();
        }
        c0 += ls.dim();
    }
    out
}

pub(crate) fn block_report(
    check: &str,
    src: &GradedComplex,
    dst: &GradedComplex,
    m: &Matrix,
) -> Report {
    let mut rep = Report::new(check);
    for (s, t, b) in split_blocks(src, dst, m) {
        rep.failures.push(crate::BlockFailure { s, k: t - s, nonzero_entries: b.nonzero_count() });
    }
    rep
}

#[cfg(test)]
mod tests {
    use super::*;

    fn pt(index: i64, grading: i64) -> Level {
        Level::new(index, Some(grading), vec![Generator::new(format!("x{index}"), 0)])
    }

    #[test]
    fn zero_blocks_pass() {
        let c = GradedComplex::new(vec![pt(0, 0), pt(1, 1)]);
        assert!(c.verify_d_squared().is_empty());
    }

    #[test]
    fn nonzero_square_is_reported() {
        let mut c = GradedComplex::new(vec![pt(0, 0), pt(1, 1), pt(2, 2)]);
        c.set_block(0, 1, Matrix::from_i64(&[&[1]])).unwrap();
        c.set_block(1, 1, Matrix::from_i64(&[&[1]])).unwrap();
        assert_eq!(c.verify_d_squared().blocks(), vec![(0, 2)]);
    }

    #[test]
    fn shape_is_checked() {
        let mut c = GradedComplex::new(vec![pt(0, 0), pt(1, 1)]);
        let e = c.set_block(0, 1, Matrix::zeros(2, 1)).unwrap_err();
        assert!(matches!(e, ComplexError::ShapeMismatch { s: 0, k: 1, .. }));
        assert_eq!(c.set_block(0, 5, Matrix::zeros(1, 1)), Err(ComplexError::UnknownLevel(5)));
    }

    #[test]
    fn degree_check() {
        let mut c = GradedComplex::new(vec![pt(0, 0), pt(1, 2)]);
        c.set_block(0, 1, Matrix::from_i64(&[&[3]])).unwrap();
        assert_eq!(c.verify_degrees().unwrap().blocks(), vec![(0, 1)]);
    }

    #[test]
    fn json_round_trip() {
        let mut c = GradedComplex::new(vec![pt(0, 0), pt(1, 1)]);
        c.set_block(0, 1, Matrix::from_i64(&[&[2]])).unwrap();
        let s = serde_json::to_string(&c).unwrap();
        let back: GradedComplex = serde_json::from_str(&s).unwrap();
        assert_eq!(back, c);
    }

    #[test]
    fn total_round_trip() {
        let mut c = GradedComplex::new(vec![pt(0, 0), pt(1, 1), pt(2, 2)]);
        c.set_block(0, 2, Matrix::from_i64(&[&[5]])).unwrap();
        let d = c.total_matrix();
        assert_eq!(GradedComplex::from_total(c.levels().to_vec(), &d).unwrap(), c);
    }
}
