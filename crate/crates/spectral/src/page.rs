use std::collections::BTreeMap;

use flowcat_linalg::{kernel_basis, rank, rref, solve, span_rank, Matrix, Rational};
use serde::Serialize;

use crate::filtered::restrict;
use crate::{FilteredComplex, SpectralError};

#[derive(Debug, Clone, PartialEq)]
pub struct PageLevel {
    pub p: i64,
    /// Basis of `Z^p_r` inside level `p`.
    pub cycles: Vec<Vec<Rational>>,
    /// Basis of `B^p_r` inside level `p`.
    pub boundaries: Vec<Vec<Rational>>,
    /// Cycles completing `boundaries` to a basis of `cycles`; one per
    /// generator of `E^p_r`.
    pub reps: Vec<Vec<Rational>>,
    /// For each rep, a chain in `F_p` with that leading part whose
    /// differential lies in `F_{p+r}`.
    pub witnesses: Option<Vec<Vec<Rational>>>,
}

impl PageLevel {
    pub fn dim(&self) -> usize {
        self.reps.len()
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct SpectralSequencePage {
    pub r: i64,
    pub levels: Vec<PageLevel>,
    /// `∂_r` from level `p` to level `p + r`, keyed by `p`.
    pub differential: BTreeMap<i64, Matrix>,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct PageSummary {
    pub page: i64,
    pub dims: BTreeMap<i64, usize>,
    pub ranks: BTreeMap<i64, usize>,
}

impl SpectralSequencePage {
    pub fn level(&self, p: i64) -> Option<&PageLevel> {
        self.levels.iter().find(|l| l.p == p)
    }

    pub fn dim(&self, p: i64) -> usize {
        self.level(p).map_or(0, PageLevel::dim)
    }

    pub fn dims(&self) -> BTreeMap<i64, usize> {
        self.levels.iter().map(|l| (l.p, l.dim())).collect()
    }

    pub fn summary(&self) -> PageSummary {
        PageSummary {
            page: self.r,
            dims: self.dims(),
            ranks: self.differential.iter().map(|(&p, m)| (p, rank(m))).collect(),
        }
    }
}

fn independent(vs: &[Vec<Rational>], dim: usize) -> Vec<usize> {
    if vs.is_empty() {
        return Vec::new();
    }
    rref(&Matrix::from_columns(vs, dim)).pivots
}

/// Leading parts of chains on levels `p..p+r−1` whose differential vanishes
/// below `p + r`, with the chains themselves.
fn cycles(fc: &FilteredComplex, p: i64, r: i64) -> (Vec<Vec<Rational>>, Vec<Vec<Rational>>) {
    let cols = fc.positions(p, p + r - 1);
    let m = restrict(fc.differential(), &cols, &cols);
    let chains: Vec<Vec<Rational>> = kernel_basis(&m).iter().map(|k| fc.embed(&cols, k)).collect();
    let lead: Vec<Vec<Rational>> = chains.iter().map(|c| fc.part(c, p)).collect();
    let keep = independent(&lead, fc.dim_at(p));
    (keep.iter().map(|&i| lead[i].clone()).collect(), keep.iter().map(|&i| chains[i].clone()).collect())
}

/// Level-`p` parts of `d y` for chains `y` on levels `p−r+1..p` whose
/// differential vanishes below `p`.
fn boundaries(fc: &FilteredComplex, p: i64, r: i64) -> Vec<Vec<Rational>> {
    let cols = fc.positions(p - r + 1, p);
    let below = fc.positions(p - r + 1, p - 1);
    let m = restrict(fc.differential(), &below, &cols);
    let at = fc.positions(p, p);
    let dp = restrict(fc.differential(), &at, &cols);
    let images: Vec<Vec<Rational>> = kernel_basis(&m).iter().map(|k| dp.mul_vec(k)).collect();
    let keep = independent(&images, at.len());
    keep.iter().map(|&i| images[i].clone()).collect()
}

fn page_level(fc: &FilteredComplex, p: i64, r: i64) -> Result<PageLevel, SpectralError> {
    let n = fc.dim_at(p);
    let (z, chains) = cycles(fc, p, r);
    let b = boundaries(fc, p, r);
    let mut span: Vec<Vec<Rational>> = b.clone();
    if span_rank(&[span.clone(), z.clone()].concat(), n) != z.len() {
        return Err(SpectralError::NotInPage { r, p });
    }
    let mut reps = Vec::new();
    let mut witnesses = Vec::new();
    let mut have = span_rank(&span, n);
    for (v, c) in z.iter().zip(&chains) {
        span.push(v.clone());
        let now = span_rank(&span, n);
        if now > have {
            have = now;
            reps.push(v.clone());
            witnesses.push(c.clone());
        } else {
            span.pop();
        }
    }
    Ok(PageLevel { p, cycles: z, boundaries: b, reps, witnesses: Some(witnesses) })
}

/// Coordinates of `w` in the basis `reps ∪ boundaries` of level `q`, keeping
/// only the `reps` part.
fn classify(level: &PageLevel, w: &[Rational], r: i64) -> Result<Vec<Rational>, SpectralError> {
    let n = w.len();
    let basis: Vec<Vec<Rational>> = level.reps.iter().chain(&level.boundaries).cloned().collect();
    if basis.is_empty() {
        return if w.iter().all(Rational::is_zero) {
            Ok(Vec::new())
        } else {
            Err(SpectralError::NotInPage { r, p: level.p })
        };
    }
    let a = Matrix::from_columns(&basis, n);
    let x = solve(&a, &Matrix::from_columns(&[w.to_vec()], n)).map_err(|_| SpectralError::NotInPage { r, p: level.p })?;
    Ok((0..level.reps.len()).map(|i| x[(i, 0)].clone()).collect())
}

/// Matrix of `∂_r: E^p_r → E^{p+r}_r` on the chosen representatives,
/// evaluated through the stored witnesses.
pub fn page_differential(
    fc: &FilteredComplex,
    page: &SpectralSequencePage,
    p: i64,
) -> Result<Matrix, SpectralError> {
    let src = page.level(p).ok_or(SpectralError::WitnessMissing(p))?;
    let witnesses = src.witnesses.as_ref().ok_or(SpectralError::WitnessMissing(p))?;
    let q = p + page.r;
    let Some(dst) = page.level(q) else {
        return Ok(Matrix::zeros(0, src.dim()));
    };
    let mut cols = Vec::new();
    for x in witnesses {
        let dx = fc.differential().mul_vec(x);
        cols.push(classify(dst, &fc.part(&dx, q), page.r)?);
    }
    Ok(Matrix::from_columns(&cols, dst.dim()))
}

fn check_boundaries_map_to_boundaries(fc: &FilteredComplex, page: &SpectralSequencePage, p: i64) -> Result<(), SpectralError> {
    let r = page.r;
    let q = p + r;
    let (Some(src), Some(dst)) = (page.level(p), page.level(q)) else {
        return Ok(());
    };
    let cols = fc.positions(p, p + r - 1);
    let at = fc.positions(p, p);
    let lead = restrict(&Matrix::identity(fc.dim()), &at, &cols);
    let m = restrict(fc.differential(), &cols, &cols);
    let a = lead.vstack(&m)?;
    let n = fc.dim_at(q);
    for b in &src.boundaries {
        let mut rhs = b.clone();
        rhs.extend(std::iter::repeat(Rational::zero()).take(cols.len()));
        let x = solve(&a, &Matrix::from_columns(&[rhs], a.rows()))?;
        let chain = fc.embed(&cols, &x.column(0));
        let w = fc.part(&fc.differential().mul_vec(&chain), q);
        let mut span = dst.boundaries.clone();
        let before = span_rank(&span, n);
        span.push(w);
        if span_rank(&span, n) != before {
            return Err(SpectralError::IllDefined { r, p });
        }
    }
    Ok(())
}

fn build_page(fc: &FilteredComplex, r: i64) -> Result<SpectralSequencePage, SpectralError> {
    if r < 1 {
        return Err(SpectralError::BadPage(r));
    }
    let levels = fc.levels().into_iter().map(|p| page_level(fc, p, r)).collect::<Result<Vec<_>, _>>()?;
    let mut page = SpectralSequencePage { r, levels, differential: BTreeMap::new() };
    for p in fc.levels() {
        let m = page_differential(fc, &page, p)?;
        check_boundaries_map_to_boundaries(fc, &page, p)?;
        page.differential.insert(p, m);
    }
    for (&p, m) in &page.differential {
        if let Some(next) = page.differential.get(&(p + r)) {
            if m.rows() > 0 && !(next * m).is_zero() {
                return Err(SpectralError::SquareNonzero { r, p });
            }
        }
    }
    Ok(page)
}

/// `dim H(E_r, ∂_r)` at every level.
fn homology_dims(page: &SpectralSequencePage) -> BTreeMap<i64, usize> {
    let r = page.r;
    page.levels
        .iter()
        .map(|l| {
            let out = page.differential.get(&l.p).map_or(0, rank);
            let inc = page.differential.get(&(l.p - r)).map_or(0, rank);
            (l.p, l.dim() - out - inc)
        })
        .collect()
}

fn check_next(prev: &SpectralSequencePage, next: &SpectralSequencePage) -> Result<(), SpectralError> {
    for (p, expected) in homology_dims(prev) {
        let found = next.dim(p);
        if found != expected {
            return Err(SpectralError::PageMismatch { r: next.r, p, expected, found });
        }
    }
    Ok(())
}

/// Page `r`, checked against the homology of page `r − 1` when `r ≥ 2`.
pub fn compute_page(fc: &FilteredComplex, r: i64) -> Result<SpectralSequencePage, SpectralError> {
    let page = build_page(fc, r)?;
    if r >= 2 {
        check_next(&build_page(fc, r - 1)?, &page)?;
    }
    Ok(page)
}

/// Pages `1..=span+2`; the last two coincide with `E_∞`.
pub fn spectral_sequence(fc: &FilteredComplex) -> Result<Vec<SpectralSequencePage>, SpectralError> {
    let mut pages: Vec<SpectralSequencePage> = Vec::new();
    for r in 1..=fc.span() + 2 {
        let page = build_page(fc, r)?;
        if let Some(prev) = pages.last() {
            check_next(prev, &page)?;
        }
        pages.push(page);
    }
    Ok(pages)
}
