use std::collections::BTreeMap;

use flowcat_complexes::{mapping_cone_filtered, ChainMap};
use flowcat_linalg::{kernel_basis, rank, Matrix, Rational};
use serde::Serialize;

use crate::filtered::restrict;
use crate::page::{compute_page, SpectralSequencePage};
use crate::{FilteredComplex, SpectralError};

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct GradedRow {
    pub p: i64,
    pub e_infinity: usize,
    pub graded: usize,
}

/// `dim F_p H = dim(ker d ∩ F_p) − dim(im d ∩ F_p)`.
fn filtered_cohomology(fc: &FilteredComplex, p: i64) -> usize {
    let d = fc.differential();
    let n = fc.dim();
    let all: Vec<usize> = (0..n).collect();
    let above = fc.positions(p, i64::MAX);
    let below = fc.positions(i64::MIN, p - 1);
    let cycles = kernel_basis(&restrict(d, &all, &above)).len();
    let chains = kernel_basis(&restrict(d, &below, &all));
    let boundaries = if chains.is_empty() { 0 } else { rank(&(d * &Matrix::from_columns(&chains, n))) };
    cycles - boundaries
}

/// Rows where `dim E^p_∞` and `dim F_pH/F_{p+1}H` disagree; empty when the
/// sequence converges to the graded cohomology.
pub fn e_infinity_vs_graded(fc: &FilteredComplex) -> Result<Vec<GradedRow>, SpectralError> {
    let page = compute_page(fc, fc.span() + 1)?;
    let levels = fc.levels();
    let mut rows = Vec::new();
    for (i, &p) in levels.iter().enumerate() {
        let next = levels.get(i + 1).map_or(0, |&q| filtered_cohomology(fc, q));
        let graded = filtered_cohomology(fc, p) - next;
        let e_infinity = page.dim(p);
        if graded != e_infinity {
            rows.push(GradedRow { p, e_infinity, graded });
        }
    }
    Ok(rows)
}

/// Coordinates of `w` on `E^p_1` modulo boundaries.
fn e1_coordinates(page: &SpectralSequencePage, p: i64, w: &[Rational]) -> Result<Vec<Rational>, SpectralError> {
    let level = page.level(p).ok_or(SpectralError::NotInPage { r: 1, p })?;
    let basis: Vec<Vec<Rational>> = level.reps.iter().chain(&level.boundaries).cloned().collect();
    if basis.is_empty() {
        return if w.iter().all(Rational::is_zero) { Ok(Vec::new()) } else { Err(SpectralError::NotInPage { r: 1, p }) };
    }
    let x = flowcat_linalg::solve(&Matrix::from_columns(&basis, w.len()), &Matrix::from_columns(&[w.to_vec()], w.len()))
        .map_err(|_| SpectralError::NotInPage { r: 1, p })?;
    Ok((0..level.reps.len()).map(|i| x[(i, 0)].clone()).collect())
}

/// The map `E_1(source) → E_1(target)` of a level-preserving-or-raising chain
/// map, one matrix per level, checked to commute with `∂_1`.
pub fn induced_e1(f: &ChainMap) -> Result<BTreeMap<i64, Matrix>, SpectralError> {
    let low: Vec<(i64, i64)> = f.blocks().iter().filter(|(&(_, k), m)| k < 0 && !m.is_zero()).map(|(&b, _)| b).collect();
    if !low.is_empty() {
        return Err(SpectralError::NotFiltered(low));
    }
    let a = FilteredComplex::new(f.source.clone())?;
    let b = FilteredComplex::new(f.target.clone())?;
    let (pa, pb) = (compute_page(&a, 1)?, compute_page(&b, 1)?);
    let mut out = BTreeMap::new();
    for l in &pa.levels {
        let block = f.block_or_zero(l.p, 0);
        let cols = l.reps.iter().map(|v| e1_coordinates(&pb, l.p, &block.mul_vec(v))).collect::<Result<Vec<_>, _>>()?;
        out.insert(l.p, Matrix::from_columns(&cols, pb.dim(l.p)));
    }
    for (&p, m) in &out {
        let (Some(da), Some(db)) = (pa.differential.get(&p), pb.differential.get(&p)) else { continue };
        let Some(next) = out.get(&(p + 1)) else { continue };
        if &(db * m) != &(next * da) {
            return Err(SpectralError::NotInPage { r: 1, p });
        }
    }
    Ok(out)
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct ConeRow {
    pub level: i64,
    pub cone_dim: usize,
    pub expected_dim: usize,
    pub cone_rank: usize,
    pub expected_rank: usize,
}

impl ConeRow {
    pub fn agrees(&self) -> bool {
        self.cone_dim == self.expected_dim && self.cone_rank == self.expected_rank
    }
}

/// Compare `E_1` of the cone of `f` (with `A`'s level `L + 1` placed at
/// level `L`) against the cone of the `E_1` maps, level by level, by
/// dimension and rank of `∂_1`. Equal dimensions and ranks make the two
/// complexes isomorphic.
pub fn cone_e1_comparison(f: &ChainMap) -> Result<Vec<ConeRow>, SpectralError> {
    let fe = induced_e1(f)?;
    let a = FilteredComplex::new(f.source.clone())?;
    let b = FilteredComplex::new(f.target.clone())?;
    let (pa, pb) = (compute_page(&a, 1)?, compute_page(&b, 1)?);
    let cone = FilteredComplex::new(mapping_cone_filtered(f, 1)?)?;
    let pc = compute_page(&cone, 1)?;

    let dim = |l: i64| pb.dim(l) + pa.dim(l + 1);
    let mut rows = Vec::new();
    for l in cone.levels() {
        let (rows_n, cols_n) = (dim(l + 1), dim(l));
        let mut m = Matrix::zeros(rows_n, cols_n);
        let (bl, bn, al, an) = (pb.dim(l), pb.dim(l + 1), pa.dim(l + 1), pa.dim(l + 2));
        if let Some(d) = pb.differential.get(&l).filter(|d| d.rows() == bn && bn > 0) {
            m.set_block(0, 0, d);
        }
        if let Some(g) = fe.get(&(l + 1)).filter(|g| g.rows() == bn && g.cols() == al && bn * al > 0) {
            m.set_block(0, bl, g);
        }
        if let Some(d) = pa.differential.get(&(l + 1)).filter(|d| d.rows() == an && an > 0) {
            m.set_block(bn, bl, &-d);
        }
        let expected_rank = if rows_n * cols_n == 0 { 0 } else { rank(&m) };
        let cone_rank = pc.differential.get(&l).map_or(0, rank);
        rows.push(ConeRow { level: l, cone_dim: pc.dim(l), expected_dim: dim(l), cone_rank, expected_rank });
    }
    Ok(rows)
}
