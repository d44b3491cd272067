use std::collections::{BTreeMap, BTreeSet};

use flowcat_linalg::{rref, solve};
use serde::Serialize;

use crate::cohomology::{cohomology_betti, induced_rank, Betti};
use crate::{ChainMap, ComplexError, GradedComplex, Generator, Level, Matrix};

/// Cone of `f: A -> B` with differential `[[d_B, f], [0, −d_A]]` on `B ⊕ A[1]`.
pub fn mapping_cone(f: &ChainMap) -> Result<GradedComplex, ComplexError> {
    mapping_cone_filtered(f, 0)
}

/// Cone whose level `L` holds `B`'s level `L` and `A`'s level `L + r`.
pub fn mapping_cone_filtered(f: &ChainMap, r: i64) -> Result<GradedComplex, ComplexError> {
    let a = &f.source;
    let b = &f.target;
    let graded = a.is_graded() && b.is_graded();
    let idx: BTreeSet<i64> = b
        .level_indices()
        .into_iter()
        .chain(a.level_indices().into_iter().map(|s| s - r))
        .collect();

    let mut levels = Vec::new();
    let mut pos_b = vec![0; b.dim()];
    let mut pos_a = vec![0; a.dim()];
    let mut next = 0;
    for &l in &idx {
        let mut gens = Vec::new();
        if let (Some(lv), Some(off)) = (b.level(l), b.offset(l)) {
            for (i, g) in lv.generators.iter().enumerate() {
                let deg = g.degree + if graded { lv.grading.unwrap() } else { 0 };
                gens.push(Generator::new(format!("B:{}", g.label), deg));
                pos_b[off + i] = next;
                next += 1;
            }
        }
        if let (Some(lv), Some(off)) = (a.level(l + r), a.offset(l + r)) {
            for (i, g) in lv.generators.iter().enumerate() {
                let deg = g.degree - 1 + if graded { lv.grading.unwrap() } else { 0 };
                gens.push(Generator::new(format!("A:{}", g.label), deg));
                pos_a[off + i] = next;
                next += 1;
            }
        }
        levels.push(Level::new(l, graded.then_some(0), gens));
    }

    let n = next;
    let mut d = Matrix::zeros(n, n);
    let db = b.total_matrix();
    let da = a.total_matrix();
    let fm = f.total_matrix();
    for i in 0..b.dim() {
        for j in 0..b.dim() {
            d[(pos_b[i], pos_b[j])] = db[(i, j)].clone();
        }
        for j in 0..a.dim() {
            d[(pos_b[i], pos_a[j])] = fm[(i, j)].clone();
        }
    }
    for i in 0..a.dim() {
        for j in 0..a.dim() {
            d[(pos_a[i], pos_a[j])] = -&da[(i, j)];
        }
    }
    GradedComplex::from_total(levels, &d)
}

/// Inverse system `A_0 <- A_1 <- ... <- A_N`; `maps[n]` goes from
/// `stages[n + 1]` to `stages[n]`.
#[derive(Debug, Clone)]
pub struct Tower {
    stages: Vec<GradedComplex>,
    maps: Vec<ChainMap>,
}

impl Tower {
    pub fn new(stages: Vec<GradedComplex>, maps: Vec<ChainMap>) -> Result<Self, ComplexError> {
        if stages.is_empty() {
            return Err(ComplexError::EmptyTower);
        }
        if maps.len() + 1 != stages.len() {
            return Err(ComplexError::Incompatible(format!(
                "{} stages need {} maps, got {}",
                stages.len(),
                stages.len() - 1,
                maps.len()
            )));
        }
        for (n, m) in maps.iter().enumerate() {
            if m.source.levels() != stages[n + 1].levels() || m.target.levels() != stages[n].levels() {
                return Err(ComplexError::Incompatible(format!("map {} has wrong endpoints", n + 1)));
            }
        }
        Ok(Tower { stages, maps })
    }

    /// Tower of `len` copies of `c` joined by identities.
    pub fn constant(c: &GradedComplex, len: usize) -> Result<Self, ComplexError> {
        let stages = vec![c.clone(); len];
        let maps = (1..len).map(|_| ChainMap::identity(c)).collect();
        Tower::new(stages, maps)
    }

    pub fn stages(&self) -> &[GradedComplex] {
        &self.stages
    }

    pub fn maps(&self) -> &[ChainMap] {
        &self.maps
    }

    /// Map used to continue the tower past its last stage: the last connecting
    /// map when it is an endomorphism of the last stage, otherwise the
    /// identity.
    pub fn tail_map(&self) -> ChainMap {
        let last = self.stages.last().unwrap();
        match self.maps.last() {
            Some(m) if m.target.levels() == last.levels() && m.target.total_matrix() == last.total_matrix() => {
                ChainMap::from_total(last.clone(), last.clone(), &m.total_matrix()).unwrap()
            }
            _ => ChainMap::identity(last),
        }
    }

    pub fn verify_maps(&self) -> Vec<usize> {
        (0..self.maps.len()).filter(|&n| !self.maps[n].verify_chain_map().is_empty()).map(|n| n + 1).collect()
    }
}

fn basis_degrees(c: &GradedComplex) -> Vec<i64> {
    c.degrees().unwrap_or_else(|| c.form_degrees())
}

fn collapse(c: &GradedComplex, index: i64, tag: &str) -> Level {
    let deg = basis_degrees(c);
    let labels = c.levels().iter().flat_map(|l| l.generators.iter().map(|g| g.label.clone()));
    let gens = labels.zip(deg).map(|(l, d)| Generator::new(format!("{tag}:{l}"), d)).collect();
    Level::new(index, Some(0), gens)
}

fn power(m: &Matrix, e: usize) -> Matrix {
    let mut out = Matrix::identity(m.rows());
    for _ in 0..e {
        out = &out * m;
    }
    out
}

/// Stable image `im τ^M` of the tail map as a basis of degree-homogeneous
/// vectors, together with their degrees.
fn stable_subspace(t: &ChainMap) -> (Matrix, Vec<i64>) {
    let c = &t.source;
    let deg = basis_degrees(c);
    let tm = power(&t.total_matrix(), c.dim().max(1));
    let mut degs: Vec<i64> = deg.clone();
    degs.sort_unstable();
    degs.dedup();
    let mut cols = Vec::new();
    let mut out_deg = Vec::new();
    for n in degs {
        let idx: Vec<usize> = (0..deg.len()).filter(|&i| deg[i] == n).collect();
        let sub = tm.select_columns(&idx);
        for p in rref(&sub).pivots {
            cols.push(sub.column(p));
            out_deg.push(n);
        }
    }
    (Matrix::from_columns(&cols, c.dim()), out_deg)
}

/// `Σ^{-1} cone(1 − v)` for the tower continued by its tail map.
pub fn homotopy_limit(t: &Tower) -> Result<GradedComplex, ComplexError> {
    let n_maps = t.maps.len();
    let last = t.stages.last().unwrap();
    let tail = t.tail_map();
    let (incl, s_deg) = stable_subspace(&tail);
    let d_last = last.total_matrix();
    let d_s = solve(&incl, &(&d_last * &incl))?;

    let mut p_levels = Vec::new();
    let mut q_levels = Vec::new();
    for n in 0..n_maps {
        p_levels.push(collapse(&t.stages[n], n as i64, &format!("P{n}")));
        q_levels.push(collapse(&t.stages[n], n as i64, &format!("Q{n}")));
    }
    let s_gens = s_deg.iter().enumerate().map(|(i, &d)| Generator::new(format!("S:{i}"), d)).collect();
    p_levels.push(Level::new(n_maps as i64, Some(0), s_gens));

    let p_dim: usize = p_levels.iter().map(Level::dim).sum();
    let q_dim: usize = q_levels.iter().map(Level::dim).sum();
    let mut dp = Matrix::zeros(p_dim, p_dim);
    let mut dq = Matrix::zeros(q_dim, q_dim);
    let mut v = Matrix::zeros(q_dim, p_dim);
    let mut offs = Vec::new();
    let mut off = 0;
    for n in 0..n_maps {
        let dn = t.stages[n].total_matrix();
        dp.set_block(off, off, &dn);
        dq.set_block(off, off, &dn);
        v.set_block(off, off, &Matrix::identity(dn.rows()));
        offs.push(off);
        off += dn.rows();
    }
    dp.set_block(off, off, &d_s);
    offs.push(off);
    for n in 1..=n_maps {
        let mu = t.maps[n - 1].total_matrix();
        let block = if n == n_maps { &mu * &incl } else { mu };
        v.set_block(offs[n - 1], offs[n], &-&block);
    }

    let p = GradedComplex::from_total(p_levels, &dp)?;
    let q = GradedComplex::from_total(q_levels, &dq)?;
    let one_minus_v = ChainMap::from_total(p, q, &v)?;
    let cone = mapping_cone(&one_minus_v)?;
    let levels = cone
        .levels()
        .iter()
        .map(|l| {
            let gens = l.generators.iter().map(|g| Generator::new(g.label.clone(), g.degree + 1)).collect();
            Level::new(l.index, l.grading, gens)
        })
        .collect();
    GradedComplex::from_total(levels, &cone.total_matrix())
}

/// The two sides of `0 -> lim¹ H^{*-1} -> H(holim) -> lim H^* -> 0`.
#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct HolimReport {
    pub holim: Betti,
    pub lim: Betti,
    pub lim1: Betti,
}

impl HolimReport {
    /// `dim H^n(holim) = dim lim H^n + dim lim¹ H^{n−1}` in every degree.
    pub fn balanced(&self) -> bool {
        let degs: BTreeSet<i64> = self
            .holim
            .keys()
            .chain(self.lim.keys())
            .copied()
            .chain(self.lim1.keys().map(|k| k + 1))
            .collect();
        degs.into_iter().all(|n| {
            let h = self.holim.get(&n).copied().unwrap_or(0);
            let l = self.lim.get(&n).copied().unwrap_or(0);
            let l1 = self.lim1.get(&(n - 1)).copied().unwrap_or(0);
            h == l + l1
        })
    }
}

impl Tower {
    /// Cohomology of the homotopy limit next to `lim H` computed from the
    /// stable rank of the tail map on cohomology. The continued tower is
    /// constant up to finite-dimensional maps, so `lim¹` vanishes.
    pub fn holim_report(&self) -> Result<HolimReport, ComplexError> {
        let holim = cohomology_betti(&homotopy_limit(self)?)?;
        let last = self.stages.last().unwrap();
        let tail = self.tail_map();
        let tm = power(&tail.total_matrix(), last.dim().max(1));
        let stable = ChainMap::from_total(last.clone(), last.clone(), &tm)?;
        let mut lim = BTreeMap::new();
        let mut lim1 = BTreeMap::new();
        let mut degs = basis_degrees(last);
        degs.sort_unstable();
        degs.dedup();
        for n in degs {
            let deg = if last.is_graded() { Some(n) } else { None };
            lim.insert(n, induced_rank(&stable, deg)?);
            lim1.insert(n, 0);
        }
        Ok(HolimReport { holim, lim, lim1 })
    }
}


#[cfg(test)]
mod tests {
    use super::*;
    use crate::cohomology::{cohomology_betti, nonzero_betti};

    fn pair(labels: (&str, &str), deg: i64) -> GradedComplex {
        let mut c = GradedComplex::new(vec![
            Level::new(0, Some(deg), vec![Generator::new(labels.0, 0)]),
            Level::new(1, Some(deg + 1), vec![Generator::new(labels.1, 0)]),
        ]);
        c.set_block(0, 1, Matrix::from_i64(&[&[1]])).unwrap();
        c
    }

    fn sphere() -> GradedComplex {
        GradedComplex::new(vec![
            Level::new(0, Some(0), vec![Generator::new("min", 0)]),
            Level::new(1, Some(2), vec![Generator::new("max", 0)]),
        ])
    }

    #[test]
    fn cone_of_identity_is_acyclic() {
        let c = sphere();
        let cone = mapping_cone(&ChainMap::identity(&c)).unwrap();
        assert!(cone.verify_d_squared().is_empty());
        assert!(nonzero_betti(&cohomology_betti(&cone).unwrap()).is_empty());
    }

    #[test]
    fn cone_of_zero_map() {
        let a = sphere();
        let b = sphere();
        let cone = mapping_cone(&ChainMap::zero(&a, &b)).unwrap();
        let betti = nonzero_betti(&cohomology_betti(&cone).unwrap());
        assert_eq!(betti, Betti::from([(-1, 1), (0, 1), (1, 1), (2, 1)]));
    }

    #[test]
    fn cone_of_rank_two_iso() {
        let a = GradedComplex::new(vec![Level::new(
            0,
            Some(0),
            vec![Generator::new("x", 1), Generator::new("y", 1)],
        )]);
        let mut f = ChainMap::zero(&a, &a);
        f.set_block(0, 0, Matrix::from_i64(&[&[1, 1], &[0, 2]])).unwrap();
        let cone = mapping_cone(&f).unwrap();
        assert!(nonzero_betti(&cohomology_betti(&cone).unwrap()).is_empty());
    }

    #[test]
    fn holim_of_single_stage() {
        let t = Tower::new(vec![sphere()], vec![]).unwrap();
        let h = homotopy_limit(&t).unwrap();
        assert_eq!(nonzero_betti(&cohomology_betti(&h).unwrap()), Betti::from([(0, 1), (2, 1)]));
    }

    #[test]
    fn holim_of_constant_tower() {
        let t = Tower::constant(&sphere(), 3).unwrap();
        let h = homotopy_limit(&t).unwrap();
        assert!(h.verify_d_squared().is_empty());
        assert_eq!(nonzero_betti(&cohomology_betti(&h).unwrap()), Betti::from([(0, 1), (2, 1)]));
        assert!(t.holim_report().unwrap().balanced());
    }

    #[test]
    fn holim_of_zero_tower() {
        let c = sphere();
        let t = Tower::new(vec![c.clone(), c.clone(), c.clone()], vec![ChainMap::zero(&c, &c), ChainMap::zero(&c, &c)])
            .unwrap();
        let h = homotopy_limit(&t).unwrap();
        assert!(nonzero_betti(&cohomology_betti(&h).unwrap()).is_empty());
        let rep = t.holim_report().unwrap();
        assert!(rep.balanced());
        assert!(nonzero_betti(&rep.lim).is_empty());
    }

    #[test]
    fn empty_tower() {
        assert!(matches!(Tower::new(vec![], vec![]), Err(ComplexError::EmptyTower)));
    }

    #[test]
    fn contractible_pair_cone() {
        let a = pair(("a0", "a1"), 0);
        let cone = mapping_cone(&ChainMap::zero(&a, &a)).unwrap();
        assert!(cone.verify_d_squared().is_empty());
    }
}
