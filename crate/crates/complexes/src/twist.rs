use std::collections::BTreeMap;

use crate::{ChainMap, ComplexError, GradedComplex, Rational};

/// Twisted differential `d̂ = ρ d ρ^{-1}` with `ρ(α) = (−1)^{|α|(c_s+1)} α`,
/// where `|α|` is the form degree and `c_s` the dimension attached to level
/// `s`. Returns `d̂` together with `ρ` as a map from the original complex.
pub fn twist_differential(
    c: &GradedComplex,
    dims: &BTreeMap<i64, i64>,
) -> Result<(GradedComplex, ChainMap), ComplexError> {
    let mut sign = Vec::with_capacity(c.dim());
    for l in c.levels() {
        let cs = *dims.get(&l.index).ok_or(ComplexError::MissingDimension(l.index))?;
        sign.extend(l.generators.iter().map(|g| Rational::sign_power(g.degree * (cs + 1))));
    }
    let mut d = c.total_matrix();
    for i in 0..d.rows() {
        for j in 0..d.cols() {
            if !d[(i, j)].is_zero() {
                d[(i, j)] = &d[(i, j)] * &(&sign[i] * &sign[j]);
            }
        }
    }
    let twisted = GradedComplex::from_total(c.levels().to_vec(), &d)?;
    let mut rho = flowcat_linalg::Matrix::zeros(c.dim(), c.dim());
    for (i, s) in sign.into_iter().enumerate() {
        rho[(i, i)] = s;
    }
    let rho = ChainMap::from_total(c.clone(), twisted.clone(), &rho)?;
    Ok((twisted, rho))
}
