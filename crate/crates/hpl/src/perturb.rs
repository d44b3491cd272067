use flowcat_complexes::{Generator, GradedComplex, Level};
use flowcat_linalg::{Matrix, Rational};

use crate::{BigComplex, HplError, PerturbationData};

/// Sign attached to each homotopy insertion in a zig-zag.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum HplSign {
    /// `(−1)` per insertion of `H`, matching `id − p = d_0 H + H d_0`.
    #[default]
    Signed,
    /// Every zig-zag counted with `+1`.
    Unsigned,
}

impl HplSign {
    fn factor(self) -> Rational {
        match self {
            HplSign::Signed => -Rational::one(),
            HplSign::Unsigned => Rational::one(),
        }
    }
}

/// All `T = {0 < i_1 < … < i_r < k}` in lexicographic order of the interior
/// indices. For `k = 0` the only sequence is `[0]`.
pub fn admissible_sequences(k: i64) -> Vec<Vec<i64>> {
    if k == 0 {
        return vec![vec![0]];
    }
    let interior: Vec<i64> = (1..k).collect();
    let mut out = Vec::new();
    for mask in 0u64..(1u64 << interior.len()) {
        let mut t = vec![0];
        t.extend(interior.iter().enumerate().filter(|(i, _)| mask >> i & 1 == 1).map(|(_, &x)| x));
        t.push(k);
        out.push(t);
    }
    out.sort();
    out
}

fn check_sequence(t: &[i64], k: i64) -> Result<(), HplError> {
    let ok = match t {
        [0] => k == 0,
        [first, .., last] => *first == 0 && *last == k && k > 0 && t.windows(2).all(|w| w[0] < w[1]),
        _ => false,
    };
    if ok { Ok(()) } else { Err(HplError::BadSequence(t.to_vec())) }
}

/// `D_{k,T} = π_{s+k} d H … H d ι_s` for the given source level.
pub fn perturbed_operator(
    a: &BigComplex,
    pd: &PerturbationData,
    s: i64,
    k: i64,
    t: &[i64],
    sign: HplSign,
) -> Result<Matrix, HplError> {
    check_sequence(t, k)?;
    let src = pd.level(s)?;
    let dst = pd.level(s + k)?;
    if t == [0] {
        return Ok(&(&dst.pi * &a.block_or_zero(s, 0)) * &src.iota);
    }
    let eps = sign.factor();
    let mut m = src.iota.clone();
    for w in 1..t.len() {
        let from = s + t[w - 1];
        m = &a.block_or_zero(from, t[w] - t[w - 1]) * &m;
        if w + 1 < t.len() {
            let h = &pd.level(s + t[w])?.h;
            m = (h * &m).scale(&eps);
        }
    }
    Ok(&dst.pi * &m)
}

/// The small complex on `⊕ im p_i` with `D_k = Σ_T D_{k,T}`.
pub fn perturbed_complex(
    a: &BigComplex,
    pd: &PerturbationData,
    sign: HplSign,
) -> Result<GradedComplex, HplError> {
    let mut levels = Vec::new();
    for l in a.levels() {
        let data = pd.level(l.index)?;
        let gens = data
            .source_columns
            .iter()
            .map(|&c| {
                let g = &l.generators[c];
                Generator::new(format!("[{}]", g.label), g.degree)
            })
            .collect();
        levels.push(Level::new(l.index, l.grading, gens));
    }
    let mut out = GradedComplex::new(levels);
    let idx = a.level_indices();
    for &s in &idx {
        for &t in idx.iter().filter(|&&t| t >= s) {
            let k = t - s;
            let mut acc = Matrix::zeros(pd.level(t)?.rank(), pd.level(s)?.rank());
            for seq in admissible_sequences(k) {
                acc = &acc + &perturbed_operator(a, pd, s, k, &seq, sign)?;
            }
            out.set_block(s, k, acc)?;
        }
    }
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::{harmonic_data, LevelData};
    use std::collections::BTreeMap;

    fn pt(index: i64, label: &str, degree: i64) -> Level {
        Level::new(index, Some(0), vec![Generator::new(label, degree)])
    }

    #[test]
    fn sequences() {
        assert_eq!(admissible_sequences(1), vec![vec![0, 1]]);
        assert_eq!(admissible_sequences(3), vec![vec![0, 1, 2, 3], vec![0, 1, 3], vec![0, 2, 3], vec![0, 3]]);
    }

    #[test]
    fn bad_sequences() {
        let c = GradedComplex::new(vec![pt(0, "a", 0), pt(1, "b", 1), pt(2, "c", 2)]);
        let pd = PerturbationData::trivial(&c);
        for t in [vec![0, 2, 1, 2], vec![1, 2], vec![0, 1], vec![]] {
            assert!(matches!(
                perturbed_operator(&c, &pd, 0, 2, &t, HplSign::Signed),
                Err(HplError::BadSequence(_))
            ));
        }
    }

    #[test]
    fn trivial_data_is_identity() {
        let mut c = GradedComplex::new(vec![pt(0, "a", 0), pt(1, "b", 1)]);
        c.set_block(0, 1, Matrix::from_i64(&[&[3]])).unwrap();
        let small = perturbed_complex(&c, &PerturbationData::trivial(&c), HplSign::Signed).unwrap();
        assert_eq!(small.total_matrix(), c.total_matrix());
        let d1 = perturbed_operator(&c, &PerturbationData::trivial(&c), 0, 1, &[0, 1], HplSign::Signed).unwrap();
        assert_eq!(d1, Matrix::from_i64(&[&[3]]));
    }

    /// Level 1 is an acyclic pair `u -> v` so every path from level 0 to
    /// level 2 passes through `H_1`, which sends `v` back to `u`.
    fn zigzag() -> GradedComplex {
        let mut c = GradedComplex::new(vec![
            pt(0, "a", 0),
            Level::new(1, Some(0), vec![Generator::new("u", 0), Generator::new("v", 1)]),
            pt(2, "c", 1),
        ]);
        c.set_block(1, 0, Matrix::from_i64(&[&[0, 0], &[1, 0]])).unwrap();
        c.set_block(0, 1, Matrix::from_i64(&[&[0], &[2]])).unwrap();
        c.set_block(1, 1, Matrix::from_i64(&[&[5, 0]])).unwrap();
        c
    }

    #[test]
    fn two_step_zigzag_by_hand() {
        let c = zigzag();
        let pd = harmonic_data(&c).unwrap();
        // d_1 a = 2v, H v = u, d_1 u = 5c: the product is 2·5 with one H.
        let d = perturbed_operator(&c, &pd, 0, 2, &[0, 1, 2], HplSign::Signed).unwrap();
        assert_eq!(d, Matrix::from_i64(&[&[-10]]));
        let d = perturbed_operator(&c, &pd, 0, 2, &[0, 1, 2], HplSign::Unsigned).unwrap();
        assert_eq!(d, Matrix::from_i64(&[&[10]]));
        let d = perturbed_operator(&c, &pd, 0, 2, &[0, 2], HplSign::Signed).unwrap();
        assert!(d.is_zero());
    }

    #[test]
    fn minimal_input_is_unchanged() {
        let mut c = GradedComplex::new(vec![pt(0, "a", 0), pt(1, "b", 1), pt(2, "c", 2)]);
        c.set_block(0, 1, Matrix::from_i64(&[&[1]])).unwrap();
        let pd = harmonic_data(&c).unwrap();
        let small = perturbed_complex(&c, &pd, HplSign::Signed).unwrap();
        assert_eq!(small.total_matrix(), c.total_matrix());
    }

    #[test]
    fn missing_level_data() {
        let c = GradedComplex::new(vec![pt(0, "a", 0)]);
        let pd = PerturbationData { levels: BTreeMap::new() };
        assert_eq!(perturbed_complex(&c, &pd, HplSign::Signed), Err(HplError::MissingLevel(0)));
        let _ = LevelData::new(Matrix::identity(1), Matrix::zeros(1, 1)).unwrap();
    }
}
