//! Sources of moduli-space pairings.
//!
//! A pairing is the integral over a product of moduli spaces of the source
//! form, the inserted kernels and the target form. Flow-category assembly
//! asks a [`PairingOracle`] for these numbers through a [`PairingKey`].

mod circle;
mod counts;
mod quadrature;
mod table;

pub use circle::{circle_kernel, CircleDefiningData, CircleVariant};
pub use counts::MorseCountOracle;
pub use quadrature::{gauss_legendre, Chart, QuadratureOracle, QuadratureReport};
pub use table::{TableEntry, TabulatedOracle};

use std::fmt;
use std::sync::Arc;

use flowcat_linalg::Rational;
use serde::{Deserialize, Serialize};
use thiserror::Error;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum PairingKind {
    /// Moduli of one flow category.
    Category,
    /// A flow morphism between two categories.
    Morphism,
    /// A composite of two morphisms with the middle category's kernels.
    Mixed,
    /// A flow homotopy between two morphisms.
    Homotopy,
}

/// Which pairing is requested.
///
/// `chain` lists the visited levels, one group per category. For a category
/// pairing the single group is `[s, i_1, …, i_r, s+k]`. For morphisms and
/// homotopies the groups are `[s, i_1, …, i_p]` in the source and
/// `[j_1, …, j_q, s+k]` in the target; the kernel is inserted at every entry
/// except the first of the first group and the last of the last group. Mixed
/// pairings have three groups (source, middle, target).
#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub struct PairingKey {
    pub kind: PairingKind,
    pub chain: Vec<Vec<i64>>,
    pub alpha: usize,
    pub gamma: usize,
}

impl PairingKey {
    pub fn new(kind: PairingKind, chain: Vec<Vec<i64>>, alpha: usize, gamma: usize) -> Self {
        PairingKey { kind, chain, alpha, gamma }
    }

    pub fn category(levels: &[i64], alpha: usize, gamma: usize) -> Self {
        PairingKey::new(PairingKind::Category, vec![levels.to_vec()], alpha, gamma)
    }

    pub fn source(&self) -> i64 {
        self.chain[0][0]
    }

    pub fn target(&self) -> i64 {
        *self.chain.last().and_then(|g| g.last()).expect("nonempty chain")
    }

    /// Number of kernel insertions.
    pub fn insertions(&self) -> usize {
        self.chain.iter().map(Vec::len).sum::<usize>() - 2
    }

    /// True when no kernel is inserted.
    pub fn is_leading(&self) -> bool {
        self.insertions() == 0
    }
}

impl fmt::Display for PairingKey {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let groups: Vec<String> = self
            .chain
            .iter()
            .map(|g| g.iter().map(i64::to_string).collect::<Vec<_>>().join(","))
            .collect();
        write!(f, "{:?}[{}] α={} γ={}", self.kind, groups.join("|"), self.alpha, self.gamma)
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct PairingValue {
    pub value: Rational,
    pub exact: bool,
    /// Floating-point value before snapping, when one was computed.
    pub raw: Option<f64>,
}

impl PairingValue {
    pub fn exact(value: Rational) -> Self {
        PairingValue { value, exact: true, raw: None }
    }

    pub fn zero() -> Self {
        PairingValue::exact(Rational::zero())
    }
}

#[derive(Debug, Clone, PartialEq, Error)]
pub enum OracleError {
    #[error("quadrature for {key} did not settle: last two refinements {a} and {b}")]
    NotConverged { key: String, a: f64, b: f64 },
    #[error("quadrature for {key} gave {value}, which is not within tolerance of a small fraction")]
    NotRational { key: String, value: f64 },
    #[error("malformed key {0}")]
    BadKey(String),
}

/// Contract for anything that can evaluate pairings. `Ok(None)` means the
/// oracle has no data for the key.
pub trait PairingOracle: Send + Sync {
    fn pairing(&self, key: &PairingKey) -> Result<Option<PairingValue>, OracleError>;
}

impl<T: PairingOracle + ?Sized> PairingOracle for Arc<T> {
    fn pairing(&self, key: &PairingKey) -> Result<Option<PairingValue>, OracleError> {
        (**self).pairing(key)
    }
}

impl<T: PairingOracle + ?Sized> PairingOracle for Box<T> {
    fn pairing(&self, key: &PairingKey) -> Result<Option<PairingValue>, OracleError> {
        (**self).pairing(key)
    }
}

/// Answers every key with exact zero.
#[derive(Debug, Clone, Copy, Default)]
pub struct ZeroOracle;

impl PairingOracle for ZeroOracle {
    fn pairing(&self, _: &PairingKey) -> Result<Option<PairingValue>, OracleError> {
        Ok(Some(PairingValue::zero()))
    }
}

/// Asks each oracle in turn and returns the first answer.
#[derive(Clone, Default)]
pub struct ChainedOracle {
    oracles: Vec<Arc<dyn PairingOracle>>,
}

impl ChainedOracle {
    pub fn new() -> Self {
        ChainedOracle::default()
    }

    pub fn with(mut self, o: Arc<dyn PairingOracle>) -> Self {
        self.oracles.push(o);
        self
    }
}

impl PairingOracle for ChainedOracle {
    fn pairing(&self, key: &PairingKey) -> Result<Option<PairingValue>, OracleError> {
        for o in &self.oracles {
            if let Some(v) = o.pairing(key)? {
                return Ok(Some(v));
            }
        }
        Ok(None)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn key_shape() {
        let k = PairingKey::new(PairingKind::Morphism, vec![vec![0, 1], vec![2, 4]], 0, 1);
        assert_eq!(k.source(), 0);
        assert_eq!(k.target(), 4);
        assert_eq!(k.insertions(), 2);
        assert!(PairingKey::category(&[0, 3], 0, 0).is_leading());
        assert_eq!(k.to_string(), "Morphism[0,1|2,4] α=0 γ=1");
    }

    #[test]
    fn chained_prefers_first_answer() {
        let t = TabulatedOracle::new(vec![TableEntry {
            key: PairingKey::category(&[0, 1], 0, 0),
            value: Rational::from(3),
        }])
        .strict();
        let c = ChainedOracle::new().with(Arc::new(t)).with(Arc::new(ZeroOracle));
        assert_eq!(c.pairing(&PairingKey::category(&[0, 1], 0, 0)).unwrap().unwrap().value, Rational::from(3));
        assert!(c.pairing(&PairingKey::category(&[0, 2], 0, 0)).unwrap().unwrap().value.is_zero());
    }
}
