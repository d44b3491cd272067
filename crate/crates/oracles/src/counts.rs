use std::collections::BTreeMap;

use flowcat_linalg::Matrix;

use crate::{OracleError, PairingKey, PairingKind, PairingOracle, PairingValue};

/// Signed counts of rigid moduli between point levels. Entry `(y, x)` of the
/// matrix stored at `(kind, i, j)` counts the rigid objects from generator
/// `x` of level `i` to generator `y` of level `j`. Every pairing with a
/// kernel insertion vanishes, since kernels on points have degree −1.
#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct MorseCountOracle {
    counts: BTreeMap<(PairingKind, i64, i64), Matrix>,
}

impl MorseCountOracle {
    pub fn new() -> Self {
        MorseCountOracle::default()
    }

    pub fn insert(&mut self, kind: PairingKind, from: i64, to: i64, m: Matrix) {
        self.counts.insert((kind, from, to), m);
    }

    pub fn with(mut self, kind: PairingKind, from: i64, to: i64, m: Matrix) -> Self {
        self.insert(kind, from, to, m);
        self
    }

    pub fn counts(&self) -> &BTreeMap<(PairingKind, i64, i64), Matrix> {
        &self.counts
    }

    pub fn count(&self, kind: PairingKind, from: i64, to: i64) -> Option<&Matrix> {
        self.counts.get(&(kind, from, to))
    }
}

impl PairingOracle for MorseCountOracle {
    fn pairing(&self, key: &PairingKey) -> Result<Option<PairingValue>, OracleError> {
        if !key.is_leading() {
            return Ok(Some(PairingValue::zero()));
        }
        let v = match self.counts.get(&(key.kind, key.source(), key.target())) {
            Some(m) => {
                if key.gamma >= m.rows() || key.alpha >= m.cols() {
                    return Err(OracleError::BadKey(key.to_string()));
                }
                m[(key.gamma, key.alpha)].clone()
            }
            None => flowcat_linalg::Rational::zero(),
        };
        Ok(Some(PairingValue::exact(v)))
    }
}
