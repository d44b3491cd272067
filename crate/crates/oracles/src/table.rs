use std::collections::BTreeMap;

use flowcat_linalg::Rational;
use serde::{Deserialize, Serialize};

use crate::{OracleError, PairingKey, PairingOracle, PairingValue};

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct TableEntry {
    #[serde(flatten)]
    pub key: PairingKey,
    pub value: Rational,
}

/// Exact lookup table. Missing keys read as zero unless the table is strict,
/// in which case they are reported as missing.
#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct TabulatedOracle {
    entries: BTreeMap<PairingKey, Rational>,
    strict: bool,
}

impl TabulatedOracle {
    pub fn new(entries: Vec<TableEntry>) -> Self {
        let entries = entries.into_iter().map(|e| (e.key, e.value)).collect();
        TabulatedOracle { entries, strict: false }
    }

    pub fn strict(mut self) -> Self {
        self.strict = true;
        self
    }

    pub fn insert(&mut self, key: PairingKey, value: Rational) {
        self.entries.insert(key, value);
    }

    pub fn entries(&self) -> Vec<TableEntry> {
        self.entries.iter().map(|(k, v)| TableEntry { key: k.clone(), value: v.clone() }).collect()
    }

    pub fn len(&self) -> usize {
        self.entries.len()
    }

    pub fn is_empty(&self) -> bool {
        self.entries.is_empty()
    }
}

impl PairingOracle for TabulatedOracle {
    fn pairing(&self, key: &PairingKey) -> Result<Option<PairingValue>, OracleError> {
        Ok(match self.entries.get(key) {
            Some(v) => Some(PairingValue::exact(v.clone())),
            None if self.strict => None,
            None => Some(PairingValue::zero()),
        })
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::PairingKind;

    #[test]
    fn empty_table_reads_zero() {
        let t = TabulatedOracle::default();
        let v = t.pairing(&PairingKey::category(&[0, 1], 0, 0)).unwrap().unwrap();
        assert!(v.value.is_zero() && v.exact);
    }

    #[test]
    fn single_entry() {
        let key = PairingKey::category(&[0, 1], 0, 0);
        let t = TabulatedOracle::new(vec![TableEntry { key: key.clone(), value: Rational::one() }]);
        assert_eq!(t.pairing(&key).unwrap().unwrap().value, Rational::one());
        let other = PairingKey::new(PairingKind::Morphism, vec![vec![0], vec![1]], 0, 0);
        assert!(t.clone().strict().pairing(&other).unwrap().is_none());
    }

    #[test]
    fn entries_serialize_flat() {
        let e = TableEntry { key: PairingKey::category(&[0, 2], 1, 0), value: Rational::new(-1, 2) };
        let s = serde_json::to_string(&e).unwrap();
        assert_eq!(s, r#"{"kind":"category","chain":[[0,2]],"alpha":1,"gamma":0,"value":"-1/2"}"#);
        assert_eq!(serde_json::from_str::<TableEntry>(&s).unwrap(), e);
    }
}
