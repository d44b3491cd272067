use std::fmt;

use serde::Serialize;

/// One failing block of a blockwise identity check.
#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct BlockFailure {
    pub s: i64,
    pub k: i64,
    pub nonzero_entries: usize,
}

/// Outcome of a verification. Empty means the identity holds exactly.
#[derive(Debug, Clone, Default, PartialEq, Eq, Serialize)]
pub struct Report {
    pub check: String,
    pub failures: Vec<BlockFailure>,
}

impl Report {
    pub fn new(check: impl Into<String>) -> Self {
        Report { check: check.into(), failures: Vec::new() }
    }

    pub fn is_empty(&self) -> bool {
        self.failures.is_empty()
    }

    pub fn blocks(&self) -> Vec<(i64, i64)> {
        self.failures.iter().map(|f| (f.s, f.k)).collect()
    }
}

impl fmt::Display for Report {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.failures.is_empty() {
            return write!(f, "{}: ok", self.check);
        }
        write!(f, "{}: {} failing block(s)", self.check, self.failures.len())?;
        for b in &self.failures {
            write!(f, " (s={}, k={}, {} nonzero)", b.s, b.k, b.nonzero_entries)?;
        }
        Ok(())
    }
}
