use std::collections::BTreeMap;

use crate::{FlowCategoryModel, FlowError};

/// Dimension lookups behind the † and ‡ signs: `c` for the levels reached
/// and `m` for the spaces leaving a level (moduli, or morphism spaces).
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct SignContext {
    pub c: BTreeMap<i64, i64>,
    pub m: BTreeMap<(i64, i64), i64>,
}

impl SignContext {
    pub fn new(c: BTreeMap<i64, i64>, m: BTreeMap<(i64, i64), i64>) -> Self {
        SignContext { c, m }
    }

    pub fn of(fc: &FlowCategoryModel) -> Self {
        SignContext { c: fc.dims(), m: fc.moduli().clone() }
    }

    fn lookup(&self, s: i64, k: i64) -> Result<(i64, i64), FlowError> {
        let m = *self.m.get(&(s, s + k)).ok_or_else(|| FlowError::MissingDimension(format!("m({s},{})", s + k)))?;
        let c = *self.c.get(&(s + k)).ok_or_else(|| FlowError::MissingDimension(format!("c({})", s + k)))?;
        Ok((m, c))
    }
}

fn sign(e: i64) -> i64 {
    if e.rem_euclid(2) == 0 {
        1
    } else {
        -1
    }
}

/// `(−1)^{(|α|+m_{s,s+k})(c_{s+k}+1)}`.
pub fn sign_dagger(ctx: &SignContext, alpha_degree: i64, s: i64, k: i64) -> Result<i64, FlowError> {
    let (m, c) = ctx.lookup(s, k)?;
    Ok(sign((alpha_degree + m) * (c + 1)))
}

/// `(−1)^{(|α|+m_{s,s+k}+1)(c_{s+k}+1)}`.
pub fn sign_ddagger(ctx: &SignContext, alpha_degree: i64, s: i64, k: i64) -> Result<i64, FlowError> {
    let (m, c) = ctx.lookup(s, k)?;
    Ok(sign((alpha_degree + m + 1) * (c + 1)))
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn ctx(m: i64, c: i64) -> SignContext {
        SignContext::new(BTreeMap::from([(0, 0), (1, c)]), BTreeMap::from([((0, 1), m)]))
    }

    #[test]
    fn dagger_examples() {
        assert_eq!(sign_dagger(&ctx(0, 0), 0, 0, 1).unwrap(), 1);
        assert_eq!(sign_dagger(&ctx(1, 1), 1, 0, 1).unwrap(), 1);
        assert_eq!(sign_dagger(&ctx(1, 0), 0, 0, 1).unwrap(), -1);
    }

    #[test]
    fn ddagger_examples() {
        assert_eq!(sign_ddagger(&ctx(0, 0), 0, 0, 1).unwrap(), -1);
        assert_eq!(sign_ddagger(&ctx(0, 1), 1, 0, 1).unwrap(), 1);
    }

    #[test]
    fn missing_moduli() {
        assert!(matches!(sign_dagger(&ctx(0, 0), 0, 0, 2), Err(FlowError::MissingDimension(_))));
    }

    proptest! {
        #[test]
        fn ddagger_is_dagger_times_parity(a in 0i64..6, m in 0i64..8, c in 0i64..6) {
            let x = ctx(m, c);
            let parity = if (c + 1) % 2 == 0 { 1 } else { -1 };
            prop_assert_eq!(sign_ddagger(&x, a, 0, 1).unwrap(), sign_dagger(&x, a, 0, 1).unwrap() * parity);
        }
    }
}
