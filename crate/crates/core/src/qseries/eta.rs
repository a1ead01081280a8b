use std::collections::BTreeMap;
use std::fmt;

use num_bigint::BigInt;
use num_traits::Zero;
use serde::{Deserialize, Serialize};

use super::LaurentSeries;
use crate::{Error, Result};

/// `Π_d η(d·z)^{e_d}`, stored with dilations ascending and no zero exponents.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct EtaQuotient {
    factors: Vec<(u64, i64)>,
}

impl EtaQuotient {
    /// Merges repeated dilations and checks `Σ d·e_d ≡ 0 (mod 24)`.
    pub fn new(factors: impl IntoIterator<Item = (u64, i64)>) -> Result<Self> {
        let mut merged: BTreeMap<u64, i64> = BTreeMap::new();
        for (d, e) in factors {
            if d == 0 {
                return Err(Error::domain("eta_quotient", "dilation must be positive"));
            }
            *merged.entry(d).or_default() += e;
        }
        let factors: Vec<_> = merged.into_iter().filter(|&(_, e)| e != 0).collect();
        let sum: i64 = factors.iter().map(|&(d, e)| d as i64 * e).sum();
        if sum.rem_euclid(24) != 0 {
            return Err(Error::EtaExponent { sum });
        }
        Ok(Self { factors })
    }

    pub fn factors(&self) -> &[(u64, i64)] {
        &self.factors
    }

    /// Exponent of the leading `q` power, `Σ d·e_d / 24`.
    pub fn order(&self) -> i64 {
        self.factors.iter().map(|&(d, e)| d as i64 * e).sum::<i64>() / 24
    }
}

impl fmt::Display for EtaQuotient {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.factors.is_empty() {
            return write!(f, "1");
        }
        let parts: Vec<String> = self.factors.iter().map(|(d, e)| format!("eta({d}z)^{e}")).collect();
        write!(f, "{}", parts.join(" * "))
    }
}

/// Expands an eta quotient to precision `P` with exact integer coefficients.
pub fn eta_expand(eq: &EtaQuotient, precision: i64) -> LaurentSeries {
    let order = eq.order();
    let len = precision - order;
    if len <= 0 {
        return LaurentSeries::zero(precision);
    }
    let len = len as usize;
    let mut c = vec![BigInt::zero(); len];
    c[0] = BigInt::from(1);
    for &(d, e) in eq.factors() {
        let d = d as usize;
        for m in (d..len).step_by(d) {
            for _ in 0..e.unsigned_abs() {
                if e > 0 {
                    // multiply by (1 − q^m)
                    for i in (m..len).rev() {
                        let t = c[i - m].clone();
                        c[i] -= t;
                    }
                } else {
                    // divide by (1 − q^m)
                    for i in m..len {
                        let t = c[i - m].clone();
                        c[i] += t;
                    }
                }
            }
        }
    }
    LaurentSeries::from_bigints(order, c, precision)
}
