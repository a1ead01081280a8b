//! Coefficient-by-coefficient check of the product formula
//!
//! `J_N(p) − J_N(q) = (p⁻¹ − q⁻¹)·Π_{r,r′≥1} (1 − pʳq^{r′})^{E_N(r,r′)}`.

use std::collections::BTreeMap;
use std::fmt;
use std::time::Instant;

use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::{One, Signed, Zero};
use serde::{Deserialize, Serialize};

use crate::arith::{divisors, gcd, mobius};
use crate::hauptmodul::{hauptmodul, hauptmodul_coefficients};
use crate::qseries::{BiSeries, Var};
use crate::{Error, Result};

/// Largest `(A+1)(B+1)` accepted; the exponents need `a_N` that far.
pub const MAX_BOX_PRODUCT: u64 = 4096;

/// How the product exponents are derived from Hauptmodul coefficients.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum ExponentSource {
    /// `E(r,r′) = Σ_{d | (r,r′,N)} a_N(rr′/d²)`.
    #[default]
    #[serde(rename = "theorem")]
    Theorem,
    /// `E(r,r′) = Σ_{t | (r,r′)} t⁻¹ Σ_{s | t} μ(t/s)·a_{N/(N,s)}(rr′/t²)`,
    /// built from the Hauptmoduls of the levels dividing `N`.
    #[serde(rename = "replicable")]
    Replicates,
}

impl fmt::Display for ExponentSource {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            ExponentSource::Theorem => "theorem",
            ExponentSource::Replicates => "replicable",
        })
    }
}

/// Integer exponents `E_N(r, r′)` for `1 ≤ r ≤ r_max`, `1 ≤ r′ ≤ rp_max`.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct ExponentTable {
    pub level: u64,
    pub source: ExponentSource,
    r_max: u64,
    rp_max: u64,
    entries: Vec<BigInt>,
}

impl ExponentTable {
    pub fn dims(&self) -> (u64, u64) {
        (self.r_max, self.rp_max)
    }

    pub fn get(&self, r: u64, rp: u64) -> Option<&BigInt> {
        if r == 0 || rp == 0 || r > self.r_max || rp > self.rp_max {
            return None;
        }
        self.entries.get(((r - 1) * self.rp_max + rp - 1) as usize)
    }

    /// Adds `delta` to one exponent (mutation testing).
    pub fn perturb(&mut self, r: u64, rp: u64, delta: i64) -> Result<()> {
        if r == 0 || rp == 0 || r > self.r_max || rp > self.rp_max {
            return Err(Error::domain("perturb", format!("({r}, {rp}) lies outside the exponent table")));
        }
        let slot = ((r - 1) * self.rp_max + rp - 1) as usize;
        self.entries[slot] += delta;
        Ok(())
    }
}

fn check_box(a: u64, b: u64) -> Result<u64> {
    if a == 0 || b == 0 {
        return Err(Error::domain("borcherds", "box dimensions must be at least 1"));
    }
    let need = (a + 1).saturating_mul(b + 1);
    if need > MAX_BOX_PRODUCT {
        return Err(Error::Precision { needed: need.min(i64::MAX as u64) as i64, available: MAX_BOX_PRODUCT as i64 });
    }
    Ok(need)
}

pub fn exponent_table(level: u64, a: u64, b: u64) -> Result<ExponentTable> {
    exponent_table_with(level, a, b, ExponentSource::Theorem)
}

/// Exponents for `r ≤ A+1`, `r′ ≤ B+1`.
pub fn exponent_table_with(level: u64, a: u64, b: u64, source: ExponentSource) -> Result<ExponentTable> {
    let need = check_box(a, b)? as usize;
    let (r_max, rp_max) = (a + 1, b + 1);
    let mut coeffs: BTreeMap<u64, Vec<BigInt>> = BTreeMap::new();
    coeffs.insert(level, hauptmodul_coefficients(level, need)?);
    if source == ExponentSource::Replicates {
        for d in divisors(level) {
            if let std::collections::btree_map::Entry::Vacant(e) = coeffs.entry(d) {
                e.insert(hauptmodul_coefficients(d, need)?);
            }
        }
    }
    let a_of = |n: u64, m: u64| -> &BigInt { &coeffs[&n][(m - 1) as usize] };
    let mut entries = Vec::with_capacity((r_max * rp_max) as usize);
    for r in 1..=r_max {
        for rp in 1..=rp_max {
            let e = match source {
                ExponentSource::Theorem => divisors(gcd(gcd(r, rp), level))
                    .into_iter()
                    .map(|d| a_of(level, r * rp / (d * d)).clone())
                    .sum(),
                ExponentSource::Replicates => {
                    let mut total = BigRational::zero();
                    for t in divisors(gcd(r, rp)) {
                        let m = r * rp / (t * t);
                        let mut inner = BigInt::zero();
                        for s in divisors(t) {
                            let mu = mobius(t / s)?;
                            if mu != 0 {
                                inner += a_of(level / gcd(level, s), m) * i64::from(mu);
                            }
                        }
                        total += BigRational::new(inner, BigInt::from(t));
                    }
                    if !total.is_integer() {
                        return Err(Error::RecipeInvalid {
                            level,
                            reason: format!("non-integral exponent {total} at ({r}, {rp})"),
                        });
                    }
                    total.to_integer()
                }
            };
            entries.push(e);
        }
    }
    Ok(ExponentTable { level, source, r_max, rp_max, entries })
}

/// `(p⁻¹ − q⁻¹)·Π (1 − pʳq^{r′})^{E(r,r′)}` over the box `−1 ≤ i ≤ A`,
/// `−1 ≤ j ≤ B`.
///
/// A factor with index `(r, r′)` first touches degree `(r, r′)` and the
/// prefactor lowers degrees by at most one, so its earliest effect on the
/// result is at `i = r − 1` and `j = r′ − 1`. Every factor with `r > A+1` or
/// `r′ > B+1` therefore leaves the box untouched and the table's range is
/// exactly sufficient.
pub fn product_rhs_from(table: &ExponentTable, a: u64, b: u64) -> Result<BiSeries> {
    check_box(a, b)?;
    let (tr, trp) = table.dims();
    if tr < a + 1 || trp < b + 1 {
        return Err(Error::Precondition(format!("exponent table {tr}x{trp} is too small for box ({a}, {b})")));
    }
    let hi = (a as i64 + 1, b as i64 + 1);
    let mut product = BiSeries::from_terms([((0, 0), BigRational::one())], (0, 0), hi);
    for r in 1..=a + 1 {
        for rp in 1..=b + 1 {
            let e = table.get(r, rp).expect("within table");
            if !e.is_zero() {
                product = product.mul_one_minus_monomial_pow(r as i64, rp as i64, e);
            }
        }
    }
    let prefactor = &BiSeries::monomial(-1, 0, BigRational::one()) - &BiSeries::monomial(0, -1, BigRational::one());
    let rhs = &prefactor * &product;
    debug_assert_eq!(rhs.trust_box(), (a as i64, b as i64));
    Ok(rhs)
}

pub fn product_rhs(level: u64, a: u64, b: u64) -> Result<BiSeries> {
    product_rhs_from(&exponent_table(level, a, b)?, a, b)
}

/// `J_N(p) − J_N(q)` over the box.
pub fn lhs_difference(level: u64, a: u64, b: u64) -> Result<BiSeries> {
    check_box(a, b)?;
    let jp = BiSeries::from_laurent(&hauptmodul(level, a as i64 + 1)?, Var::P);
    let jq = BiSeries::from_laurent(&hauptmodul(level, b as i64 + 1)?, Var::Q);
    Ok(&jp - &jq)
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct Mismatch {
    pub i: i64,
    pub j: i64,
    pub lhs: String,
    pub rhs: String,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct VerificationReport {
    pub level: u64,
    #[serde(rename = "box")]
    pub box_size: (u64, u64),
    pub pass: bool,
    /// Number of monomials compared.
    pub checked: u64,
    /// Largest `|lhs − rhs|`, as an exact rational.
    pub max_discrepancy: String,
    pub mismatches: Vec<Mismatch>,
    pub elapsed_ms: Option<u64>,
    pub exponent_source: ExponentSource,
}

#[derive(Clone, Copy, Debug, Default, PartialEq, Eq)]
pub struct VerifyOptions {
    pub source: ExponentSource,
    /// Adds `delta` to the exponent at `(r, r′)` before expanding.
    pub perturb: Option<(u64, u64, i64)>,
}

pub fn verify_identity(level: u64, a: u64, b: u64) -> Result<VerificationReport> {
    verify_identity_with(level, a, b, &VerifyOptions::default())
}

/// Compares both sides on every monomial of the box. Mismatches are
/// reported, not raised.
pub fn verify_identity_with(level: u64, a: u64, b: u64, options: &VerifyOptions) -> Result<VerificationReport> {
    let start = Instant::now();
    let mut table = exponent_table_with(level, a, b, options.source)?;
    if let Some((r, rp, delta)) = options.perturb {
        table.perturb(r, rp, delta)?;
    }
    let rhs = product_rhs_from(&table, a, b)?;
    let lhs = lhs_difference(level, a, b)?;
    let mut mismatches = Vec::new();
    let mut max = BigRational::zero();
    let mut checked = 0;
    for i in -1..=a as i64 {
        for j in -1..=b as i64 {
            let l = lhs.coeff(i, j).expect("inside box");
            let r = rhs.coeff(i, j).expect("inside box");
            checked += 1;
            if l != r {
                let d = (&l - &r).abs();
                if d > max {
                    max = d;
                }
                mismatches.push(Mismatch { i, j, lhs: l.to_string(), rhs: r.to_string() });
            }
        }
    }
    Ok(VerificationReport {
        level,
        box_size: (a, b),
        pass: mismatches.is_empty(),
        checked,
        max_discrepancy: max.to_string(),
        mismatches,
        elapsed_ms: Some(start.elapsed().as_millis() as u64),
        exponent_source: options.source,
    })
}

/// The mixed kernel entry `p_{r′,N}(r)` predicted from replicate exponents:
/// `−Σ_{k | (r,r′)} (r/k)·E(r/k, r′/k)`, the `pʳq^{r′}` coefficient of
/// `p·∂_p log(J_N(p) − J_N(q))`.
pub fn predicted_kernel_entry(table: &ExponentTable, r: u64, rp: u64) -> Option<BigInt> {
    let mut total = BigInt::zero();
    for k in divisors(gcd(r, rp)) {
        total += table.get(r / k, rp / k)? * BigInt::from(r / k);
    }
    Some(-total)
}
