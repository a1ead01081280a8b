//! Normalized Hauptmoduls `q⁻¹ + 0 + O(q)` of genus-zero `Γ₀(N)`.

use std::collections::BTreeSet;

use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::{One, Zero};

use crate::arith::{dedekind_psi, divisors, euler_phi, factorize, gcd};
use crate::qseries::{eta_expand, j_function, EtaQuotient, LaurentSeries};
use crate::{Error, Result};

const GENUS_ZERO: [u64; 15] = [1, 2, 3, 4, 5, 6, 7, 8, 9, 10, 12, 13, 16, 18, 25];

/// Levels whose `Γ₀(N)` has genus zero.
pub fn genus_zero_levels() -> BTreeSet<u64> {
    GENUS_ZERO.into_iter().collect()
}

/// Genus of `X₀(N)` from the index, elliptic points and cusps.
pub fn gamma0_genus(n: u64) -> Result<u64> {
    let mu = dedekind_psi(n)? as i64;
    let primes: Vec<u64> = factorize(n).into_iter().map(|(p, _)| p).collect();
    let nu2: i64 = if n.is_multiple_of(4) {
        0
    } else {
        primes.iter().map(|&p| 1 + legendre_minus_one(p)).product()
    };
    let nu3: i64 = if n.is_multiple_of(9) {
        0
    } else {
        primes.iter().map(|&p| 1 + legendre_minus_three(p)).product()
    };
    let cusps: i64 = divisors(n).iter().map(|&d| euler_phi(gcd(d, n / d)).unwrap() as i64).sum();
    let twelve_g = 12 + mu - 3 * nu2 - 4 * nu3 - 6 * cusps;
    debug_assert_eq!(twelve_g % 12, 0);
    Ok((twelve_g / 12) as u64)
}

fn legendre_minus_one(p: u64) -> i64 {
    match p % 4 {
        1 => 1,
        3 => -1,
        _ => 0,
    }
}

fn legendre_minus_three(p: u64) -> i64 {
    match p % 3 {
        0 => 0,
        1 => 1,
        _ => -1,
    }
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub enum Construction {
    /// `j − 744`.
    JMinus744,
    /// An eta quotient plus a constant.
    Eta { quotient: EtaQuotient, shift: i64 },
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct HauptmodulRecipe {
    pub level: u64,
    pub construction: Construction,
    pub supported: bool,
}

fn eta_recipe(level: u64, factors: &[(u64, i64)], shift: i64) -> HauptmodulRecipe {
    HauptmodulRecipe {
        level,
        construction: Construction::Eta { quotient: EtaQuotient::new(factors.iter().copied()).expect("valid table entry"), shift },
        supported: true,
    }
}

/// The recipe for level `N`, if there is one.
pub fn recipe(level: u64) -> Option<HauptmodulRecipe> {
    let r = match level {
        1 => HauptmodulRecipe { level, construction: Construction::JMinus744, supported: true },
        2 => eta_recipe(2, &[(1, 24), (2, -24)], 24),
        3 => eta_recipe(3, &[(1, 12), (3, -12)], 12),
        4 => eta_recipe(4, &[(1, 8), (4, -8)], 8),
        5 => eta_recipe(5, &[(1, 6), (5, -6)], 6),
        7 => eta_recipe(7, &[(1, 4), (7, -4)], 4),
        9 => eta_recipe(9, &[(1, 3), (9, -3)], 3),
        13 => eta_recipe(13, &[(1, 2), (13, -2)], 2),
        25 => eta_recipe(25, &[(1, 1), (25, -1)], 1),
        6 => eta_recipe(6, &[(1, 5), (2, -1), (3, 1), (6, -5)], 5),
        8 => eta_recipe(8, &[(1, 4), (2, -2), (4, 2), (8, -4)], 4),
        10 => eta_recipe(10, &[(1, 3), (2, -1), (5, 1), (10, -3)], 3),
        12 => eta_recipe(12, &[(1, 3), (2, -2), (3, -1), (4, 1), (6, 2), (12, -3)], 3),
        16 => eta_recipe(16, &[(1, 2), (2, -1), (8, 1), (16, -2)], 2),
        18 => eta_recipe(18, &[(1, 2), (2, -1), (3, -1), (6, 1), (9, 1), (18, -2)], 2),
        _ => return None,
    };
    Some(r)
}

/// Levels with a validated recipe, ascending.
pub fn supported_levels() -> Vec<u64> {
    GENUS_ZERO.into_iter().filter(|&n| recipe(n).is_some_and(|r| r.supported)).collect()
}

fn unsupported(level: u64) -> Error {
    Error::UnsupportedLevel { level, supported: supported_levels() }
}

/// `J_N = q⁻¹ + Σ_{r≥1} a_N(r) qʳ` to precision `P ≥ 1`.
///
/// The additive constant is recomputed from the expansion and must agree
/// with the recipe; normalization and integrality are checked on every call.
pub fn hauptmodul(level: u64, precision: i64) -> Result<LaurentSeries> {
    let recipe = recipe(level).filter(|r| r.supported).ok_or_else(|| unsupported(level))?;
    if precision < 1 {
        return Err(Error::Precondition(format!("hauptmodul needs precision >= 1, got {precision}")));
    }
    let base = match &recipe.construction {
        Construction::JMinus744 => j_function(precision)?,
        Construction::Eta { quotient, .. } => eta_expand(quotient, precision),
    };
    let constant = base.coefficient(0).expect("precision >= 1");
    if let Construction::Eta { shift, .. } = recipe.construction {
        if constant != BigRational::from_integer(BigInt::from(-shift)) {
            return Err(Error::RecipeInvalid {
                level,
                reason: format!("constant term {constant} does not cancel the shift {shift}"),
            });
        }
    }
    let series = &base - &LaurentSeries::monomial(0, constant, precision);
    validate(level, &series)?;
    Ok(series)
}

fn validate(level: u64, s: &LaurentSeries) -> Result<()> {
    let invalid = |reason: &str| Err(Error::RecipeInvalid { level, reason: reason.into() });
    if s.valuation() != -1 || !s.leading_coefficient().is_some_and(One::is_one) {
        return invalid("leading term is not q^-1");
    }
    if !s.coefficient(0).is_some_and(|c| c.is_zero()) {
        return invalid("constant term is not zero");
    }
    if !s.is_integral() {
        return invalid("non-integral coefficient");
    }
    Ok(())
}

/// `[a_N(1), …, a_N(n_max)]` as integers.
pub fn hauptmodul_coefficients(level: u64, n_max: usize) -> Result<Vec<BigInt>> {
    let s = hauptmodul(level, n_max as i64 + 1)?;
    Ok((1..=n_max as i64).map(|n| s.coefficient(n).unwrap().to_integer()).collect())
}
