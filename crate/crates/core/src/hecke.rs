//! Hecke operators `T_k(m)` on q-expansions of level-`N` forms.

use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::Zero;
use serde::{Deserialize, Serialize};

use crate::arith::{divisors, gcd};
use crate::qseries::{eta_expand, EtaQuotient, LaurentSeries};
use crate::{Error, Result};

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct ModularFormExpansion {
    pub weight: u32,
    pub level: u64,
    pub series: LaurentSeries,
}

impl ModularFormExpansion {
    pub fn new(weight: u32, level: u64, series: LaurentSeries) -> Result<Self> {
        if level == 0 {
            return Err(Error::domain("ModularFormExpansion", "level must be positive"));
        }
        if !series.is_zero() && series.valuation() < 0 {
            return Err(Error::Precondition("holomorphic forms have valuation >= 0".into()));
        }
        Ok(Self { weight, level, series })
    }

    pub fn precision(&self) -> i64 {
        self.series.precision()
    }
}

/// `T_k(m)f` with `b(n) = Σ_{d|(m,n), (d,N)=1} d^{k−1}·a(mn/d²)`, known to
/// precision `⌊P/m⌋`.
pub fn hecke_apply(k: u32, m: u64, f: &ModularFormExpansion) -> Result<ModularFormExpansion> {
    if m == 0 {
        return Err(Error::domain("hecke_apply", "m must be positive"));
    }
    if k != f.weight {
        return Err(Error::Precondition(format!("operator weight {k} does not match form weight {}", f.weight)));
    }
    if !f.series.is_zero() && f.series.valuation() < 0 {
        return Err(Error::Precondition("hecke_apply needs a holomorphic expansion".into()));
    }
    let p_in = f.precision();
    let p_out = p_in.div_euclid(m as i64);
    if p_out < 1 {
        return Err(Error::Precision { needed: m as i64, available: p_in });
    }
    let mut coeffs = Vec::with_capacity(p_out as usize);
    for n in 0..p_out as u64 {
        let g = if n == 0 { m } else { gcd(m, n) };
        let mut acc = BigRational::zero();
        for d in divisors(g) {
            if gcd(d, f.level) != 1 {
                continue;
            }
            let a = f.series.coefficient((m * n / (d * d)) as i64).expect("index below input precision");
            if !a.is_zero() {
                acc += a * BigRational::from_integer(BigInt::from(d).pow(k.saturating_sub(1)));
            }
        }
        coeffs.push(acc);
    }
    ModularFormExpansion::new(k, f.level, LaurentSeries::new(0, coeffs, p_out)?)
}

/// `(η(z)η(11z))²`, the normalized weight-2 cusp form of level 11.
pub fn eta_square_form(precision: i64) -> Result<ModularFormExpansion> {
    if precision < 1 {
        return Err(Error::Precondition(format!("eta_square_form needs precision >= 1, got {precision}")));
    }
    let series = eta_expand(&EtaQuotient::new([(1, 2), (11, 2)])?, precision);
    ModularFormExpansion::new(2, 11, series)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::qseries::LaurentSeries;
    use proptest::prelude::*;

    fn rat(n: i64) -> BigRational {
        BigRational::from_integer(BigInt::from(n))
    }

    #[test]
    fn fixture_coefficients() {
        let f = eta_square_form(11).unwrap();
        let want = [0, 1, -2, -1, 2, 1, 2, -2, 0, -2, -2];
        for (n, w) in want.iter().enumerate() {
            assert_eq!(f.series.coefficient(n as i64), Some(rat(*w)), "n = {n}");
        }
    }

    #[test]
    fn identity_and_eigenvalue() {
        let f = eta_square_form(202).unwrap();
        assert_eq!(hecke_apply(2, 1, &f).unwrap(), f);
        let t2 = hecke_apply(2, 2, &f).unwrap();
        assert_eq!(t2.precision(), 101);
        assert_eq!(t2.series, f.series.truncate(101).scale(&rat(-2)));
    }

    #[test]
    fn eigenvalues_are_point_counts() {
        // a_p = p + 1 − #E(F_p) for y² + y = x³ − x² − 10x − 20
        let f = eta_square_form(200).unwrap();
        for p in [2u64, 3, 5, 7, 13, 17, 19] {
            let mut points = 1i64;
            for x in 0..p {
                for y in 0..p {
                    let (x, y) = (x as i64, y as i64);
                    let l = y * y + y;
                    let r = x * x * x - x * x - 10 * x - 20;
                    if (l - r).rem_euclid(p as i64) == 0 {
                        points += 1;
                    }
                }
            }
            let ap = p as i64 + 1 - points;
            let tp = hecke_apply(2, p, &f).unwrap();
            assert_eq!(tp.series, f.series.truncate(tp.precision()).scale(&rat(ap)), "p = {p}");
        }
    }

    #[test]
    fn multiplicativity_for_coprime_indices() {
        let f = eta_square_form(720).unwrap();
        for m in 1..=6u64 {
            for n in 1..=6u64 {
                if gcd(m, n) != 1 {
                    continue;
                }
                let lhs = hecke_apply(2, m, &hecke_apply(2, n, &f).unwrap()).unwrap();
                let rhs = hecke_apply(2, m * n, &f).unwrap();
                assert!(lhs.series.agrees_with(&rhs.series), "m={m} n={n}");
            }
        }
    }

    #[test]
    fn prime_square_relation() {
        let f = eta_square_form(360).unwrap();
        for p in [2u64, 3] {
            let lhs = hecke_apply(2, p, &hecke_apply(2, p, &f).unwrap()).unwrap();
            let t_p2 = hecke_apply(2, p * p, &f).unwrap();
            let id = hecke_apply(2, 1, &f).unwrap();
            // p = 11 would drop the p^{k−1} term; 2 and 3 are coprime to the level
            let rhs = &t_p2.series + &id.series.scale(&rat(p as i64));
            assert!(lhs.series.agrees_with(&rhs), "p = {p}");
        }
    }

    #[test]
    fn level_dividing_index_drops_terms() {
        let f = eta_square_form(121).unwrap();
        let t11 = hecke_apply(2, 11, &f).unwrap();
        // a_11 = 1 for this form, and T(11) acts as U(11) at level 11
        for n in 0..t11.precision() {
            assert_eq!(t11.series.coefficient(n), f.series.coefficient(11 * n));
        }
    }

    #[test]
    fn rejects_bad_requests() {
        let f = eta_square_form(10).unwrap();
        assert!(matches!(hecke_apply(2, 11, &f), Err(Error::Precision { needed: 11, available: 10 })));
        assert!(hecke_apply(4, 2, &f).is_err());
        assert!(hecke_apply(2, 0, &f).is_err());
        let laurent = LaurentSeries::from_integers(-1, &[1, 0, 3], 2).unwrap();
        assert!(ModularFormExpansion::new(2, 1, laurent).is_err());
    }

    proptest! {
        #[test]
        fn linearity(
            a in prop::collection::vec(-20i64..20, 30),
            b in prop::collection::vec(-20i64..20, 30),
            alpha in -5i64..5,
            beta in -5i64..5,
            m in 1u64..8,
            k in 1u32..5,
        ) {
            let fa = LaurentSeries::from_integers(0, &a, 30).unwrap();
            let fb = LaurentSeries::from_integers(0, &b, 30).unwrap();
            let combo = &fa.scale(&rat(alpha)) + &fb.scale(&rat(beta));
            let lhs = hecke_apply(k, m, &ModularFormExpansion::new(k, 6, combo).unwrap()).unwrap();
            let ta = hecke_apply(k, m, &ModularFormExpansion::new(k, 6, fa).unwrap()).unwrap();
            let tb = hecke_apply(k, m, &ModularFormExpansion::new(k, 6, fb).unwrap()).unwrap();
            let rhs = &ta.series.scale(&rat(alpha)) + &tb.series.scale(&rat(beta));
            prop_assert_eq!(lhs.series, rhs);
        }
    }
}
