use std::collections::BTreeMap;
use std::ops::{Add, Mul, Neg, Sub};

use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::{One, Signed, Zero};

use super::LaurentSeries;

/// Trust bound meaning "known exactly in this direction".
pub const EXACT: i64 = i64::MAX;

/// Which variable a one-variable series is embedded as.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Var {
    P,
    Q,
}

/// Coefficient ring for [`BiSeries`].
pub trait Coefficient:
    Clone + PartialEq + Zero + Add<Output = Self> + Sub<Output = Self> + Mul<Output = Self> + Neg<Output = Self>
{
}

impl<T> Coefficient for T where
    T: Clone + PartialEq + Zero + Add<Output = T> + Sub<Output = T> + Mul<Output = T> + Neg<Output = T>
{
}

/// Truncated series in two variables `p, q`, stored sparsely.
///
/// `lo` bounds the support of the true series from below (no monomial
/// `pⁱqʲ` with `i < lo.0` or `j < lo.1`). `hi` is the inclusive trust box:
/// stored coefficients are exact for `i ≤ hi.0` and `j ≤ hi.1`, and nothing
/// outside it is stored.
#[derive(Clone, Debug, PartialEq)]
pub struct BiSeries<C = BigRational> {
    terms: BTreeMap<(i64, i64), C>,
    lo: (i64, i64),
    hi: (i64, i64),
}

fn add_bound(a: i64, b: i64) -> i64 {
    if a == EXACT || b == EXACT {
        EXACT
    } else {
        a + b
    }
}

impl<C: Coefficient> BiSeries<C> {
    /// The zero series with the given support floor and trust box.
    pub fn zero(lo: (i64, i64), hi: (i64, i64)) -> Self {
        Self { terms: BTreeMap::new(), lo, hi }
    }

    /// `c·pⁱqʲ`, known exactly.
    pub fn monomial(i: i64, j: i64, c: C) -> Self {
        let mut s = Self::zero((i, j), (EXACT, EXACT));
        s.insert(i, j, c);
        s
    }

    /// Builds a series from terms; entries outside `lo..=hi` are dropped.
    pub fn from_terms(terms: impl IntoIterator<Item = ((i64, i64), C)>, lo: (i64, i64), hi: (i64, i64)) -> Self {
        let mut s = Self::zero(lo, hi);
        for ((i, j), c) in terms {
            s.insert(i, j, c);
        }
        s
    }

    fn in_box(&self, i: i64, j: i64) -> bool {
        i >= self.lo.0 && j >= self.lo.1 && i <= self.hi.0 && j <= self.hi.1
    }

    fn insert(&mut self, i: i64, j: i64, c: C) {
        if !self.in_box(i, j) || c.is_zero() {
            return;
        }
        self.terms.insert((i, j), c);
    }

    fn accumulate(&mut self, i: i64, j: i64, c: C) {
        if !self.in_box(i, j) || c.is_zero() {
            return;
        }
        match self.terms.remove(&(i, j)) {
            Some(old) => {
                let v = old + c;
                if !v.is_zero() {
                    self.terms.insert((i, j), v);
                }
            }
            None => {
                self.terms.insert((i, j), c);
            }
        }
    }

    pub fn lower_bounds(&self) -> (i64, i64) {
        self.lo
    }

    /// Inclusive trust box `(max i, max j)`; [`EXACT`] means unbounded.
    pub fn trust_box(&self) -> (i64, i64) {
        self.hi
    }

    /// Coefficient of `pⁱqʲ`, or `None` outside the trust box.
    pub fn coeff(&self, i: i64, j: i64) -> Option<C> {
        if i > self.hi.0 || j > self.hi.1 {
            return None;
        }
        Some(self.terms.get(&(i, j)).cloned().unwrap_or_else(C::zero))
    }

    /// Nonzero stored terms in `(i, j)` lexicographic order.
    pub fn iter(&self) -> impl Iterator<Item = (&(i64, i64), &C)> {
        self.terms.iter()
    }

    pub fn nonzero_count(&self) -> usize {
        self.terms.len()
    }

    /// Restricts the trust box.
    pub fn truncate(&self, hi: (i64, i64)) -> Self {
        let hi = (hi.0.min(self.hi.0), hi.1.min(self.hi.1));
        Self::from_terms(self.terms.iter().map(|(k, v)| (*k, v.clone())), self.lo, hi)
    }

    /// Swaps the roles of `p` and `q`.
    pub fn transpose(&self) -> Self {
        Self::from_terms(
            self.terms.iter().map(|(&(i, j), v)| ((j, i), v.clone())),
            (self.lo.1, self.lo.0),
            (self.hi.1, self.hi.0),
        )
    }

    pub fn scale(&self, c: &C) -> Self {
        Self::from_terms(self.terms.iter().map(|(k, v)| (*k, v.clone() * c.clone())), self.lo, self.hi)
    }

    pub fn map<D: Coefficient>(&self, f: impl Fn(&C) -> D) -> BiSeries<D> {
        BiSeries::from_terms(self.terms.iter().map(|(k, v)| (*k, f(v))), self.lo, self.hi)
    }

    fn combine(&self, other: &Self, negate: bool) -> Self {
        let lo = (self.lo.0.min(other.lo.0), self.lo.1.min(other.lo.1));
        let hi = (self.hi.0.min(other.hi.0), self.hi.1.min(other.hi.1));
        let mut out = Self::from_terms(self.terms.iter().map(|(k, v)| (*k, v.clone())), lo, hi);
        for (&(i, j), v) in &other.terms {
            out.accumulate(i, j, if negate { -v.clone() } else { v.clone() });
        }
        out
    }

    fn product(&self, other: &Self) -> Self {
        let lo = (self.lo.0 + other.lo.0, self.lo.1 + other.lo.1);
        let hi = (
            add_bound(self.hi.0, other.lo.0).min(add_bound(other.hi.0, self.lo.0)),
            add_bound(self.hi.1, other.lo.1).min(add_bound(other.hi.1, self.lo.1)),
        );
        let mut out = Self::zero(lo, hi);
        for (&(i1, j1), a) in &self.terms {
            for (&(i2, j2), b) in &other.terms {
                let (i, j) = (i1 + i2, j1 + j2);
                if i <= hi.0 && j <= hi.1 {
                    out.accumulate(i, j, a.clone() * b.clone());
                }
            }
        }
        out
    }
}

impl BiSeries<BigRational> {
    /// Embeds a one-variable series as a series in `p` or in `q`.
    pub fn from_laurent(f: &LaurentSeries, var: Var) -> Self {
        let last = f.precision() - 1;
        let terms = f.terms().map(|(e, c)| (e, c.clone()));
        match var {
            Var::P => Self::from_terms(terms.map(|(e, c)| ((e, 0), c)), (f.valuation(), 0), (last, EXACT)),
            Var::Q => Self::from_terms(terms.map(|(e, c)| ((0, e), c)), (0, f.valuation()), (EXACT, last)),
        }
    }

    /// Multiplies by `(1 − pʳqˢ)^E` for `r, s ≥ 0` not both zero, using the
    /// binomial series cut off at the trust box. Works for any integer `E`,
    /// including exponents far beyond machine range.
    ///
    /// Requires a finite trust box in every direction the monomial moves.
    pub fn mul_one_minus_monomial_pow(&self, r: i64, s: i64, e: &BigInt) -> Self {
        assert!(r >= 0 && s >= 0 && r + s > 0, "monomial must have positive degree");
        let span = |step: i64, lo: i64, hi: i64| {
            if step == 0 {
                i64::MAX
            } else {
                assert!(hi != EXACT, "binomial series needs a finite trust box");
                (hi - lo).max(-1) / step
            }
        };
        let kmax = span(r, self.lo.0, self.hi.0).min(span(s, self.lo.1, self.hi.1));
        let mut binom = BigInt::one();
        let mut out = Self::zero(self.lo, self.hi);
        for (&(i, j), v) in &self.terms {
            out.accumulate(i, j, v.clone());
        }
        let mut k = 0i64;
        while k < kmax {
            k += 1;
            binom = binom * (e - BigInt::from(k - 1)) / BigInt::from(k);
            if binom.is_zero() {
                break;
            }
            let c = if k % 2 == 1 { -binom.clone() } else { binom.clone() };
            let c = BigRational::from_integer(c);
            for (&(i, j), v) in &self.terms {
                let (ii, jj) = (i + k * r, j + k * s);
                if ii <= self.hi.0 && jj <= self.hi.1 {
                    out.accumulate(ii, jj, v * &c);
                }
            }
        }
        out
    }

    /// Largest absolute coefficient, zero for the zero series.
    pub fn max_abs(&self) -> BigRational {
        self.terms.values().map(|v| v.abs()).max().unwrap_or_else(BigRational::zero)
    }
}

impl<C: Coefficient> Add<&BiSeries<C>> for &BiSeries<C> {
    type Output = BiSeries<C>;
    fn add(self, rhs: &BiSeries<C>) -> BiSeries<C> {
        self.combine(rhs, false)
    }
}

impl<C: Coefficient> Sub<&BiSeries<C>> for &BiSeries<C> {
    type Output = BiSeries<C>;
    fn sub(self, rhs: &BiSeries<C>) -> BiSeries<C> {
        self.combine(rhs, true)
    }
}

impl<C: Coefficient> Mul<&BiSeries<C>> for &BiSeries<C> {
    type Output = BiSeries<C>;
    fn mul(self, rhs: &BiSeries<C>) -> BiSeries<C> {
        self.product(rhs)
    }
}

impl<C: Coefficient> Neg for &BiSeries<C> {
    type Output = BiSeries<C>;
    fn neg(self) -> BiSeries<C> {
        BiSeries::from_terms(self.terms.iter().map(|(k, v)| (*k, -v.clone())), self.lo, self.hi)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::qseries::laurent::rat;
    use proptest::prelude::*;

    fn ints(v: i64, c: &[i64], p: i64) -> LaurentSeries {
        LaurentSeries::from_integers(v, c, p).unwrap()
    }

    #[test]
    fn embedding_and_lookup() {
        let f = ints(-1, &[1, 0, 196884], 2);
        let bp = BiSeries::from_laurent(&f, Var::P);
        assert_eq!(bp.coeff(-1, 0), Some(rat(1)));
        assert_eq!(bp.coeff(1, 0), Some(rat(196884)));
        assert_eq!(bp.coeff(1, 7), Some(rat(0)));
        assert_eq!(bp.coeff(2, 0), None);
        let bq = bp.transpose();
        assert_eq!(bq, BiSeries::from_laurent(&f, Var::Q));
        assert_eq!(bq.coeff(0, 1), Some(rat(196884)));
    }

    #[test]
    fn box_propagates_through_products() {
        let pre = &BiSeries::monomial(-1, 0, rat(1)) - &BiSeries::monomial(0, -1, rat(1));
        let body = BiSeries::<BigRational>::from_terms([((0, 0), rat(1))], (0, 0), (7, 7));
        let prod = &pre * &body;
        assert_eq!(prod.trust_box(), (6, 6));
        assert_eq!(prod.lower_bounds(), (-1, -1));
        assert_eq!(prod.coeff(-1, 0), Some(rat(1)));
        assert_eq!(prod.coeff(0, -1), Some(rat(-1)));
    }

    #[test]
    fn binomial_factor_matches_repeated_multiplication() {
        let one = BiSeries::<BigRational>::from_terms([((0, 0), rat(1))], (0, 0), (5, 4));
        let factor = &one - &BiSeries::monomial(1, 1, rat(1)).truncate((5, 4));
        let mut cube = one.clone();
        for _ in 0..3 {
            cube = &cube * &factor;
        }
        assert_eq!(one.mul_one_minus_monomial_pow(1, 1, &BigInt::from(3)), cube);
        let inv = one.mul_one_minus_monomial_pow(1, 1, &BigInt::from(-3));
        assert_eq!(&inv * &cube, one);
        let zero_pow = one.mul_one_minus_monomial_pow(2, 1, &BigInt::from(0));
        assert_eq!(zero_pow, one);
    }

    #[test]
    fn huge_exponents_stay_exact() {
        let one = BiSeries::<BigRational>::from_terms([((0, 0), rat(1))], (0, 0), (2, 0));
        let e: BigInt = "6000000000000000000000000000000000001".parse().unwrap();
        let s = one.mul_one_minus_monomial_pow(1, 0, &e);
        assert_eq!(s.coeff(1, 0), Some(BigRational::from_integer(-e.clone())));
        let c2 = &e * (&e - 1) / 2;
        assert_eq!(s.coeff(2, 0), Some(BigRational::from_integer(c2)));
    }

    #[test]
    fn floating_coefficients_work() {
        let a = BiSeries::<f64>::from_terms([((1, 0), 2.0), ((0, 1), -1.0)], (0, 0), (3, 3));
        let sq = &a * &a;
        assert_eq!(sq.coeff(2, 0), Some(4.0));
        assert_eq!(sq.coeff(1, 1), Some(-4.0));
        assert_eq!(sq.trust_box(), (3, 3));
    }

    fn small_series() -> impl Strategy<Value = LaurentSeries> {
        (-1i64..2, prop::collection::vec(-6i64..6, 1..6))
            .prop_map(|(v, c)| LaurentSeries::from_integers(v, &c, v + c.len() as i64).unwrap())
    }

    proptest! {
        #[test]
        fn one_variable_products_agree(f in small_series(), g in small_series()) {
            let lhs = &BiSeries::from_laurent(&f, Var::P) * &BiSeries::from_laurent(&g, Var::P);
            prop_assert_eq!(lhs, BiSeries::from_laurent(&(&f * &g), Var::P));
            let lhs = &BiSeries::from_laurent(&f, Var::Q) * &BiSeries::from_laurent(&g, Var::Q);
            prop_assert_eq!(lhs, BiSeries::from_laurent(&(&f * &g), Var::Q));
        }

        #[test]
        fn separable_products_multiply_coefficients(f in small_series(), g in small_series()) {
            let prod = &BiSeries::from_laurent(&f, Var::P) * &BiSeries::from_laurent(&g, Var::Q);
            for i in f.valuation()..f.precision() {
                for j in g.valuation()..g.precision() {
                    let want = f.coefficient(i).unwrap() * g.coefficient(j).unwrap();
                    prop_assert_eq!(prod.coeff(i, j), Some(want));
                }
            }
        }

        #[test]
        fn transpose_is_involution(f in small_series(), g in small_series()) {
            let s = &BiSeries::from_laurent(&f, Var::P) + &BiSeries::from_laurent(&g, Var::Q);
            prop_assert_eq!(s.transpose().transpose(), s);
        }
    }
}
