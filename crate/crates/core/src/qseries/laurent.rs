use std::fmt;
use std::ops::{Add, Mul, Neg, Sub};

use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::{One, Signed, Zero};
use serde::{Deserialize, Serialize};

use crate::{Error, Result};

/// Truncated Laurent series `Σ_{n ≥ v} a_n qⁿ + O(q^P)` over ℚ.
///
/// Coefficients are stored densely from the valuation `v` up to (but not
/// including) the precision `P`. The leading stored coefficient is nonzero;
/// the zero series stores nothing and has `v = P`.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(try_from = "SeriesJson", into = "SeriesJson")]
pub struct LaurentSeries {
    valuation: i64,
    coeffs: Vec<BigRational>,
    precision: i64,
}

/// Wire format: coefficients as decimal strings, `"num/den"` when not integral.
#[derive(Serialize, Deserialize)]
struct SeriesJson {
    valuation: i64,
    precision: i64,
    coefficients: Vec<String>,
}

impl From<LaurentSeries> for SeriesJson {
    fn from(s: LaurentSeries) -> Self {
        SeriesJson {
            valuation: s.valuation,
            precision: s.precision,
            coefficients: s.coeffs.iter().map(ToString::to_string).collect(),
        }
    }
}

impl TryFrom<SeriesJson> for LaurentSeries {
    type Error = Error;

    fn try_from(j: SeriesJson) -> Result<Self> {
        let coeffs = j
            .coefficients
            .iter()
            .map(|c| c.trim().parse::<BigRational>().map_err(|_| Error::Parse(format!("bad coefficient {c:?}"))))
            .collect::<Result<Vec<_>>>()?;
        LaurentSeries::new(j.valuation, coeffs, j.precision)
    }
}

pub(crate) fn rat(n: i64) -> BigRational {
    BigRational::from_integer(BigInt::from(n))
}

impl LaurentSeries {
    /// Series with `coeffs[i]` at exponent `valuation + i`, known to `precision`.
    pub fn new(valuation: i64, coeffs: Vec<BigRational>, precision: i64) -> Result<Self> {
        if valuation + coeffs.len() as i64 > precision {
            return Err(Error::Precondition(format!(
                "{} coefficients from q^{valuation} exceed precision {precision}",
                coeffs.len()
            )));
        }
        Ok(Self::normalized(valuation, coeffs, precision))
    }

    pub fn from_integers(valuation: i64, coeffs: &[i64], precision: i64) -> Result<Self> {
        Self::new(valuation, coeffs.iter().map(|&c| rat(c)).collect(), precision)
    }

    pub(crate) fn from_bigints(valuation: i64, coeffs: Vec<BigInt>, precision: i64) -> Self {
        Self::normalized(valuation, coeffs.into_iter().map(BigRational::from_integer).collect(), precision)
    }

    fn normalized(valuation: i64, mut coeffs: Vec<BigRational>, precision: i64) -> Self {
        let lead = coeffs.iter().position(|c| !c.is_zero()).unwrap_or(coeffs.len());
        if lead == coeffs.len() {
            return Self::zero(precision);
        }
        coeffs.drain(..lead);
        let valuation = valuation + lead as i64;
        coeffs.resize((precision - valuation) as usize, BigRational::zero());
        Self { valuation, coeffs, precision }
    }

    /// `O(q^precision)`.
    pub fn zero(precision: i64) -> Self {
        Self { valuation: precision, coeffs: Vec::new(), precision }
    }

    pub fn one(precision: i64) -> Self {
        Self::monomial(0, BigRational::one(), precision)
    }

    /// `c·q^exponent + O(q^precision)`.
    pub fn monomial(exponent: i64, c: BigRational, precision: i64) -> Self {
        if exponent >= precision {
            return Self::zero(precision);
        }
        Self::normalized(exponent, vec![c], precision)
    }

    pub fn valuation(&self) -> i64 {
        self.valuation
    }

    pub fn precision(&self) -> i64 {
        self.precision
    }

    pub fn is_zero(&self) -> bool {
        self.coeffs.is_empty()
    }

    /// Coefficient of `q^n`, or `None` if `n` is beyond the precision.
    pub fn coefficient(&self, n: i64) -> Option<BigRational> {
        if n >= self.precision {
            None
        } else if n < self.valuation {
            Some(BigRational::zero())
        } else {
            Some(self.coeffs[(n - self.valuation) as usize].clone())
        }
    }

    pub fn coeff_ref(&self, n: i64) -> Option<&BigRational> {
        if n < self.valuation || n >= self.precision {
            None
        } else {
            Some(&self.coeffs[(n - self.valuation) as usize])
        }
    }

    /// Stored coefficients from the valuation upwards.
    pub fn coefficients(&self) -> &[BigRational] {
        &self.coeffs
    }

    pub fn leading_coefficient(&self) -> Option<&BigRational> {
        self.coeffs.first()
    }

    /// `(exponent, coefficient)` pairs for every stored exponent.
    pub fn terms(&self) -> impl Iterator<Item = (i64, &BigRational)> {
        self.coeffs.iter().enumerate().map(move |(i, c)| (self.valuation + i as i64, c))
    }

    pub fn is_integral(&self) -> bool {
        self.coeffs.iter().all(|c| c.is_integer())
    }

    /// Integer coefficients from the valuation, if all are integral.
    pub fn to_integers(&self) -> Option<Vec<BigInt>> {
        self.coeffs
            .iter()
            .map(|c| c.is_integer().then(|| c.to_integer()))
            .collect()
    }

    /// Equality of all coefficients both series know, i.e. below the smaller
    /// precision. Cancellation can raise a valuation and with it a product's
    /// justified precision, so equal values may carry different precisions.
    pub fn agrees_with(&self, other: &Self) -> bool {
        let p = self.precision.min(other.precision);
        self.truncate(p) == other.truncate(p)
    }

    /// Drops coefficients at and beyond `precision` (no-op if already lower).
    pub fn truncate(&self, precision: i64) -> Self {
        if precision >= self.precision {
            return self.clone();
        }
        let keep = (precision - self.valuation).max(0) as usize;
        Self::normalized(self.valuation, self.coeffs[..keep.min(self.coeffs.len())].to_vec(), precision)
    }

    /// Multiplies by `q^k`.
    pub fn shift(&self, k: i64) -> Self {
        Self { valuation: self.valuation + k, coeffs: self.coeffs.clone(), precision: self.precision + k }
    }

    pub fn scale(&self, c: &BigRational) -> Self {
        Self::normalized(self.valuation, self.coeffs.iter().map(|x| x * c).collect(), self.precision)
    }

    /// `1/f`; the result is known to `precision − 2·valuation`.
    pub fn inverse(&self) -> Result<Self> {
        let Some(lead) = self.leading_coefficient() else {
            return Err(Error::NotInvertible("zero series (leading coefficient vanishes)".into()));
        };
        let len = self.coeffs.len();
        let lead_inv = lead.recip();
        let mut w: Vec<BigRational> = Vec::with_capacity(len);
        w.push(lead_inv.clone());
        for n in 1..len {
            let mut acc = BigRational::zero();
            for i in 1..=n {
                let u = &self.coeffs[i];
                if !u.is_zero() {
                    acc += u * &w[n - i];
                }
            }
            w.push(-(acc * &lead_inv));
        }
        Ok(Self::normalized(-self.valuation, w, self.precision - 2 * self.valuation))
    }

    fn require_unit_constant(&self, op: &'static str) -> Result<()> {
        let ok = self.valuation == 0 && self.coeffs.first().is_some_and(One::is_one);
        if ok {
            Ok(())
        } else {
            Err(Error::Precondition(format!("{op} requires a series of the form 1 + O(q)")))
        }
    }

    /// Formal logarithm of `1 + O(q)`.
    pub fn log(&self) -> Result<Self> {
        self.require_unit_constant("log")?;
        let len = self.precision as usize;
        let f = &self.coeffs;
        let mut g = vec![BigRational::zero(); len];
        for n in 1..len {
            // n·g_n = n·f_n − Σ_{k<n} k·g_k·f_{n−k}
            let mut acc = &f[n] * rat(n as i64);
            for k in 1..n {
                if !g[k].is_zero() && !f[n - k].is_zero() {
                    acc -= &g[k] * &f[n - k] * rat(k as i64);
                }
            }
            g[n] = acc / rat(n as i64);
        }
        Ok(Self::normalized(0, g, self.precision))
    }

    /// Formal exponential of a series with positive valuation.
    pub fn exp(&self) -> Result<Self> {
        if self.valuation < 1 {
            return Err(Error::Precondition("exp requires valuation >= 1".into()));
        }
        let len = self.precision.max(0) as usize;
        let f = |k: usize| self.coeff_ref(k as i64);
        let mut g = vec![BigRational::zero(); len];
        if len > 0 {
            g[0] = BigRational::one();
        }
        for n in 1..len {
            let mut acc = BigRational::zero();
            for k in 1..=n {
                if let Some(fk) = f(k) {
                    if !fk.is_zero() {
                        acc += fk * &g[n - k] * rat(k as i64);
                    }
                }
            }
            g[n] = acc / rat(n as i64);
        }
        Ok(Self::normalized(0, g, self.precision))
    }

    fn combine(&self, other: &Self, sign: i64) -> Self {
        let precision = self.precision.min(other.precision);
        let valuation = self.valuation.min(other.valuation).min(precision);
        let len = (precision - valuation) as usize;
        let mut out = vec![BigRational::zero(); len];
        for (e, c) in self.terms().take_while(|&(e, _)| e < precision) {
            out[(e - valuation) as usize] += c;
        }
        for (e, c) in other.terms().take_while(|&(e, _)| e < precision) {
            if sign > 0 {
                out[(e - valuation) as usize] += c;
            } else {
                out[(e - valuation) as usize] -= c;
            }
        }
        Self::normalized(valuation, out, precision)
    }

    fn product(&self, other: &Self) -> Self {
        let valuation = self.valuation + other.valuation;
        let precision = (self.precision + other.valuation).min(other.precision + self.valuation);
        if self.is_zero() || other.is_zero() {
            return Self::zero(precision);
        }
        let len = (precision - valuation).max(0) as usize;
        let mut out = vec![BigRational::zero(); len];
        for (i, a) in self.coeffs.iter().enumerate().take(len) {
            if a.is_zero() {
                continue;
            }
            for (j, b) in other.coeffs.iter().enumerate().take(len - i) {
                if !b.is_zero() {
                    out[i + j] += a * b;
                }
            }
        }
        Self::normalized(valuation, out, precision)
    }
}

impl Add<&LaurentSeries> for &LaurentSeries {
    type Output = LaurentSeries;
    fn add(self, rhs: &LaurentSeries) -> LaurentSeries {
        self.combine(rhs, 1)
    }
}

impl Sub<&LaurentSeries> for &LaurentSeries {
    type Output = LaurentSeries;
    fn sub(self, rhs: &LaurentSeries) -> LaurentSeries {
        self.combine(rhs, -1)
    }
}

impl Mul<&LaurentSeries> for &LaurentSeries {
    type Output = LaurentSeries;
    fn mul(self, rhs: &LaurentSeries) -> LaurentSeries {
        self.product(rhs)
    }
}

impl Neg for &LaurentSeries {
    type Output = LaurentSeries;
    fn neg(self) -> LaurentSeries {
        LaurentSeries {
            valuation: self.valuation,
            coeffs: self.coeffs.iter().map(|c| -c).collect(),
            precision: self.precision,
        }
    }
}

macro_rules! forward_owned {
    ($($tr:ident::$f:ident),*) => {$(
        impl $tr<LaurentSeries> for LaurentSeries {
            type Output = LaurentSeries;
            fn $f(self, rhs: LaurentSeries) -> LaurentSeries {
                (&self).$f(&rhs)
            }
        }
        impl $tr<&LaurentSeries> for LaurentSeries {
            type Output = LaurentSeries;
            fn $f(self, rhs: &LaurentSeries) -> LaurentSeries {
                (&self).$f(rhs)
            }
        }
    )*};
}
forward_owned!(Add::add, Sub::sub, Mul::mul);

impl Neg for LaurentSeries {
    type Output = LaurentSeries;
    fn neg(self) -> LaurentSeries {
        -&self
    }
}

impl fmt::Display for LaurentSeries {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let mut first = true;
        for (e, c) in self.terms().filter(|(_, c)| !c.is_zero()) {
            let sign = if c.is_negative() { "-" } else { "+" };
            if first {
                if c.is_negative() {
                    write!(f, "-")?;
                }
            } else {
                write!(f, " {sign} ")?;
            }
            first = false;
            let mag = c.abs();
            match (e, mag.is_one()) {
                (0, _) => write!(f, "{mag}")?,
                (1, true) => write!(f, "q")?,
                (_, true) => write!(f, "q^{e}")?,
                (1, false) => write!(f, "{mag}*q")?,
                (_, false) => write!(f, "{mag}*q^{e}")?,
            }
        }
        if first {
            write!(f, "O(q^{})", self.precision)
        } else {
            write!(f, " + O(q^{})", self.precision)
        }
    }
}
