//! Bessel functions of the first kind of order one, by ascending series.
//!
//! `I₁(x) = Σ (x/2)^{2k+1}/(k!(k+1)!)` and `J₁(x) = Σ (−1)^k (x/2)^{2k+1}/(k!(k+1)!)`.
//! Arguments in this crate are `4π√(rr′)/c`, small enough that the ascending
//! series is the whole story provided the accumulation is carried in
//! double-double precision.

mod dd;

pub use dd::DoubleDouble;

use crate::{Error, Result};

/// Working precision of the series accumulator.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq)]
pub enum Accumulation {
    Double,
    #[default]
    DoubleDouble,
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct SeriesEvalPolicy {
    /// Stop once the remaining tail is provably below this.
    pub absolute_tolerance: f64,
    pub max_terms: usize,
    pub accumulation: Accumulation,
}

impl SeriesEvalPolicy {
    pub fn new(absolute_tolerance: f64, max_terms: usize) -> Result<Self> {
        if !(absolute_tolerance > 0.0 && absolute_tolerance.is_finite()) {
            return Err(Error::domain("SeriesEvalPolicy", "tolerance must be positive and finite"));
        }
        if max_terms == 0 {
            return Err(Error::domain("SeriesEvalPolicy", "max_terms must be at least 1"));
        }
        Ok(Self { absolute_tolerance, max_terms, accumulation: Accumulation::DoubleDouble })
    }

    pub fn with_accumulation(mut self, accumulation: Accumulation) -> Self {
        self.accumulation = accumulation;
        self
    }
}

impl Default for SeriesEvalPolicy {
    fn default() -> Self {
        Self { absolute_tolerance: 1e-20, max_terms: 2000, accumulation: Accumulation::DoubleDouble }
    }
}

/// A series value with its total error bound (truncation plus rounding).
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct SeriesValue {
    pub value: f64,
    pub error_bound: f64,
    pub terms: usize,
}

trait Accumulator: Copy + std::ops::Add<Output = Self> + std::ops::Mul<Output = Self> {
    /// Unit roundoff, padded for the non-faithful double-double operations.
    const UNIT_ROUNDOFF: f64;
    fn from_f64(x: f64) -> Self;
    fn to_f64(self) -> f64;
    fn div_f64(self, d: f64) -> Self;
}

impl Accumulator for f64 {
    const UNIT_ROUNDOFF: f64 = f64::EPSILON / 2.0;
    fn from_f64(x: f64) -> Self {
        x
    }
    fn to_f64(self) -> f64 {
        self
    }
    fn div_f64(self, d: f64) -> Self {
        self / d
    }
}

impl Accumulator for DoubleDouble {
    const UNIT_ROUNDOFF: f64 = 1.0 / (1u128 << 100) as f64;
    fn from_f64(x: f64) -> Self {
        DoubleDouble::from_f64(x)
    }
    fn to_f64(self) -> f64 {
        DoubleDouble::to_f64(self)
    }
    fn div_f64(self, d: f64) -> Self {
        DoubleDouble::div_f64(self, d)
    }
}

fn ascending_series<T: Accumulator>(x: f64, alternating: bool, policy: &SeriesEvalPolicy) -> Result<SeriesValue> {
    let half = T::from_f64(x / 2.0);
    let step = if alternating {
        T::from_f64(-(x / 2.0)) * half
    } else {
        half * half
    };
    let h2 = (x / 2.0) * (x / 2.0);

    let mut term = half;
    let mut sum = half;
    // Σ |t_k|·(k+1): each term carries O(k) roundings from the recurrence.
    let mut weighted_mass = (x / 2.0).abs();
    let mut terms = 1usize;
    loop {
        let k = terms - 1;
        let next = (term * step).div_f64(((k + 1) * (k + 2)) as f64);
        let next_abs = next.to_f64().abs();
        let ratio_after = h2 / ((k + 2) * (k + 3)) as f64;
        if ratio_after < 1.0 {
            let tail = if alternating { next_abs } else { next_abs / (1.0 - ratio_after) };
            if tail <= policy.absolute_tolerance {
                let value = sum.to_f64();
                if !value.is_finite() {
                    return Err(Error::domain("bessel", format!("argument {x} overflows")));
                }
                let rounding = 4.0 * T::UNIT_ROUNDOFF * weighted_mass * (terms as f64 + 2.0);
                let conversion = value.abs() * f64::EPSILON / 2.0;
                return Ok(SeriesValue { value, error_bound: tail + rounding + conversion, terms });
            }
        }
        if terms >= policy.max_terms {
            return Err(Error::Truncated { partial: sum.to_f64(), bound: next_abs, terms });
        }
        term = next;
        sum = sum + next;
        terms += 1;
        weighted_mass += next_abs * terms as f64;
    }
}

fn evaluate(x: f64, alternating: bool, policy: &SeriesEvalPolicy) -> Result<SeriesValue> {
    if !(x >= 0.0 && x.is_finite()) {
        return Err(Error::domain("bessel", format!("argument must be finite and >= 0, got {x}")));
    }
    match policy.accumulation {
        Accumulation::Double => ascending_series::<f64>(x, alternating, policy),
        Accumulation::DoubleDouble => ascending_series::<DoubleDouble>(x, alternating, policy),
    }
}

/// Modified Bessel function `I₁(x)` with its error bound.
pub fn bessel_i1_detailed(x: f64, policy: &SeriesEvalPolicy) -> Result<SeriesValue> {
    evaluate(x, false, policy)
}

/// Bessel function `J₁(x)` with its error bound.
pub fn bessel_j1_detailed(x: f64, policy: &SeriesEvalPolicy) -> Result<SeriesValue> {
    evaluate(x, true, policy)
}

pub fn bessel_i1(x: f64, policy: &SeriesEvalPolicy) -> Result<f64> {
    bessel_i1_detailed(x, policy).map(|v| v.value)
}

pub fn bessel_j1(x: f64, policy: &SeriesEvalPolicy) -> Result<f64> {
    bessel_j1_detailed(x, policy).map(|v| v.value)
}
