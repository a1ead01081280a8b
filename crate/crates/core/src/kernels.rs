//! Fourier data of the weight-2 kernel: Eisenstein coefficients `e_{r,N}`
//! and Poincaré coefficients `p_{r′,N}(r)` as Kloosterman–Bessel sums.

use std::f64::consts::PI;

use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::{One, ToPrimitive, Zero};
use serde::{Deserialize, Serialize};

use crate::arith::{
    dedekind_psi, divisor_count, divisor_dirichlet_tail, divisors, factorize, gcd, mobius, mobius_sieve, sigma1,
    KloostermanEvaluator,
};
use crate::numeric::deterministic_sums;
use crate::qseries::BiSeries;
use crate::special::{bessel_i1_detailed, bessel_j1_detailed, SeriesEvalPolicy};
use crate::{Error, Result};

const EPS: f64 = f64::EPSILON;

fn rat(n: i64) -> BigRational {
    BigRational::from_integer(BigInt::from(n))
}

fn require_positive(op: &'static str, what: &str, n: u64) -> Result<()> {
    if n == 0 {
        Err(Error::domain(op, format!("{what} must be positive")))
    } else {
        Ok(())
    }
}

/// `E₂,N` at the cusp `i∞`: `1 + nonholo/(π·Im z) + Σ_{r≥1} e_{r,N} pʳ`.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct EisensteinExpansion {
    pub level: u64,
    pub constant_term: BigRational,
    pub nonholo_coefficient: BigRational,
    /// `coefficients[r − 1] = e_{r,N}`.
    pub coefficients: Vec<BigRational>,
}

impl EisensteinExpansion {
    pub fn new(level: u64, r_max: u64) -> Result<Self> {
        Ok(Self {
            level,
            constant_term: BigRational::one(),
            nonholo_coefficient: nonholomorphic_coefficient(level)?,
            coefficients: (1..=r_max).map(|r| eisenstein_exact(level, r)).collect::<Result<_>>()?,
        })
    }
}

/// Multiplier of `1/(π·Im z)`: `−3ψ(N)/N²`.
pub fn nonholomorphic_coefficient(level: u64) -> Result<BigRational> {
    require_positive("nonholomorphic_coefficient", "level", level)?;
    let psi = dedekind_psi(level)? as i64;
    Ok(BigRational::new(BigInt::from(-3 * psi), BigInt::from(level) * BigInt::from(level)))
}

/// Exact `e_{r,N} = −24r Σ_{l|r} μ(N_l) / (l·N_l²·Π_{p|N_l}(1 − p⁻²))`
/// with `N_l = N/gcd(N, l)`.
pub fn eisenstein_exact(level: u64, r: u64) -> Result<BigRational> {
    require_positive("eisenstein_exact", "level", level)?;
    require_positive("eisenstein_exact", "r", r)?;
    let mut total = BigRational::zero();
    for l in divisors(r) {
        let nl = level / gcd(level, l);
        let mu = mobius(nl)?;
        if mu == 0 {
            continue;
        }
        let mut den = BigRational::from_integer(BigInt::from(l) * BigInt::from(nl) * BigInt::from(nl));
        for (p, _) in factorize(nl) {
            let p = p as i64;
            den *= BigRational::new(BigInt::from(p * p - 1), BigInt::from(p * p));
        }
        total += rat(i64::from(mu)) / den;
    }
    Ok(total * rat(-24 * r as i64))
}

/// Truncated literal sum with a rigorous bound on the distance to the limit.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct EisensteinNumeric {
    pub level: u64,
    pub r: u64,
    pub c_max: u64,
    pub value: f64,
    pub tail_bound: f64,
}

/// `−4π²r Σ_{N|c≤c_max} c⁻² Σ_{l|(c,r)} μ(c/l)·l`.
///
/// The inner sum is bounded by `σ₁(r)`, so the omitted moduli contribute
/// at most `4π²rσ₁(r)/(N²⌊c_max/N⌋)`.
pub fn eisenstein_numeric(level: u64, r: u64, c_max: u64) -> Result<EisensteinNumeric> {
    require_positive("eisenstein_numeric", "level", level)?;
    require_positive("eisenstein_numeric", "r", r)?;
    if c_max < level {
        return Err(Error::EmptySum { level, c_max });
    }
    let mu = mobius_sieve(c_max as usize);
    let moduli: Vec<u64> = (level..=c_max).step_by(level as usize).collect();
    let sums = deterministic_sums(&moduli, 2, |c, out| {
        let inner: i64 = divisors(gcd(c, r))
            .into_iter()
            .map(|l| i64::from(mu[(c / l) as usize]) * l as i64)
            .sum();
        let t = inner as f64 / (c as f64 * c as f64);
        out[0] = t;
        out[1] = t.abs();
    });
    let scale = 4.0 * PI * PI * r as f64;
    let k = (c_max / level) as f64;
    let truncation = scale * sigma1(r)? as f64 / ((level * level) as f64 * k);
    let rounding = 8.0 * EPS * scale * sums[1];
    Ok(EisensteinNumeric { level, r, c_max, value: -scale * sums[0], tail_bound: truncation + rounding })
}

/// One Poincaré coefficient `p_{r′,N}(r)` truncated at `c_max`.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct PoincareCoefficient {
    pub level: u64,
    pub rprime: i64,
    pub r: u64,
    pub value: f64,
    pub c_max: u64,
    /// Bound on the omitted moduli `c > c_max`.
    pub tail_bound: f64,
    /// Bound on floating-point error in the computed partial sum.
    pub rounding_bound: f64,
}

impl PoincareCoefficient {
    pub fn error_bound(&self) -> f64 {
        self.tail_bound + self.rounding_bound
    }
}

fn check_poincare(level: u64, rprime: i64, r: u64, c_max: u64) -> Result<()> {
    require_positive("poincare_coeff", "level", level)?;
    require_positive("poincare_coeff", "r", r)?;
    if rprime == 0 {
        return Err(Error::domain("poincare_coeff", "r' must be nonzero"));
    }
    if c_max < level {
        return Err(Error::EmptySum { level, c_max });
    }
    Ok(())
}

/// `Σ_{c>c_max, N|c}` of the termwise bound
/// `4π²·r·√gcd(r,r′)·ρ·d(c)·c^{−3/2}`, where `ρ` bounds `|B(x)|/(x/2)` for
/// the Bessel factor `B` on the omitted range (1 for `J₁`, `I₁(x₀)/(x₀/2)`
/// at the largest omitted argument for `I₁`). Uses `d(Nk) ≤ d(N)d(k)`.
fn poincare_tail(level: u64, rprime: i64, r: u64, c_max: u64, policy: &SeriesEvalPolicy) -> Result<f64> {
    let rp = rprime.unsigned_abs();
    let rho = if rprime > 0 {
        let x0 = 4.0 * PI * ((r * rp) as f64).sqrt() / (c_max + 1) as f64;
        let i1 = bessel_i1_detailed(x0, policy)?;
        ((i1.value + i1.error_bound) / (x0 / 2.0)) * (1.0 + 4.0 * EPS)
    } else {
        1.0
    };
    let g = (gcd(r, rp) as f64).sqrt();
    let k = c_max / level;
    let dirichlet = divisor_dirichlet_tail(1.5, k);
    Ok(4.0 * PI * PI * r as f64 * g * rho * divisor_count(level)? as f64 * (level as f64).powf(-1.5) * dirichlet)
}

/// Evaluates a family of `p_{r′,N}(r)` sharing `N` and `c_max` in one pass
/// over the moduli; each modulus builds its Kloosterman table once.
pub fn poincare_family(level: u64, pairs: &[(i64, u64)], c_max: u64) -> Result<Vec<PoincareCoefficient>> {
    for &(rprime, r) in pairs {
        check_poincare(level, rprime, r, c_max)?;
    }
    if pairs.is_empty() {
        return Ok(Vec::new());
    }
    let policy = SeriesEvalPolicy::default();
    let moduli: Vec<u64> = (level..=c_max).step_by(level as usize).collect();
    let width = pairs.len();
    let failure = std::sync::Mutex::new(None);
    let sums = deterministic_sums(&moduli, 2 * width, |c, out| {
        let ev = match KloostermanEvaluator::new(c) {
            Ok(ev) => ev,
            Err(e) => {
                failure.lock().unwrap().get_or_insert(e);
                out.fill(0.0);
                return;
            }
        };
        let k_err = ev.term_count() as f64 * EPS * 4.0 * PI;
        for (slot, &(rprime, r)) in pairs.iter().enumerate() {
            let rp = rprime.unsigned_abs();
            let x = 4.0 * PI * ((r * rp) as f64).sqrt() / c as f64;
            let bessel = if rprime > 0 { bessel_i1_detailed(x, &policy) } else { bessel_j1_detailed(x, &policy) };
            let b = match bessel {
                Ok(b) => b,
                Err(e) => {
                    failure.lock().unwrap().get_or_insert(e);
                    out[2 * slot] = 0.0;
                    out[2 * slot + 1] = 0.0;
                    continue;
                }
            };
            let kv = ev.eval(-(r as i64), rprime);
            let term = kv * b.value / c as f64;
            out[2 * slot] = term;
            out[2 * slot + 1] = (k_err * b.value.abs() + kv.abs() * b.error_bound) / c as f64 + 4.0 * EPS * term.abs();
        }
    });
    if let Some(e) = failure.into_inner().unwrap() {
        return Err(e);
    }
    pairs
        .iter()
        .enumerate()
        .map(|(slot, &(rprime, r))| {
            let pref = -2.0 * PI * (r as f64 / rprime.unsigned_abs() as f64).sqrt();
            let value = pref * sums[2 * slot];
            Ok(PoincareCoefficient {
                level,
                rprime,
                r,
                value,
                c_max,
                tail_bound: poincare_tail(level, rprime, r, c_max, &policy)?,
                rounding_bound: pref.abs() * sums[2 * slot + 1] + 4.0 * EPS * value.abs(),
            })
        })
        .collect()
}

/// `p_{r′,N}(r) = −2π√(r/|r′|) Σ_{N|c≤c_max} K(−r, r′; c)/c · B(4π√(r|r′|)/c)`
/// with `B = I₁` for `r′ > 0` and `B = J₁` for `r′ < 0`.
pub fn poincare_coeff(level: u64, rprime: i64, r: u64, c_max: u64) -> Result<PoincareCoefficient> {
    Ok(poincare_family(level, &[(rprime, r)], c_max)?.remove(0))
}

/// The kernel's `p`/`q` expansion over `0 ≤ i ≤ A`, `0 ≤ j ≤ B`: the pure-`p`
/// row holds `e_{r,N}` (with the constant 1) and entry `(r, r′)` holds
/// `p_{r′,N}(r)`. Terms with `r′ ≤ 0` vanish in genus zero and are omitted.
pub fn kernel_biseries(level: u64, a: u64, b: u64, c_max: u64) -> Result<BiSeries<f64>> {
    if a == 0 || b == 0 {
        return Err(Error::domain("kernel_biseries", "box dimensions must be at least 1"));
    }
    let mut terms = vec![((0, 0), 1.0)];
    for r in 1..=a {
        terms.push(((r as i64, 0), eisenstein_exact(level, r)?.to_f64().unwrap_or(f64::NAN)));
    }
    let pairs: Vec<(i64, u64)> = (1..=a).flat_map(|r| (1..=b as i64).map(move |rp| (rp, r))).collect();
    for p in poincare_family(level, &pairs, c_max)? {
        terms.push(((p.r as i64, p.rprime), p.value));
    }
    Ok(BiSeries::from_terms(terms, (0, 0), (a as i64, b as i64)))
}
