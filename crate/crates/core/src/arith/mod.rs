//! Exact number-theoretic primitives.
//!
//! Multiplicative functions take `u64` arguments and reject `0`, which lies
//! outside their domain. Kloosterman sums live in [`kloosterman`], the
//! on-disk value cache in [`cache`].

pub mod cache;
pub mod kloosterman;

pub use cache::KloostermanCache;
pub use kloosterman::{
    inverse_table, kloosterman, kloosterman_complex, kloosterman_crt, kloosterman_phase_counts,
    kloosterman_value, mod_inverse, selberg_sides, weil_bound, weil_margin, InverseTable,
    KloostermanEvaluator, KloostermanKey, KloostermanValue,
};

use crate::{Error, Result};

fn positive(op: &'static str, n: u64) -> Result<()> {
    if n == 0 {
        Err(Error::domain(op, "argument must be a positive integer"))
    } else {
        Ok(())
    }
}

/// Prime factorization by trial division, primes in ascending order.
pub fn factorize(mut n: u64) -> Vec<(u64, u32)> {
    let mut out = Vec::new();
    let mut p = 2u64;
    while p.saturating_mul(p) <= n {
        if n.is_multiple_of(p) {
            let mut e = 0;
            while n.is_multiple_of(p) {
                n /= p;
                e += 1;
            }
            out.push((p, e));
        }
        p += if p == 2 { 1 } else { 2 };
    }
    if n > 1 {
        out.push((n, 1));
    }
    out
}

/// Positive divisors of `n`, ascending. Empty for `n = 0`.
pub fn divisors(n: u64) -> Vec<u64> {
    if n == 0 {
        return Vec::new();
    }
    let mut divs = vec![1u64];
    for (p, e) in factorize(n) {
        let len = divs.len();
        let mut pk = 1;
        for _ in 0..e {
            pk *= p;
            for i in 0..len {
                divs.push(divs[i] * pk);
            }
        }
    }
    divs.sort_unstable();
    divs
}

pub fn gcd(a: u64, b: u64) -> u64 {
    num_integer::gcd(a, b)
}

/// Möbius function μ(n).
pub fn mobius(n: u64) -> Result<i8> {
    positive("mobius", n)?;
    let f = factorize(n);
    if f.iter().any(|&(_, e)| e > 1) {
        return Ok(0);
    }
    Ok(if f.len().is_multiple_of(2) { 1 } else { -1 })
}

/// Number of positive divisors, σ₀(n).
pub fn divisor_count(n: u64) -> Result<u64> {
    positive("divisor_count", n)?;
    Ok(factorize(n).iter().map(|&(_, e)| u64::from(e) + 1).product())
}

/// Sum of positive divisors, σ₁(n).
pub fn sigma1(n: u64) -> Result<u64> {
    positive("sigma1", n)?;
    Ok(divisor_power_sum(n, 1) as u64)
}

/// σ_k(n) = Σ_{d|n} d^k, in `u128` (callers keep `n^k` in range).
pub fn divisor_power_sum(n: u64, k: u32) -> u128 {
    divisors(n).iter().map(|&d| u128::from(d).pow(k)).sum()
}

/// Euler's totient φ(n).
pub fn euler_phi(n: u64) -> Result<u64> {
    positive("euler_phi", n)?;
    Ok(factorize(n)
        .iter()
        .fold(n, |acc, &(p, _)| acc / p * (p - 1)))
}

/// `N·Π_{p|N}(1 + 1/p)`, the index of Γ₀(N) in SL₂(ℤ).
///
/// The value is always an integer: each `N/p` factor is exact.
pub fn dedekind_psi(n: u64) -> Result<u64> {
    positive("dedekind_psi", n)?;
    Ok(factorize(n)
        .iter()
        .fold(n, |acc, &(p, _)| acc / p * (p + 1)))
}

/// Möbius values for `0..=limit` (index 0 holds 0).
pub fn mobius_sieve(limit: usize) -> Vec<i8> {
    let mut mu = vec![1i8; limit + 1];
    let mut composite = vec![false; limit + 1];
    mu[0] = 0;
    for p in 2..=limit {
        if composite[p] {
            continue;
        }
        for m in (p..=limit).step_by(p) {
            if m > p {
                composite[m] = true;
            }
            mu[m] = -mu[m];
        }
        if let Some(pp) = p.checked_mul(p) {
            for m in (pp..=limit).step_by(pp) {
                mu[m] = 0;
            }
        }
    }
    mu
}

/// Divisor counts for `0..=limit` (index 0 holds 0).
pub fn divisor_count_sieve(limit: usize) -> Vec<u32> {
    let mut d = vec![0u32; limit + 1];
    for a in 1..=limit {
        for m in (a..=limit).step_by(a) {
            d[m] += 1;
        }
    }
    d
}

/// Rigorous upper bound for `ζ(s)` from `terms` explicit terms plus the
/// integral tail `∫_terms^∞ t^{-s} dt`.
pub fn zeta_upper_bound(s: f64, terms: u64) -> f64 {
    let terms = terms.max(1);
    let head: f64 = (1..=terms).map(|n| (n as f64).powf(-s)).sum();
    head + (terms as f64).powf(1.0 - s) / (s - 1.0)
}

/// Rigorous upper bound for `Σ_{n>x} d(n)/n^s`, valid for `s > 1`, `x ≥ 1`.
///
/// Splitting `n = ab` by the smaller cofactor gives
/// `x^{1−s}·(1 + (H_x + ζ(s))/(s−1))` with `H_x` the harmonic number.
pub fn divisor_dirichlet_tail(s: f64, x: u64) -> f64 {
    let x = x.max(1);
    let harmonic = (x as f64).ln() + 1.0;
    let zeta = zeta_upper_bound(s, 64);
    (x as f64).powf(1.0 - s) * (1.0 + (harmonic + zeta) / (s - 1.0))
}

/// Partial sums of `Σ d(n)/n^s` and of `(Σ 1/n^s)²` up to `X`, with
/// analytic bounds on each side's distance to `ζ(s)²`.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct DirichletPartial {
    pub s: f64,
    pub x: u64,
    /// `Σ_{n≤X} d(n)/n^s`.
    pub divisor_sum: f64,
    /// `(Σ_{n≤X} 1/n^s)²`.
    pub zeta_square: f64,
    /// Bound on `ζ(s)² − divisor_sum`.
    pub divisor_tail: f64,
    /// Bound on `ζ(s)² − zeta_square`, namely `2ζ(s)X^{1−s}/(s−1)`.
    pub zeta_square_tail: f64,
}

impl DirichletPartial {
    /// The larger of the two tail bounds, which also bounds the gap between
    /// the two partial sums.
    pub fn tail_bound(&self) -> f64 {
        self.divisor_tail.max(self.zeta_square_tail)
    }
}

pub fn dirichlet_d_partial(s: f64, x: u64) -> Result<DirichletPartial> {
    if !(s > 1.0) {
        return Err(Error::Divergent { s });
    }
    positive("dirichlet_d_partial", x)?;
    let d = divisor_count_sieve(x as usize);
    let divisor_sum: crate::numeric::CompensatedSum =
        (1..=x).map(|n| f64::from(d[n as usize]) * (n as f64).powf(-s)).collect();
    let zeta_partial: crate::numeric::CompensatedSum =
        (1..=x).map(|n| (n as f64).powf(-s)).collect();
    let zp = zeta_partial.value();
    let zeta = zeta_upper_bound(s, x.min(1 << 16));
    Ok(DirichletPartial {
        s,
        x,
        divisor_sum: divisor_sum.value(),
        zeta_square: zp * zp,
        divisor_tail: divisor_dirichlet_tail(s, x),
        zeta_square_tail: 2.0 * zeta * (x as f64).powf(1.0 - s) / (s - 1.0),
    })
}
