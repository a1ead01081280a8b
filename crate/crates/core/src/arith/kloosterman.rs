//! Kloosterman sums `K(a,b;c) = Σ_{m mod c, (m,c)=1} e((a·m + b·m*)/c)`.
//!
//! The sum is real (pair `m` with `−m`), so it is evaluated as a sum of
//! cosines, in ascending `m`, with compensated accumulation. `K(a,b;1) = 1`:
//! the single residue class modulo 1 contributes `e(0)`.

use std::cmp::Ordering;
use std::f64::consts::TAU;

use super::{divisor_count, divisors, factorize, gcd};
use crate::numeric::CompensatedSum;
use crate::{Error, Result};

/// Largest supported modulus; keeps `a·m + b·m*` inside `u64`.
pub const MAX_MODULUS: u64 = 1 << 31;

fn check_modulus(op: &'static str, c: u64) -> Result<()> {
    if c == 0 {
        Err(Error::domain(op, "modulus must be >= 1"))
    } else if c > MAX_MODULUS {
        Err(Error::domain(op, format!("modulus {c} exceeds 2^31")))
    } else {
        Ok(())
    }
}

fn reduce(a: i64, c: u64) -> u64 {
    i128::from(a).rem_euclid(i128::from(c)) as u64
}

/// Inverse of `a` modulo `c` by the extended Euclidean algorithm.
pub fn mod_inverse(a: u64, c: u64) -> Option<u64> {
    if c == 0 {
        return None;
    }
    if c == 1 {
        return Some(0);
    }
    let (mut old_r, mut r) = (i128::from(a % c), i128::from(c));
    let (mut old_s, mut s) = (1i128, 0i128);
    while r != 0 {
        let q = old_r / r;
        (old_r, r) = (r, old_r - q * r);
        (old_s, s) = (s, old_s - q * s);
    }
    if old_r != 1 {
        return None;
    }
    Some(old_s.rem_euclid(i128::from(c)) as u64)
}

/// Arguments of a Kloosterman sum, reduced modulo `c`.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub struct KloostermanKey {
    pub a: u64,
    pub b: u64,
    pub c: u64,
}

impl KloostermanKey {
    pub fn new(a: i64, b: i64, c: u64) -> Result<Self> {
        check_modulus("KloostermanKey", c)?;
        Ok(Self { a: reduce(a, c), b: reduce(b, c), c })
    }
}

impl Ord for KloostermanKey {
    fn cmp(&self, other: &Self) -> Ordering {
        (self.c, self.a, self.b).cmp(&(other.c, other.a, other.b))
    }
}

impl PartialOrd for KloostermanKey {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct KloostermanValue {
    pub value: f64,
    /// Number of residues summed (φ(c), or 1 for c = 1).
    pub term_count: u64,
}

impl KloostermanValue {
    /// A priori floating error: `term_count · ε · 4π`.
    pub fn error_bound(&self) -> f64 {
        self.term_count as f64 * f64::EPSILON * 2.0 * TAU
    }
}

/// Modular inverses of all units modulo `c`.
#[derive(Clone, Debug)]
pub struct InverseTable {
    modulus: u64,
    // inv[m] = m* for units, 0 otherwise (0 is never an inverse for c > 1).
    inv: Vec<u32>,
}

impl InverseTable {
    pub fn modulus(&self) -> u64 {
        self.modulus
    }

    /// The inverse of `m` when `1 ≤ m < c` and `gcd(m, c) = 1`.
    pub fn get(&self, m: u64) -> Option<u64> {
        if m == 0 || m >= self.modulus {
            return None;
        }
        match self.inv[m as usize] {
            0 => None,
            x => Some(u64::from(x)),
        }
    }

    /// `(m, m*)` pairs in ascending `m`.
    pub fn units(&self) -> impl Iterator<Item = (u64, u64)> + '_ {
        self.inv
            .iter()
            .enumerate()
            .filter(|&(_, &x)| x != 0)
            .map(|(m, &x)| (m as u64, u64::from(x)))
    }
}

/// All inverses modulo `c` in `O(c)` multiplications.
///
/// Units are found by sieving out multiples of the primes dividing `c`; their
/// inverses come from one extended-gcd inversion of the running product
/// followed by a backward sweep.
pub fn inverse_table(c: u64) -> Result<InverseTable> {
    check_modulus("inverse_table", c)?;
    let n = c as usize;
    let mut is_unit = vec![true; n];
    if n > 0 {
        is_unit[0] = false;
    }
    for (p, _) in factorize(c) {
        for m in (0..n).step_by(p as usize) {
            is_unit[m] = false;
        }
    }
    let units: Vec<u64> = (1..c).filter(|&m| is_unit[m as usize]).collect();
    let mut prefix = Vec::with_capacity(units.len());
    let mut acc = 1u64;
    for &m in &units {
        acc = acc * m % c;
        prefix.push(acc);
    }
    let mut inv = vec![0u32; n];
    if let Some(&total) = prefix.last() {
        let mut running = mod_inverse(total, c).expect("product of units is a unit");
        for i in (0..units.len()).rev() {
            let before = if i == 0 { 1 } else { prefix[i - 1] };
            inv[units[i] as usize] = (running * before % c) as u32;
            running = running * units[i] % c;
        }
    }
    Ok(InverseTable { modulus: c, inv })
}

/// Precomputed units and cosine table for one modulus; evaluates many
/// `K(a, b; c)` with the same `c`.
#[derive(Clone, Debug)]
pub struct KloostermanEvaluator {
    modulus: u64,
    units: Vec<(u32, u32)>,
    cosines: Vec<f64>,
}

impl KloostermanEvaluator {
    pub fn new(c: u64) -> Result<Self> {
        check_modulus("kloosterman", c)?;
        let units = if c == 1 {
            vec![(0, 0)]
        } else {
            inverse_table(c)?
                .units()
                .map(|(m, x)| (m as u32, x as u32))
                .collect()
        };
        let cosines = (0..c)
            .map(|k| {
                // cos is even: use the representative nearest 0 for accuracy.
                let k = k.min(c - k);
                (TAU * k as f64 / c as f64).cos()
            })
            .collect();
        Ok(Self { modulus: c, units, cosines })
    }

    pub fn modulus(&self) -> u64 {
        self.modulus
    }

    pub fn term_count(&self) -> u64 {
        self.units.len() as u64
    }

    pub fn eval(&self, a: i64, b: i64) -> f64 {
        let c = self.modulus;
        let (a, b) = (reduce(a, c), reduce(b, c));
        let mut acc = CompensatedSum::new();
        for &(m, x) in &self.units {
            let k = (a * u64::from(m) + b * u64::from(x)) % c;
            acc.add(self.cosines[k as usize]);
        }
        acc.value()
    }

    pub fn value(&self, a: i64, b: i64) -> KloostermanValue {
        KloostermanValue { value: self.eval(a, b), term_count: self.term_count() }
    }
}

pub fn kloosterman(a: i64, b: i64, c: u64) -> Result<f64> {
    Ok(KloostermanEvaluator::new(c)?.eval(a, b))
}

pub fn kloosterman_value(key: KloostermanKey) -> KloostermanValue {
    KloostermanEvaluator::new(key.c)
        .expect("key modulus already validated")
        .value(key.a as i64, key.b as i64)
}

/// Real and imaginary parts of the defining sum, both evaluated explicitly.
pub fn kloosterman_complex(a: i64, b: i64, c: u64) -> Result<(f64, f64)> {
    let table = KloostermanEvaluator::new(c)?;
    let (a, b) = (reduce(a, c), reduce(b, c));
    let mut re = CompensatedSum::new();
    let mut im = CompensatedSum::new();
    for &(m, x) in &table.units {
        let k = (a * u64::from(m) + b * u64::from(x)) % c;
        let angle = TAU * k as f64 / c as f64;
        re.add(angle.cos());
        im.add(angle.sin());
    }
    Ok((re.value(), im.value()))
}

/// Exact phase histogram: entry `k` counts the units `m` with
/// `a·m + b·m* ≡ k (mod c)`.
///
/// Inverses come from a per-residue extended gcd, independent of
/// [`inverse_table`]. `K(a,b;c) = Σ_k n_k·cos(2πk/c)`, and the sum is real
/// exactly when `n_k = n_{c−k}`.
pub fn kloosterman_phase_counts(a: i64, b: i64, c: u64) -> Result<Vec<u64>> {
    check_modulus("kloosterman_phase_counts", c)?;
    let (a, b) = (reduce(a, c), reduce(b, c));
    let mut counts = vec![0u64; c as usize];
    if c == 1 {
        counts[0] = 1;
        return Ok(counts);
    }
    for m in 1..c {
        if gcd(m, c) != 1 {
            continue;
        }
        let x = mod_inverse(m, c).expect("unit");
        let k = (u128::from(a) * u128::from(m) + u128::from(b) * u128::from(x)) % u128::from(c);
        counts[k as usize] += 1;
    }
    Ok(counts)
}

/// Kloosterman sum through the twisted multiplicativity
/// `K(a,b;c₁c₂) = K(c̄₂a, c̄₂b; c₁)·K(c̄₁a, c̄₁b; c₂)` for coprime `c₁, c₂`.
pub fn kloosterman_crt(a: i64, b: i64, c: u64) -> Result<f64> {
    check_modulus("kloosterman_crt", c)?;
    let factors = factorize(c);
    if factors.len() <= 1 {
        return kloosterman(a, b, c);
    }
    let (p, e) = factors[0];
    let c1 = p.pow(e);
    let c2 = c / c1;
    let c2_bar = mod_inverse(c2 % c1, c1).expect("coprime") as i128;
    let c1_bar = mod_inverse(c1 % c2, c2).expect("coprime") as i128;
    let (a, b) = (i128::from(a), i128::from(b));
    let twist = |x: i128, t: i128, m: u64| (x * t).rem_euclid(i128::from(m)) as i64;
    let left = kloosterman(twist(a, c2_bar, c1), twist(b, c2_bar, c1), c1)?;
    let right = kloosterman_crt(twist(a, c1_bar, c2), twist(b, c1_bar, c2), c2)?;
    Ok(left * right)
}

/// Both sides of `K(r,r';c) = Σ_{m | (r,r',c)} m·K(rr'/m², 1; c/m)`,
/// evaluated independently.
pub fn selberg_sides(r: i64, rp: i64, c: u64) -> Result<(f64, f64)> {
    if r == 0 || rp == 0 {
        return Err(Error::domain("selberg_sides", "r and r' must be nonzero"));
    }
    let lhs = kloosterman(r, rp, c)?;
    let g = gcd(gcd(r.unsigned_abs(), rp.unsigned_abs()), c);
    let mut rhs = CompensatedSum::new();
    for m in divisors(g) {
        let cm = c / m;
        let mi = m as i64;
        let a = (i128::from(r / mi) * i128::from(rp / mi)).rem_euclid(i128::from(cm)) as i64;
        rhs.add(m as f64 * kloosterman(a, 1, cm)?);
    }
    Ok((lhs, rhs.value()))
}

/// `d(c)·√gcd(a,b,c)·√c`.
pub fn weil_bound(a: i64, b: i64, c: u64) -> Result<f64> {
    check_modulus("weil_bound", c)?;
    let g = gcd(gcd(a.unsigned_abs(), b.unsigned_abs()), c);
    Ok(divisor_count(c)? as f64 * (g as f64).sqrt() * (c as f64).sqrt())
}

/// `weil_bound(a,b,c) − |K(a,b;c)|`; nonnegative whenever `(a,b) ≠ (0,0)`.
pub fn weil_margin(a: i64, b: i64, c: u64) -> Result<f64> {
    if a == 0 && b == 0 {
        return Err(Error::domain("weil_margin", "(a, b) = (0, 0) is excluded"));
    }
    Ok(weil_bound(a, b, c)? - kloosterman(a, b, c)?.abs())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::arith::euler_phi;
    use proptest::prelude::*;

    fn from_counts(counts: &[u64]) -> f64 {
        let c = counts.len() as f64;
        counts
            .iter()
            .enumerate()
            .map(|(k, &n)| n as f64 * (TAU * k as f64 / c).cos())
            .sum()
    }

    #[test]
    fn inverse_table_examples() {
        let t = inverse_table(5).unwrap();
        let inv: Vec<_> = (1..5).map(|m| t.get(m).unwrap()).collect();
        assert_eq!(inv, vec![1, 3, 2, 4]);
        let t = inverse_table(4).unwrap();
        assert_eq!(t.get(1), Some(1));
        assert_eq!(t.get(2), None);
        assert_eq!(t.get(3), Some(3));
        assert_eq!(inverse_table(2).unwrap().get(1), Some(1));
        assert_eq!(inverse_table(1).unwrap().units().count(), 0);
        assert!(inverse_table(0).is_err());
    }

    #[test]
    fn inverse_table_is_correct_up_to_500() {
        for c in 2..500u64 {
            let t = inverse_table(c).unwrap();
            for m in 1..c {
                match t.get(m) {
                    Some(x) => assert_eq!(m * x % c, 1, "c={c} m={m}"),
                    None => assert_ne!(gcd(m, c), 1, "c={c} m={m}"),
                }
            }
        }
    }

    #[test]
    fn kloosterman_examples() {
        assert!((kloosterman(1, 1, 2).unwrap() - 1.0).abs() < 1e-15);
        let expected = (3.0 - 5f64.sqrt()) / 2.0;
        assert!((kloosterman(1, 1, 5).unwrap() - expected).abs() < 1e-14);
        for c in 1..60u64 {
            let phi = euler_phi(c).unwrap() as f64;
            assert!((kloosterman(0, 0, c).unwrap() - phi).abs() < 1e-12, "c = {c}");
        }
        assert_eq!(kloosterman(7, -3, 1).unwrap(), 1.0);
        assert!(kloosterman(1, 1, 0).is_err());
    }

    #[test]
    fn key_normalization() {
        let k = KloostermanKey::new(-1, 7, 5).unwrap();
        assert_eq!((k.a, k.b, k.c), (4, 2, 5));
        let k = KloostermanKey::new(-13, 99, 1).unwrap();
        assert_eq!((k.a, k.b, k.c), (0, 0, 1));
        assert!(KloostermanKey::new(1, 1, 0).is_err());
    }

    #[test]
    fn exact_phase_oracle_agrees() {
        for c in 1..120u64 {
            for (a, b) in [(1, 1), (-1, 1), (2, 3), (0, 5), (6, 6)] {
                let counts = kloosterman_phase_counts(a, b, c).unwrap();
                let n = counts.len();
                for k in 1..n {
                    assert_eq!(counts[k], counts[n - k], "realness c={c}");
                }
                let direct = kloosterman_value(KloostermanKey::new(a, b, c).unwrap());
                assert!(
                    (direct.value - from_counts(&counts)).abs() <= direct.error_bound(),
                    "K({a},{b};{c})"
                );
                assert!(direct.value.abs() <= direct.term_count as f64 + 1e-9);
            }
        }
    }

    #[test]
    fn crt_fast_path_agrees_with_direct_sum() {
        for c in 1..400u64 {
            for (a, b) in [(1, 1), (-3, 5), (12, 18), (0, 1)] {
                let direct = kloosterman(a, b, c).unwrap();
                let crt = kloosterman_crt(a, b, c).unwrap();
                assert!((direct - crt).abs() <= 1e-9 * direct.abs().max(1.0), "K({a},{b};{c})");
            }
        }
    }

    #[test]
    fn selberg_examples() {
        let (l, r) = selberg_sides(2, 2, 4).unwrap();
        assert!((l - 2.0).abs() < 1e-12 && (r - 2.0).abs() < 1e-12);
        for c in 1..50 {
            let (l, r) = selberg_sides(1, 1, c).unwrap();
            assert_eq!(l, kloosterman(1, 1, c).unwrap());
            assert!((l - r).abs() < 1e-12);
        }
        let (l, r) = selberg_sides(3, 5, 7).unwrap();
        assert!((l - r).abs() < 1e-12);
        assert!(selberg_sides(0, 1, 5).is_err());
    }

    #[test]
    fn weil_examples() {
        let m = weil_margin(1, 1, 5).unwrap();
        assert!((m - (2.0 * 5f64.sqrt() - 0.381966011250105)).abs() < 1e-12);
        assert!((weil_margin(1, 1, 2).unwrap() - (2.0 * 2f64.sqrt() - 1.0)).abs() < 1e-12);
        assert!(weil_margin(0, 0, 7).is_err());
    }

    proptest! {
        #[test]
        fn symmetric_in_a_b(a in -500i64..500, b in -500i64..500, c in 1u64..300) {
            let k1 = kloosterman(a, b, c).unwrap();
            let k2 = kloosterman(b, a, c).unwrap();
            prop_assert!((k1 - k2).abs() < 1e-10);
        }

        #[test]
        fn periodic_in_a(a in -500i64..500, b in -500i64..500, c in 1u64..300) {
            let k1 = kloosterman(a + c as i64, b, c).unwrap();
            let k2 = kloosterman(a, b, c).unwrap();
            prop_assert_eq!(k1.to_bits(), k2.to_bits());
        }

        #[test]
        fn imaginary_part_vanishes(a in -50i64..50, b in -50i64..50, c in 1u64..2000) {
            let (_, im) = kloosterman_complex(a, b, c).unwrap();
            prop_assert!(im.abs() < 1e-10 * c as f64);
        }
    }
}
