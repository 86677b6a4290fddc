//! Modular arithmetic kernel shared by every other module.
//!
//! Moduli are capped below 2^62 and products go through a `u128`
//! intermediate, so nothing here can overflow. Primality is a deterministic
//! Miller–Rabin test whose base set is exact for every 64-bit input.

use num_integer::Integer;
use serde::{Deserialize, Serialize};
use std::fmt;

use crate::error::{Error, Result};

/// Exclusive upper bound on supported moduli.
pub const MAX_MODULUS: u64 = 1 << 62;

/// Representative of a residue class in the open interval (−m/2, m/2).
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(transparent)]
pub struct AbsLeast(i64);

impl AbsLeast {
    pub fn value(self) -> i64 {
        self.0
    }

    /// The least nonnegative residue congruent to this value modulo `m`.
    pub fn residue(self, m: u64) -> u64 {
        let v = self.0 as i128 % m as i128;
        if v < 0 {
            (v + m as i128) as u64
        } else {
            v as u64
        }
    }

    pub fn negated(self) -> AbsLeast {
        AbsLeast(-self.0)
    }

    pub fn unsigned_abs(self) -> u64 {
        self.0.unsigned_abs()
    }
}

impl fmt::Display for AbsLeast {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", self.0)
    }
}

/// A validated modulus in `[2, 2^62)`.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct Modulus(u64);

impl Modulus {
    pub fn new(m: u64) -> Result<Self> {
        if m < 2 {
            Err(Error::ModulusTooSmall(m))
        } else if m >= MAX_MODULUS {
            Err(Error::ModulusTooLarge(m))
        } else {
            Ok(Modulus(m))
        }
    }

    pub fn get(self) -> u64 {
        self.0
    }

    #[inline]
    pub fn reduce(self, a: u64) -> u64 {
        a % self.0
    }

    #[inline]
    pub fn mul(self, a: u64, b: u64) -> u64 {
        let m = self.0;
        if m <= u32::MAX as u64 && a < m && b < m {
            a * b % m
        } else {
            ((a as u128 * b as u128) % m as u128) as u64
        }
    }

    #[inline]
    pub fn add(self, a: u64, b: u64) -> u64 {
        let s = a + b;
        if s >= self.0 {
            s - self.0
        } else {
            s
        }
    }

    pub fn pow(self, x: u64, mut e: u64) -> u64 {
        let mut base = self.reduce(x);
        let mut acc = 1 % self.0;
        while e > 0 {
            if e & 1 == 1 {
                acc = self.mul(acc, base);
            }
            base = self.mul(base, base);
            e >>= 1;
        }
        acc
    }

    pub fn inv(self, x: u64) -> Result<u64> {
        let m = self.0 as i128;
        let ext = (self.reduce(x) as i128).extended_gcd(&m);
        if ext.gcd != 1 {
            return Err(Error::NotInvertible {
                value: x,
                modulus: self.0,
            });
        }
        Ok(ext.x.rem_euclid(m) as u64)
    }

    /// Signed power: negative exponents go through the inverse.
    pub fn pow_signed(self, x: u64, e: i64) -> Result<u64> {
        if e >= 0 {
            Ok(self.pow(x, e as u64))
        } else {
            Ok(self.pow(self.inv(x)?, e.unsigned_abs()))
        }
    }
}

pub fn mul_mod(a: u64, b: u64, m: u64) -> Result<u64> {
    let m = Modulus::new(m)?;
    Ok(m.mul(m.reduce(a), m.reduce(b)))
}

pub fn pow_mod(x: u64, e: i64, m: u64) -> Result<u64> {
    Modulus::new(m)?.pow_signed(x, e)
}

pub fn inv_mod(x: u64, m: u64) -> Result<u64> {
    Modulus::new(m)?.inv(x)
}

/// Nonnegative gcd; `gcd(0, 0) = 0`.
pub fn gcd(a: i64, b: i64) -> u64 {
    (a as i128).gcd(&(b as i128)) as u64
}

/// The representative of `a` modulo the odd modulus `p` lying in (−p/2, p/2).
pub fn abs_least(a: i128, p: u64) -> Result<AbsLeast> {
    if p % 2 == 0 {
        return Err(Error::EvenModulus(p));
    }
    let m = p as i128;
    let mut r = a.rem_euclid(m);
    if r > m / 2 {
        r -= m;
    }
    Ok(AbsLeast(r as i64))
}

const SMALL_PRIMES: [u64; 12] = [2, 3, 5, 7, 11, 13, 17, 19, 23, 29, 31, 37];

/// Deterministic primality test, exact for every `u64`.
pub fn is_prime(m: u64) -> bool {
    if m < 2 {
        return false;
    }
    for &q in &SMALL_PRIMES {
        if m == q {
            return true;
        }
        if m % q == 0 {
            return false;
        }
    }
    let d = m - 1;
    let twos = d.trailing_zeros();
    let odd = d >> twos;
    let mulm = |a: u64, b: u64| ((a as u128 * b as u128) % m as u128) as u64;
    let powm = |mut b: u64, mut e: u64| {
        let mut acc = 1u64;
        while e > 0 {
            if e & 1 == 1 {
                acc = mulm(acc, b);
            }
            b = mulm(b, b);
            e >>= 1;
        }
        acc
    };
    'witness: for &a in &SMALL_PRIMES {
        let mut x = powm(a, odd);
        if x == 1 || x == d {
            continue;
        }
        for _ in 1..twos {
            x = mulm(x, x);
            if x == d {
                continue 'witness;
            }
        }
        return false;
    }
    true
}

/// True when `p` is a prime other than 2.
pub fn is_odd_prime(p: u64) -> bool {
    p > 2 && is_prime(p)
}

fn small_sieve(limit: u64) -> Vec<u64> {
    let limit = limit as usize;
    let mut composite = vec![false; limit + 1];
    let mut out = Vec::new();
    for i in 2..=limit {
        if !composite[i] {
            out.push(i as u64);
            let mut j = i * i;
            while j <= limit {
                composite[j] = true;
                j += i;
            }
        }
    }
    out
}

const SEGMENT: u64 = 1 << 16;

/// All primes in `[lo, hi]`, in increasing order, by a segmented sieve.
pub fn primes_in(lo: u64, hi: u64) -> Vec<u64> {
    if lo > hi || hi < 2 {
        return Vec::new();
    }
    let lo = lo.max(2);
    let base = small_sieve((hi as f64).sqrt() as u64 + 1);
    let mut out = Vec::new();
    let mut start = lo;
    loop {
        let end = hi.min(start.saturating_add(SEGMENT - 1));
        let mut composite = vec![false; (end - start + 1) as usize];
        for &q in &base {
            if q * q > end {
                break;
            }
            let mut j = (start.div_ceil(q) * q).max(q * q);
            while j <= end {
                composite[(j - start) as usize] = true;
                j += q;
            }
        }
        out.extend(
            composite
                .iter()
                .enumerate()
                .filter(|(_, &c)| !c)
                .map(|(i, _)| start + i as u64),
        );
        if end == hi {
            break;
        }
        start = end + 1;
    }
    out
}

/// Prime factorisation by trial division, as `(prime, exponent)` pairs.
pub fn factorize(mut m: u64) -> Vec<(u64, u32)> {
    let mut out = Vec::new();
    let mut q = 2u64;
    while q.saturating_mul(q) <= m {
        if m % q == 0 {
            let mut e = 0;
            while m % q == 0 {
                m /= q;
                e += 1;
            }
            out.push((q, e));
        }
        q += if q == 2 { 1 } else { 2 };
    }
    if m > 1 {
        out.push((m, 1));
    }
    out
}

/// Smallest primitive root of the odd prime `p`.
pub fn primitive_root(p: u64) -> Result<u64> {
    if !is_odd_prime(p) {
        return Err(Error::NotOddPrime(p as i64));
    }
    let m = Modulus::new(p)?;
    let order = p - 1;
    let qs: Vec<u64> = factorize(order).into_iter().map(|(q, _)| q).collect();
    (2..p)
        .find(|&g| qs.iter().all(|&q| m.pow(g, order / q) != 1))
        .ok_or(Error::NotOddPrime(p as i64))
}

/// Legendre symbol of `x` modulo the odd prime `p`, as −1, 0 or 1.
pub fn legendre(x: u64, p: u64) -> i32 {
    let m = Modulus(p);
    match m.pow(x, (p - 1) / 2) {
        0 => 0,
        1 => 1,
        _ => -1,
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    #[test]
    fn mul_mod_examples() {
        assert_eq!(mul_mod(5, 5, 13).unwrap(), 12);
        assert_eq!(mul_mod(0, 11, 13).unwrap(), 0);
        assert_eq!(mul_mod(1, 11, 13).unwrap(), 11);
        assert_eq!(mul_mod(3, 4, 1), Err(Error::ModulusTooSmall(1)));
        assert_eq!(mul_mod(3, 4, 0), Err(Error::ModulusTooSmall(0)));
    }

    #[test]
    fn pow_mod_examples() {
        assert_eq!(pow_mod(2, 3, 5).unwrap(), 3);
        assert_eq!(pow_mod(7, 0, 13).unwrap(), 1);
        assert_eq!(pow_mod(3, -1, 13).unwrap(), 9);
        assert!(matches!(
            pow_mod(2, -1, 4),
            Err(Error::NotInvertible { .. })
        ));
    }

    #[test]
    fn inv_mod_examples() {
        assert_eq!(inv_mod(5, 13).unwrap(), 8);
        assert_eq!(inv_mod(1, 97).unwrap(), 1);
        assert_eq!(
            inv_mod(2, 4),
            Err(Error::NotInvertible {
                value: 2,
                modulus: 4
            })
        );
    }

    #[test]
    fn gcd_examples() {
        assert_eq!(gcd(12, 4), 4);
        assert_eq!(gcd(80, 12), 4);
        assert_eq!(gcd(0, 7), 7);
        assert_eq!(gcd(0, 0), 0);
        assert_eq!(gcd(-12, 18), 6);
    }

    fn trial_division(m: u64) -> bool {
        m >= 2 && (2..).take_while(|d| d * d <= m).all(|d| m % d != 0)
    }

    #[test]
    fn is_prime_examples() {
        assert!(is_prime(13));
        assert!(!is_prime(1));
        assert!(!is_prime(0));
        assert!(is_prime(20011));
        assert_eq!(is_prime(20011), trial_division(20011));
        // strong pseudoprimes to several small bases
        assert!(!is_prime(3_215_031_751));
        assert!(!is_prime(3_825_123_056_546_413_051));
        assert!(is_prime((1 << 61) - 1));
        for m in 0..5000 {
            assert_eq!(is_prime(m), trial_division(m), "m = {m}");
        }
    }

    #[test]
    fn primes_in_examples() {
        assert_eq!(primes_in(2, 11), vec![2, 3, 5, 7, 11]);
        assert!(primes_in(14, 16).is_empty());
        assert_eq!(primes_in(19990, 20000), vec![19991, 19993, 19997]);
        assert!(primes_in(10, 2).is_empty());
        assert_eq!(primes_in(0, 2), vec![2]);
    }

    fn eratosthenes(n: usize) -> Vec<u64> {
        let mut mark = vec![true; n + 1];
        mark[0] = false;
        if n >= 1 {
            mark[1] = false;
        }
        let mut i = 2;
        while i * i <= n {
            if mark[i] {
                for j in (i * i..=n).step_by(i) {
                    mark[j] = false;
                }
            }
            i += 1;
        }
        (0..=n).filter(|&i| mark[i]).map(|i| i as u64).collect()
    }

    #[test]
    fn primes_in_matches_sieve_oracle() {
        let n = 1_000_000;
        assert_eq!(primes_in(2, n as u64), eratosthenes(n));
        let oracle = eratosthenes(300_000);
        let window: Vec<u64> = oracle
            .iter()
            .copied()
            .filter(|&q| (123_457..=300_000).contains(&q))
            .collect();
        assert_eq!(primes_in(123_457, 300_000), window);
    }

    #[test]
    fn abs_least_examples() {
        assert_eq!(abs_least(12, 13).unwrap().value(), -1);
        assert_eq!(abs_least(6, 13).unwrap().value(), 6);
        assert_eq!(abs_least(45, 13).unwrap().value(), 6);
        assert_eq!(abs_least(-7, 13).unwrap().value(), 6);
        assert_eq!(abs_least(3, 10), Err(Error::EvenModulus(10)));
    }

    #[test]
    fn primitive_roots() {
        assert_eq!(primitive_root(13).unwrap(), 2);
        assert_eq!(primitive_root(7).unwrap(), 3);
        assert_eq!(primitive_root(3).unwrap(), 2);
        assert!(primitive_root(15).is_err());
        for p in primes_in(3, 2000) {
            let g = primitive_root(p).unwrap();
            let m = Modulus::new(p).unwrap();
            let mut x = 1;
            let mut seen = std::collections::HashSet::new();
            for _ in 0..p - 1 {
                x = m.mul(x, g);
                seen.insert(x);
            }
            assert_eq!(seen.len() as u64, p - 1);
        }
    }

    #[test]
    fn factorize_roundtrip() {
        assert_eq!(factorize(12), vec![(2, 2), (3, 1)]);
        assert_eq!(factorize(1), vec![]);
        assert_eq!(factorize(97), vec![(97, 1)]);
    }

    proptest! {
        #[test]
        fn mul_mod_matches_wide_reference(a in any::<u64>(), b in any::<u64>(), m in 2u64..MAX_MODULUS) {
            let (a, b) = (a >> 2, b >> 2);
            let want = ((a as u128 % m as u128) * (b as u128 % m as u128) % m as u128) as u64;
            prop_assert_eq!(mul_mod(a, b, m).unwrap(), want);
        }

        #[test]
        fn pow_mod_adds_exponents(x in 0u64..1 << 40, e1 in 0i64..1 << 30, e2 in 0i64..1 << 30, m in 2u64..MAX_MODULUS) {
            let lhs = pow_mod(x, e1 + e2, m).unwrap();
            let rhs = mul_mod(pow_mod(x, e1, m).unwrap(), pow_mod(x, e2, m).unwrap(), m).unwrap();
            prop_assert_eq!(lhs, rhs);
        }

        #[test]
        fn inv_mod_round_trips(x in 1u64..1 << 61, m in 2u64..MAX_MODULUS) {
            prop_assume!(gcd(x as i64, m as i64) == 1);
            let y = inv_mod(x, m).unwrap();
            prop_assert!(y > 0 && y < m || m == 2);
            prop_assert_eq!(mul_mod(x, y, m).unwrap(), 1 % m);
        }

        #[test]
        fn abs_least_is_congruent_and_small(a in any::<i64>(), half in 1u64..1 << 40) {
            let p = 2 * half + 1;
            let c = abs_least(a as i128, p).unwrap();
            prop_assert!(c.unsigned_abs() <= (p - 1) / 2);
            prop_assert_eq!((c.value() as i128 - a as i128).rem_euclid(p as i128), 0);
        }
    }
}
