//! Decidable hypothesis predicates and a certifier that reports whether some
//! known criterion rules out empty cells for a given spec.
//!
//! Inequalities involving real powers or logarithms are evaluated in `f64`
//! with a relative slack in the unfavourable direction, so a guard can only
//! under-claim.

use serde::{Deserialize, Serialize};
use std::collections::BTreeMap;

use crate::error::{Error, Result};
use crate::families::{instantiated_set, sqrt_families};
use crate::modnum::{abs_least, gcd, inv_mod, AbsLeast};
use crate::ratrep::{self, c_set, d_of, in_range, is_critical, wide_rep};
use crate::residue::{KMode, PermutationSpec};

const SLACK: f64 = 1e-9;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Verdict {
    NoType4Guaranteed,
    ExceptionalFamily,
    Undecided,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Certificate {
    pub verdict: Verdict,
    pub rule: String,
    pub margins: BTreeMap<String, f64>,
}

impl Certificate {
    fn new(verdict: Verdict, rule: &str) -> Self {
        Certificate {
            verdict,
            rule: rule.to_string(),
            margins: BTreeMap::new(),
        }
    }

    fn margin(mut self, key: &str, value: f64) -> Self {
        self.margins.insert(key.to_string(), value);
        self
    }

    pub fn undecided() -> Self {
        Certificate::new(Verdict::Undecided, "none")
    }
}

/// `lhs ≤ rhs`, demanding a relative margin so rounding cannot flip it.
fn le_strict(lhs: f64, rhs: f64) -> bool {
    lhs <= rhs * (1.0 - SLACK)
}

/// log10 of `4·10^29 n^{184/3}`, the threshold shared by the small-gcd and
/// generic-exponent criteria.
fn huge_threshold_log10(n: u64) -> f64 {
    4f64.log10() + 29.0 + (184.0 / 3.0) * (n as f64).log10()
}

fn above_huge_threshold(p: u64, n: u64) -> bool {
    le_strict(huge_threshold_log10(n), (p as f64).log10())
}

/// `d ≤ 0.006 p^{89/92}` and `p > 4·10^29 n^{184/3}`.
pub fn guard_small_gcd(p: u64, n: u64, d: u64) -> bool {
    if p == 0 || n == 0 || d == 0 {
        return false;
    }
    let d_ok = le_strict(d as f64, 0.006 * (p as f64).powf(89.0 / 92.0));
    d_ok && above_huge_threshold(p, n)
}

/// `10 p ≥ 162 (k−1)² n⁴` in exact integers; `k = 1` is outside the criterion.
pub fn guard_small_k(p: u64, n: u64, k_raw: i64) -> Result<bool> {
    if k_raw == 1 {
        return Err(Error::UnitExponent);
    }
    let km1 = (k_raw as i128 - 1).unsigned_abs();
    let rhs = 162u128
        .saturating_mul(km1.saturating_mul(km1))
        .saturating_mul((n as u128).pow(4));
    Ok(10 * p as u128 >= rhs)
}

/// The exponent representative closest to 1, which gives the weakest demand.
fn best_small_k(spec: &PermutationSpec) -> i64 {
    let k = spec.k as i64;
    let alt = k - (spec.p as i64 - 1);
    if (alt - 1).abs() < (k - 1).abs() {
        alt
    } else {
        k
    }
}

fn log_sq_term(p: u64, n: u64, constant: f64) -> f64 {
    let lp = (p as f64).ln();
    constant * (n * n) as f64 * (p as f64).sqrt() * lp * lp
}

/// Which large-coefficient criterion fired, with the element that did it.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct BigGcdHit {
    pub rule: &'static str,
    pub c: AbsLeast,
    pub d: u64,
}

fn inverse_of(c: AbsLeast, p: u64) -> Result<AbsLeast> {
    abs_least(inv_mod(c.residue(p), p)? as i128, p)
}

/// Large-gcd criteria: an element of the coset set in `[n, p/n]`, or with a
/// wide rational form, together with the matching size demand on d.
pub fn big_gcd_hit(spec: &PermutationSpec, n: u64) -> Result<Option<BigGcdHit>> {
    let p = spec.p;
    let d = d_of(spec);
    if spec.k == 1 {
        let a = spec.a;
        return Ok(ratrep::good_form(a, p, n)?.map(|_| BigGcdHit {
            rule: "large-coefficient-linear",
            c: a,
            d,
        }));
    }
    if p <= 1_000_000 {
        return Ok(None);
    }
    let range_ok = le_strict(log_sq_term(p, n, 0.88), d as f64);
    let rational_ok = le_strict(log_sq_term(p, n, 1.32), d as f64);
    if !range_ok && !rational_ok {
        return Ok(None);
    }
    for c in c_set(spec)?.elements {
        if range_ok && in_range(c, p, n) {
            return Ok(Some(BigGcdHit {
                rule: "large-gcd-range",
                c,
                d,
            }));
        }
        if rational_ok
            && (wide_rep(c, p, n)?.is_some() || wide_rep(inverse_of(c, p)?, p, n)?.is_some())
        {
            return Ok(Some(BigGcdHit {
                rule: "large-gcd-rational",
                c,
                d,
            }));
        }
    }
    Ok(None)
}

pub fn guard_big_gcd(spec: &PermutationSpec, n: u64) -> Result<bool> {
    Ok(big_gcd_hit(spec, n)?.is_some())
}

/// `p > |r| s n` (linear) or `p > (|r| s n + 1)²` (sqrt), for `|r| + s > n`.
pub fn guard_smallrs(p: u64, n: u64, r: i64, s: u64, kind: KMode) -> Result<bool> {
    let mag = r.unsigned_abs();
    if mag + s <= n {
        return Err(Error::Hypothesis(format!(
            "|r| + s = {} does not exceed n = {n}",
            mag + s
        )));
    }
    let prod = mag as u128 * s as u128 * n as u128;
    match kind {
        KMode::Linear => Ok(p as u128 > prod),
        KMode::Sqrt => Ok(p as u128 > (prod + 1).saturating_mul(prod + 1)),
        KMode::Other => Err(Error::Hypothesis(
            "small-rational criterion covers only k = 1 and k = (p+1)/2".into(),
        )),
    }
}

/// The generic-exponent criterion: `k ∉ {1, (p+1)/2}` and `p > 4·10^29 n^{184/3}`.
pub fn guard_mainiv(spec: &PermutationSpec, n: u64) -> bool {
    spec.kind() == KMode::Other && above_huge_threshold(spec.p, n)
}

fn sqrt_threshold(n: u64) -> f64 {
    let nf = n as f64;
    let a = (nf.powi(3) + 1.0).powi(2);
    let b = 8e4 * (nf * nf.ln()).powi(4);
    a.max(b)
}

/// Exact classification for `k = 1` once `p > n³(n+3)`.
pub fn guard_k1_classification(spec: &PermutationSpec, n: u64) -> Result<Certificate> {
    if spec.k != 1 {
        return Err(Error::Hypothesis("exponent is not 1".into()));
    }
    let threshold = (n as u128).pow(3) * (n as u128 + 3);
    let above = spec.p as u128 > threshold;
    let critical = is_critical(spec.a, spec.p, n);
    let cert = match (above, critical) {
        (true, Some(_)) => Certificate::new(Verdict::ExceptionalFamily, "linear-critical-form"),
        (true, None) => Certificate::new(Verdict::NoType4Guaranteed, "linear-critical-form"),
        (false, _) => Certificate::undecided(),
    };
    Ok(cert
        .margin("p", spec.p as f64)
        .margin("threshold", threshold as f64))
}

/// Classification for `k = (p+1)/2` above `max{(n³+1)², 8·10⁴ (n ln n)⁴}`.
pub fn guard_sqrt_classification(spec: &PermutationSpec, n: u64) -> Result<Certificate> {
    if spec.p % 4 != 1 {
        return Err(Error::Hypothesis(format!("p = {} is not 1 mod 4", spec.p)));
    }
    if spec.kind() != KMode::Sqrt {
        return Err(Error::Hypothesis("exponent is not (p+1)/2".into()));
    }
    let threshold = sqrt_threshold(n);
    let above = le_strict(threshold, spec.p as f64);
    let in_family = instantiated_set(&sqrt_families(n), spec.p).contains(&spec.a);
    let cert = if in_family {
        Certificate::new(Verdict::ExceptionalFamily, "sqrt-family")
    } else if !above {
        Certificate::undecided()
    } else if is_critical(spec.a, spec.p, n).is_some() {
        Certificate::new(Verdict::Undecided, "sqrt-critical-form")
    } else {
        Certificate::new(Verdict::NoType4Guaranteed, "sqrt-critical-form")
    };
    Ok(cert
        .margin("p", spec.p as f64)
        .margin("threshold", threshold))
}

/// The rep of A minimising `|r| s`, over every `s` that could satisfy the
/// small-rational criterion.
fn small_rational_hit(spec: &PermutationSpec, n: u64) -> Result<Option<(i64, u64)>> {
    let p = spec.p;
    let kind = spec.kind();
    let mut s = 1u64;
    while (s as u128) * (n as u128) < p as u128 {
        let r = abs_least(-(spec.a.value() as i128) * s as i128, p)?.value();
        if r != 0
            && gcd(r, s as i64) == 1
            && r.unsigned_abs() + s > n
            && guard_smallrs(p, n, r, s, kind)?
        {
            return Ok(Some((r, s)));
        }
        s += 1;
    }
    Ok(None)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct ConjectureBounds {
    pub n: u64,
    /// Suggested threshold `6n³` beyond which exponents other than 1 and
    /// `(p+1)/2` give no empty cells.
    #[serde(rename = "C_n")]
    pub c_upper: u64,
    /// Suggested threshold `3n³` for family-free coefficients at k = 1, (p+1)/2.
    #[serde(rename = "c_n")]
    pub c_lower: u64,
    #[serde(rename = "optimal_C_n")]
    pub optimal_upper: Option<u64>,
    #[serde(rename = "optimal_c_n")]
    pub optimal_lower: Option<u64>,
}

const OPTIMAL_UPPER: [u64; 10] = [127, 271, 601, 571, 1733, 1777, 3433, 2473, 6577, 3851];
const OPTIMAL_LOWER: [u64; 10] = [17, 61, 137, 197, 277, 937, 653, 2297, 1061, 2857];

pub fn conjecture_bounds(n: u64) -> ConjectureBounds {
    let idx = n.checked_sub(3).filter(|&i| i < 10).map(|i| i as usize);
    ConjectureBounds {
        n,
        c_upper: 6 * n.pow(3),
        c_lower: 3 * n.pow(3),
        optimal_upper: idx.map(|i| OPTIMAL_UPPER[i]),
        optimal_lower: idx.map(|i| OPTIMAL_LOWER[i]),
    }
}

/// Tries every criterion in turn and reports the first that decides the spec.
pub fn certify_no_type4(spec: &PermutationSpec, n: u64) -> Result<Certificate> {
    let p = spec.p;
    let kind = spec.kind();

    match kind {
        KMode::Linear => {
            let cert = guard_k1_classification(spec, n)?;
            if cert.verdict != Verdict::Undecided {
                return Ok(cert);
            }
            if let Some(w) = is_critical(spec.a, p, n) {
                return Ok(Certificate::new(Verdict::ExceptionalFamily, "linear-sharp-family")
                    .margin("r", w.r as f64)
                    .margin("s", w.s as f64));
            }
        }
        KMode::Sqrt => {
            let cert = guard_sqrt_classification(spec, n)?;
            if cert.verdict != Verdict::Undecided {
                return Ok(cert);
            }
        }
        KMode::Other => {}
    }

    if spec.k != 1 {
        let k = best_small_k(spec);
        if guard_small_k(p, n, k)? {
            let need = 16.2 * ((k - 1) as f64).powi(2) * (n as f64).powi(4);
            return Ok(Certificate::new(Verdict::NoType4Guaranteed, "small-exponent")
                .margin("k", k as f64)
                .margin("p", p as f64)
                .margin("threshold", need));
        }
    }

    let d = d_of(spec);
    if guard_small_gcd(p, n, d) {
        return Ok(Certificate::new(Verdict::NoType4Guaranteed, "small-gcd")
            .margin("d", d as f64)
            .margin("d_max", 0.006 * (p as f64).powf(89.0 / 92.0)));
    }

    if let Some(hit) = big_gcd_hit(spec, n)? {
        return Ok(Certificate::new(Verdict::NoType4Guaranteed, hit.rule)
            .margin("C", hit.c.value() as f64)
            .margin("d", hit.d as f64));
    }

    if kind != KMode::Other && is_critical(spec.a, p, n).is_none() {
        if let Some((r, s)) = small_rational_hit(spec, n)? {
            return Ok(Certificate::new(Verdict::NoType4Guaranteed, "small-rational")
                .margin("r", r as f64)
                .margin("s", s as f64)
                .margin("p", p as f64));
        }
    }

    if guard_mainiv(spec, n) {
        return Ok(Certificate::new(Verdict::NoType4Guaranteed, "generic-exponent")
            .margin("p", p as f64)
            .margin("log10_threshold", huge_threshold_log10(n)));
    }

    Ok(Certificate::undecided())
}
