//! The coset set of attainable coefficients and small rational
//! representations `C = (t p − r) / s`.

use serde::{Deserialize, Serialize};

use crate::error::Result;
use crate::modnum::{self, abs_least, gcd, AbsLeast, Modulus};
use crate::residue::PermutationSpec;

/// `C = (t p − r) / s` with `gcd(r, s) = 1` and `s ≥ 1`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct RationalRep {
    pub r: i64,
    pub s: u64,
    pub t: i64,
    #[serde(rename = "C")]
    pub c: AbsLeast,
    pub p: u64,
}

impl RationalRep {
    /// Checks `C s − t p + r = 0` and `gcd(r, s) = 1`.
    pub fn holds(&self) -> bool {
        let lhs = self.c.value() as i128 * self.s as i128 - self.t as i128 * self.p as i128
            + self.r as i128;
        lhs == 0 && self.s >= 1 && gcd(self.r, self.s as i64) == 1
    }

    /// `|r| + s`, the size that decides criticality.
    pub fn weight(&self) -> u64 {
        self.r.unsigned_abs() + self.s
    }

    fn order_key(&self) -> (u64, u64, bool) {
        (self.s, self.r.unsigned_abs(), self.r < 0)
    }
}

/// Builds the rep for `(r, s)` when `C s + r` is a multiple of `p`.
fn rep_from(c: AbsLeast, p: u64, r: i64, s: u64) -> Option<RationalRep> {
    let num = c.value() as i128 * s as i128 + r as i128;
    (num % p as i128 == 0).then(|| RationalRep {
        r,
        s,
        t: (num / p as i128) as i64,
        c,
        p,
    })
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct CosetSet {
    pub p: u64,
    #[serde(rename = "A")]
    pub a: AbsLeast,
    pub k: u64,
    pub d: u64,
    pub elements: Vec<AbsLeast>,
}

/// `gcd(k − 1, p − 1)`, which is `p − 1` when `k = 1`.
pub fn d_of(spec: &PermutationSpec) -> u64 {
    gcd(spec.k as i64 - 1, spec.p as i64 - 1)
}

/// `{A x^{k−1}}`, i.e. A times the subgroup of d-th powers, sorted.
pub fn c_set(spec: &PermutationSpec) -> Result<CosetSet> {
    let p = spec.p;
    let d = d_of(spec);
    let m = Modulus::new(p)?;
    let h = m.pow(modnum::primitive_root(p)?, d);
    let mut elements = Vec::with_capacity(((p - 1) / d) as usize);
    let mut y = spec.a_residue();
    for _ in 0..(p - 1) / d {
        elements.push(abs_least(y as i128, p)?);
        y = m.mul(y, h);
    }
    elements.sort_unstable();
    Ok(CosetSet {
        p,
        a: spec.a,
        k: spec.k,
        d,
        elements,
    })
}

/// Representations with `1 ≤ s ≤ n` and `|r| < p / n`, reduced and ordered
/// by `s`, then `|r|`, then positive `r` first.
pub fn reps_of(c: AbsLeast, p: u64, n: u64) -> Result<Vec<RationalRep>> {
    let mut out: Vec<RationalRep> = Vec::new();
    for s in 1..=n {
        let r = abs_least(-(c.value() as i128) * s as i128, p)?.value();
        if r == 0 || (r.unsigned_abs() as u128) * (n as u128) >= p as u128 {
            continue;
        }
        let g = gcd(r, s as i64);
        if let Some(rep) = rep_from(c, p, r / g as i64, s / g) {
            if !out.contains(&rep) {
                out.push(rep);
            }
        }
    }
    out.sort_by_key(RationalRep::order_key);
    Ok(out)
}

/// The rep with least `s`, then least `|r|`, then `r > 0`.
pub fn canonical_rep(c: AbsLeast, p: u64, n: u64) -> Result<Option<RationalRep>> {
    Ok(reps_of(c, p, n)?.into_iter().next())
}

/// A witness `A = (t p − r) / s` with `gcd(r, s) = 1` and `1 ≤ |r| + s ≤ n`,
/// if one exists.
pub fn is_critical(a: AbsLeast, p: u64, n: u64) -> Option<RationalRep> {
    (1..n).find_map(|s| {
        (1..=(n - s) as i64)
            .flat_map(|mag| [mag, -mag])
            .filter(|&r| gcd(r, s as i64) == 1)
            .find_map(|r| rep_from(a, p, r, s))
    })
}

/// How an element of the coset set meets the large-coefficient hypotheses.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum GoodForm {
    /// `n ≤ |C| ≤ p/n`.
    Integer,
    /// `n ≤ |C^{−1}| ≤ p/n`.
    InverseInteger,
    /// `C = (tp − r)/s` with `(n+3)s ≤ |r| ≤ p/n`.
    Rational(RationalRep),
    /// The same for `C^{−1}`.
    InverseRational(RationalRep),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct GoodC {
    #[serde(rename = "C")]
    pub c: AbsLeast,
    pub form: GoodForm,
}

/// `n ≤ |C| ≤ p/n`.
pub fn in_range(c: AbsLeast, p: u64, n: u64) -> bool {
    let v = c.unsigned_abs() as u128;
    v >= n as u128 && v * n as u128 <= p as u128
}

/// A rep with `(n+3) s ≤ |r| ≤ p/n`, searching every admissible `s`.
pub fn wide_rep(c: AbsLeast, p: u64, n: u64) -> Result<Option<RationalRep>> {
    let s_max = p / (n * (n + 3));
    for s in 1..=s_max {
        let r = abs_least(-(c.value() as i128) * s as i128, p)?.value();
        let mag = r.unsigned_abs() as u128;
        if mag >= ((n + 3) * s) as u128
            && mag * n as u128 <= p as u128
            && gcd(r, s as i64) == 1
        {
            return Ok(rep_from(c, p, r, s));
        }
    }
    Ok(None)
}

/// Classifies one coefficient against the large-coefficient hypotheses.
pub fn good_form(c: AbsLeast, p: u64, n: u64) -> Result<Option<GoodForm>> {
    let inv = abs_least(modnum::inv_mod(c.residue(p), p)? as i128, p)?;
    if in_range(c, p, n) {
        return Ok(Some(GoodForm::Integer));
    }
    if in_range(inv, p, n) {
        return Ok(Some(GoodForm::InverseInteger));
    }
    if let Some(rep) = wide_rep(c, p, n)? {
        return Ok(Some(GoodForm::Rational(rep)));
    }
    Ok(wide_rep(inv, p, n)?.map(GoodForm::InverseRational))
}

/// The first element of the coset set meeting the large-coefficient hypotheses.
pub fn good_c_exists(spec: &PermutationSpec, n: u64) -> Result<Option<GoodC>> {
    for c in c_set(spec)?.elements {
        if let Some(form) = good_form(c, spec.p, n)? {
            return Ok(Some(GoodC { c, form }));
        }
    }
    Ok(None)
}
