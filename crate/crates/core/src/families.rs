//! Closed-form coefficient families `A = (t p ∓ r) / s` that force empty
//! cells for `k = 1` (linear) and `k = (p+1)/2` (sqrt), with the miss-count
//! bounds each admitting clause guarantees.

use serde::{Deserialize, Serialize};
use std::collections::BTreeSet;

use crate::modnum::{abs_least, gcd, AbsLeast};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum FamilyKind {
    Linear,
    Sqrt,
}

/// The clause that admits a family, named after the quantity it bounds.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Clause {
    /// Linear, `|A| < n`; B = |A|.
    LinearInteger,
    /// Linear, `r + s + gcd(n,s) − 1 ≤ n` with `gcd(n,s) > 1`; B = r + s + gcd(n,s) − 2.
    LinearGcd,
    /// Linear, `r + s ≤ n`; B = r + s − 1 on at least n / gcd(n,s) rows.
    LinearSharp,
    /// Sqrt, `2|A| < n`; B = 2|A|.
    SqrtHalfInteger,
    /// Sqrt, `2(r + s + gcd(n,s) − 2) < n`; B is that left side.
    SqrtHalfFraction,
    /// Sqrt, `2^β | A`, `|A| < n`; B = |A|.
    SqrtInteger2Adic,
    /// Sqrt, `2^β ∤ A`, `|A| + gcd(n,A) < n`; B = |A| + gcd(n,A).
    SqrtIntegerGcd,
    /// Sqrt, n odd, `r + s + min(gcd(n,r), gcd(n,s)) − 1 ≤ n`.
    SqrtOddModulus,
    /// Sqrt, n even, `2^β | r`, `r + s + gcd(n,s) − 1 ≤ n`.
    SqrtEvenR,
    /// Sqrt, n even, `2^β | s`, `r + s + gcd(n,r) − 1 ≤ n`.
    SqrtEvenS,
    /// Sqrt, n even, `2^β ∤ rs`, `r + s + gcd(n,s) + gcd(n,r) − 1 ≤ n`.
    SqrtMixed,
    /// Sqrt, no rounding loss in the s-side count; only `r + s ≤ n`.
    RelaxedS,
    /// The same with r and s interchanged.
    RelaxedR,
    /// Sqrt mixed parity without rounding loss; only `r + s + gcd(n,r) ≤ n`.
    RelaxedMixed,
}

impl Clause {
    pub fn is_relaxed(self) -> bool {
        matches!(self, Clause::RelaxedS | Clause::RelaxedR | Clause::RelaxedMixed)
    }
}

/// Which sign(s) of r the label admits.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Branch {
    /// `(t p − r) / s`.
    Minus,
    /// `(t p + r) / s`.
    Plus,
    /// Either, whichever is integral.
    Both,
}

/// One printed family label. `s = 1` denotes the integers `±r`.
#[derive(Debug, Clone, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct FamilyDescriptor {
    pub r: u64,
    pub s: u64,
    pub t: u64,
    pub branch: Branch,
    pub kind: FamilyKind,
    pub clause: Clause,
    #[serde(rename = "B")]
    pub bound: u64,
    pub label: String,
}

impl FamilyDescriptor {
    fn sort_key(&self) -> (bool, u64, u64, u64) {
        (self.s > 1, self.s, self.r, self.t)
    }
}

/// Rows over which the miss count is guaranteed.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case", tag = "scope", content = "rows")]
pub enum RowScope {
    Every,
    AtLeast(u64),
    /// Some row, or some column of the transposed problem.
    SomeRowOrColumn,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct MissBound {
    /// Minimum number of empty cells in each designated row.
    pub missed: u64,
    #[serde(flatten)]
    pub scope: RowScope,
}

fn two_adic(n: u64) -> u64 {
    1 << n.trailing_zeros()
}

fn linear_clause(r: u64, s: u64, n: u64) -> (Clause, u64) {
    let b = gcd(n as i64, s as i64);
    if s == 1 {
        (Clause::LinearInteger, r)
    } else if b > 1 && r + s + b - 1 <= n {
        (Clause::LinearGcd, r + s + b - 2)
    } else {
        (Clause::LinearSharp, r + s - 1)
    }
}

fn sqrt_clause(r: u64, s: u64, n: u64) -> Option<(Clause, u64)> {
    let pow2 = two_adic(n);
    if s == 1 {
        let c = gcd(n as i64, r as i64);
        return if 2 * r < n {
            Some((Clause::SqrtHalfInteger, 2 * r))
        } else if r % pow2 == 0 && r < n {
            Some((Clause::SqrtInteger2Adic, r))
        } else if r % pow2 != 0 && r + c < n {
            Some((Clause::SqrtIntegerGcd, r + c))
        } else {
            None
        };
    }
    let b = gcd(n as i64, s as i64);
    let c = gcd(n as i64, r as i64);
    if 2 * (r + s + b - 2) < n {
        return Some((Clause::SqrtHalfFraction, 2 * (r + s + b - 2)));
    }
    if n % 2 == 1 {
        let m = b.min(c);
        return (r + s + m - 1 <= n).then_some((Clause::SqrtOddModulus, r + s + m - 2));
    }
    if r % pow2 == 0 && r + s + b - 1 <= n {
        Some((Clause::SqrtEvenR, r + s + b - 2))
    } else if s % pow2 == 0 && r + s + c - 1 <= n {
        Some((Clause::SqrtEvenS, r + s + c - 2))
    } else if (r * s) % pow2 != 0 && r + s + b + c - 1 <= n {
        Some((Clause::SqrtMixed, r + s + b + c - 2))
    } else {
        None
    }
}

fn parity_differs(x: u64, g: u64) -> bool {
    x % 2 != (x / g) % 2
}

fn relaxed_clause(r: u64, s: u64, n: u64) -> Option<(Clause, u64)> {
    if s == 1 {
        return None;
    }
    let pow2 = two_adic(n);
    let b = gcd(n as i64, s as i64);
    let c = gcd(n as i64, r as i64);
    let odd_or = |x: u64| n % 2 == 1 || x % pow2 == 0;
    if odd_or(r) && b > 1 && ((r + s - 1) % b == 0 || parity_differs(r, b)) && r + s <= n {
        return Some((Clause::RelaxedS, r + s - 1));
    }
    if odd_or(s) && c > 1 && ((r + s - 1) % c == 0 || parity_differs(s, c)) && r + s <= n {
        return Some((Clause::RelaxedR, r + s - 1));
    }
    if n % 2 == 0 && (r * s) % pow2 != 0 {
        let rc = r + c;
        let no_rounding = (s % 2 == 1 && rc % b == 0)
            || (s % 2 == 0 && rc % (2 * b) == 0)
            || (rc % b != 0 && (rc / b) % 2 == 1);
        if no_rounding && r + s + c <= n {
            return Some((Clause::RelaxedMixed, r + s + c - 1));
        }
    }
    None
}

fn fraction_label(t: u64, r: u64, s: u64, sign: char) -> String {
    if t == 1 {
        format!("(p{sign}{r})/{s}")
    } else {
        format!("({t}p{sign}{r})/{s}")
    }
}

fn sign_char(b: Branch) -> char {
    match b {
        Branch::Minus => '-',
        Branch::Plus => '+',
        Branch::Both => '±',
    }
}

/// Labels for the coprime pair `(r, s)`: one per admissible t.
fn descriptors_for(
    r: u64,
    s: u64,
    kind: FamilyKind,
    clause: Clause,
    bound: u64,
) -> Vec<FamilyDescriptor> {
    let make = |t: u64, branch: Branch, label: String| FamilyDescriptor {
        r,
        s,
        t,
        branch,
        kind,
        clause,
        bound,
        label,
    };
    match s {
        1 => vec![make(0, Branch::Both, r.to_string())],
        2 => vec![make(1, Branch::Minus, fraction_label(1, r, 2, '-'))],
        _ => (1..=s / 2)
            .filter(|&t| gcd(t as i64, s as i64) == 1)
            .map(|t| {
                let branch = if kind == FamilyKind::Sqrt && s % 4 == 0 {
                    // p ≡ 1 mod 4 leaves one sign: t p ∓ r ≡ 0 mod 4
                    if (r * t) % 4 == 1 {
                        Branch::Minus
                    } else {
                        Branch::Plus
                    }
                } else {
                    Branch::Both
                };
                make(t, branch, fraction_label(t, r, s, sign_char(branch)))
            })
            .collect(),
    }
}

fn coprime_pairs(n: u64) -> impl Iterator<Item = (u64, u64)> {
    (1..n).flat_map(move |s| {
        (1..=n - s)
            .filter(move |&r| gcd(r as i64, s as i64) == 1)
            .map(move |r| (r, s))
    })
}

fn sorted(mut v: Vec<FamilyDescriptor>) -> Vec<FamilyDescriptor> {
    v.sort_by_key(FamilyDescriptor::sort_key);
    v
}

/// Every coprime `(r, s)` with `r + s ≤ n`, for `f(x) = A x`.
pub fn critical_families(n: u64) -> Vec<FamilyDescriptor> {
    sorted(
        coprime_pairs(n)
            .flat_map(|(r, s)| {
                let (clause, bound) = linear_clause(r, s, n);
                descriptors_for(r, s, FamilyKind::Linear, clause, bound)
            })
            .collect(),
    )
}

/// Families admitted by the conservative clauses for `f(x) = A x^{(p+1)/2}`.
pub fn sqrt_families(n: u64) -> Vec<FamilyDescriptor> {
    sorted(
        coprime_pairs(n)
            .filter_map(|(r, s)| sqrt_clause(r, s, n).map(|c| (r, s, c)))
            .flat_map(|(r, s, (clause, bound))| {
                descriptors_for(r, s, FamilyKind::Sqrt, clause, bound)
            })
            .collect(),
    )
}

/// Extra sqrt families admitted only through the rounding-free refinements.
pub fn relaxed_sqrt_families(n: u64) -> Vec<FamilyDescriptor> {
    sorted(
        coprime_pairs(n)
            .filter(|&(r, s)| sqrt_clause(r, s, n).is_none())
            .filter_map(|(r, s)| relaxed_clause(r, s, n).map(|c| (r, s, c)))
            .flat_map(|(r, s, (clause, bound))| {
                descriptors_for(r, s, FamilyKind::Sqrt, clause, bound)
            })
            .collect(),
    )
}

pub fn families(n: u64, kind: FamilyKind) -> Vec<FamilyDescriptor> {
    match kind {
        FamilyKind::Linear => critical_families(n),
        FamilyKind::Sqrt => sqrt_families(n),
    }
}

/// The positive family member at `p`, if `p` lies in an admissible class.
pub fn instantiate(fam: &FamilyDescriptor, p: u64) -> Option<AbsLeast> {
    if p < 3 || p % 2 == 0 || (fam.kind == FamilyKind::Sqrt && p % 4 != 1) {
        return None;
    }
    let nonzero = |v: i128| abs_least(v, p).ok().filter(|a| a.value() != 0);
    if fam.s == 1 {
        return nonzero(fam.r as i128);
    }
    let (s, r, tp) = (fam.s as i128, fam.r as i128, fam.t as i128 * p as i128);
    let signs: &[i128] = match fam.branch {
        Branch::Minus => &[-1],
        Branch::Plus => &[1],
        Branch::Both => &[-1, 1],
    };
    signs
        .iter()
        .map(|&sg| tp + sg * r)
        .find(|num| num % s == 0)
        .and_then(|num| nonzero(num / s))
}

/// The guaranteed number of empty cells per row, and which rows.
pub fn predicted_miss_bound(fam: &FamilyDescriptor, n: u64) -> MissBound {
    let missed = n.saturating_sub(fam.bound);
    let scope = match fam.clause {
        Clause::LinearInteger
        | Clause::LinearGcd
        | Clause::SqrtHalfInteger
        | Clause::SqrtHalfFraction => RowScope::Every,
        Clause::LinearSharp => RowScope::AtLeast(n / gcd(n as i64, fam.s as i64)),
        _ => RowScope::SomeRowOrColumn,
    };
    MissBound { missed, scope }
}

/// `S(N) = |{(r, s) : r, s ≥ 1, gcd(r, s) = 1, r + s ≤ N}|`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SCount {
    #[serde(rename = "N")]
    pub n: u64,
    pub value: u64,
    /// `3 N² / π²`.
    pub asymptotic: f64,
}

/// Exact `S(N)` as a sum of Euler's totient over `2..=N`.
pub fn s_count(n: u64) -> SCount {
    let len = n as usize + 1;
    let mut phi: Vec<u64> = (0..len as u64).collect();
    for i in 2..len {
        if phi[i] == i as u64 {
            for j in (i..len).step_by(i) {
                phi[j] -= phi[j] / i as u64;
            }
        }
    }
    SCount {
        n,
        value: phi.iter().skip(2).sum(),
        asymptotic: 3.0 * (n as f64).powi(2) / std::f64::consts::PI.powi(2),
    }
}

/// `±` every instantiated family value, sorted.
pub fn instantiated_set(fams: &[FamilyDescriptor], p: u64) -> Vec<AbsLeast> {
    let set: BTreeSet<AbsLeast> = fams
        .iter()
        .filter_map(|f| instantiate(f, p))
        .flat_map(|a| [a, a.negated()])
        .collect();
    set.into_iter().collect()
}

/// All coefficients of critical form at `p`; meaningful for `p > n²`.
pub fn critical_set(p: u64, n: u64) -> Vec<AbsLeast> {
    instantiated_set(&critical_families(n), p)
}

/// One table row: integers first, then fractions, in canonical order.
pub fn render_row(fams: &[FamilyDescriptor]) -> String {
    let fams = sorted(fams.to_vec());
    let join = |frac: bool| {
        fams.iter()
            .filter(|f| (f.s > 1) == frac)
            .map(|f| f.label.as_str())
            .collect::<Vec<_>>()
            .join(",")
    };
    let (ints, fracs) = (join(false), join(true));
    match (ints.is_empty(), fracs.is_empty()) {
        (_, true) => ints,
        (true, false) => fracs,
        (false, false) => format!("{ints}, {fracs}"),
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::modnum::primes_in;
    use crate::ratrep::is_critical;

    fn labels(f: &[FamilyDescriptor]) -> Vec<&str> {
        f.iter().map(|d| d.label.as_str()).collect()
    }

    #[test]
    fn linear_examples() {
        assert_eq!(labels(&critical_families(3)), vec!["1", "2", "(p-1)/2"]);
        assert_eq!(
            render_row(&critical_families(4)),
            "1,2,3, (p-1)/2,(p±1)/3"
        );
        assert_eq!(labels(&critical_families(2)), vec!["1"]);
    }

    #[test]
    fn sqrt_examples() {
        assert_eq!(render_row(&sqrt_families(4)), "1");
        assert_eq!(render_row(&sqrt_families(6)), "1,2,4, (p-1)/2,(p-1)/4");
        assert_eq!(render_row(&sqrt_families(3)), "1,2, (p-1)/2");
    }

    #[test]
    fn instantiate_examples() {
        let half = &critical_families(3)[2];
        assert_eq!(instantiate(half, 13).unwrap().value(), 6);
        let third = critical_families(4)
            .into_iter()
            .find(|f| f.label == "(p±1)/3")
            .unwrap();
        assert_eq!(instantiate(&third, 13).unwrap().value(), 4);
        assert_eq!(instantiate(&third, 17).unwrap().value(), 6);
        let two = &critical_families(3)[1];
        assert_eq!(instantiate(two, 13).unwrap().value(), 2);
        let sq = sqrt_families(6);
        assert!(instantiate(&sq[0], 19).is_none());
    }

    #[test]
    fn miss_bound_examples() {
        let two = critical_families(5)
            .into_iter()
            .find(|f| f.label == "2")
            .unwrap();
        assert_eq!(two.clause, Clause::LinearInteger);
        assert_eq!(predicted_miss_bound(&two, 5).missed, 3);
        let half = critical_families(3)
            .into_iter()
            .find(|f| f.s == 2)
            .unwrap();
        assert_eq!(half.clause, Clause::LinearSharp);
        assert_eq!(
            predicted_miss_bound(&half, 3),
            MissBound {
                missed: 1,
                scope: RowScope::AtLeast(3)
            }
        );
        let one = &sqrt_families(4)[0];
        assert_eq!(one.clause, Clause::SqrtHalfInteger);
        assert_eq!(predicted_miss_bound(one, 4).missed, 2);
    }

    #[test]
    fn s_count_examples() {
        assert_eq!(s_count(0).value, 0);
        assert_eq!(s_count(1).value, 0);
        assert_eq!(s_count(2).value, 1);
        assert_eq!(s_count(3).value, 3);
        assert_eq!(s_count(4).value, 5);
    }

    #[test]
    fn s_count_matches_pair_enumeration() {
        for big_n in 0..=100u64 {
            let brute = (1..=big_n)
                .flat_map(|r| (1..=big_n).map(move |s| (r, s)))
                .filter(|&(r, s)| r + s <= big_n && gcd(r as i64, s as i64) == 1)
                .count() as u64;
            assert_eq!(s_count(big_n).value, brute);
        }
    }

    #[test]
    fn critical_set_examples() {
        let vals: Vec<i64> = critical_set(13, 3).iter().map(|a| a.value()).collect();
        assert_eq!(vals, vec![-6, -2, -1, 1, 2, 6]);
        let vals: Vec<i64> = critical_set(11, 2).iter().map(|a| a.value()).collect();
        assert_eq!(vals, vec![-1, 1]);
        assert_eq!(critical_set(19, 4).len(), 10);
    }

    #[test]
    fn critical_set_equals_critical_coefficients() {
        for n in 2..=8u64 {
            for p in primes_in(n * n + 1, 1500) {
                let half = (p as i64 - 1) / 2;
                let want: Vec<AbsLeast> = (-half..=half)
                    .filter(|&a| a != 0)
                    .map(|a| abs_least(a as i128, p).unwrap())
                    .filter(|&a| is_critical(a, p, n).is_some())
                    .collect();
                assert_eq!(critical_set(p, n), want, "p={p} n={n}");
            }
        }
    }

    #[test]
    fn exactly_one_label_per_pair_instantiates() {
        for n in 3..=12u64 {
            for p in primes_in(n * n + 1, 800) {
                for kind in [FamilyKind::Linear, FamilyKind::Sqrt] {
                    if kind == FamilyKind::Sqrt && p % 4 != 1 {
                        continue;
                    }
                    let fams = families(n, kind);
                    let mut pairs = BTreeSet::new();
                    for f in &fams {
                        pairs.insert((f.r, f.s));
                    }
                    for (r, s) in pairs {
                        let hits = fams
                            .iter()
                            .filter(|f| (f.r, f.s) == (r, s) && instantiate(f, p).is_some())
                            .count();
                        assert_eq!(hits, 1, "n={n} p={p} r={r} s={s} {kind:?}");
                    }
                }
            }
        }
    }

    #[test]
    fn relaxed_clauses_add_nothing_below_35() {
        for n in 2..35 {
            assert!(relaxed_sqrt_families(n).is_empty(), "n={n}");
        }
        let extra: Vec<(u64, u64)> = relaxed_sqrt_families(35)
            .iter()
            .map(|f| (f.r, f.s))
            .collect();
        assert!(extra.contains(&(28, 5)) && extra.contains(&(5, 28)));
    }
}
