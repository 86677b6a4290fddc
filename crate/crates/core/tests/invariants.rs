use std::collections::BTreeSet;

use proptest::prelude::*;
use resperm::bounds::conjecture_bounds;
use resperm::families::{critical_set, s_count};
use resperm::modnum::{abs_least, is_prime, primes_in};
use resperm::ratrep::reps_of;
use resperm::search::{scan_prime, ARange, KFilter, ScanConfig};

#[test]
fn critical_set_has_two_s_members_above_n_cubed() {
    for n in 3..=10u64 {
        let want = 2 * s_count(n).value as usize;
        let lo = n.pow(3) + 1;
        for p in primes_in(lo, lo + 400) {
            assert_eq!(critical_set(p, n).len(), want, "n={n} p={p}");
        }
    }
}

/// Coefficients `A` with `|A| < p/2` for which the square-root exponent
/// leaves an empty cell.
fn sqrt_type4_count(p: u64, n: u64) -> usize {
    let mut cfg = ScanConfig::new(n, p, p, KFilter::Sqrt);
    cfg.a_range = ARange::Full;
    let found = scan_prime(p, &cfg).unwrap();
    found.iter().map(|f| f.a).collect::<BTreeSet<_>>().len()
}

#[test]
fn sqrt_counts_lie_between_the_family_bounds() {
    for n in 2..=8u64 {
        let lo = 2 * s_count((n + 1) / 2).value as usize;
        let hi = 2 * s_count(n).value as usize;
        let start = conjecture_bounds(n).c_lower + 1;
        for p in primes_in(start, 2_000).into_iter().filter(|p| p % 4 == 1) {
            let c = sqrt_type4_count(p, n);
            assert!(lo <= c && c <= hi, "n={n} p={p}: {c} not in [{lo}, {hi}]");
        }
    }
}

#[test]
fn sqrt_upper_bound_fails_below_the_threshold() {
    // Small primes admit extra coincidences, so the bound is not universal.
    let c = sqrt_type4_count(13, 3);
    assert!(c > 2 * s_count(3).value as usize, "{c}");
}

proptest! {
    #[test]
    fn every_coefficient_has_a_small_representation(
        n in 2u64..=12,
        offset in 0u64..5_000,
        c in any::<i64>(),
    ) {
        let p = (n * n + 1 + offset..).find(|&q| is_prime(q)).unwrap();
        let c = abs_least(c as i128, p).unwrap();
        prop_assume!(c.value() != 0);
        prop_assert!(!reps_of(c, p, n).unwrap().is_empty());
    }
}
