use std::collections::BTreeSet;

use resperm::families::{critical_families, render_row, sqrt_families, FamilyKind};
use resperm::reference::{corrected_cells, published_rows, Listing, WitnessRow};
use resperm::search::{
    group_rows, largest_excluding_families, scan_prime, KFilter, ScanConfig, TableRow,
};

fn golden(text: &str) -> Vec<(u64, String)> {
    text.lines()
        .filter(|l| !l.is_empty())
        .map(|l| {
            let (n, row) = l.split_once('|').unwrap();
            (n.parse().unwrap(), row.to_string())
        })
        .collect()
}

#[test]
fn family_rows_match_golden_files() {
    let linear = golden(include_str!("golden/critical_families.txt"));
    let sqrt = golden(include_str!("golden/sqrt_families.txt"));
    assert_eq!(linear.len(), 10);
    assert_eq!(sqrt.len(), 10);
    for (n, row) in linear {
        assert_eq!(render_row(&critical_families(n)), row, "linear n={n}");
    }
    for (n, row) in sqrt {
        assert_eq!(render_row(&sqrt_families(n)), row, "sqrt n={n}");
    }
}

type Key = (Vec<i64>, Vec<u64>, Vec<[u64; 2]>);

fn key(row: &TableRow) -> Key {
    (row.a_values.clone(), row.k_values.clone(), row.witnesses.clone())
}

/// A printed row as zero-based cells, under whichever label reading makes
/// it match `ours`; the mod-n reading otherwise.
fn printed_key(row: &WitnessRow, ours: &BTreeSet<Key>) -> Key {
    let n = row.n;
    let cells = corrected_cells(row, row.a_values[0]);
    let read = |f: &dyn Fn(u64) -> u64| {
        let mut v: Vec<[u64; 2]> = cells.iter().map(|&(i, j)| [f(i), f(j)]).collect();
        v.sort_unstable();
        (row.a_values.clone(), row.k_values.clone(), v)
    };
    let mod_n = read(&|l| l % n);
    let from_one = read(&|l| (l + n - 1) % n);
    if ours.contains(&from_one) && !ours.contains(&mod_n) {
        from_one
    } else {
        mod_n
    }
}

fn printed(listing: Listing, n: u64) -> Vec<WitnessRow> {
    published_rows()
        .into_iter()
        .filter(|r| r.listing == listing && r.n == n)
        .collect()
}

fn assert_reproduces(listing: Listing, n: u64, ours: &[TableRow]) {
    let want = printed(listing, n);
    let primes: BTreeSet<u64> = ours.iter().map(|r| r.p).collect();
    let printed_primes: BTreeSet<u64> = want.iter().map(|r| r.p).collect();
    assert_eq!(primes, printed_primes, "{} n={n}", listing.as_str());
    let got: BTreeSet<Key> = ours.iter().map(key).collect();
    let want: BTreeSet<Key> = want.iter().map(|r| printed_key(r, &got)).collect();
    assert_eq!(got, want, "{} n={n}", listing.as_str());
}

#[test]
fn linear_exception_tables_reproduce() {
    for n in 3..=8 {
        let rows = largest_excluding_families(n, 19_999, KFilter::Linear, 1).unwrap();
        assert_reproduces(Listing::LinearExceptions, n, &rows);
    }
}

#[test]
fn sqrt_exception_tables_reproduce() {
    for n in 3..=8 {
        let rows = largest_excluding_families(n, 19_999, KFilter::Sqrt, 1).unwrap();
        assert_reproduces(Listing::SqrtExceptions, n, &rows);
    }
}

#[test]
fn frontier_rows_reproduce_at_their_primes() {
    for n in 4..=12 {
        let rows = printed(Listing::Frontier, n);
        let primes: BTreeSet<u64> = rows.iter().map(|r| r.p).collect();
        assert_eq!(primes.len(), 5, "n={n}");
        let mut ours = Vec::new();
        for &p in &primes {
            let found = scan_prime(p, &ScanConfig::new(n, p, p, KFilter::Other)).unwrap();
            assert!(!found.is_empty(), "n={n} p={p}");
            ours.extend(group_rows(&found));
        }
        assert_reproduces(Listing::Frontier, n, &ours);
    }
}

#[test]
fn largest_frontier_primes_render_like_the_listing() {
    let found = scan_prime(1733, &ScanConfig::new(7, 1733, 1733, KFilter::Other)).unwrap();
    let rows: Vec<String> = group_rows(&found).iter().map(TableRow::render).collect();
    assert!(rows.contains(&"1733 | 670 | 865,1731 | (2,2)".to_string()), "{rows:?}");
}

#[test]
fn family_kinds_have_rows_for_every_listed_n() {
    for kind in [FamilyKind::Linear, FamilyKind::Sqrt] {
        for n in 3..=12 {
            assert!(resperm::reference::corrected_families(kind, n).is_some());
        }
    }
}
