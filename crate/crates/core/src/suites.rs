//! Named verification suites, shared by `resperm verify` and the acceptance
//! test binary.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::Serialize;
use std::collections::{BTreeMap, BTreeSet};
use std::time::Instant;

use crate::bounds::{certify_no_type4, Verdict};
use crate::error::{Error, Result};
use crate::families::{
    critical_set, families, instantiate, predicted_miss_bound, relaxed_sqrt_families, render_row,
    s_count, FamilyDescriptor, FamilyKind, MissBound, RowScope,
};
use crate::modnum::{gcd, inv_mod, is_prime, primes_in};
use crate::ratrep::is_critical;
use crate::reference::{
    canonical_row, corrected_cells, corrected_families, label_readings, published_rows, Listing,
    WitnessRow,
};
use crate::residue::{has_missed_cell, image_matrix, normalize_spec, ImageMatrix, ScanOrder};
use crate::search::{
    five_largest, scan_prime, scan_range, verify_witness, ARange, KFilter, ScanConfig,
};

/// Every suite, in the order `all` runs them, with a one-line description.
pub const SUITES: &[(&str, &str)] = &[
    (
        "golden-witnesses",
        "every published empty cell holds under some label reading",
    ),
    (
        "frontier-n3",
        "n=3, 83 <= p < 20000, k not in {1,(p+1)/2}: findings exactly at the five published primes",
    ),
    (
        "frontier-probe-n3",
        "n=3, 127 < p < 5000, k not in {1,(p+1)/2}: no findings",
    ),
    (
        "critical-equivalence",
        "n in {3,4}, n^3(n+3) < p <= 2003, k=1: empty cell iff critical form",
    ),
    (
        "family-tables",
        "generated family rows for n=3..12 equal the corrected published rows",
    ),
    (
        "family-soundness",
        "every family member for n^3 < p <= 2000 has an empty cell and meets its miss bound",
    ),
    (
        "counting",
        "critical set sizes, S(N) against enumeration, and S(N) against 3N^2/pi^2",
    ),
    (
        "cell-bounds",
        "sampled lower bounds on the smallest cell for three coefficient regimes",
    ),
    (
        "certifier-soundness",
        "100000 sampled specs: no certified spec has an empty cell",
    ),
    (
        "determinism",
        "n=4, p <= 1000, every exponent: identical output at 1, 4 and 16 jobs",
    ),
];

#[derive(Debug, Clone, Serialize)]
pub struct SuiteReport {
    pub suite: String,
    pub passed: bool,
    pub checked: u64,
    pub detail: String,
    /// First few failures, for diagnosis.
    pub failures: Vec<String>,
    pub seconds: f64,
}

struct Tally {
    checked: u64,
    failures: Vec<String>,
    failed: u64,
}

impl Tally {
    fn new() -> Self {
        Tally {
            checked: 0,
            failures: Vec::new(),
            failed: 0,
        }
    }

    fn check(&mut self, ok: bool, what: impl FnOnce() -> String) {
        self.checked += 1;
        if !ok {
            self.failed += 1;
            if self.failures.len() < 10 {
                self.failures.push(what());
            }
        }
    }
}

pub fn run_suite(name: &str, jobs: usize) -> Result<SuiteReport> {
    let start = Instant::now();
    let mut t = Tally::new();
    let detail = match name {
        "golden-witnesses" => golden_witnesses(&mut t)?,
        "frontier-n3" => frontier(&mut t, jobs)?,
        "frontier-probe-n3" => frontier_probe(&mut t, jobs)?,
        "critical-equivalence" => critical_equivalence(&mut t)?,
        "family-tables" => family_tables(&mut t)?,
        "family-soundness" => family_soundness(&mut t)?,
        "counting" => counting(&mut t)?,
        "cell-bounds" => cell_bounds(&mut t)?,
        "certifier-soundness" => certifier_soundness(&mut t)?,
        "determinism" => determinism(&mut t)?,
        other => return Err(Error::UnknownSuite(other.to_string())),
    };
    Ok(SuiteReport {
        suite: name.to_string(),
        passed: t.failed == 0 && t.checked > 0,
        checked: t.checked,
        detail,
        failures: t.failures,
        seconds: start.elapsed().as_secs_f64(),
    })
}

/// Suite names selected by `name`, where `all` selects every suite.
pub fn resolve(name: &str) -> Result<Vec<&'static str>> {
    if name == "all" {
        return Ok(SUITES.iter().map(|s| s.0).collect());
    }
    SUITES
        .iter()
        .find(|s| s.0 == name)
        .map(|s| vec![s.0])
        .ok_or_else(|| Error::UnknownSuite(name.to_string()))
}

fn row_holds(row: &WitnessRow, a: i64, k: u64, cells: &[(u64, u64)]) -> Result<bool> {
    let n = row.n;
    let mod_n = |l: u64| Some(l % n);
    let from_one = |l: u64| l.checked_sub(1).map(|c| c % n);
    for reading in [&mod_n as &dyn Fn(u64) -> Option<u64>, &from_one] {
        let mut all = true;
        for &(i, j) in cells {
            let ok = match (reading(i), reading(j)) {
                (Some(i), Some(j)) => verify_witness(row.p as i64, a, k as i64, n, i, j)?,
                _ => false,
            };
            all &= ok;
        }
        if all {
            return Ok(true);
        }
    }
    Ok(false)
}

fn golden_witnesses(t: &mut Tally) -> Result<String> {
    let mut corrected = 0;
    let mut confirmed_misprints = 0;
    for row in published_rows() {
        for &a in &row.a_values {
            for &k in &row.k_values {
                let cells = corrected_cells(&row, a);
                if cells != row.cells {
                    corrected += 1;
                    // The misprint must really fail, or the erratum is bogus.
                    if !row_holds(&row, a, k, &row.cells)? {
                        confirmed_misprints += 1;
                    }
                }
                let ok = row_holds(&row, a, k, &cells)?;
                t.check(ok, || {
                    format!(
                        "{} n={} p={} A={a} k={k} cells {:?}",
                        row.listing.as_str(),
                        row.n,
                        row.p,
                        cells
                    )
                });
            }
        }
    }
    t.check(confirmed_misprints == corrected, || {
        "a listed misprint holds as printed".to_string()
    });
    Ok(format!(
        "{} (row, A, k) checks; {corrected} with a corrected misprint",
        t.checked - 1
    ))
}

/// Published rows of one listing for one `n`, with labels read mod n.
fn published_keyed(listing: Listing, n: u64) -> BTreeSet<(u64, Vec<i64>, Vec<u64>, Vec<[u64; 2]>)> {
    published_rows()
        .into_iter()
        .filter(|r| r.listing == listing && r.n == n)
        .map(|r| {
            let mut cells: Vec<[u64; 2]> = r
                .cells
                .iter()
                .map(|&(i, j)| [label_readings(i, n)[0], label_readings(j, n)[0]])
                .collect();
            cells.sort_unstable();
            (r.p, r.a_values.clone(), r.k_values.clone(), cells)
        })
        .collect()
}

fn frontier(t: &mut Tally, jobs: usize) -> Result<String> {
    let rows = five_largest(3, 19_999, KFilter::Other, jobs)?;
    let got: BTreeSet<_> = rows
        .iter()
        .map(|r| (r.p, r.a_values.clone(), r.k_values.clone(), r.witnesses.clone()))
        .collect();
    let want = published_keyed(Listing::Frontier, 3);
    for row in got.symmetric_difference(&want) {
        t.check(false, || format!("row differs: {row:?}"));
    }
    t.check(got == want, || "row sets differ".to_string());
    let primes: BTreeSet<u64> = got.iter().map(|r| r.0).collect();
    Ok(format!("five largest primes with findings: {primes:?}"))
}

fn frontier_probe(t: &mut Tally, jobs: usize) -> Result<String> {
    let mut cfg = ScanConfig::new(3, 128, 4_999, KFilter::Other);
    cfg.jobs = jobs;
    let found = scan_range(&cfg)?;
    t.check(found.is_empty(), || format!("{} findings, first {:?}", found.len(), found.first()));
    Ok(format!("{} primes scanned", primes_in(128, 4_999).len()))
}

fn critical_equivalence(t: &mut Tally) -> Result<String> {
    let mut primes = 0;
    for n in [3u64, 4] {
        let lo = n.pow(3) * (n + 3) + 1;
        for p in primes_in(lo, 2_003) {
            primes += 1;
            let mut cfg = ScanConfig::new(n, p, p, KFilter::Linear);
            cfg.a_range = ARange::Full;
            let found: BTreeSet<i64> = scan_prime(p, &cfg)?.iter().map(|f| f.a).collect();
            let h = (p as i64 - 1) / 2;
            for a in (-h..=h).filter(|&a| a != 0) {
                let spec = normalize_spec(p as i64, a, 1)?;
                let crit = is_critical(spec.a, p, n).is_some();
                t.check(found.contains(&a) == crit, || {
                    format!("n={n} p={p} A={a}: empty cell {} critical {crit}", found.contains(&a))
                });
            }
        }
    }
    Ok(format!("{primes} primes, {} coefficients", t.checked))
}

fn family_tables(t: &mut Tally) -> Result<String> {
    for kind in [FamilyKind::Linear, FamilyKind::Sqrt] {
        for n in 3..=12 {
            let ours = render_row(&families(n, kind));
            let theirs = corrected_families(kind, n).and_then(|v| canonical_row(&v));
            t.check(theirs.as_deref() == Some(ours.as_str()), || {
                format!("{kind:?} n={n}: generated {ours:?}, published {theirs:?}")
            });
        }
    }
    Ok("20 rows".to_string())
}

/// Whether the empty cells of `mat` meet `bound` over the designated rows.
pub fn meets_miss_bound(mat: &ImageMatrix, bound: MissBound) -> bool {
    let n = mat.n;
    let empty = mat.empty_cells();
    let per_row = |i: u64| empty.iter().filter(|c| c.0 == i).count() as u64;
    let per_col = |j: u64| empty.iter().filter(|c| c.1 == j).count() as u64;
    let rows_ok = (0..n).filter(|&i| per_row(i) >= bound.missed).count() as u64;
    match bound.scope {
        RowScope::Every => rows_ok == n,
        RowScope::AtLeast(m) => rows_ok >= m,
        RowScope::SomeRowOrColumn => {
            rows_ok > 0 || (0..n).any(|j| per_col(j) >= bound.missed)
        }
    }
}

fn family_soundness(t: &mut Tally) -> Result<String> {
    let mut members = 0;
    for n in 3..=12u64 {
        let mut fams: Vec<FamilyDescriptor> = families(n, FamilyKind::Linear);
        fams.extend(families(n, FamilyKind::Sqrt));
        fams.extend(relaxed_sqrt_families(n));
        for p in primes_in(n.pow(3) + 1, 2_000) {
            for fam in &fams {
                let Some(a) = instantiate(fam, p) else { continue };
                let k = match fam.kind {
                    FamilyKind::Linear => 1,
                    FamilyKind::Sqrt => (p + 1) / 2,
                };
                let spec = normalize_spec(p as i64, a.value(), k as i64)?;
                let mat = image_matrix(&spec, n)?;
                let bound = predicted_miss_bound(fam, n);
                members += 1;
                t.check(!mat.empty_cells().is_empty() && meets_miss_bound(&mat, bound), || {
                    format!("n={n} p={p} {} A={} bound {bound:?}", fam.label, a.value())
                });
            }
        }
    }
    Ok(format!("{members} instantiated family members"))
}

fn primes_above(lo: u64, count: usize) -> Vec<u64> {
    (lo + 1..).filter(|&p| is_prime(p)).take(count).collect()
}

fn counting(t: &mut Tally) -> Result<String> {
    for n in 3..=8u64 {
        let want = 2 * s_count(n).value;
        for p in primes_above(n.pow(3), 10) {
            let got = critical_set(p, n).len() as u64;
            t.check(got == want, || format!("n={n} p={p}: |critical set| {got} != {want}"));
        }
    }
    for big_n in 0..=100u64 {
        let brute = (1..=big_n)
            .flat_map(|r| (1..=big_n).map(move |s| (r, s)))
            .filter(|&(r, s)| r + s <= big_n && gcd(r as i64, s as i64) == 1)
            .count() as u64;
        let got = s_count(big_n).value;
        t.check(got == brute, || format!("S({big_n}) = {got}, enumeration {brute}"));
    }
    let s100 = s_count(100);
    let ratio = s100.value as f64 / s100.asymptotic;
    t.check((0.9..=1.1).contains(&ratio), || format!("S(100) ratio {ratio}"));
    Ok(format!("S(100) = {}, ratio to 3N^2/pi^2 = {ratio:.4}", s100.value))
}

fn random_prime(rng: &mut ChaCha8Rng, lo: u64, hi: u64) -> Option<u64> {
    for _ in 0..64 {
        let mut p = rng.gen_range(lo..=hi);
        while p <= hi {
            if is_prime(p) && p > 2 {
                return Some(p);
            }
            p += 1;
        }
    }
    None
}

/// `(t p − r) / s` with `0 ≤ t < s`, as an integer.
fn rational_coefficient(p: u64, r: i64, s: u64) -> Option<i64> {
    let s_inv = inv_mod((p % s.max(2)) as u64, s.max(2)).ok();
    let t = if s == 1 {
        0
    } else {
        ((r.rem_euclid(s as i64) as u64) * s_inv? % s) as i64
    };
    let num = t as i128 * p as i128 - r as i128;
    (num % s as i128 == 0).then(|| (num / s as i128) as i64)
}

fn min_cell(p: u64, a: i64, n: u64) -> Result<u64> {
    Ok(image_matrix(&normalize_spec(p as i64, a, 1)?, n)?.min_cell())
}

fn cell_bounds(t: &mut Tally) -> Result<String> {
    let mut rng = ChaCha8Rng::seed_from_u64(0x5eed_0001);
    let mut samples = [0u32; 3];
    // Integer coefficients away from both ends.
    while samples[0] < 200 {
        let n = rng.gen_range(2..=8u64);
        let Some(p) = random_prime(&mut rng, n * n * 4, 100_000) else { continue };
        let a_abs = rng.gen_range(n..=p / n);
        let a = if rng.gen_bool(0.5) { a_abs as i64 } else { -(a_abs as i64) };
        let m = min_cell(p, a, n)?;
        samples[0] += 1;
        t.check(4 * n * n * m > p, || format!("integer p={p} A={a} n={n}: min {m}"));
    }
    // Rationals with a large numerator.
    while samples[1] < 200 {
        let n = rng.gen_range(2..=8u64);
        let s = rng.gen_range(1..=n);
        let lo = (n + 3) * s;
        let Some(p) = random_prime(&mut rng, lo * n * 2, 100_000) else { continue };
        if lo > p / n {
            continue;
        }
        let r = rng.gen_range(lo..=p / n) as i64;
        if gcd(r, s as i64) != 1 {
            continue;
        }
        let Some(a) = rational_coefficient(p, r, s) else { continue };
        let m = min_cell(p, a, n)?;
        samples[1] += 1;
        t.check(2 * n * (2 * n + 3) * m >= p, || {
            format!("rational p={p} r={r} s={s} n={n}: min {m}")
        });
    }
    // Small non-critical numerators and denominators.
    while samples[2] < 200 {
        let n = rng.gen_range(2..=8u64);
        let s = rng.gen_range(1..=2 * n);
        let r_abs = rng.gen_range(1..=3 * n);
        if r_abs + s <= n || gcd(r_abs as i64, s as i64) != 1 {
            continue;
        }
        let r = if rng.gen_bool(0.5) { r_abs as i64 } else { -(r_abs as i64) };
        let Some(p) = random_prime(&mut rng, r_abs * s * n + 1, 100_000) else { continue };
        if p % s == 0 {
            continue;
        }
        let Some(a) = rational_coefficient(p, r, s) else { continue };
        let m = min_cell(p, a, n)?;
        samples[2] += 1;
        let floor = p / (r_abs * s * n);
        t.check(m >= floor, || format!("small p={p} r={r} s={s} n={n}: min {m} < {floor}"));
    }
    Ok(format!("{} samples per regime", samples[0]))
}

/// Specs drawn to reach each certifier rule, not just uniform ones.
fn sample_spec(rng: &mut ChaCha8Rng) -> Option<(i64, i64, i64, u64)> {
    let n = rng.gen_range(2..=12u64);
    let p = random_prime(rng, 5, 20_000)?;
    let order = p - 1;
    let h = (p as i64 - 1) / 2;
    let a = match rng.gen_range(0..4) {
        0 => rng.gen_range(1..=n.min(h as u64).max(1)) as i64,
        1 => {
            let s = rng.gen_range(1..=n);
            let r = rng.gen_range(1..=n) as i64;
            rational_coefficient(p, r, s).unwrap_or(1)
        }
        _ => rng.gen_range(1..=h),
    };
    let a = if rng.gen_bool(0.5) { a } else { -a };
    let k = match rng.gen_range(0..5) {
        0 => 1,
        1 => (p as i64 + 1) / 2,
        2 => rng.gen_range(1..=8),
        3 => {
            // k − 1 sharing a large factor with p − 1.
            let d = order / rng.gen_range(1..=8u64).min(order);
            (d * rng.gen_range(0..=3) + 1) as i64
        }
        _ => rng.gen_range(1..order as i64),
    };
    Some((p as i64, a, k, n))
}

fn certifier_soundness(t: &mut Tally) -> Result<String> {
    let mut rng = ChaCha8Rng::seed_from_u64(0x5eed_0002);
    let mut by_rule: BTreeMap<String, u64> = BTreeMap::new();
    let mut drawn = 0;
    while drawn < 100_000 {
        let Some((p, a, k, n)) = sample_spec(&mut rng) else { continue };
        let Ok(spec) = normalize_spec(p, a, k) else { continue };
        drawn += 1;
        let cert = certify_no_type4(&spec, n)?;
        *by_rule.entry(cert.rule.clone()).or_default() += 1;
        if cert.verdict == Verdict::NoType4Guaranteed {
            let miss = has_missed_cell(&spec, n, ScanOrder::Seeded(drawn))?;
            t.check(miss.is_none(), || {
                format!("p={p} A={a} k={k} n={n} certified by {} but misses {miss:?}", cert.rule)
            });
        }
    }
    if t.checked == 0 {
        t.check(false, || "no spec was certified".to_string());
    }
    Ok(format!("{drawn} specs, {} certified; rules {by_rule:?}", t.checked))
}

fn determinism(t: &mut Tally) -> Result<String> {
    let render = |jobs: usize| -> Result<String> {
        let mut cfg = ScanConfig::new(4, 2, 1_000, KFilter::Any);
        cfg.a_range = ARange::Full;
        cfg.jobs = jobs;
        let mut out = String::new();
        for f in scan_range(&cfg)? {
            out.push_str(&serde_json::to_string(&f).expect("finding serializes"));
            out.push('\n');
        }
        Ok(out)
    };
    let base = render(1)?;
    for jobs in [4, 16] {
        let other = render(jobs)?;
        t.check(other == base, || format!("{jobs} jobs differ from 1 job"));
    }
    Ok(format!("{} records, {} bytes", base.lines().count(), base.len()))
}
