//! Exhaustive scans over (p, A, k) for maps with an empty cell.

mod engine;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use std::collections::{BTreeMap, BTreeSet};

use crate::error::{Error, Result};
use crate::families::{instantiated_set, relaxed_sqrt_families, sqrt_families};
use crate::modnum::{abs_least, gcd, is_prime, primes_in, primitive_root, AbsLeast};
use crate::ratrep::is_critical;
use crate::residue::{class_of, normalize_spec, one_based_label, KMode};
use engine::{exponent_pairs, PrimeTables};

/// Which exponents a scan visits.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum KFilter {
    Linear,
    Sqrt,
    Other,
    Any,
}

impl KFilter {
    pub fn accepts(self, mode: KMode) -> bool {
        match self {
            KFilter::Linear => mode == KMode::Linear,
            KFilter::Sqrt => mode == KMode::Sqrt,
            KFilter::Other => mode == KMode::Other,
            KFilter::Any => true,
        }
    }
}

/// Which coefficients a scan reports.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum ARange {
    /// Every nonzero `|A| < p/2`.
    Full,
    /// `1 ≤ A ≤ (p−1)/2`.
    PositiveHalf,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct ScanConfig {
    pub n: u64,
    pub p_min: u64,
    pub p_max: u64,
    pub k_mode: KFilter,
    pub exclude_families: bool,
    pub a_range: ARange,
    pub jobs: usize,
}

impl ScanConfig {
    pub fn new(n: u64, p_min: u64, p_max: u64, k_mode: KFilter) -> Self {
        ScanConfig {
            n,
            p_min,
            p_max,
            k_mode,
            exclude_families: false,
            a_range: ARange::PositiveHalf,
            jobs: 1,
        }
    }

    fn check(&self) -> Result<()> {
        if self.n < 2 || self.n > 255 {
            return Err(Error::ClassModulus(self.n));
        }
        if self.p_min > self.p_max {
            return Err(Error::EmptyRange {
                lo: self.p_min,
                hi: self.p_max,
            });
        }
        if self.p_max >= u32::MAX as u64 {
            return Err(Error::ModulusTooLarge(self.p_max));
        }
        Ok(())
    }
}

/// A map with at least one empty cell, with all of its empty cells (0-based labels).
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Finding {
    pub p: u64,
    #[serde(rename = "A")]
    pub a: i64,
    pub k: u64,
    pub n: u64,
    pub k_mode: KMode,
    pub witnesses: Vec<[u64; 2]>,
}

/// True iff no `x ∈ I_i` has `f(x) ∈ I_j`.
pub fn verify_witness(p: i64, a: i64, k: i64, n: u64, i: u64, j: u64) -> Result<bool> {
    let spec = normalize_spec(p, a, k)?;
    if n < 2 {
        return Err(Error::ClassModulus(n));
    }
    let (i, j) = (i % n, j % n);
    let m = spec.modulus();
    let start = if i == 0 { n } else { i };
    let mut x = start;
    while x < spec.p {
        let y = m.mul(spec.a_residue(), m.pow(x, spec.k));
        if y % n == j {
            return Ok(false);
        }
        x += n;
    }
    Ok(true)
}

fn excluded(a: AbsLeast, p: u64, n: u64, mode: KMode) -> bool {
    match mode {
        KMode::Linear => is_critical(a, p, n).is_some(),
        KMode::Sqrt => {
            let mut fams = sqrt_families(n);
            fams.extend(relaxed_sqrt_families(n));
            instantiated_set(&fams, p).contains(&a)
        }
        KMode::Other => false,
    }
}

fn mode_of(p: u64, k: u64) -> KMode {
    if k == 1 {
        KMode::Linear
    } else if p % 4 == 1 && k == (p + 1) / 2 {
        KMode::Sqrt
    } else {
        KMode::Other
    }
}

/// All findings at one prime, ordered by `(A, k)`.
pub fn scan_prime(p: u64, config: &ScanConfig) -> Result<Vec<Finding>> {
    config.check()?;
    if !is_prime(p) {
        return Err(Error::NotOddPrime(p as i64));
    }
    if p == 2 {
        return Ok(Vec::new());
    }
    let n = config.n;
    let filter = config.k_mode;
    let pairs = exponent_pairs(p, |k| filter.accepts(mode_of(p, k)));
    if pairs.is_empty() {
        return Ok(Vec::new());
    }
    let tables = PrimeTables::new(p, n as usize, primitive_root(p)?);
    let order = tables.order as u64;
    let h = order / 2;
    let half_bound = (p - 1) / 2;
    let flip = |(i, j): (u64, u64)| (i, class_of(p as i64 - j as i64, n));
    // Inversion swaps (A, k) with (A^{-k'}, k') and transposes cells, so one
    // exponent of each inverse pair suffices.
    let mut raw: Vec<(i64, u64, Vec<(u64, u64)>)> = Vec::new();
    for &(k, k_inv) in pairs.iter().filter(|&&(k, k_inv)| k <= k_inv) {
        for (b, cells) in tables.scan_exponent(k) {
            raw.push((tables.gpow[b as usize] as i64, k, cells.clone()));
            if k_inv != k {
                let mut b2 = (order - (b as u64 * k_inv) % order) % order;
                let mut flipped = false;
                if tables.gpow[b2 as usize] as u64 > half_bound {
                    b2 = (b2 + h) % order;
                    flipped = true;
                }
                let mut dual: Vec<(u64, u64)> = cells
                    .iter()
                    .map(|&(i, j)| (j, i))
                    .map(|c| if flipped { flip(c) } else { c })
                    .collect();
                dual.sort_unstable();
                raw.push((tables.gpow[b2 as usize] as i64, k_inv, dual));
            }
        }
    }
    if config.a_range == ARange::Full {
        let negated: Vec<_> = raw
            .iter()
            .map(|(a, k, cells)| {
                let mut c: Vec<_> = cells.iter().map(|&c| flip(c)).collect();
                c.sort_unstable();
                (-a, *k, c)
            })
            .collect();
        raw.extend(negated);
    }
    let mut out: Vec<Finding> = raw
        .into_iter()
        .map(|(a, k, cells)| (abs_least(a as i128, p).expect("odd prime"), k, cells))
        .filter(|(a, k, _)| !(config.exclude_families && excluded(*a, p, n, mode_of(p, *k))))
        .map(|(a, k, cells)| Finding {
            p,
            a: a.value(),
            k,
            n,
            k_mode: mode_of(p, k),
            witnesses: cells.into_iter().map(|(i, j)| [i, j]).collect(),
        })
        .collect();
    out.sort_by_key(|f| (f.a, f.k));
    Ok(out)
}

fn pool(jobs: usize) -> Result<rayon::ThreadPool> {
    rayon::ThreadPoolBuilder::new()
        .num_threads(jobs.max(1))
        .build()
        .map_err(|e| Error::Hypothesis(format!("thread pool: {e}")))
}

/// Scan `primes` in parallel, handing each prime's findings to `sink` in the
/// order given. `sink` returns false to stop early.
fn drive(
    primes: &[u64],
    config: &ScanConfig,
    mut sink: impl FnMut(u64, Vec<Finding>) -> bool,
) -> Result<()> {
    let pool = pool(config.jobs)?;
    let chunk = (config.jobs.max(1) * 4).max(8);
    for batch in primes.chunks(chunk) {
        let results: Vec<Result<Vec<Finding>>> =
            pool.install(|| batch.par_iter().map(|&p| scan_prime(p, config)).collect());
        for (&p, found) in batch.iter().zip(results) {
            if !sink(p, found?) {
                return Ok(());
            }
        }
    }
    Ok(())
}

/// Stream every finding over `primes_in(p_min, p_max)` in `(p, A, k)` order.
pub fn scan_range_each(config: &ScanConfig, mut emit: impl FnMut(&Finding)) -> Result<()> {
    config.check()?;
    let primes = primes_in(config.p_min, config.p_max);
    drive(&primes, config, |_, found| {
        found.iter().for_each(&mut emit);
        true
    })
}

pub fn scan_range(config: &ScanConfig) -> Result<Vec<Finding>> {
    let mut out = Vec::new();
    scan_range_each(config, |f| out.push(f.clone()))?;
    Ok(out)
}

/// One grouped table row: the A values sharing an exponent list and an
/// empty-cell set.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct TableRow {
    pub p: u64,
    pub n: u64,
    #[serde(rename = "A")]
    pub a_values: Vec<i64>,
    pub k_values: Vec<u64>,
    pub witnesses: Vec<[u64; 2]>,
    pub witnesses_one_based: Vec<[u64; 2]>,
}

impl TableRow {
    /// `p | A,A | k,k | (i,j),(i,j)` with labels in `1..=n`.
    pub fn render(&self) -> String {
        let join = |v: Vec<String>| v.join(",");
        format!(
            "{} | {} | {} | {}",
            self.p,
            join(self.a_values.iter().map(i64::to_string).collect()),
            join(self.k_values.iter().map(u64::to_string).collect()),
            join(
                self.witnesses_one_based
                    .iter()
                    .map(|[i, j]| format!("({i},{j})"))
                    .collect()
            ),
        )
    }
}

/// Group one prime's findings: A values sharing `(k, cells)` are merged, then
/// exponents sharing `(A list, cells)`. Rows are ordered by least k, then least A.
pub fn group_rows(findings: &[Finding]) -> Vec<TableRow> {
    let mut by_k: BTreeMap<(u64, u64, u64, Vec<[u64; 2]>), Vec<i64>> = BTreeMap::new();
    for f in findings {
        by_k.entry((f.p, f.n, f.k, f.witnesses.clone()))
            .or_default()
            .push(f.a);
    }
    let mut by_a: BTreeMap<(u64, u64, Vec<i64>, Vec<[u64; 2]>), Vec<u64>> = BTreeMap::new();
    for ((p, n, k, w), mut a) in by_k {
        a.sort_unstable();
        by_a.entry((p, n, a, w)).or_default().push(k);
    }
    let mut rows: Vec<TableRow> = by_a
        .into_iter()
        .map(|((p, n, a_values, witnesses), mut k_values)| {
            k_values.sort_unstable();
            let mut witnesses_one_based: Vec<[u64; 2]> = witnesses
                .iter()
                .map(|&[i, j]| [one_based_label(i, n), one_based_label(j, n)])
                .collect();
            witnesses_one_based.sort_unstable();
            TableRow {
                p,
                n,
                a_values,
                k_values,
                witnesses,
                witnesses_one_based,
            }
        })
        .collect();
    rows.sort_by_key(|r| (r.p, r.k_values[0], r.a_values[0]));
    rows
}

fn largest_with_findings(config: &ScanConfig, want: usize) -> Result<Vec<TableRow>> {
    config.check()?;
    let mut primes = primes_in(config.p_min, config.p_max);
    primes.reverse();
    let mut hits: Vec<Vec<Finding>> = Vec::new();
    drive(&primes, config, |_, found| {
        if !found.is_empty() {
            hits.push(found);
        }
        hits.len() < want
    })?;
    hits.reverse();
    Ok(hits.iter().flat_map(|f| group_rows(f)).collect())
}

/// Rows for the five largest primes up to `p_max` with a finding.
pub fn five_largest(n: u64, p_max: u64, k_mode: KFilter, jobs: usize) -> Result<Vec<TableRow>> {
    let mut config = ScanConfig::new(n, 2, p_max, k_mode);
    config.jobs = jobs;
    largest_with_findings(&config, 5)
}

/// Rows for the largest prime up to `p_max` with a finding outside the
/// closed-form families.
pub fn largest_excluding_families(
    n: u64,
    p_max: u64,
    k_mode: KFilter,
    jobs: usize,
) -> Result<Vec<TableRow>> {
    if !matches!(k_mode, KFilter::Linear | KFilter::Sqrt) {
        return Err(Error::Hypothesis(
            "family exclusion needs k_mode linear or sqrt".into(),
        ));
    }
    let mut config = ScanConfig::new(n, 2, p_max, k_mode);
    config.exclude_families = true;
    config.jobs = jobs;
    largest_with_findings(&config, 1)
}

/// For every empty cell `(i, j)` of `(A, k)` with `2j ≡ p mod n`, check that
/// `(A, k + (p−1)/2)` leaves it empty too. Vacuously true when that exponent
/// is not a unit or no such cell exists.
pub fn pairing_check(p: i64, a: i64, k: i64, n: u64) -> Result<bool> {
    let spec = normalize_spec(p, a, k)?;
    let p = spec.p;
    let order = p - 1;
    let k2 = (spec.k + order / 2) % order;
    if gcd(k2 as i64, order as i64) != 1 {
        return Ok(true);
    }
    let mat = crate::residue::image_matrix(&spec, n)?;
    let cells: Vec<(u64, u64)> = mat
        .empty_cells()
        .into_iter()
        .filter(|&(_, j)| (2 * j) % n == p % n)
        .collect();
    for (i, j) in cells {
        if !verify_witness(p as i64, spec.a.value(), k2 as i64, n, i, j)? {
            return Ok(false);
        }
    }
    Ok(true)
}

/// Distinct primes carrying findings, in order.
pub fn primes_of(findings: &[Finding]) -> Vec<u64> {
    findings
        .iter()
        .map(|f| f.p)
        .collect::<BTreeSet<_>>()
        .into_iter()
        .collect()
}

/// CSV mirror of the JSON-lines records; witnesses as `i:j;i:j`.
pub fn findings_csv(findings: &[Finding]) -> Result<String> {
    let mut w = csv::Writer::from_writer(Vec::new());
    let io = |e: csv::Error| Error::Hypothesis(format!("csv: {e}"));
    w.write_record(["p", "A", "k", "n", "k_mode", "witnesses"])
        .map_err(io)?;
    for f in findings {
        let cells: Vec<String> = f.witnesses.iter().map(|[i, j]| format!("{i}:{j}")).collect();
        w.write_record([
            f.p.to_string(),
            f.a.to_string(),
            f.k.to_string(),
            f.n.to_string(),
            f.k_mode.as_str().to_string(),
            cells.join(";"),
        ])
        .map_err(io)?;
    }
    let bytes = w.into_inner().map_err(|e| Error::Hypothesis(format!("csv: {e}")))?;
    Ok(String::from_utf8(bytes).expect("csv is utf-8"))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::residue::image_matrix;

    fn brute(p: u64, n: u64, filter: KFilter, range: ARange) -> Vec<Finding> {
        let mut out = Vec::new();
        let h = (p as i64 - 1) / 2;
        let lo = if range == ARange::Full { -h } else { 1 };
        for a in lo..=h {
            if a == 0 {
                continue;
            }
            for k in 1..p - 1 {
                let Ok(spec) = normalize_spec(p as i64, a, k as i64) else {
                    continue;
                };
                if !filter.accepts(spec.kind()) {
                    continue;
                }
                let cells = image_matrix(&spec, n).unwrap().empty_cells();
                if !cells.is_empty() {
                    out.push(Finding {
                        p,
                        a,
                        k,
                        n,
                        k_mode: spec.kind(),
                        witnesses: cells.into_iter().map(|(i, j)| [i, j]).collect(),
                    });
                }
            }
        }
        out.sort_by_key(|f| (f.a, f.k));
        out
    }

    #[test]
    fn scan_matches_brute_force() {
        for p in primes_in(3, 140) {
            for n in 2..=6 {
                for range in [ARange::Full, ARange::PositiveHalf] {
                    let mut cfg = ScanConfig::new(n, p, p, KFilter::Any);
                    cfg.a_range = range;
                    assert_eq!(
                        scan_prime(p, &cfg).unwrap(),
                        brute(p, n, KFilter::Any, range),
                        "p={p} n={n} {range:?}"
                    );
                }
            }
        }
    }

    #[test]
    fn filters_partition_the_findings() {
        for p in [101u64, 109, 113] {
            let all = scan_prime(p, &ScanConfig::new(4, p, p, KFilter::Any)).unwrap();
            let mut parts: Vec<Finding> = [KFilter::Linear, KFilter::Sqrt, KFilter::Other]
                .iter()
                .flat_map(|&m| scan_prime(p, &ScanConfig::new(4, p, p, m)).unwrap())
                .collect();
            parts.sort_by_key(|f| (f.a, f.k));
            assert_eq!(all, parts);
        }
    }

    #[test]
    fn witness_examples() {
        assert!(verify_witness(83, 21, 81, 3, 1, 1).unwrap());
        assert!(verify_witness(13, 5, 1, 3, 2, 2).unwrap());
        assert!(!verify_witness(13, 1, 1, 3, 1, 1).unwrap());
        assert!(verify_witness(13, 5, 2, 3, 2, 2).is_err());
    }

    #[test]
    fn scan_prime_examples() {
        let f = scan_prime(127, &ScanConfig::new(3, 2, 200, KFilter::Other)).unwrap();
        let got: Vec<(i64, u64)> = f.iter().map(|f| (f.a, f.k)).collect();
        assert_eq!(got, vec![(45, 71), (53, 71)]);
        assert!(f.iter().all(|f| f.witnesses == vec![[2, 2]]));
        assert!(scan_prime(131, &ScanConfig::new(3, 2, 200, KFilter::Other))
            .unwrap()
            .is_empty());
        let mut cfg = ScanConfig::new(3, 2, 200, KFilter::Linear);
        cfg.exclude_families = true;
        cfg.a_range = ARange::Full;
        let f = scan_prime(13, &cfg).unwrap();
        let got: Vec<i64> = f.iter().map(|f| f.a).collect();
        assert_eq!(got, vec![-5, 5]);
        assert_eq!(f[1].witnesses, vec![[2, 2]]);
    }

    #[test]
    fn linear_exclusion_matches_critical_set() {
        for p in primes_in(67, 400) {
            let mut cfg = ScanConfig::new(3, p, p, KFilter::Linear);
            cfg.a_range = ARange::Full;
            let all = scan_prime(p, &cfg).unwrap();
            cfg.exclude_families = true;
            let rest = scan_prime(p, &cfg).unwrap();
            let dropped: Vec<i64> = all.iter().filter(|f| !rest.contains(f)).map(|f| f.a).collect();
            let crit: Vec<i64> = (-(p as i64 - 1) / 2..=(p as i64 - 1) / 2)
                .filter(|&a| a != 0)
                .filter(|&a| is_critical(abs_least(a as i128, p).unwrap(), p, 3).is_some())
                .collect();
            assert_eq!(dropped, crit, "p={p}");
        }
    }

    #[test]
    fn grouping_merges_shared_exponents() {
        let f = scan_prime(1733, &ScanConfig::new(7, 2, 2000, KFilter::Other)).unwrap();
        let rows = group_rows(&f);
        assert!(rows
            .iter()
            .any(|r| r.render() == "1733 | 670 | 865,1731 | (2,2)"));
    }

    #[test]
    fn pairing_examples() {
        assert!(pairing_check(1733, 670, 865, 7).unwrap());
        assert!(verify_witness(1733, 670, 1731, 7, 2, 2).unwrap());
        let brute = {
            let k2 = (71 + 63) % 126;
            gcd(k2, 126) != 1 || verify_witness(127, 45, k2, 3, 2, 2).unwrap()
        };
        assert_eq!(pairing_check(127, 45, 71, 3).unwrap(), brute);
    }

    #[test]
    fn order_is_independent_of_jobs() {
        let mut cfg = ScanConfig::new(4, 2, 300, KFilter::Any);
        let one = scan_range(&cfg).unwrap();
        cfg.jobs = 3;
        assert_eq!(scan_range(&cfg).unwrap(), one);
    }
}
