//! Published search results and family lists, kept verbatim, with the
//! misprints found while reproducing them.

use crate::families::FamilyKind;

const WITNESSES: &str = include_str!("../data/published_witnesses.txt");
const FAMILIES: &str = include_str!("../data/published_families.txt");

/// Which published listing a row comes from.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Listing {
    /// Five largest primes with an empty cell for `k ∉ {1, (p+1)/2}`.
    Frontier,
    /// Largest prime with a non-critical `A` for `k = 1`.
    LinearExceptions,
    /// Largest prime with a non-family `A` for `k = (p+1)/2`.
    SqrtExceptions,
}

impl Listing {
    pub fn as_str(self) -> &'static str {
        match self {
            Listing::Frontier => "frontier",
            Listing::LinearExceptions => "linear-exceptions",
            Listing::SqrtExceptions => "sqrt-exceptions",
        }
    }

    fn parse(s: &str) -> Listing {
        match s {
            "frontier" => Listing::Frontier,
            "linear-exceptions" => Listing::LinearExceptions,
            "sqrt-exceptions" => Listing::SqrtExceptions,
            other => panic!("unknown listing {other}"),
        }
    }
}

/// One printed row: every `A` with every `k` is claimed to leave every listed
/// cell empty. Labels are as printed.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct WitnessRow {
    pub listing: Listing,
    pub n: u64,
    pub p: u64,
    pub a_values: Vec<i64>,
    pub k_values: Vec<u64>,
    pub cells: Vec<(u64, u64)>,
}

fn numbers<T: std::str::FromStr>(s: &str) -> Vec<T>
where
    T::Err: std::fmt::Debug,
{
    s.split(',').map(|x| x.trim().parse().expect("number")).collect()
}

pub fn published_rows() -> Vec<WitnessRow> {
    WITNESSES
        .lines()
        .filter(|l| !l.is_empty())
        .map(|line| {
            let f: Vec<&str> = line.split('|').collect();
            let cells = f[5]
                .split("),(")
                .map(|c| {
                    let c = c.trim_matches(|ch| ch == '(' || ch == ')');
                    let (i, j) = c.split_once(',').expect("pair");
                    (i.parse().expect("label"), j.parse().expect("label"))
                })
                .collect();
            WitnessRow {
                listing: Listing::parse(f[0]),
                n: f[1].parse().expect("n"),
                p: f[2].parse().expect("p"),
                a_values: numbers(f[3]),
                k_values: numbers(f[4]),
                cells,
            }
        })
        .collect()
}

/// Classes a printed label may denote: `label mod n`, or `label − 1` when
/// the listing counts classes from 1.
pub fn label_readings(label: u64, n: u64) -> Vec<u64> {
    let mut out = vec![label % n];
    if label >= 1 && (label - 1) % n != label % n {
        out.push((label - 1) % n);
    }
    out
}

/// A printed cell that holds under no label reading, with the cell the
/// same row actually leaves empty.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct CellErratum {
    pub listing: Listing,
    pub n: u64,
    pub p: u64,
    pub a: i64,
    pub printed: (u64, u64),
    pub corrected: (u64, u64),
}

pub const CELL_ERRATA: &[CellErratum] = &[CellErratum {
    listing: Listing::SqrtExceptions,
    n: 8,
    p: 937,
    a: 314,
    printed: (2, 7),
    corrected: (2, 2),
}];

/// The printed cells of a row with known misprints replaced.
pub fn corrected_cells(row: &WitnessRow, a: i64) -> Vec<(u64, u64)> {
    row.cells
        .iter()
        .map(|&c| {
            CELL_ERRATA
                .iter()
                .find(|e| {
                    e.listing == row.listing
                        && e.n == row.n
                        && e.p == row.p
                        && e.a == a
                        && e.printed == c
                })
                .map_or(c, |e| e.corrected)
        })
        .collect()
}

/// Printed family labels for one `n`, token by token.
pub fn published_families(kind: FamilyKind, n: u64) -> Option<Vec<String>> {
    let tag = match kind {
        FamilyKind::Linear => "linear",
        FamilyKind::Sqrt => "sqrt",
    };
    FAMILIES.lines().find_map(|line| {
        let mut f = line.splitn(3, '|');
        (f.next()? == tag && f.next()?.parse::<u64>().ok()? == n)
            .then(|| f.next().unwrap_or("").split(',').map(str::to_string).collect())
    })
}

/// A misprinted family label: the `occurrence`-th copy of `printed` in the
/// row for `n` stands for `corrected`.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct LabelErratum {
    pub kind: FamilyKind,
    pub n: u64,
    pub printed: &'static str,
    pub occurrence: usize,
    pub corrected: &'static str,
}

const fn label_fix(
    kind: FamilyKind,
    n: u64,
    printed: &'static str,
    occurrence: usize,
    corrected: &'static str,
) -> LabelErratum {
    LabelErratum {
        kind,
        n,
        printed,
        occurrence,
        corrected,
    }
}

use FamilyKind::{Linear, Sqrt};

pub const LABEL_ERRATA: &[LabelErratum] = &[
    label_fix(Linear, 7, "2(p±1)/5", 1, "(2p±2)/5"),
    label_fix(Linear, 8, "2(p±1)/5", 1, "(2p±2)/5"),
    label_fix(Linear, 9, "(2p±4)/5", 1, "(p±4)/5"),
    label_fix(Linear, 11, "((p±4)/3", 1, "(p±4)/3"),
    label_fix(Linear, 11, "(p±3)/5", 1, "(p±2)/5"),
    label_fix(Sqrt, 10, "(p±1)/4", 1, "(p-1)/4"),
    label_fix(Sqrt, 10, "(p±3)/4", 1, "(p+3)/4"),
    label_fix(Sqrt, 11, "((p±4)/3", 1, "(p±4)/3"),
    label_fix(Sqrt, 11, "(p±3)/5", 1, "(p±2)/5"),
];

/// Printed labels with every listed misprint corrected.
pub fn corrected_families(kind: FamilyKind, n: u64) -> Option<Vec<String>> {
    let mut tokens = published_families(kind, n)?;
    for fix in LABEL_ERRATA.iter().filter(|e| e.kind == kind && e.n == n) {
        let pos = tokens
            .iter()
            .enumerate()
            .filter(|(_, t)| t.as_str() == fix.printed)
            .nth(fix.occurrence - 1)
            .map(|(i, _)| i)?;
        tokens[pos] = fix.corrected.to_string();
    }
    Some(tokens)
}

/// Sort key of a printed label, matching the family order: integers by
/// value, then fractions `(t p ± r)/s` by `(s, r, t)`.
pub fn label_key(label: &str) -> Option<(bool, u64, u64, u64)> {
    if let Ok(r) = label.parse::<u64>() {
        return Some((false, 1, r, 0));
    }
    let (num, s) = label.strip_prefix('(')?.split_once(")/")?;
    let s: u64 = s.parse().ok()?;
    let (t, r) = num.split_once('p')?;
    let t: u64 = if t.is_empty() { 1 } else { t.parse().ok()? };
    let r = r.trim_start_matches(['+', '-', '±']).parse().ok()?;
    Some((true, s, r, t))
}

/// Printed labels in canonical order, rendered like a generated row.
pub fn canonical_row(tokens: &[String]) -> Option<String> {
    let mut keyed: Vec<_> = tokens
        .iter()
        .map(|t| label_key(t).map(|k| (k, t.as_str())))
        .collect::<Option<_>>()?;
    keyed.sort();
    let join = |frac: bool| {
        keyed
            .iter()
            .filter(|(k, _)| k.0 == frac)
            .map(|(_, t)| *t)
            .collect::<Vec<_>>()
            .join(",")
    };
    let (ints, fracs) = (join(false), join(true));
    Some(match (ints.is_empty(), fracs.is_empty()) {
        (_, true) => ints,
        (true, false) => fracs,
        (false, false) => format!("{ints}, {fracs}"),
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn row_counts() {
        let rows = published_rows();
        let count = |l| rows.iter().filter(|r| r.listing == l).count();
        assert_eq!(count(Listing::Frontier), 56);
        assert_eq!(count(Listing::LinearExceptions), 15);
        assert_eq!(count(Listing::SqrtExceptions), 19);
    }

    #[test]
    fn parses_a_row() {
        let rows = published_rows();
        let r = rows.iter().find(|r| r.p == 1733).unwrap();
        assert_eq!(r.a_values, vec![670]);
        assert_eq!(r.k_values, vec![865, 1731]);
        assert_eq!(r.cells, vec![(2, 2)]);
    }

    #[test]
    fn label_keys() {
        assert_eq!(label_key("7"), Some((false, 1, 7, 0)));
        assert_eq!(label_key("(p-3)/2"), Some((true, 2, 3, 1)));
        assert_eq!(label_key("(3p±1)/8"), Some((true, 8, 1, 3)));
        assert_eq!(label_key("2(p±1)/5"), None);
    }

    #[test]
    fn readings() {
        assert_eq!(label_readings(3, 3), vec![0, 2]);
        assert_eq!(label_readings(0, 10), vec![0]);
    }

    #[test]
    fn every_erratum_applies() {
        for e in LABEL_ERRATA {
            assert!(corrected_families(e.kind, e.n).is_some(), "{e:?}");
        }
        for n in 3..=12 {
            assert!(published_families(Linear, n).is_some());
            assert!(published_families(Sqrt, n).is_some());
        }
    }
}
