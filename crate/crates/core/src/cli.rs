//! Command-line front end. `run` returns the process exit status: 0 on
//! success, 1 on malformed input or domain errors, 2 when a verification
//! suite fails.

use clap::{Parser, Subcommand, ValueEnum};
use serde::Serialize;
use serde_json::{json, Value};
use std::io::Write;

use crate::bounds::certify_no_type4;
use crate::error::{Error, Result};
use crate::families::{
    families, instantiate, predicted_miss_bound, relaxed_sqrt_families, render_row,
    FamilyKind,
};
use crate::modnum::abs_least;
use crate::ratrep::{c_set, canonical_rep, d_of, good_c_exists, is_critical, reps_of};
use crate::residue::{classify_matrix, image_matrix, normalize_spec, one_based_label, PermutationSpec};
use crate::search::{
    findings_csv, five_largest, largest_excluding_families, scan_range_each, ARange, Finding,
    KFilter, ScanConfig, TableRow,
};
use crate::suites::{resolve, run_suite};

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum Format {
    Json,
    Csv,
    Table,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum KindArg {
    Linear,
    Sqrt,
}

impl From<KindArg> for FamilyKind {
    fn from(k: KindArg) -> Self {
        match k {
            KindArg::Linear => FamilyKind::Linear,
            KindArg::Sqrt => FamilyKind::Sqrt,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum KModeArg {
    Linear,
    Sqrt,
    Other,
    Any,
}

impl From<KModeArg> for KFilter {
    fn from(k: KModeArg) -> Self {
        match k {
            KModeArg::Linear => KFilter::Linear,
            KModeArg::Sqrt => KFilter::Sqrt,
            KModeArg::Other => KFilter::Other,
            KModeArg::Any => KFilter::Any,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum ARangeArg {
    Full,
    PositiveHalf,
}

/// Which table `tables` renders.
#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum Which {
    /// Coefficient families with an empty cell for k = 1.
    CriticalFamilies,
    /// Coefficient families with an empty cell for k = (p+1)/2.
    SqrtFamilies,
    /// Five largest primes with an empty cell for other exponents.
    Frontier,
    /// Largest prime with a non-family coefficient for k = 1.
    LinearExceptions,
    /// Largest prime with a non-family coefficient for k = (p+1)/2.
    SqrtExceptions,
}

#[derive(Debug, Parser)]
#[command(
    name = "resperm",
    version,
    about = "Residue-class distribution of power permutations Ax^k mod p",
    allow_negative_numbers = true
)]
pub struct Cli {
    /// Output format.
    #[arg(long, global = true, value_enum, default_value = "json")]
    pub format: Format,
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Clone, clap::Args)]
pub struct SpecArgs {
    #[arg(long)]
    pub p: i64,
    #[arg(long, allow_negative_numbers = true)]
    pub a: i64,
    #[arg(long, allow_negative_numbers = true)]
    pub k: i64,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Map types and empty cells of f(x) = A x^k mod p.
    Classify {
        #[command(flatten)]
        spec: SpecArgs,
        #[arg(long)]
        n: u64,
    },
    /// The image matrix with its row and column sums.
    Images {
        #[command(flatten)]
        spec: SpecArgs,
        #[arg(long)]
        n: u64,
    },
    /// Representations C = (t p - r) / s with s <= n and |r| < p/n.
    Ratrep {
        #[arg(long, allow_negative_numbers = true)]
        c: i64,
        #[arg(long)]
        p: i64,
        #[arg(long)]
        n: u64,
    },
    /// The coset set {A x^(k-1)}, and a good element of it if one exists.
    Cset {
        #[command(flatten)]
        spec: SpecArgs,
        #[arg(long)]
        n: Option<u64>,
    },
    /// Closed-form coefficient families, optionally instantiated at p.
    Families {
        #[arg(long)]
        n: u64,
        #[arg(long, value_enum)]
        kind: KindArg,
        #[arg(long)]
        p: Option<u64>,
    },
    /// Whether a known criterion rules out empty cells.
    Certify {
        #[command(flatten)]
        spec: SpecArgs,
        #[arg(long)]
        n: u64,
    },
    /// Exhaustive scan for maps with an empty cell, one record per map.
    Search {
        #[arg(long)]
        n: u64,
        #[arg(long, default_value_t = 3)]
        p_min: u64,
        #[arg(long)]
        p_max: u64,
        #[arg(long, value_enum, default_value = "any")]
        k_mode: KModeArg,
        #[arg(long)]
        exclude_families: bool,
        #[arg(long, value_enum, default_value = "positive-half")]
        a_range: ARangeArg,
        #[arg(long)]
        jobs: Option<usize>,
    },
    /// Family rows, or search results grouped as in the published tables.
    Tables {
        #[arg(long, value_enum)]
        which: Which,
        /// Class modulus; family tables default to every n in 3..=12.
        #[arg(long)]
        n: Option<u64>,
        #[arg(long, default_value_t = 19_999)]
        p_max: u64,
        #[arg(long)]
        jobs: Option<usize>,
    },
    /// Run a verification suite, or `all`.
    Verify {
        #[arg(long)]
        suite: String,
        #[arg(long)]
        jobs: Option<usize>,
    },
}

fn jobs(flag: Option<usize>) -> usize {
    std::env::var("RESPERM_JOBS")
        .ok()
        .and_then(|v| v.parse().ok())
        .or(flag)
        .unwrap_or_else(|| std::thread::available_parallelism().map_or(1, |n| n.get()))
        .max(1)
}

fn spec_of(a: &SpecArgs) -> Result<PermutationSpec> {
    normalize_spec(a.p, a.a, a.k)
}

fn spec_json(s: &PermutationSpec) -> Value {
    json!({
        "p": s.p,
        "A": s.a.value(),
        "k": s.k,
        "k_input": s.k_raw,
        "k_mode": s.kind(),
    })
}

fn cells_json(cells: &[(u64, u64)], n: u64) -> Value {
    json!({
        "zero_based": cells.iter().map(|&(i, j)| [i, j]).collect::<Vec<_>>(),
        "one_based": cells
            .iter()
            .map(|&(i, j)| [one_based_label(i, n), one_based_label(j, n)])
            .collect::<Vec<_>>(),
    })
}

/// A payload plus an optional hand-made table rendering.
struct Payload {
    value: Value,
    table: Option<String>,
}

impl Payload {
    fn json(value: Value) -> Self {
        Payload { value, table: None }
    }

    fn with_table(value: Value, table: String) -> Self {
        Payload {
            value,
            table: Some(table),
        }
    }
}

fn scalar(v: &Value) -> String {
    match v {
        Value::String(s) => s.clone(),
        Value::Null => String::new(),
        other => other.to_string(),
    }
}

/// Objects become one CSV row; arrays of objects become one row each.
fn to_csv(value: &Value) -> Result<String> {
    let rows: Vec<&serde_json::Map<String, Value>> = match value {
        Value::Array(items) => items.iter().filter_map(Value::as_object).collect(),
        Value::Object(map) => vec![map],
        _ => Vec::new(),
    };
    let mut header: Vec<String> = Vec::new();
    for row in &rows {
        for key in row.keys() {
            if !header.contains(key) {
                header.push(key.clone());
            }
        }
    }
    let err = |e: csv::Error| Error::Hypothesis(format!("csv: {e}"));
    let mut w = csv::Writer::from_writer(Vec::new());
    w.write_record(&header).map_err(err)?;
    for row in rows {
        let rec: Vec<String> = header
            .iter()
            .map(|k| row.get(k).map(scalar).unwrap_or_default())
            .collect();
        w.write_record(&rec).map_err(err)?;
    }
    let bytes = w
        .into_inner()
        .map_err(|e| Error::Hypothesis(format!("csv: {e}")))?;
    Ok(String::from_utf8(bytes).expect("csv is utf-8"))
}

fn emit(out: &mut dyn Write, format: Format, payload: Payload) -> std::io::Result<()> {
    match format {
        Format::Json => writeln!(out, "{}", payload.value),
        Format::Csv => match to_csv(&payload.value) {
            Ok(s) => write!(out, "{s}"),
            Err(e) => writeln!(out, "{e}"),
        },
        Format::Table => match payload.table {
            Some(t) => writeln!(out, "{t}"),
            None => writeln!(
                out,
                "{}",
                serde_json::to_string_pretty(&payload.value).expect("json")
            ),
        },
    }
}

fn matrix_table(rows: &[Vec<u64>]) -> String {
    rows.iter()
        .enumerate()
        .map(|(i, r)| {
            let cells: Vec<String> = r.iter().map(|c| format!("{c:>6}")).collect();
            format!("{i:>3} |{}", cells.join(""))
        })
        .collect::<Vec<_>>()
        .join("\n")
}

fn cmd_classify(spec: &SpecArgs, n: u64) -> Result<Payload> {
    let s = spec_of(spec)?;
    let mat = image_matrix(&s, n)?;
    let report = classify_matrix(&mat);
    let value = json!({
        "spec": spec_json(&s),
        "n": n,
        "report": report,
        "empty_cells": cells_json(&report.empty_cells, n),
        "matrix": mat.rows(),
    });
    let kinds: Vec<&str> = [
        (report.type_i, "i"),
        (report.type_iia, "iia"),
        (report.type_iib, "iib"),
        (report.type_iii, "iii"),
        (report.type_iv, "iv"),
    ]
    .iter()
    .filter(|t| t.0)
    .map(|t| t.1)
    .collect();
    let table = format!(
        "p={} A={} k={} n={n} types: {}\n{}",
        s.p,
        s.a.value(),
        s.k,
        if kinds.is_empty() { "none".to_string() } else { kinds.join(",") },
        matrix_table(&mat.rows())
    );
    Ok(Payload::with_table(value, table))
}

fn cmd_images(spec: &SpecArgs, n: u64) -> Result<Payload> {
    let s = spec_of(spec)?;
    let mat = image_matrix(&s, n)?;
    let value = json!({
        "spec": spec_json(&s),
        "n": n,
        "matrix": mat.rows(),
        "row_sums": (0..n).map(|i| mat.row_sum(i)).collect::<Vec<_>>(),
        "col_sums": (0..n).map(|j| mat.col_sum(j)).collect::<Vec<_>>(),
        "min_cell": mat.min_cell(),
    });
    Ok(Payload::with_table(value, matrix_table(&mat.rows())))
}

fn cmd_ratrep(c: i64, p: i64, n: u64) -> Result<Payload> {
    normalize_spec(p, 1, 1)?;
    let p = p as u64;
    let c = abs_least(c as i128, p)?;
    let reps = reps_of(c, p, n)?;
    let value = json!({
        "C": c.value(),
        "p": p,
        "n": n,
        "canonical": canonical_rep(c, p, n)?,
        "critical": is_critical(c, p, n),
        "reps": reps,
    });
    Ok(Payload::json(value))
}

fn cmd_cset(spec: &SpecArgs, n: Option<u64>) -> Result<Payload> {
    let s = spec_of(spec)?;
    let set = c_set(&s)?;
    let good = match n {
        Some(n) => Some(good_c_exists(&s, n)?),
        None => None,
    };
    let value = json!({
        "spec": spec_json(&s),
        "d": d_of(&s),
        "size": set.elements.len(),
        "elements": set.elements,
        "good": good,
    });
    Ok(Payload::json(value))
}

fn cmd_families(n: u64, kind: KindArg, p: Option<u64>) -> Result<Payload> {
    if n < 2 {
        return Err(Error::ClassModulus(n));
    }
    let kind = FamilyKind::from(kind);
    let mut fams = families(n, kind);
    if kind == FamilyKind::Sqrt {
        fams.extend(relaxed_sqrt_families(n));
    }
    let rows: Vec<Value> = fams
        .iter()
        .map(|f| {
            let bound = predicted_miss_bound(f, n);
            let mut v = serde_json::to_value(f).expect("json");
            v["missed"] = json!(bound.missed);
            v["scope"] = serde_json::to_value(bound.scope).expect("json")["scope"].clone();
            v["scope_rows"] = serde_json::to_value(bound.scope).expect("json")["rows"].clone();
            if let Some(p) = p {
                v["value"] = json!(instantiate(f, p).map(|a| a.value()));
            }
            v
        })
        .collect();
    let table = render_row(&fams);
    Ok(Payload::with_table(Value::Array(rows), table))
}

fn cmd_certify(spec: &SpecArgs, n: u64) -> Result<Payload> {
    let s = spec_of(spec)?;
    if n < 2 {
        return Err(Error::ClassModulus(n));
    }
    let cert = certify_no_type4(&s, n)?;
    Ok(Payload::json(json!({
        "spec": spec_json(&s),
        "n": n,
        "verdict": cert.verdict,
        "rule": cert.rule,
        "margins": cert.margins,
    })))
}

fn rows_payload(rows: &[TableRow]) -> Payload {
    let table = rows.iter().map(TableRow::render).collect::<Vec<_>>().join("\n");
    Payload::with_table(serde_json::to_value(rows).expect("json"), table)
}

fn cmd_tables(which: Which, n: Option<u64>, p_max: u64, jobs: usize) -> Result<Payload> {
    let fam_kind = match which {
        Which::CriticalFamilies => Some(FamilyKind::Linear),
        Which::SqrtFamilies => Some(FamilyKind::Sqrt),
        _ => None,
    };
    if let Some(kind) = fam_kind {
        let ns: Vec<u64> = match n {
            Some(n) if n < 2 => return Err(Error::ClassModulus(n)),
            Some(n) => vec![n],
            None => (3..=12).collect(),
        };
        let rows: Vec<(u64, String)> = ns.iter().map(|&n| (n, render_row(&families(n, kind)))).collect();
        let value = Value::Array(
            rows.iter()
                .map(|(n, row)| json!({ "n": n, "row": row }))
                .collect(),
        );
        let table = if rows.len() == 1 {
            rows[0].1.clone()
        } else {
            rows.iter()
                .map(|(n, row)| format!("{n} | {row}"))
                .collect::<Vec<_>>()
                .join("\n")
        };
        return Ok(Payload::with_table(value, table));
    }
    let n = n.ok_or_else(|| Error::Hypothesis("--n is required for search tables".into()))?;
    let rows = match which {
        Which::Frontier => five_largest(n, p_max, KFilter::Other, jobs)?,
        Which::LinearExceptions => largest_excluding_families(n, p_max, KFilter::Linear, jobs)?,
        _ => largest_excluding_families(n, p_max, KFilter::Sqrt, jobs)?,
    };
    Ok(rows_payload(&rows))
}

fn error_json(e: &Error) -> String {
    json!({ "error": e.code(), "message": e.to_string() }).to_string()
}

fn cmd_search(
    out: &mut dyn Write,
    format: Format,
    config: &ScanConfig,
) -> Result<std::io::Result<()>> {
    let mut io = Ok(());
    match format {
        Format::Json => scan_range_each(config, |f| {
            if io.is_ok() {
                io = writeln!(out, "{}", serde_json::to_string(f).expect("json"));
            }
        })?,
        Format::Csv => {
            let mut all: Vec<Finding> = Vec::new();
            scan_range_each(config, |f| all.push(f.clone()))?;
            io = write!(out, "{}", findings_csv(&all)?);
        }
        Format::Table => {
            let mut current: Vec<Finding> = Vec::new();
            let flush = |batch: &mut Vec<Finding>, out: &mut dyn Write| -> std::io::Result<()> {
                for row in crate::search::group_rows(batch) {
                    writeln!(out, "{}", row.render())?;
                }
                batch.clear();
                Ok(())
            };
            scan_range_each(config, |f| {
                if current.first().is_some_and(|c| c.p != f.p) && io.is_ok() {
                    io = flush(&mut current, out);
                }
                current.push(f.clone());
            })?;
            if io.is_ok() {
                io = flush(&mut current, out);
            }
        }
    }
    Ok(io)
}

/// Run the CLI on `args` (including the program name).
pub fn run<I, T>(args: I, out: &mut dyn Write, err: &mut dyn Write) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<std::ffi::OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(cli) => cli,
        Err(e) => {
            use clap::error::ErrorKind;
            let code = match e.kind() {
                ErrorKind::DisplayHelp | ErrorKind::DisplayVersion => 0,
                _ => 1,
            };
            let text = e.render().to_string();
            let _ = if code == 0 {
                write!(out, "{text}")
            } else {
                let msg = json!({ "error": "usage", "message": text.trim_end() });
                writeln!(err, "{msg}")
            };
            return code;
        }
    };
    let format = cli.format;
    let result: Result<Option<Payload>> = match &cli.command {
        Command::Classify { spec, n } => cmd_classify(spec, *n).map(Some),
        Command::Images { spec, n } => cmd_images(spec, *n).map(Some),
        Command::Ratrep { c, p, n } => cmd_ratrep(*c, *p, *n).map(Some),
        Command::Cset { spec, n } => cmd_cset(spec, *n).map(Some),
        Command::Families { n, kind, p } => cmd_families(*n, *kind, *p).map(Some),
        Command::Certify { spec, n } => cmd_certify(spec, *n).map(Some),
        Command::Tables {
            which,
            n,
            p_max,
            jobs: j,
        } => cmd_tables(*which, *n, *p_max, jobs(*j)).map(Some),
        Command::Search {
            n,
            p_min,
            p_max,
            k_mode,
            exclude_families,
            a_range,
            jobs: j,
        } => {
            let config = ScanConfig {
                n: *n,
                p_min: *p_min,
                p_max: *p_max,
                k_mode: (*k_mode).into(),
                exclude_families: *exclude_families,
                a_range: match a_range {
                    ARangeArg::Full => ARange::Full,
                    ARangeArg::PositiveHalf => ARange::PositiveHalf,
                },
                jobs: jobs(*j),
            };
            match cmd_search(out, format, &config) {
                Ok(Ok(())) => Ok(None),
                Ok(Err(_)) => return 1,
                Err(e) => Err(e),
            }
        }
        Command::Verify { suite, jobs: j } => return verify(suite, jobs(*j), format, out, err),
    };
    match result {
        Ok(Some(payload)) => match emit(out, format, payload) {
            Ok(()) => 0,
            Err(_) => 1,
        },
        Ok(None) => 0,
        Err(e) => {
            let _ = writeln!(err, "{}", error_json(&e));
            1
        }
    }
}

#[derive(Serialize)]
struct VerifyLine<'a> {
    suite: &'a str,
    passed: bool,
    checked: u64,
    detail: &'a str,
    failures: &'a [String],
    seconds: f64,
}

fn verify(suite: &str, jobs: usize, format: Format, out: &mut dyn Write, err: &mut dyn Write) -> i32 {
    let names = match resolve(suite) {
        Ok(names) => names,
        Err(e) => {
            let _ = writeln!(err, "{}", error_json(&e));
            return 1;
        }
    };
    let mut failed = false;
    for name in names {
        let report = match run_suite(name, jobs) {
            Ok(r) => r,
            Err(e) => {
                let _ = writeln!(err, "{}", error_json(&e));
                failed = true;
                continue;
            }
        };
        failed |= !report.passed;
        let line = VerifyLine {
            suite: &report.suite,
            passed: report.passed,
            checked: report.checked,
            detail: &report.detail,
            failures: &report.failures,
            seconds: report.seconds,
        };
        let _ = match format {
            Format::Table => writeln!(
                out,
                "{} {} [{}; {:.1}s]",
                if report.passed { "PASS" } else { "FAIL" },
                report.suite,
                report.detail,
                report.seconds
            ),
            _ => writeln!(out, "{}", serde_json::to_string(&line).expect("json")),
        };
    }
    if failed {
        2
    } else {
        0
    }
}

