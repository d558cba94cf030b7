//! Report records and their CSV/JSON encodings.
//!
//! One record per individual check. The CSV layout is fixed:
//!
//! ```text
//! check_id,seed,n,beta,p,lambda,lhs,rhs,ratio,status,wall_ms
//! ```
//!
//! preceded by `#`-comment header lines (tool name, tolerance in effect) and
//! followed by one `# summary:` comment. Records are sorted by
//! `(seed, check_id)` with the emission order preserved inside equal keys, so
//! two runs of the same work produce identical bytes except for the trailing
//! `wall_ms` column. The JSON form mirrors the same fields one-to-one.

use anyhow::{bail, Context};
use serde::{Deserialize, Serialize};
use std::io::Write;

/// Outcome of one check.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Status {
    Pass,
    Fail,
    Skipped,
}

impl Status {
    pub fn name(self) -> &'static str {
        match self {
            Status::Pass => "pass",
            Status::Fail => "fail",
            Status::Skipped => "skipped",
        }
    }
}

impl std::str::FromStr for Status {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s {
            "pass" => Ok(Status::Pass),
            "fail" => Ok(Status::Fail),
            "skipped" => Ok(Status::Skipped),
            other => Err(format!("unknown status `{other}`")),
        }
    }
}

/// One executed check with its parameters and both sides of the inequality.
#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct ReportRecord {
    pub check_id: String,
    pub seed: u64,
    /// Filtration level / window start, when the check is localized.
    pub n: Option<usize>,
    pub beta: Option<f64>,
    pub p: Option<f64>,
    /// Threshold, growth rate, or other scalar knob of the check.
    pub lambda: Option<f64>,
    pub lhs: f64,
    pub rhs: f64,
    /// `lhs / rhs` when `rhs > 0`.
    pub ratio: Option<f64>,
    pub status: Status,
    /// Wall time of the verifier call that produced this record.
    pub wall_ms: f64,
}

/// Aggregate counts over a record set.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize)]
pub struct Summary {
    pub total: usize,
    pub pass: usize,
    pub fail: usize,
    pub skipped: usize,
}

pub fn summarize(records: &[ReportRecord]) -> Summary {
    let mut s = Summary { total: records.len(), ..Summary::default() };
    for r in records {
        match r.status {
            Status::Pass => s.pass += 1,
            Status::Fail => s.fail += 1,
            Status::Skipped => s.skipped += 1,
        }
    }
    s
}

/// Canonical output order: by `(seed, check_id)`, stable within equal keys.
pub fn sort_records(records: &mut [ReportRecord]) {
    records.sort_by(|a, b| a.seed.cmp(&b.seed).then_with(|| a.check_id.cmp(&b.check_id)));
}

// ─── CSV ──────────────────────────────────────────────────────────────────────

pub const CSV_HEADER: &str = "check_id,seed,n,beta,p,lambda,lhs,rhs,ratio,status,wall_ms";

fn fmt_f64(v: f64) -> String {
    // Shortest round-trip decimal form; deterministic across runs.
    format!("{v}")
}

fn fmt_opt_f64(v: Option<f64>) -> String {
    v.map(fmt_f64).unwrap_or_default()
}

fn fmt_opt_usize(v: Option<usize>) -> String {
    v.map(|n| n.to_string()).unwrap_or_default()
}

fn tol_line(tol: Option<f64>) -> String {
    match tol {
        Some(t) => format!("# tol = {t} (override)"),
        None => "# tol = default (relative slack 1e-8)".to_string(),
    }
}

/// Write the full CSV report (header comments, column row, records, summary).
pub fn write_csv(records: &[ReportRecord], tol: Option<f64>, out: &mut impl Write) -> anyhow::Result<()> {
    writeln!(out, "# ncjn report")?;
    writeln!(out, "{}", tol_line(tol))?;
    writeln!(out, "{CSV_HEADER}")?;
    for r in records {
        writeln!(
            out,
            "{},{},{},{},{},{},{},{},{},{},{:.3}",
            r.check_id,
            r.seed,
            fmt_opt_usize(r.n),
            fmt_opt_f64(r.beta),
            fmt_opt_f64(r.p),
            fmt_opt_f64(r.lambda),
            fmt_f64(r.lhs),
            fmt_f64(r.rhs),
            fmt_opt_f64(r.ratio),
            r.status.name(),
            r.wall_ms,
        )?;
    }
    let s = summarize(records);
    writeln!(out, "# summary: total={} pass={} fail={} skipped={}", s.total, s.pass, s.fail, s.skipped)?;
    Ok(())
}

/// JSON mirror of the same report.
pub fn write_json(records: &[ReportRecord], tol: Option<f64>, out: &mut impl Write) -> anyhow::Result<()> {
    #[derive(Serialize)]
    struct Doc<'a> {
        tol: Option<f64>,
        summary: Summary,
        records: &'a [ReportRecord],
    }
    let doc = Doc { tol, summary: summarize(records), records };
    serde_json::to_writer_pretty(&mut *out, &doc)?;
    writeln!(out)?;
    Ok(())
}

fn parse_opt_f64(field: &str, what: &str) -> anyhow::Result<Option<f64>> {
    if field.is_empty() {
        return Ok(None);
    }
    Ok(Some(field.parse::<f64>().with_context(|| format!("parsing {what} `{field}`"))?))
}

/// Parse a CSV report produced by [`write_csv`]. Comment lines are skipped;
/// the column row must match [`CSV_HEADER`].
pub fn read_csv(text: &str) -> anyhow::Result<Vec<ReportRecord>> {
    let mut records = Vec::new();
    let mut saw_header = false;
    for (lineno, line) in text.lines().enumerate() {
        let line = line.trim_end();
        if line.is_empty() || line.starts_with('#') {
            continue;
        }
        if !saw_header {
            if line != CSV_HEADER {
                bail!("line {}: unexpected column header `{line}`", lineno + 1);
            }
            saw_header = true;
            continue;
        }
        let fields: Vec<&str> = line.split(',').collect();
        if fields.len() != 11 {
            bail!("line {}: expected 11 fields, found {}", lineno + 1, fields.len());
        }
        records.push(ReportRecord {
            check_id: fields[0].to_string(),
            seed: fields[1].parse().with_context(|| format!("line {}: seed", lineno + 1))?,
            n: if fields[2].is_empty() {
                None
            } else {
                Some(fields[2].parse().with_context(|| format!("line {}: n", lineno + 1))?)
            },
            beta: parse_opt_f64(fields[3], "beta")?,
            p: parse_opt_f64(fields[4], "p")?,
            lambda: parse_opt_f64(fields[5], "lambda")?,
            lhs: fields[6].parse().with_context(|| format!("line {}: lhs", lineno + 1))?,
            rhs: fields[7].parse().with_context(|| format!("line {}: rhs", lineno + 1))?,
            ratio: parse_opt_f64(fields[8], "ratio")?,
            status: fields[9].parse::<Status>().map_err(anyhow::Error::msg)?,
            wall_ms: fields[10].parse().with_context(|| format!("line {}: wall_ms", lineno + 1))?,
        });
    }
    if !saw_header {
        bail!("no column header found; is this an ncjn CSV report?");
    }
    Ok(records)
}
