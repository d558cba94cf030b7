//! `ncjn` — generate instances, run verification checks, drive sweeps.
//!
//! Exit codes: 0 when every executed check passed (or was skipped), 1 when
//! any check failed, 2 on malformed input, invalid configuration, or any
//! other error. `NCJN_THREADS` caps the worker pool used by sweeps.

use anyhow::{bail, Context};
use clap::{Parser, Subcommand};
use std::fs;
use std::io::Write;
use std::path::{Path, PathBuf};

use ncjn_cli::{
    gen_instance, read_csv, run_instance, run_sweep, summarize, write_csv, write_json, CheckGroup,
    Instance, Overrides, Profile, ReportRecord, RunOptions, Status, SweepConfig, Variant,
};

#[derive(Parser)]
#[command(name = "ncjn", version, about = "Martingale norm and tail-inequality laboratory")]
struct Cli {
    #[command(subcommand)]
    cmd: Cmd,
}

#[derive(Subcommand)]
enum Cmd {
    /// Generate a seeded instance file.
    Gen {
        /// Seed; the instance is a pure function of (profile, seed, overrides).
        #[arg(long)]
        seed: u64,
        /// Profile: tensor-small | tensor-medium | dyadic | adversarial-sparse.
        #[arg(long)]
        profile: String,
        /// Filtration depth override (number of levels).
        #[arg(long)]
        levels: Option<usize>,
        /// Lipschitz exponent grid override.
        #[arg(long = "beta", value_delimiter = ',')]
        betas: Option<Vec<f64>>,
        /// Moment exponent grid override.
        #[arg(long = "p", value_delimiter = ',')]
        ps: Option<Vec<f64>>,
        /// Threshold grid reach, in units of e·‖x‖.
        #[arg(long)]
        lambda_max: Option<f64>,
        /// Number of threshold grid points.
        #[arg(long)]
        lambda_steps: Option<usize>,
        /// Norm variants: bmo | conditioned (comma-separated or repeated).
        #[arg(long = "variant", value_delimiter = ',')]
        variants: Option<Vec<String>>,
        /// Output path (stdout when omitted).
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Run check groups against an instance file.
    Verify {
        /// Instance JSON produced by `gen`.
        instance: PathBuf,
        /// Comma-separated check groups (default: all).
        #[arg(long, value_delimiter = ',')]
        checks: Option<Vec<String>>,
        /// Relative tolerance override for pass/fail judgment.
        #[arg(long)]
        tol: Option<f64>,
        /// Report path (stdout when omitted).
        #[arg(long)]
        out: Option<PathBuf>,
        /// Report format: csv | json.
        #[arg(long, default_value = "csv")]
        format: String,
    },
    /// Run a batch of seeded instances from a TOML config.
    Sweep {
        /// Sweep configuration file.
        config: PathBuf,
        /// Report path (overrides the config's `out`; stdout when both absent).
        #[arg(long)]
        out: Option<PathBuf>,
        /// Report format: csv | json (overrides the config's `format`).
        #[arg(long)]
        format: Option<String>,
    },
    /// Summarize an existing CSV report.
    Report {
        /// CSV report produced by `verify` or `sweep`.
        report: PathBuf,
        /// Summary format: csv (plain text) | json.
        #[arg(long, default_value = "csv")]
        format: String,
        /// Summary path (stdout when omitted).
        #[arg(long)]
        out: Option<PathBuf>,
    },
}

fn main() {
    let cli = Cli::parse();
    let code = match real_main(cli) {
        Ok(code) => code,
        Err(e) => {
            eprintln!("error: {e:#}");
            2
        }
    };
    std::process::exit(code);
}

fn real_main(cli: Cli) -> anyhow::Result<i32> {
    if let Ok(v) = std::env::var("NCJN_THREADS") {
        let n: usize = v.parse().context("NCJN_THREADS must be a positive integer")?;
        if n == 0 {
            bail!("NCJN_THREADS must be at least 1");
        }
        // Ignore the error when a pool already exists (e.g. under tests).
        let _ = rayon::ThreadPoolBuilder::new().num_threads(n).build_global();
    }
    match cli.cmd {
        Cmd::Gen { seed, profile, levels, betas, ps, lambda_max, lambda_steps, variants, out } => {
            let profile: Profile = profile.parse().map_err(anyhow::Error::msg)?;
            let variants = match variants {
                None => None,
                Some(names) => Some(
                    names
                        .iter()
                        .map(|s| s.parse::<Variant>().map_err(anyhow::Error::msg))
                        .collect::<anyhow::Result<Vec<_>>>()?,
                ),
            };
            let ov = Overrides { depth: levels, betas, ps, lambda_max, lambda_steps, variants };
            let inst = gen_instance(profile, seed, &ov)?;
            emit(out.as_deref(), inst.to_json().as_bytes())?;
            Ok(0)
        }
        Cmd::Verify { instance, checks, tol, out, format } => {
            let text = fs::read_to_string(&instance)
                .with_context(|| format!("reading {}", instance.display()))?;
            let inst = Instance::from_json(&text)?;
            let groups = parse_groups(checks)?;
            let mut records = run_instance(&inst, &RunOptions { groups, tol })?;
            ncjn_cli::sort_records(&mut records);
            write_report(&records, tol, out.as_deref(), &format)?;
            Ok(exit_code(&records))
        }
        Cmd::Sweep { config, out, format } => {
            let text = fs::read_to_string(&config)
                .with_context(|| format!("reading {}", config.display()))?;
            let cfg = SweepConfig::parse(&text)?;
            let records = run_sweep(&cfg)?;
            let out = out.or_else(|| cfg.out.clone().map(PathBuf::from));
            let format = format.or_else(|| cfg.format.clone()).unwrap_or_else(|| "csv".to_string());
            write_report(&records, cfg.tol, out.as_deref(), &format)?;
            Ok(exit_code(&records))
        }
        Cmd::Report { report, format, out } => {
            let text = fs::read_to_string(&report)
                .with_context(|| format!("reading {}", report.display()))?;
            let records = read_csv(&text)?;
            let body = render_summary(&records, &format)?;
            emit(out.as_deref(), body.as_bytes())?;
            Ok(exit_code(&records))
        }
    }
}

fn parse_groups(checks: Option<Vec<String>>) -> anyhow::Result<Vec<CheckGroup>> {
    match checks {
        None => Ok(ncjn_cli::ALL_GROUPS.to_vec()),
        Some(names) => names
            .iter()
            .map(|s| s.parse::<CheckGroup>().map_err(anyhow::Error::msg))
            .collect(),
    }
}

fn exit_code(records: &[ReportRecord]) -> i32 {
    if records.iter().any(|r| r.status == Status::Fail) {
        1
    } else {
        0
    }
}

fn emit(out: Option<&Path>, bytes: &[u8]) -> anyhow::Result<()> {
    match out {
        Some(path) => {
            fs::write(path, bytes).with_context(|| format!("writing {}", path.display()))?
        }
        None => std::io::stdout().write_all(bytes)?,
    }
    Ok(())
}

fn write_report(
    records: &[ReportRecord],
    tol: Option<f64>,
    out: Option<&Path>,
    format: &str,
) -> anyhow::Result<()> {
    let mut buf = Vec::new();
    match format {
        "csv" => write_csv(records, tol, &mut buf)?,
        "json" => write_json(records, tol, &mut buf)?,
        other => bail!("unknown format `{other}` (expected csv|json)"),
    }
    emit(out, &buf)
}

fn render_summary(records: &[ReportRecord], format: &str) -> anyhow::Result<String> {
    let total = summarize(records);
    match format {
        "json" => {
            #[derive(serde::Serialize)]
            struct PerCheck<'a> {
                check_id: &'a str,
                total: usize,
                pass: usize,
                fail: usize,
                skipped: usize,
                worst_ratio: Option<f64>,
            }
            let mut out: Vec<PerCheck> = Vec::new();
            for (id, rows) in group_by_check(records) {
                let s = summarize(&rows);
                out.push(PerCheck {
                    check_id: id,
                    total: s.total,
                    pass: s.pass,
                    fail: s.fail,
                    skipped: s.skipped,
                    worst_ratio: worst_ratio(&rows),
                });
            }
            #[derive(serde::Serialize)]
            struct Doc<'a> {
                summary: ncjn_cli::Summary,
                checks: Vec<PerCheck<'a>>,
            }
            let mut s = serde_json::to_string_pretty(&Doc { summary: total, checks: out })?;
            s.push('\n');
            Ok(s)
        }
        "csv" => {
            let mut s = String::new();
            s.push_str(&format!(
                "total={} pass={} fail={} skipped={}\n",
                total.total, total.pass, total.fail, total.skipped
            ));
            for (id, rows) in group_by_check(records) {
                let g = summarize(&rows);
                let worst = worst_ratio(&rows)
                    .map(|r| format!("{r:.6}"))
                    .unwrap_or_else(|| "-".to_string());
                s.push_str(&format!(
                    "{id}: total={} pass={} fail={} skipped={} worst_ratio={worst}\n",
                    g.total, g.pass, g.fail, g.skipped
                ));
            }
            Ok(s)
        }
        other => bail!("unknown format `{other}` (expected csv|json)"),
    }
}

fn group_by_check(records: &[ReportRecord]) -> Vec<(&str, Vec<ReportRecord>)> {
    let mut ids: Vec<&str> = records.iter().map(|r| r.check_id.as_str()).collect();
    ids.sort_unstable();
    ids.dedup();
    ids.into_iter()
        .map(|id| (id, records.iter().filter(|r| r.check_id == id).cloned().collect()))
        .collect()
}

fn worst_ratio(rows: &[ReportRecord]) -> Option<f64> {
    rows.iter()
        .filter(|r| r.status != Status::Skipped)
        .filter_map(|r| r.ratio)
        .fold(None, |acc, r| Some(acc.map_or(r, |a: f64| a.max(r))))
}
