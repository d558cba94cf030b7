//! Batch driver: a TOML config names seeds, profiles, grids, and tolerance
//! overrides; the sweep generates every `(seed, profile)` instance, runs the
//! selected check groups in parallel, and returns the records sorted by
//! `(seed, check_id)` — independent of worker scheduling. An empty seed list
//! is legal and yields a header-only report.

use anyhow::Context;
use rayon::prelude::*;
use serde::Deserialize;

use crate::instance::{gen_instance, Overrides, Profile, Variant};
use crate::report::{sort_records, ReportRecord};
use crate::runner::{run_instance, CheckGroup, RunOptions, ALL_GROUPS};

/// Flat TOML sweep configuration.
#[derive(Clone, Debug, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SweepConfig {
    pub seeds: Vec<u64>,
    pub profiles: Vec<String>,
    /// Check groups to run (default: all).
    #[serde(default)]
    pub checks: Option<Vec<String>>,
    /// Filtration depth override.
    #[serde(default)]
    pub levels: Option<usize>,
    #[serde(default)]
    pub betas: Option<Vec<f64>>,
    #[serde(default)]
    pub ps: Option<Vec<f64>>,
    #[serde(default)]
    pub lambda_max: Option<f64>,
    #[serde(default)]
    pub lambda_steps: Option<usize>,
    #[serde(default)]
    pub variants: Option<Vec<String>>,
    /// Tolerance override, recorded in the report header.
    #[serde(default)]
    pub tol: Option<f64>,
    /// Default output path (the `--out` flag wins).
    #[serde(default)]
    pub out: Option<String>,
    /// Default output format, `csv` or `json` (the `--format` flag wins).
    #[serde(default)]
    pub format: Option<String>,
}

impl SweepConfig {
    pub fn parse(text: &str) -> anyhow::Result<SweepConfig> {
        let cfg: SweepConfig = toml::from_str(text).context("parsing sweep config")?;
        cfg.groups()?;
        cfg.overrides()?;
        for p in &cfg.profiles {
            p.parse::<Profile>().map_err(anyhow::Error::msg)?;
        }
        if cfg.profiles.is_empty() {
            anyhow::bail!("sweep config needs at least one profile");
        }
        Ok(cfg)
    }

    pub fn groups(&self) -> anyhow::Result<Vec<CheckGroup>> {
        match &self.checks {
            None => Ok(ALL_GROUPS.to_vec()),
            Some(names) => names
                .iter()
                .map(|s| s.parse::<CheckGroup>().map_err(anyhow::Error::msg))
                .collect(),
        }
    }

    pub fn overrides(&self) -> anyhow::Result<Overrides> {
        let variants = match &self.variants {
            None => None,
            Some(names) => Some(
                names
                    .iter()
                    .map(|s| s.parse::<Variant>().map_err(anyhow::Error::msg))
                    .collect::<anyhow::Result<Vec<_>>>()?,
            ),
        };
        Ok(Overrides {
            depth: self.levels,
            betas: self.betas.clone(),
            ps: self.ps.clone(),
            lambda_max: self.lambda_max,
            lambda_steps: self.lambda_steps,
            variants,
        })
    }
}

/// Run the whole sweep; records come back in canonical order.
pub fn run_sweep(cfg: &SweepConfig) -> anyhow::Result<Vec<ReportRecord>> {
    let groups = cfg.groups()?;
    let ov = cfg.overrides()?;
    let profiles: Vec<Profile> =
        cfg.profiles.iter().map(|p| p.parse::<Profile>().map_err(anyhow::Error::msg)).collect::<anyhow::Result<_>>()?;
    let mut tasks: Vec<(u64, Profile)> = Vec::new();
    for &seed in &cfg.seeds {
        for &profile in &profiles {
            tasks.push((seed, profile));
        }
    }
    let opts = RunOptions { groups, tol: cfg.tol };
    let batches: Vec<anyhow::Result<Vec<ReportRecord>>> = tasks
        .par_iter()
        .map(|&(seed, profile)| {
            let inst = gen_instance(profile, seed, &ov)
                .with_context(|| format!("generating seed {seed} profile {}", profile.name()))?;
            run_instance(&inst, &opts)
                .with_context(|| format!("running seed {seed} profile {}", profile.name()))
        })
        .collect();
    let mut records = Vec::new();
    for batch in batches {
        records.extend(batch?);
    }
    sort_records(&mut records);
    Ok(records)
}
