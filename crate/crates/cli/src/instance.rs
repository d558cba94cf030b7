//! Seeded problem instances and their generation profiles.
//!
//! An [`Instance`] is a fully self-describing JSON document: the seed that
//! produced it, the filtration (kind and depth), the final operator (dense
//! Hermitian matrix or real diagonal), and the parameter grids the runner
//! sweeps. Generation is a pure function of `(profile, seed, overrides)`, so
//! the same invocation always produces byte-identical files, and every
//! derived random choice downstream (projections, search seeds) is mixed
//! from the instance seed.

use anyhow::{bail, Context};
use ncjn_core::algebra::{
    make_dyadic_filtration, make_tensor_filtration, Filtration, FiltrationKind, MAX_DYADIC_DEPTH,
    MAX_TENSOR_DEPTH,
};
use ncjn_core::linalg::Operator;
use ncjn_core::martingale::{martingale_from_final, Martingale};
use ncjn_core::norms::Family;
use num_complex::Complex64;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha12Rng;
use serde::{Deserialize, Serialize};
use std::sync::Arc;

use crate::{mix, salt};

// ─── descriptors ──────────────────────────────────────────────────────────────

/// Filtration kind carried by an instance file.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Kind {
    Tensor,
    Dyadic,
}

/// Filtration descriptor: kind plus number of levels.
#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct FiltrationSpec {
    pub kind: Kind,
    pub depth: usize,
}

/// Final operator of the martingale, in serializable form.
#[derive(Clone, Debug, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum OperatorData {
    /// Row-major complex entries as `[re, im]` pairs.
    Dense { entries: Vec<Vec<[f64; 2]>> },
    /// Real diagonal (the only shape allowed on dyadic filtrations).
    Diagonal { values: Vec<f64> },
}

/// Norm variant selecting which column family a check runs against.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Variant {
    /// Plain differences measured against `x_{n-1}` (BMO-type reading).
    Bmo,
    /// Conditioned blocks measured against `x_n`.
    Conditioned,
}

impl Variant {
    pub fn family(self) -> Family {
        match self {
            Variant::Bmo => Family::Plain,
            Variant::Conditioned => Family::Conditioned,
        }
    }

    pub fn name(self) -> &'static str {
        match self {
            Variant::Bmo => "bmo",
            Variant::Conditioned => "conditioned",
        }
    }
}

impl std::str::FromStr for Variant {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s {
            "bmo" => Ok(Variant::Bmo),
            "conditioned" => Ok(Variant::Conditioned),
            other => Err(format!("unknown variant `{other}` (expected bmo|conditioned)")),
        }
    }
}

/// How corner projections are chosen for tail and exponential checks.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum ProjRule {
    /// Only the Ky Fan witness reported by the norm evaluation.
    Witness,
    /// Only seeded random level projections (atom unions on dyadic levels).
    Random,
    /// Both of the above.
    Both,
}

/// Parameter grids the runner sweeps for one instance.
#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct Params {
    /// Filtration levels `n` at which localized checks run.
    pub levels: Vec<usize>,
    /// Lipschitz exponents β ≥ 0.
    pub betas: Vec<f64>,
    /// Moment exponents p > 0.
    pub ps: Vec<f64>,
    /// Threshold grids reach `lambda_max · e·‖x‖` (absolute when ‖x‖ = 0).
    pub lambda_max: f64,
    /// Number of grid points, endpoints included.
    pub lambda_steps: usize,
    /// Norm variants to exercise.
    pub variants: Vec<Variant>,
    /// Corner projection selection rule.
    pub proj_rule: ProjRule,
}

/// One self-contained, seed-deterministic problem instance.
#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct Instance {
    pub seed: u64,
    pub filtration: FiltrationSpec,
    pub operator: OperatorData,
    pub params: Params,
}

// ─── profiles ─────────────────────────────────────────────────────────────────

/// Named generation recipes.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Profile {
    /// Tensor filtration with ambient dimension ≤ 16.
    TensorSmall,
    /// Tensor filtration, depth 4–5.
    TensorMedium,
    /// Dyadic filtration, depth 4–8, dense-spectrum diagonal data.
    Dyadic,
    /// Dyadic filtration whose differences concentrate on 2–3 levels with
    /// widely spread amplitudes.
    AdversarialSparse,
}

impl Profile {
    pub fn name(self) -> &'static str {
        match self {
            Profile::TensorSmall => "tensor-small",
            Profile::TensorMedium => "tensor-medium",
            Profile::Dyadic => "dyadic",
            Profile::AdversarialSparse => "adversarial-sparse",
        }
    }
}

impl std::str::FromStr for Profile {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s {
            "tensor-small" => Ok(Profile::TensorSmall),
            "tensor-medium" => Ok(Profile::TensorMedium),
            "dyadic" => Ok(Profile::Dyadic),
            "adversarial-sparse" => Ok(Profile::AdversarialSparse),
            other => Err(format!(
                "unknown profile `{other}` (expected tensor-small|tensor-medium|dyadic|adversarial-sparse)"
            )),
        }
    }
}

/// Optional parameter overrides applied on top of a profile's defaults.
#[derive(Clone, Debug, Default)]
pub struct Overrides {
    /// Filtration depth (number of levels).
    pub depth: Option<usize>,
    pub betas: Option<Vec<f64>>,
    pub ps: Option<Vec<f64>>,
    pub lambda_max: Option<f64>,
    pub lambda_steps: Option<usize>,
    pub variants: Option<Vec<Variant>>,
}

fn gauss(rng: &mut ChaCha12Rng) -> f64 {
    // Box–Muller on two uniform draws; cheap and fully determined by the rng.
    let u: f64 = rng.gen_range(f64::EPSILON..1.0);
    let v: f64 = rng.gen_range(0.0..std::f64::consts::TAU);
    (-2.0 * u.ln()).sqrt() * v.cos()
}

fn dense_hermitian(rng: &mut ChaCha12Rng, dim: usize) -> Vec<Vec<[f64; 2]>> {
    let mut entries = vec![vec![[0.0f64; 2]; dim]; dim];
    for i in 0..dim {
        entries[i][i] = [gauss(rng), 0.0];
        for j in i + 1..dim {
            let re = gauss(rng) * 0.5f64.sqrt();
            let im = gauss(rng) * 0.5f64.sqrt();
            entries[i][j] = [re, im];
            entries[j][i] = [re, -im];
        }
    }
    entries
}

fn sparse_diagonal(rng: &mut ChaCha12Rng, depth: usize) -> Vec<f64> {
    let dim = 1usize << depth;
    let mut values = vec![0.0; dim];
    let count = 2 + (rng.gen::<u64>() % 2) as usize;
    let mut picked: Vec<usize> = Vec::new();
    while picked.len() < count {
        let l = 2 + (rng.gen::<u64>() as usize) % (depth - 1);
        if !picked.contains(&l) {
            picked.push(l);
        }
    }
    picked.sort_unstable();
    // Each chosen level contributes an exact level-l martingale difference:
    // ± a block pair inside every level-(l−1) parent, with amplitudes spread
    // over four orders of magnitude across the chosen levels.
    for (idx, &l) in picked.iter().enumerate() {
        let amp = 100f64.powi(idx as i32);
        let parents = 1usize << (l - 1);
        let child = 1usize << (depth - l);
        for parent in 0..parents {
            let a = amp * gauss(rng);
            for t in 0..child {
                values[parent * 2 * child + t] += a;
                values[parent * 2 * child + child + t] -= a;
            }
        }
    }
    values
}

/// Generate the instance determined by `(profile, seed, overrides)`.
pub fn gen_instance(profile: Profile, seed: u64, ov: &Overrides) -> anyhow::Result<Instance> {
    let mut rng = ChaCha12Rng::seed_from_u64(mix(seed, salt(profile.name(), &[])));
    let depth = match ov.depth {
        Some(d) => d,
        None => match profile {
            Profile::TensorSmall => 2 + (rng.gen::<u64>() % 2) as usize,
            Profile::TensorMedium => 4 + (rng.gen::<u64>() % 2) as usize,
            Profile::Dyadic => 4 + (rng.gen::<u64>() % 5) as usize,
            Profile::AdversarialSparse => 5 + (rng.gen::<u64>() % 4) as usize,
        },
    };
    let (kind, operator) = match profile {
        Profile::TensorSmall | Profile::TensorMedium => {
            if depth > MAX_TENSOR_DEPTH {
                bail!("tensor depth {depth} exceeds the maximum {MAX_TENSOR_DEPTH}");
            }
            let dim = 1usize << depth;
            (Kind::Tensor, OperatorData::Dense { entries: dense_hermitian(&mut rng, dim) })
        }
        Profile::Dyadic => {
            if depth > MAX_DYADIC_DEPTH {
                bail!("dyadic depth {depth} exceeds the maximum {MAX_DYADIC_DEPTH}");
            }
            let dim = 1usize << depth;
            let values: Vec<f64> = (0..dim).map(|_| gauss(&mut rng)).collect();
            (Kind::Dyadic, OperatorData::Diagonal { values })
        }
        Profile::AdversarialSparse => {
            if depth > MAX_DYADIC_DEPTH {
                bail!("dyadic depth {depth} exceeds the maximum {MAX_DYADIC_DEPTH}");
            }
            if depth < 3 {
                bail!("adversarial-sparse needs depth ≥ 3, got {depth}");
            }
            (Kind::Dyadic, OperatorData::Diagonal { values: sparse_diagonal(&mut rng, depth) })
        }
    };
    let ps_default = match kind {
        Kind::Tensor => vec![2.0, 3.0],
        Kind::Dyadic => vec![0.5, 1.0, 2.0, 3.0, 4.0, 6.0],
    };
    let params = Params {
        levels: (1..=depth).collect(),
        betas: ov.betas.clone().unwrap_or_else(|| vec![0.0, 0.25, 0.5]),
        ps: ov.ps.clone().unwrap_or(ps_default),
        lambda_max: ov.lambda_max.unwrap_or(10.0),
        lambda_steps: ov.lambda_steps.unwrap_or(16),
        variants: ov.variants.clone().unwrap_or_else(|| vec![Variant::Bmo, Variant::Conditioned]),
        proj_rule: ProjRule::Both,
    };
    let inst = Instance { seed, filtration: FiltrationSpec { kind, depth }, operator, params };
    inst.validate()?;
    Ok(inst)
}

// ─── materialization ──────────────────────────────────────────────────────────

impl Instance {
    /// Check internal consistency; every runner entry point calls this first.
    pub fn validate(&self) -> anyhow::Result<()> {
        let depth = self.filtration.depth;
        let max_depth = match self.filtration.kind {
            Kind::Tensor => MAX_TENSOR_DEPTH,
            Kind::Dyadic => MAX_DYADIC_DEPTH,
        };
        if depth < 1 || depth > max_depth {
            bail!("filtration depth {depth} outside 1..={max_depth}");
        }
        let dim = 1usize << depth;
        match &self.operator {
            OperatorData::Dense { entries } => {
                if self.filtration.kind == Kind::Dyadic {
                    bail!("dyadic instances carry a diagonal operator, not a dense matrix");
                }
                if entries.len() != dim || entries.iter().any(|r| r.len() != dim) {
                    bail!("dense operator is not {dim}×{dim}");
                }
                for row in entries {
                    for &[re, im] in row {
                        if !re.is_finite() || !im.is_finite() {
                            bail!("dense operator has non-finite entries");
                        }
                    }
                }
            }
            OperatorData::Diagonal { values } => {
                if values.len() != dim {
                    bail!("diagonal operator has {} values, expected {dim}", values.len());
                }
                if values.iter().any(|v| !v.is_finite()) {
                    bail!("diagonal operator has non-finite values");
                }
            }
        }
        let p = &self.params;
        if p.levels.is_empty() || p.levels.iter().any(|&n| n == 0 || n > depth) {
            bail!("levels must be a nonempty subset of 1..={depth}");
        }
        if p.betas.is_empty() || p.betas.iter().any(|b| !b.is_finite() || *b < 0.0) {
            bail!("betas must be nonempty, finite, and ≥ 0");
        }
        if p.ps.is_empty() || p.ps.iter().any(|q| !q.is_finite() || *q <= 0.0) {
            bail!("moment exponents must be nonempty, finite, and > 0");
        }
        if !p.lambda_max.is_finite() || p.lambda_max <= 0.0 {
            bail!("lambda_max must be positive and finite");
        }
        if p.lambda_steps < 2 {
            bail!("lambda_steps must be at least 2");
        }
        if p.variants.is_empty() {
            bail!("at least one variant is required");
        }
        Ok(())
    }

    /// Build the filtration this instance lives on.
    pub fn build_filtration(&self) -> anyhow::Result<Arc<Filtration>> {
        let f = match self.filtration.kind {
            Kind::Tensor => make_tensor_filtration(self.filtration.depth)?,
            Kind::Dyadic => make_dyadic_filtration(self.filtration.depth)?,
        };
        Ok(f)
    }

    /// Materialize the final operator as a dense matrix.
    pub fn build_operator(&self) -> Operator {
        match &self.operator {
            OperatorData::Dense { entries } => {
                let dim = entries.len();
                let mut op = Operator::zeros(dim);
                for (i, row) in entries.iter().enumerate() {
                    for (j, &[re, im]) in row.iter().enumerate() {
                        op.set(i, j, Complex64::new(re, im));
                    }
                }
                op
            }
            OperatorData::Diagonal { values } => Operator::from_real_diag(values),
        }
    }

    /// Build the martingale of the final operator on the instance filtration.
    pub fn build(&self) -> anyhow::Result<Martingale> {
        self.validate()?;
        let filt = self.build_filtration()?;
        let m = martingale_from_final(&self.build_operator(), filt)
            .context("ingesting the final operator")?;
        Ok(m)
    }

    /// Diagonal data when the instance is dyadic.
    pub fn dyadic_values(&self) -> Option<&[f64]> {
        match (&self.operator, self.filtration.kind) {
            (OperatorData::Diagonal { values }, Kind::Dyadic) => Some(values),
            _ => None,
        }
    }

    /// Serialize as pretty JSON with a trailing newline (byte-deterministic).
    pub fn to_json(&self) -> String {
        let mut s = serde_json::to_string_pretty(self).expect("instance serialization");
        s.push('\n');
        s
    }

    /// Parse an instance file, validating it.
    pub fn from_json(text: &str) -> anyhow::Result<Instance> {
        let inst: Instance = serde_json::from_str(text).context("parsing instance JSON")?;
        inst.validate()?;
        Ok(inst)
    }

    /// Largest admissible localization level for a family.
    pub fn max_start(&self, family: Family) -> usize {
        match family {
            Family::Plain => self.filtration.depth,
            Family::Conditioned => self.filtration.depth.saturating_sub(1),
        }
    }
}

/// Map a core filtration kind back to the descriptor enum.
pub fn kind_of(filt: &Filtration) -> Kind {
    match filt.kind() {
        FiltrationKind::Tensor => Kind::Tensor,
        FiltrationKind::Dyadic => Kind::Dyadic,
    }
}
