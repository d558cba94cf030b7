//! Finite martingales `x_n = E_n(x)`, their difference sequences, square
//! functions, and Hardy norms.
//!
//! Conventions used throughout the crate:
//!
//! * `x_0 = 0`, so the first difference is `dx_1 = E_1(x)`;
//! * `E_0 = E_1` wherever a conditioning index would drop below 1 — in
//!   particular the conditioned square function is
//!   `s_c²(x) = Σ_k E_{max(k-1,1)} |dx_k|²`;
//! * `|z|² = z† z` (column convention), so column objects see the right
//!   module action `|z e|² = e |z|² e`.

use crate::algebra::Filtration;
use crate::linalg::{schatten_norm_of_sqrt, sqrt_psd, Operator};
use crate::{Error, Result};
use std::sync::Arc;

/// Threshold above which `martingale_from_final` warns that the supplied
/// final operator was visibly altered by the top-level expectation.
const INGEST_WARN: f64 = 1e-12;

/// A martingale adapted to a [`Filtration`], stored densely: all levels
/// `x_1, …, x_K` and all differences.
pub struct Martingale {
    filt: Arc<Filtration>,
    levels: Vec<Operator>,
    diffs: Vec<Operator>,
    ingest_residual: f64,
}

/// Build the martingale of a final operator: `x_n = E_n(x_K)`.
///
/// The input is first passed through `E_K` (a no-op for well-formed input);
/// the Frobenius distance between the two is recorded as `ingest_residual`
/// and reported to stderr when it exceeds `1e-12`, since it means the caller
/// supplied something the top algebra cannot represent.
pub fn martingale_from_final(x: &Operator, filt: Arc<Filtration>) -> Result<Martingale> {
    if x.dim() != filt.ambient_dim() {
        return Err(Error::DimensionMismatch(format!(
            "final operator dim {} vs ambient {}",
            x.dim(),
            filt.ambient_dim()
        )));
    }
    let k = filt.depth();
    let ingested = filt.expect(k, x)?;
    let ingest_residual = ingested.sub(x).frob_norm();
    if ingest_residual > INGEST_WARN * x.frob_norm().max(1.0) {
        eprintln!(
            "warning: final operator is {ingest_residual:.3e} away from the top-level algebra; \
             proceeding with its E_K image"
        );
    }
    let mut levels = Vec::with_capacity(k);
    for n in 1..=k {
        // E_n(E_K(x)); each level is computed from the ingested final element
        // directly (the expectations are consistent, so nesting is unneeded).
        levels.push(filt.expect(n, &ingested)?);
    }
    let mut diffs = Vec::with_capacity(k);
    for n in 1..=k {
        let prev = if n == 1 { Operator::zeros(x.dim()) } else { levels[n - 2].clone() };
        diffs.push(levels[n - 1].sub(&prev));
    }
    Ok(Martingale { filt, levels, diffs, ingest_residual })
}

/// Which Hardy norm to compute.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum HardyKind {
    /// `‖s_c(x)‖_p` — conditioned column.
    ConditionedColumn,
    /// `‖s_r(x)‖_p = ‖s_c(x†)‖_p` — conditioned row.
    ConditionedRow,
    /// `‖S_c(x)‖_p` — plain column.
    Column,
    /// `‖S_r(x)‖_p = ‖S_c(x†)‖_p` — plain row.
    Row,
}

impl Martingale {
    pub fn filtration(&self) -> &Arc<Filtration> {
        &self.filt
    }

    pub fn depth(&self) -> usize {
        self.filt.depth()
    }

    pub fn dim(&self) -> usize {
        self.filt.ambient_dim()
    }

    /// `x_n` for `n ∈ 1..=K`; `n = 0` gives the zero operator (the `x_0 = 0`
    /// convention).
    pub fn level(&self, n: usize) -> Operator {
        if n == 0 {
            Operator::zeros(self.dim())
        } else {
            self.levels[n - 1].clone()
        }
    }

    /// `dx_n = x_n − x_{n-1}` for `n ∈ 1..=K`.
    pub fn diff(&self, n: usize) -> &Operator {
        &self.diffs[n - 1]
    }

    /// The ingested final element `x_K`.
    pub fn final_op(&self) -> &Operator {
        &self.levels[self.depth() - 1]
    }

    pub fn ingest_residual(&self) -> f64 {
        self.ingest_residual
    }

    /// `S_c²(x − x_{start-1}) = Σ_{k ≥ start} |dx_k|²` (so `start = 1` is the
    /// square function of `x` itself).
    pub fn square_sum(&self, start: usize) -> Result<Operator> {
        if start == 0 || start > self.depth() {
            return Err(Error::InvalidInput(format!(
                "square-function start {start} out of 1..={}",
                self.depth()
            )));
        }
        let mut s = Operator::zeros(self.dim());
        for k in start..=self.depth() {
            s = s.add(&self.diffs[k - 1].gram());
        }
        Ok(s)
    }

    /// Column square function `S_c(x − x_{start-1})`.
    pub fn square_function_sc(&self, start: usize) -> Result<Operator> {
        sqrt_psd(&self.square_sum(start)?)
    }

    /// `s_c²(x − x_{start-1}) = Σ_{k ≥ start} E_{max(k-1,1)} |dx_k|²`.
    ///
    /// Note the difference in indexing between the two families: measuring
    /// `x − x_n` with the plain square function means `start = n+1` here as
    /// well, but conditioned objects are usually taken against `x_n` with the
    /// sum starting at `k = n+1`.
    pub fn conditioned_square_sum(&self, start: usize) -> Result<Operator> {
        if start == 0 || start > self.depth() {
            return Err(Error::InvalidInput(format!(
                "conditioned square start {start} out of 1..={}",
                self.depth()
            )));
        }
        let mut s = Operator::zeros(self.dim());
        for k in start..=self.depth() {
            let g = self.diffs[k - 1].gram();
            s = s.add(&self.filt.expect(k.saturating_sub(1).max(1), &g)?);
        }
        Ok(s)
    }

    /// Conditioned column square function `s_c(x − x_{start-1})`.
    pub fn conditioned_square_sc(&self, start: usize) -> Result<Operator> {
        sqrt_psd(&self.conditioned_square_sum(start)?)
    }

    /// Hardy norm `‖x‖` of the chosen kind at exponent `p`.
    ///
    /// Works on the square sums directly, so the only diagonalization is the
    /// one whose relative floor suppresses rank-deficiency debris.
    pub fn hardy_norm(&self, p: f64, kind: HardyKind) -> Result<f64> {
        let tau = self.filt.trace();
        let sum = match kind {
            HardyKind::ConditionedColumn => self.conditioned_square_sum(1)?,
            HardyKind::Column => self.square_sum(1)?,
            HardyKind::ConditionedRow | HardyKind::Row => {
                let mut s = Operator::zeros(self.dim());
                for k in 1..=self.depth() {
                    // row convention: dx_k dx_k† = |dx_k†|²
                    let g = self.diffs[k - 1].mul(&self.diffs[k - 1].adjoint());
                    let term = if kind == HardyKind::ConditionedRow {
                        self.filt.expect(k.saturating_sub(1).max(1), &g)?
                    } else {
                        g
                    };
                    s = s.add(&term);
                }
                s
            }
        };
        schatten_norm_of_sqrt(&sum, p, tau)
    }
}
