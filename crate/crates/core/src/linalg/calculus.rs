//! Functional calculus and spectral projections on Hermitian operators.

use super::{btol, eig_hermitian, Operator};
use crate::{Error, Result};

/// Half-line cuts of the real line used for spectral projections.
///
/// Closed endpoints absorb eigenvalues within `btol` of the cut, open
/// endpoints repel them — so `Below(λ)` keeps eigenvalues `< λ − btol` and
/// `ClosedFrom(λ)` keeps eigenvalues `≥ λ − btol`.
#[derive(Clone, Copy, Debug, PartialEq)]
pub enum Interval {
    /// `[λ, ∞)`
    ClosedFrom(f64),
    /// `(λ, ∞)`
    OpenFrom(f64),
    /// `(-∞, λ)`
    Below(f64),
}

impl Interval {
    fn admits(&self, x: f64, tol: f64) -> bool {
        match *self {
            Interval::ClosedFrom(l) => x >= l - tol,
            Interval::OpenFrom(l) => x > l + tol,
            Interval::Below(l) => x < l - tol,
        }
    }
}

/// An orthogonal projection, carrying its matrix and spectral rank.
#[derive(Clone, Debug)]
pub struct Projection {
    op: Operator,
    rank: usize,
}

impl Projection {
    pub fn identity(dim: usize) -> Self {
        Projection { op: Operator::identity(dim), rank: dim }
    }

    pub fn zero(dim: usize) -> Self {
        Projection { op: Operator::zeros(dim), rank: 0 }
    }

    /// Wrap a matrix already known to be an orthogonal projection.
    pub fn from_op_unchecked(op: Operator, rank: usize) -> Self {
        Projection { op, rank }
    }

    /// Validate and wrap: Hermitian and idempotent within `tol`, rank read
    /// off the (then near-integral) plain trace.
    pub fn try_from_op(op: Operator, tol: f64) -> Result<Self> {
        let herm = op.herm_residual();
        let idem = op.mul(&op).sub(&op).frob_norm();
        if herm > tol || idem > tol {
            return Err(Error::InvalidInput(format!(
                "not a projection: hermiticity residual {herm:.3e}, idempotency residual {idem:.3e}"
            )));
        }
        let tr = op.trace_plain().re;
        let rank = tr.round();
        if (tr - rank).abs() > 1e-6 * (op.dim() as f64).max(1.0) {
            return Err(Error::InvalidInput(format!(
                "projection trace {tr} is not near an integer"
            )));
        }
        Ok(Projection { op, rank: rank as usize })
    }

    #[inline]
    pub fn op(&self) -> &Operator {
        &self.op
    }

    pub fn into_op(self) -> Operator {
        self.op
    }

    #[inline]
    pub fn dim(&self) -> usize {
        self.op.dim()
    }

    /// Spectral rank (number of eigenvalues at 1).
    #[inline]
    pub fn rank(&self) -> usize {
        self.rank
    }

    pub fn is_zero(&self) -> bool {
        self.rank == 0
    }

    /// `1 − p`.
    pub fn complement(&self) -> Projection {
        Projection {
            op: Operator::identity(self.dim()).sub(&self.op),
            rank: self.dim() - self.rank,
        }
    }

    /// Worst of the hermiticity and idempotency residuals.
    pub fn defect(&self) -> f64 {
        self.op.herm_residual().max(self.op.mul(&self.op).sub(&self.op).frob_norm())
    }
}

/// Spectral projection `1_I(a)` of a Hermitian operator onto a half-line cut.
///
/// The cut tolerance is `btol(‖a‖_∞)` with the operator norm taken from the
/// computed spectrum itself, so callers never pass a scale.
pub fn spectral_projection(a: &Operator, interval: Interval) -> Result<Projection> {
    let dec = eig_hermitian(a)?;
    let tol = btol(dec.sup_abs());
    let selected: Vec<bool> = dec.eigenvalues.iter().map(|l| interval.admits(*l, tol)).collect();
    let rank = selected.iter().filter(|b| **b).count();
    let op = if rank == 0 {
        Operator::zeros(a.dim())
    } else if rank == a.dim() {
        Operator::identity(a.dim())
    } else {
        dec.reconstruct(|l| if interval.admits(l, tol) { 1.0 } else { 0.0 })
    };
    Ok(Projection { op, rank })
}

/// `f(a)` for Hermitian `a` and real `f`, via the eigendecomposition.
pub fn apply_function(a: &Operator, f: impl Fn(f64) -> f64) -> Result<Operator> {
    let dec = eig_hermitian(a)?;
    for l in &dec.eigenvalues {
        if !f(*l).is_finite() {
            return Err(Error::NumericalFailure(format!(
                "function value not finite at eigenvalue {l}"
            )));
        }
    }
    Ok(dec.reconstruct(f))
}

/// Square root of a positive-semidefinite Hermitian operator.
///
/// Eigenvalues within `1e-7 · max(1, ‖a‖_∞)` below zero are clamped to zero
/// (roundoff from products like `V†ZV`); anything more negative is an error,
/// since it means the input was not actually PSD. Eigenvalues negligible
/// against the largest (≤ 1e-12 · λ_max) are flattened to exact zeros, so
/// solver debris does not come out of the square root amplified.
pub fn sqrt_psd(a: &Operator) -> Result<Operator> {
    let dec = eig_hermitian(a)?;
    let scale = dec.sup_abs().max(1.0);
    let floor = -1e-7 * scale;
    if let Some(bad) = dec.eigenvalues.iter().find(|l| **l < floor) {
        return Err(Error::InvalidInput(format!(
            "operator is not positive semidefinite (eigenvalue {bad:.6e})"
        )));
    }
    let top = dec.eigenvalues.last().copied().unwrap_or(0.0);
    let cut = (top * 1e-12).max(0.0);
    Ok(dec.reconstruct(|l| if l <= cut { 0.0 } else { l.sqrt() }))
}
