//! Filtered subalgebras of `(M_d(C), τ)` and their trace-preserving
//! conditional expectations.
//!
//! Two concrete filtrations are provided, both of depth `K` inside
//! `M_{2^K}(C)` with the normalized trace:
//!
//! * **tensor**: `A_n = M_{2^n} ⊗ 1`, with `E_n = id ⊗ (normalized partial
//!   trace over the complementary factor)`. Every level is a full matrix
//!   factor, so the filtration is genuinely noncommutative.
//! * **dyadic**: `A_n` = diagonal matrices constant on the `2^n` consecutive
//!   blocks of length `2^{K-n}`, with `E_n` = block averaging. This is the
//!   classical dyadic filtration embedded on the diagonal, and is the bridge
//!   to the scalar oracle in [`crate::classical`].
//!
//! A subalgebra can also be given explicitly by a τ-orthonormal basis, in
//! which case `E(x) = Σ_i b_i τ(b_i† x)` (the GNS-orthogonal projection onto
//! the span). For the structural kinds that formula is available as a slow
//! cross-check path next to the O(d²) structural expectations.

use crate::linalg::{Operator, TracialState, CZERO};
use crate::{Error, Result};
use num_complex::Complex64;
use std::sync::{Arc, OnceLock};

/// How a subalgebra sits inside the ambient matrix algebra.
#[derive(Clone, Debug, PartialEq)]
pub enum LevelKind {
    /// `M_m ⊗ 1_blk` with `m·blk = d`.
    TensorFactor { m: usize },
    /// Diagonal matrices constant on `m` consecutive blocks of length `d/m`.
    DyadicBlocks { m: usize },
    /// Span of an explicit τ-orthonormal basis.
    Explicit,
}

/// A unital *-subalgebra of `M_d(C)` together with the ambient trace.
pub struct Subalgebra {
    ambient_dim: usize,
    kind: LevelKind,
    trace: TracialState,
    basis: OnceLock<Vec<Operator>>,
}

/// Residuals from checking the defining properties of a subalgebra basis.
#[derive(Clone, Debug)]
pub struct SubalgebraReport {
    /// `max |τ(b_i† b_j) − δ_ij|`.
    pub gram_residual: f64,
    /// Distance from the identity to the span.
    pub identity_residual: f64,
    /// Worst distance from an adjoint `b_i†` to the span.
    pub adjoint_residual: f64,
    /// Worst distance from a product `b_i b_j` to the span.
    pub product_residual: f64,
}

impl SubalgebraReport {
    pub fn ok(&self, tol: f64) -> bool {
        self.gram_residual <= tol
            && self.identity_residual <= tol
            && self.adjoint_residual <= tol
            && self.product_residual <= tol
    }
}

/// Basis materialization is only for validation/cross-checks; cap the memory
/// it may claim (entries of `Complex64`).
const BASIS_ENTRY_BUDGET: usize = 1 << 22;

impl Subalgebra {
    /// `M_m ⊗ 1` inside `M_d` (uniform trace assumed: that is the only
    /// diagonal trace that is tracial on the full ambient algebra).
    pub fn tensor_factor(ambient_dim: usize, m: usize) -> Result<Self> {
        if m == 0 || ambient_dim % m != 0 {
            return Err(Error::InvalidInput(format!(
                "factor size {m} does not divide ambient dimension {ambient_dim}"
            )));
        }
        Ok(Subalgebra {
            ambient_dim,
            kind: LevelKind::TensorFactor { m },
            trace: TracialState::normalized(ambient_dim),
            basis: OnceLock::new(),
        })
    }

    /// Block-constant diagonal matrices with `m` blocks inside `M_d`.
    pub fn dyadic_blocks(ambient_dim: usize, m: usize) -> Result<Self> {
        if m == 0 || ambient_dim % m != 0 {
            return Err(Error::InvalidInput(format!(
                "block count {m} does not divide ambient dimension {ambient_dim}"
            )));
        }
        Ok(Subalgebra {
            ambient_dim,
            kind: LevelKind::DyadicBlocks { m },
            trace: TracialState::normalized(ambient_dim),
            basis: OnceLock::new(),
        })
    }

    /// The scalar subalgebra `C·1` — expectation is `τ(x)·1`.
    pub fn scalars(ambient_dim: usize) -> Result<Self> {
        Self::dyadic_blocks(ambient_dim, 1)
    }

    /// Span of an explicit basis, which must be τ-orthonormal.
    pub fn from_basis(
        ambient_dim: usize,
        basis: Vec<Operator>,
        trace: TracialState,
    ) -> Result<Self> {
        if trace.dim() != ambient_dim {
            return Err(Error::DimensionMismatch("trace dimension vs ambient".into()));
        }
        if basis.is_empty() {
            return Err(Error::InvalidInput("empty basis".into()));
        }
        for b in &basis {
            if b.dim() != ambient_dim {
                return Err(Error::DimensionMismatch("basis element dimension".into()));
            }
        }
        let mut worst = 0.0f64;
        for (i, a) in basis.iter().enumerate() {
            for (j, b) in basis.iter().enumerate() {
                let g = trace.inner(a, b);
                let target = if i == j { 1.0 } else { 0.0 };
                worst = worst.max((g - target).norm());
            }
        }
        if worst > 1e-6 {
            return Err(Error::InvalidInput(format!(
                "basis is not τ-orthonormal (gram residual {worst:.3e})"
            )));
        }
        let cell = OnceLock::new();
        let _ = cell.set(basis);
        Ok(Subalgebra { ambient_dim, kind: LevelKind::Explicit, trace, basis: cell })
    }

    pub fn ambient_dim(&self) -> usize {
        self.ambient_dim
    }

    pub fn kind(&self) -> &LevelKind {
        &self.kind
    }

    pub fn trace(&self) -> &TracialState {
        &self.trace
    }

    /// Linear dimension of the subalgebra.
    pub fn linear_dim(&self) -> usize {
        match self.kind {
            LevelKind::TensorFactor { m } => m * m,
            LevelKind::DyadicBlocks { m } => m,
            LevelKind::Explicit => self.basis.get().map(|b| b.len()).unwrap_or(0),
        }
    }

    /// The trace-preserving conditional expectation onto this subalgebra.
    pub fn conditional_expectation(&self, x: &Operator) -> Result<Operator> {
        if x.dim() != self.ambient_dim {
            return Err(Error::DimensionMismatch(format!(
                "operator dim {} vs ambient {}",
                x.dim(),
                self.ambient_dim
            )));
        }
        match self.kind {
            LevelKind::TensorFactor { m } => Ok(tensor_expectation(x, m)),
            LevelKind::DyadicBlocks { m } => Ok(dyadic_expectation(x, m)),
            LevelKind::Explicit => self.expectation_via_basis(x),
        }
    }

    /// The GNS-orthogonal projection onto the basis span — the same map as
    /// [`Self::conditional_expectation`], computed the slow generic way.
    pub fn expectation_via_basis(&self, x: &Operator) -> Result<Operator> {
        let basis = self.basis()?;
        let mut out = Operator::zeros(self.ambient_dim);
        for b in basis {
            let coeff = self.trace.inner(b, x);
            if coeff == CZERO {
                continue;
            }
            out = out.add(&b.scale_complex(coeff));
        }
        Ok(out)
    }

    /// Materialize the τ-orthonormal basis (memory-capped; structural kinds
    /// build it on first use).
    pub fn basis(&self) -> Result<&[Operator]> {
        let entries = self.linear_dim() * self.ambient_dim * self.ambient_dim;
        if entries > BASIS_ENTRY_BUDGET {
            return Err(Error::BudgetExceeded(format!(
                "basis materialization needs {entries} complex entries"
            )));
        }
        if self.basis.get().is_none() {
            let built = match self.kind {
                LevelKind::TensorFactor { m } => tensor_basis(self.ambient_dim, m),
                LevelKind::DyadicBlocks { m } => dyadic_basis(self.ambient_dim, m),
                LevelKind::Explicit => unreachable!("explicit basis is set at construction"),
            };
            let _ = self.basis.set(built);
        }
        Ok(self.basis.get().unwrap().as_slice())
    }

    /// Check τ-orthonormality and *-algebra closure of the basis.
    pub fn validate(&self) -> Result<SubalgebraReport> {
        let basis = self.basis()?;
        let tau = &self.trace;
        let mut gram = 0.0f64;
        for (i, a) in basis.iter().enumerate() {
            for (j, b) in basis.iter().enumerate() {
                let target = if i == j { 1.0 } else { 0.0 };
                gram = gram.max((tau.inner(a, b) - target).norm());
            }
        }
        let dist_to_span = |z: &Operator| -> Result<f64> {
            let proj = self.expectation_via_basis(z)?;
            Ok(tau.norm2(&z.sub(&proj)))
        };
        let identity_residual = dist_to_span(&Operator::identity(self.ambient_dim))?;
        let mut adjoint_residual = 0.0f64;
        for b in basis {
            adjoint_residual = adjoint_residual.max(dist_to_span(&b.adjoint())?);
        }
        // Product closure on a capped set of pairs (quadratic in basis size).
        let cap = basis.len().min(24);
        let mut product_residual = 0.0f64;
        for a in basis.iter().take(cap) {
            for b in basis.iter().take(cap) {
                product_residual = product_residual.max(dist_to_span(&a.mul(b))?);
            }
        }
        Ok(SubalgebraReport {
            gram_residual: gram,
            identity_residual,
            adjoint_residual,
            product_residual,
        })
    }
}

/// `E(x) = (id ⊗ tr/blk)(x) ⊗ 1_blk` for `A = M_m ⊗ 1_blk`.
fn tensor_expectation(x: &Operator, m: usize) -> Operator {
    let d = x.dim();
    let blk = d / m;
    let scale = 1.0 / blk as f64;
    let mut out = Operator::zeros(d);
    for a in 0..m {
        for b in 0..m {
            let mut s = CZERO;
            for u in 0..blk {
                s += x.at(a * blk + u, b * blk + u);
            }
            s *= scale;
            if s == CZERO {
                continue;
            }
            for u in 0..blk {
                out.set(a * blk + u, b * blk + u, s);
            }
        }
    }
    out
}

/// Block averaging for the dyadic levels: diagonal of the mean over each
/// block, off-diagonal and off-block content killed.
fn dyadic_expectation(x: &Operator, m: usize) -> Operator {
    let d = x.dim();
    let blk = d / m;
    let scale = 1.0 / blk as f64;
    let mut out = Operator::zeros(d);
    for b in 0..m {
        let mut s = CZERO;
        for u in 0..blk {
            s += x.at(b * blk + u, b * blk + u);
        }
        s *= scale;
        for u in 0..blk {
            out.set(b * blk + u, b * blk + u, s);
        }
    }
    out
}

fn tensor_basis(d: usize, m: usize) -> Vec<Operator> {
    let blk = d / m;
    let norm = (m as f64).sqrt();
    let mut basis = Vec::with_capacity(m * m);
    for a in 0..m {
        for b in 0..m {
            let mut e = Operator::zeros(d);
            for u in 0..blk {
                e.set(a * blk + u, b * blk + u, Complex64::new(norm, 0.0));
            }
            basis.push(e);
        }
    }
    basis
}

fn dyadic_basis(d: usize, m: usize) -> Vec<Operator> {
    let blk = d / m;
    let norm = (m as f64).sqrt();
    let mut basis = Vec::with_capacity(m);
    for b in 0..m {
        let mut e = Operator::zeros(d);
        for u in 0..blk {
            e.set(b * blk + u, b * blk + u, Complex64::new(norm, 0.0));
        }
        basis.push(e);
    }
    basis
}

/// Free-function form of [`Subalgebra::validate`].
pub fn validate_subalgebra(a: &Subalgebra) -> Result<SubalgebraReport> {
    a.validate()
}

// ─── filtrations ─────────────────────────────────────────────────────────────

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum FiltrationKind {
    Tensor,
    Dyadic,
}

/// An increasing chain `A_1 ⊆ … ⊆ A_K = M_{2^K}` with its trace.
pub struct Filtration {
    kind: FiltrationKind,
    depth: usize,
    ambient_dim: usize,
    trace: TracialState,
    levels: Vec<Subalgebra>,
}

/// Depth caps: the ambient dimension is `2^K`, and the tensor path pays an
/// O(d³) eigensolve per norm evaluation.
pub const MAX_TENSOR_DEPTH: usize = 7;
pub const MAX_DYADIC_DEPTH: usize = 12;

/// Tensor filtration `A_n = M_{2^n} ⊗ 1` of depth `K ≤ 7`.
pub fn make_tensor_filtration(depth: usize) -> Result<Arc<Filtration>> {
    if depth == 0 || depth > MAX_TENSOR_DEPTH {
        return Err(Error::BudgetExceeded(format!(
            "tensor depth must be in 1..={MAX_TENSOR_DEPTH}, got {depth}"
        )));
    }
    let d = 1usize << depth;
    let levels = (1..=depth)
        .map(|n| Subalgebra::tensor_factor(d, 1 << n))
        .collect::<Result<Vec<_>>>()?;
    Ok(Arc::new(Filtration {
        kind: FiltrationKind::Tensor,
        depth,
        ambient_dim: d,
        trace: TracialState::normalized(d),
        levels,
    }))
}

/// Dyadic filtration (block-constant diagonals) of depth `K ≤ 12`.
pub fn make_dyadic_filtration(depth: usize) -> Result<Arc<Filtration>> {
    if depth == 0 || depth > MAX_DYADIC_DEPTH {
        return Err(Error::BudgetExceeded(format!(
            "dyadic depth must be in 1..={MAX_DYADIC_DEPTH}, got {depth}"
        )));
    }
    let d = 1usize << depth;
    let levels = (1..=depth)
        .map(|n| Subalgebra::dyadic_blocks(d, 1 << n))
        .collect::<Result<Vec<_>>>()?;
    Ok(Arc::new(Filtration {
        kind: FiltrationKind::Dyadic,
        depth,
        ambient_dim: d,
        trace: TracialState::normalized(d),
        levels,
    }))
}

impl Filtration {
    pub fn kind(&self) -> FiltrationKind {
        self.kind
    }

    pub fn depth(&self) -> usize {
        self.depth
    }

    pub fn ambient_dim(&self) -> usize {
        self.ambient_dim
    }

    pub fn trace(&self) -> &TracialState {
        &self.trace
    }

    /// Level subalgebra, 1-based.
    pub fn level(&self, n: usize) -> &Subalgebra {
        assert!((1..=self.depth).contains(&n), "level {n} out of range 1..={}", self.depth);
        &self.levels[n - 1]
    }

    /// `E_n(x)`. Level 0 is read as level 1 (the `E_0 = E_1` convention used
    /// by all martingale quantities); `n = K` is the identity map but still
    /// routed through the expectation for uniformity.
    pub fn expect(&self, n: usize, x: &Operator) -> Result<Operator> {
        let n = n.max(1);
        if n > self.depth {
            return Err(Error::InvalidInput(format!(
                "level {n} exceeds filtration depth {}",
                self.depth
            )));
        }
        self.level(n).conditional_expectation(x)
    }

    /// Number of minimal-representation slots at level `n`: the factor size
    /// `2^n` (tensor) or the number of atoms `2^n` (dyadic).
    pub fn level_size(&self, n: usize) -> usize {
        1 << n
    }

    /// τ-mass of one rank unit at level `n` (a minimal projection of the
    /// factor / one atom): `2^{-n}` in both filtrations.
    pub fn level_weight(&self, n: usize) -> f64 {
        1.0 / self.level_size(n) as f64
    }

    /// Compress an element of `A_n` to its `m × m` representation: the factor
    /// entry matrix (tensor) or the diagonal of block values (dyadic).
    pub fn compress_to_level(&self, n: usize, b: &Operator) -> Result<Operator> {
        if b.dim() != self.ambient_dim {
            return Err(Error::DimensionMismatch("operator vs ambient".into()));
        }
        let m = self.level_size(n);
        let blk = self.ambient_dim / m;
        let mut rep = Operator::zeros(m);
        match self.kind {
            FiltrationKind::Tensor => {
                for a in 0..m {
                    for c in 0..m {
                        rep.set(a, c, b.at(a * blk, c * blk));
                    }
                }
            }
            FiltrationKind::Dyadic => {
                for a in 0..m {
                    rep.set(a, a, b.at(a * blk, a * blk));
                }
            }
        }
        Ok(rep)
    }

    /// Lift an `m × m` representation back into the ambient algebra:
    /// `q ⊗ 1_blk` (tensor) or the block-constant diagonal (dyadic; `q` must
    /// be diagonal).
    pub fn lift_from_level(&self, n: usize, q: &Operator) -> Result<Operator> {
        let m = self.level_size(n);
        if q.dim() != m {
            return Err(Error::DimensionMismatch(format!(
                "representation dim {} vs level size {m}",
                q.dim()
            )));
        }
        let blk = self.ambient_dim / m;
        let mut out = Operator::zeros(self.ambient_dim);
        match self.kind {
            FiltrationKind::Tensor => {
                for a in 0..m {
                    for c in 0..m {
                        let z = q.at(a, c);
                        if z == CZERO {
                            continue;
                        }
                        for u in 0..blk {
                            out.set(a * blk + u, c * blk + u, z);
                        }
                    }
                }
            }
            FiltrationKind::Dyadic => {
                for a in 0..m {
                    for c in 0..m {
                        if a != c && q.at(a, c).norm() > 1e-9 {
                            return Err(Error::InvalidInput(
                                "dyadic level representation must be diagonal".into(),
                            ));
                        }
                    }
                    let z = q.at(a, a);
                    for u in 0..blk {
                        out.set(a * blk + u, a * blk + u, z);
                    }
                }
            }
        }
        Ok(out)
    }
}
