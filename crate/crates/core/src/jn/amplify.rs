//! Amplified algebra for the projection-iteration argument.
//!
//! A window `start..=stop` of a martingale's difference data is embedded into
//! `M_{stop−start+2} ⊗ L_∞(signs) ⊗ (corner of the ambient algebra)`: each
//! windowed square `Z_k` contributes its compressed square root on the
//! off-diagonal matrix-unit pair `(0, k−start+1)`, carrying an independent
//! Rademacher sign `ε_k`. The first tensor factor takes the *unnormalized*
//! matrix trace, the signs are averaged, and the corner keeps the ambient
//! trace, so the total functional ν has mass `(stop−start+2)·τ(P)` on the
//! amplified identity. Everything is stored block-diagonally: one
//! `(stop−start+2)·rank(P)` block per sign pattern.

use std::sync::Arc;

use num_complex::Complex64;

use crate::algebra::Filtration;
use crate::linalg::{
    compress, frame_from_projection, lift, sqrt_psd, Operator, Projection, Rect, CZERO,
};
use crate::martingale::Martingale;
use crate::norms::{lipschitz_norm, Family};
use crate::{Error, Result};

/// Largest allowed window span `stop − start`.
pub const MAX_SPAN: usize = 4;

/// Largest allowed corner rank.
pub const MAX_CORNER_RANK: usize = 8;

/// Cap on `(sign patterns) · (block dimension)` for one system.
pub const MAX_TOTAL_DIM: usize = 4096;

// ─── block-diagonal elements ──────────────────────────────────────────────────

/// An element of the amplified algebra: one dense block per sign pattern.
#[derive(Clone, Debug)]
pub struct AmplifiedOperator {
    block_dim: usize,
    blocks: Vec<Operator>,
}

impl AmplifiedOperator {
    pub(crate) fn from_blocks(blocks: Vec<Operator>) -> Self {
        assert!(!blocks.is_empty(), "amplified operator needs at least one block");
        let block_dim = blocks[0].dim();
        assert!(blocks.iter().all(|b| b.dim() == block_dim), "ragged blocks");
        AmplifiedOperator { block_dim, blocks }
    }

    pub fn num_atoms(&self) -> usize {
        self.blocks.len()
    }

    pub fn block_dim(&self) -> usize {
        self.block_dim
    }

    pub fn block(&self, atom: usize) -> &Operator {
        &self.blocks[atom]
    }

    pub fn blocks(&self) -> &[Operator] {
        &self.blocks
    }

    fn zip(&self, rhs: &AmplifiedOperator, f: impl Fn(&Operator, &Operator) -> Operator) -> Self {
        assert_eq!(self.blocks.len(), rhs.blocks.len(), "atom counts differ");
        assert_eq!(self.block_dim, rhs.block_dim, "block dimensions differ");
        let blocks = self.blocks.iter().zip(&rhs.blocks).map(|(a, b)| f(a, b)).collect();
        AmplifiedOperator { block_dim: self.block_dim, blocks }
    }

    pub fn add(&self, rhs: &AmplifiedOperator) -> Self {
        self.zip(rhs, Operator::add)
    }

    pub fn sub(&self, rhs: &AmplifiedOperator) -> Self {
        self.zip(rhs, Operator::sub)
    }

    pub fn mul(&self, rhs: &AmplifiedOperator) -> Self {
        self.zip(rhs, Operator::mul)
    }

    pub fn scale(&self, c: f64) -> Self {
        let blocks = self.blocks.iter().map(|b| b.scale(c)).collect();
        AmplifiedOperator { block_dim: self.block_dim, blocks }
    }

    pub fn adjoint(&self) -> Self {
        let blocks = self.blocks.iter().map(Operator::adjoint).collect();
        AmplifiedOperator { block_dim: self.block_dim, blocks }
    }

    /// Largest block Frobenius norm — the residual gauge used by the checks.
    pub fn max_block_norm(&self) -> f64 {
        self.blocks.iter().fold(0.0f64, |m, b| m.max(b.frob_norm()))
    }
}

// ─── the system ───────────────────────────────────────────────────────────────

/// The amplified system for one martingale window: corner frame, compressed
/// increment roots, and the trace data needed to evaluate ν.
#[derive(Clone)]
pub struct AmplifiedSystem {
    filt: Arc<Filtration>,
    start: usize,
    stop: usize,
    beta: f64,
    family: Family,
    frame: Rect,
    corner_gram: Operator,
    corner_rank: usize,
    tau_p: f64,
    c_hat: Vec<Operator>,
    norm: f64,
}

/// Build the amplified system for the window `start..=stop` of `mart`,
/// compressed to the corner of `proj` (an element of the level-`start`
/// algebra), with the plain (`Z_k = |dx_k|²`) or conditioned
/// (`Z_k = E_k|dx_{k+1}|²`) increment squares scaled by `τ(P)^{-β}`.
pub fn amplified_system(
    mart: &Martingale,
    start: usize,
    stop: usize,
    beta: f64,
    proj: &Projection,
    family: Family,
) -> Result<AmplifiedSystem> {
    if !(beta.is_finite() && beta >= 0.0) {
        return Err(Error::InvalidInput(format!("β must be finite and ≥ 0, got {beta}")));
    }
    if start == 0 || stop <= start {
        return Err(Error::InvalidInput(format!(
            "window must satisfy 1 ≤ start < stop, got {start}..={stop}"
        )));
    }
    let filt = mart.filtration().clone();
    let max_stop = match family {
        Family::Plain => filt.depth(),
        // The conditioned increment at k needs dx_{k+1}.
        Family::Conditioned => filt.depth().saturating_sub(1),
    };
    if stop > max_stop {
        return Err(Error::InvalidInput(format!(
            "window stop {stop} exceeds {max_stop} (depth {} / {:?} family)",
            filt.depth(),
            family
        )));
    }
    if stop - start > MAX_SPAN {
        return Err(Error::BudgetExceeded(format!(
            "window span {} exceeds {MAX_SPAN}",
            stop - start
        )));
    }
    if proj.dim() != filt.ambient_dim() {
        return Err(Error::DimensionMismatch(format!(
            "projection dim {} vs ambient {}",
            proj.dim(),
            filt.ambient_dim()
        )));
    }
    if proj.is_zero() {
        return Err(Error::InvalidInput("corner projection must be nonzero".into()));
    }
    if proj.rank() > MAX_CORNER_RANK {
        return Err(Error::BudgetExceeded(format!(
            "corner rank {} exceeds {MAX_CORNER_RANK}",
            proj.rank()
        )));
    }
    require_level_member(&filt, start, proj.op(), "corner projection")?;

    let corner_rank = proj.rank();
    let mat_dim = stop - start + 2;
    let num_atoms = 1usize << (stop - start + 1);
    let block_dim = mat_dim * corner_rank;
    if num_atoms * block_dim > MAX_TOTAL_DIM {
        return Err(Error::BudgetExceeded(format!(
            "total dimension {} exceeds {MAX_TOTAL_DIM}",
            num_atoms * block_dim
        )));
    }

    let frame = frame_from_projection(proj)?;
    let tau_p = filt.trace().apply_re(proj.op());
    if tau_p <= 0.0 {
        return Err(Error::NumericalFailure("corner projection has no trace mass".into()));
    }
    let weights = filt.trace().weights().to_vec();
    let mut corner_gram = Operator::zeros(corner_rank);
    for i in 0..corner_rank {
        for j in 0..corner_rank {
            let mut s = CZERO;
            for (a, w) in weights.iter().enumerate() {
                s += frame.at(a, i).conj() * frame.at(a, j) * *w;
            }
            corner_gram.set(i, j, s);
        }
    }

    let denom = tau_p.powf(beta);
    let mut c_hat = Vec::with_capacity(stop - start + 1);
    for k in start..=stop {
        let z = match family {
            Family::Plain => mart.diff(k).gram(),
            Family::Conditioned => filt.expect(k, &mart.diff(k + 1).gram())?,
        };
        c_hat.push(sqrt_psd(&compress(&z, &frame))?.scale(1.0 / denom));
    }

    let norm = lipschitz_norm(mart, beta, family)?.value;

    Ok(AmplifiedSystem {
        filt,
        start,
        stop,
        beta,
        family,
        frame,
        corner_gram,
        corner_rank,
        tau_p,
        c_hat,
        norm,
    })
}

/// Require `op` to lie in the level-`n` algebra up to a tight residual.
pub(crate) fn require_level_member(
    filt: &Filtration,
    n: usize,
    op: &Operator,
    what: &str,
) -> Result<()> {
    let residual = filt.expect(n, op)?.sub(op).frob_norm();
    let tol = crate::jn::RESIDUAL_TOL * op.frob_norm().max(1.0);
    if residual > tol {
        return Err(Error::InvalidInput(format!(
            "{what} is not in the level-{n} algebra (residual {residual:.3e})"
        )));
    }
    Ok(())
}

impl AmplifiedSystem {
    pub fn start(&self) -> usize {
        self.start
    }

    pub fn stop(&self) -> usize {
        self.stop
    }

    pub fn beta(&self) -> f64 {
        self.beta
    }

    pub fn family(&self) -> Family {
        self.family
    }

    pub fn corner_rank(&self) -> usize {
        self.corner_rank
    }

    pub fn tau_p(&self) -> f64 {
        self.tau_p
    }

    /// Exact column norm of the source martingale at this system's β —
    /// the `‖x‖` every bound on this system is measured against.
    pub fn norm(&self) -> f64 {
        self.norm
    }

    /// First tensor factor dimension `stop − start + 2`.
    pub fn mat_dim(&self) -> usize {
        self.stop - self.start + 2
    }

    /// Number of sign patterns `2^{stop−start+1}`.
    pub fn num_atoms(&self) -> usize {
        1 << (self.stop - self.start + 1)
    }

    pub fn block_dim(&self) -> usize {
        self.mat_dim() * self.corner_rank
    }

    /// ν of the amplified identity: `mat_dim · τ(P)`.
    pub fn nu_identity(&self) -> f64 {
        self.mat_dim() as f64 * self.tau_p
    }

    /// Sign carried by `ε_k` on the given sign pattern.
    pub fn sign(&self, atom: usize, k: usize) -> f64 {
        debug_assert!((self.start..=self.stop).contains(&k));
        if (atom >> (k - self.start)) & 1 == 1 {
            -1.0
        } else {
            1.0
        }
    }

    /// The amplified identity Ī.
    pub fn identity(&self) -> AmplifiedOperator {
        let blocks = vec![Operator::identity(self.block_dim()); self.num_atoms()];
        AmplifiedOperator::from_blocks(blocks)
    }

    /// `y_m = Σ_{k=start}^m ε_k · (unit(0,k−start+1) + unit(k−start+1,0)) ⊗ Ĉ_k`.
    pub fn y(&self, m: usize) -> Result<AmplifiedOperator> {
        if !(self.start..=self.stop).contains(&m) {
            return Err(Error::InvalidInput(format!(
                "y index {m} outside window {}..={}",
                self.start, self.stop
            )));
        }
        let r = self.corner_rank;
        let mut blocks = Vec::with_capacity(self.num_atoms());
        for atom in 0..self.num_atoms() {
            let mut b = Operator::zeros(self.block_dim());
            for k in self.start..=m {
                let sign = self.sign(atom, k);
                let c = &self.c_hat[k - self.start];
                let slot = k - self.start + 1;
                for i in 0..r {
                    for j in 0..r {
                        let z = c.at(i, j) * sign;
                        b.add_at(i, slot * r + j, z);
                        b.add_at(slot * r + j, i, z.conj());
                    }
                }
            }
            blocks.push(b);
        }
        Ok(AmplifiedOperator::from_blocks(blocks))
    }

    /// The r × r corner identity.
    pub fn corner_identity(&self) -> Operator {
        Operator::identity(self.corner_rank)
    }

    /// `unit(slot,slot) ⊗ corner`, constant across sign patterns.
    pub fn slot_probe(&self, slot: usize, corner: &Operator) -> Result<AmplifiedOperator> {
        if slot >= self.mat_dim() {
            return Err(Error::InvalidInput(format!(
                "slot {slot} outside 0..{}",
                self.mat_dim()
            )));
        }
        if corner.dim() != self.corner_rank {
            return Err(Error::DimensionMismatch(format!(
                "corner probe dim {} vs rank {}",
                corner.dim(),
                self.corner_rank
            )));
        }
        let r = self.corner_rank;
        let mut b = Operator::zeros(self.block_dim());
        for i in 0..r {
            for j in 0..r {
                b.set(slot * r + i, slot * r + j, corner.at(i, j));
            }
        }
        Ok(AmplifiedOperator::from_blocks(vec![b; self.num_atoms()]))
    }

    /// `(unit(0,0) + unit(2,2)) ⊗ corner identity` — the two slots the
    /// iteration bound charges its mass to.
    pub fn pair_probe(&self) -> AmplifiedOperator {
        let r = self.corner_rank;
        let mut b = Operator::zeros(self.block_dim());
        for i in 0..r {
            b.set(i, i, Complex64::new(1.0, 0.0));
            b.set(2 * r + i, 2 * r + i, Complex64::new(1.0, 0.0));
        }
        AmplifiedOperator::from_blocks(vec![b; self.num_atoms()])
    }

    /// ν: unnormalized trace on the matrix factor, mean over sign patterns,
    /// ambient trace on the corner.
    pub fn nu(&self, a: &AmplifiedOperator) -> Complex64 {
        assert_eq!(a.num_atoms(), self.num_atoms(), "atom counts differ");
        assert_eq!(a.block_dim(), self.block_dim(), "block dimensions differ");
        let r = self.corner_rank;
        let mut total = CZERO;
        for blk in a.blocks() {
            for s in 0..self.mat_dim() {
                for i in 0..r {
                    for j in 0..r {
                        total += self.corner_gram.at(i, j) * blk.at(s * r + j, s * r + i);
                    }
                }
            }
        }
        total / self.num_atoms() as f64
    }

    pub fn nu_re(&self, a: &AmplifiedOperator) -> f64 {
        self.nu(a).re
    }

    /// Conditional expectation onto the level-`m` amplified algebra: average
    /// out the signs `ε_{m+1}..ε_stop` and apply the ambient `E_m` inside the
    /// corner. Satisfies `expect(m, y(stop)) = y(m)`.
    pub fn expect(&self, m: usize, a: &AmplifiedOperator) -> Result<AmplifiedOperator> {
        if !(self.start..=self.stop).contains(&m) {
            return Err(Error::InvalidInput(format!(
                "expectation level {m} outside window {}..={}",
                self.start, self.stop
            )));
        }
        assert_eq!(a.num_atoms(), self.num_atoms(), "atom counts differ");
        assert_eq!(a.block_dim(), self.block_dim(), "block dimensions differ");
        let group_bits = m - self.start + 1;
        let group_count = 1usize << group_bits;
        let high_count = self.num_atoms() / group_count;
        let mut reps = Vec::with_capacity(group_count);
        for g in 0..group_count {
            let mut avg = Operator::zeros(self.block_dim());
            for h in 0..high_count {
                avg = avg.add(a.block((h << group_bits) | g));
            }
            avg = avg.scale(1.0 / high_count as f64);
            reps.push(self.corner_expect_block(m, &avg)?);
        }
        let blocks =
            (0..self.num_atoms()).map(|atom| reps[atom & (group_count - 1)].clone()).collect();
        Ok(AmplifiedOperator::from_blocks(blocks))
    }

    /// Apply the corner-compressed `E_m` to every r × r sub-block.
    fn corner_expect_block(&self, m: usize, block: &Operator) -> Result<Operator> {
        let r = self.corner_rank;
        let mut out = Operator::zeros(block.dim());
        for s in 0..self.mat_dim() {
            for t in 0..self.mat_dim() {
                let mut c = Operator::zeros(r);
                let mut any = false;
                for i in 0..r {
                    for j in 0..r {
                        let z = block.at(s * r + i, t * r + j);
                        if z != CZERO {
                            any = true;
                        }
                        c.set(i, j, z);
                    }
                }
                if !any {
                    continue;
                }
                let back = compress(&self.filt.expect(m, &lift(&c, &self.frame))?, &self.frame);
                for i in 0..r {
                    for j in 0..r {
                        out.set(s * r + i, t * r + j, back.at(i, j));
                    }
                }
            }
        }
        Ok(out)
    }
}

// ─── tests ────────────────────────────────────────────────────────────────────
