//! Scalar dyadic martingale oracle.
//!
//! Everything in this module works on plain `f64` sequences over the 2^K
//! equal-mass points of depth-K dyadic space, so it can serve as an
//! independent reference for the operator machinery: level-n data are block
//! means over blocks of 2^{K-n} points, square functions are pointwise sums
//! of squared differences, and every norm supremum reduces to sorting block
//! masses — making each value exact rather than searched.  The same
//! martingale can be embedded as a diagonal operator martingale over the
//! dyadic filtration for cross-checking.

use crate::algebra::{make_dyadic_filtration, MAX_DYADIC_DEPTH};
use crate::linalg::Operator;
use crate::martingale::{martingale_from_final, Martingale};
use crate::norms::Family;
use crate::{Error, Result};
use std::f64::consts::E;

/// Slack for the distribution-inequality verdicts; every quantity involved
/// is a short sum of exact dyadic weights, so the tolerance is tiny.
pub const CLASSICAL_SLACK: f64 = 1e-12;

// ─── dyadic martingale ───────────────────────────────────────────────────────

/// A real martingale on dyadic points, stored as its final values.
#[derive(Clone, Debug)]
pub struct DyadicMartingale {
    depth: usize,
    values: Vec<f64>,
}

impl DyadicMartingale {
    /// Wrap final values (length 2^depth, all finite).
    pub fn new(depth: usize, values: Vec<f64>) -> Result<Self> {
        if depth == 0 || depth > MAX_DYADIC_DEPTH {
            return Err(Error::BudgetExceeded(format!(
                "dyadic depth {depth} outside 1..={MAX_DYADIC_DEPTH}"
            )));
        }
        if values.len() != 1 << depth {
            return Err(Error::DimensionMismatch(format!(
                "depth {depth} needs {} values, got {}",
                1usize << depth,
                values.len()
            )));
        }
        if values.iter().any(|v| !v.is_finite()) {
            return Err(Error::InvalidInput("non-finite martingale value".into()));
        }
        Ok(Self { depth, values })
    }

    pub fn depth(&self) -> usize {
        self.depth
    }

    pub fn num_points(&self) -> usize {
        1 << self.depth
    }

    /// Mass of a single point, 2^{-K}.
    pub fn point_weight(&self) -> f64 {
        1.0 / (1u64 << self.depth) as f64
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    /// Means of `data` over the 2^n level-n blocks.
    pub fn block_means(&self, n: usize, data: &[f64]) -> Vec<f64> {
        assert!(n <= self.depth && data.len() == self.num_points());
        let size = 1 << (self.depth - n);
        (0..1usize << n)
            .map(|b| data[b * size..(b + 1) * size].iter().sum::<f64>() / size as f64)
            .collect()
    }

    /// `data` conditioned on level n, broadcast back to points (`E_n`).
    fn condition(&self, n: usize, data: &[f64]) -> Vec<f64> {
        let size = 1 << (self.depth - n);
        let means = self.block_means(n, data);
        let mut out = vec![0.0; self.num_points()];
        for (b, m) in means.iter().enumerate() {
            out[b * size..(b + 1) * size].fill(*m);
        }
        out
    }

    /// `f_n` broadcast to points; `f_0 = 0` by convention.
    pub fn level(&self, n: usize) -> Vec<f64> {
        assert!(n <= self.depth);
        if n == 0 {
            vec![0.0; self.num_points()]
        } else {
            self.condition(n, &self.values)
        }
    }

    /// `df_n = f_n − f_{n−1}`, so `df_1 = f_1`.
    pub fn diff(&self, n: usize) -> Vec<f64> {
        assert!(n >= 1 && n <= self.depth);
        let mut hi = self.level(n);
        let lo = self.level(n - 1);
        for (h, l) in hi.iter_mut().zip(&lo) {
            *h -= l;
        }
        hi
    }

    // ─── square functions ────────────────────────────────────────────────────

    /// Pointwise `Σ_{k ≥ start} df_k²` (zero when start exceeds the depth).
    pub fn square_sum(&self, start: usize) -> Vec<f64> {
        let mut acc = vec![0.0; self.num_points()];
        for k in start.max(1)..=self.depth {
            for (a, d) in acc.iter_mut().zip(self.diff(k)) {
                *a += d * d;
            }
        }
        acc
    }

    /// Pointwise `S(f − f_{start−1}) = (Σ_{k ≥ start} df_k²)^{1/2}`.
    pub fn square_function(&self, start: usize) -> Vec<f64> {
        self.square_sum(start).into_iter().map(f64::sqrt).collect()
    }

    /// Pointwise `Σ_{k ≥ start} E_{k−1}(df_k²)` with `E_0 = E_1`.
    ///
    /// On a binary filtration the two halves of each parent block carry
    /// opposite difference values, so `E_{k−1}(df_k²) = df_k²` and this
    /// coincides with [`square_sum`]; it is computed through the conditioning
    /// anyway so the identity can be checked rather than assumed.
    pub fn conditioned_square_sum(&self, start: usize) -> Vec<f64> {
        let mut acc = vec![0.0; self.num_points()];
        for k in start.max(1)..=self.depth {
            let sq: Vec<f64> = self.diff(k).into_iter().map(|d| d * d).collect();
            let cond = self.condition(k.max(2) - 1, &sq);
            for (a, c) in acc.iter_mut().zip(cond) {
                *a += c;
            }
        }
        acc
    }

    // ─── norms ───────────────────────────────────────────────────────────────

    /// `sup_n ‖E_n(Σ_{k≥n} df_k²)‖_∞^{1/2}` — martingale BMO.
    pub fn bmo_norm(&self) -> f64 {
        let mut best: f64 = 0.0;
        for n in 1..=self.depth {
            for m in self.block_means(n, &self.square_sum(n)) {
                best = best.max(m);
            }
        }
        best.sqrt()
    }

    /// `max |f_1|`, the first-level term of the conditioned family.
    fn first_level_sup(&self) -> f64 {
        self.block_means(1, &self.values).iter().fold(0.0, |b, m| b.max(m.abs()))
    }

    /// Exact prefix-scan supremum of `(Σ_top-r masses) / (r·2^{-n})^{1+2β}`.
    fn scan(&self, n: usize, data: &[f64], beta: f64) -> f64 {
        let mut means = self.block_means(n, data);
        means.sort_by(|a, b| b.partial_cmp(a).unwrap());
        let w = 0.5f64.powi(n as i32);
        let mut prefix = 0.0;
        let mut best: f64 = 0.0;
        for (i, m) in means.iter().enumerate() {
            prefix += w * m;
            let frac = w * (i + 1) as f64;
            best = best.max(prefix / frac.powf(1.0 + 2.0 * beta));
        }
        best
    }

    /// Lipschitz norm of either column family at exponent β.
    pub fn lipschitz_norm(&self, beta: f64, family: Family) -> Result<f64> {
        check_beta(beta)?;
        let mut best: f64 = 0.0;
        match family {
            Family::Plain => {
                for n in 1..=self.depth {
                    best = best.max(self.scan(n, &self.square_sum(n), beta));
                }
                Ok(best.sqrt())
            }
            Family::Conditioned => {
                for n in 1..self.depth {
                    best = best.max(self.scan(n, &self.square_sum(n + 1), beta));
                }
                Ok(best.sqrt().max(self.first_level_sup()))
            }
        }
    }

    /// p-moment norm of either column family: the supremum over block unions
    /// `e` of `‖S·1_e‖_p / τ(e)^{β+1/p}`, exact for every p by the top-mass
    /// prefix scan.
    pub fn moment_norm(&self, beta: f64, p: f64, family: Family) -> Result<f64> {
        check_beta(beta)?;
        if !(p > 0.0) || !p.is_finite() {
            return Err(Error::InvalidInput(format!("moment exponent p = {p}")));
        }
        let pw = self.point_weight();
        let mut best: f64 = 0.0;
        let levels: Vec<usize> = match family {
            Family::Plain => (1..=self.depth).collect(),
            Family::Conditioned => (1..self.depth).collect(),
        };
        for n in levels {
            let q = match family {
                Family::Plain => self.square_sum(n),
                Family::Conditioned => self.conditioned_square_sum(n + 1),
            };
            let size = 1 << (self.depth - n);
            let mut masses: Vec<f64> = (0..1usize << n)
                .map(|b| {
                    q[b * size..(b + 1) * size]
                        .iter()
                        .map(|&v| pw * v.max(0.0).powf(p / 2.0))
                        .sum()
                })
                .collect();
            masses.sort_by(|a, b| b.partial_cmp(a).unwrap());
            let w = 0.5f64.powi(n as i32);
            let mut prefix = 0.0;
            for (i, m) in masses.iter().enumerate() {
                prefix += m;
                let frac = w * (i + 1) as f64;
                best = best.max(prefix.powf(1.0 / p) / frac.powf(beta + 1.0 / p));
            }
        }
        match family {
            Family::Plain => Ok(best),
            Family::Conditioned => Ok(best.max(self.first_level_sup())),
        }
    }

    // ─── distribution counts ─────────────────────────────────────────────────

    /// `P(S(f − f_{start−1}) > t)` — strict, matching the operator-side
    /// distribution function.
    pub fn strict_tail(&self, start: usize, t: f64) -> f64 {
        let pw = self.point_weight();
        self.square_sum(start).iter().filter(|&&q| q.sqrt() > t).count() as f64 * pw
    }

    /// `P(E ∩ {S(f − f_{n−1}) ≥ lambda})` for `E` a union of level-n blocks.
    pub fn masked_tail(&self, n: usize, mask: &[bool], lambda: f64) -> f64 {
        assert!(n >= 1 && n <= self.depth && mask.len() == 1 << n);
        let size = 1 << (self.depth - n);
        let pw = self.point_weight();
        self.square_sum(n)
            .iter()
            .enumerate()
            .filter(|(i, &q)| mask[i / size] && q.sqrt() >= lambda)
            .count() as f64
            * pw
    }

    /// τ-mass of a level-n block union.
    pub fn mask_mass(&self, n: usize, mask: &[bool]) -> f64 {
        mask.iter().filter(|&&b| b).count() as f64 * 0.5f64.powi(n as i32)
    }

    // ─── distribution inequalities ───────────────────────────────────────────

    /// One rung of the good-λ ladder: for a level-n block union `E`,
    ///
    /// ```text
    ///   P(E ∩ {S(f−f_{n−1}) ≥ λ+μ}) ≤ (‖f‖_BMO / μ) · P(E ∩ {S(f−f_{n−1}) ≥ λ}).
    /// ```
    pub fn check_step(&self, n: usize, mask: &[bool], lambda: f64, mu: f64) -> Result<ClassicalCheck> {
        self.check_window(n, mask)?;
        if !(lambda >= 0.0) || !lambda.is_finite() || !(mu > 0.0) || !mu.is_finite() {
            return Err(Error::InvalidInput(format!("step levels λ = {lambda}, μ = {mu}")));
        }
        let lhs = self.masked_tail(n, mask, lambda + mu);
        let rhs = self.bmo_norm() / mu * self.masked_tail(n, mask, lambda);
        Ok(ClassicalCheck { lhs, rhs, pass: lhs <= rhs + CLASSICAL_SLACK * rhs.max(1.0) })
    }

    /// The iterated tail bound: `P(E ∩ {S ≥ λ}) ≤ e²·e^{−λ/(e‖f‖_BMO)}·P(E)`.
    pub fn check_tail(&self, n: usize, mask: &[bool], lambda: f64) -> Result<ClassicalCheck> {
        self.check_window(n, mask)?;
        if !(lambda >= 0.0) || !lambda.is_finite() {
            return Err(Error::InvalidInput(format!("tail level λ = {lambda}")));
        }
        let norm = self.bmo_norm();
        let lhs = self.masked_tail(n, mask, lambda);
        let rhs = if norm <= 0.0 {
            // Zero martingale: S ≡ 0, so only λ = 0 has mass.
            if lambda > 0.0 {
                0.0
            } else {
                E * E * self.mask_mass(n, mask)
            }
        } else {
            E * E * (-lambda / (E * norm)).exp() * self.mask_mass(n, mask)
        };
        Ok(ClassicalCheck { lhs, rhs, pass: lhs <= rhs + CLASSICAL_SLACK * rhs.max(1.0) })
    }

    fn check_window(&self, n: usize, mask: &[bool]) -> Result<()> {
        if n == 0 || n > self.depth {
            return Err(Error::InvalidInput(format!("level {n} outside depth {}", self.depth)));
        }
        if mask.len() != 1 << n {
            return Err(Error::DimensionMismatch(format!(
                "level {n} mask needs {} blocks, got {}",
                1usize << n,
                mask.len()
            )));
        }
        Ok(())
    }

    // ─── embedding ───────────────────────────────────────────────────────────

    /// The same martingale as a diagonal operator over the dyadic filtration.
    pub fn to_matrix_martingale(&self) -> Result<Martingale> {
        let filt = make_dyadic_filtration(self.depth)?;
        martingale_from_final(&Operator::from_real_diag(&self.values), filt)
    }
}

/// Outcome of one classical distribution check.
#[derive(Clone, Copy, Debug)]
pub struct ClassicalCheck {
    pub lhs: f64,
    pub rhs: f64,
    pub pass: bool,
}

fn check_beta(beta: f64) -> Result<()> {
    if !(beta >= 0.0) || !beta.is_finite() {
        return Err(Error::InvalidInput(format!("Lipschitz exponent β = {beta}")));
    }
    Ok(())
}

// ─── tests ───────────────────────────────────────────────────────────────────
