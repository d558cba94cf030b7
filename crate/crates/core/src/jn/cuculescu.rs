//! Cuculescu projection sequence on an amplified system.
//!
//! Starting from the amplified identity, each level keeps the part of the
//! previous projection on which the compressed `y_m` still sits below the
//! threshold: `R_m = R_{m−1} · 1_{(−∞,λ)}(R_{m−1} y_m R_{m−1})`. The spectral
//! cut is taken inside the range of `R_{m−1}`, so for λ > 0 the kernel
//! contributed by `1 − R_{m−1}` never re-enters. Blocks are deduplicated per
//! sign group: `R_m` only depends on the signs `ε_start..ε_m`, so one cut per
//! low-bit pattern serves every sign pattern extending it.

use crate::jn::amplify::{AmplifiedOperator, AmplifiedSystem};
use crate::linalg::{compress, eig_hermitian, lift, spectral_projection, Interval, Operator, Rect};
use crate::{Error, Result};

/// The projections `R_{start−1} = Ī, R_start, …, R_stop` cut at one λ.
#[derive(Clone, Debug)]
pub struct CuculescuSequence {
    start: usize,
    stop: usize,
    lambda: f64,
    rs: Vec<AmplifiedOperator>,
}

impl CuculescuSequence {
    pub fn start(&self) -> usize {
        self.start
    }

    pub fn stop(&self) -> usize {
        self.stop
    }

    pub fn lambda(&self) -> f64 {
        self.lambda
    }

    /// `R_m` for `m ∈ start−1 ..= stop` (`start−1` is the amplified identity).
    pub fn at(&self, m: usize) -> &AmplifiedOperator {
        assert!(
            (self.start - 1..=self.stop).contains(&m),
            "index {m} outside {}..={}",
            self.start - 1,
            self.stop
        );
        &self.rs[m + 1 - self.start]
    }

    /// The final projection `R_stop`.
    pub fn last(&self) -> &AmplifiedOperator {
        self.rs.last().expect("sequence is never empty")
    }
}

/// Run the iteration against threshold `lambda ≥ 0`.
pub fn cuculescu(sys: &AmplifiedSystem, lambda: f64) -> Result<CuculescuSequence> {
    if !(lambda.is_finite() && lambda >= 0.0) {
        return Err(Error::InvalidInput(format!(
            "threshold must be finite and ≥ 0, got {lambda}"
        )));
    }
    let mut rs = vec![sys.identity()];
    for m in sys.start()..=sys.stop() {
        let y = sys.y(m)?;
        let prev = rs.last().expect("nonempty");
        let group_count = 1usize << (m - sys.start() + 1);
        let mut reps = Vec::with_capacity(group_count);
        for g in 0..group_count {
            reps.push(cut_block(prev.block(g), y.block(g), lambda)?);
        }
        let blocks = (0..sys.num_atoms())
            .map(|atom| reps[atom & (group_count - 1)].clone())
            .collect();
        rs.push(AmplifiedOperator::from_blocks(blocks));
    }
    Ok(CuculescuSequence { start: sys.start(), stop: sys.stop(), lambda, rs })
}

/// One spectral cut: compress `y` to the range of the previous projection,
/// keep the part of the spectrum strictly below λ, and lift back.
fn cut_block(prev: &Operator, y: &Operator, lambda: f64) -> Result<Operator> {
    let dec = eig_hermitian(prev)?;
    let cols = dec.select_columns(|l| l > 0.5);
    if cols.is_empty() {
        return Ok(Operator::zeros(prev.dim()));
    }
    let columns: Vec<Vec<_>> = cols
        .iter()
        .map(|&j| (0..prev.dim()).map(|i| dec.vectors.at(i, j)).collect())
        .collect();
    let frame = Rect::from_columns(prev.dim(), &columns);
    let below = spectral_projection(&compress(y, &frame), Interval::Below(lambda))?;
    Ok(lift(below.op(), &frame).herm_part())
}

// ─── tests ────────────────────────────────────────────────────────────────────

#[cfg(test)]
mod tests {
    use super::*;
    use crate::algebra::make_tensor_filtration;
    use crate::jn::amplify::amplified_system;
    use crate::martingale::martingale_from_final;
    use crate::norms::{random_level_projection, Family};
    use num_complex::Complex64;

    fn probe(d: usize, salt: u64) -> Operator {
        let mut state = 0x452821e638d01377u64 ^ salt.wrapping_mul(0x9e3779b97f4a7c15);
        let mut next = || {
            state = state.wrapping_mul(6364136223846793005).wrapping_add(1442695040888963407);
            ((state >> 11) as f64 / (1u64 << 53) as f64) * 2.0 - 1.0
        };
        let mut a = Operator::zeros(d);
        for i in 0..d {
            for j in 0..d {
                a.set(i, j, Complex64::new(next(), next()));
            }
        }
        a.herm_part()
    }

    fn small_system(salt: u64) -> AmplifiedSystem {
        let filt = make_tensor_filtration(3).unwrap();
        let mart = martingale_from_final(&probe(filt.ambient_dim(), salt), filt.clone()).unwrap();
        let proj = random_level_projection(&filt, 1, salt ^ 0xabcd).unwrap();
        amplified_system(&mart, 1, 3, 0.0, &proj, Family::Plain).unwrap()
    }

    #[test]
    fn huge_threshold_keeps_everything() {
        let sys = small_system(41);
        let seq = cuculescu(&sys, 1e9).unwrap();
        let residual = seq.last().sub(&sys.identity()).max_block_norm();
        assert!(residual <= 1e-12, "residual {residual:.3e}");
        assert!((sys.nu_re(&sys.identity().sub(seq.last())) as f64).abs() <= 1e-12);
    }

    #[test]
    fn zero_martingale_splits_on_kernel_convention() {
        let filt = make_tensor_filtration(3).unwrap();
        let zero = Operator::zeros(filt.ambient_dim());
        let mart = martingale_from_final(&zero, filt.clone()).unwrap();
        let proj = random_level_projection(&filt, 1, 5).unwrap();
        let sys = amplified_system(&mart, 1, 2, 0.0, &proj, Family::Plain).unwrap();
        // λ > 0: the zero operator lies strictly below the threshold.
        let kept = cuculescu(&sys, 0.5).unwrap();
        assert!(kept.last().sub(&sys.identity()).max_block_norm() <= 1e-12);
        // λ = 0: the open interval (−∞, 0) excludes the kernel entirely.
        let cut = cuculescu(&sys, 0.0).unwrap();
        assert!(cut.last().max_block_norm() <= 1e-12);
    }

    #[test]
    fn sequence_is_a_decreasing_projection_chain() {
        let sys = small_system(43);
        let lambda = 0.5 * sys.norm();
        let seq = cuculescu(&sys, lambda).unwrap();
        for m in sys.start()..=sys.stop() {
            let r = seq.at(m);
            let prev = seq.at(m - 1);
            for atom in 0..sys.num_atoms() {
                let b = r.block(atom);
                assert!(b.mul(b).sub(b).frob_norm() <= 1e-8, "not idempotent at {m}");
                assert!(b.herm_residual() <= 1e-10, "not hermitian at {m}");
                let pb = prev.block(atom).mul(b);
                assert!(pb.sub(b).frob_norm() <= 1e-8, "not nested at {m}");
            }
        }
        // The mass below the identity is nonnegative and bounded by ν(Ī).
        let lost = sys.nu_re(&sys.identity().sub(seq.last()));
        assert!((-1e-10..=sys.nu_identity() + 1e-10).contains(&lost));
    }

    #[test]
    fn rejects_negative_threshold() {
        let sys = small_system(47);
        assert!(cuculescu(&sys, -1.0).is_err());
        assert!(cuculescu(&sys, f64::NAN).is_err());
    }
}
