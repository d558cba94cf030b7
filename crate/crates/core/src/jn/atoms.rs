//! Calibrated Hardy-space atoms.
//!
//! An `(p, q)`-atom at level `n` is an element `a` with: vanishing level-`n`
//! expectation, right support inside a projection `e ∈ A_n`, and conditioned
//! column size `‖a‖_{h_q^c} ≤ τ(e)^{1/q−1/p}`. Such an atom automatically
//! satisfies `‖a‖_{h_p^c} ≤ 1`: its conditioned square lives under `e`, so
//! the exponent drop from `q` to `p` costs exactly the calibrated power of
//! `τ(e)`. The generator draws random atoms with the size condition tight;
//! the checker re-verifies all four properties from scratch.

use std::sync::Arc;

use num_complex::Complex64;

use crate::algebra::{Filtration, FiltrationKind};
use crate::jn::{check_le, check_residual, Check, RESIDUAL_TOL};
use crate::linalg::{Operator, Projection};
use crate::martingale::{martingale_from_final, HardyKind};
use crate::norms::{gaussian, random_level_projection, stream_rng};
use crate::{Error, Result};

/// A generated atom together with the data its properties refer to.
#[derive(Clone, Debug)]
pub struct AtomInstance {
    /// The atom itself.
    pub op: Operator,
    /// Its supporting projection `e ∈ A_level`.
    pub witness: Projection,
    /// The level whose expectation annihilates it.
    pub level: usize,
    /// Target exponent `p ∈ (0, 1]`.
    pub p: f64,
    /// Size exponent `q > 1`.
    pub q: f64,
}

/// Draw a random `(p, q)`-atom at `level` with the size condition tight.
///
/// The raw draw is `(z − E_level z)·e` for a Gaussian `z` (diagonal on dyadic
/// filtrations), rescaled so `‖a‖_{h_q^c} = τ(e)^{1/q−1/p}` exactly.
/// Degenerate draws are resampled a few times before giving up. The level
/// must stay below the full depth — at the final level a mean-zero element
/// is identically zero.
pub fn make_atom(
    filt: &Arc<Filtration>,
    level: usize,
    p: f64,
    q: f64,
    seed: u64,
) -> Result<AtomInstance> {
    if !(p.is_finite() && p > 0.0 && p <= 1.0) {
        return Err(Error::InvalidInput(format!("atom exponent p must be in (0,1], got {p}")));
    }
    if !(q.is_finite() && q > 1.0) {
        return Err(Error::InvalidInput(format!("atom size exponent q must be > 1, got {q}")));
    }
    if level == 0 || level >= filt.depth() {
        return Err(Error::InvalidInput(format!(
            "atom level must be in 1..{} (mean-zero forces zero at the final level)",
            filt.depth()
        )));
    }
    let e = random_level_projection(filt, level, seed)?;
    let tau_e = filt.trace().apply_re(e.op());
    let d = filt.ambient_dim();

    for attempt in 0..8u64 {
        let mut rng = stream_rng(seed, level, 1 + attempt as usize);
        let mut z = Operator::zeros(d);
        match filt.kind() {
            FiltrationKind::Tensor => {
                for i in 0..d {
                    for j in 0..d {
                        z.set(i, j, Complex64::new(gaussian(&mut rng), gaussian(&mut rng)));
                    }
                }
            }
            // The dyadic ambient algebra is the diagonal one.
            FiltrationKind::Dyadic => {
                for i in 0..d {
                    z.set(i, i, Complex64::new(gaussian(&mut rng), 0.0));
                }
            }
        }
        let centered = z.sub(&filt.expect(level, &z)?);
        let raw = centered.mul(e.op());
        let hq = martingale_from_final(&raw, filt.clone())?
            .hardy_norm(q, HardyKind::ConditionedColumn)?;
        if hq <= 1e-9 {
            continue;
        }
        let target = tau_e.powf(1.0 / q - 1.0 / p);
        return Ok(AtomInstance { op: raw.scale(target / hq), witness: e, level, p, q });
    }
    Err(Error::NumericalFailure("atom draw degenerated repeatedly".into()))
}

/// Re-verify the atom properties from scratch:
///
/// * `atom-mean` — `E_level(a) = 0`;
/// * `atom-support` — `a(1 − e) = 0`;
/// * `atom-size` — `‖a‖_{h_q^c} ≤ τ(e)^{1/q−1/p}`;
/// * `atom-normalized` — `‖a‖_{h_p^c} ≤ 1`, the inequality the first three
///   properties force.
pub fn check_atom(filt: &Arc<Filtration>, atom: &AtomInstance) -> Result<Vec<Check>> {
    if atom.op.dim() != filt.ambient_dim() {
        return Err(Error::DimensionMismatch(format!(
            "atom dim {} vs ambient {}",
            atom.op.dim(),
            filt.ambient_dim()
        )));
    }
    let scale = atom.op.frob_norm().max(1.0);
    let mean = filt.expect(atom.level, &atom.op)?.frob_norm();
    let support = atom.op.mul(atom.witness.complement().op()).frob_norm();
    let mart = martingale_from_final(&atom.op, filt.clone())?;
    let hq = mart.hardy_norm(atom.q, HardyKind::ConditionedColumn)?;
    let hp = mart.hardy_norm(atom.p, HardyKind::ConditionedColumn)?;
    let tau_e = filt.trace().apply_re(atom.witness.op());
    Ok(vec![
        check_residual("atom-mean", mean, RESIDUAL_TOL * scale),
        check_residual("atom-support", support, RESIDUAL_TOL * scale),
        check_le("atom-size", hq, tau_e.powf(1.0 / atom.q - 1.0 / atom.p)),
        check_le("atom-normalized", hp, 1.0),
    ])
}

// ─── tests ────────────────────────────────────────────────────────────────────

#[cfg(test)]
mod tests {
    use super::*;
    use crate::algebra::{make_dyadic_filtration, make_tensor_filtration};
    use crate::jn::CheckStatus;

    #[test]
    fn generated_atoms_pass_their_own_checks() {
        for filt in [make_tensor_filtration(3).unwrap(), make_dyadic_filtration(4).unwrap()] {
            for level in 1..filt.depth() {
                for (p, q) in [(0.5, 2.0), (1.0, 2.0), (0.5, 4.0), (1.0, 4.0)] {
                    let seed = 0xa70_000 + (level as u64) * 17 + (q as u64);
                    let atom = make_atom(&filt, level, p, q, seed).unwrap();
                    let checks = check_atom(&filt, &atom).unwrap();
                    assert_eq!(checks.len(), 4);
                    for c in &checks {
                        assert_eq!(
                            c.status,
                            CheckStatus::Passed,
                            "{} failed (level {level}, p={p}, q={q}): {:.6e} vs {:.6e}",
                            c.id,
                            c.lhs,
                            c.rhs
                        );
                    }
                }
            }
        }
    }

    #[test]
    fn size_condition_is_tight() {
        let filt = make_tensor_filtration(3).unwrap();
        let atom = make_atom(&filt, 1, 0.5, 2.0, 99).unwrap();
        let checks = check_atom(&filt, &atom).unwrap();
        let size = checks.iter().find(|c| c.id == "atom-size").unwrap();
        assert!(
            (size.lhs - size.rhs).abs() <= 1e-9 * size.rhs.max(1.0),
            "calibration should be tight: {:.6e} vs {:.6e}",
            size.lhs,
            size.rhs
        );
    }

    #[test]
    fn parameters_are_validated() {
        let filt = make_tensor_filtration(3).unwrap();
        assert!(make_atom(&filt, 1, 0.0, 2.0, 1).is_err());
        assert!(make_atom(&filt, 1, 1.5, 2.0, 1).is_err());
        assert!(make_atom(&filt, 1, 0.5, 1.0, 1).is_err());
        assert!(make_atom(&filt, 0, 0.5, 2.0, 1).is_err());
        // The final level cannot host a nonzero mean-zero atom.
        assert!(make_atom(&filt, 3, 0.5, 2.0, 1).is_err());
    }

    #[test]
    fn atoms_are_reproducible() {
        let filt = make_dyadic_filtration(3).unwrap();
        let a = make_atom(&filt, 2, 1.0, 2.0, 1234).unwrap();
        let b = make_atom(&filt, 2, 1.0, 2.0, 1234).unwrap();
        assert!(a.op.sub(&b.op).frob_norm() == 0.0);
        assert_eq!(a.witness.rank(), b.witness.rank());
    }
}
