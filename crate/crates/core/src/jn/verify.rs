//! Verifiers for the John–Nirenberg chain.
//!
//! Three layers, each expressed as [`Check`]s with explicit sides:
//!
//! * the projection-iteration internals — structural bullets of the Cuculescu
//!   sequence, vanishing of the untouched-slot masses, and the one-step
//!   distribution inequality in both its raw and norm-bounded forms;
//! * the distribution and exponential-integrability bounds for compressed
//!   square functions measured on a projection corner;
//! * the p-moment equivalences between the moment and Lipschitz norms.

use std::f64::consts::E;

use num_complex::Complex64;

use crate::jn::amplify::{require_level_member, AmplifiedSystem};
use crate::jn::cuculescu::cuculescu;
use crate::jn::{
    check_le, check_residual, exponential_constant, moment_constant, tail_constant, Check,
    CheckStatus, RESIDUAL_TOL,
};
use crate::linalg::{
    btol, compress, eig_hermitian, frame_from_projection, Operator, Projection, Rect,
};
use crate::martingale::Martingale;
use crate::norms::{gaussian, lipschitz_norm, moment_norm_seeded, stream_rng, Family, Mode};
use crate::{Error, Result};
use rand_chacha::ChaCha12Rng;

// ─── iteration-level checks ───────────────────────────────────────────────────

/// Verify the distribution step on an amplified system at thresholds
/// `λ` and `λ + μ`:
///
/// * `step-bound` — the lost mass at `λ + μ` is controlled by the quadratic
///   deviation of `y` on the part lost at `λ`, with constant `2/μ²`;
/// * `future-mass` — projections never charge slots their level has not yet
///   touched (probed with the corner identity and two seeded positives);
/// * `chain-link` — the quadratic deviation is controlled by `2‖x‖²` on the
///   first and third diagonal slots;
/// * `amp-step` — the composite of the two, with constant `4‖x‖²/μ²`.
pub fn verify_proof_chain(
    sys: &AmplifiedSystem,
    lambda: f64,
    mu: f64,
    seed: u64,
) -> Result<Vec<Check>> {
    if !(lambda.is_finite() && lambda > 0.0) {
        return Err(Error::InvalidInput(format!("threshold must be positive, got {lambda}")));
    }
    if !(mu.is_finite() && mu > 0.0) {
        return Err(Error::InvalidInput(format!("increment must be positive, got {mu}")));
    }
    let low = cuculescu(sys, lambda)?;
    let high = cuculescu(sys, lambda + mu)?;
    let ident = sys.identity();

    let y_last = sys.y(sys.stop())?;
    let shifted = y_last.sub(&ident.scale(lambda));
    let quad_op = shifted.mul(&shifted);
    let low_defect = ident.sub(low.last());
    let quad = sys.nu_re(&low_defect.mul(&quad_op));
    let mass_high = sys.nu_re(&ident.sub(high.last()));

    let mut checks = vec![check_le("step-bound", mass_high, 2.0 / (mu * mu) * quad)];

    let mut probes = vec![sys.corner_identity()];
    let mut rng = stream_rng(seed, sys.start(), 3);
    probes.push(random_corner_psd(&mut rng, sys.corner_rank()));
    probes.push(random_corner_psd(&mut rng, sys.corner_rank()));
    let mut worst = 0.0f64;
    for seq in [&low, &high] {
        for m in sys.start()..=sys.stop() {
            let defect = ident.sub(seq.at(m));
            for k in m..sys.stop() {
                let slot = k - sys.start() + 2;
                for corner in &probes {
                    let probe = sys.slot_probe(slot, corner)?;
                    worst = worst.max(sys.nu(&defect.mul(&probe)).norm());
                }
            }
        }
    }
    checks.push(check_residual("future-mass", worst, RESIDUAL_TOL * sys.nu_identity().max(1.0)));

    let pair_mass = sys.nu_re(&low_defect.mul(&sys.pair_probe()));
    let norm2 = sys.norm() * sys.norm();
    checks.push(check_le("chain-link", quad, 2.0 * norm2 * pair_mass));
    checks.push(check_le("amp-step", mass_high, 4.0 / (mu * mu) * norm2 * pair_mass));
    Ok(checks)
}

/// A seeded unit-Frobenius positive corner element.
fn random_corner_psd(rng: &mut ChaCha12Rng, r: usize) -> Operator {
    let mut b = Operator::zeros(r);
    for i in 0..r {
        for j in 0..r {
            b.set(i, j, Complex64::new(gaussian(rng), gaussian(rng)));
        }
    }
    let g = b.gram();
    let n = g.frob_norm();
    if n > 0.0 {
        g.scale(1.0 / n)
    } else {
        Operator::identity(r)
    }
}

/// Verify the structural bullets of the Cuculescu sequence at one threshold:
/// each `R_m` is a projection (`cuc-projection`), sits under its predecessor
/// (`cuc-monotone`), is fixed by the level-`m` expectation (`cuc-adapted`),
/// commutes with the compressed `y_m` (`cuc-commute`), keeps its spectrum
/// below λ (`cuc-cut`), and the removed part sits at or above λ
/// (`cuc-floor`; skipped when nothing was removed).
pub fn verify_projection_chain(sys: &AmplifiedSystem, lambda: f64) -> Result<Vec<Check>> {
    if !(lambda.is_finite() && lambda >= 0.0) {
        return Err(Error::InvalidInput(format!("threshold must be ≥ 0, got {lambda}")));
    }
    let seq = cuculescu(sys, lambda)?;
    let mut proj_res = 0.0f64;
    let mut nested_res = 0.0f64;
    let mut adapted_res = 0.0f64;
    let mut commute_res = 0.0f64;
    let mut cut_top: Option<f64> = None;
    let mut floor_bottom: Option<f64> = None;
    let mut y_scale = 1.0f64;

    for m in sys.start()..=sys.stop() {
        let r = seq.at(m);
        let prev = seq.at(m - 1);
        let y = sys.y(m)?;
        y_scale = y_scale.max(y.max_block_norm());
        adapted_res = adapted_res.max(sys.expect(m, r)?.sub(r).max_block_norm());
        for atom in 0..sys.num_atoms() {
            let b = r.block(atom);
            let pb = prev.block(atom);
            let yb = y.block(atom);
            proj_res = proj_res.max(b.mul(b).sub(b).frob_norm()).max(b.herm_residual());
            nested_res = nested_res.max(pb.mul(b).sub(b).frob_norm());
            let h = pb.mul(yb).mul(pb);
            commute_res = commute_res.max(b.mul(&h).sub(&h.mul(b)).frob_norm());
            if let Some(top) = range_extreme(b, yb, true)? {
                cut_top = Some(cut_top.map_or(top, |c: f64| c.max(top)));
            }
            let removed = pb.sub(b);
            if removed.frob_norm() > 0.5 {
                if let Some(bottom) = range_extreme(&removed, yb, false)? {
                    floor_bottom = Some(floor_bottom.map_or(bottom, |c: f64| c.min(bottom)));
                }
            }
        }
    }

    let skipped = |id| Check { id, lhs: 0.0, rhs: 0.0, status: CheckStatus::Skipped };
    Ok(vec![
        check_residual("cuc-projection", proj_res, RESIDUAL_TOL),
        check_residual("cuc-monotone", nested_res, RESIDUAL_TOL),
        check_residual("cuc-adapted", adapted_res, RESIDUAL_TOL),
        check_residual("cuc-commute", commute_res, RESIDUAL_TOL * y_scale),
        match cut_top {
            Some(top) => check_le("cuc-cut", top, lambda),
            None => skipped("cuc-cut"),
        },
        match floor_bottom {
            Some(bottom) => check_le("cuc-floor", lambda, bottom),
            None => skipped("cuc-floor"),
        },
    ])
}

/// Extreme eigenvalue of `y` compressed to the range of the projection `p`
/// (`None` when the range is trivial).
fn range_extreme(p: &Operator, y: &Operator, want_max: bool) -> Result<Option<f64>> {
    let dec = eig_hermitian(p)?;
    let cols = dec.select_columns(|l| l > 0.5);
    if cols.is_empty() {
        return Ok(None);
    }
    let columns: Vec<Vec<Complex64>> = cols
        .iter()
        .map(|&j| (0..p.dim()).map(|i| dec.vectors.at(i, j)).collect())
        .collect();
    let frame = Rect::from_columns(p.dim(), &columns);
    let cdec = eig_hermitian(&compress(y, &frame))?;
    Ok(if want_max {
        cdec.eigenvalues.last().copied()
    } else {
        cdec.eigenvalues.first().copied()
    })
}

/// Verify that the mass lost by the final projection is non-increasing in the
/// threshold over a strictly increasing grid, and stays inside `[0, ν(Ī)]`.
pub fn verify_mass_monotonicity(sys: &AmplifiedSystem, lambdas: &[f64]) -> Result<Check> {
    if lambdas.len() < 2 {
        return Err(Error::InvalidInput("need at least two thresholds".into()));
    }
    for w in lambdas.windows(2) {
        if !(w[0].is_finite() && w[1].is_finite() && w[0] >= 0.0 && w[1] > w[0]) {
            return Err(Error::InvalidInput(format!(
                "thresholds must be finite, ≥ 0 and strictly increasing, got {w:?}"
            )));
        }
    }
    let ident = sys.identity();
    let mut masses = Vec::with_capacity(lambdas.len());
    for &l in lambdas {
        let seq = cuculescu(sys, l)?;
        masses.push(sys.nu_re(&ident.sub(seq.last())));
    }
    let total = sys.nu_identity();
    let mut violation = 0.0f64;
    for w in masses.windows(2) {
        violation = violation.max(w[1] - w[0]);
    }
    for &m in &masses {
        violation = violation.max(-m).max(m - total);
    }
    Ok(check_le("cuc-mass-monotone", violation, 0.0))
}

// ─── distribution and exponential bounds ──────────────────────────────────────

/// One point of the tail comparison: the τ-mass of the compressed square
/// function at or above λ against `C₀·e^{−λ/(e‖x‖)}·τ(P)`.
#[derive(Clone, Debug)]
pub struct TailReport {
    pub lambda: f64,
    pub tail: f64,
    pub bound: f64,
    pub check: Check,
}

struct CornerSpectrum {
    gammas: Vec<f64>,
    masses: Vec<f64>,
    tau_p: f64,
    norm: f64,
}

/// Spectral data of `(P S² P)^{1/2} / τ(P)^β` on the corner of `proj`:
/// eigenvalues `γ_i` with their τ-masses, plus the matching column norm.
fn corner_spectrum(
    m: &Martingale,
    start: usize,
    beta: f64,
    proj: &Projection,
    family: Family,
) -> Result<CornerSpectrum> {
    if !(beta.is_finite() && beta >= 0.0) {
        return Err(Error::InvalidInput(format!("β must be finite and ≥ 0, got {beta}")));
    }
    let filt = m.filtration();
    let max_start = match family {
        Family::Plain => filt.depth(),
        Family::Conditioned => filt.depth().saturating_sub(1),
    };
    if start == 0 || start > max_start {
        return Err(Error::InvalidInput(format!(
            "start level {start} out of 1..={max_start} for {family:?} family"
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
    require_level_member(filt, start, proj.op(), "corner projection")?;

    let sq = match family {
        Family::Plain => m.square_sum(start)?,
        Family::Conditioned => m.conditioned_square_sum(start + 1)?,
    };
    let frame = frame_from_projection(proj)?;
    let dec = eig_hermitian(&compress(&sq, &frame))?;
    let tau_p = filt.trace().apply_re(proj.op());
    let weights = filt.trace().weights().to_vec();
    let d = proj.dim();
    let r = proj.rank();
    let denom = tau_p.powf(beta);

    let mut gammas = Vec::with_capacity(r);
    let mut masses = Vec::with_capacity(r);
    for c in 0..r {
        gammas.push(dec.eigenvalues[c].max(0.0).sqrt() / denom);
        // τ-mass of the corner eigenvector, read through the ambient frame.
        let mut mass = 0.0;
        for (a, w) in weights.iter().enumerate().take(d) {
            let mut amb = Complex64::new(0.0, 0.0);
            for i in 0..r {
                amb += frame.at(a, i) * dec.vectors.at(i, c);
            }
            mass += w * amb.norm_sqr();
        }
        masses.push(mass);
    }
    let norm = lipschitz_norm(m, beta, family)?.value;
    Ok(CornerSpectrum { gammas, masses, tau_p, norm })
}

/// Verify the tail bound `τ(1_{[λ,∞)}((PS²P)^{1/2}/τ(P)^β)) ≤
/// C₀·e^{−λ/(e‖x‖)}·τ(P)` over a grid of thresholds. `S²` measures
/// `x − x_{start−1}` (plain) or `x − x_start` (conditioned), and `‖x‖` is the
/// matching exact column norm at β.
pub fn verify_distribution_bound(
    m: &Martingale,
    start: usize,
    beta: f64,
    proj: &Projection,
    family: Family,
    lambdas: &[f64],
) -> Result<Vec<TailReport>> {
    if lambdas.is_empty() {
        return Err(Error::InvalidInput("need at least one threshold".into()));
    }
    for &l in lambdas {
        if !(l.is_finite() && l >= 0.0) {
            return Err(Error::InvalidInput(format!("thresholds must be finite and ≥ 0, got {l}")));
        }
    }
    let spec = corner_spectrum(m, start, beta, proj, family)?;
    let c0 = tail_constant();
    let scale = spec.gammas.iter().fold(0.0f64, |acc, g| acc.max(*g));
    let tol = btol(scale);

    let mut reports = Vec::with_capacity(lambdas.len());
    for &lambda in lambdas {
        let tail: f64 = spec
            .gammas
            .iter()
            .zip(&spec.masses)
            .filter(|(g, _)| **g >= lambda - tol)
            .map(|(_, mass)| *mass)
            .sum();
        let bound = if spec.norm > 0.0 {
            c0 * (-lambda / (E * spec.norm)).exp() * spec.tau_p
        } else if lambda > 0.0 {
            // A martingale with zero column norm has zero square function;
            // any tail mass up here is numerical debris, not a counterexample.
            if tail > RESIDUAL_TOL * spec.tau_p.max(1.0) {
                return Err(Error::NumericalFailure(format!(
                    "zero-norm martingale carries tail mass {tail:.3e} at λ = {lambda}"
                )));
            }
            0.0
        } else {
            c0 * spec.tau_p
        };
        reports.push(TailReport { lambda, tail, bound, check: check_le("dist-tail", tail, bound) });
    }
    Ok(reports)
}

/// Verify exponential integrability on the corner: the ν-average of
/// `e^{a·γ}` stays below `1 + a·C₀/(1/(e‖x‖) − a)` for any growth rate
/// `0 < a < 1/(e‖x‖)`.
pub fn verify_exponential_bound(
    m: &Martingale,
    start: usize,
    beta: f64,
    proj: &Projection,
    family: Family,
    a: f64,
) -> Result<Check> {
    if !(a.is_finite() && a > 0.0) {
        return Err(Error::InvalidInput(format!("growth rate must be positive, got {a}")));
    }
    let spec = corner_spectrum(m, start, beta, proj, family)?;
    if spec.norm > 0.0 {
        let critical = 1.0 / (E * spec.norm);
        if a >= critical {
            return Err(Error::InvalidInput(format!(
                "growth rate {a} is not below the critical rate {critical}"
            )));
        }
    }
    let lhs = spec
        .gammas
        .iter()
        .zip(&spec.masses)
        .map(|(g, mass)| mass * (a * g).exp())
        .sum::<f64>()
        / spec.tau_p;
    Ok(check_le("exp-int", lhs, exponential_constant(a, spec.norm)))
}

// ─── moment equivalences ──────────────────────────────────────────────────────

/// Verify the equivalence of the p-moment and Lipschitz norms at β.
///
/// Four directions, each asserted only when sound for the modes at hand:
///
/// * `moment-upper` (p ≥ 2): moment ≤ `e(p·C₀·Γ(p))^{1/p}` · Lipschitz —
///   sound even when the moment value is only a lower bound;
/// * `moment-lower` (p ≥ 2): Lipschitz ≤ moment — needs the exact moment;
/// * `moment-monotone` (p < 2): moment ≤ Lipschitz — asserted for exact
///   moments, where it is an actual two-sided comparison;
/// * `moment-interp` (p < 2): Lipschitz ≤ moment_p^θ · moment_8^{1−θ} with
///   `θ = 3p/(8−p)` — needs both moments exact.
pub fn verify_moment_equivalence(
    m: &Martingale,
    beta: f64,
    p: f64,
    family: Family,
    seed: u64,
) -> Result<Vec<Check>> {
    if !(p.is_finite() && p > 0.0) {
        return Err(Error::InvalidInput(format!("moment exponent must be positive, got {p}")));
    }
    let mom = moment_norm_seeded(m, beta, p, family, seed)?;
    let lip = lipschitz_norm(m, beta, family)?;
    let skipped = |id| Check { id, lhs: 0.0, rhs: 0.0, status: CheckStatus::Skipped };

    let mut checks = Vec::with_capacity(4);
    if p >= 2.0 {
        checks.push(check_le("moment-upper", mom.value, moment_constant(p) * lip.value));
        checks.push(if mom.mode == Mode::Exact {
            check_le("moment-lower", lip.value, mom.value)
        } else {
            skipped("moment-lower")
        });
        checks.push(skipped("moment-monotone"));
        checks.push(skipped("moment-interp"));
    } else {
        checks.push(skipped("moment-upper"));
        checks.push(skipped("moment-lower"));
        checks.push(if mom.mode == Mode::Exact {
            check_le("moment-monotone", mom.value, lip.value)
        } else {
            skipped("moment-monotone")
        });
        let eight = moment_norm_seeded(m, beta, 8.0, family, seed)?;
        checks.push(if mom.mode == Mode::Exact && eight.mode == Mode::Exact {
            let theta = 3.0 * p / (8.0 - p);
            check_le("moment-interp", lip.value, mom.value.powf(theta) * eight.value.powf(1.0 - theta))
        } else {
            skipped("moment-interp")
        });
    }
    Ok(checks)
}

// ─── tests ────────────────────────────────────────────────────────────────────
