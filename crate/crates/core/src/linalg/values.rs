//! Trace-weighted spectral quantities: Schatten norms, the distribution
//! function of |x|, generalized singular values, and lattice operations on
//! projections.

use super::{eig_hermitian, Operator, Projection, Rect, TracialState};
use crate::{Error, Result};

/// Singular values of `a` with their τ-masses, sorted descending by value.
///
/// Computed from the spectrum of `a†a`; the masses are the τ-weights of the
/// corresponding eigenlines and sum to `τ(1)`.
pub fn singular_values(a: &Operator, tau: &TracialState) -> Result<(Vec<f64>, Vec<f64>)> {
    if a.dim() != tau.dim() {
        return Err(Error::DimensionMismatch(format!(
            "operator dim {} vs trace dim {}",
            a.dim(),
            tau.dim()
        )));
    }
    let gram = a.gram();
    let dec = eig_hermitian(&gram)?;
    let masses = tau.eigen_masses(&dec);
    let mut pairs: Vec<(f64, f64)> = dec
        .eigenvalues
        .iter()
        .zip(masses)
        .map(|(l, m)| (l.max(0.0).sqrt(), m))
        .collect();
    pairs.sort_by(|x, y| y.0.partial_cmp(&x.0).unwrap());
    Ok(pairs.into_iter().unzip())
}

/// Schatten norm `‖a‖_p = τ(|a|^p)^{1/p}`, `0 < p < ∞` (a quasi-norm below
/// p = 1), or the largest singular value for `p = ∞`.
pub fn schatten_norm(a: &Operator, p: f64, tau: &TracialState) -> Result<f64> {
    if p.is_nan() || p <= 0.0 {
        return Err(Error::InvalidInput(format!("Schatten exponent must be > 0, got {p}")));
    }
    let (svals, masses) = singular_values(a, tau)?;
    if p.is_infinite() {
        return Ok(svals.first().copied().unwrap_or(0.0));
    }
    // Fractional powers amplify eigensolver roundoff into visible mass (a true
    // zero reported as 1e-16 contributes 1e-4 at p = 1/4), so singular values
    // negligible against the largest count as exact zeros here.
    let cut = svals.first().copied().unwrap_or(0.0) * 1e-12;
    let sum: f64 = svals
        .iter()
        .zip(&masses)
        .filter(|(s, _)| **s > cut)
        .map(|(s, m)| m * s.powf(p))
        .sum();
    Ok(sum.powf(1.0 / p))
}

/// Schatten norm `‖g^{1/2}‖_p` straight from the spectrum of a PSD operator.
///
/// Taking the square root as an operator and re-diagonalizing its Gram matrix
/// lifts solver debris from 1e-16 relative up to 1e-8 relative, which
/// fractional exponents then blow into visible mass; one eigendecomposition
/// of `g` with a relative floor avoids that entirely.
pub fn schatten_norm_of_sqrt(g: &Operator, p: f64, tau: &TracialState) -> Result<f64> {
    if p.is_nan() || p <= 0.0 {
        return Err(Error::InvalidInput(format!("Schatten exponent must be > 0, got {p}")));
    }
    let dec = eig_hermitian(g)?;
    let top = dec.eigenvalues.last().copied().unwrap_or(0.0).max(0.0);
    if p.is_infinite() {
        return Ok(top.sqrt());
    }
    let masses = tau.eigen_masses(&dec);
    let cut = top * 1e-12;
    let sum: f64 = dec
        .eigenvalues
        .iter()
        .zip(&masses)
        .filter(|(l, _)| **l > cut)
        .map(|(l, m)| m * l.powf(p / 2.0))
        .sum();
    Ok(sum.powf(1.0 / p))
}

/// Distribution function `λ_t(a) = τ(1_{(t,∞)}(|a|))`: the τ-mass of singular
/// values strictly exceeding `t`. Right-continuous and non-increasing in `t`.
pub fn distribution_lambda(a: &Operator, t: f64, tau: &TracialState) -> Result<f64> {
    if t.is_nan() {
        return Err(Error::InvalidInput("distribution threshold is NaN".into()));
    }
    let (svals, masses) = singular_values(a, tau)?;
    Ok(svals.iter().zip(&masses).filter(|(s, _)| **s > t).map(|(_, m)| m).sum())
}

/// Generalized singular value `μ_t(a) = inf{ s ≥ 0 : λ_s(a) ≤ t }`.
///
/// With the descending singular values `s_1 ≥ s_2 ≥ …` carrying cumulative
/// masses `c_1 ≤ c_2 ≤ …`, this is the step function taking value `s_k` on
/// `[c_{k-1}, c_k)` and 0 from total mass onward.
pub fn singular_mu(a: &Operator, t: f64, tau: &TracialState) -> Result<f64> {
    if t.is_nan() || t < 0.0 {
        return Err(Error::InvalidInput(format!("μ_t needs t ≥ 0, got {t}")));
    }
    let (svals, masses) = singular_values(a, tau)?;
    let mut cum = 0.0;
    for (s, m) in svals.iter().zip(&masses) {
        cum += m;
        if t < cum {
            return Ok(*s);
        }
    }
    Ok(0.0)
}

/// Orthonormal frame spanning the range of a projection (columns = eigenvectors
/// with eigenvalue above 1/2).
pub fn frame_from_projection(p: &Projection) -> Result<Rect> {
    let dec = eig_hermitian(p.op())?;
    let cols = dec.select_columns(|l| l > 0.5);
    if cols.len() != p.rank() {
        return Err(Error::NumericalFailure(format!(
            "projection rank {} but {} eigenvalues above 1/2",
            p.rank(),
            cols.len()
        )));
    }
    let columns: Vec<Vec<_>> = cols
        .iter()
        .map(|&j| (0..p.dim()).map(|i| dec.vectors.at(i, j)).collect())
        .collect();
    Ok(Rect::from_columns(p.dim(), &columns))
}

/// Lattice meet `p ∧ q` (projection onto range(p) ∩ range(q)) and join
/// `p ∨ q` (projection onto range(p) + range(q)).
///
/// The meet is the kernel of `(1−p) + (1−q)`: an eigenvalue of that sum is 0
/// exactly on the common range and at least `1 − cos θ` off it (θ the
/// principal angle), so the kernel is detected with a small tolerance rather
/// than a midpoint threshold — midpoints misclassify non-commuting pairs with
/// shallow angles. The join comes from De Morgan: `p ∨ q = 1 − (1−p)∧(1−q)`,
/// i.e. the complement of the kernel of `p + q`.
pub fn proj_meet_join(p: &Projection, q: &Projection) -> Result<(Projection, Projection)> {
    if p.dim() != q.dim() {
        return Err(Error::DimensionMismatch(format!(
            "projection dims {} vs {}",
            p.dim(),
            q.dim()
        )));
    }
    let kernel_projection = |sum: &Operator| -> Result<(Operator, usize)> {
        let dec = eig_hermitian(sum)?;
        let ktol = 1e-9 * dec.sup_abs().max(1.0);
        let rank = dec.eigenvalues.iter().filter(|l| l.abs() <= ktol).count();
        let op = if rank == 0 {
            Operator::zeros(sum.dim())
        } else {
            dec.reconstruct(|l| if l.abs() <= ktol { 1.0 } else { 0.0 })
        };
        Ok((op, rank))
    };

    let pc = p.complement();
    let qc = q.complement();
    let (meet_op, meet_rank) = kernel_projection(&pc.op().add(qc.op()))?;
    let (join_ker_op, join_ker_rank) = kernel_projection(&p.op().add(q.op()))?;
    let join_op = Operator::identity(p.dim()).sub(&join_ker_op);
    Ok((
        Projection::from_op_unchecked(meet_op, meet_rank),
        Projection::from_op_unchecked(join_op, p.dim() - join_ker_rank),
    ))
}

#[cfg(test)]
mod tests {
    use super::*;
    use num_complex::Complex64;

    #[test]
    fn schatten_norms_of_a_fixed_diagonal() {
        // diag(3, 4) under the normalized trace:
        //   p=1 → (3+4)/2 = 3.5, p=2 → ((9+16)/2)^{1/2}, p=∞ → 4.
        let a = Operator::from_real_diag(&[3.0, -4.0]);
        let tau = TracialState::normalized(2);
        assert!((schatten_norm(&a, 1.0, &tau).unwrap() - 3.5).abs() < 1e-14);
        assert!(
            (schatten_norm(&a, 2.0, &tau).unwrap() - 3.5355339059327378).abs() < 1e-13
        );
        assert!((schatten_norm(&a, f64::INFINITY, &tau).unwrap() - 4.0).abs() < 1e-14);
        // Quasi-norm range works too: p = 1/2 → ((√3+2)/2)².
        let expected = ((3.0f64.sqrt() + 2.0) / 2.0).powi(2);
        assert!((schatten_norm(&a, 0.5, &tau).unwrap() - expected).abs() < 1e-13);
        assert!(schatten_norm(&a, 0.0, &tau).is_err());
    }

    #[test]
    fn sqrt_schatten_agrees_with_two_step_path_and_ignores_debris() {
        // g = diag(9, 4, 1): ‖g^{1/2}‖_p over the normalized trace.
        let g = Operator::from_real_diag(&[9.0, 4.0, 1.0]);
        let tau = TracialState::normalized(3);
        for p in [0.5, 1.0, 2.0, 3.0] {
            let direct = schatten_norm_of_sqrt(&g, p, &tau).unwrap();
            let expected = ((3.0f64.powf(p) + 2.0f64.powf(p) + 1.0) / 3.0).powf(1.0 / p);
            assert!((direct - expected).abs() < 1e-12, "p = {p}");
        }
        assert!((schatten_norm_of_sqrt(&g, f64::INFINITY, &tau).unwrap() - 3.0).abs() < 1e-14);
        // Rank-deficient with solver-scale debris: the floor keeps quasi-norm
        // exponents from amplifying 1e-16 into visible mass.
        let noisy = Operator::from_real_diag(&[4.0, 1e-16, -1e-16]);
        let got = schatten_norm_of_sqrt(&noisy, 0.5, &tau).unwrap();
        let expected = (2.0f64.sqrt() / 3.0).powi(2);
        assert!((got - expected).abs() < 1e-12);
    }

    #[test]
    fn distribution_steps_of_diag_3_1() {
        let a = Operator::from_real_diag(&[3.0, 1.0]);
        let tau = TracialState::normalized(2);
        let lam = |t: f64| distribution_lambda(&a, t, &tau).unwrap();
        assert!((lam(0.5) - 1.0).abs() < 1e-15);
        assert!((lam(1.0) - 0.5).abs() < 1e-15); // strict: s > 1 keeps only 3
        assert!((lam(2.9) - 0.5).abs() < 1e-15);
        assert!(lam(3.0).abs() < 1e-15);
    }

    #[test]
    fn mu_steps_of_diag_3_1() {
        let a = Operator::from_real_diag(&[3.0, 1.0]);
        let tau = TracialState::normalized(2);
        let mu = |t: f64| singular_mu(&a, t, &tau).unwrap();
        assert!((mu(0.0) - 3.0).abs() < 1e-15);
        assert!((mu(0.49) - 3.0).abs() < 1e-15);
        assert!((mu(0.5) - 1.0).abs() < 1e-15);
        assert!((mu(0.99) - 1.0).abs() < 1e-15);
        assert!(mu(1.0).abs() < 1e-15);
        assert!(mu(7.0).abs() < 1e-15);
    }

    #[test]
    fn lambda_and_mu_are_inverse_steps() {
        // λ_s(a) ≤ t ⟺ μ_t(a) ≤ s at non-breakpoints, checked on a weighted
        // trace with a repeated singular value.
        let a = Operator::from_real_diag(&[2.0, 2.0, 5.0, 0.5]);
        let tau = TracialState::from_weights(vec![0.1, 0.2, 0.3, 0.4]).unwrap();
        for &t in &[0.05, 0.15, 0.35, 0.65, 0.95] {
            let m = singular_mu(&a, t, &tau).unwrap();
            // mass strictly above m is ≤ t, mass at ≥ m−ε exceeds t
            assert!(distribution_lambda(&a, m, &tau).unwrap() <= t + 1e-12);
            if m > 0.0 {
                assert!(distribution_lambda(&a, m - 1e-9, &tau).unwrap() > t);
            }
        }
    }

    #[test]
    fn meet_join_of_commuting_projections() {
        let p = Projection::try_from_op(Operator::from_real_diag(&[1.0, 1.0, 0.0]), 1e-12)
            .unwrap();
        let q = Projection::try_from_op(Operator::from_real_diag(&[0.0, 1.0, 1.0]), 1e-12)
            .unwrap();
        let (meet, join) = proj_meet_join(&p, &q).unwrap();
        assert_eq!(meet.rank(), 1);
        assert_eq!(join.rank(), 3);
        assert!((meet.op().at(1, 1).re - 1.0).abs() < 1e-12);
    }

    #[test]
    fn meet_join_of_a_shallow_angle_pair() {
        // p = span(e1), q = span((e1+e2)/√2): distinct lines, so the meet is 0
        // and the join is everything — even though (1−p)+(1−q) has an
        // eigenvalue 1−√2/2 ≈ 0.29 below any midpoint threshold.
        let p = Projection::try_from_op(Operator::from_real_diag(&[1.0, 0.0]), 1e-12).unwrap();
        let half = Complex64::new(0.5, 0.0);
        let q_op = Operator::from_vec(2, vec![half, half, half, half]).unwrap();
        let q = Projection::try_from_op(q_op, 1e-12).unwrap();
        let (meet, join) = proj_meet_join(&p, &q).unwrap();
        assert_eq!(meet.rank(), 0);
        assert_eq!(join.rank(), 2);
        assert!(join.op().sub(&Operator::identity(2)).frob_norm() < 1e-10);
        // Kaplansky trace identity τ(p − p∧q) = τ(p∨q − q).
        let tau = TracialState::normalized(2);
        let lhs = tau.apply_re(&p.op().sub(meet.op()));
        let rhs = tau.apply_re(&join.op().sub(q.op()));
        assert!((lhs - rhs).abs() < 1e-10);
    }

    #[test]
    fn frame_spans_projection_range() {
        let p_op = Operator::from_vec(
            2,
            vec![
                Complex64::new(0.5, 0.0),
                Complex64::new(0.0, 0.5),
                Complex64::new(0.0, -0.5),
                Complex64::new(0.5, 0.0),
            ],
        )
        .unwrap();
        let p = Projection::try_from_op(p_op, 1e-12).unwrap();
        assert_eq!(p.rank(), 1);
        let v = frame_from_projection(&p).unwrap();
        assert_eq!((v.rows(), v.cols()), (2, 1));
        assert!(v.isometry_residual() < 1e-12);
        // V V† must reproduce the projection.
        let vvt = super::super::lift(&Operator::identity(1), &v);
        assert!(vvt.sub(p.op()).frob_norm() < 1e-12);
    }

    #[test]
    fn schatten_norm_matches_distribution_integral() {
        // ‖a‖_p^p = p ∫_0^∞ t^{p-1} λ_t dt; for step functions the integral is
        // an exact finite sum over the gaps between consecutive thresholds.
        let a = Operator::from_real_diag(&[0.7, 2.0, 2.0, 3.1]);
        let tau = TracialState::from_weights(vec![0.4, 0.1, 0.3, 0.2]).unwrap();
        let p = 1.7;
        let norm = schatten_norm(&a, p, &tau).unwrap();
        let mut thresholds = vec![0.0, 0.7, 2.0, 3.1];
        thresholds.dedup();
        let mut integral = 0.0;
        for w in thresholds.windows(2) {
            let lam = distribution_lambda(&a, w[0], &tau).unwrap();
            integral += lam * (w[1].powf(p) - w[0].powf(p));
        }
        assert!((norm.powf(p) - integral).abs() < 1e-12);
    }
}
