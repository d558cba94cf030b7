//! Randomized property checks for the algebraic core.
//!
//! Each block states an identity or inequality that must hold for every
//! admissible input — norm axioms, conditional-expectation structure,
//! distribution-function duality, martingale telescoping — and lets proptest
//! hunt for counterexamples over random operators and filtrations.

use std::sync::Arc;

use ncjn_core::algebra::{make_dyadic_filtration, make_tensor_filtration, Filtration};
use ncjn_core::classical::DyadicMartingale;
use ncjn_core::linalg::{
    distribution_lambda, schatten_norm, schatten_norm_of_sqrt, singular_mu, sqrt_psd, Operator,
};
use ncjn_core::martingale::{martingale_from_final, HardyKind};
use ncjn_core::norms::{bmo_column_norm, lipschitz_norm, Family};
use num_complex::Complex64;
use proptest::prelude::*;

// ─── strategies ──────────────────────────────────────────────────────────────

/// Complex square matrix of the given dimension with entries in the unit box.
fn arb_op(d: usize) -> impl Strategy<Value = Operator> {
    proptest::collection::vec(-1.0f64..1.0, 2 * d * d).prop_map(move |v| {
        let data: Vec<Complex64> = v.chunks(2).map(|c| Complex64::new(c[0], c[1])).collect();
        Operator::from_vec(d, data).expect("shape fixed by construction")
    })
}

/// A pair of same-dimension matrices, dimension drawn from 2..=5.
fn arb_op_pair() -> impl Strategy<Value = (Operator, Operator)> {
    (2usize..=5).prop_flat_map(|d| (arb_op(d), arb_op(d)))
}

/// Filtration selector (two dyadic, two tensor) plus a matching raw buffer.
fn arb_filt_data() -> impl Strategy<Value = (usize, Vec<f64>, usize)> {
    (0usize..4).prop_flat_map(|k| {
        let d = filt_dim(k);
        (Just(k), proptest::collection::vec(-1.0f64..1.0, 2 * d * d), 0usize..64)
    })
}

fn filt_dim(k: usize) -> usize {
    [8, 16, 4, 8][k]
}

fn build_filt(k: usize) -> Arc<Filtration> {
    match k {
        0 => make_dyadic_filtration(3),
        1 => make_dyadic_filtration(4),
        2 => make_tensor_filtration(2),
        _ => make_tensor_filtration(3),
    }
    .expect("desk-scale filtrations always build")
}

fn to_op(d: usize, v: &[f64]) -> Operator {
    let data: Vec<Complex64> = v.chunks(2).map(|c| Complex64::new(c[0], c[1])).collect();
    Operator::from_vec(d, data).expect("shape fixed by construction")
}

// ─── Schatten norms ──────────────────────────────────────────────────────────

proptest! {
    #![proptest_config(ProptestConfig::with_cases(48))]

    /// Triangle inequality at p ≥ 1 and absolute homogeneity at every p.
    #[test]
    fn schatten_norm_axioms((a, b) in arb_op_pair(), c in -3.0f64..3.0) {
        let tau = ncjn_core::linalg::TracialState::normalized(a.dim());
        for p in [1.0, 2.0, 4.0, f64::INFINITY] {
            let na = schatten_norm(&a, p, &tau).unwrap();
            let nb = schatten_norm(&b, p, &tau).unwrap();
            let nsum = schatten_norm(&a.add(&b), p, &tau).unwrap();
            prop_assert!(nsum <= na + nb + 1e-9 * (1.0 + na + nb), "p = {p}");
        }
        for p in [0.5, 1.0, 2.0, f64::INFINITY] {
            let na = schatten_norm(&a, p, &tau).unwrap();
            let nc = schatten_norm(&a.scale(c), p, &tau).unwrap();
            prop_assert!((nc - c.abs() * na).abs() <= 1e-9 * (1.0 + na), "p = {p}");
        }
    }

    /// `‖a‖_p = ‖(a†a)^{1/2}‖_p`: the one-diagonalization path through the
    /// Gram matrix reproduces the singular-value route.
    #[test]
    fn schatten_norm_matches_gram_route((a, _) in arb_op_pair()) {
        let tau = ncjn_core::linalg::TracialState::normalized(a.dim());
        for p in [0.5, 1.0, 2.0, 3.0] {
            let direct = schatten_norm(&a, p, &tau).unwrap();
            let via_gram = schatten_norm_of_sqrt(&a.gram(), p, &tau).unwrap();
            prop_assert!(
                (direct - via_gram).abs() <= 1e-8 * (1.0 + direct),
                "p = {p}: {direct} vs {via_gram}"
            );
        }
    }

    /// `sqrt_psd` squares back to its input.
    #[test]
    fn sqrt_psd_squares_back((a, _) in arb_op_pair()) {
        let g = a.gram();
        let root = sqrt_psd(&g).unwrap();
        let back = root.mul(&root);
        prop_assert!(back.sub(&g).frob_norm() <= 1e-9 * (1.0 + g.frob_norm()));
    }

    /// Distribution/μ duality: both are non-increasing, and the tail mass
    /// strictly above `μ_t(a)` never exceeds `t`.
    #[test]
    fn distribution_mu_duality((a, _) in arb_op_pair(), t in 0.0f64..1.0, s in 0.0f64..4.0) {
        let tau = ncjn_core::linalg::TracialState::normalized(a.dim());
        let lam = |x: f64| distribution_lambda(&a, x, &tau).unwrap();
        let mu = |x: f64| singular_mu(&a, x, &tau).unwrap();
        prop_assert!(lam(s) >= lam(s + 0.5) - 1e-15);
        prop_assert!(mu(t) >= mu(t + 0.25) - 1e-15);
        prop_assert!(lam(mu(t)) <= t + 1e-12);
    }
}

// ─── conditional expectations and martingales ────────────────────────────────

proptest! {
    #![proptest_config(ProptestConfig::with_cases(24))]

    /// E_n preserves the trace, contracts L²(τ), and obeys the tower rule.
    #[test]
    fn expectation_structure((k, v, sel) in arb_filt_data()) {
        let filt = build_filt(k);
        let g = to_op(filt_dim(k), &v).herm_part();
        let tau = filt.trace();
        let depth = filt.depth();
        let n = 1 + sel % depth;
        let eg = filt.expect(n, &g).unwrap();
        let scale = 1.0 + g.frob_norm();
        prop_assert!((tau.apply_re(&eg) - tau.apply_re(&g)).abs() <= 1e-10 * scale);
        prop_assert!(tau.norm2(&eg) <= tau.norm2(&g) + 1e-10 * scale);
        let m = 1 + sel % n;
        let em_en = filt.expect(m, &eg).unwrap();
        let em = filt.expect(m, &g).unwrap();
        prop_assert!(em_en.sub(&em).frob_norm() <= 1e-10 * scale);
    }

    /// Differences telescope back to the final element, and the square sums
    /// shrink as the start index grows.
    #[test]
    fn martingale_telescoping((k, v, sel) in arb_filt_data()) {
        let filt = build_filt(k);
        let x = to_op(filt_dim(k), &v);
        let mart = martingale_from_final(&x, filt.clone()).unwrap();
        let mut acc = Operator::zeros(x.dim());
        for j in 1..=mart.depth() {
            acc = acc.add(mart.diff(j));
        }
        let scale = 1.0 + x.frob_norm();
        prop_assert!(acc.sub(mart.final_op()).frob_norm() <= 1e-10 * scale);
        let tau = filt.trace();
        let start = 1 + sel % mart.depth();
        if start < mart.depth() {
            let early = tau.apply_re(&mart.square_sum(start).unwrap());
            let late = tau.apply_re(&mart.square_sum(start + 1).unwrap());
            prop_assert!(late <= early + 1e-12 * scale);
        }
    }

    /// Hardy and Lipschitz norms are absolutely homogeneous in the input.
    #[test]
    fn norm_homogeneity((k, v, sel) in arb_filt_data(), c in 0.1f64..4.0) {
        let filt = build_filt(k);
        let x = to_op(filt_dim(k), &v);
        let mart = martingale_from_final(&x, filt.clone()).unwrap();
        let scaled = martingale_from_final(&x.scale(c), filt.clone()).unwrap();
        let p = [1.0, 2.0][sel % 2];
        let h = mart.hardy_norm(p, HardyKind::ConditionedColumn).unwrap();
        let hc = scaled.hardy_norm(p, HardyKind::ConditionedColumn).unwrap();
        prop_assert!((hc - c * h).abs() <= 1e-9 * (1.0 + hc));
        let beta = [0.0, 0.5][sel % 2];
        let family = [Family::Plain, Family::Conditioned][(sel / 2) % 2];
        let l = lipschitz_norm(&mart, beta, family).unwrap().value;
        let lc = lipschitz_norm(&scaled, beta, family).unwrap().value;
        prop_assert!((lc - c * l).abs() <= 1e-9 * (1.0 + lc));
    }
}

// ─── classical dyadic model ──────────────────────────────────────────────────

proptest! {
    #![proptest_config(ProptestConfig::with_cases(24))]

    /// The scalar dyadic model and its matrix embedding agree on BMO, and the
    /// strict tail is non-increasing.
    #[test]
    fn classical_matches_matrix_embedding(
        depth in 2usize..=4,
        raw in proptest::collection::vec(-2.0f64..2.0, 16),
    ) {
        let values: Vec<f64> = raw.iter().copied().cycle().take(1 << depth).collect();
        let dy = DyadicMartingale::new(depth, values).unwrap();
        let mart = dy.to_matrix_martingale().unwrap();
        let cls = dy.bmo_norm();
        let mat = bmo_column_norm(&mart).unwrap().value;
        prop_assert!((cls - mat).abs() <= 1e-9 * (1.0 + cls));
        let smax = dy.square_function(1).iter().cloned().fold(0.0f64, f64::max);
        prop_assert!(dy.strict_tail(1, 0.25 * smax) >= dy.strict_tail(1, 0.75 * smax) - 1e-15);
    }
}
