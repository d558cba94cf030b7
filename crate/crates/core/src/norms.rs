//! Martingale BMO, Lipschitz, and moment norms with witness projections.
//!
//! All norms here are suprema over levels `n` and projections `e` in the
//! level algebra `A_n` of ratios
//!
//! ```text
//!   ‖(column object at level n)·e‖_p / τ(e)^{β + 1/p}
//! ```
//!
//! with two families of column objects:
//!
//! * **plain** — differences measured against `x_{n-1}`: the level matrix is
//!   `B_n = E_n|x − x_{n-1}|²` and at `p = 2` the norm is the Lipschitz norm
//!   whose β = 0 case is column BMO;
//! * **conditioned** — blocks measured against `x_n` through the conditioned
//!   square function, `B_n = E_n(s_c²(x − x_n)) = Σ_{k>n} E_n|dx_k|²`, maxed
//!   with the extra first-level term `‖E_1(x)‖_∞`.
//!
//! At `p = 2` the supremum over `e` is exact by the Ky Fan maximum principle:
//! `τ(B_n e)` over rank-`r` projections is maximized by the top-`r`
//! eigenprojection, and both filtrations give every rank the uniform τ-weight
//! `2^{-n}`, so a scan over ranks of sorted eigenvalue prefix sums settles the
//! supremum — with the maximizer available as a witness. For `p ≠ 2` the
//! commutative (dyadic) levels are still exact — subset enumeration up to 2^16
//! subsets, and above that the sorted-prefix scan, which is provably optimal
//! for uniform atoms — while noncommutative levels fall back to a seeded
//! projection search that reports a certified lower bound.

use crate::algebra::{Filtration, FiltrationKind};
use crate::linalg::{compress, eig_hermitian, Operator, Projection, Rect, CZERO};
use crate::martingale::Martingale;
use crate::{Error, Result};
use num_complex::Complex64;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha12Rng;

/// Whether a reported value is the norm or only a certified lower bound.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Mode {
    Exact,
    LowerBound,
}

/// How the supremum over projections was evaluated.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Method {
    /// Eigenvalue prefix scan (exact at p = 2 everywhere; exact at all p on
    /// uniform commutative levels).
    KyFan,
    /// Exhaustive subset enumeration on a commutative level.
    Enumeration,
    /// Seeded candidate search with coordinate-descent polish.
    Search,
}

/// Which column family a norm belongs to.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Family {
    Plain,
    Conditioned,
}

/// The projection achieving (or certifying) the reported value.
#[derive(Clone, Debug)]
pub struct Witness {
    /// Level of the filtration the witness lives in.
    pub level: usize,
    /// Ambient projection, an element of `A_level`.
    pub projection: Projection,
    /// True when the value came from the `‖E_1(x)‖_∞` term of the
    /// conditioned family; the projection is then the top spectral
    /// projection of `|E_1(x)|²` in `A_1`.
    pub first_level_term: bool,
}

#[derive(Clone, Debug)]
pub struct NormReport {
    pub value: f64,
    pub mode: Mode,
    pub method: Method,
    pub witness: Option<Witness>,
}

/// Enumeration cap: levels with more atoms than this use the prefix scan.
pub const ENUMERATION_MAX_ATOMS: usize = 16;

/// Seed used by the non-`_seeded` entry points; any fixed value keeps the
/// default path deterministic.
pub const DEFAULT_SEARCH_SEED: u64 = 0x6a09e667f3bcc908;

const RANDOM_CANDIDATES_PER_RANK: usize = 200;
const POLISH_ITERATIONS: usize = 20;

// ─── level matrices ──────────────────────────────────────────────────────────

/// `B_n` for the chosen family (an element of `A_n`).
pub fn level_matrix(m: &Martingale, n: usize, family: Family) -> Result<Operator> {
    match family {
        Family::Plain => {
            let sq = m.square_sum(n)?;
            m.filtration().expect(n, &sq)
        }
        Family::Conditioned => {
            if n >= m.depth() {
                return Err(Error::InvalidInput(format!(
                    "conditioned level matrix needs n < depth, got n = {n}"
                )));
            }
            let sq = m.square_sum(n + 1)?;
            m.filtration().expect(n, &sq)
        }
    }
}

/// Levels contributing to the supremum for the family.
fn family_levels(m: &Martingale, family: Family) -> std::ops::RangeInclusive<usize> {
    match family {
        Family::Plain => 1..=m.depth(),
        Family::Conditioned => 1..=m.depth().saturating_sub(1),
    }
}

// ─── Ky Fan scan ─────────────────────────────────────────────────────────────

/// Best rank and squared objective of `r ↦ (w·Σ_{i<r} λ_i) / (w·r)^{1+2β}`
/// over descending eigenvalues.
fn kyfan_scan(eigs_desc: &[f64], w: f64, beta: f64) -> (usize, f64) {
    let mut best = (1usize, f64::NEG_INFINITY);
    let mut prefix = 0.0;
    for (i, lam) in eigs_desc.iter().enumerate() {
        prefix += lam;
        let r = i + 1;
        let obj = (w * prefix) / (w * r as f64).powf(1.0 + 2.0 * beta);
        if obj > best.1 {
            best = (r, obj);
        }
    }
    (best.0, best.1.max(0.0))
}

/// Eigen-decomposition of a level representation, descending.
fn rep_spectrum_desc(rep: &Operator) -> Result<(Vec<f64>, Operator)> {
    let dec = eig_hermitian(rep)?;
    let m = rep.dim();
    let mut vals = Vec::with_capacity(m);
    let mut vecs = Operator::zeros(m);
    for i in 0..m {
        let src = m - 1 - i; // ascending → descending
        vals.push(dec.eigenvalues[src]);
        for row in 0..m {
            vecs.set(row, i, dec.vectors.at(row, src));
        }
    }
    Ok((vals, vecs))
}

/// Lift the projection onto the top-`r` descending eigencolumns to the
/// ambient algebra.
fn lift_top_r(
    filt: &Filtration,
    n: usize,
    vecs_desc: &Operator,
    r: usize,
) -> Result<Projection> {
    let m = vecs_desc.dim();
    let mut q = Operator::zeros(m);
    for col in 0..r {
        for i in 0..m {
            let vi = vecs_desc.at(i, col);
            if vi == CZERO {
                continue;
            }
            for j in 0..m {
                q.add_at(i, j, vi * vecs_desc.at(j, col).conj());
            }
        }
    }
    let q = q.herm_part();
    let ambient = filt.lift_from_level(n, &q)?;
    let blk = filt.ambient_dim() / filt.level_size(n);
    Ok(Projection::from_op_unchecked(ambient, r * blk))
}

// ─── p = 2 norms ─────────────────────────────────────────────────────────────

/// Column BMO norm `sup_n ‖E_n|x − x_{n-1}|²‖_∞^{1/2}` — the β = 0 Lipschitz
/// norm of the plain family. Exact; the witness is the top spectral
/// projection of the maximizing level matrix.
pub fn bmo_column_norm(m: &Martingale) -> Result<NormReport> {
    lipschitz_norm(m, 0.0, Family::Plain)
}

/// Lipschitz norm of the chosen family at exponent 2:
///
/// * plain: `sup_n sup_e ‖(x−x_{n-1})e‖_2 / τ(e)^{β+1/2}`;
/// * conditioned: same with `‖(x−x_n)e‖_{h_2^c}` and a `‖E_1(x)‖_∞` term.
///
/// Exact for every β ≥ 0 via the Ky Fan scan.
pub fn lipschitz_norm(m: &Martingale, beta: f64, family: Family) -> Result<NormReport> {
    if !beta.is_finite() || beta < 0.0 {
        return Err(Error::InvalidInput(format!("β must be finite and ≥ 0, got {beta}")));
    }
    let filt = m.filtration();
    let mut best: Option<(f64, usize, usize, Operator)> = None; // (obj², n, r, vecs)
    for n in family_levels(m, family) {
        let b = level_matrix(m, n, family)?;
        let rep = filt.compress_to_level(n, &b)?;
        let (vals, vecs) = rep_spectrum_desc(&rep)?;
        let (r, obj2) = kyfan_scan(&vals, filt.level_weight(n), beta);
        if best.as_ref().map_or(true, |(v, ..)| obj2 > *v) {
            best = Some((obj2, n, r, vecs));
        }
    }

    let mut report = match best {
        Some((obj2, n, r, vecs)) => {
            let witness = Witness {
                level: n,
                projection: lift_top_r(filt, n, &vecs, r)?,
                first_level_term: false,
            };
            NormReport {
                value: obj2.sqrt(),
                mode: Mode::Exact,
                method: Method::KyFan,
                witness: Some(witness),
            }
        }
        // Conditioned family at depth 1 has no level terms at all.
        None => NormReport {
            value: 0.0,
            mode: Mode::Exact,
            method: Method::KyFan,
            witness: None,
        },
    };

    if family == Family::Conditioned {
        let (t, w) = first_level_sup(m)?;
        if t > report.value {
            report.value = t;
            report.witness = Some(w);
        }
    }
    Ok(report)
}

/// `‖E_1(x)‖_∞` with its witness: the top spectral projection of `|E_1 x|²`
/// inside `A_1`.
fn first_level_sup(m: &Martingale) -> Result<(f64, Witness)> {
    let filt = m.filtration();
    let x1 = m.level(1);
    let rep = filt.compress_to_level(1, &x1)?;
    let gram = rep.gram();
    let (vals, vecs) = rep_spectrum_desc(&gram)?;
    let top = vals.first().copied().unwrap_or(0.0).max(0.0);
    // Multiplicity of the top singular value, up to spectral jitter.
    let tol = crate::linalg::btol(top);
    let mult = vals.iter().take_while(|v| **v >= top - tol).count().max(1);
    let witness = Witness {
        level: 1,
        projection: lift_top_r(filt, 1, &vecs, mult)?,
        first_level_term: true,
    };
    Ok((top.sqrt(), witness))
}

// ─── general p ───────────────────────────────────────────────────────────────

/// Moment norm with the crate-default search seed.
pub fn moment_norm(m: &Martingale, beta: f64, p: f64, family: Family) -> Result<NormReport> {
    moment_norm_seeded(m, beta, p, family, DEFAULT_SEARCH_SEED)
}

/// Moment norm `sup_n sup_e ‖(column object)·e‖_p / τ(e)^{β+1/p}`.
///
/// `p = 2` routes to the exact Lipschitz evaluation. Other exponents are
/// exact on dyadic filtrations (enumeration or prefix scan per level) and a
/// seeded-search lower bound on tensor filtrations.
pub fn moment_norm_seeded(
    m: &Martingale,
    beta: f64,
    p: f64,
    family: Family,
    seed: u64,
) -> Result<NormReport> {
    if !beta.is_finite() || beta < 0.0 {
        return Err(Error::InvalidInput(format!("β must be finite and ≥ 0, got {beta}")));
    }
    if !(p.is_finite() && p > 0.0) {
        return Err(Error::InvalidInput(format!("moment exponent must be in (0,∞), got {p}")));
    }
    if (p - 2.0).abs() < 1e-12 {
        return lipschitz_norm(m, beta, family);
    }
    let mut value = f64::NEG_INFINITY;
    let mut witness: Option<Witness> = None;
    let mut method = Method::KyFan;
    let mut mode = Mode::Exact;
    let mut any_level = false;

    for n in family_levels(m, family) {
        any_level = true;
        let (lv, lw, lmethod, lmode) = level_moment_sup(m, n, beta, p, family, seed)?;
        if lv > value {
            value = lv;
            witness = Some(lw);
            method = lmethod;
        }
        if lmode == Mode::LowerBound {
            mode = Mode::LowerBound;
        }
    }
    if !any_level {
        value = 0.0;
    }

    if family == Family::Conditioned {
        let (t, w) = first_level_sup(m)?;
        if t > value {
            value = t;
            witness = Some(w);
        }
    }
    Ok(NormReport { value: value.max(0.0), mode, method, witness })
}

/// The square of the column object measured at level `n`.
fn column_square(m: &Martingale, n: usize, family: Family) -> Result<Operator> {
    match family {
        Family::Plain => m.square_sum(n),
        Family::Conditioned => m.conditioned_square_sum(n + 1),
    }
}

/// Supremum over projections of `A_n` at exponent `p` for one level.
fn level_moment_sup(
    m: &Martingale,
    n: usize,
    beta: f64,
    p: f64,
    family: Family,
    seed: u64,
) -> Result<(f64, Witness, Method, Mode)> {
    let filt = m.filtration();
    let w2 = column_square(m, n, family)?;
    match filt.kind() {
        FiltrationKind::Dyadic => {
            let (value, rep_diag, method) = dyadic_level_sup(filt, n, &w2, beta, p)?;
            let ambient = filt.lift_from_level(n, &Operator::from_real_diag(&rep_diag))?;
            let rank: usize = rep_diag.iter().filter(|v| **v > 0.5).count()
                * (filt.ambient_dim() / filt.level_size(n));
            let witness = Witness {
                level: n,
                projection: Projection::from_op_unchecked(ambient, rank),
                first_level_term: false,
            };
            Ok((value, witness, method, Mode::Exact))
        }
        FiltrationKind::Tensor => {
            let (value, proj) = tensor_level_search(m, n, &w2, beta, p, seed)?;
            let witness = Witness { level: n, projection: proj, first_level_term: false };
            Ok((value, witness, Method::Search, Mode::LowerBound))
        }
    }
}

/// Exact dyadic supremum: per-block masses of `q^p`, then subset enumeration
/// (≤ 2^16 subsets) or the sorted-prefix scan. Returns the 0/1 indicator over
/// blocks as the representation diagonal.
fn dyadic_level_sup(
    filt: &Filtration,
    n: usize,
    w2: &Operator,
    beta: f64,
    p: f64,
) -> Result<(f64, Vec<f64>, Method)> {
    let blocks = filt.level_size(n);
    let blk = filt.ambient_dim() / blocks;
    let d = filt.ambient_dim();
    let point_weight = 1.0 / d as f64;
    // blockmass[b] = Σ_{ω ∈ block b} τ(ω-point) · q_ω^p
    let mut blockmass = vec![0.0f64; blocks];
    for b in 0..blocks {
        for u in 0..blk {
            let q2 = w2.at(b * blk + u, b * blk + u).re.max(0.0);
            blockmass[b] += point_weight * q2.powf(p / 2.0);
        }
    }
    let tau_exp = beta * p + 1.0; // τ(e)^{(β+1/p)·p}
    let block_tau = 1.0 / blocks as f64;

    if blocks <= ENUMERATION_MAX_ATOMS {
        let mut best = (0.0f64, 0usize);
        for mask in 1usize..(1 << blocks) {
            let mut mass = 0.0;
            let mut count = 0usize;
            for (b, bm) in blockmass.iter().enumerate() {
                if mask & (1 << b) != 0 {
                    mass += bm;
                    count += 1;
                }
            }
            let objp = mass / (block_tau * count as f64).powf(tau_exp);
            if objp > best.0 {
                best = (objp, mask);
            }
        }
        let diag: Vec<f64> =
            (0..blocks).map(|b| if best.1 & (1 << b) != 0 { 1.0 } else { 0.0 }).collect();
        Ok((best.0.powf(1.0 / p), diag, Method::Enumeration))
    } else {
        // Uniform atoms: for fixed cardinality the objective is increasing in
        // every included block mass, so the optimum is a top-r prefix.
        let mut order: Vec<usize> = (0..blocks).collect();
        order.sort_by(|&a, &b| blockmass[b].partial_cmp(&blockmass[a]).unwrap());
        let mut best = (0.0f64, 1usize);
        let mut prefix = 0.0;
        for (i, &b) in order.iter().enumerate() {
            prefix += blockmass[b];
            let r = i + 1;
            let objp = prefix / (block_tau * r as f64).powf(tau_exp);
            if objp > best.0 {
                best = (objp, r);
            }
        }
        let mut diag = vec![0.0f64; blocks];
        for &b in order.iter().take(best.1) {
            diag[b] = 1.0;
        }
        Ok((best.0.powf(1.0 / p), diag, Method::KyFan))
    }
}

// ─── tensor search ───────────────────────────────────────────────────────────

/// Orthonormal columns spanning the rank-`r` candidate in the level
/// representation `M_m`.
struct RepFrame {
    cols: Vec<Vec<Complex64>>, // each of length m
}

impl RepFrame {
    fn rank(&self) -> usize {
        self.cols.len()
    }
}

/// Evaluate the p-objective of a representation-space frame: lift to the
/// ambient algebra, compress the column square to the range, and read the
/// Schatten mass off the spectrum.
fn frame_objective(
    filt: &Filtration,
    n: usize,
    w2: &Operator,
    frame: &RepFrame,
    beta: f64,
    p: f64,
) -> Result<f64> {
    let mrep = filt.level_size(n);
    let blk = filt.ambient_dim() / mrep;
    let d = filt.ambient_dim();
    let r = frame.rank();
    // Ambient frame of e = Σ v v† ⊗ 1: columns v_j ⊗ δ_u.
    let mut cols = Vec::with_capacity(r * blk);
    for v in &frame.cols {
        for u in 0..blk {
            let mut col = vec![CZERO; d];
            for (a, va) in v.iter().enumerate() {
                col[a * blk + u] = *va;
            }
            cols.push(col);
        }
    }
    let vr = Rect::from_columns(d, &cols);
    let g = compress(w2, &vr);
    let dec = eig_hermitian(&g)?;
    let point_weight = 1.0 / d as f64;
    let mass: f64 =
        dec.eigenvalues.iter().map(|l| point_weight * l.max(0.0).powf(p / 2.0)).sum();
    let tau_e = (r as f64) / (mrep as f64);
    Ok(mass.powf(1.0 / p) / tau_e.powf(beta + 1.0 / p))
}

pub(crate) fn gaussian(rng: &mut ChaCha12Rng) -> f64 {
    // Box–Muller; rejects the measure-zero u = 0.
    let mut u: f64 = rng.gen();
    while u <= f64::MIN_POSITIVE {
        u = rng.gen();
    }
    let v: f64 = rng.gen();
    (-2.0 * u.ln()).sqrt() * (2.0 * std::f64::consts::PI * v).cos()
}

fn haar_frame(rng: &mut ChaCha12Rng, m: usize, r: usize) -> RepFrame {
    let mut cols: Vec<Vec<Complex64>> = (0..r)
        .map(|_| (0..m).map(|_| Complex64::new(gaussian(rng), gaussian(rng))).collect())
        .collect();
    gram_schmidt(&mut cols);
    RepFrame { cols }
}

/// Modified Gram–Schmidt, re-drawing nothing: near-dependent columns are
/// perturbed deterministically by coordinate vectors.
fn gram_schmidt(cols: &mut [Vec<Complex64>]) {
    let m = cols.first().map(|c| c.len()).unwrap_or(0);
    for j in 0..cols.len() {
        for i in 0..j {
            let mut dot = CZERO;
            for a in 0..m {
                dot += cols[i][a].conj() * cols[j][a];
            }
            for a in 0..m {
                let prev = cols[i][a];
                cols[j][a] -= dot * prev;
            }
        }
        let mut norm: f64 = cols[j].iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt();
        if norm < 1e-12 {
            // Degenerate draw: fall back to a coordinate direction not yet
            // spanned (j < m always holds here).
            for a in 0..m {
                cols[j][a] = if a == j { Complex64::new(1.0, 0.0) } else { CZERO };
            }
            for i in 0..j {
                let mut dot = CZERO;
                for a in 0..m {
                    dot += cols[i][a].conj() * cols[j][a];
                }
                for a in 0..m {
                    let prev = cols[i][a];
                    cols[j][a] -= dot * prev;
                }
            }
            norm = cols[j].iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt();
        }
        for a in 0..m {
            cols[j][a] /= norm;
        }
    }
}

/// Mix a level/rank pair into the global seed for a reproducible per-stream
/// RNG (splitmix-style diffusion).
pub(crate) fn stream_rng(seed: u64, level: usize, rank: usize) -> ChaCha12Rng {
    let mut z = seed
        ^ (level as u64).wrapping_mul(0x9e3779b97f4a7c15)
        ^ (rank as u64).wrapping_mul(0xd1b54a32d192ed03);
    z = (z ^ (z >> 30)).wrapping_mul(0xbf58476d1ce4e5b9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94d049bb133111eb);
    ChaCha12Rng::seed_from_u64(z ^ (z >> 31))
}

/// Draw a reproducible random projection in `A_level`: a Haar frame on a
/// tensor level, a random nonempty block subset on a dyadic one.
pub fn random_level_projection(
    filt: &Filtration,
    level: usize,
    seed: u64,
) -> Result<Projection> {
    if level == 0 || level > filt.depth() {
        return Err(Error::InvalidInput(format!(
            "projection level {level} outside filtration of depth {}",
            filt.depth()
        )));
    }
    let mrep = filt.level_size(level);
    let blk = filt.ambient_dim() / mrep;
    let mut rng = stream_rng(seed, level, 0);
    match filt.kind() {
        FiltrationKind::Tensor => {
            let r = rng.gen_range(1..=mrep);
            let frame = haar_frame(&mut rng, mrep, r);
            let mut rep = Operator::zeros(mrep);
            for v in &frame.cols {
                for a in 0..mrep {
                    for b in 0..mrep {
                        rep.add_at(a, b, v[a] * v[b].conj());
                    }
                }
            }
            let op = filt.lift_from_level(level, &rep)?;
            Ok(Projection::from_op_unchecked(op, r * blk))
        }
        FiltrationKind::Dyadic => {
            let mut diag = vec![0.0; mrep];
            let mut picked = 0usize;
            for slot in diag.iter_mut() {
                if rng.gen::<bool>() {
                    *slot = 1.0;
                    picked += 1;
                }
            }
            if picked == 0 {
                diag[rng.gen_range(0..mrep)] = 1.0;
                picked = 1;
            }
            let op = filt.lift_from_level(level, &Operator::from_real_diag(&diag))?;
            Ok(Projection::from_op_unchecked(op, picked * blk))
        }
    }
}

/// Candidate search over projections of a tensor level: spectral and Ky Fan
/// projections of the p = 2 level matrix, seeded Haar-random frames per rank,
/// then plane-rotation polish on the best frame found.
fn tensor_level_search(
    m: &Martingale,
    n: usize,
    w2: &Operator,
    beta: f64,
    p: f64,
    seed: u64,
) -> Result<(f64, Projection)> {
    let filt = m.filtration();
    let mrep = filt.level_size(n);
    // Spectral structure of the p = 2 level matrix guides the candidates.
    let b2 = filt.expect(n, w2)?;
    let rep2 = filt.compress_to_level(n, &b2)?;
    let (_, vecs_desc) = rep_spectrum_desc(&rep2)?;

    let eval = |frame: &RepFrame| frame_objective(filt, n, w2, frame, beta, p);
    let mut best_val = f64::NEG_INFINITY;
    let mut best_frame: Option<RepFrame> = None;

    for r in 1..=mrep {
        // Ky Fan eigenprojection of the level matrix at this rank.
        let kyfan = RepFrame {
            cols: (0..r).map(|j| (0..mrep).map(|i| vecs_desc.at(i, j)).collect()).collect(),
        };
        let v = eval(&kyfan)?;
        if v > best_val {
            best_val = v;
            best_frame = Some(kyfan);
        }
        // Seeded Haar-random candidates.
        let mut rng = stream_rng(seed, n, r);
        for _ in 0..RANDOM_CANDIDATES_PER_RANK {
            let frame = haar_frame(&mut rng, mrep, r);
            let v = eval(&frame)?;
            if v > best_val {
                best_val = v;
                best_frame = Some(frame);
            }
        }
    }

    // Coordinate-descent polish: plane rotations between the frame and its
    // orthogonal complement in the representation space.
    let mut frame = best_frame.expect("at least one candidate evaluated");
    let r = frame.rank();
    if r < mrep {
        let mut rng = stream_rng(seed ^ 0xa5a5_5a5a_1234_9876, n, r);
        let mut complement = complement_frame(&frame, mrep);
        let angles = [0.3f64, -0.3, 0.1, -0.1, 0.03, -0.03, 0.01, -0.01];
        let mut budget = 400usize;
        'outer: for _ in 0..POLISH_ITERATIONS {
            for _ in 0..(2 * r) {
                if budget == 0 {
                    break 'outer;
                }
                let a = rng.gen_range(0..r);
                let b = rng.gen_range(0..complement.len());
                for th in angles {
                    if budget == 0 {
                        break 'outer;
                    }
                    budget -= 1;
                    let (c, s) = (th.cos(), th.sin());
                    let mut trial = frame.cols.clone();
                    for i in 0..mrep {
                        trial[a][i] = frame.cols[a][i] * c + complement[b][i] * s;
                    }
                    let cand = RepFrame { cols: trial };
                    let v = eval(&cand)?;
                    if v > best_val + 1e-14 {
                        // Keep the rotation and update the complement column.
                        for i in 0..mrep {
                            let old = frame.cols[a][i];
                            frame.cols[a][i] = old * c + complement[b][i] * s;
                            complement[b][i] = complement[b][i] * c - old * s;
                        }
                        best_val = v;
                        break;
                    }
                }
            }
        }
    }

    // Assemble the ambient witness from the final frame.
    let mut q = Operator::zeros(mrep);
    for col in &frame.cols {
        for i in 0..mrep {
            if col[i] == CZERO {
                continue;
            }
            for j in 0..mrep {
                q.add_at(i, j, col[i] * col[j].conj());
            }
        }
    }
    let ambient = filt.lift_from_level(n, &q.herm_part())?;
    let blk = filt.ambient_dim() / mrep;
    Ok((best_val, Projection::from_op_unchecked(ambient, r * blk)))
}

/// Orthonormal basis of the orthogonal complement of a frame in `C^m`.
fn complement_frame(frame: &RepFrame, m: usize) -> Vec<Vec<Complex64>> {
    let mut cols = frame.cols.clone();
    let mut out = Vec::new();
    for j in 0..m {
        // Project e_j off everything collected so far; keep if nonzero.
        let mut cand: Vec<Complex64> =
            (0..m).map(|i| if i == j { Complex64::new(1.0, 0.0) } else { CZERO }).collect();
        for c in &cols {
            let mut dot = CZERO;
            for a in 0..m {
                dot += c[a].conj() * cand[a];
            }
            for a in 0..m {
                cand[a] -= dot * c[a];
            }
        }
        let norm: f64 = cand.iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt();
        if norm > 1e-8 {
            for z in cand.iter_mut() {
                *z /= norm;
            }
            cols.push(cand.clone());
            out.push(cand);
        }
        if cols.len() == m {
            break;
        }
    }
    out
}

/// Public entry to the per-level supremum machinery (exact on dyadic levels,
/// certified lower bound on tensor levels).
pub fn projection_sup_search(
    m: &Martingale,
    n: usize,
    beta: f64,
    p: f64,
    family: Family,
    seed: u64,
) -> Result<(f64, Projection, Mode)> {
    if !family_levels(m, family).contains(&n) {
        return Err(Error::InvalidInput(format!("level {n} not admissible for this family")));
    }
    let (value, witness, _, mode) = level_moment_sup(m, n, beta, p, family, seed)?;
    Ok((value, witness.projection, mode))
}

/// Re-evaluate a witness projection against the defining objective at
/// exponent `p`: `‖(column object)·e‖_p / τ(e)^{β+1/p}`, or the Rayleigh
/// quotient `(τ(|E_1x|² e)/τ(e))^{1/2}` for a first-level witness.
pub fn witness_objective(
    m: &Martingale,
    beta: f64,
    p: f64,
    family: Family,
    witness: &Witness,
) -> Result<f64> {
    let filt = m.filtration();
    let tau = filt.trace();
    let e = witness.projection.op();
    let tau_e = tau.apply_re(e);
    if tau_e <= 0.0 {
        return Err(Error::InvalidInput("witness projection has zero trace".into()));
    }
    if witness.first_level_term {
        let x1 = m.level(1);
        let val = tau.apply_re(&x1.gram().mul(e)) / tau_e;
        return Ok(val.max(0.0).sqrt());
    }
    let w2 = column_square(m, witness.level, family)?;
    let sandwiched = e.mul(&w2).mul(e);
    let dec = eig_hermitian(&sandwiched.herm_part())?;
    let masses = tau.eigen_masses(&dec);
    let mass: f64 = dec
        .eigenvalues
        .iter()
        .zip(&masses)
        .map(|(l, w)| w * l.max(0.0).powf(p / 2.0))
        .sum();
    Ok(mass.powf(1.0 / p) / tau_e.powf(beta + 1.0 / p))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::algebra::{make_dyadic_filtration, make_tensor_filtration};
    use crate::martingale::martingale_from_final;

    fn probe(d: usize, salt: u64) -> Operator {
        let mut state = 0x13198a2e03707344u64 ^ salt.wrapping_mul(0x9e3779b97f4a7c15);
        let mut next = || {
            state = state.wrapping_mul(6364136223846793005).wrapping_add(1442695040888963407);
            ((state >> 11) as f64 / (1u64 << 53) as f64) * 2.0 - 1.0
        };
        let data = (0..d * d).map(|_| Complex64::new(next(), next())).collect();
        Operator::from_vec(d, data).unwrap()
    }

    fn hermitian_probe(d: usize, salt: u64) -> Operator {
        probe(d, salt).herm_part()
    }

    #[test]
    fn bmo_matches_direct_sup_of_level_matrices() {
        let filt = make_tensor_filtration(3).unwrap();
        let m = martingale_from_final(&hermitian_probe(8, 21), filt.clone()).unwrap();
        let report = bmo_column_norm(&m).unwrap();
        let mut direct: f64 = 0.0;
        for n in 1..=3 {
            let b = level_matrix(&m, n, Family::Plain).unwrap();
            let dec = eig_hermitian(&b).unwrap();
            direct = direct.max(dec.sup_abs());
        }
        assert!((report.value - direct.sqrt()).abs() < 1e-11);
        assert_eq!(report.mode, Mode::Exact);
        // The witness reproduces the value under re-evaluation.
        let w = report.witness.as_ref().unwrap();
        let re = witness_objective(&m, 0.0, 2.0, Family::Plain, w).unwrap();
        assert!((re - report.value).abs() < 1e-10);
    }

    #[test]
    fn kyfan_beats_random_projections() {
        // The scan value dominates τ(B e)/τ(e)^{1+2β} over many random
        // projections of every rank, and the witness achieves it.
        let filt = make_tensor_filtration(2).unwrap();
        let m = martingale_from_final(&probe(4, 5), filt.clone()).unwrap();
        let beta = 0.25;
        let report = lipschitz_norm(&m, beta, Family::Plain).unwrap();
        let tau = filt.trace();
        let mut rng = ChaCha12Rng::seed_from_u64(99);
        for _ in 0..500 {
            let n = 1 + (rng.gen::<usize>() % 2);
            let mrep = filt.level_size(n);
            let r = 1 + (rng.gen::<usize>() % mrep);
            let frame = haar_frame(&mut rng, mrep, r);
            let mut q = Operator::zeros(mrep);
            for col in &frame.cols {
                for i in 0..mrep {
                    for j in 0..mrep {
                        q.add_at(i, j, col[i] * col[j].conj());
                    }
                }
            }
            let e = filt.lift_from_level(n, &q.herm_part()).unwrap();
            let b = level_matrix(&m, n, Family::Plain).unwrap();
            let tau_e = tau.apply_re(&e);
            let val = (tau.apply_re(&b.mul(&e)) / tau_e.powf(1.0 + 2.0 * beta)).max(0.0).sqrt();
            assert!(val <= report.value + 1e-8, "random projection beat the scan");
        }
    }

    #[test]
    fn lipschitz_norm_is_homogeneous() {
        let filt = make_tensor_filtration(2).unwrap();
        let x = probe(4, 31);
        let m1 = martingale_from_final(&x, filt.clone()).unwrap();
        let m2 = martingale_from_final(&x.scale(3.5), filt).unwrap();
        for family in [Family::Plain, Family::Conditioned] {
            let a = lipschitz_norm(&m1, 0.5, family).unwrap().value;
            let b = lipschitz_norm(&m2, 0.5, family).unwrap().value;
            assert!((b - 3.5 * a).abs() < 1e-9 * a.max(1.0));
        }
    }

    #[test]
    fn conditioned_first_level_term_engages() {
        // x ∈ A_1 itself: all conditioned level matrices vanish and the norm
        // is exactly ‖E_1 x‖_∞ = ‖x‖_∞.
        let filt = make_tensor_filtration(2).unwrap();
        let mut rep = Operator::zeros(2);
        rep.set(0, 0, Complex64::new(2.0, 0.0));
        rep.set(1, 1, Complex64::new(-0.5, 0.0));
        let x = filt.lift_from_level(1, &rep).unwrap();
        let m = martingale_from_final(&x, filt).unwrap();
        let report = lipschitz_norm(&m, 0.25, Family::Conditioned).unwrap();
        assert!((report.value - 2.0).abs() < 1e-12);
        let w = report.witness.unwrap();
        assert!(w.first_level_term);
        assert_eq!(w.level, 1);
        let re = witness_objective(&m, 0.25, 2.0, Family::Conditioned, &w).unwrap();
        assert!((re - 2.0).abs() < 1e-10);
    }

    #[test]
    fn dyadic_enumeration_and_prefix_scan_agree() {
        // Same level evaluated both ways must give the same exact value.
        let filt = make_dyadic_filtration(3).unwrap();
        let diag: Vec<f64> = (0..8).map(|i| ((i * 29 % 13) as f64) / 4.0 - 1.0).collect();
        let m = martingale_from_final(&Operator::from_real_diag(&diag), filt.clone()).unwrap();
        for n in 1..=3usize {
            for p in [0.5, 1.0, 3.0] {
                for beta in [0.0, 0.5] {
                    let w2 = column_square(&m, n, Family::Plain).unwrap();
                    let (enum_v, _, meth) = dyadic_level_sup(&filt, n, &w2, beta, p).unwrap();
                    assert_eq!(meth, Method::Enumeration);
                    // Force the prefix path by re-running the scan branch.
                    let blocks = filt.level_size(n);
                    let blk = filt.ambient_dim() / blocks;
                    let d = filt.ambient_dim();
                    let mut blockmass = vec![0.0f64; blocks];
                    for b in 0..blocks {
                        for u in 0..blk {
                            let q2 = w2.at(b * blk + u, b * blk + u).re.max(0.0);
                            blockmass[b] += q2.powf(p / 2.0) / d as f64;
                        }
                    }
                    blockmass.sort_by(|a, b| b.partial_cmp(a).unwrap());
                    let block_tau = 1.0 / blocks as f64;
                    let mut best = 0.0f64;
                    let mut prefix = 0.0;
                    for (i, bm) in blockmass.iter().enumerate() {
                        prefix += bm;
                        let objp =
                            prefix / (block_tau * (i + 1) as f64).powf(beta * p + 1.0);
                        best = best.max(objp);
                    }
                    let prefix_v = best.powf(1.0 / p);
                    assert!(
                        (enum_v - prefix_v).abs() < 1e-12 * enum_v.max(1.0),
                        "enumeration {enum_v} vs prefix {prefix_v} at n={n}, p={p}, β={beta}"
                    );
                }
            }
        }
    }

    #[test]
    fn moment_p2_equals_lipschitz() {
        let filt = make_tensor_filtration(2).unwrap();
        let m = martingale_from_final(&probe(4, 77), filt).unwrap();
        let a = moment_norm(&m, 0.25, 2.0, Family::Plain).unwrap();
        let b = lipschitz_norm(&m, 0.25, Family::Plain).unwrap();
        assert!((a.value - b.value).abs() < 1e-13);
        assert_eq!(a.mode, Mode::Exact);
    }

    #[test]
    fn tensor_search_is_deterministic_sound_and_dominates_its_candidates() {
        let filt = make_tensor_filtration(2).unwrap();
        let x = probe(4, 45);
        let m = martingale_from_final(&x, filt.clone()).unwrap();
        let p = 4.0;
        let beta = 0.25;
        let report = moment_norm_seeded(&m, beta, p, Family::Plain, 17).unwrap();
        assert_eq!(report.mode, Mode::LowerBound);
        assert_eq!(report.method, Method::Search);
        // Deterministic: same seed, same bits.
        let again = moment_norm_seeded(&m, beta, p, Family::Plain, 17).unwrap();
        assert_eq!(report.value.to_bits(), again.value.to_bits());
        // Witness re-evaluation reproduces the reported value: the value is a
        // genuine lower bound achieved by an explicit projection.
        let w = report.witness.as_ref().unwrap();
        let re = witness_objective(&m, beta, p, Family::Plain, w).unwrap();
        assert!((re - report.value).abs() < 1e-9 * report.value.max(1.0));
        // Crude sound upper bound: ‖Q e‖_p ≤ ‖Q‖_∞ τ(e)^{1/p} gives
        // obj ≤ ‖Q‖_∞ / τ(e)^β ≤ ‖Q‖_∞ · m^β over every admissible level.
        let mut upper: f64 = 0.0;
        for n in 1..=2usize {
            let w2 = column_square(&m, n, Family::Plain).unwrap();
            let dec = eig_hermitian(&w2).unwrap();
            let qsup = dec.sup_abs().max(0.0).sqrt();
            upper = upper.max(qsup * (filt.level_size(n) as f64).powf(beta));
        }
        assert!(report.value <= upper + 1e-10, "search value above the a-priori bound");
        // The p = 2 Ky Fan witness is among the candidates, so the search
        // value must dominate its p-objective.
        let ky = lipschitz_norm(&m, beta, Family::Plain).unwrap();
        let kw = ky.witness.as_ref().unwrap();
        let ky_at_p = witness_objective(&m, beta, p, Family::Plain, kw).unwrap();
        assert!(report.value >= ky_at_p - 1e-10);
    }

    #[test]
    fn moment_norm_rejects_bad_exponents() {
        let filt = make_tensor_filtration(1).unwrap();
        let m = martingale_from_final(&probe(2, 1), filt).unwrap();
        assert!(moment_norm(&m, 0.0, 0.0, Family::Plain).is_err());
        assert!(moment_norm(&m, -0.1, 1.0, Family::Plain).is_err());
        assert!(moment_norm(&m, 0.0, f64::INFINITY, Family::Plain).is_err());
    }

    #[test]
    fn zero_martingale_all_norms_zero() {
        let filt = make_tensor_filtration(2).unwrap();
        let m = martingale_from_final(&Operator::zeros(4), filt).unwrap();
        assert_eq!(bmo_column_norm(&m).unwrap().value, 0.0);
        assert_eq!(lipschitz_norm(&m, 0.5, Family::Conditioned).unwrap().value, 0.0);
        assert_eq!(moment_norm(&m, 0.0, 1.0, Family::Plain).unwrap().value, 0.0);
    }
}
