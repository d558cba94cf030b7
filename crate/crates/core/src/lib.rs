//! Numerical laboratory for martingale norms over finite-dimensional tracial
//! matrix algebras.
//!
//! The objects here live in `(M_d(C), τ)` for a faithful tracial state `τ`
//! (normalized trace or explicit diagonal weights) equipped with a filtration
//! of unital subalgebras `A_1 ⊆ … ⊆ A_K = M_d` and the trace-preserving
//! conditional expectations `E_n` onto them. On top of that the crate
//! computes:
//!
//! * martingale decompositions, column/row square functions and their
//!   conditioned variants, and Hardy norms (`martingale`);
//! * column BMO and the two Lipschitz families — plain differences measured
//!   against `x_{n-1}` and conditioned blocks measured against `x_n` — with
//!   exact Ky Fan evaluation at exponent 2, subset enumeration on commutative
//!   levels, and a seeded projection search elsewhere (`norms`);
//! * an amplified two-parameter martingale built from a corner projection and
//!   a Rademacher family, its Cuculescu projection sequence, and verifiers
//!   for the distribution, exponential-integrability, and moment forms of the
//!   John–Nirenberg inequality (`jn`);
//! * a scalar dyadic oracle computing the same quantities by pointwise
//!   counting, used to cross-check the matrix path on diagonal embeddings
//!   (`classical`).
//!
//! Everything is deterministic: randomized search paths take explicit seeds,
//! and all numerics run on a self-contained dense complex kernel (`linalg`)
//! with a cyclic Jacobi eigensolver.

pub mod algebra;
pub mod classical;
pub mod jn;
pub mod linalg;
pub mod martingale;
pub mod norms;

/// Crate-wide error type.
#[derive(Debug, thiserror::Error)]
pub enum Error {
    /// A precondition on user-supplied data failed (bad dimension, bad
    /// exponent, non-Hermitian input where Hermitian is required, …).
    #[error("invalid input: {0}")]
    InvalidInput(String),
    /// Two objects that must live in the same algebra do not.
    #[error("dimension mismatch: {0}")]
    DimensionMismatch(String),
    /// An iterative routine failed to converge or produced non-finite values.
    #[error("numerical failure: {0}")]
    NumericalFailure(String),
    /// A size budget (amplified dimension, enumeration cap, depth) was hit.
    #[error("budget exceeded: {0}")]
    BudgetExceeded(String),
}

pub type Result<T> = std::result::Result<T, Error>;
