//! Dense complex linear algebra kernel.
//!
//! Small, self-contained, and tuned for the sizes this crate actually meets
//! (ambient dimension ≤ 4096, eigenproblems ≤ ~128): row-major `Vec<Complex64>`
//! storage, a cyclic Jacobi eigensolver for Hermitian matrices, functional
//! calculus on top of it, and the trace-weighted spectral quantities
//! (Schatten norms, distribution function, generalized singular values,
//! projection lattice operations).

mod calculus;
mod eig;
mod op;
mod trace;
mod values;

pub use calculus::{apply_function, spectral_projection, sqrt_psd, Interval, Projection};
pub use eig::{eig_hermitian, SpectralDecomposition};
pub use op::{compress, lift, Operator, Rect};
pub use trace::TracialState;
pub use values::{
    distribution_lambda, frame_from_projection, proj_meet_join, schatten_norm,
    schatten_norm_of_sqrt, singular_mu,
    singular_values,
};

use num_complex::Complex64;

pub(crate) const CZERO: Complex64 = Complex64 { re: 0.0, im: 0.0 };
pub(crate) const CONE: Complex64 = Complex64 { re: 1.0, im: 0.0 };

/// Default spectral cut tolerance: `1e-9 · max(1, scale)` where `scale` is a
/// norm of the operator being cut. Closed interval endpoints absorb
/// eigenvalues within `btol`, open endpoints repel them.
pub fn btol(scale: f64) -> f64 {
    1e-9 * scale.max(1.0)
}
