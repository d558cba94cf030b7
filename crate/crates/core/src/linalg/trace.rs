//! Tracial states on `M_d(C)`: diagonal weights summing to the total mass.

use super::eig::SpectralDecomposition;
use super::Operator;
use crate::{Error, Result};
use num_complex::Complex64;

/// A tracial positive functional `τ(x) = Σ_i w_i x_ii` with `w_i ≥ 0`.
///
/// The normalized trace is `w_i = 1/d`. Filtration-compatible traces in this
/// crate are always of this diagonal form.
#[derive(Clone, Debug)]
pub struct TracialState {
    weights: Vec<f64>,
}

impl TracialState {
    /// The normalized trace `tr/d`.
    pub fn normalized(dim: usize) -> Self {
        TracialState { weights: vec![1.0 / dim as f64; dim] }
    }

    pub fn from_weights(weights: Vec<f64>) -> Result<Self> {
        if weights.is_empty() {
            return Err(Error::InvalidInput("empty weight vector".into()));
        }
        if !weights.iter().all(|w| w.is_finite() && *w >= 0.0) {
            return Err(Error::InvalidInput("trace weights must be finite and ≥ 0".into()));
        }
        Ok(TracialState { weights })
    }

    #[inline]
    pub fn dim(&self) -> usize {
        self.weights.len()
    }

    #[inline]
    pub fn weight(&self, i: usize) -> f64 {
        self.weights[i]
    }

    pub fn weights(&self) -> &[f64] {
        &self.weights
    }

    /// `τ(1)` — 1 for a state, but kept general for corner restrictions.
    pub fn total_mass(&self) -> f64 {
        self.weights.iter().sum()
    }

    pub fn apply(&self, a: &Operator) -> Complex64 {
        assert_eq!(a.dim(), self.dim(), "trace/operator dimension mismatch");
        (0..self.dim()).map(|i| a.at(i, i) * self.weights[i]).sum()
    }

    pub fn apply_re(&self, a: &Operator) -> f64 {
        self.apply(a).re
    }

    /// The GNS inner product `⟨a, b⟩ = τ(a† b)`, computed without forming the
    /// product.
    pub fn inner(&self, a: &Operator, b: &Operator) -> Complex64 {
        assert_eq!(a.dim(), b.dim(), "operator dimensions differ");
        assert_eq!(a.dim(), self.dim(), "trace/operator dimension mismatch");
        let d = self.dim();
        let mut s = Complex64::new(0.0, 0.0);
        // (a†b)_jj = Σ_k conj(a_kj)·b_kj
        for j in 0..d {
            let mut col = Complex64::new(0.0, 0.0);
            for k in 0..d {
                col += a.at(k, j).conj() * b.at(k, j);
            }
            s += col * self.weights[j];
        }
        s
    }

    /// `‖a‖_2 = τ(a†a)^{1/2}`.
    pub fn norm2(&self, a: &Operator) -> f64 {
        self.inner(a, a).re.max(0.0).sqrt()
    }

    /// τ-masses of the eigenlines of a spectral decomposition:
    /// `m_i = Σ_j w_j |V_ji|²`. They sum to the total mass.
    pub fn eigen_masses(&self, dec: &SpectralDecomposition) -> Vec<f64> {
        let d = self.dim();
        assert_eq!(dec.vectors.dim(), d, "decomposition dimension mismatch");
        (0..d)
            .map(|i| (0..d).map(|j| self.weights[j] * dec.vectors.at(j, i).norm_sqr()).sum())
            .collect()
    }
}
