//! Square complex matrices (`Operator`) and rectangular frames (`Rect`).

use super::{CONE, CZERO};
use crate::{Error, Result};
use num_complex::Complex64;

/// A dense element of `M_d(C)`, stored row-major.
#[derive(Clone, PartialEq)]
pub struct Operator {
    dim: usize,
    data: Vec<Complex64>,
}

impl std::fmt::Debug for Operator {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        writeln!(f, "Operator({}x{})", self.dim, self.dim)?;
        for i in 0..self.dim.min(8) {
            let row: Vec<String> = (0..self.dim.min(8))
                .map(|j| format!("{:.3}{:+.3}i", self.at(i, j).re, self.at(i, j).im))
                .collect();
            writeln!(f, "  [{}]", row.join(", "))?;
        }
        Ok(())
    }
}

impl Operator {
    pub fn zeros(dim: usize) -> Self {
        Operator { dim, data: vec![CZERO; dim * dim] }
    }

    pub fn identity(dim: usize) -> Self {
        let mut m = Self::zeros(dim);
        for i in 0..dim {
            m.data[i * dim + i] = CONE;
        }
        m
    }

    /// Build from a row-major buffer; the length must be `dim²`.
    pub fn from_vec(dim: usize, data: Vec<Complex64>) -> Result<Self> {
        if data.len() != dim * dim {
            return Err(Error::DimensionMismatch(format!(
                "operator buffer has {} entries, expected {}",
                data.len(),
                dim * dim
            )));
        }
        if !data.iter().all(|z| z.re.is_finite() && z.im.is_finite()) {
            return Err(Error::InvalidInput("non-finite matrix entry".into()));
        }
        Ok(Operator { dim, data })
    }

    pub fn from_diag(diag: &[Complex64]) -> Self {
        let dim = diag.len();
        let mut m = Self::zeros(dim);
        for (i, z) in diag.iter().enumerate() {
            m.data[i * dim + i] = *z;
        }
        m
    }

    pub fn from_real_diag(diag: &[f64]) -> Self {
        let dim = diag.len();
        let mut m = Self::zeros(dim);
        for (i, v) in diag.iter().enumerate() {
            m.data[i * dim + i] = Complex64::new(*v, 0.0);
        }
        m
    }

    #[inline]
    pub fn dim(&self) -> usize {
        self.dim
    }

    #[inline]
    pub fn at(&self, i: usize, j: usize) -> Complex64 {
        self.data[i * self.dim + j]
    }

    #[inline]
    pub fn set(&mut self, i: usize, j: usize, z: Complex64) {
        self.data[i * self.dim + j] = z;
    }

    #[inline]
    pub fn add_at(&mut self, i: usize, j: usize, z: Complex64) {
        self.data[i * self.dim + j] += z;
    }

    pub fn data(&self) -> &[Complex64] {
        &self.data
    }

    pub fn diag(&self) -> Vec<Complex64> {
        (0..self.dim).map(|i| self.at(i, i)).collect()
    }

    pub fn add(&self, rhs: &Operator) -> Operator {
        assert_eq!(self.dim, rhs.dim, "operator dimensions differ");
        let data = self.data.iter().zip(&rhs.data).map(|(a, b)| a + b).collect();
        Operator { dim: self.dim, data }
    }

    pub fn sub(&self, rhs: &Operator) -> Operator {
        assert_eq!(self.dim, rhs.dim, "operator dimensions differ");
        let data = self.data.iter().zip(&rhs.data).map(|(a, b)| a - b).collect();
        Operator { dim: self.dim, data }
    }

    pub fn scale(&self, c: f64) -> Operator {
        let data = self.data.iter().map(|a| a * c).collect();
        Operator { dim: self.dim, data }
    }

    pub fn scale_complex(&self, c: Complex64) -> Operator {
        let data = self.data.iter().map(|a| a * c).collect();
        Operator { dim: self.dim, data }
    }

    /// Matrix product. Rows of `self` that hit an exactly-zero entry skip the
    /// inner loop, so products against diagonal or block-sparse operators run
    /// in O(d²·nnz-per-row) instead of O(d³).
    pub fn mul(&self, rhs: &Operator) -> Operator {
        assert_eq!(self.dim, rhs.dim, "operator dimensions differ");
        let d = self.dim;
        let mut out = vec![CZERO; d * d];
        for i in 0..d {
            for k in 0..d {
                let a = self.data[i * d + k];
                if a == CZERO {
                    continue;
                }
                let row = &rhs.data[k * d..(k + 1) * d];
                let dst = &mut out[i * d..(i + 1) * d];
                for j in 0..d {
                    dst[j] += a * row[j];
                }
            }
        }
        Operator { dim: d, data: out }
    }

    pub fn adjoint(&self) -> Operator {
        let d = self.dim;
        let mut out = vec![CZERO; d * d];
        for i in 0..d {
            for j in 0..d {
                out[j * d + i] = self.data[i * d + j].conj();
            }
        }
        Operator { dim: d, data: out }
    }

    /// `self† · self` — always positive semidefinite.
    pub fn gram(&self) -> Operator {
        self.adjoint().mul(self)
    }

    /// Hermitian part `(A + A†)/2`.
    pub fn herm_part(&self) -> Operator {
        let at = self.adjoint();
        self.add(&at).scale(0.5)
    }

    pub fn frob_norm(&self) -> f64 {
        self.data.iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt()
    }

    /// Frobenius distance to the adjoint: 0 iff Hermitian.
    pub fn herm_residual(&self) -> f64 {
        let d = self.dim;
        let mut s = 0.0;
        for i in 0..d {
            for j in 0..d {
                let z = self.data[i * d + j] - self.data[j * d + i].conj();
                s += z.norm_sqr();
            }
        }
        s.sqrt()
    }

    pub fn is_hermitian(&self, tol: f64) -> bool {
        self.herm_residual() <= tol
    }

    /// Plain (unweighted, unnormalized) trace.
    pub fn trace_plain(&self) -> Complex64 {
        (0..self.dim).map(|i| self.at(i, i)).sum()
    }
}

// ─── rectangular frames ─────────────────────────────────────────────────────

/// A dense `rows × cols` complex matrix, used for isometries onto subspaces
/// (columns orthonormal) when compressing operators to a corner or a range.
#[derive(Clone)]
pub struct Rect {
    rows: usize,
    cols: usize,
    data: Vec<Complex64>, // row-major
}

impl Rect {
    pub fn zeros(rows: usize, cols: usize) -> Self {
        Rect { rows, cols, data: vec![CZERO; rows * cols] }
    }

    /// Assemble from column vectors of length `rows`.
    pub fn from_columns(rows: usize, columns: &[Vec<Complex64>]) -> Self {
        let cols = columns.len();
        let mut r = Rect::zeros(rows, cols);
        for (j, col) in columns.iter().enumerate() {
            assert_eq!(col.len(), rows, "column length mismatch");
            for i in 0..rows {
                r.data[i * cols + j] = col[i];
            }
        }
        r
    }

    #[inline]
    pub fn rows(&self) -> usize {
        self.rows
    }

    #[inline]
    pub fn cols(&self) -> usize {
        self.cols
    }

    #[inline]
    pub fn at(&self, i: usize, j: usize) -> Complex64 {
        self.data[i * self.cols + j]
    }

    #[inline]
    pub fn set(&mut self, i: usize, j: usize, z: Complex64) {
        self.data[i * self.cols + j] = z;
    }

    pub fn column(&self, j: usize) -> Vec<Complex64> {
        (0..self.rows).map(|i| self.at(i, j)).collect()
    }

    /// Largest deviation of `self† self` from the identity — 0 for an isometry.
    pub fn isometry_residual(&self) -> f64 {
        let mut worst = 0.0f64;
        for a in 0..self.cols {
            for b in 0..self.cols {
                let mut s = CZERO;
                for i in 0..self.rows {
                    s += self.at(i, a).conj() * self.at(i, b);
                }
                let target = if a == b { CONE } else { CZERO };
                worst = worst.max((s - target).norm());
            }
        }
        worst
    }
}

/// Compression `V† A V` of a `d × d` operator by a `d × r` frame.
pub fn compress(a: &Operator, v: &Rect) -> Operator {
    assert_eq!(a.dim(), v.rows(), "frame rows must match operator dimension");
    let d = v.rows();
    let r = v.cols();
    // W = A·V  (d × r)
    let mut w = vec![CZERO; d * r];
    for i in 0..d {
        for k in 0..d {
            let aik = a.at(i, k);
            if aik == CZERO {
                continue;
            }
            for j in 0..r {
                w[i * r + j] += aik * v.at(k, j);
            }
        }
    }
    // out = V†·W  (r × r)
    let mut out = Operator::zeros(r);
    for i in 0..r {
        for k in 0..d {
            let vki = v.at(k, i).conj();
            if vki == CZERO {
                continue;
            }
            for j in 0..r {
                out.add_at(i, j, vki * w[k * r + j]);
            }
        }
    }
    out
}

/// Lift `V B V†` of an `r × r` operator back to the ambient `d × d` algebra.
pub fn lift(b: &Operator, v: &Rect) -> Operator {
    assert_eq!(b.dim(), v.cols(), "frame cols must match operator dimension");
    let d = v.rows();
    let r = v.cols();
    // W = V·B  (d × r)
    let mut w = vec![CZERO; d * r];
    for i in 0..d {
        for k in 0..r {
            let vik = v.at(i, k);
            if vik == CZERO {
                continue;
            }
            for j in 0..r {
                w[i * r + j] += vik * b.at(k, j);
            }
        }
    }
    // out = W·V†  (d × d)
    let mut out = Operator::zeros(d);
    for i in 0..d {
        for k in 0..r {
            let wik = w[i * r + k];
            if wik == CZERO {
                continue;
            }
            for j in 0..d {
                out.add_at(i, j, wik * v.at(j, k).conj());
            }
        }
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;

    fn c(re: f64, im: f64) -> Complex64 {
        Complex64::new(re, im)
    }

    #[test]
    fn mul_matches_hand_product() {
        let a = Operator::from_vec(2, vec![c(1.0, 0.0), c(2.0, 1.0), c(0.0, -1.0), c(3.0, 0.0)])
            .unwrap();
        let b = Operator::from_vec(2, vec![c(0.0, 1.0), c(1.0, 0.0), c(2.0, 0.0), c(0.0, 0.0)])
            .unwrap();
        let p = a.mul(&b);
        // row 0: [1*(i) + (2+i)*2, 1*1 + 0] = [4 + 3i, 1]
        assert_eq!(p.at(0, 0), c(4.0, 3.0));
        assert_eq!(p.at(0, 1), c(1.0, 0.0));
        // row 1: [(-i)*i + 3*2, (-i)*1] = [7, -i]
        assert_eq!(p.at(1, 0), c(7.0, 0.0));
        assert_eq!(p.at(1, 1), c(0.0, -1.0));
    }

    #[test]
    fn adjoint_involutive_and_antimultiplicative() {
        let a = Operator::from_vec(2, vec![c(1.0, 2.0), c(0.5, -1.0), c(2.0, 0.0), c(0.0, 3.0)])
            .unwrap();
        let b = Operator::from_vec(2, vec![c(0.0, 1.0), c(1.0, 1.0), c(2.0, -2.0), c(1.0, 0.0)])
            .unwrap();
        assert!(a.adjoint().adjoint().sub(&a).frob_norm() < 1e-15);
        let lhs = a.mul(&b).adjoint();
        let rhs = b.adjoint().mul(&a.adjoint());
        assert!(lhs.sub(&rhs).frob_norm() < 1e-14);
    }

    #[test]
    fn compress_and_lift_roundtrip_on_coordinate_frame() {
        // Frame of two coordinate vectors out of C^3: compression picks the
        // corresponding 2x2 principal submatrix; lift puts it back.
        let a = Operator::from_vec(
            3,
            vec![
                c(1.0, 0.0), c(2.0, 0.0), c(3.0, 0.0),
                c(4.0, 0.0), c(5.0, 0.0), c(6.0, 0.0),
                c(7.0, 0.0), c(8.0, 0.0), c(9.0, 0.0),
            ],
        )
        .unwrap();
        let v = Rect::from_columns(
            3,
            &[vec![CONE, CZERO, CZERO], vec![CZERO, CZERO, CONE]],
        );
        assert!(v.isometry_residual() < 1e-15);
        let b = compress(&a, &v);
        assert_eq!(b.at(0, 0), c(1.0, 0.0));
        assert_eq!(b.at(0, 1), c(3.0, 0.0));
        assert_eq!(b.at(1, 0), c(7.0, 0.0));
        assert_eq!(b.at(1, 1), c(9.0, 0.0));
        let back = lift(&b, &v);
        assert_eq!(back.at(0, 0), c(1.0, 0.0));
        assert_eq!(back.at(0, 2), c(3.0, 0.0));
        assert_eq!(back.at(1, 1), CZERO);
    }

    #[test]
    fn zero_skip_keeps_diagonal_products_exact() {
        let d = Operator::from_real_diag(&[1.0, 2.0, 3.0]);
        let a = Operator::from_vec(
            3,
            (0..9).map(|k| c(k as f64, -(k as f64))).collect(),
        )
        .unwrap();
        let p = d.mul(&a);
        for i in 0..3 {
            for j in 0..3 {
                assert_eq!(p.at(i, j), a.at(i, j) * ((i + 1) as f64));
            }
        }
    }
}
