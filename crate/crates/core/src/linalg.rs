//! Small dense symmetric matrices.
//!
//! Information matrices here are at most about 10×10, so a plain row-major
//! `Vec<f64>` with a hand-written Cholesky factorization is all we need.

use alloc::vec;
use alloc::vec::Vec;

/// Pivots below this fraction of the original diagonal entry are treated
/// as rank deficiency.
const RELATIVE_PIVOT_TOL: f64 = 1e-12;

/// Determinants at or below this value are treated as singular.
pub const SINGULAR_DET: f64 = 1e-300;

/// Dense square matrix stored row-major. Used for symmetric matrices only.
#[derive(Debug, Clone, PartialEq)]
pub struct SymMatrix {
    dim: usize,
    data: Vec<f64>,
}

impl SymMatrix {
    pub fn zeros(dim: usize) -> Self {
        Self { dim, data: vec![0.0; dim * dim] }
    }

    pub fn identity(dim: usize) -> Self {
        let mut m = Self::zeros(dim);
        for i in 0..dim {
            m.data[i * dim + i] = 1.0;
        }
        m
    }

    /// Builds `Aᵀ A` for a row-major `rows × dim` matrix `a`.
    pub fn gram(a: &[f64], rows: usize, dim: usize) -> Self {
        assert_eq!(a.len(), rows * dim);
        let mut m = Self::zeros(dim);
        for r in a.chunks_exact(dim) {
            m.add_outer(r, 1.0);
        }
        m
    }

    pub fn from_rows(dim: usize, data: Vec<f64>) -> Self {
        assert_eq!(data.len(), dim * dim);
        Self { dim, data }
    }

    #[inline]
    pub fn dim(&self) -> usize {
        self.dim
    }

    #[inline]
    pub fn get(&self, i: usize, j: usize) -> f64 {
        self.data[i * self.dim + j]
    }

    #[inline]
    pub fn set(&mut self, i: usize, j: usize, v: f64) {
        self.data[i * self.dim + j] = v;
    }

    pub fn as_slice(&self) -> &[f64] {
        &self.data
    }

    /// `self += scale · u uᵀ`
    pub fn add_outer(&mut self, u: &[f64], scale: f64) {
        let n = self.dim;
        debug_assert_eq!(u.len(), n);
        for i in 0..n {
            let si = scale * u[i];
            let row = &mut self.data[i * n..(i + 1) * n];
            for (x, uj) in row.iter_mut().zip(u) {
                *x += si * uj;
            }
        }
    }

    /// `out = self · x`
    pub fn mul_vec_into(&self, x: &[f64], out: &mut [f64]) {
        let n = self.dim;
        for (i, o) in out.iter_mut().enumerate().take(n) {
            *o = dot(&self.data[i * n..(i + 1) * n], x);
        }
    }

    pub fn mul_vec(&self, x: &[f64]) -> Vec<f64> {
        let mut out = vec![0.0; self.dim];
        self.mul_vec_into(x, &mut out);
        out
    }

    /// Bilinear form `aᵀ · self · b`.
    pub fn quad(&self, a: &[f64], b: &[f64]) -> f64 {
        let n = self.dim;
        let mut s = 0.0;
        for i in 0..n {
            s += a[i] * dot(&self.data[i * n..(i + 1) * n], b);
        }
        s
    }

    pub fn matmul(&self, other: &SymMatrix) -> SymMatrix {
        let n = self.dim;
        let mut out = SymMatrix::zeros(n);
        for i in 0..n {
            for k in 0..n {
                let a = self.get(i, k);
                for j in 0..n {
                    out.data[i * n + j] += a * other.get(k, j);
                }
            }
        }
        out
    }

    pub fn max_abs_diff(&self, other: &SymMatrix) -> f64 {
        self.data
            .iter()
            .zip(&other.data)
            .map(|(a, b)| libm::fabs(a - b))
            .fold(0.0, f64::max)
    }

    /// Largest `|a_ij - a_ji|`.
    pub fn asymmetry(&self) -> f64 {
        let mut worst: f64 = 0.0;
        for i in 0..self.dim {
            for j in 0..i {
                worst = worst.max(libm::fabs(self.get(i, j) - self.get(j, i)));
            }
        }
        worst
    }

    /// Averages the matrix with its transpose.
    pub fn symmetrize(&mut self) {
        for i in 0..self.dim {
            for j in 0..i {
                let v = 0.5 * (self.get(i, j) + self.get(j, i));
                self.set(i, j, v);
                self.set(j, i, v);
            }
        }
    }

    /// Cholesky factorization `self = L Lᵀ`. Returns `None` when a pivot is
    /// non-positive or numerically negligible relative to its diagonal.
    pub fn cholesky(&self) -> Option<Cholesky> {
        let n = self.dim;
        let mut l = vec![0.0; n * n];
        for j in 0..n {
            let mut d = self.get(j, j);
            for k in 0..j {
                d -= l[j * n + k] * l[j * n + k];
            }
            let scale = libm::fabs(self.get(j, j));
            if !(d > RELATIVE_PIVOT_TOL * scale) || !d.is_finite() {
                return None;
            }
            let djj = libm::sqrt(d);
            l[j * n + j] = djj;
            for i in j + 1..n {
                let mut s = self.get(i, j);
                for k in 0..j {
                    s -= l[i * n + k] * l[j * n + k];
                }
                l[i * n + j] = s / djj;
            }
        }
        Some(Cholesky { dim: n, l })
    }
}

/// Lower-triangular Cholesky factor.
#[derive(Debug, Clone)]
pub struct Cholesky {
    dim: usize,
    l: Vec<f64>,
}

impl Cholesky {
    /// `log |A| = 2 Σ log L_ii`
    pub fn log_det(&self) -> f64 {
        let n = self.dim;
        2.0 * (0..n).map(|i| libm::log(self.l[i * n + i])).sum::<f64>()
    }

    /// Solves `A x = b` in place.
    pub fn solve_in_place(&self, b: &mut [f64]) {
        let n = self.dim;
        for i in 0..n {
            let mut s = b[i];
            for k in 0..i {
                s -= self.l[i * n + k] * b[k];
            }
            b[i] = s / self.l[i * n + i];
        }
        for i in (0..n).rev() {
            let mut s = b[i];
            for k in i + 1..n {
                s -= self.l[k * n + i] * b[k];
            }
            b[i] = s / self.l[i * n + i];
        }
    }

    pub fn inverse(&self) -> SymMatrix {
        let n = self.dim;
        let mut inv = SymMatrix::zeros(n);
        let mut col = vec![0.0; n];
        for j in 0..n {
            col.iter_mut().for_each(|c| *c = 0.0);
            col[j] = 1.0;
            self.solve_in_place(&mut col);
            for i in 0..n {
                inv.set(i, j, col[i]);
            }
        }
        inv.symmetrize();
        inv
    }
}

#[inline]
pub fn dot(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}

/// Log-determinant of a general square matrix by partial-pivot LU. Returns
/// `None` for an exactly singular matrix or a negative determinant. Used as
/// an independent reference in tests.
pub fn lu_log_det(a: &[f64], n: usize) -> Option<f64> {
    let mut m = a.to_vec();
    let mut sign = 1.0;
    let mut acc = 0.0;
    for c in 0..n {
        let p = (c..n)
            .max_by(|&x, &y| libm::fabs(m[x * n + c]).total_cmp(&libm::fabs(m[y * n + c])))
            .unwrap();
        if m[p * n + c] == 0.0 {
            return None;
        }
        if p != c {
            for j in 0..n {
                m.swap(c * n + j, p * n + j);
            }
            sign = -sign;
        }
        let piv = m[c * n + c];
        if piv < 0.0 {
            sign = -sign;
        }
        acc += libm::log(libm::fabs(piv));
        for r in c + 1..n {
            let f = m[r * n + c] / piv;
            for j in c..n {
                m[r * n + j] -= f * m[c * n + j];
            }
        }
    }
    (sign > 0.0).then_some(acc)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn cholesky_log_det_matches_lu() {
        let a = [4.0, 2.0, 0.6, 2.0, 5.0, 1.0, 0.6, 1.0, 3.0];
        let m = SymMatrix::from_rows(3, a.to_vec());
        let chol = m.cholesky().unwrap();
        let lu = lu_log_det(&a, 3).unwrap();
        assert!((chol.log_det() - lu).abs() < 1e-13);
        let inv = chol.inverse();
        assert!(m.matmul(&inv).max_abs_diff(&SymMatrix::identity(3)) < 1e-14);
    }

    #[test]
    fn rank_deficient_gram_has_no_factor() {
        // Third column is the sum of the first two.
        let a = [1.0, 0.0, 1.0, 0.0, 1.0, 1.0, 2.0, 3.0, 5.0, 1.0, 1.0, 2.0];
        let m = SymMatrix::gram(&a, 4, 3);
        assert!(m.cholesky().is_none());
    }
}
