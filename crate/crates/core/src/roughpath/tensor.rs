use serde::{Deserialize, Serialize};
use std::ops::{Add, AddAssign, Index, IndexMut, Mul, Neg, Sub, SubAssign};

/// Dense d x d matrix standing in for an element of R^d ⊗ R^d.
///
/// Entry (i, j) holds the coefficient of e_i ⊗ e_j, so for a lift it is the
/// integral of X^i dX^j.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Tensor2 {
    dim: usize,
    data: Vec<f64>,
}

impl Tensor2 {
    pub fn zeros(dim: usize) -> Self {
        Self { dim, data: vec![0.0; dim * dim] }
    }

    pub fn identity(dim: usize) -> Self {
        let mut t = Self::zeros(dim);
        for i in 0..dim {
            t[(i, i)] = 1.0;
        }
        t
    }

    pub fn from_row_major(dim: usize, data: Vec<f64>) -> Self {
        assert_eq!(data.len(), dim * dim, "tensor data length");
        Self { dim, data }
    }

    pub fn scalar(v: f64) -> Self {
        Self { dim: 1, data: vec![v] }
    }

    pub fn outer(a: &[f64], b: &[f64]) -> Self {
        assert_eq!(a.len(), b.len());
        let dim = a.len();
        let mut data = Vec::with_capacity(dim * dim);
        for &ai in a {
            for &bj in b {
                data.push(ai * bj);
            }
        }
        Self { dim, data }
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn as_slice(&self) -> &[f64] {
        &self.data
    }

    pub fn as_mut_slice(&mut self) -> &mut [f64] {
        &mut self.data
    }

    pub fn into_vec(self) -> Vec<f64> {
        self.data
    }

    pub fn transpose(&self) -> Self {
        let d = self.dim;
        let mut t = Self::zeros(d);
        for i in 0..d {
            for j in 0..d {
                t[(j, i)] = self[(i, j)];
            }
        }
        t
    }

    /// Symmetric part ½(A + Aᵀ).
    pub fn sym(&self) -> Self {
        let d = self.dim;
        let mut t = Self::zeros(d);
        for i in 0..d {
            for j in 0..d {
                t[(i, j)] = 0.5 * (self[(i, j)] + self[(j, i)]);
            }
        }
        t
    }

    /// Max absolute entry.
    pub fn norm(&self) -> f64 {
        max_abs(&self.data)
    }

    pub fn is_symmetric(&self, tol: f64) -> bool {
        let d = self.dim;
        (0..d).all(|i| (0..i).all(|j| (self[(i, j)] - self[(j, i)]).abs() <= tol))
    }

    /// Frobenius inner product Σ a_ij b_ij.
    pub fn contract(&self, other: &Tensor2) -> f64 {
        self.data.iter().zip(&other.data).map(|(a, b)| a * b).sum()
    }

    pub fn scale(&self, s: f64) -> Self {
        Self { dim: self.dim, data: self.data.iter().map(|v| v * s).collect() }
    }

    /// self += a ⊗ b
    pub fn add_outer(&mut self, a: &[f64], b: &[f64]) {
        let d = self.dim;
        for i in 0..d {
            for j in 0..d {
                self.data[i * d + j] += a[i] * b[j];
            }
        }
    }
}

pub(crate) fn max_abs(v: &[f64]) -> f64 {
    v.iter().fold(0.0_f64, |m, x| m.max(x.abs()))
}

impl Index<(usize, usize)> for Tensor2 {
    type Output = f64;
    fn index(&self, (i, j): (usize, usize)) -> &f64 {
        &self.data[i * self.dim + j]
    }
}

impl IndexMut<(usize, usize)> for Tensor2 {
    fn index_mut(&mut self, (i, j): (usize, usize)) -> &mut f64 {
        &mut self.data[i * self.dim + j]
    }
}

impl AddAssign<&Tensor2> for Tensor2 {
    fn add_assign(&mut self, rhs: &Tensor2) {
        debug_assert_eq!(self.dim, rhs.dim);
        for (a, b) in self.data.iter_mut().zip(&rhs.data) {
            *a += b;
        }
    }
}

impl SubAssign<&Tensor2> for Tensor2 {
    fn sub_assign(&mut self, rhs: &Tensor2) {
        debug_assert_eq!(self.dim, rhs.dim);
        for (a, b) in self.data.iter_mut().zip(&rhs.data) {
            *a -= b;
        }
    }
}

impl Add for &Tensor2 {
    type Output = Tensor2;
    fn add(self, rhs: &Tensor2) -> Tensor2 {
        let mut out = self.clone();
        out += rhs;
        out
    }
}

impl Sub for &Tensor2 {
    type Output = Tensor2;
    fn sub(self, rhs: &Tensor2) -> Tensor2 {
        let mut out = self.clone();
        out -= rhs;
        out
    }
}

impl Mul<f64> for &Tensor2 {
    type Output = Tensor2;
    fn mul(self, rhs: f64) -> Tensor2 {
        self.scale(rhs)
    }
}

impl Neg for &Tensor2 {
    type Output = Tensor2;
    fn neg(self) -> Tensor2 {
        self.scale(-1.0)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn outer_and_sym() {
        let t = Tensor2::outer(&[1.0, 2.0], &[3.0, 5.0]);
        assert_eq!(t.as_slice(), &[3.0, 5.0, 6.0, 10.0]);
        let s = t.sym();
        assert_eq!(s[(0, 1)], 5.5);
        assert!(s.is_symmetric(0.0));
        assert!(!t.is_symmetric(1e-12));
        assert_eq!(t.norm(), 10.0);
    }

    #[test]
    fn contraction() {
        let a = Tensor2::identity(3);
        let b = Tensor2::from_row_major(3, (0..9).map(|v| v as f64).collect());
        assert_eq!(a.contract(&b), 0.0 + 4.0 + 8.0);
    }
}
