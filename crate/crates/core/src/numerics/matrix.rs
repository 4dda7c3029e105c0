//! Row-major dense complex matrix.

use num_complex::Complex64;
use std::ops::{Index, IndexMut};

/// Dense matrix over `Complex64`, stored row-major.
#[derive(Debug, Clone, PartialEq)]
pub struct ComplexMatrix {
    rows: usize,
    cols: usize,
    data: Vec<Complex64>,
}

impl ComplexMatrix {
    pub fn zeros(rows: usize, cols: usize) -> Self {
        Self { rows, cols, data: vec![Complex64::new(0.0, 0.0); rows * cols] }
    }

    pub fn identity(n: usize) -> Self {
        let mut m = Self::zeros(n, n);
        for i in 0..n {
            m[(i, i)] = Complex64::new(1.0, 0.0);
        }
        m
    }

    pub fn from_fn(rows: usize, cols: usize, mut f: impl FnMut(usize, usize) -> Complex64) -> Self {
        let mut data = Vec::with_capacity(rows * cols);
        for i in 0..rows {
            for j in 0..cols {
                data.push(f(i, j));
            }
        }
        Self { rows, cols, data }
    }

    pub fn from_diag(diag: &[Complex64]) -> Self {
        let mut m = Self::zeros(diag.len(), diag.len());
        for (i, &v) in diag.iter().enumerate() {
            m[(i, i)] = v;
        }
        m
    }

    pub fn rows(&self) -> usize {
        self.rows
    }

    pub fn cols(&self) -> usize {
        self.cols
    }

    pub fn row(&self, i: usize) -> &[Complex64] {
        &self.data[i * self.cols..(i + 1) * self.cols]
    }

    pub fn row_mut(&mut self, i: usize) -> &mut [Complex64] {
        &mut self.data[i * self.cols..(i + 1) * self.cols]
    }

    pub fn data(&self) -> &[Complex64] {
        &self.data
    }

    pub fn column(&self, j: usize) -> Vec<Complex64> {
        (0..self.rows).map(|i| self[(i, j)]).collect()
    }

    pub fn set_column(&mut self, j: usize, col: &[Complex64]) {
        assert_eq!(col.len(), self.rows, "column length mismatch");
        for (i, &v) in col.iter().enumerate() {
            self[(i, j)] = v;
        }
    }

    /// Conjugate transpose.
    pub fn hermitian(&self) -> Self {
        Self::from_fn(self.cols, self.rows, |i, j| self[(j, i)].conj())
    }

    pub fn transpose(&self) -> Self {
        Self::from_fn(self.cols, self.rows, |i, j| self[(j, i)])
    }

    /// `self * other`.
    pub fn mul(&self, other: &Self) -> Self {
        assert_eq!(self.cols, other.rows, "matmul shape mismatch");
        let mut out = Self::zeros(self.rows, other.cols);
        // ikj order: streams rows of `other` and of `out`.
        for i in 0..self.rows {
            let a_row = self.row(i);
            let out_row = &mut out.data[i * other.cols..(i + 1) * other.cols];
            for (k, &a_ik) in a_row.iter().enumerate() {
                if a_ik.re == 0.0 && a_ik.im == 0.0 {
                    continue;
                }
                let b_row = other.row(k);
                for (o, &b) in out_row.iter_mut().zip(b_row) {
                    *o += a_ik * b;
                }
            }
        }
        out
    }

    /// `self * x` for a column vector `x`.
    pub fn mul_vec(&self, x: &[Complex64]) -> Vec<Complex64> {
        assert_eq!(self.cols, x.len(), "matvec shape mismatch");
        (0..self.rows).map(|i| dot(self.row(i), x)).collect()
    }

    /// `xᵀ·self` as a row vector; no conjugation is applied to `x`.
    pub fn left_mul_vec(&self, x: &[Complex64]) -> Vec<Complex64> {
        assert_eq!(self.rows, x.len(), "left matvec shape mismatch");
        let mut out = vec![Complex64::new(0.0, 0.0); self.cols];
        for (i, &xi) in x.iter().enumerate() {
            if xi.re == 0.0 && xi.im == 0.0 {
                continue;
            }
            for (o, &a) in out.iter_mut().zip(self.row(i)) {
                *o += xi * a;
            }
        }
        out
    }

    pub fn add(&self, other: &Self) -> Self {
        assert_eq!((self.rows, self.cols), (other.rows, other.cols), "add shape mismatch");
        let data = self.data.iter().zip(&other.data).map(|(a, b)| a + b).collect();
        Self { rows: self.rows, cols: self.cols, data }
    }

    pub fn sub(&self, other: &Self) -> Self {
        assert_eq!((self.rows, self.cols), (other.rows, other.cols), "sub shape mismatch");
        let data = self.data.iter().zip(&other.data).map(|(a, b)| a - b).collect();
        Self { rows: self.rows, cols: self.cols, data }
    }

    pub fn scale(&self, s: Complex64) -> Self {
        let data = self.data.iter().map(|a| a * s).collect();
        Self { rows: self.rows, cols: self.cols, data }
    }

    /// `self + s·I` in place.
    pub fn add_scaled_identity(&mut self, s: f64) {
        assert_eq!(self.rows, self.cols, "not square");
        for i in 0..self.rows {
            let d = &mut self[(i, i)];
            d.re += s;
        }
    }

    /// Elementwise product.
    pub fn hadamard(&self, other: &Self) -> Self {
        assert_eq!((self.rows, self.cols), (other.rows, other.cols), "hadamard shape mismatch");
        let data = self.data.iter().zip(&other.data).map(|(a, b)| a * b).collect();
        Self { rows: self.rows, cols: self.cols, data }
    }

    /// `self * selfᴴ`, exploiting the Hermitian structure of the result.
    pub fn gram(&self) -> Self {
        let mut out = Self::zeros(self.rows, self.rows);
        self.gram_accumulate(&mut out);
        out.mirror_upper();
        out
    }

    /// Adds `self * selfᴴ` onto the upper triangle of `acc` (lower left untouched).
    pub fn gram_accumulate(&self, acc: &mut Self) {
        assert_eq!((acc.rows, acc.cols), (self.rows, self.rows), "gram shape mismatch");
        for i in 0..self.rows {
            let ri = self.row(i);
            for j in i..self.rows {
                let v = dot_conj(ri, self.row(j));
                acc[(i, j)] += v;
            }
        }
    }

    /// Copies the conjugated upper triangle onto the lower one.
    pub fn mirror_upper(&mut self) {
        assert_eq!(self.rows, self.cols, "not square");
        for i in 0..self.rows {
            for j in 0..i {
                self[(i, j)] = self[(j, i)].conj();
            }
        }
    }

    pub fn select_rows(&self, idx: &[usize]) -> Self {
        let mut out = Self::zeros(idx.len(), self.cols);
        for (r, &i) in idx.iter().enumerate() {
            out.row_mut(r).copy_from_slice(self.row(i));
        }
        out
    }

    pub fn select_cols(&self, idx: &[usize]) -> Self {
        Self::from_fn(self.rows, idx.len(), |i, j| self[(i, idx[j])])
    }

    pub fn frobenius_norm(&self) -> f64 {
        self.data.iter().map(|v| v.norm_sqr()).sum::<f64>().sqrt()
    }

    /// Maximum absolute column sum.
    pub fn one_norm(&self) -> f64 {
        let mut sums = vec![0.0f64; self.cols];
        for i in 0..self.rows {
            for (s, v) in sums.iter_mut().zip(self.row(i)) {
                *s += v.norm();
            }
        }
        sums.into_iter().fold(0.0, f64::max)
    }

    pub fn max_abs(&self) -> f64 {
        self.data.iter().map(|v| v.norm()).fold(0.0, f64::max)
    }

    pub fn is_finite(&self) -> bool {
        self.data.iter().all(|v| v.re.is_finite() && v.im.is_finite())
    }
}

impl Index<(usize, usize)> for ComplexMatrix {
    type Output = Complex64;
    fn index(&self, (i, j): (usize, usize)) -> &Complex64 {
        debug_assert!(i < self.rows && j < self.cols);
        &self.data[i * self.cols + j]
    }
}

impl IndexMut<(usize, usize)> for ComplexMatrix {
    fn index_mut(&mut self, (i, j): (usize, usize)) -> &mut Complex64 {
        debug_assert!(i < self.rows && j < self.cols);
        &mut self.data[i * self.cols + j]
    }
}

/// Plain dot product `Σ aᵢ·bᵢ` (no conjugation).
pub fn dot(a: &[Complex64], b: &[Complex64]) -> Complex64 {
    debug_assert_eq!(a.len(), b.len());
    let mut acc = Complex64::new(0.0, 0.0);
    for (x, y) in a.iter().zip(b) {
        acc += x * y;
    }
    acc
}

/// Hermitian dot product `Σ aᵢ·conj(bᵢ)`.
pub fn dot_conj(a: &[Complex64], b: &[Complex64]) -> Complex64 {
    debug_assert_eq!(a.len(), b.len());
    let mut acc = Complex64::new(0.0, 0.0);
    for (x, y) in a.iter().zip(b) {
        acc += x * y.conj();
    }
    acc
}

/// Squared Euclidean norm of a complex vector.
pub fn norm_sqr(x: &[Complex64]) -> f64 {
    x.iter().map(|v| v.norm_sqr()).sum()
}

#[cfg(test)]
mod tests {
    use super::*;

    fn c(re: f64, im: f64) -> Complex64 {
        Complex64::new(re, im)
    }

    #[test]
    fn identity_is_neutral_for_mul() {
        let a = ComplexMatrix::from_fn(3, 3, |i, j| c((i * 3 + j) as f64, -(j as f64)));
        let i3 = ComplexMatrix::identity(3);
        assert_eq!(a.mul(&i3), a);
        assert_eq!(i3.mul(&a), a);
    }

    #[test]
    fn mul_matches_naive_triple_loop() {
        let a = ComplexMatrix::from_fn(4, 3, |i, j| c(i as f64 + 0.5, j as f64 - 1.0));
        let b = ComplexMatrix::from_fn(3, 5, |i, j| c(j as f64 - 2.0, i as f64 * 0.25));
        let fast = a.mul(&b);
        for i in 0..4 {
            for j in 0..5 {
                let mut want = c(0.0, 0.0);
                for k in 0..3 {
                    want += a[(i, k)] * b[(k, j)];
                }
                assert!((fast[(i, j)] - want).norm() < 1e-14);
            }
        }
    }

    #[test]
    fn hermitian_conjugates_and_transposes() {
        let a = ComplexMatrix::from_fn(2, 3, |i, j| c(i as f64, j as f64 + 1.0));
        let ah = a.hermitian();
        assert_eq!(ah.rows(), 3);
        assert_eq!(ah[(2, 1)], c(1.0, -3.0));
    }

    #[test]
    fn gram_equals_explicit_product() {
        let a = ComplexMatrix::from_fn(4, 6, |i, j| c((i + j) as f64 * 0.3 - 1.0, (i * j) as f64 * 0.1));
        let want = a.mul(&a.hermitian());
        let got = a.gram();
        assert!(want.sub(&got).frobenius_norm() < 1e-12);
    }

    #[test]
    fn left_mul_vec_matches_hermitian_route() {
        let a = ComplexMatrix::from_fn(3, 4, |i, j| c(i as f64 - j as f64, 0.5 * j as f64));
        let x = vec![c(1.0, 1.0), c(0.0, -2.0), c(3.0, 0.0)];
        let got = a.left_mul_vec(&x);
        let want = a.transpose().mul_vec(&x);
        for (g, w) in got.iter().zip(&want) {
            assert!((g - w).norm() < 1e-13);
        }
    }

    #[test]
    fn norms_on_known_matrix() {
        let m = ComplexMatrix::from_fn(2, 2, |i, j| if i == j { c(3.0, 4.0) } else { c(0.0, 0.0) });
        assert!((m.frobenius_norm() - (50.0f64).sqrt()).abs() < 1e-15);
        assert!((m.one_norm() - 5.0).abs() < 1e-15);
        assert!((m.max_abs() - 5.0).abs() < 1e-15);
    }

    #[test]
    fn row_and_column_selection() {
        let a = ComplexMatrix::from_fn(4, 4, |i, j| c(i as f64, j as f64));
        let r = a.select_rows(&[2, 0]);
        assert_eq!(r[(0, 3)], c(2.0, 3.0));
        assert_eq!(r[(1, 0)], c(0.0, 0.0));
        let col = a.select_cols(&[1]);
        assert_eq!(col[(3, 0)], c(3.0, 1.0));
    }

    #[test]
    fn gram_accumulate_only_touches_upper() {
        let a = ComplexMatrix::from_fn(3, 2, |i, j| c(i as f64 + 1.0, j as f64));
        let mut acc = ComplexMatrix::zeros(3, 3);
        a.gram_accumulate(&mut acc);
        assert_eq!(acc[(2, 0)], c(0.0, 0.0));
        acc.mirror_upper();
        assert!(acc.sub(&a.gram()).frobenius_norm() < 1e-14);
    }
}
