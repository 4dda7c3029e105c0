//! DFT matrices, partial Fourier blocks, circulants, and FFT-backed transforms.
//!
//! Conventions: `dft_matrix(q)` is the unitary DFT `[e^{-j2πmn/q}/√q]`;
//! `partial_fourier(d, n)` is the first `n` columns of the *unnormalized*
//! `d`-point DFT `[e^{-j2πmn/d}]`, the form channel tap vectors are expanded
//! with. Angles are computed from `m·n mod q` so large index products do not
//! lose precision.

use super::matrix::ComplexMatrix;
use crate::error::{Error, Result};
use num_complex::Complex64;
use rustfft::{Fft, FftPlanner};
use std::sync::Arc;

/// Unitary `q`-point DFT matrix.
pub fn dft_matrix(q: usize) -> Result<ComplexMatrix> {
    if q == 0 {
        return Err(Error::InvalidDimension("DFT size must be at least 1".into()));
    }
    let table = twiddle_table(q, 1.0 / (q as f64).sqrt());
    Ok(ComplexMatrix::from_fn(q, q, |m, n| table[m * n % q]))
}

/// First `n` columns of the unnormalized `d`-point DFT matrix.
pub fn partial_fourier(d: usize, n: usize) -> Result<ComplexMatrix> {
    if d == 0 {
        return Err(Error::InvalidDimension("DFT size must be at least 1".into()));
    }
    if n > d {
        return Err(Error::InvalidDimension(format!(
            "partial Fourier block: {n} columns exceed DFT size {d}"
        )));
    }
    let table = twiddle_table(d, 1.0);
    Ok(ComplexMatrix::from_fn(d, n, |m, k| table[m * k % d]))
}

/// Circulant matrix of size `d` whose first column is `first_col` zero-padded.
pub fn circulant(first_col: &[Complex64], d: usize) -> Result<ComplexMatrix> {
    if d == 0 {
        return Err(Error::InvalidDimension("circulant size must be at least 1".into()));
    }
    if first_col.len() > d {
        return Err(Error::InvalidDimension(format!(
            "circulant: first column has {} entries, size is {d}",
            first_col.len()
        )));
    }
    let zero = Complex64::new(0.0, 0.0);
    Ok(ComplexMatrix::from_fn(d, d, |i, j| {
        let shift = (i + d - j) % d;
        if shift < first_col.len() {
            first_col[shift]
        } else {
            zero
        }
    }))
}

fn twiddle_table(q: usize, scale: f64) -> Vec<Complex64> {
    let step = -2.0 * std::f64::consts::PI / q as f64;
    (0..q).map(|r| Complex64::from_polar(scale, step * r as f64)).collect()
}

/// FFT-backed application of the unitary DFT and its adjoint.
#[derive(Clone)]
pub struct Dft {
    size: usize,
    fwd: Arc<dyn Fft<f64>>,
    inv: Arc<dyn Fft<f64>>,
    scale: f64,
}

impl std::fmt::Debug for Dft {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.debug_struct("Dft").field("size", &self.size).finish()
    }
}

impl Dft {
    pub fn new(size: usize) -> Result<Self> {
        if size == 0 {
            return Err(Error::InvalidDimension("DFT size must be at least 1".into()));
        }
        let mut planner = FftPlanner::new();
        Ok(Self {
            size,
            fwd: planner.plan_fft_forward(size),
            inv: planner.plan_fft_inverse(size),
            scale: 1.0 / (size as f64).sqrt(),
        })
    }

    pub fn size(&self) -> usize {
        self.size
    }

    /// `W·x` for the unitary DFT `W` of this size.
    pub fn apply(&self, x: &[Complex64]) -> Vec<Complex64> {
        assert_eq!(x.len(), self.size, "DFT input length mismatch");
        let mut buf = x.to_vec();
        self.fwd.process(&mut buf);
        for v in &mut buf {
            *v *= self.scale;
        }
        buf
    }

    /// `Wᴴ·x` for the unitary DFT `W` of this size.
    pub fn apply_inverse(&self, x: &[Complex64]) -> Vec<Complex64> {
        assert_eq!(x.len(), self.size, "DFT input length mismatch");
        let mut buf = x.to_vec();
        self.inv.process(&mut buf);
        for v in &mut buf {
            *v *= self.scale;
        }
        buf
    }

    /// Unnormalized spectrum `Σₙ xₙ·e^{-j2πkn/size}` of `x` zero-padded to
    /// the transform size; this is `partial_fourier(size, x.len())·x`.
    pub fn spectrum(&self, x: &[Complex64]) -> Vec<Complex64> {
        assert!(x.len() <= self.size, "spectrum input longer than DFT size");
        let mut buf = vec![Complex64::new(0.0, 0.0); self.size];
        buf[..x.len()].copy_from_slice(x);
        self.fwd.process(&mut buf);
        buf
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    fn c(re: f64, im: f64) -> Complex64 {
        Complex64::new(re, im)
    }

    fn random_vec(n: usize, rng: &mut ChaCha8Rng) -> Vec<Complex64> {
        (0..n).map(|_| c(rng.gen::<f64>() - 0.5, rng.gen::<f64>() - 0.5)).collect()
    }

    #[test]
    fn dft_size_one_is_scalar_one() {
        let w = dft_matrix(1).unwrap();
        assert!((w[(0, 0)] - c(1.0, 0.0)).norm() < 1e-15);
    }

    #[test]
    fn dft_size_two_matches_hand_values() {
        let w = dft_matrix(2).unwrap();
        let s = 1.0 / 2.0f64.sqrt();
        for (idx, want) in [((0, 0), s), ((0, 1), s), ((1, 0), s), ((1, 1), -s)] {
            assert!((w[idx] - c(want, 0.0)).norm() < 1e-15, "entry {idx:?}");
        }
    }

    #[test]
    fn dft_entry_is_root_of_unity() {
        let w = dft_matrix(8).unwrap();
        let want = Complex64::from_polar(1.0 / 8.0f64.sqrt(), -std::f64::consts::FRAC_PI_4);
        assert!((w[(1, 1)] - want).norm() < 1e-15);
    }

    #[test]
    fn dft_is_unitary_across_sizes() {
        for q in 1..=64 {
            let w = dft_matrix(q).unwrap();
            let gram = w.hermitian().gram(); // Wᴴ·W
            let err = gram.sub(&ComplexMatrix::identity(q)).frobenius_norm();
            assert!(err <= 1e-10, "size {q}: unitarity error {err:.3e}");
        }
    }

    #[test]
    fn dft_rejects_empty_size() {
        assert!(matches!(dft_matrix(0), Err(Error::InvalidDimension(_))));
        assert!(matches!(partial_fourier(0, 0), Err(Error::InvalidDimension(_))));
        assert!(matches!(Dft::new(0), Err(Error::InvalidDimension(_))));
    }

    #[test]
    fn partial_fourier_first_column_is_ones() {
        let f = partial_fourier(4, 1).unwrap();
        for m in 0..4 {
            assert!((f[(m, 0)] - c(1.0, 0.0)).norm() < 1e-15);
        }
    }

    #[test]
    fn partial_fourier_second_entry_is_minus_j() {
        let f = partial_fourier(4, 2).unwrap();
        assert!((f[(1, 1)] - c(0.0, -1.0)).norm() < 1e-15);
    }

    #[test]
    fn partial_fourier_columns_are_orthogonal() {
        let f = partial_fourier(16, 8).unwrap();
        let gram = f.hermitian().mul(&f); // FᴴF = 16·I
        let err = gram.sub(&ComplexMatrix::identity(8).scale(c(16.0, 0.0))).frobenius_norm();
        assert!(err <= 1e-12, "orthogonality error {err:.3e}");
    }

    #[test]
    fn partial_fourier_matches_scaled_dft_columns() {
        let d = 12;
        let f = partial_fourier(d, 5).unwrap();
        let w = dft_matrix(d).unwrap();
        let s = (d as f64).sqrt();
        for m in 0..d {
            for n in 0..5 {
                assert!((f[(m, n)] - w[(m, n)] * s).norm() < 1e-13);
            }
        }
    }

    #[test]
    fn partial_fourier_rejects_wide_block() {
        assert!(matches!(partial_fourier(4, 5), Err(Error::InvalidDimension(_))));
    }

    #[test]
    fn circulant_of_unit_tap_is_identity() {
        let h = [c(1.0, 0.0)];
        let m = circulant(&h, 3).unwrap();
        assert!(m.sub(&ComplexMatrix::identity(3)).frobenius_norm() < 1e-15);
    }

    #[test]
    fn circulant_of_delayed_tap_is_cyclic_shift() {
        let h = [c(0.0, 0.0), c(1.0, 0.0)];
        let m = circulant(&h, 3).unwrap();
        let x = [c(1.0, 0.0), c(2.0, 0.0), c(3.0, 0.0)];
        let y = m.mul_vec(&x);
        for (got, want) in y.iter().zip([c(3.0, 0.0), c(1.0, 0.0), c(2.0, 0.0)]) {
            assert!((got - want).norm() < 1e-15);
        }
    }

    #[test]
    fn circulant_rejects_long_first_column() {
        let h = [c(1.0, 0.0), c(2.0, 0.0)];
        assert!(matches!(circulant(&h, 1), Err(Error::InvalidDimension(_))));
    }

    #[test]
    fn circulant_is_diagonalized_by_the_dft() {
        // H = Wᴴ·diag(spectrum(h))·W, checked densely
        let mut rng = ChaCha8Rng::seed_from_u64(23);
        for d in [8usize, 16, 32] {
            let taps = random_vec(d / 4, &mut rng);
            let h = circulant(&taps, d).unwrap();
            let w = dft_matrix(d).unwrap();
            let f = partial_fourier(d, taps.len()).unwrap();
            let lam = ComplexMatrix::from_diag(&f.mul_vec(&taps));
            let rebuilt = w.hermitian().mul(&lam).mul(&w);
            let rel = h.sub(&rebuilt).frobenius_norm() / h.frobenius_norm();
            assert!(rel <= 1e-10, "size {d}: diagonalization error {rel:.3e}");
        }
    }

    #[test]
    fn fft_apply_matches_dense_dft() {
        let mut rng = ChaCha8Rng::seed_from_u64(5);
        for size in [1usize, 2, 3, 8, 24, 100] {
            let dft = Dft::new(size).unwrap();
            let w = dft_matrix(size).unwrap();
            let x = random_vec(size, &mut rng);
            let fast = dft.apply(&x);
            let dense = w.mul_vec(&x);
            for (f, d) in fast.iter().zip(&dense) {
                assert!((f - d).norm() < 1e-12, "size {size}");
            }
            let back = dft.apply_inverse(&fast);
            for (b, orig) in back.iter().zip(&x) {
                assert!((b - orig).norm() < 1e-12, "roundtrip size {size}");
            }
        }
    }

    #[test]
    fn fft_spectrum_matches_partial_fourier() {
        let mut rng = ChaCha8Rng::seed_from_u64(6);
        let dft = Dft::new(20).unwrap();
        let taps = random_vec(6, &mut rng);
        let fast = dft.spectrum(&taps);
        let dense = partial_fourier(20, 6).unwrap().mul_vec(&taps);
        for (f, d) in fast.iter().zip(&dense) {
            assert!((f - d).norm() < 1e-12);
        }
    }

    #[test]
    fn fft_apply_preserves_energy() {
        let mut rng = ChaCha8Rng::seed_from_u64(9);
        let dft = Dft::new(64).unwrap();
        let x = random_vec(64, &mut rng);
        let y = dft.apply(&x);
        let ex: f64 = x.iter().map(|v| v.norm_sqr()).sum();
        let ey: f64 = y.iter().map(|v| v.norm_sqr()).sum();
        assert!((ex - ey).abs() < 1e-12 * ex);
    }
}
