//! Pivoted LU and Cholesky factorizations with a 1-norm condition estimator.

use super::matrix::ComplexMatrix;
use crate::error::{Error, Result};
use num_complex::Complex64;

/// Condition estimate above which a system is treated as singular.
pub const CONDITION_LIMIT: f64 = 1e12;

/// LU factorization with partial pivoting: `P·A = L·U`.
#[derive(Debug, Clone)]
pub struct LuFactors {
    lu: ComplexMatrix,
    /// Row permutation: row `i` of `P·A` is row `perm[i]` of `A`.
    perm: Vec<usize>,
    a_one_norm: f64,
}

impl LuFactors {
    pub fn new(a: &ComplexMatrix) -> Result<Self> {
        if a.rows() != a.cols() {
            return Err(Error::InvalidDimension(format!(
                "LU needs a square matrix, got {}x{}",
                a.rows(),
                a.cols()
            )));
        }
        let n = a.rows();
        let a_one_norm = a.one_norm();
        let mut lu = a.clone();
        let mut perm: Vec<usize> = (0..n).collect();
        let mut pivot_tail: Vec<Complex64> = Vec::with_capacity(n);
        for col in 0..n {
            let mut pivot = col;
            let mut best = lu[(col, col)].norm_sqr();
            for r in col + 1..n {
                let v = lu[(r, col)].norm_sqr();
                if v > best {
                    best = v;
                    pivot = r;
                }
            }
            if best == 0.0 {
                return Err(Error::SingularMatrix { cond: f64::INFINITY });
            }
            if pivot != col {
                perm.swap(col, pivot);
                for j in 0..n {
                    let tmp = lu[(col, j)];
                    lu[(col, j)] = lu[(pivot, j)];
                    lu[(pivot, j)] = tmp;
                }
            }
            pivot_tail.clear();
            pivot_tail.extend_from_slice(&lu.row(col)[col + 1..]);
            let inv_piv = Complex64::new(1.0, 0.0) / lu[(col, col)];
            for r in col + 1..n {
                let factor = lu[(r, col)] * inv_piv;
                lu[(r, col)] = factor;
                if factor.re == 0.0 && factor.im == 0.0 {
                    continue;
                }
                let row_tail = &mut lu.row_mut(r)[col + 1..];
                for (t, &p) in row_tail.iter_mut().zip(&pivot_tail) {
                    *t -= factor * p;
                }
            }
        }
        Ok(Self { lu, perm, a_one_norm })
    }

    pub fn n(&self) -> usize {
        self.lu.rows()
    }

    /// Solves `A·x = b`.
    pub fn solve_vec(&self, b: &[Complex64]) -> Vec<Complex64> {
        let n = self.n();
        assert_eq!(b.len(), n, "rhs length mismatch");
        let mut x: Vec<Complex64> = self.perm.iter().map(|&p| b[p]).collect();
        // forward: L has unit diagonal
        for i in 1..n {
            let row = self.lu.row(i);
            let mut acc = x[i];
            for k in 0..i {
                acc -= row[k] * x[k];
            }
            x[i] = acc;
        }
        // backward: U
        for i in (0..n).rev() {
            let row = self.lu.row(i);
            let mut acc = x[i];
            for k in i + 1..n {
                acc -= row[k] * x[k];
            }
            x[i] = acc / row[i];
        }
        x
    }

    /// Solves `Aᴴ·x = b`.
    pub fn solve_adjoint_vec(&self, b: &[Complex64]) -> Vec<Complex64> {
        let n = self.n();
        assert_eq!(b.len(), n, "rhs length mismatch");
        // Aᴴ = Uᴴ·Lᴴ·P, so solve Uᴴ·w = b, then Lᴴ·v = w, then undo P.
        let mut v = b.to_vec();
        for i in 0..n {
            let mut acc = v[i];
            for k in 0..i {
                acc -= self.lu[(k, i)].conj() * v[k];
            }
            v[i] = acc / self.lu[(i, i)].conj();
        }
        for i in (0..n).rev() {
            let mut acc = v[i];
            for k in i + 1..n {
                acc -= self.lu[(k, i)].conj() * v[k];
            }
            v[i] = acc;
        }
        let mut x = vec![Complex64::new(0.0, 0.0); n];
        for (i, &p) in self.perm.iter().enumerate() {
            x[p] = v[i];
        }
        x
    }

    /// Solves `A·X = B` column by column.
    pub fn solve_mat(&self, b: &ComplexMatrix) -> ComplexMatrix {
        assert_eq!(b.rows(), self.n(), "rhs row count mismatch");
        let mut out = ComplexMatrix::zeros(b.rows(), b.cols());
        for j in 0..b.cols() {
            let col = self.solve_vec(&b.column(j));
            out.set_column(j, &col);
        }
        out
    }

    /// 1-norm condition estimate `‖A‖₁·est(‖A⁻¹‖₁)` via Hager's method.
    pub fn condition_estimate(&self) -> f64 {
        let n = self.n();
        if n == 0 {
            return 1.0;
        }
        let mut x = vec![Complex64::new(1.0 / n as f64, 0.0); n];
        let mut est = 0.0f64;
        for _ in 0..5 {
            let y = self.solve_vec(&x);
            let y_norm: f64 = y.iter().map(|v| v.norm()).sum();
            est = est.max(y_norm);
            // gradient direction: phase pattern of y
            let xi: Vec<Complex64> = y
                .iter()
                .map(|v| if v.norm() == 0.0 { Complex64::new(1.0, 0.0) } else { v / v.norm() })
                .collect();
            let z = self.solve_adjoint_vec(&xi);
            let (mut j_best, mut z_best) = (0usize, 0.0f64);
            for (j, v) in z.iter().enumerate() {
                if v.norm() > z_best {
                    z_best = v.norm();
                    j_best = j;
                }
            }
            let zx: f64 = z.iter().zip(&x).map(|(a, b)| (a.conj() * b).re).sum();
            if z_best <= zx + 1e-14 * zx.abs() {
                break;
            }
            x = vec![Complex64::new(0.0, 0.0); n];
            x[j_best] = Complex64::new(1.0, 0.0);
        }
        self.a_one_norm * est
    }
}

/// Cholesky factorization `A = L·Lᴴ` of a Hermitian positive-definite matrix.
#[derive(Debug, Clone)]
pub struct CholeskyFactors {
    l: ComplexMatrix,
}

impl CholeskyFactors {
    /// Only the lower triangle (including diagonal) of `a` is read.
    pub fn new(a: &ComplexMatrix) -> Result<Self> {
        if a.rows() != a.cols() {
            return Err(Error::InvalidDimension(format!(
                "Cholesky needs a square matrix, got {}x{}",
                a.rows(),
                a.cols()
            )));
        }
        let n = a.rows();
        let mut l = ComplexMatrix::zeros(n, n);
        for j in 0..n {
            let mut d = a[(j, j)].re;
            for k in 0..j {
                d -= l[(j, k)].norm_sqr();
            }
            if !(d > 0.0) || !d.is_finite() {
                return Err(Error::Numerical(format!(
                    "matrix not positive definite at pivot {j} (value {d:.3e})"
                )));
            }
            let djj = d.sqrt();
            l[(j, j)] = Complex64::new(djj, 0.0);
            if j + 1 == n {
                continue;
            }
            let lj = l.row(j)[..j].to_vec();
            for i in j + 1..n {
                let mut acc = a[(i, j)];
                let ri = &l.row(i)[..j];
                for (rik, ljk) in ri.iter().zip(&lj) {
                    acc -= rik * ljk.conj();
                }
                l[(i, j)] = acc / djj;
            }
        }
        Ok(Self { l })
    }

    pub fn n(&self) -> usize {
        self.l.rows()
    }

    /// Solves `A·x = b` via the two triangular systems.
    pub fn solve_vec(&self, b: &[Complex64]) -> Vec<Complex64> {
        let n = self.n();
        assert_eq!(b.len(), n, "rhs length mismatch");
        let mut x = b.to_vec();
        for i in 0..n {
            let row = self.l.row(i);
            let mut acc = x[i];
            for k in 0..i {
                acc -= row[k] * x[k];
            }
            x[i] = acc / row[i];
        }
        for i in (0..n).rev() {
            let mut acc = x[i];
            for k in i + 1..n {
                acc -= self.l[(k, i)].conj() * x[k];
            }
            x[i] = acc / self.l[(i, i)];
        }
        x
    }

    pub fn solve_mat(&self, b: &ComplexMatrix) -> ComplexMatrix {
        assert_eq!(b.rows(), self.n(), "rhs row count mismatch");
        let mut out = ComplexMatrix::zeros(b.rows(), b.cols());
        for j in 0..b.cols() {
            let col = self.solve_vec(&b.column(j));
            out.set_column(j, &col);
        }
        out
    }
}

/// Solves `A·X = B` with a pivoted factorization, rejecting systems whose
/// condition estimate exceeds [`CONDITION_LIMIT`].
pub fn solve(a: &ComplexMatrix, b: &ComplexMatrix) -> Result<ComplexMatrix> {
    if b.rows() != a.rows() {
        return Err(Error::InvalidDimension(format!(
            "solve: rhs has {} rows, matrix has {}",
            b.rows(),
            a.rows()
        )));
    }
    let lu = LuFactors::new(a)?;
    let cond = lu.condition_estimate();
    if !cond.is_finite() || cond > CONDITION_LIMIT {
        return Err(Error::SingularMatrix { cond });
    }
    Ok(lu.solve_mat(b))
}

/// Vector right-hand-side form of [`solve`].
pub fn solve_vec(a: &ComplexMatrix, b: &[Complex64]) -> Result<Vec<Complex64>> {
    if b.len() != a.rows() {
        return Err(Error::InvalidDimension(format!(
            "solve: rhs has {} entries, matrix has {} rows",
            b.len(),
            a.rows()
        )));
    }
    let lu = LuFactors::new(a)?;
    let cond = lu.condition_estimate();
    if !cond.is_finite() || cond > CONDITION_LIMIT {
        return Err(Error::SingularMatrix { cond });
    }
    Ok(lu.solve_vec(b))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::numerics::matrix::norm_sqr;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    fn c(re: f64, im: f64) -> Complex64 {
        Complex64::new(re, im)
    }

    fn random_matrix(n: usize, rng: &mut ChaCha8Rng) -> ComplexMatrix {
        ComplexMatrix::from_fn(n, n, |_, _| c(rng.gen::<f64>() - 0.5, rng.gen::<f64>() - 0.5))
    }

    #[test]
    fn solve_identity_returns_rhs() {
        let i4 = ComplexMatrix::identity(4);
        let b = vec![c(1.0, 2.0), c(-3.0, 0.0), c(0.0, 0.0), c(0.5, -0.5)];
        let x = solve_vec(&i4, &b).unwrap();
        for (xi, bi) in x.iter().zip(&b) {
            assert!((xi - bi).norm() < 1e-15);
        }
    }

    #[test]
    fn solve_diagonal_divides() {
        let a = ComplexMatrix::from_diag(&[c(2.0, 0.0), c(0.0, 4.0)]);
        let x = solve_vec(&a, &[c(2.0, 2.0), c(4.0, 0.0)]).unwrap();
        assert!((x[0] - c(1.0, 1.0)).norm() < 1e-15);
        assert!((x[1] - c(0.0, -1.0)).norm() < 1e-15);
    }

    #[test]
    fn random_systems_have_small_residual() {
        // well-conditioned via diagonal dominance
        let mut rng = ChaCha8Rng::seed_from_u64(42);
        for trial in 0..8 {
            let n = 64;
            let mut a = random_matrix(n, &mut rng);
            for i in 0..n {
                a[(i, i)] += c(4.0, 1.0);
            }
            let b: Vec<Complex64> = (0..n).map(|_| c(rng.gen::<f64>() - 0.5, rng.gen::<f64>() - 0.5)).collect();
            let x = solve_vec(&a, &b).unwrap();
            let r: Vec<Complex64> =
                a.mul_vec(&x).iter().zip(&b).map(|(ax, bi)| ax - bi).collect();
            let rel = norm_sqr(&r).sqrt() / norm_sqr(&b).sqrt();
            assert!(rel < 1e-9, "trial {trial}: residual {rel:.3e}");
        }
    }

    #[test]
    fn exactly_singular_matrix_is_rejected() {
        // rank-1
        let a = ComplexMatrix::from_fn(3, 3, |i, j| c((i + 1) as f64 * (j + 1) as f64, 0.0));
        match solve_vec(&a, &[c(1.0, 0.0); 3]) {
            Err(Error::SingularMatrix { .. }) => {}
            other => panic!("expected singular error, got {other:?}"),
        }
    }

    #[test]
    fn condition_estimate_tracks_known_conditioning() {
        let a = ComplexMatrix::from_diag(&[c(1.0, 0.0), c(1e-8, 0.0)]);
        let lu = LuFactors::new(&a).unwrap();
        let cond = lu.condition_estimate();
        assert!(cond > 1e7 && cond < 1e9, "cond {cond:.3e}");

        let mut rng = ChaCha8Rng::seed_from_u64(7);
        let mut well = random_matrix(32, &mut rng);
        for i in 0..32 {
            well[(i, i)] += c(8.0, 0.0);
        }
        let cond = LuFactors::new(&well).unwrap().condition_estimate();
        assert!(cond < 1e3, "cond {cond:.3e}");
    }

    #[test]
    fn adjoint_solve_matches_hermitian_system() {
        let mut rng = ChaCha8Rng::seed_from_u64(3);
        let n = 16;
        let mut a = random_matrix(n, &mut rng);
        for i in 0..n {
            a[(i, i)] += c(3.0, 0.0);
        }
        let b: Vec<Complex64> = (0..n).map(|_| c(rng.gen(), rng.gen())).collect();
        let lu = LuFactors::new(&a).unwrap();
        let x = lu.solve_adjoint_vec(&b);
        let r: Vec<Complex64> =
            a.hermitian().mul_vec(&x).iter().zip(&b).map(|(ax, bi)| ax - bi).collect();
        assert!(norm_sqr(&r).sqrt() < 1e-10 * norm_sqr(&b).sqrt());
    }

    #[test]
    fn cholesky_solves_hermitian_positive_definite_system() {
        let mut rng = ChaCha8Rng::seed_from_u64(11);
        let n = 48;
        let x = random_matrix(n, &mut rng);
        let mut a = x.gram();
        a.add_scaled_identity(1.0);
        let b: Vec<Complex64> = (0..n).map(|_| c(rng.gen(), rng.gen())).collect();
        let ch = CholeskyFactors::new(&a).unwrap();
        let sol = ch.solve_vec(&b);
        let r: Vec<Complex64> =
            a.mul_vec(&sol).iter().zip(&b).map(|(ax, bi)| ax - bi).collect();
        assert!(norm_sqr(&r).sqrt() < 1e-9 * norm_sqr(&b).sqrt());
    }

    #[test]
    fn cholesky_rejects_indefinite_matrix() {
        let a = ComplexMatrix::from_diag(&[c(1.0, 0.0), c(-1.0, 0.0)]);
        assert!(matches!(CholeskyFactors::new(&a), Err(Error::Numerical(_))));
    }

    #[test]
    fn lu_and_cholesky_agree_on_hermitian_system() {
        let mut rng = ChaCha8Rng::seed_from_u64(19);
        let n = 24;
        let x = random_matrix(n, &mut rng);
        let mut a = x.gram();
        a.add_scaled_identity(0.5);
        let b: Vec<Complex64> = (0..n).map(|_| c(rng.gen(), rng.gen())).collect();
        let via_lu = LuFactors::new(&a).unwrap().solve_vec(&b);
        let via_ch = CholeskyFactors::new(&a).unwrap().solve_vec(&b);
        for (l, r) in via_lu.iter().zip(&via_ch) {
            assert!((l - r).norm() < 1e-9);
        }
    }
}
