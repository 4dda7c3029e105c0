//! Dense complex linear algebra and DFT utilities.
//!
//! Everything operates on [`ComplexMatrix`], a row-major dense matrix over
//! `Complex64`. The sizes in this crate are modest (D = K·M up to a few
//! thousand), so dense storage with cache-aware loops is sufficient; the
//! performance-critical transforms go through [`fourier::Dft`], which wraps an
//! FFT instead of materializing DFT matrices.

pub mod factor;
pub mod fourier;
pub mod matrix;

pub use factor::{solve, solve_vec, CholeskyFactors, LuFactors};
pub use fourier::{circulant, dft_matrix, partial_fourier, Dft};
pub use matrix::ComplexMatrix;
