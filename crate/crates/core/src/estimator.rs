//! Pilot-aided channel estimators.
//!
//! In the frequency domain one received block is
//! `W_D·y = B·h + Ψ + W_D·w` with `B = X_r·F_N`, `X_r = diag(W_D·A·S·d_r)`
//! the known pilot spectrum and `Ψ = diag(W_D·A·T·d_d)·F_N·h` the random
//! data-on-pilot interference. The LMMSE gain treats `Ψ` as noise with
//! covariance `Σ_ΨΨ` and reads
//!
//! `G = Σ_hh·Bᴴ·[B·Σ_hh·Bᴴ + Σ_ΨΨ + N₀·I]⁻¹·W_D`,
//!
//! applied to the time-domain received block. The interference covariance
//! follows from `E{u·uᴴ} = E_s·(W_D A T)(W_D A T)ᴴ` for `u = W_D·A·T·d_d`:
//! `Σ_ΨΨ = E_s·(F_N·Σ_hh·F_Nᴴ) ⊙ (W_D A T·Tᴴ Aᴴ W_Dᴴ)` elementwise.

use crate::channel::PowerDelayProfile;
use crate::error::{Error, Result};
use crate::modem::TransmitterMatrix;
use crate::numerics::matrix::dot;
use crate::numerics::{CholeskyFactors, ComplexMatrix, Dft};
use crate::pilot::PilotScheme;
use num_complex::Complex64;

/// `E_s·(F_N·Σ_hh·F_Nᴴ) ⊙ (W_D·A·T·Tᴴ·Aᴴ·W_Dᴴ)` from the raw factors.
pub fn interference_covariance(
    sigma_hh: &[f64],
    a: &ComplexMatrix,
    t: &ComplexMatrix,
    es: f64,
) -> Result<ComplexMatrix> {
    if a.rows() != a.cols() || a.rows() != t.rows() {
        return Err(Error::InvalidDimension(format!(
            "transmitter {}×{} against data map with {} rows",
            a.rows(),
            a.cols(),
            t.rows()
        )));
    }
    let d = a.rows();
    let dft = Dft::new(d)?;
    let prod = a.mul(t);
    let mut image = ComplexMatrix::zeros(d, t.cols());
    for j in 0..t.cols() {
        image.set_column(j, &dft.apply(&prod.column(j)));
    }
    interference_covariance_from_image(sigma_hh, &image, es)
}

/// Same covariance given the precomputed data image `C = W_D·A·T`.
///
/// The Toeplitz factor `F_N·Σ_hh·F_Nᴴ` has entries `t[(r−c) mod D]` with
/// `t = FFT` of the zero-padded tap powers, so only its first column is
/// formed.
pub fn interference_covariance_from_image(
    sigma_hh: &[f64],
    data_image: &ComplexMatrix,
    es: f64,
) -> Result<ComplexMatrix> {
    let d = data_image.rows();
    if sigma_hh.len() > d {
        return Err(Error::InvalidDimension(format!(
            "{} tap powers exceed the {d} frequency bins",
            sigma_hh.len()
        )));
    }
    if !es.is_finite() || es <= 0.0 {
        return Err(Error::InvalidParameter(format!("symbol energy {es} must be positive")));
    }
    let dft = Dft::new(d)?;
    let padded: Vec<Complex64> =
        sigma_hh.iter().map(|&p| Complex64::new(p, 0.0)).collect();
    let toeplitz_col = dft.spectrum(&padded);

    let mut out = data_image.gram();
    for r in 0..d {
        for c in 0..d {
            out[(r, c)] *= es * toeplitz_col[(r + d - c) % d];
        }
    }
    Ok(out)
}

/// LMMSE channel estimator for one (scheme, SNR) operating point; immutable
/// and shared read-only across trial workers.
#[derive(Debug, Clone)]
pub struct LmmseEstimator {
    /// `G` (N×D), applied to the time-domain received block.
    gain: ComplexMatrix,
    /// `G·W_Dᴴ` (N×D): the gain acting on the received spectrum.
    gain_fd: ComplexMatrix,
    /// Diagonal of `X_r = diag(W_D·A·S·d_r)`.
    x_r: Vec<Complex64>,
    /// Diagonal of `Σ_hh`, the tap powers.
    sigma_hh: Vec<f64>,
    sigma_psi: ComplexMatrix,
    n0: f64,
    es: f64,
    expected_mse: f64,
}

impl LmmseEstimator {
    pub fn new(
        x_r: Vec<Complex64>,
        sigma_hh: Vec<f64>,
        sigma_psi: ComplexMatrix,
        n0: f64,
        es: f64,
    ) -> Result<Self> {
        let d = x_r.len();
        let n = sigma_hh.len();
        if sigma_psi.rows() != d || sigma_psi.cols() != d {
            return Err(Error::InvalidDimension(format!(
                "interference covariance {}×{} for block length {d}",
                sigma_psi.rows(),
                sigma_psi.cols()
            )));
        }
        if n == 0 || n > d {
            return Err(Error::InvalidDimension(format!(
                "{n} tap powers for block length {d}"
            )));
        }
        if !n0.is_finite() || n0 < 0.0 {
            return Err(Error::InvalidParameter(format!("noise power {n0} must be ≥ 0")));
        }
        if !es.is_finite() || es <= 0.0 {
            return Err(Error::InvalidParameter(format!("symbol energy {es} must be positive")));
        }

        let b = pilot_observation_matrix(&x_r, n);
        let bracket = observation_bracket(&b, &sigma_hh, &sigma_psi, n0);

        let chol = CholeskyFactors::new(&bracket)
            .map_err(|_| Error::SingularMatrix { cond: f64::INFINITY })?;
        let y = chol.solve_mat(&b);

        let mut gain_fd = ComplexMatrix::zeros(n, d);
        for (r, &p) in sigma_hh.iter().enumerate() {
            for (c, v) in gain_fd.row_mut(r).iter_mut().enumerate() {
                *v = y[(c, r)].conj() * p;
            }
        }

        // expected square error of ĥ = G·y, i.e. the error trace expression
        // evaluated at this gain
        let mut expected_mse: f64 = sigma_hh.iter().sum();
        for (n_idx, &p) in sigma_hh.iter().enumerate() {
            let t_nn = dot(gain_fd.row(n_idx), &b.column(n_idx));
            expected_mse -= 2.0 * p * t_nn.re;
        }
        for r in 0..n {
            let row = gain_fd.row(r);
            let conj_row: Vec<Complex64> = row.iter().map(|v| v.conj()).collect();
            let m_cr = bracket.mul_vec(&conj_row);
            expected_mse += dot(row, &m_cr).re;
        }

        let dft = Dft::new(d)?;
        let mut gain = ComplexMatrix::zeros(n, d);
        for r in 0..n {
            // W_D is symmetric, so (row·W_D)ᵀ = W_D·rowᵀ
            gain.row_mut(r).copy_from_slice(&dft.apply(gain_fd.row(r)));
        }

        Ok(Self { gain, gain_fd, x_r, sigma_hh, sigma_psi, n0, es, expected_mse })
    }

    /// Builds the estimator for a scheme over an exponential-profile channel,
    /// deriving `X_r` and `Σ_ΨΨ` from the transmitter.
    pub fn for_scheme(
        tx: &TransmitterMatrix,
        scheme: &PilotScheme,
        pdp: &PowerDelayProfile,
        n0: f64,
        es: f64,
        dft: &Dft,
    ) -> Result<Self> {
        let x_r = scheme.pilot_image(tx, dft)?;
        let image = scheme.data_image(tx, dft)?;
        let sigma_psi = interference_covariance_from_image(pdp.powers(), &image, es)?;
        Self::new(x_r, pdp.powers().to_vec(), sigma_psi, n0, es)
    }

    pub fn gain(&self) -> &ComplexMatrix {
        &self.gain
    }

    pub fn x_r(&self) -> &[Complex64] {
        &self.x_r
    }

    pub fn sigma_hh(&self) -> &[f64] {
        &self.sigma_hh
    }

    pub fn sigma_psi(&self) -> &ComplexMatrix {
        &self.sigma_psi
    }

    pub fn n0(&self) -> f64 {
        self.n0
    }

    pub fn es(&self) -> f64 {
        self.es
    }

    pub fn n_taps(&self) -> usize {
        self.sigma_hh.len()
    }

    pub fn d(&self) -> usize {
        self.x_r.len()
    }

    /// Analytic `E‖h − G·y‖²` at this gain.
    pub fn expected_mse(&self) -> f64 {
        self.expected_mse
    }

    /// `ĥ = G·y` from the time-domain received block.
    pub fn estimate(&self, y: &[Complex64]) -> Result<Vec<Complex64>> {
        if y.len() != self.d() {
            return Err(Error::InvalidDimension(format!(
                "received block of {} for an estimator over {}",
                y.len(),
                self.d()
            )));
        }
        Ok(self.gain.mul_vec(y))
    }

    /// Frobenius norm of the error-gradient with respect to `G*`,
    /// `−Σ_hh·Bᴴ·W_D + G·[W_Dᴴ·B·Σ_hh·Bᴴ·W_D + W_Dᴴ·Σ_ΨΨ·W_D + N₀·I]`,
    /// which the closed form drives to zero.
    pub fn stationarity_residual(&self) -> Result<f64> {
        let d = self.d();
        let n = self.n_taps();
        let dft = Dft::new(d)?;
        let b = pilot_observation_matrix(&self.x_r, n);
        let bracket = observation_bracket(&b, &self.sigma_hh, &self.sigma_psi, self.n0);

        // G·(Wᴴ·M·W) − Σ·Bᴴ·W = (G_fd·M − Σ·Bᴴ)·W, applied literally
        let mut residual = ComplexMatrix::zeros(n, d);
        for r in 0..n {
            let conj_row: Vec<Complex64> =
                self.gain_fd.row(r).iter().map(|v| v.conj()).collect();
            let m_row = bracket.mul_vec(&conj_row); // (M·G_fdᴴ) column r
            let p = self.sigma_hh[r];
            let row: Vec<Complex64> = (0..d)
                .map(|c| m_row[c].conj() - p * b[(c, r)].conj())
                .collect();
            residual.row_mut(r).copy_from_slice(&dft.apply(&row));
        }
        Ok(residual.frobenius_norm())
    }
}

/// `B·Σ_hh·Bᴴ + Σ_ΨΨ + N₀·I`, the covariance of the received spectrum.
fn observation_bracket(
    b: &ComplexMatrix,
    sigma_hh: &[f64],
    sigma_psi: &ComplexMatrix,
    n0: f64,
) -> ComplexMatrix {
    let mut bs = b.clone();
    for r in 0..bs.rows() {
        for (v, &p) in bs.row_mut(r).iter_mut().zip(sigma_hh) {
            *v *= p.sqrt();
        }
    }
    let mut bracket = bs.gram().add(sigma_psi);
    bracket.add_scaled_identity(n0);
    bracket
}

/// `B = diag(x_r)·F_N` (D×N).
fn pilot_observation_matrix(x_r: &[Complex64], n: usize) -> ComplexMatrix {
    let d = x_r.len();
    let twiddle: Vec<Complex64> = (0..d)
        .map(|r| Complex64::from_polar(1.0, -2.0 * std::f64::consts::PI * r as f64 / d as f64))
        .collect();
    ComplexMatrix::from_fn(d, n, |b, t| x_r[b] * twiddle[b * t % d])
}

/// Least-squares estimate from the pinned pilot bins:
/// solves `diag(d_r)·[F_N]_{ℐ,·}·h = [W_D·y]_ℐ`.
pub fn ls_estimate(
    y: &[Complex64],
    scheme: &PilotScheme,
    n_taps: usize,
    dft: &Dft,
) -> Result<Vec<Complex64>> {
    let d = scheme.d();
    if y.len() != d || dft.size() != d {
        return Err(Error::InvalidDimension(format!(
            "received block of {} and transform of {} for a scheme over {d}",
            y.len(),
            dft.size()
        )));
    }
    if n_taps == 0 || scheme.p() < n_taps {
        return Err(Error::InvalidDimension(format!(
            "{} pilot bins cannot resolve {n_taps} taps",
            scheme.p()
        )));
    }
    let p = scheme.p();
    let twiddle: Vec<Complex64> = (0..d)
        .map(|r| Complex64::from_polar(1.0, -2.0 * std::f64::consts::PI * r as f64 / d as f64))
        .collect();
    let m = ComplexMatrix::from_fn(p, n_taps, |i, t| {
        scheme.d_r()[i] * twiddle[scheme.bins().bins()[i] * t % d]
    });
    let y_f = dft.apply(y);
    let rhs: Vec<Complex64> = scheme.bins().bins().iter().map(|&b| y_f[b]).collect();

    // normal equations; the system is tiny (p×N)
    let mh = m.hermitian();
    let normal = mh.mul(&m);
    let chol = CholeskyFactors::new(&normal)
        .map_err(|_| Error::SingularMatrix { cond: f64::INFINITY })?;
    Ok(chol.solve_vec(&mh.mul_vec(&rhs)))
}

/// Squared estimation error `‖h − ĥ‖²` of one realization.
pub fn channel_mse(h: &[Complex64], h_hat: &[Complex64]) -> Result<f64> {
    if h.len() != h_hat.len() {
        return Err(Error::InvalidDimension(format!(
            "channel of {} against estimate of {}",
            h.len(),
            h_hat.len()
        )));
    }
    Ok(h.iter().zip(h_hat).map(|(a, b)| (a - b).norm_sqr()).sum())
}
