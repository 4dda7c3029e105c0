//! Multipath Rayleigh channel: power delay profiles, tap draws, and block
//! transmission (circular convolution plus AWGN).
//!
//! With a cyclic prefix at least as long as the channel memory, the linear
//! channel acts circularly on the payload, so a block is propagated as
//! `y = H·x + w` with `H` the circulant of the zero-padded taps. The
//! frequency-domain form `y = Wᴴ·diag(F_N h)·W·x + w` is what
//! [`apply_channel`] evaluates via FFTs.

use crate::error::{Error, Result};
use crate::numerics::Dft;
use num_complex::Complex64;
use rand::Rng;

/// Per-tap average powers, normalized to unit total power.
#[derive(Debug, Clone, PartialEq)]
pub struct PowerDelayProfile {
    powers: Vec<f64>,
}

impl PowerDelayProfile {
    /// Exponential profile decaying from 0 dB to −10 dB across `n` taps,
    /// normalized to unit sum. A single tap gives the flat profile `[1]`.
    pub fn exponential(n: usize) -> Result<Self> {
        if n == 0 {
            return Err(Error::InvalidParameter("delay profile needs at least one tap".into()));
        }
        let powers = if n == 1 {
            vec![1.0]
        } else {
            (0..n).map(|i| 10f64.powf(-(i as f64) / (n as f64 - 1.0))).collect()
        };
        Self::from_powers(&powers)
    }

    /// Normalizes an explicit profile. Powers must be non-negative with a
    /// positive sum.
    pub fn from_powers(powers: &[f64]) -> Result<Self> {
        if powers.is_empty() {
            return Err(Error::InvalidParameter("delay profile needs at least one tap".into()));
        }
        if powers.iter().any(|p| !p.is_finite() || *p < 0.0) {
            return Err(Error::InvalidParameter("delay profile powers must be finite and non-negative".into()));
        }
        let sum: f64 = powers.iter().sum();
        if sum <= 0.0 {
            return Err(Error::InvalidParameter("delay profile has zero total power".into()));
        }
        Ok(Self { powers: powers.iter().map(|p| p / sum).collect() })
    }

    pub fn len(&self) -> usize {
        self.powers.len()
    }

    pub fn is_empty(&self) -> bool {
        self.powers.is_empty()
    }

    pub fn powers(&self) -> &[f64] {
        &self.powers
    }

    /// Draws `h` with independent `CN(0, pᵢ)` taps: `hᵢ = √pᵢ·qᵢ`.
    pub fn draw(&self, rng: &mut impl Rng) -> ChannelRealization {
        let taps = self
            .powers
            .iter()
            .map(|&p| complex_gaussian(rng) * p.sqrt())
            .collect();
        ChannelRealization { taps, pdp: self.clone() }
    }
}

/// One realization of the tapped-delay channel.
#[derive(Debug, Clone)]
pub struct ChannelRealization {
    taps: Vec<Complex64>,
    pdp: PowerDelayProfile,
}

impl ChannelRealization {
    pub fn new(taps: Vec<Complex64>, pdp: PowerDelayProfile) -> Result<Self> {
        if taps.len() != pdp.len() {
            return Err(Error::InvalidDimension(format!(
                "{} taps against a {}-tap delay profile",
                taps.len(),
                pdp.len()
            )));
        }
        Ok(Self { taps, pdp })
    }

    pub fn taps(&self) -> &[Complex64] {
        &self.taps
    }

    pub fn len(&self) -> usize {
        self.taps.len()
    }

    pub fn is_empty(&self) -> bool {
        self.taps.is_empty()
    }

    pub fn pdp(&self) -> &PowerDelayProfile {
        &self.pdp
    }

    /// Unnormalized frequency response `F_N·h` on the block's D bins.
    pub fn spectrum(&self, dft: &Dft) -> Vec<Complex64> {
        dft.spectrum(&self.taps)
    }
}

/// Noise level expressed as the complex noise power N₀.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct NoiseSpec {
    n0: f64,
}

impl NoiseSpec {
    pub fn noiseless() -> Self {
        Self { n0: 0.0 }
    }

    /// `N₀ = E_s·10^(−snr_db/10)`.
    pub fn from_snr_db(es: f64, snr_db: f64) -> Self {
        Self { n0: es * 10f64.powf(-snr_db / 10.0) }
    }

    pub fn n0(&self) -> f64 {
        self.n0
    }
}

/// Standard circularly symmetric complex Gaussian `CN(0, 1)`.
///
/// Polar Box-Muller; consumes exactly two uniform draws per sample, which the
/// reproducibility contract of the sweeps relies on.
pub fn complex_gaussian(rng: &mut impl Rng) -> Complex64 {
    let u1: f64 = 1.0 - rng.gen::<f64>(); // (0, 1], keeps the log finite
    let u2: f64 = rng.gen();
    let r = (-u1.ln()).sqrt();
    let theta = 2.0 * std::f64::consts::PI * u2;
    Complex64::from_polar(r, theta)
}

/// `len` independent `CN(0, n0)` samples. Draws are consumed even when
/// `n0 = 0`, so noiseless and noisy runs share their random streams.
pub fn awgn(n0: f64, len: usize, rng: &mut impl Rng) -> Vec<Complex64> {
    let scale = n0.sqrt();
    (0..len).map(|_| complex_gaussian(rng) * scale).collect()
}

/// Propagates one cyclic block: `y = Wᴴ·diag(F_N h)·W·x + w`.
///
/// `x` is the CP-stripped payload of length D; the prefix is assumed long
/// enough for the channel to act circularly.
pub fn apply_channel(
    h: &ChannelRealization,
    x: &[Complex64],
    noise: &NoiseSpec,
    dft: &Dft,
    rng: &mut impl Rng,
) -> Result<Vec<Complex64>> {
    let d = x.len();
    if dft.size() != d {
        return Err(Error::InvalidDimension(format!(
            "transform size {} does not match block length {d}",
            dft.size()
        )));
    }
    if h.len() > d {
        return Err(Error::InvalidDimension(format!(
            "channel memory {} exceeds block length {d}",
            h.len()
        )));
    }
    let hf = h.spectrum(dft);
    let mut xf = dft.apply(x);
    for (v, g) in xf.iter_mut().zip(&hf) {
        *v *= g;
    }
    let mut y = dft.apply_inverse(&xf);
    for (v, w) in y.iter_mut().zip(awgn(noise.n0(), d, rng)) {
        *v += w;
    }
    Ok(y)
}
