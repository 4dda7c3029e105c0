//! QPSK symbol mapping and the zero-forcing frequency-domain equalizer.

use crate::error::{Error, Result};
use crate::numerics::Dft;
use num_complex::Complex64;
use rand::Rng;

/// Gray-mapped QPSK alphabet `{(±1±j)·√(E_s/2)}`.
///
/// Index bit 1 selects the real sign, bit 0 the imaginary sign, so
/// constellation neighbours differ in exactly one bit:
/// 0 → (+,+), 1 → (+,−), 2 → (−,+), 3 → (−,−).
#[derive(Debug, Clone, Copy)]
pub struct Qpsk {
    es: f64,
    half: f64,
}

impl Qpsk {
    pub fn new(es: f64) -> Result<Self> {
        if !es.is_finite() || es <= 0.0 {
            return Err(Error::InvalidParameter(format!("symbol energy {es} must be positive")));
        }
        Ok(Self { es, half: (es / 2.0).sqrt() })
    }

    pub fn es(&self) -> f64 {
        self.es
    }

    pub fn symbol(&self, index: u8) -> Complex64 {
        let re = if index & 2 == 0 { self.half } else { -self.half };
        let im = if index & 1 == 0 { self.half } else { -self.half };
        Complex64::new(re, im)
    }

    /// Nearest constellation point; ties fall toward positive real, then
    /// positive imaginary.
    pub fn detect(&self, v: Complex64) -> u8 {
        let mut index = 0;
        if v.re < 0.0 {
            index |= 2;
        }
        if v.im < 0.0 {
            index |= 1;
        }
        index
    }

    pub fn draw(&self, rng: &mut impl Rng) -> u8 {
        rng.gen_range(0..4)
    }
}

/// Zero-forcing equalization `x̂ = W_Dᴴ·diag(F_N·ĥ)⁻¹·W_D·y`.
///
/// An identically zero frequency coefficient of `ĥ` cannot be inverted and is
/// reported so the caller can count the block as fully errored.
pub fn equalize_fd(y: &[Complex64], h_hat: &[Complex64], dft: &Dft) -> Result<Vec<Complex64>> {
    let d = dft.size();
    if y.len() != d || h_hat.is_empty() || h_hat.len() > d {
        return Err(Error::InvalidDimension(format!(
            "block of {} and {} taps for a transform of {d}",
            y.len(),
            h_hat.len()
        )));
    }
    let hf = dft.spectrum(h_hat);
    if let Some(bin) = hf.iter().position(|v| v.re == 0.0 && v.im == 0.0) {
        return Err(Error::EqualizationSingular { bin });
    }
    let mut y_f = dft.apply(y);
    for (v, g) in y_f.iter_mut().zip(&hf) {
        *v /= g;
    }
    Ok(dft.apply_inverse(&y_f))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::channel::{apply_channel, ChannelRealization, NoiseSpec, PowerDelayProfile};
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    fn c(re: f64, im: f64) -> Complex64 {
        Complex64::new(re, im)
    }

    #[test]
    fn symbols_have_energy_es_and_gray_neighbors() {
        for es in [1.0, 2.0, 0.5] {
            let q = Qpsk::new(es).unwrap();
            for idx in 0..4u8 {
                assert!((q.symbol(idx).norm_sqr() - es).abs() < 1e-12);
            }
        }
        // axis-adjacent constellation points differ in exactly one index bit
        let q = Qpsk::new(1.0).unwrap();
        for (a, b) in [(0u8, 1u8), (0, 2), (1, 3), (2, 3)] {
            let sa = q.symbol(a);
            let sb = q.symbol(b);
            assert!(sa.re == sb.re || sa.im == sb.im, "{a} and {b} are not axis neighbours");
            assert_eq!((a ^ b).count_ones(), 1);
        }
        assert!(Qpsk::new(0.0).is_err());
        assert!(Qpsk::new(f64::NAN).is_err());
    }

    #[test]
    fn detect_picks_quadrants_and_breaks_ties_positive() {
        let q = Qpsk::new(1.0).unwrap();
        assert_eq!(q.detect(c(0.7, 0.7)), 0);
        assert_eq!(q.detect(c(0.7, -0.7)), 1);
        assert_eq!(q.detect(c(-0.7, 0.7)), 2);
        assert_eq!(q.detect(c(-0.7, -0.7)), 3);
        for idx in 0..4u8 {
            assert_eq!(q.detect(q.symbol(idx)), idx);
        }
        assert_eq!(q.detect(c(0.0, 0.0)), 0);
        assert_eq!(q.detect(c(0.0, -0.3)), 1);
        assert_eq!(q.detect(c(-0.4, 0.0)), 2);
    }

    #[test]
    fn detect_is_nearest_neighbor() {
        let q = Qpsk::new(2.0).unwrap();
        let mut rng = ChaCha8Rng::seed_from_u64(3);
        for _ in 0..200 {
            let v = c(rng.gen::<f64>() * 4.0 - 2.0, rng.gen::<f64>() * 4.0 - 2.0);
            let got = q.detect(v);
            let brute = (0..4u8)
                .min_by(|&a, &b| {
                    (v - q.symbol(a))
                        .norm_sqr()
                        .partial_cmp(&(v - q.symbol(b)).norm_sqr())
                        .unwrap()
                })
                .unwrap();
            assert!((v - q.symbol(got)).norm_sqr() <= (v - q.symbol(brute)).norm_sqr() + 1e-15);
        }
    }

    #[test]
    fn flat_channel_equalizes_to_identity() {
        let dft = Dft::new(4).unwrap();
        let y = vec![c(1.0, 2.0), c(-0.5, 0.0), c(0.0, 1.0), c(3.0, -1.0)];
        let xh = equalize_fd(&y, &[c(1.0, 0.0)], &dft).unwrap();
        for (a, b) in xh.iter().zip(&y) {
            assert!((a - b).norm() < 1e-12);
        }
    }

    #[test]
    fn equalizer_inverts_channel_without_noise() {
        let d = 16;
        let dft = Dft::new(d).unwrap();
        let pdp = PowerDelayProfile::exponential(4).unwrap();
        let mut rng = ChaCha8Rng::seed_from_u64(5);
        for _ in 0..5 {
            let h = pdp.draw(&mut rng);
            let x: Vec<Complex64> = (0..d)
                .map(|_| c(rng.gen::<f64>() - 0.5, rng.gen::<f64>() - 0.5))
                .collect();
            let y = apply_channel(&h, &x, &NoiseSpec::noiseless(), &dft, &mut rng).unwrap();
            let xh = equalize_fd(&y, h.taps(), &dft).unwrap();
            let err: f64 =
                xh.iter().zip(&x).map(|(a, b)| (a - b).norm_sqr()).sum::<f64>().sqrt();
            assert!(err < 1e-9, "residual {err:.3e}");
        }

        // pure delay gets undone
        let pdp2 = PowerDelayProfile::from_powers(&[0.5, 0.5]).unwrap();
        let delay = ChannelRealization::new(vec![c(0.0, 0.0), c(1.0, 0.0)], pdp2).unwrap();
        let x = vec![c(1.0, 0.0), c(2.0, 0.0), c(3.0, 0.0), c(4.0, 0.0)];
        let dft4 = Dft::new(4).unwrap();
        let y =
            apply_channel(&delay, &x, &NoiseSpec::noiseless(), &dft4, &mut rng).unwrap();
        let xh = equalize_fd(&y, delay.taps(), &dft4).unwrap();
        for (a, b) in xh.iter().zip(&x) {
            assert!((a - b).norm() < 1e-12);
        }
    }

    #[test]
    fn zero_frequency_coefficient_is_reported() {
        let dft = Dft::new(8).unwrap();
        let y = vec![c(1.0, 0.0); 8];
        // taps [1, −1] null the DC bin exactly
        let err = equalize_fd(&y, &[c(1.0, 0.0), c(-1.0, 0.0)], &dft).unwrap_err();
        match err {
            Error::EqualizationSingular { bin } => assert_eq!(bin, 0),
            other => panic!("unexpected error {other}"),
        }
    }

    #[test]
    fn equalizer_shape_checks() {
        let dft = Dft::new(4).unwrap();
        assert!(equalize_fd(&[c(0.0, 0.0); 3], &[c(1.0, 0.0)], &dft).is_err());
        assert!(equalize_fd(&[c(0.0, 0.0); 4], &[], &dft).is_err());
        assert!(equalize_fd(&[c(0.0, 0.0); 4], &[c(1.0, 0.0); 5], &dft).is_err());
    }
}
