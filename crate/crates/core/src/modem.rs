//! GFDM waveform: prototype filters, the transmitter matrix, and cyclic
//! prefix handling.
//!
//! A block carries D = K·M symbols: K subcarriers, each with M subsymbols.
//! Column k + m·K of the transmitter matrix is the prototype filter
//! circularly shifted by m·K samples and modulated to subcarrier k:
//! `[g_{k,m}]_n = g[(n - mK) mod D] · e^{j2πkn/K}`.

use crate::error::{Error, Result};
use crate::numerics::factor::{LuFactors, CONDITION_LIMIT};
use crate::numerics::{ComplexMatrix, Dft};
use num_complex::Complex64;
use std::sync::OnceLock;

/// Prototype filter family, specified by its frequency-domain mask.
#[derive(Debug, Clone, PartialEq)]
pub enum FilterSpec {
    /// Flat mask over the M bins around DC; yields a unitary transmitter.
    Dirichlet,
    /// Raised-cosine mask spanning (1+rolloff)·M bins around DC.
    RaisedCosine { rolloff: f64 },
}

impl FilterSpec {
    /// Short label used in CSV output.
    pub fn label(&self) -> String {
        match self {
            FilterSpec::Dirichlet => "dirichlet".to_string(),
            FilterSpec::RaisedCosine { rolloff } => format!("rc{rolloff}"),
        }
    }
}

/// Block geometry and waveform parameters.
#[derive(Debug, Clone, PartialEq)]
pub struct GfdmConfig {
    k: usize,
    m: usize,
    cp_len: usize,
    filter: FilterSpec,
    active_subcarriers: Vec<usize>,
    active_subsymbols: Vec<usize>,
}

impl GfdmConfig {
    /// All subcarriers and subsymbols active.
    pub fn new(k: usize, m: usize, cp_len: usize, filter: FilterSpec) -> Result<Self> {
        if k == 0 || m == 0 {
            return Err(Error::InvalidParameter(format!(
                "block needs at least one subcarrier and one subsymbol, got K={k}, M={m}"
            )));
        }
        if cp_len > k * m {
            return Err(Error::InvalidParameter(format!(
                "cyclic prefix of {cp_len} exceeds block length {}",
                k * m
            )));
        }
        if let FilterSpec::RaisedCosine { rolloff } = filter {
            if !(0.0..=1.0).contains(&rolloff) || !rolloff.is_finite() {
                return Err(Error::InvalidParameter(format!(
                    "raised-cosine roll-off must lie in [0, 1], got {rolloff}"
                )));
            }
        }
        Ok(Self {
            k,
            m,
            cp_len,
            filter,
            active_subcarriers: (0..k).collect(),
            active_subsymbols: (0..m).collect(),
        })
    }

    /// Restricts the active resource sets. Both must be nonempty, within
    /// range, and free of duplicates.
    pub fn with_active_sets(mut self, subcarriers: Vec<usize>, subsymbols: Vec<usize>) -> Result<Self> {
        validate_index_set(&subcarriers, self.k, "subcarrier")?;
        validate_index_set(&subsymbols, self.m, "subsymbol")?;
        self.active_subcarriers = subcarriers;
        self.active_subsymbols = subsymbols;
        Ok(self)
    }

    pub fn k(&self) -> usize {
        self.k
    }

    pub fn m(&self) -> usize {
        self.m
    }

    /// Block length D = K·M.
    pub fn d(&self) -> usize {
        self.k * self.m
    }

    pub fn cp_len(&self) -> usize {
        self.cp_len
    }

    pub fn filter(&self) -> &FilterSpec {
        &self.filter
    }

    pub fn active_subcarriers(&self) -> &[usize] {
        &self.active_subcarriers
    }

    pub fn active_subsymbols(&self) -> &[usize] {
        &self.active_subsymbols
    }
}

fn validate_index_set(set: &[usize], bound: usize, what: &str) -> Result<()> {
    if set.is_empty() {
        return Err(Error::InvalidParameter(format!("active {what} set is empty")));
    }
    let mut seen = vec![false; bound];
    for &i in set {
        if i >= bound {
            return Err(Error::InvalidParameter(format!(
                "active {what} {i} out of range (bound {bound})"
            )));
        }
        if seen[i] {
            return Err(Error::InvalidParameter(format!("duplicate active {what} {i}")));
        }
        seen[i] = true;
    }
    Ok(())
}

/// Unit-energy prototype filter of length D = K·M for the given family.
///
/// Built as the inverse DFT of the family's frequency mask, then normalized
/// to unit Euclidean norm.
pub fn prototype_filter(filter: &FilterSpec, k: usize, m: usize) -> Result<Vec<Complex64>> {
    if k == 0 || m == 0 {
        return Err(Error::InvalidParameter(format!(
            "prototype filter needs K ≥ 1 and M ≥ 1, got K={k}, M={m}"
        )));
    }
    let d = k * m;
    let mut mask = vec![Complex64::new(0.0, 0.0); d];
    match filter {
        FilterSpec::Dirichlet => {
            // M bins centered at DC, half-open split for even M
            let half_down = (m / 2) as isize;
            let half_up = (m - m / 2) as isize;
            for l in -half_down..half_up {
                mask[l.rem_euclid(d as isize) as usize] = Complex64::new(1.0, 0.0);
            }
        }
        FilterSpec::RaisedCosine { rolloff } => {
            let alpha = *rolloff;
            if !(0.0..=1.0).contains(&alpha) || !alpha.is_finite() {
                return Err(Error::InvalidParameter(format!(
                    "raised-cosine roll-off must lie in [0, 1], got {alpha}"
                )));
            }
            let f1 = (1.0 - alpha) * m as f64 / 2.0;
            let f2 = (1.0 + alpha) * m as f64 / 2.0;
            for (f, v) in mask.iter_mut().enumerate() {
                let l = if f <= d / 2 { f as f64 } else { f as f64 - d as f64 };
                let t = l.abs();
                let amp = if t <= f1 {
                    1.0
                } else if t <= f2 {
                    0.5 * (1.0 + (std::f64::consts::PI * (t - f1) / (alpha * m as f64)).cos())
                } else {
                    0.0
                };
                *v = Complex64::new(amp, 0.0);
            }
        }
    }
    let dft = Dft::new(d)?;
    let mut g = dft.apply_inverse(&mask);
    let norm = g.iter().map(|v| v.norm_sqr()).sum::<f64>().sqrt();
    if norm == 0.0 {
        return Err(Error::Numerical("prototype filter mask is identically zero".into()));
    }
    for v in &mut g {
        *v /= norm;
    }
    Ok(g)
}

/// The D×D GFDM modulation matrix together with its cached ZF inverse.
#[derive(Debug)]
pub struct TransmitterMatrix {
    k: usize,
    m: usize,
    g: Vec<Complex64>,
    a: ComplexMatrix,
    zf: OnceLock<Result<LuFactors>>,
}

impl TransmitterMatrix {
    /// Builds the matrix from an explicit prototype filter of length K·M.
    pub fn new(g: &[Complex64], k: usize, m: usize) -> Result<Self> {
        if k == 0 || m == 0 {
            return Err(Error::InvalidParameter(format!(
                "transmitter needs K ≥ 1 and M ≥ 1, got K={k}, M={m}"
            )));
        }
        let d = k * m;
        if g.len() != d {
            return Err(Error::InvalidDimension(format!(
                "prototype filter has {} samples, block length is {d}",
                g.len()
            )));
        }
        // e^{j2πr/K} for r in 0..K; exponents are reduced mod K exactly
        let phase: Vec<Complex64> = (0..k)
            .map(|r| Complex64::from_polar(1.0, 2.0 * std::f64::consts::PI * r as f64 / k as f64))
            .collect();
        let a = ComplexMatrix::from_fn(d, d, |n, j| {
            let (sc, ss) = (j % k, j / k);
            g[(n + d - ss * k) % d] * phase[sc * n % k]
        });
        Ok(Self { k, m, g: g.to_vec(), a, zf: OnceLock::new() })
    }

    pub fn from_config(config: &GfdmConfig) -> Result<Self> {
        let g = prototype_filter(config.filter(), config.k(), config.m())?;
        Self::new(&g, config.k(), config.m())
    }

    pub fn k(&self) -> usize {
        self.k
    }

    pub fn m(&self) -> usize {
        self.m
    }

    pub fn d(&self) -> usize {
        self.k * self.m
    }

    pub fn prototype(&self) -> &[Complex64] {
        &self.g
    }

    pub fn matrix(&self) -> &ComplexMatrix {
        &self.a
    }

    /// `x = A·d`, evaluated through the filter structure: a K-point inverse
    /// DFT per subsymbol column followed by shifted-prototype accumulation.
    /// Costs O(D·M + M·K²) instead of the dense product's O(D²).
    pub fn modulate(&self, d: &[Complex64]) -> Result<Vec<Complex64>> {
        if d.len() != self.d() {
            return Err(Error::InvalidDimension(format!(
                "modulate: block has {} symbols, expected {}",
                d.len(),
                self.d()
            )));
        }
        let (k, len) = (self.k, self.d());
        let phase: Vec<Complex64> = (0..k)
            .map(|r| Complex64::from_polar(1.0, 2.0 * std::f64::consts::PI * r as f64 / k as f64))
            .collect();
        let mut x = vec![Complex64::new(0.0, 0.0); len];
        let mut t = vec![Complex64::new(0.0, 0.0); k];
        for ss in 0..self.m {
            let col = &d[ss * k..(ss + 1) * k];
            for (r, out) in t.iter_mut().enumerate() {
                let mut acc = Complex64::new(0.0, 0.0);
                for (sc, &v) in col.iter().enumerate() {
                    acc += v * phase[sc * r % k];
                }
                *out = acc;
            }
            let mut gi = (len - ss * k) % len;
            let mut r = 0;
            for slot in x.iter_mut() {
                *slot += self.g[gi] * t[r];
                gi += 1;
                if gi == len {
                    gi = 0;
                }
                r += 1;
                if r == k {
                    r = 0;
                }
            }
        }
        Ok(x)
    }

    /// Zero-forcing demodulation `d̂ = A⁻¹·x̂`; the factorization is built on
    /// first use and reused afterwards.
    pub fn demodulate_zf(&self, x: &[Complex64]) -> Result<Vec<Complex64>> {
        if x.len() != self.d() {
            return Err(Error::InvalidDimension(format!(
                "demodulate: input has {} samples, expected {}",
                x.len(),
                self.d()
            )));
        }
        let lu = self
            .zf
            .get_or_init(|| {
                let lu = LuFactors::new(&self.a)?;
                let cond = lu.condition_estimate();
                if !cond.is_finite() || cond > CONDITION_LIMIT {
                    return Err(Error::SingularMatrix { cond });
                }
                Ok(lu)
            })
            .as_ref()
            .map_err(Clone::clone)?;
        Ok(lu.solve_vec(x))
    }
}

/// Prepends the last `l` samples of `x` as a cyclic prefix.
pub fn add_cp(x: &[Complex64], l: usize) -> Result<Vec<Complex64>> {
    if l > x.len() {
        return Err(Error::InvalidDimension(format!(
            "cyclic prefix of {l} exceeds block length {}",
            x.len()
        )));
    }
    let mut out = Vec::with_capacity(x.len() + l);
    out.extend_from_slice(&x[x.len() - l..]);
    out.extend_from_slice(x);
    Ok(out)
}

/// Drops the first `l` samples.
pub fn remove_cp(s: &[Complex64], l: usize) -> Result<Vec<Complex64>> {
    if l > s.len() {
        return Err(Error::InvalidDimension(format!(
            "cannot remove prefix of {l} from {} samples",
            s.len()
        )));
    }
    Ok(s[l..].to_vec())
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    fn c(re: f64, im: f64) -> Complex64 {
        Complex64::new(re, im)
    }

    fn random_block(d: usize, rng: &mut ChaCha8Rng) -> Vec<Complex64> {
        (0..d).map(|_| c(rng.gen::<f64>() - 0.5, rng.gen::<f64>() - 0.5)).collect()
    }

    fn unitarity_error(a: &ComplexMatrix) -> f64 {
        let gram = a.hermitian().gram(); // AᴴA
        gram.sub(&ComplexMatrix::identity(a.cols())).frobenius_norm()
    }

    #[test]
    fn structured_modulation_equals_the_dense_product() {
        let mut rng = ChaCha8Rng::seed_from_u64(4021);
        for (k, m, filter) in [
            (1, 6, FilterSpec::Dirichlet),
            (6, 1, FilterSpec::Dirichlet),
            (3, 5, FilterSpec::Dirichlet),
            (8, 16, FilterSpec::Dirichlet),
            (4, 4, FilterSpec::RaisedCosine { rolloff: 0.5 }),
            (8, 16, FilterSpec::RaisedCosine { rolloff: 0.9 }),
        ] {
            let cfg = GfdmConfig::new(k, m, 0, filter).unwrap();
            let tx = TransmitterMatrix::from_config(&cfg).unwrap();
            for _ in 0..5 {
                let d = random_block(k * m, &mut rng);
                let fast = tx.modulate(&d).unwrap();
                let dense = tx.matrix().mul_vec(&d);
                let err = fast
                    .iter()
                    .zip(&dense)
                    .map(|(a, b)| (a - b).norm())
                    .fold(0.0f64, f64::max);
                assert!(err < 1e-12, "K={k} M={m}: max deviation {err:.3e}");
            }
        }
    }

    #[test]
    fn trivial_geometry_gives_scalar_filter() {
        let g = prototype_filter(&FilterSpec::Dirichlet, 1, 1).unwrap();
        assert_eq!(g.len(), 1);
        assert!((g[0] - c(1.0, 0.0)).norm() < 1e-15);
        let tm = TransmitterMatrix::new(&g, 1, 1).unwrap();
        assert!((tm.matrix()[(0, 0)] - c(1.0, 0.0)).norm() < 1e-15);
    }

    #[test]
    fn prototype_filters_have_unit_energy() {
        for filter in [FilterSpec::Dirichlet, FilterSpec::RaisedCosine { rolloff: 0.9 }] {
            let g = prototype_filter(&filter, 8, 16).unwrap();
            let e: f64 = g.iter().map(|v| v.norm_sqr()).sum();
            assert!((e - 1.0).abs() < 1e-12, "{filter:?}");
        }
    }

    #[test]
    fn dirichlet_spectrum_is_flat_over_its_band() {
        let (k, m) = (4, 8);
        let d = k * m;
        let g = prototype_filter(&FilterSpec::Dirichlet, k, m).unwrap();
        let spec = Dft::new(d).unwrap().spectrum(&g);
        // occupied bins: -4..4 around DC
        let expected_mag = (d as f64 / m as f64).sqrt();
        for l in -4i64..4 {
            let bin = l.rem_euclid(d as i64) as usize;
            assert!(
                (spec[bin].norm() - expected_mag).abs() < 1e-10,
                "bin {bin}: {}",
                spec[bin].norm()
            );
        }
        for bin in 5..d - 4 {
            assert!(spec[bin].norm() < 1e-10, "bin {bin} should be empty");
        }
    }

    #[test]
    fn raised_cosine_spectrum_follows_the_mask() {
        let (k, m) = (8, 16);
        let d = k * m;
        let alpha = 0.5;
        let g = prototype_filter(&FilterSpec::RaisedCosine { rolloff: alpha }, k, m).unwrap();
        let spec = Dft::new(d).unwrap().spectrum(&g);
        let scale = spec[0].norm(); // mask value 1 at DC
        // flat edge, half-power point, and outer zero of the roll-off
        assert!((spec[4].norm() / scale - 1.0).abs() < 1e-10);
        assert!((spec[8].norm() / scale - 0.5).abs() < 1e-10);
        assert!(spec[12].norm() / scale < 1e-10);
        assert!(spec[13].norm() / scale < 1e-10);
        // symmetric on the negative side
        assert!((spec[d - 8].norm() / scale - 0.5).abs() < 1e-10);
    }

    #[test]
    fn rolloff_outside_unit_interval_is_rejected() {
        for alpha in [-0.1, 1.5, f64::NAN] {
            assert!(
                prototype_filter(&FilterSpec::RaisedCosine { rolloff: alpha }, 4, 4).is_err(),
                "alpha {alpha}"
            );
        }
    }

    #[test]
    fn transmitter_columns_match_direct_evaluation() {
        // column k+mK must equal the shifted, modulated prototype
        let (k, m) = (8, 128);
        let d = k * m;
        let g = prototype_filter(&FilterSpec::RaisedCosine { rolloff: 0.9 }, k, m).unwrap();
        let tm = TransmitterMatrix::new(&g, k, m).unwrap();
        let mut rng = ChaCha8Rng::seed_from_u64(77);
        for _ in 0..10 {
            let (sc, ss) = (rng.gen_range(0..k), rng.gen_range(0..m));
            let j = sc + ss * k;
            for n in 0..d {
                let angle = 2.0 * std::f64::consts::PI * ((sc * n) % k) as f64 / k as f64;
                let want = g[(n + d - ss * k) % d] * Complex64::from_polar(1.0, angle);
                let got = tm.matrix()[(n, j)];
                assert!((got - want).norm() < 1e-12, "col ({sc},{ss}), sample {n}");
            }
        }
    }

    #[test]
    fn two_subcarrier_matrix_has_alternating_phase() {
        let g = [c(0.6, 0.0), c(0.8, 0.0)];
        let tm = TransmitterMatrix::new(&g, 2, 1).unwrap();
        // column (k=1, m=0): g[n]·e^{jπn}
        assert!((tm.matrix()[(0, 1)] - c(0.6, 0.0)).norm() < 1e-15);
        assert!((tm.matrix()[(1, 1)] - c(-0.8, 0.0)).norm() < 1e-15);
    }

    #[test]
    fn dirichlet_transmitter_is_unitary_at_small_sizes() {
        for (k, m) in [(4, 8), (3, 5), (8, 4)] {
            let g = prototype_filter(&FilterSpec::Dirichlet, k, m).unwrap();
            let tm = TransmitterMatrix::new(&g, k, m).unwrap();
            let err = unitarity_error(tm.matrix());
            assert!(err <= 1e-12, "({k},{m}): {err:.3e}");
        }
    }

    #[test]
    fn modulate_is_linear_and_matches_columns() {
        let (k, m) = (4, 8);
        let d = k * m;
        let g = prototype_filter(&FilterSpec::Dirichlet, k, m).unwrap();
        let tm = TransmitterMatrix::new(&g, k, m).unwrap();
        let mut e = vec![c(0.0, 0.0); d];
        e[5] = c(1.0, 0.0);
        let x = tm.modulate(&e).unwrap();
        for n in 0..d {
            assert!((x[n] - tm.matrix()[(n, 5)]).norm() < 1e-14);
        }
        let zeros = tm.modulate(&vec![c(0.0, 0.0); d]).unwrap();
        assert!(zeros.iter().all(|v| v.norm() == 0.0));
        assert!(tm.modulate(&vec![c(0.0, 0.0); d - 1]).is_err());
    }

    #[test]
    fn modulate_matches_superposition_sum() {
        // x[n] = Σ_{k,m} d_{k,m}·g[(n-mK) mod D]·e^{j2πkn/K}
        let (k, m) = (4, 8);
        let d = k * m;
        let g = prototype_filter(&FilterSpec::RaisedCosine { rolloff: 0.9 }, k, m).unwrap();
        let tm = TransmitterMatrix::new(&g, k, m).unwrap();
        let mut rng = ChaCha8Rng::seed_from_u64(13);
        for _ in 0..20 {
            let block = random_block(d, &mut rng);
            let fast = tm.modulate(&block).unwrap();
            for n in 0..d {
                let mut want = c(0.0, 0.0);
                for ss in 0..m {
                    for sc in 0..k {
                        let angle = 2.0 * std::f64::consts::PI * ((sc * n) % k) as f64 / k as f64;
                        want += block[sc + ss * k]
                            * g[(n + d - ss * k) % d]
                            * Complex64::from_polar(1.0, angle);
                    }
                }
                assert!((fast[n] - want).norm() < 1e-12);
            }
        }
    }

    #[test]
    fn zf_demodulation_inverts_modulation() {
        // raised cosine at odd geometry: well conditioned but far from unitary
        let mut rng = ChaCha8Rng::seed_from_u64(99);
        for (filter, k, m, tol) in [
            (FilterSpec::Dirichlet, 8, 16, 1e-9),
            (FilterSpec::RaisedCosine { rolloff: 0.9 }, 8, 15, 1e-6),
            (FilterSpec::RaisedCosine { rolloff: 0.9 }, 7, 16, 1e-6),
        ] {
            let g = prototype_filter(&filter, k, m).unwrap();
            let tm = TransmitterMatrix::new(&g, k, m).unwrap();
            let block = random_block(k * m, &mut rng);
            let x = tm.modulate(&block).unwrap();
            let back = tm.demodulate_zf(&x).unwrap();
            let err: f64 = back.iter().zip(&block).map(|(a, b)| (a - b).norm_sqr()).sum::<f64>().sqrt();
            let scale: f64 = block.iter().map(|v| v.norm_sqr()).sum::<f64>().sqrt();
            assert!(err <= tol * scale, "{filter:?} ({k},{m}): {err:.3e}");
        }
    }

    #[test]
    fn zf_demodulation_rejects_singular_even_even_raised_cosine() {
        // with K and M both even the raised-cosine matrix has an exact null
        // space, so the zero-forcing receiver must refuse rather than amplify
        let (k, m) = (8, 16);
        let g = prototype_filter(&FilterSpec::RaisedCosine { rolloff: 0.9 }, k, m).unwrap();
        let tm = TransmitterMatrix::new(&g, k, m).unwrap();
        let x = vec![c(1.0, 0.0); k * m];
        match tm.demodulate_zf(&x) {
            Err(Error::SingularMatrix { cond }) => {
                assert!(cond > 1e12, "cond {cond:.3e}")
            }
            other => panic!("expected singular-matrix error, got {other:?}"),
        }
    }

    #[test]
    fn cp_roundtrip_and_examples() {
        let x = [c(1.0, 0.0), c(2.0, 0.0), c(3.0, 0.0), c(4.0, 0.0)];
        let with = add_cp(&x, 2).unwrap();
        let want = [3.0, 4.0, 1.0, 2.0, 3.0, 4.0];
        for (got, w) in with.iter().zip(want) {
            assert!((got - c(w, 0.0)).norm() < 1e-15);
        }
        let back = remove_cp(&with, 2).unwrap();
        assert_eq!(back.len(), 4);
        for (b, orig) in back.iter().zip(&x) {
            assert!((b - orig).norm() < 1e-15);
        }
        assert_eq!(add_cp(&x, 0).unwrap().len(), 4);
        assert!(add_cp(&x, 5).is_err());
        assert!(remove_cp(&x, 5).is_err());
    }

    #[test]
    fn config_validation_rejects_bad_geometry() {
        assert!(GfdmConfig::new(0, 4, 0, FilterSpec::Dirichlet).is_err());
        assert!(GfdmConfig::new(4, 0, 0, FilterSpec::Dirichlet).is_err());
        assert!(GfdmConfig::new(2, 2, 5, FilterSpec::Dirichlet).is_err());
        assert!(GfdmConfig::new(2, 2, 1, FilterSpec::RaisedCosine { rolloff: 2.0 }).is_err());
        let ok = GfdmConfig::new(4, 2, 2, FilterSpec::Dirichlet).unwrap();
        assert_eq!(ok.d(), 8);
        assert_eq!(ok.active_subcarriers(), &[0, 1, 2, 3]);
        assert!(ok.clone().with_active_sets(vec![0, 2], vec![0]).is_ok());
        assert!(ok.clone().with_active_sets(vec![], vec![0]).is_err());
        assert!(ok.clone().with_active_sets(vec![4], vec![0]).is_err());
        assert!(ok.with_active_sets(vec![1, 1], vec![0]).is_err());
    }
}
