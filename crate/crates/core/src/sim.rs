//! Monte Carlo link sweeps: per-trial pipeline, scheme construction, and
//! deterministic parallel aggregation into MSE/SER curve points.
//!
//! Determinism contract: every random draw comes from a ChaCha stream seeded
//! by `(master seed, domain, realization index, block index)`. Channel
//! realization `i` and the payload/noise of block `(i, j)` are therefore
//! identical across schemes, SNR points, run repetitions, and worker counts;
//! the reducer folds trial outcomes in index order.

use crate::channel::{apply_channel, ChannelRealization, NoiseSpec, PowerDelayProfile};
use crate::error::{Error, Result};
use crate::estimator::{
    channel_mse, interference_covariance_from_image, ls_estimate, LmmseEstimator,
};
use crate::link::{equalize_fd, Qpsk};
use crate::modem::{FilterSpec, GfdmConfig, TransmitterMatrix};
use crate::numerics::{ComplexMatrix, Dft};
use crate::pilot::{
    pilot_energy, reference_sequence, FrequencyBinSet, PilotPlacement, PilotScheme,
};
use num_complex::Complex64;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use std::fmt;
use std::str::FromStr;

/// One curve of the sweep: a pilot/estimation strategy under test.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum SchemeSelect {
    /// GFDM, conventional pilots, LMMSE estimation.
    Conventional,
    /// GFDM, interference-precancelling pilots, LMMSE estimation.
    Proposed,
    /// OFDM comb pilots over the same block size, LMMSE estimation.
    Ofdm,
    /// GFDM with the true channel handed to the receiver (conventional pilots).
    Genie,
    /// GFDM, precancelling pilots, least-squares estimation at the pinned bins.
    Ls,
}

impl SchemeSelect {
    pub fn label(&self) -> &'static str {
        match self {
            SchemeSelect::Conventional => "conventional",
            SchemeSelect::Proposed => "proposed",
            SchemeSelect::Ofdm => "ofdm",
            SchemeSelect::Genie => "genie",
            SchemeSelect::Ls => "ls",
        }
    }
}

impl FromStr for SchemeSelect {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.trim() {
            "conventional" => Ok(SchemeSelect::Conventional),
            "proposed" => Ok(SchemeSelect::Proposed),
            "ofdm" => Ok(SchemeSelect::Ofdm),
            "genie" => Ok(SchemeSelect::Genie),
            "ls" => Ok(SchemeSelect::Ls),
            other => Err(Error::Config(format!(
                "unknown scheme \"{other}\" (expected conventional, proposed, ofdm, genie, or ls)"
            ))),
        }
    }
}

impl fmt::Display for SchemeSelect {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.label())
    }
}

/// Everything one sweep needs.
#[derive(Debug, Clone)]
pub struct ExperimentSpec {
    gfdm: GfdmConfig,
    schemes: Vec<SchemeSelect>,
    snr_db: Vec<f64>,
    n_h: usize,
    n_d: usize,
    es: f64,
    seed: u64,
}

impl ExperimentSpec {
    pub fn new(
        gfdm: GfdmConfig,
        schemes: Vec<SchemeSelect>,
        snr_db: Vec<f64>,
        n_h: usize,
        n_d: usize,
        es: f64,
        seed: u64,
    ) -> Result<Self> {
        if schemes.is_empty() {
            return Err(Error::InvalidParameter("no schemes selected".into()));
        }
        if n_h == 0 || n_d == 0 {
            return Err(Error::InvalidParameter(format!(
                "need at least one channel realization and one block (got N_h={n_h}, N_d={n_d})"
            )));
        }
        if snr_db.is_empty() {
            return Err(Error::InvalidParameter("empty SNR grid".into()));
        }
        if snr_db.windows(2).any(|w| !(w[1] > w[0])) {
            return Err(Error::InvalidParameter("SNR grid must be strictly increasing".into()));
        }
        if !es.is_finite() || es <= 0.0 {
            return Err(Error::InvalidParameter(format!("symbol energy {es} must be positive")));
        }
        // the channel spans N = K taps; the circular model needs L ≥ N−1
        if gfdm.cp_len() + 1 < gfdm.k() {
            return Err(Error::InvalidParameter(format!(
                "cyclic prefix {} shorter than the channel order {}",
                gfdm.cp_len(),
                gfdm.k() - 1
            )));
        }
        Ok(Self { gfdm, schemes, snr_db, n_h, n_d, es, seed })
    }

    pub fn gfdm(&self) -> &GfdmConfig {
        &self.gfdm
    }

    pub fn schemes(&self) -> &[SchemeSelect] {
        &self.schemes
    }

    pub fn snr_db(&self) -> &[f64] {
        &self.snr_db
    }

    pub fn n_h(&self) -> usize {
        self.n_h
    }

    pub fn n_d(&self) -> usize {
        self.n_d
    }

    pub fn es(&self) -> f64 {
        self.es
    }

    pub fn seed(&self) -> u64 {
        self.seed
    }

    /// Channel taps simulated for this geometry: `N = K`.
    pub fn n_taps(&self) -> usize {
        self.gfdm.k()
    }
}

/// One row of the result table.
#[derive(Debug, Clone, PartialEq)]
pub struct CurvePoint {
    pub scheme: &'static str,
    pub filter: String,
    pub k: usize,
    pub m: usize,
    pub snr_db: f64,
    pub mse: f64,
    pub ser: f64,
    pub pilot_energy_avg: f64,
    pub trials: usize,
}

pub const CSV_HEADER: &str = "scheme,filter,K,M,snr_db,mse,ser,pilot_energy_avg,trials";

impl CurvePoint {
    pub fn csv_row(&self) -> String {
        format!(
            "{},{},{},{},{},{},{},{},{}",
            self.scheme,
            self.filter,
            self.k,
            self.m,
            self.snr_db,
            self.mse,
            self.ser,
            self.pilot_energy_avg,
            self.trials
        )
    }
}

/// Renders points as the result CSV (header plus one row per point).
pub fn write_csv(points: &[CurvePoint]) -> String {
    let mut out = String::from(CSV_HEADER);
    out.push('\n');
    for p in points {
        out.push_str(&p.csv_row());
        out.push('\n');
    }
    out
}

/// Immutable per-scheme state shared by all trial workers.
pub struct SchemeContext {
    select: SchemeSelect,
    tx: TransmitterMatrix,
    scheme: PilotScheme,
    dft: Dft,
    n_taps: usize,
    filter_label: String,
}

impl SchemeContext {
    /// Builds the transmitter and pilot scheme for one curve. All schemes
    /// share the reference sequence drawn from `d_r_seed`.
    pub fn build(spec: &ExperimentSpec, select: SchemeSelect, d_r_seed: u64) -> Result<Self> {
        let gfdm = spec.gfdm();
        let (k, m) = (gfdm.k(), gfdm.m());
        let d_r = reference_sequence(k, spec.es(), d_r_seed)?;
        let (tx, scheme, filter_label) = match select {
            SchemeSelect::Conventional | SchemeSelect::Genie => {
                let tx = TransmitterMatrix::from_config(gfdm)?;
                let scheme = PilotScheme::conventional(
                    PilotPlacement::default_for(k, m)?,
                    FrequencyBinSet::default_for(k, m)?,
                    d_r,
                )?;
                (tx, scheme, gfdm.filter().label())
            }
            SchemeSelect::Proposed | SchemeSelect::Ls => {
                let tx = TransmitterMatrix::from_config(gfdm)?;
                let scheme = PilotScheme::proposed(
                    &tx,
                    PilotPlacement::default_for(k, m)?,
                    FrequencyBinSet::default_for(k, m)?,
                    d_r,
                )?;
                (tx, scheme, gfdm.filter().label())
            }
            SchemeSelect::Ofdm => {
                // same block size, one subsymbol per subcarrier: A = W_Dᴴ;
                // the comb puts pilots directly on the pinned bins
                let ofdm_cfg =
                    GfdmConfig::new(k * m, 1, gfdm.cp_len(), FilterSpec::Dirichlet)?;
                let tx = TransmitterMatrix::from_config(&ofdm_cfg)?;
                let comb: Vec<usize> = (0..k).map(|i| i * m).collect();
                let scheme = PilotScheme::ofdm_comb(
                    PilotPlacement::new(comb.clone(), k * m)?,
                    FrequencyBinSet::new(comb, k * m)?,
                    d_r,
                )?;
                (tx, scheme, "none".to_string())
            }
        };
        let dft = Dft::new(gfdm.d())?;
        Ok(Self { select, tx, scheme, dft, n_taps: spec.n_taps(), filter_label })
    }

    pub fn select(&self) -> SchemeSelect {
        self.select
    }

    pub fn tx(&self) -> &TransmitterMatrix {
        &self.tx
    }

    pub fn scheme(&self) -> &PilotScheme {
        &self.scheme
    }

    pub fn dft(&self) -> &Dft {
        &self.dft
    }

    pub fn filter_label(&self) -> &str {
        &self.filter_label
    }

    /// `X_r` diagonal and `Σ_ΨΨ` for the LMMSE schemes; `None` where no
    /// linear estimator is built (genie, LS).
    pub fn estimator_parts(
        &self,
        pdp: &PowerDelayProfile,
        es: f64,
    ) -> Result<Option<(Vec<Complex64>, ComplexMatrix)>> {
        match self.select {
            SchemeSelect::Genie | SchemeSelect::Ls => Ok(None),
            _ => {
                let x_r = self.scheme.pilot_image(&self.tx, &self.dft)?;
                let image = self.scheme.data_image(&self.tx, &self.dft)?;
                let sigma_psi =
                    interference_covariance_from_image(pdp.powers(), &image, es)?;
                Ok(Some((x_r, sigma_psi)))
            }
        }
    }
}

/// What one trial contributes to a curve point.
#[derive(Debug, Clone, Copy)]
pub struct TrialOutcome {
    pub mse: f64,
    pub symbol_errors: usize,
    pub data_symbols: usize,
    pub pilot_energy: f64,
    /// Zero equalizer coefficient: the block was counted as fully errored.
    pub equalization_failed: bool,
}

/// Runs one block through the full chain: payload draw, pilot insertion,
/// modulation, channel, estimation (or true CSI for the genie), equalization,
/// ZF demodulation, detection over the data positions.
pub fn run_trial(
    ctx: &SchemeContext,
    estimator: Option<&LmmseEstimator>,
    qpsk: &Qpsk,
    h: &ChannelRealization,
    noise: &NoiseSpec,
    rng: &mut ChaCha8Rng,
) -> Result<TrialOutcome> {
    let scheme = &ctx.scheme;
    let data_len = scheme.d() - scheme.p();
    let indices: Vec<u8> = (0..data_len).map(|_| qpsk.draw(rng)).collect();
    let symbols: Vec<Complex64> = indices.iter().map(|&i| qpsk.symbol(i)).collect();

    let (block, d_p) = scheme.generate_block(&symbols)?;
    let x = ctx.tx.modulate(&block)?;
    let y = apply_channel(h, &x, noise, &ctx.dft, rng)?;

    let h_hat = match ctx.select {
        SchemeSelect::Genie => h.taps().to_vec(),
        SchemeSelect::Ls => ls_estimate(&y, scheme, ctx.n_taps, &ctx.dft)?,
        _ => {
            let est = estimator.ok_or_else(|| {
                Error::InvalidParameter(format!(
                    "scheme {} needs a prebuilt estimator",
                    ctx.select
                ))
            })?;
            est.estimate(&y)?
        }
    };
    let mse = channel_mse(h.taps(), &h_hat)?;
    let energy = pilot_energy(&d_p);

    let x_eq = match equalize_fd(&y, &h_hat, &ctx.dft) {
        Ok(v) => v,
        Err(Error::EqualizationSingular { .. }) => {
            return Ok(TrialOutcome {
                mse,
                symbol_errors: data_len,
                data_symbols: data_len,
                pilot_energy: energy,
                equalization_failed: true,
            });
        }
        Err(e) => return Err(e),
    };
    let d_hat = ctx.tx.demodulate_zf(&x_eq)?;
    let errors = scheme
        .placement()
        .data_positions()
        .iter()
        .zip(&indices)
        .filter(|(&pos, &sent)| qpsk.detect(d_hat[pos]) != sent)
        .count();

    Ok(TrialOutcome {
        mse,
        symbol_errors: errors,
        data_symbols: data_len,
        pilot_energy: energy,
        equalization_failed: false,
    })
}

/// SplitMix-style mixing of `(master, domain, i, j)` into one stream seed.
fn derive_seed(master: u64, domain: u64, i: u64, j: u64) -> u64 {
    fn mix(mut z: u64) -> u64 {
        z = z.wrapping_add(0x9E37_79B9_7F4A_7C15);
        z = (z ^ (z >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
        z = (z ^ (z >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
        z ^ (z >> 31)
    }
    mix(mix(mix(master ^ mix(domain)) ^ i) ^ j)
}

const SEED_DOMAIN_REFERENCE: u64 = 0;
const SEED_DOMAIN_CHANNEL: u64 = 1;
const SEED_DOMAIN_BLOCK: u64 = 2;

/// Sweeps every selected scheme over the SNR grid.
///
/// Rows come out scheme-major in selection order, SNR ascending within a
/// scheme. Aborts on any component failure except equalization
/// singularities, which are logged and counted as fully errored blocks.
pub fn monte_carlo(spec: &ExperimentSpec) -> Result<Vec<CurvePoint>> {
    let pdp = PowerDelayProfile::exponential(spec.n_taps())?;
    let qpsk = Qpsk::new(spec.es())?;
    let d_r_seed = derive_seed(spec.seed(), SEED_DOMAIN_REFERENCE, 0, 0);
    let trials = spec.n_h() * spec.n_d();

    let mut points = Vec::with_capacity(spec.schemes().len() * spec.snr_db().len());
    for &select in spec.schemes() {
        let ctx = SchemeContext::build(spec, select, d_r_seed)?;
        let parts = ctx.estimator_parts(&pdp, spec.es())?;
        for &snr_db in spec.snr_db() {
            let noise = NoiseSpec::from_snr_db(spec.es(), snr_db);
            let estimator = match &parts {
                Some((x_r, sigma_psi)) => Some(LmmseEstimator::new(
                    x_r.clone(),
                    pdp.powers().to_vec(),
                    sigma_psi.clone(),
                    noise.n0(),
                    spec.es(),
                )?),
                None => None,
            };

            let outcomes: Result<Vec<TrialOutcome>> = (0..trials)
                .into_par_iter()
                .map(|idx| {
                    let i = (idx / spec.n_d()) as u64;
                    let j = (idx % spec.n_d()) as u64;
                    let mut rng_h = ChaCha8Rng::seed_from_u64(derive_seed(
                        spec.seed(),
                        SEED_DOMAIN_CHANNEL,
                        i,
                        0,
                    ));
                    let h = pdp.draw(&mut rng_h);
                    let mut rng_b = ChaCha8Rng::seed_from_u64(derive_seed(
                        spec.seed(),
                        SEED_DOMAIN_BLOCK,
                        i,
                        j,
                    ));
                    let outcome =
                        run_trial(&ctx, estimator.as_ref(), &qpsk, &h, &noise, &mut rng_b)
                            .map_err(|e| {
                                Error::Numerical(format!(
                                    "scheme {select}, snr {snr_db} dB, realization {i}, block {j}: {e}"
                                ))
                            })?;
                    if outcome.equalization_failed {
                        eprintln!(
                            "warning: zero equalizer coefficient; scheme {select}, snr {snr_db} dB, \
                             realization {i}, block {j} counted as fully errored"
                        );
                    }
                    Ok(outcome)
                })
                .collect();
            let outcomes = outcomes?;

            let mut mse_sum = 0.0;
            let mut energy_sum = 0.0;
            let mut errors = 0usize;
            let mut symbols = 0usize;
            for o in &outcomes {
                mse_sum += o.mse;
                energy_sum += o.pilot_energy;
                errors += o.symbol_errors;
                symbols += o.data_symbols;
            }
            points.push(CurvePoint {
                scheme: select.label(),
                filter: ctx.filter_label().to_string(),
                k: spec.gfdm().k(),
                m: spec.gfdm().m(),
                snr_db,
                mse: mse_sum / trials as f64,
                ser: errors as f64 / symbols as f64,
                pilot_energy_avg: energy_sum / trials as f64,
                trials,
            });
        }
    }
    Ok(points)
}
