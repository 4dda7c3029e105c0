//! Pilot insertion schemes for channel estimation.
//!
//! A block `d = S·d_r + T·d_d` carries a fixed reference vector `d_r` on `p`
//! pilot positions and payload `d_d` on the rest. The conventional scheme
//! places `d_r` directly (`S = P₁`, `T = P₂`) and lets the non-orthogonal
//! transmitter smear data energy onto the pilots' frequency bins. The
//! precancelling scheme instead solves for the pilot symbols so that the
//! transmitted spectrum equals `d_r` exactly on a chosen bin set ℐ:
//! with `W₁ = [W_D·A·P]_{ℐ,0..p}` and `W₂ = [W_D·A·P]_{ℐ,p..D}`, sending
//! `d_p = W₁⁻¹(d_r − W₂·d_d)` yields `[W_D·A·d]_ℐ = d_r` for every payload,
//! which is the pair `(S, T) = (P₁W₁⁻¹, P₂ − P₁W₁⁻¹W₂)`.

use crate::error::{Error, Result};
use crate::modem::TransmitterMatrix;
use crate::numerics::{ComplexMatrix, Dft, LuFactors};
use num_complex::Complex64;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

/// Maximum acceptable condition estimate for `W₁`.
const BIN_CONDITION_LIMIT: f64 = 1e12;

/// Which insertion rule a scheme uses.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum SchemeKind {
    /// Reference symbols placed verbatim, `S = P₁`, `T = P₂`.
    Conventional,
    /// Pilot symbols solved per block to null data interference at ℐ.
    ProposedPrecancel,
    /// Comb pilots on an OFDM transmitter; structurally conventional.
    OfdmComb,
}

impl SchemeKind {
    pub fn label(&self) -> &'static str {
        match self {
            SchemeKind::Conventional => "conventional",
            SchemeKind::ProposedPrecancel => "proposed",
            SchemeKind::OfdmComb => "ofdm",
        }
    }
}

/// Split of the `D` block positions into `p` pilot slots and `D−p` data
/// slots; the implied `P = [P₁ P₂]` is a permutation of the identity.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct PilotPlacement {
    pilot_positions: Vec<usize>,
    data_positions: Vec<usize>,
    d: usize,
}

impl PilotPlacement {
    pub fn new(pilot_positions: Vec<usize>, d: usize) -> Result<Self> {
        if pilot_positions.is_empty() {
            return Err(Error::InvalidParameter("need at least one pilot position".into()));
        }
        if pilot_positions.len() > d {
            return Err(Error::InvalidDimension(format!(
                "{} pilot positions in a block of {d}",
                pilot_positions.len()
            )));
        }
        let mut taken = vec![false; d];
        for &pos in &pilot_positions {
            if pos >= d {
                return Err(Error::InvalidParameter(format!(
                    "pilot position {pos} outside block of {d}"
                )));
            }
            if taken[pos] {
                return Err(Error::InvalidParameter(format!("duplicate pilot position {pos}")));
            }
            taken[pos] = true;
        }
        let data_positions = (0..d).filter(|&i| !taken[i]).collect();
        Ok(Self { pilot_positions, data_positions, d })
    }

    /// Pilots on subsymbol 0 of every subcarrier: positions `0..K`, so that
    /// `P` is the identity and `d = [d_p; d_d]`.
    pub fn default_for(k: usize, m: usize) -> Result<Self> {
        Self::new((0..k).collect(), k * m)
    }

    pub fn p(&self) -> usize {
        self.pilot_positions.len()
    }

    pub fn d(&self) -> usize {
        self.d
    }

    pub fn pilot_positions(&self) -> &[usize] {
        &self.pilot_positions
    }

    pub fn data_positions(&self) -> &[usize] {
        &self.data_positions
    }

    /// `P₁·d_p + P₂·d_d`.
    pub fn assemble(&self, d_p: &[Complex64], d_d: &[Complex64]) -> Result<Vec<Complex64>> {
        if d_p.len() != self.p() || d_d.len() != self.d - self.p() {
            return Err(Error::InvalidDimension(format!(
                "assemble got {} pilots and {} data symbols for (p, D−p) = ({}, {})",
                d_p.len(),
                d_d.len(),
                self.p(),
                self.d - self.p()
            )));
        }
        let mut d = vec![Complex64::new(0.0, 0.0); self.d];
        for (&pos, &v) in self.pilot_positions.iter().zip(d_p) {
            d[pos] = v;
        }
        for (&pos, &v) in self.data_positions.iter().zip(d_d) {
            d[pos] = v;
        }
        Ok(d)
    }

    /// Dense `P₁` (D×p).
    pub fn p1(&self) -> ComplexMatrix {
        selection_matrix(self.d, &self.pilot_positions)
    }

    /// Dense `P₂` (D×(D−p)).
    pub fn p2(&self) -> ComplexMatrix {
        selection_matrix(self.d, &self.data_positions)
    }
}

fn selection_matrix(d: usize, positions: &[usize]) -> ComplexMatrix {
    let mut m = ComplexMatrix::zeros(d, positions.len());
    for (j, &pos) in positions.iter().enumerate() {
        m[(pos, j)] = Complex64::new(1.0, 0.0);
    }
    m
}

/// Frequency bins ℐ on which the precancelling scheme pins the spectrum.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct FrequencyBinSet {
    bins: Vec<usize>,
    d: usize,
}

impl FrequencyBinSet {
    pub fn new(bins: Vec<usize>, d: usize) -> Result<Self> {
        if bins.is_empty() {
            return Err(Error::InvalidParameter("need at least one frequency bin".into()));
        }
        let mut taken = vec![false; d];
        for &b in &bins {
            if b >= d {
                return Err(Error::InvalidParameter(format!("bin {b} outside spectrum of {d}")));
            }
            if taken[b] {
                return Err(Error::InvalidParameter(format!("duplicate bin {b}")));
            }
            taken[b] = true;
        }
        Ok(Self { bins, d })
    }

    /// The subcarrier-center bins `{0, M, 2M, …, (K−1)M}`.
    pub fn default_for(k: usize, m: usize) -> Result<Self> {
        Self::new((0..k).map(|i| i * m).collect(), k * m)
    }

    pub fn bins(&self) -> &[usize] {
        &self.bins
    }

    pub fn len(&self) -> usize {
        self.bins.len()
    }

    pub fn is_empty(&self) -> bool {
        self.bins.is_empty()
    }

    pub fn d(&self) -> usize {
        self.d
    }
}

/// Deterministic constant-modulus QPSK reference of per-symbol energy `es`.
pub fn reference_sequence(p: usize, es: f64, seed: u64) -> Result<Vec<Complex64>> {
    if p == 0 {
        return Err(Error::InvalidParameter("reference sequence needs p ≥ 1".into()));
    }
    if !es.is_finite() || es <= 0.0 {
        return Err(Error::InvalidParameter(format!("symbol energy {es} must be positive")));
    }
    let half = (es / 2.0).sqrt();
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    Ok((0..p)
        .map(|_| {
            let q: u8 = rng.gen_range(0..4);
            let re = if q & 1 == 0 { half } else { -half };
            let im = if q & 2 == 0 { half } else { -half };
            Complex64::new(re, im)
        })
        .collect())
}

/// Row-selected blocks `W₁ = [W_D·A·P]_{ℐ,0..p}` and `W₂ = [W_D·A·P]_{ℐ,p..D}`
/// of the transmitted spectrum map, plus the condition estimate of `W₁`.
///
/// An ill-conditioned `W₁` means the bin set cannot pin the spectrum and is
/// reported as a bin-selection error.
pub fn build_w1_w2(
    tx: &TransmitterMatrix,
    placement: &PilotPlacement,
    bins: &FrequencyBinSet,
) -> Result<(ComplexMatrix, ComplexMatrix, f64)> {
    let d = tx.d();
    if placement.d() != d || bins.d() != d {
        return Err(Error::InvalidDimension(format!(
            "placement over {} and bins over {} for a transmitter of size {d}",
            placement.d(),
            bins.d()
        )));
    }
    let p = placement.p();
    if bins.len() != p {
        return Err(Error::InvalidDimension(format!(
            "{} bins cannot pin {p} pilots; the construction needs |ℐ| = p",
            bins.len()
        )));
    }

    // row b of W_D·A, with the DFT angle reduced exactly before trig
    let scale = 1.0 / (d as f64).sqrt();
    let twiddle: Vec<Complex64> = (0..d)
        .map(|r| Complex64::from_polar(scale, -2.0 * std::f64::consts::PI * r as f64 / d as f64))
        .collect();
    let a = tx.matrix();
    let rows: Vec<Vec<Complex64>> = bins
        .bins()
        .iter()
        .map(|&b| {
            let w: Vec<Complex64> = (0..d).map(|n| twiddle[b * n % d]).collect();
            a.left_mul_vec(&w)
        })
        .collect();

    let w1 = ComplexMatrix::from_fn(p, p, |i, j| rows[i][placement.pilot_positions()[j]]);
    let w2 =
        ComplexMatrix::from_fn(p, d - p, |i, j| rows[i][placement.data_positions()[j]]);

    let cond = match LuFactors::new(&w1) {
        Ok(lu) => lu.condition_estimate(),
        Err(_) => f64::INFINITY,
    };
    if !cond.is_finite() || cond > BIN_CONDITION_LIMIT {
        return Err(Error::BinSelection { cond });
    }
    Ok((w1, w2, cond))
}

/// Per-block pilot solver for the precancelling scheme.
#[derive(Debug, Clone)]
struct PrecancelMap {
    /// `W₁⁻¹·d_r`.
    w1_inv_dr: Vec<Complex64>,
    /// `W₁⁻¹·W₂` (p×(D−p)).
    w1_inv_w2: ComplexMatrix,
    w1_cond: f64,
}

/// An immutable pilot insertion scheme: the pair `(S, T)` plus the fast
/// per-block solver it was derived from.
#[derive(Debug, Clone)]
pub struct PilotScheme {
    kind: SchemeKind,
    placement: PilotPlacement,
    bins: FrequencyBinSet,
    d_r: Vec<Complex64>,
    s: ComplexMatrix,
    t: ComplexMatrix,
    precancel: Option<PrecancelMap>,
}

impl PilotScheme {
    /// `S = P₁`, `T = P₂`: the reference vector is transmitted verbatim.
    pub fn conventional(
        placement: PilotPlacement,
        bins: FrequencyBinSet,
        d_r: Vec<Complex64>,
    ) -> Result<Self> {
        Self::direct(SchemeKind::Conventional, placement, bins, d_r)
    }

    /// Conventional insertion flagged as the OFDM comb baseline.
    pub fn ofdm_comb(
        placement: PilotPlacement,
        bins: FrequencyBinSet,
        d_r: Vec<Complex64>,
    ) -> Result<Self> {
        Self::direct(SchemeKind::OfdmComb, placement, bins, d_r)
    }

    fn direct(
        kind: SchemeKind,
        placement: PilotPlacement,
        bins: FrequencyBinSet,
        d_r: Vec<Complex64>,
    ) -> Result<Self> {
        Self::check_shapes(&placement, &bins, &d_r)?;
        let s = placement.p1();
        let t = placement.p2();
        Ok(Self { kind, placement, bins, d_r, s, t, precancel: None })
    }

    /// `(S, T) = (P₁W₁⁻¹, P₂ − P₁W₁⁻¹W₂)`: every transmitted block satisfies
    /// `[W_D·A·d]_ℐ = d_r` regardless of the payload.
    pub fn proposed(
        tx: &TransmitterMatrix,
        placement: PilotPlacement,
        bins: FrequencyBinSet,
        d_r: Vec<Complex64>,
    ) -> Result<Self> {
        Self::check_shapes(&placement, &bins, &d_r)?;
        let (w1, w2, w1_cond) = build_w1_w2(tx, &placement, &bins)?;
        let p = placement.p();
        let d = placement.d();
        // cond already vetted, so the factorization cannot fail
        let lu = LuFactors::new(&w1)?;
        let w1_inv = lu.solve_mat(&ComplexMatrix::identity(p));
        let w1_inv_w2 = lu.solve_mat(&w2);
        let w1_inv_dr = lu.solve_vec(&d_r);

        let mut s = ComplexMatrix::zeros(d, p);
        for (r, &pos) in placement.pilot_positions().iter().enumerate() {
            s.row_mut(pos).copy_from_slice(w1_inv.row(r));
        }
        let mut t = ComplexMatrix::zeros(d, d - p);
        for (j, &pos) in placement.data_positions().iter().enumerate() {
            t[(pos, j)] = Complex64::new(1.0, 0.0);
        }
        for (r, &pos) in placement.pilot_positions().iter().enumerate() {
            for (dst, src) in t.row_mut(pos).iter_mut().zip(w1_inv_w2.row(r)) {
                *dst -= src;
            }
        }

        Ok(Self {
            kind: SchemeKind::ProposedPrecancel,
            placement,
            bins,
            d_r,
            s,
            t,
            precancel: Some(PrecancelMap { w1_inv_dr, w1_inv_w2, w1_cond }),
        })
    }

    fn check_shapes(
        placement: &PilotPlacement,
        bins: &FrequencyBinSet,
        d_r: &[Complex64],
    ) -> Result<()> {
        if bins.d() != placement.d() {
            return Err(Error::InvalidDimension(format!(
                "bins over {} for a block of {}",
                bins.d(),
                placement.d()
            )));
        }
        if d_r.len() != placement.p() {
            return Err(Error::InvalidDimension(format!(
                "reference of {} symbols for {} pilot positions",
                d_r.len(),
                placement.p()
            )));
        }
        Ok(())
    }

    pub fn kind(&self) -> SchemeKind {
        self.kind
    }

    pub fn label(&self) -> &'static str {
        self.kind.label()
    }

    pub fn placement(&self) -> &PilotPlacement {
        &self.placement
    }

    pub fn bins(&self) -> &FrequencyBinSet {
        &self.bins
    }

    pub fn d_r(&self) -> &[Complex64] {
        &self.d_r
    }

    pub fn p(&self) -> usize {
        self.placement.p()
    }

    pub fn d(&self) -> usize {
        self.placement.d()
    }

    /// Condition estimate of `W₁`; `None` for direct-insertion schemes.
    pub fn w1_condition(&self) -> Option<f64> {
        self.precancel.as_ref().map(|m| m.w1_cond)
    }

    pub fn s_matrix(&self) -> &ComplexMatrix {
        &self.s
    }

    pub fn t_matrix(&self) -> &ComplexMatrix {
        &self.t
    }

    /// The pilot symbols a given payload puts on the pilot positions:
    /// `d_r` verbatim, or `W₁⁻¹(d_r − W₂·d_d)` when precancelling.
    pub fn pilot_vector(&self, d_d: &[Complex64]) -> Result<Vec<Complex64>> {
        if d_d.len() != self.d() - self.p() {
            return Err(Error::InvalidDimension(format!(
                "payload of {} symbols for {} data positions",
                d_d.len(),
                self.d() - self.p()
            )));
        }
        match &self.precancel {
            None => Ok(self.d_r.clone()),
            Some(map) => {
                let mut d_p = map.w1_inv_dr.clone();
                for (v, row) in d_p.iter_mut().zip(0..self.p()) {
                    *v -= crate::numerics::matrix::dot(map.w1_inv_w2.row(row), d_d);
                }
                Ok(d_p)
            }
        }
    }

    /// Assembles one block: returns `(d, d_p)` with `d = S·d_r + T·d_d`.
    pub fn generate_block(&self, d_d: &[Complex64]) -> Result<(Vec<Complex64>, Vec<Complex64>)> {
        let d_p = self.pilot_vector(d_d)?;
        let d = self.placement.assemble(&d_p, d_d)?;
        Ok((d, d_p))
    }

    /// The payload-independent pilot part `S·d_r` of every block.
    pub fn pilot_component(&self) -> Vec<Complex64> {
        let on_pilots = match &self.precancel {
            None => &self.d_r,
            Some(map) => &map.w1_inv_dr,
        };
        let mut out = vec![Complex64::new(0.0, 0.0); self.d()];
        for (&pos, &v) in self.placement.pilot_positions().iter().zip(on_pilots) {
            out[pos] = v;
        }
        out
    }

    /// Frequency-domain pilot image `W_D·A·S·d_r`.
    pub fn pilot_image(&self, tx: &TransmitterMatrix, dft: &Dft) -> Result<Vec<Complex64>> {
        self.check_tx(tx, dft)?;
        Ok(dft.apply(&tx.modulate(&self.pilot_component())?))
    }

    /// Frequency-domain data map `C = W_D·A·T` (D×(D−p)), assembled from one
    /// FFT per transmitter column instead of a dense product with `T`.
    pub fn data_image(&self, tx: &TransmitterMatrix, dft: &Dft) -> Result<ComplexMatrix> {
        self.check_tx(tx, dft)?;
        let d = self.d();
        let p = self.p();
        let a = tx.matrix();
        let mut c = ComplexMatrix::zeros(d, d - p);
        for (j, &pos) in self.placement.data_positions().iter().enumerate() {
            c.set_column(j, &dft.apply(&a.column(pos)));
        }
        if let Some(map) = &self.precancel {
            // subtract (W_D·A·P₁)·W₁⁻¹W₂
            for (r, &pos) in self.placement.pilot_positions().iter().enumerate() {
                let col = dft.apply(&a.column(pos));
                for i in 0..d {
                    let lhs = col[i];
                    for (dst, src) in c.row_mut(i).iter_mut().zip(map.w1_inv_w2.row(r)) {
                        *dst -= lhs * src;
                    }
                }
            }
        }
        Ok(c)
    }

    fn check_tx(&self, tx: &TransmitterMatrix, dft: &Dft) -> Result<()> {
        if tx.d() != self.d() || dft.size() != self.d() {
            return Err(Error::InvalidDimension(format!(
                "scheme over {} used with transmitter of {} and transform of {}",
                self.d(),
                tx.d(),
                dft.size()
            )));
        }
        Ok(())
    }
}

/// Average per-pilot energy `‖d_p‖²/p`.
pub fn pilot_energy(d_p: &[Complex64]) -> f64 {
    if d_p.is_empty() {
        return 0.0;
    }
    d_p.iter().map(|v| v.norm_sqr()).sum::<f64>() / d_p.len() as f64
}
