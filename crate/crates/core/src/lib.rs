//! Link-level simulation of GFDM transmission over multipath Rayleigh fading
//! with pilot-aided LMMSE channel estimation.
//!
//! The crate covers the full chain: prototype filters and the GFDM transmitter
//! matrix ([`modem`]), tapped-delay channels with cyclic-prefix handling
//! ([`channel`]), pilot/data block construction including an
//! interference-precancelling pilot design ([`pilot`]), LMMSE and
//! least-squares channel estimators ([`estimator`]), a QPSK link with
//! frequency-domain equalization ([`link`]), and deterministic Monte Carlo
//! sweeps with CSV/SVG emission ([`sim`], [`plot`]).

pub mod channel;
pub mod config;
pub mod error;
pub mod estimator;
pub mod link;
pub mod modem;
pub mod numerics;
pub mod pilot;
pub mod plot;
pub mod sim;

pub use error::{Error, Result};
