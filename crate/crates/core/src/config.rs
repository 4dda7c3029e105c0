//! Flat key/value experiment configuration.
//!
//! Lines hold `key = value` pairs; `#` starts a comment and blank lines are
//! skipped. Unknown or repeated keys are rejected so silent typos cannot
//! change an experiment.

use crate::error::{Error, Result};
use crate::modem::{FilterSpec, GfdmConfig};
use crate::sim::{ExperimentSpec, SchemeSelect};
use std::collections::HashSet;

pub const DEFAULT_OUT_PATH: &str = "results.csv";

/// Parsed configuration with defaults filled in.
#[derive(Debug, Clone, PartialEq)]
pub struct RunConfig {
    pub k: usize,
    pub m: usize,
    pub l: usize,
    pub filter: FilterSpec,
    pub schemes: Vec<SchemeSelect>,
    pub snr_db: Vec<f64>,
    pub n_h: usize,
    pub n_d: usize,
    pub es: f64,
    pub seed: u64,
    pub out_path: String,
}

fn parse_num<T: std::str::FromStr>(key: &str, value: &str) -> Result<T> {
    value
        .parse()
        .map_err(|_| Error::Config(format!("key {key}: cannot parse \"{value}\"")))
}

fn parse_list<T: std::str::FromStr>(key: &str, value: &str) -> Result<Vec<T>> {
    value.split(',').map(|item| parse_num(key, item.trim())).collect()
}

impl RunConfig {
    /// Parses config text. `K` and `M` are required; every other key has a
    /// default (`L`=16, `filter`=dirichlet, `alpha`=0.9, `schemes`=
    /// conventional,proposed,ofdm,genie, `snr_db`=0,5,…,40, `N_h`=`N_d`=100,
    /// `Es`=1, `seed`=1, `out_path`=results.csv).
    pub fn parse(text: &str) -> Result<Self> {
        let mut k = None;
        let mut m = None;
        let mut l = 16usize;
        let mut filter_name = "dirichlet".to_string();
        let mut alpha = 0.9f64;
        let mut schemes = vec![
            SchemeSelect::Conventional,
            SchemeSelect::Proposed,
            SchemeSelect::Ofdm,
            SchemeSelect::Genie,
        ];
        let mut snr_db: Vec<f64> = (0..=8).map(|i| 5.0 * i as f64).collect();
        let mut n_h = 100usize;
        let mut n_d = 100usize;
        let mut es = 1.0f64;
        let mut seed = 1u64;
        let mut out_path = DEFAULT_OUT_PATH.to_string();

        let mut seen = HashSet::new();
        for (lineno, raw) in text.lines().enumerate() {
            let line = raw.split('#').next().unwrap_or("").trim();
            if line.is_empty() {
                continue;
            }
            let (key, value) = line.split_once('=').ok_or_else(|| {
                Error::Config(format!("line {}: expected key = value, got \"{line}\"", lineno + 1))
            })?;
            let key = key.trim();
            let value = value.trim();
            if value.is_empty() {
                return Err(Error::Config(format!("key {key}: empty value")));
            }
            if !seen.insert(key.to_string()) {
                return Err(Error::Config(format!("key {key} given twice")));
            }
            match key {
                "K" => k = Some(parse_num(key, value)?),
                "M" => m = Some(parse_num(key, value)?),
                "L" => l = parse_num(key, value)?,
                "filter" => filter_name = value.to_string(),
                "alpha" => alpha = parse_num(key, value)?,
                "schemes" => {
                    schemes = value
                        .split(',')
                        .map(|s| s.trim().parse())
                        .collect::<Result<Vec<_>>>()?;
                }
                "snr_db" => snr_db = parse_list(key, value)?,
                "N_h" => n_h = parse_num(key, value)?,
                "N_d" => n_d = parse_num(key, value)?,
                "Es" => es = parse_num(key, value)?,
                "seed" => seed = parse_num(key, value)?,
                "out_path" => out_path = value.to_string(),
                other => {
                    return Err(Error::Config(format!("unknown key \"{other}\"")));
                }
            }
        }

        let k = k.ok_or_else(|| Error::Config("missing required key K".into()))?;
        let m = m.ok_or_else(|| Error::Config("missing required key M".into()))?;
        let filter = match filter_name.as_str() {
            "dirichlet" => FilterSpec::Dirichlet,
            "rc" => FilterSpec::RaisedCosine { rolloff: alpha },
            other => {
                return Err(Error::Config(format!(
                    "unknown filter \"{other}\" (expected dirichlet or rc)"
                )));
            }
        };
        Ok(Self { k, m, l, filter, schemes, snr_db, n_h, n_d, es, seed, out_path })
    }

    /// Builds the sweep description, reporting invalid combinations as
    /// configuration errors.
    pub fn experiment(&self) -> Result<ExperimentSpec> {
        let gfdm = GfdmConfig::new(self.k, self.m, self.l, self.filter.clone())
            .map_err(|e| Error::Config(e.to_string()))?;
        ExperimentSpec::new(
            gfdm,
            self.schemes.clone(),
            self.snr_db.clone(),
            self.n_h,
            self.n_d,
            self.es,
            self.seed,
        )
        .map_err(|e| Error::Config(e.to_string()))
    }
}
