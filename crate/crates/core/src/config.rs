//! System configuration: every scalar parameter of the reader/tag setup and
//! of the solvers, plus the flat `key = value` config-file format.
//!
//! Powers are stored in watts internally. The file format additionally
//! accepts any power key with a `_dbm` suffix (`power_budget_dbm = 30`),
//! converted on read. Unknown keys are rejected so typos fail loudly.

use crate::error::{Error, Result};
use std::path::Path;

/// All scalar parameters of the system model and its solvers.
///
/// Defaults reproduce the reference operating point: a 4-antenna reader
/// serving 4 tags at 30 dBm transmit power, −170 dBm/Hz receiver noise,
/// 915 MHz carrier, pathloss exponent 3, reflection coefficients in
/// [0.01, 0.078], over a 100 m square field with perfect CSI.
#[derive(Debug, Clone, PartialEq)]
pub struct SystemConfig {
    /// Number of reader antennas (N).
    pub n_antennas: usize,
    /// Number of single-antenna tags (M).
    pub n_tags: usize,
    /// Total transmit power budget P_T in watts.
    pub power_budget: f64,
    /// Receiver noise power σ²_wR in watts/Hz.
    pub noise_reader: f64,
    /// Tag-side noise power σ²_wT in watts/Hz. Accepted for completeness;
    /// the backscattered noise is negligible next to the carrier reflection
    /// and never enters any rate expression.
    pub noise_tag: f64,
    /// Lower reflection bound α_min, in [0, 1).
    pub alpha_min: f64,
    /// Upper reflection bound α_max, in (α_min, 1].
    pub alpha_max: f64,
    /// Side length L of the square deployment field, meters.
    pub field_length: f64,
    /// Pathloss exponent ϱ.
    pub pathloss_exponent: f64,
    /// Carrier frequency in Hz.
    pub carrier_freq: f64,
    /// Channel-estimation error η in [0, 1]; 0 is perfect CSI.
    pub csi_error: f64,
    /// Convergence tolerance ξ for the iterative optimizers.
    pub tol: f64,
    /// Number of Gaussian randomization samples K for rank-one recovery.
    /// When not set explicitly in a config file it defaults to 10·N·M.
    pub rand_samples: usize,
    /// Number of warm-started direct-search restarts K₀ for joint designs.
    pub nm_restarts: usize,
    /// Base seed for all random streams.
    pub rng_seed: u64,
    /// Reciprocal (monostatic) channels: backward link is the transpose of
    /// the forward link. When false the two are drawn independently.
    pub reciprocal: bool,
}

impl Default for SystemConfig {
    fn default() -> Self {
        SystemConfig {
            n_antennas: 4,
            n_tags: 4,
            power_budget: dbm_to_watts(30.0),
            noise_reader: dbm_to_watts(-170.0),
            noise_tag: 0.0,
            alpha_min: 0.01,
            alpha_max: 0.078,
            field_length: 100.0,
            pathloss_exponent: 3.0,
            carrier_freq: 915.0e6,
            csi_error: 0.0,
            tol: 1.0e-6,
            rand_samples: default_rand_samples(4, 4),
            nm_restarts: 15,
            rng_seed: 1,
            reciprocal: true,
        }
    }
}

/// Default randomization sample count: 10·N·M.
pub fn default_rand_samples(n_antennas: usize, n_tags: usize) -> usize {
    10 * n_antennas * n_tags
}

/// Converts a power in dBm to watts.
pub fn dbm_to_watts(dbm: f64) -> f64 {
    10f64.powf((dbm - 30.0) / 10.0)
}

impl SystemConfig {
    /// Checks every documented invariant, returning the first violation.
    pub fn validate(&self) -> Result<()> {
        if self.n_antennas == 0 {
            return Err(Error::domain("n_antennas must be positive"));
        }
        if self.n_tags == 0 {
            return Err(Error::domain("n_tags must be positive"));
        }
        if !(self.power_budget > 0.0) {
            return Err(Error::domain("power_budget must be positive"));
        }
        if !(self.noise_reader > 0.0) {
            return Err(Error::domain("noise_reader must be positive"));
        }
        if !(0.0 <= self.alpha_min && self.alpha_min < self.alpha_max && self.alpha_max <= 1.0) {
            return Err(Error::domain(format!(
                "reflection bounds must satisfy 0 <= alpha_min < alpha_max <= 1, got [{}, {}]",
                self.alpha_min, self.alpha_max
            )));
        }
        if !(self.field_length > 0.0) {
            return Err(Error::domain("field_length must be positive"));
        }
        if !(self.pathloss_exponent >= 0.0) {
            return Err(Error::domain("pathloss_exponent must be nonnegative"));
        }
        if !(self.carrier_freq > 0.0) {
            return Err(Error::domain("carrier_freq must be positive"));
        }
        if !(0.0..=1.0).contains(&self.csi_error) {
            return Err(Error::domain(format!(
                "csi_error must lie in [0, 1], got {}",
                self.csi_error
            )));
        }
        if !(self.tol > 0.0) {
            return Err(Error::domain("tol must be positive"));
        }
        if self.rand_samples == 0 {
            return Err(Error::domain("rand_samples must be positive"));
        }
        if self.nm_restarts == 0 {
            return Err(Error::domain("nm_restarts must be positive"));
        }
        Ok(())
    }

    /// Parses a config from flat `key = value` text (see module docs).
    ///
    /// Keys must be `SystemConfig` field names; power fields additionally
    /// accept a `_dbm` variant. Missing keys keep their defaults; if
    /// `rand_samples` is not given it is recomputed as 10·N·M from the
    /// parsed antenna/tag counts.
    pub fn from_kv_text(text: &str) -> Result<Self> {
        let mut cfg = SystemConfig::default();
        let mut explicit_rand = false;
        for (line_no, key, value) in parse_kv_lines(text)? {
            if !cfg.apply_kv(&key, &value, &mut explicit_rand)? {
                return Err(Error::config(format!(
                    "line {line_no}: unknown key {key:?}"
                )));
            }
        }
        cfg.finalize(explicit_rand)?;
        Ok(cfg)
    }

    /// Parses a config file in the flat `key = value` format.
    pub fn from_kv_file(path: impl AsRef<Path>) -> Result<Self> {
        let path = path.as_ref();
        let text = std::fs::read_to_string(path).map_err(|source| Error::Io {
            path: path.to_path_buf(),
            source,
        })?;
        Self::from_kv_text(&text)
    }

    /// Applies defaults that depend on other fields, then validates.
    pub(crate) fn finalize(&mut self, rand_samples_explicit: bool) -> Result<()> {
        if !rand_samples_explicit {
            self.rand_samples = default_rand_samples(self.n_antennas, self.n_tags);
        }
        self.validate()
    }

    /// Applies one `key = value` pair; returns false when the key is not a
    /// system-level key (so callers layering their own keys on the same
    /// file can try those next).
    pub(crate) fn apply_kv(
        &mut self,
        key: &str,
        value: &str,
        rand_samples_explicit: &mut bool,
    ) -> Result<bool> {
        match key {
            "n_antennas" => self.n_antennas = parse_num::<usize>(key, value)?,
            "n_tags" => self.n_tags = parse_num::<usize>(key, value)?,
            "power_budget" => self.power_budget = parse_num(key, value)?,
            "power_budget_dbm" => self.power_budget = dbm_to_watts(parse_num(key, value)?),
            "noise_reader" => self.noise_reader = parse_num(key, value)?,
            "noise_reader_dbm" => self.noise_reader = dbm_to_watts(parse_num(key, value)?),
            "noise_tag" => self.noise_tag = parse_num(key, value)?,
            "noise_tag_dbm" => self.noise_tag = dbm_to_watts(parse_num(key, value)?),
            "alpha_min" => self.alpha_min = parse_num(key, value)?,
            "alpha_max" => self.alpha_max = parse_num(key, value)?,
            "field_length" => self.field_length = parse_num(key, value)?,
            "pathloss_exponent" => self.pathloss_exponent = parse_num(key, value)?,
            "carrier_freq" => self.carrier_freq = parse_num(key, value)?,
            "csi_error" => self.csi_error = parse_num(key, value)?,
            "tol" => self.tol = parse_num(key, value)?,
            "rand_samples" => {
                self.rand_samples = parse_num(key, value)?;
                *rand_samples_explicit = true;
            }
            "nm_restarts" => self.nm_restarts = parse_num(key, value)?,
            "rng_seed" => self.rng_seed = parse_num(key, value)?,
            "reciprocal" => self.reciprocal = parse_bool(key, value)?,
            _ => return Ok(false),
        }
        Ok(true)
    }
}

/// Splits flat config text into `(line_number, key, value)` triples.
///
/// Blank lines and lines starting with `#` are skipped; everything after a
/// `#` on a value line is treated as a trailing comment.
pub(crate) fn parse_kv_lines(text: &str) -> Result<Vec<(usize, String, String)>> {
    let mut out = Vec::new();
    for (idx, raw) in text.lines().enumerate() {
        let line_no = idx + 1;
        let line = match raw.find('#') {
            Some(pos) => &raw[..pos],
            None => raw,
        };
        let line = line.trim();
        if line.is_empty() {
            continue;
        }
        let Some((key, value)) = line.split_once('=') else {
            return Err(Error::config(format!(
                "line {line_no}: expected `key = value`, got {raw:?}"
            )));
        };
        let key = key.trim();
        let value = value.trim();
        if key.is_empty() || value.is_empty() {
            return Err(Error::config(format!(
                "line {line_no}: empty key or value in {raw:?}"
            )));
        }
        out.push((line_no, key.to_string(), value.to_string()));
    }
    Ok(out)
}

pub(crate) fn parse_num<T: std::str::FromStr>(key: &str, value: &str) -> Result<T> {
    value
        .parse::<T>()
        .map_err(|_| Error::config(format!("invalid value {value:?} for key {key:?}")))
}

pub(crate) fn parse_bool(key: &str, value: &str) -> Result<bool> {
    match value {
        "true" | "1" | "yes" => Ok(true),
        "false" | "0" | "no" => Ok(false),
        _ => Err(Error::config(format!(
            "invalid boolean {value:?} for key {key:?}"
        ))),
    }
}
