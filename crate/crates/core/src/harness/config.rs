//! Simulation configuration and its flat key-value file format.
//!
//! A config file is a flat TOML document: one `key = value` per line, no
//! tables. Keys not listed in [`CONFIG_KEYS`] are rejected.

use std::fmt;
use std::path::Path;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::channel::{ArrayGeometry, MaskCase};
use crate::hmm::HmmParams;
use crate::{Error, Result, SPEED_OF_LIGHT};

/// Estimators the harness knows how to run.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum EstimatorKind {
    Ls,
    PSomp,
    /// Subarray P-SOMP with the given number of contiguous subarrays.
    Subarray(usize),
    VrHmmPSomp,
    Genie,
}

impl fmt::Display for EstimatorKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            EstimatorKind::Ls => f.write_str("ls"),
            EstimatorKind::PSomp => f.write_str("p-somp"),
            EstimatorKind::Subarray(k) => write!(f, "subarray-{k}"),
            EstimatorKind::VrHmmPSomp => f.write_str("vr-hmm-p-somp"),
            EstimatorKind::Genie => f.write_str("genie"),
        }
    }
}

impl FromStr for EstimatorKind {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "ls" => Ok(EstimatorKind::Ls),
            "p-somp" => Ok(EstimatorKind::PSomp),
            "vr-hmm-p-somp" => Ok(EstimatorKind::VrHmmPSomp),
            "genie" => Ok(EstimatorKind::Genie),
            other => other
                .strip_prefix("subarray-")
                .and_then(|k| k.parse::<usize>().ok())
                .filter(|&k| k > 0)
                .map(EstimatorKind::Subarray)
                .ok_or_else(|| Error::config("estimators", format!("unknown estimator `{other}`"))),
        }
    }
}

/// Swept configuration field.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum AxisKind {
    /// Channel SNR in dB.
    #[serde(rename = "snr", alias = "snr_db")]
    Snr,
    /// Number of dominant paths.
    #[serde(rename = "L", alias = "l")]
    L,
}

impl AxisKind {
    pub fn name(&self) -> &'static str {
        match self {
            AxisKind::Snr => "snr",
            AxisKind::L => "L",
        }
    }

    pub fn label(&self) -> &'static str {
        match self {
            AxisKind::Snr => "SNR (dB)",
            AxisKind::L => "L",
        }
    }
}

impl FromStr for AxisKind {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "snr" | "snr_db" => Ok(AxisKind::Snr),
            "L" | "l" | "n_paths" => Ok(AxisKind::L),
            other => Err(Error::config("axis", format!("unknown sweep axis `{other}`"))),
        }
    }
}

/// Every accepted config key with a one-line description.
pub const CONFIG_KEYS: &[(&str, &str)] = &[
    ("n_antennas", "number of BS antennas N"),
    ("antenna_spacing", "element spacing d in metres"),
    ("carrier_frequency", "carrier frequency f_c in Hz"),
    ("bandwidth", "total bandwidth B in Hz"),
    ("n_subcarriers", "number of subcarriers M"),
    ("n_pilots", "pilot repetitions T"),
    ("n_paths", "number of dominant paths L"),
    ("snr_db", "channel SNR in dB (inf for noiseless)"),
    ("distance_min", "lower bound of scatterer distance r in metres"),
    ("distance_max", "upper bound of scatterer distance r in metres"),
    ("angle_min", "lower bound of angle of arrival in radians"),
    ("angle_max", "upper bound of angle of arrival in radians"),
    ("theta_edge_max", "largest diffraction-edge deviation in radians"),
    ("mask_mix", "relative weights of [stationary, binary, non-binary] VR masks"),
    ("dictionary_rings", "distance rings per angle, including the far-field ring"),
    ("dictionary_beta", "ring spacing (coherence) parameter beta"),
    ("dictionary_atoms", "total atom count S after truncation (0 keeps N * rings)"),
    ("temperature", "sigmoid steepness of the VR emission model"),
    ("support_factor", "sparsity multiplier: L_hat = support_factor * L"),
    ("residual_threshold", "optional early stop on residual energy fraction (0 disables)"),
    ("p_stay", "HMM probability of keeping the VR state (default 1 - 1/N)"),
    ("p_init_in", "HMM initial probability of the in-VR state"),
    ("n_iter", "Monte Carlo trials per sweep point"),
    ("master_seed", "64-bit master seed"),
    ("estimators", "estimators to run: ls, p-somp, subarray-K, vr-hmm-p-somp, genie"),
    ("axis", "sweep axis: snr or L"),
    ("axis_values", "values taken along the sweep axis"),
];

/// All simulation parameters. Defaults reproduce the reference configuration.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct ScenarioConfig {
    pub n_antennas: usize,
    pub antenna_spacing: f64,
    pub carrier_frequency: f64,
    pub bandwidth: f64,
    pub n_subcarriers: usize,
    pub n_pilots: usize,
    pub n_paths: usize,
    pub snr_db: f64,
    pub distance_min: f64,
    pub distance_max: f64,
    pub angle_min: f64,
    pub angle_max: f64,
    pub theta_edge_max: f64,
    pub mask_mix: [f64; 3],
    pub dictionary_rings: usize,
    pub dictionary_beta: f64,
    pub dictionary_atoms: usize,
    pub temperature: f64,
    pub support_factor: usize,
    pub residual_threshold: f64,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub p_stay: Option<f64>,
    pub p_init_in: f64,
    pub n_iter: usize,
    pub master_seed: u64,
    pub estimators: Vec<String>,
    pub axis: AxisKind,
    pub axis_values: Vec<f64>,
}

impl Default for ScenarioConfig {
    fn default() -> Self {
        use std::f64::consts::FRAC_PI_3;
        Self {
            n_antennas: 256,
            antenna_spacing: 0.005,
            carrier_frequency: 30e9,
            bandwidth: 100e6,
            n_subcarriers: 12,
            n_pilots: 4,
            n_paths: 6,
            snr_db: 0.0,
            distance_min: 7.0,
            distance_max: 327.0,
            angle_min: -FRAC_PI_3,
            angle_max: FRAC_PI_3,
            theta_edge_max: 0.006,
            mask_mix: [1.0, 1.0, 1.0],
            dictionary_rings: 10,
            dictionary_beta: 1.2,
            dictionary_atoms: 2555,
            temperature: 20.0,
            support_factor: 2,
            residual_threshold: 0.0,
            p_stay: None,
            p_init_in: 0.55,
            n_iter: 500,
            master_seed: 1,
            estimators: [
                "ls",
                "p-somp",
                "subarray-8",
                "subarray-32",
                "vr-hmm-p-somp",
                "genie",
            ]
            .iter()
            .map(|s| s.to_string())
            .collect(),
            axis: AxisKind::Snr,
            axis_values: vec![-10.0, -5.0, 0.0, 5.0, 10.0],
        }
    }
}

impl ScenarioConfig {
    /// Parses a config document; keys absent from it keep their defaults.
    pub fn from_toml_str(text: &str) -> Result<Self> {
        let table: toml::Table = text
            .parse()
            .map_err(|e: toml::de::Error| Error::config(key_at(text, &e), e.message().to_string()))?;
        Self::from_table(table)
    }

    pub fn load(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
        Self::from_toml_str(&text)
    }

    /// Loads `path` (or starts from defaults) and applies `key=value` overrides.
    pub fn load_with_overrides(path: Option<&Path>, overrides: &[String]) -> Result<Self> {
        let mut table = match path {
            Some(p) => {
                let text = std::fs::read_to_string(p).map_err(|e| Error::io(p, e))?;
                text.parse::<toml::Table>()
                    .map_err(|e| Error::config(key_at(&text, &e), e.message().to_string()))?
            }
            None => toml::Table::new(),
        };
        for ov in overrides {
            let (key, value) = parse_override(ov)?;
            table.insert(key, value);
        }
        Self::from_table(table)
    }

    fn from_table(table: toml::Table) -> Result<Self> {
        for (key, value) in &table {
            if !CONFIG_KEYS.iter().any(|(k, _)| k == key) {
                return Err(Error::config(key.clone(), "unknown configuration key"));
            }
            if value.is_table() {
                return Err(Error::config(key.clone(), "nested tables are not allowed"));
            }
        }
        // Deserialize one key at a time so type errors name their key.
        let mut cfg = ScenarioConfig::default();
        let mut merged = toml::Table::try_from(&cfg).expect("default config serializes");
        for (key, value) in table {
            let mut probe = merged.clone();
            probe.insert(key.clone(), value.clone());
            probe
                .clone()
                .try_into::<ScenarioConfig>()
                .map_err(|e| Error::config(key.clone(), e.message().to_string()))?;
            merged = probe;
        }
        cfg = merged
            .try_into()
            .map_err(|e: toml::de::Error| Error::config("config", e.message().to_string()))?;
        cfg.validate()?;
        Ok(cfg)
    }

    /// Renders the config back to the key-value file format.
    pub fn to_toml_string(&self) -> String {
        toml::to_string(self).expect("config serializes")
    }

    pub fn validate(&self) -> Result<()> {
        let positive_counts = [
            ("n_antennas", self.n_antennas),
            ("n_subcarriers", self.n_subcarriers),
            ("n_pilots", self.n_pilots),
            ("n_paths", self.n_paths),
            ("dictionary_rings", self.dictionary_rings),
            ("support_factor", self.support_factor),
            ("n_iter", self.n_iter),
        ];
        for (key, v) in positive_counts {
            if v == 0 {
                return Err(Error::config(key, "must be at least 1"));
            }
        }
        let positive_reals = [
            ("antenna_spacing", self.antenna_spacing),
            ("carrier_frequency", self.carrier_frequency),
            ("distance_min", self.distance_min),
            ("dictionary_beta", self.dictionary_beta),
            ("temperature", self.temperature),
        ];
        for (key, v) in positive_reals {
            if !(v.is_finite() && v > 0.0) {
                return Err(Error::config(key, format!("must be positive and finite, got {v}")));
            }
        }
        if !(self.bandwidth.is_finite() && self.bandwidth >= 0.0 && self.bandwidth < 2.0 * self.carrier_frequency) {
            return Err(Error::config("bandwidth", "must be non-negative and below twice the carrier"));
        }
        if self.n_subcarriers > 1 && self.bandwidth == 0.0 {
            return Err(Error::config("bandwidth", "must be positive with more than one subcarrier"));
        }
        if !(self.distance_max.is_finite() && self.distance_max >= self.distance_min) {
            return Err(Error::config("distance_max", "must be finite and at least distance_min"));
        }
        let half_pi = std::f64::consts::FRAC_PI_2;
        if !(self.angle_min > -half_pi && self.angle_max < half_pi && self.angle_min < self.angle_max) {
            return Err(Error::config("angle_max", "angle range must be a non-empty subset of (-pi/2, pi/2)"));
        }
        if !(self.theta_edge_max.is_finite() && self.theta_edge_max >= 0.0) {
            return Err(Error::config("theta_edge_max", "must be non-negative"));
        }
        if self.mask_mix.iter().any(|w| !(w.is_finite() && *w >= 0.0)) || self.mask_mix.iter().sum::<f64>() <= 0.0 {
            return Err(Error::config("mask_mix", "weights must be non-negative with a positive sum"));
        }
        if !(self.residual_threshold.is_finite() && (0.0..1.0).contains(&self.residual_threshold)) {
            return Err(Error::config("residual_threshold", "must lie in [0, 1)"));
        }
        if self.snr_db.is_nan() || self.snr_db == f64::NEG_INFINITY {
            return Err(Error::config("snr_db", "must be a number or +inf"));
        }
        self.hmm_params()?;
        for name in &self.estimators {
            if let EstimatorKind::Subarray(k) = name.parse::<EstimatorKind>()? {
                if !self.n_antennas.is_multiple_of(k) {
                    return Err(Error::config(
                        "estimators",
                        format!("`{name}`: {} antennas do not split into {k} subarrays", self.n_antennas),
                    ));
                }
            }
        }
        for &v in &self.axis_values {
            if !v.is_finite() && !(self.axis == AxisKind::Snr && v == f64::INFINITY) {
                return Err(Error::config("axis_values", format!("{v} is not finite")));
            }
            if self.axis == AxisKind::L && (v < 1.0 || v.fract() != 0.0) {
                return Err(Error::config("axis_values", format!("path count {v} is not a positive integer")));
            }
        }
        Ok(())
    }

    pub fn geometry(&self) -> Result<ArrayGeometry> {
        ArrayGeometry::new(self.n_antennas, self.antenna_spacing)
    }

    pub fn carrier_wavenumber(&self) -> f64 {
        2.0 * std::f64::consts::PI * self.carrier_frequency / SPEED_OF_LIGHT
    }

    pub fn carrier_wavelength(&self) -> f64 {
        SPEED_OF_LIGHT / self.carrier_frequency
    }

    /// Sparsity level handed to the greedy estimators.
    pub fn l_hat(&self) -> usize {
        self.support_factor * self.n_paths
    }

    pub fn estimator_kinds(&self) -> Result<Vec<EstimatorKind>> {
        self.estimators.iter().map(|s| s.parse()).collect()
    }

    pub fn hmm_params(&self) -> Result<HmmParams> {
        let p_stay = self.p_stay.unwrap_or(1.0 - 1.0 / self.n_antennas as f64);
        HmmParams::new(p_stay, self.p_init_in, self.temperature)
    }

    /// Probability of each mask case, in [`MaskCase`] order.
    pub fn mask_probabilities(&self) -> [(MaskCase, f64); 3] {
        let total: f64 = self.mask_mix.iter().sum();
        [
            (MaskCase::Stationary, self.mask_mix[0] / total),
            (MaskCase::Binary, self.mask_mix[1] / total),
            (MaskCase::NonBinary, self.mask_mix[2] / total),
        ]
    }

    /// Copy with the swept field set to `value`.
    pub fn with_axis_value(&self, axis: AxisKind, value: f64) -> Self {
        let mut cfg = self.clone();
        match axis {
            AxisKind::Snr => cfg.snr_db = value,
            AxisKind::L => cfg.n_paths = value.round() as usize,
        }
        cfg
    }
}

fn parse_override(ov: &str) -> Result<(String, toml::Value)> {
    let (key, raw) = ov
        .split_once('=')
        .ok_or_else(|| Error::config(ov, "override must look like key=value"))?;
    let key = key.trim().to_string();
    let raw = raw.trim();
    let value = format!("v = {raw}")
        .parse::<toml::Table>()
        .ok()
        .and_then(|mut t| t.remove("v"))
        .unwrap_or_else(|| toml::Value::String(raw.to_string()));
    Ok((key, value))
}

/// Best-effort name of the key on the line where a parse error occurred.
fn key_at(text: &str, err: &toml::de::Error) -> String {
    err.span()
        .and_then(|span| {
            let start = text[..span.start.min(text.len())].rfind('\n').map_or(0, |i| i + 1);
            let line = text[start..].lines().next()?;
            line.split_once('=').map(|(k, _)| k.trim().to_string())
        })
        .filter(|k| !k.is_empty())
        .unwrap_or_else(|| "config".to_string())
}
