//! JSON experiment configuration. Every record rejects unknown keys; dB
//! values are converted to linear units here and nowhere else.

use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};

use crate::amplifier::{gan_reference_model, AmpRecord, PolynomialModel};
use crate::channel::UlaLosScenario;
use crate::error::{Error, Result};
use crate::pulses::{PulseSpec, PulseWindow, DEFAULT_MAX_LAG};
use crate::sim::ChannelType;
use crate::stats::from_db10;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum OutputFormat {
    #[default]
    Csv,
    Json,
}

#[derive(Debug, Clone, PartialEq, Default, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct ExperimentConfig {
    /// Optional guard: if present it must name the command being run.
    pub command: Option<String>,
    pub seed: Option<u64>,
    pub out: Option<PathBuf>,
    pub format: Option<OutputFormat>,
    pub coeffs: CoeffsConfig,
    pub pulses: PulsesConfig,
    pub array: ArrayConfig,
    pub rate: RateConfig,
    pub validate: ValidateConfig,
}

impl ExperimentConfig {
    pub fn load(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path)
            .map_err(|e| Error::Config(format!("cannot read {}: {e}", path.display())))?;
        Self::from_json(&text)
    }

    pub fn from_json(text: &str) -> Result<Self> {
        let cfg: Self = serde_json::from_str(text).map_err(|e| Error::Config(format!("schema: {e}")))?;
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn validate(&self) -> Result<()> {
        self.coeffs.validate()?;
        self.pulses.spec().validate().map_err(as_config)?;
        self.array.validate()?;
        self.rate.validate()?;
        Ok(())
    }
}

fn as_config(e: Error) -> Error {
    match e {
        Error::Config(_) => e,
        other => Error::Config(other.to_string()),
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct CoeffsConfig {
    /// Amplifier record; the bundled GaN model when absent.
    pub amp: Option<AmpRecord>,
    pub sigma_sq: f64,
    /// Desensitization sweep relative to the one-dB compression point.
    pub sweep: SweepConfig,
}

impl Default for CoeffsConfig {
    fn default() -> Self {
        Self { amp: None, sigma_sq: 1.0, sweep: SweepConfig::default() }
    }
}

impl CoeffsConfig {
    pub fn model(&self) -> Result<PolynomialModel> {
        match &self.amp {
            Some(r) => r.to_model().map_err(as_config),
            None => Ok(gan_reference_model()),
        }
    }

    fn validate(&self) -> Result<()> {
        if !(self.sigma_sq > 0.0) {
            return Err(Error::Config("coeffs.sigma_sq must be positive".into()));
        }
        self.model()?;
        self.sweep.validate()
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct SweepConfig {
    pub from_db: f64,
    pub to_db: f64,
    pub points: usize,
}

impl Default for SweepConfig {
    fn default() -> Self {
        Self { from_db: -10.0, to_db: 0.0, points: 100 }
    }
}

impl SweepConfig {
    fn validate(&self) -> Result<()> {
        if self.points < 2 || !(self.to_db > self.from_db) {
            return Err(Error::Config("sweep needs ≥ 2 points and to_db > from_db".into()));
        }
        Ok(())
    }

    pub fn grid_db(&self) -> Vec<f64> {
        let n = self.points - 1;
        (0..=n).map(|i| self.from_db + (self.to_db - self.from_db) * i as f64 / n as f64).collect()
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct PulsesConfig {
    pub roll_off: f64,
    pub oversampling: usize,
    pub span: usize,
    pub window: PulseWindow,
    pub max_lag: usize,
    pub nfft: usize,
    /// Scale spectra by the number of terms for this many users.
    pub users: Option<usize>,
}

impl Default for PulsesConfig {
    fn default() -> Self {
        let s = PulseSpec::default();
        Self {
            roll_off: s.roll_off,
            oversampling: s.oversampling,
            span: s.span,
            window: s.window,
            max_lag: DEFAULT_MAX_LAG,
            nfft: 4096,
            users: None,
        }
    }
}

impl PulsesConfig {
    pub fn spec(&self) -> PulseSpec {
        PulseSpec {
            roll_off: self.roll_off,
            oversampling: self.oversampling,
            span: self.span,
            window: self.window,
            sampling_offset: 0.0,
        }
    }
}

/// Line-of-sight scenario with angles in degrees (or normalised sine angles)
/// and powers in dB relative to user 1.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ScenarioRecord {
    pub antennas: usize,
    #[serde(default)]
    pub angles_deg: Option<Vec<f64>>,
    #[serde(default)]
    pub sine_angles: Option<Vec<f64>>,
    /// Blocker last.
    pub powers_db: Vec<f64>,
    /// Linear power of user 1.
    #[serde(default = "one")]
    pub reference_power: f64,
    #[serde(default = "half")]
    pub spacing: f64,
}

fn one() -> f64 {
    1.0
}

fn half() -> f64 {
    0.5
}

impl ScenarioRecord {
    pub fn to_scenario(&self) -> Result<UlaLosScenario> {
        let phis = match (&self.angles_deg, &self.sine_angles) {
            (Some(a), None) => a.iter().map(|&t| UlaLosScenario::sine_angle(t, self.spacing)).collect(),
            (None, Some(s)) => s.clone(),
            _ => return Err(Error::Config("give exactly one of angles_deg or sine_angles".into())),
        };
        if self.powers_db.len() < 2 {
            return Err(Error::Config("powers_db needs at least a user and the blocker slot".into()));
        }
        let s = UlaLosScenario {
            antennas: self.antennas,
            users: self.powers_db.len() - 1,
            sine_angles: phis,
            powers: self.powers_db.iter().map(|&d| self.reference_power * from_db10(d)).collect(),
            spacing: self.spacing,
        };
        s.validate().map_err(as_config)?;
        Ok(s)
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct ArrayConfig {
    pub antennas: usize,
    pub phi_points: usize,
    pub etas: Vec<f64>,
    pub deviation_draws: usize,
    pub kappa: f64,
    /// Optional scenario for distortion autocorrelation and regime tables.
    pub scenario: Option<ScenarioRecord>,
    pub lags: Vec<i64>,
}

impl Default for ArrayConfig {
    fn default() -> Self {
        Self {
            antennas: 100,
            phi_points: 721,
            etas: (0..=10).map(|i| i as f64 / 10.0).collect(),
            deviation_draws: 2000,
            kappa: 0.01,
            scenario: None,
            lags: vec![0, 1, 2],
        }
    }
}

impl ArrayConfig {
    fn validate(&self) -> Result<()> {
        if self.antennas == 0 || self.phi_points < 2 {
            return Err(Error::Config("array needs antennas ≥ 1 and phi_points ≥ 2".into()));
        }
        if self.etas.iter().any(|e| !(0.0..=1.0).contains(e)) {
            return Err(Error::Config("array.etas must lie in [0, 1]".into()));
        }
        if !(self.kappa >= 0.0) {
            return Err(Error::Config("array.kappa must be non-negative".into()));
        }
        if let Some(s) = &self.scenario {
            s.to_scenario()?;
        }
        Ok(())
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct RateConfig {
    pub channel_types: Vec<ChannelType>,
    pub blocker_db: Vec<f64>,
    pub antennas: Vec<usize>,
    pub symbols: usize,
    pub realizations: usize,
    pub noise_psd: f64,
    pub backoff_db: f64,
    /// Abort when one realization would need more than this many bytes.
    pub memory_limit_bytes: usize,
}

impl Default for RateConfig {
    fn default() -> Self {
        Self {
            channel_types: vec![ChannelType::Los, ChannelType::FrequencySelective],
            blocker_db: vec![70.0, 80.0],
            antennas: vec![1, 2, 4, 8, 16, 32, 64, 128, 256],
            symbols: 2000,
            realizations: 5,
            noise_psd: 0.0,
            backoff_db: 8.0,
            memory_limit_bytes: 2 << 30,
        }
    }
}

impl RateConfig {
    fn validate(&self) -> Result<()> {
        if self.antennas.is_empty() || self.antennas.windows(2).any(|w| w[0] >= w[1]) || self.antennas[0] == 0 {
            return Err(Error::Config("rate.antennas must be positive and strictly ascending".into()));
        }
        if self.symbols < 1000 || self.realizations == 0 {
            return Err(Error::Config("rate needs symbols ≥ 1000 and realizations ≥ 1".into()));
        }
        if !(self.noise_psd >= 0.0) {
            return Err(Error::Config("rate.noise_psd must be non-negative".into()));
        }
        Ok(())
    }

    /// Reduced-size variant for `--quick`.
    pub fn quick(&self) -> Self {
        Self {
            antennas: self.antennas.iter().copied().filter(|&m| m <= 64).collect(),
            symbols: 1000,
            realizations: 2,
            ..self.clone()
        }
    }
}

#[derive(Debug, Clone, PartialEq, Default, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct ValidateConfig {
    /// Mutation hook: analytic side without the factor 2.
    pub drop_factor_two: bool,
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn empty_config_is_default() {
        let c = ExperimentConfig::from_json("{}").unwrap();
        assert_eq!(c, ExperimentConfig::default());
    }

    #[test]
    fn unknown_keys_rejected() {
        assert!(matches!(ExperimentConfig::from_json(r#"{"sede": 1}"#), Err(Error::Config(_))));
        assert!(ExperimentConfig::from_json(r#"{"rate": {"symbol": 5}}"#).is_err());
    }

    #[test]
    fn scenario_db_conversion() {
        let r = ScenarioRecord {
            antennas: 8,
            angles_deg: Some(vec![0.0, 30.0]),
            sine_angles: None,
            powers_db: vec![0.0, 20.0],
            reference_power: 2.0,
            spacing: 0.5,
        };
        let s = r.to_scenario().unwrap();
        assert!((s.powers[1] - 200.0).abs() < 1e-9);
        assert!((s.sine_angles[1] + std::f64::consts::PI * 0.5).abs() < 1e-12);
    }
}
