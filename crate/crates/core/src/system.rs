//! Physical and protocol parameters of one link, and the composite
//! quantities derived from them (photon energy, transfer ratios, mean
//! photon number, channel survival probability).
//!
//! Losses are configured in dB and converted to linear transfer ratios
//! internally. A transfer ratio doubles as the survival probability of a
//! single photon crossing that element.

use serde::{Deserialize, Serialize};

use crate::error::{ModelError, Result};
use crate::metrics::EpsilonStrategy;

/// Planck constant, J·s (exact SI value).
pub const PLANCK: f64 = 6.626_070_15e-34;
/// Speed of light in vacuum, m/s (exact SI value).
pub const SPEED_OF_LIGHT: f64 = 299_792_458.0;

/// Default probability that a detected signal photon lands on the wrong detector.
pub const DEFAULT_OPTICAL_ERROR: f64 = 0.01;
/// Default Poisson tail mass tolerated beyond the truncation bound.
pub const DEFAULT_TAIL_TOL: f64 = 1e-12;

const PROB_SUM_TOL: f64 = 1e-12;

/// Energy of a single photon, `h·c/λ`.
pub fn photon_energy(wavelength: f64) -> Result<f64> {
    if !(wavelength.is_finite() && wavelength > 0.0) {
        return Err(ModelError::domain(format!(
            "wavelength must be positive and finite, got {wavelength}"
        )));
    }
    Ok(PLANCK * SPEED_OF_LIGHT / wavelength)
}

/// Linear transfer ratio of an element with the given loss, `10^(-dB/10)`.
pub fn transfer_ratio(loss_db: f64) -> Result<f64> {
    if loss_db.is_nan() || loss_db < 0.0 {
        return Err(ModelError::domain(format!(
            "loss must be non-negative, got {loss_db} dB"
        )));
    }
    Ok(10f64.powf(-loss_db / 10.0))
}

/// The attenuated laser at Alice.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct LaserSource {
    /// Energy of one laser pulse before attenuation, J.
    pub pulse_energy: f64,
    /// Optical wavelength, m.
    pub wavelength: f64,
    /// Effective pulse repetition rate, pulses/s.
    pub pulse_rate: f64,
    /// Sets the mean photon number directly, bypassing the energy budget.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub mu_override: Option<f64>,
}

/// Losses between the laser and Bob's detectors, all in dB.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct OpticalPath {
    pub channel_atten_db_per_km: f64,
    pub channel_length_km: f64,
    /// Connectors and splices.
    #[serde(default)]
    pub extra_loss_db: f64,
    #[serde(default)]
    pub voa_alice_db: f64,
    #[serde(default)]
    pub voa_bob_db: f64,
}

impl OpticalPath {
    /// Total quantum-channel loss, fiber plus connectors.
    pub fn channel_loss_db(&self) -> f64 {
        self.channel_atten_db_per_km * self.channel_length_km + self.extra_loss_db
    }
}

/// An avalanche-photodiode single-photon detector.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Detector {
    /// Quantum efficiency η.
    pub efficiency: f64,
    /// Mean number of dark carriers in the multiplication region per gate.
    pub dark_carriers: f64,
    /// Probability that one carrier triggers an avalanche above threshold.
    pub avalanche_prob: f64,
}

/// Preparation and measurement alphabets.
///
/// Alice's states are indexed `[0, π/2, π, 3π/2]`, Bob's bases `[0, π/2]`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ProtocolConfig {
    #[serde(default = "uniform4")]
    pub alice_state_probs: [f64; 4],
    #[serde(default = "uniform2")]
    pub bob_basis_probs: [f64; 2],
    /// Replaces the computed sifting ratio (0.25 for SARG04-class sifting).
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub sifting_ratio_override: Option<f64>,
    /// Probability that a signal photon is routed to the wrong detector.
    #[serde(default = "default_optical_error")]
    pub optical_error_prob: f64,
}

fn uniform4() -> [f64; 4] {
    [0.25; 4]
}

fn uniform2() -> [f64; 2] {
    [0.5; 2]
}

fn default_optical_error() -> f64 {
    DEFAULT_OPTICAL_ERROR
}

fn default_tail_tol() -> f64 {
    DEFAULT_TAIL_TOL
}

impl Default for ProtocolConfig {
    fn default() -> Self {
        ProtocolConfig {
            alice_state_probs: uniform4(),
            bob_basis_probs: uniform2(),
            sifting_ratio_override: None,
            optical_error_prob: DEFAULT_OPTICAL_ERROR,
        }
    }
}

/// How the attenuators and the channel compose into the mean photon number.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
pub enum AttenuationMode {
    /// Only Alice's attenuator sets μ; channel loss acts on transmission.
    #[default]
    #[serde(rename = "one-way")]
    OneWay,
    /// Pulses cross the channel and both attenuators before leaving Alice
    /// (plug-and-play systems), so all three enter μ.
    #[serde(rename = "loop-back")]
    LoopBack,
}

/// Photon-number statistics used to build the event tree.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum PhotonMode {
    /// Three branches (0, 1, 2+ photons), the 2+ lump treated as two photons.
    Lumped,
    /// Truncated Poisson with explicit tail mass.
    #[default]
    Exact,
}

/// Numerical engine settings.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct EngineConfig {
    #[serde(default)]
    pub mode: PhotonMode,
    #[serde(default = "default_tail_tol")]
    pub tail_tol: f64,
    /// Fixed photon-number truncation; chosen from `tail_tol` when absent.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub n_max: Option<usize>,
    #[serde(default)]
    pub attenuation: AttenuationMode,
    #[serde(default)]
    pub epsilon: EpsilonStrategy,
}

impl Default for EngineConfig {
    fn default() -> Self {
        EngineConfig {
            mode: PhotonMode::default(),
            tail_tol: DEFAULT_TAIL_TOL,
            n_max: None,
            attenuation: AttenuationMode::default(),
            epsilon: EpsilonStrategy::default(),
        }
    }
}

/// Full parameter set of one link.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SystemConfig {
    pub source: LaserSource,
    pub path: OpticalPath,
    pub detector1: Detector,
    pub detector2: Detector,
    #[serde(default)]
    pub protocol: ProtocolConfig,
    #[serde(default)]
    pub engine: EngineConfig,
}

fn check(ok: bool, path: &str, reason: impl FnOnce() -> String) -> Result<()> {
    if ok {
        Ok(())
    } else {
        Err(ModelError::config(path, reason()))
    }
}

fn check_prob(value: f64, path: &str) -> Result<()> {
    check((0.0..=1.0).contains(&value), path, || {
        format!("must lie in [0, 1], got {value}")
    })
}

fn check_non_negative(value: f64, path: &str) -> Result<()> {
    check(value >= 0.0 && value.is_finite(), path, || {
        format!("must be finite and >= 0, got {value}")
    })
}

fn check_positive(value: f64, path: &str) -> Result<()> {
    check(value > 0.0 && value.is_finite(), path, || {
        format!("must be finite and > 0, got {value}")
    })
}

fn check_prob_vector(values: &[f64], path: &str) -> Result<()> {
    for (i, &v) in values.iter().enumerate() {
        check_prob(v, &format!("{path}[{i}]"))?;
    }
    let sum: f64 = values.iter().sum();
    check((sum - 1.0).abs() <= PROB_SUM_TOL, path, || {
        format!("probabilities must sum to 1, got {sum}")
    })
}

impl Detector {
    fn validate(&self, name: &str) -> Result<()> {
        check_prob(self.efficiency, &format!("{name}.efficiency"))?;
        check_non_negative(self.dark_carriers, &format!("{name}.dark_carriers"))?;
        check_prob(self.avalanche_prob, &format!("{name}.avalanche_prob"))
    }
}

impl ProtocolConfig {
    pub fn validate(&self) -> Result<()> {
        check_prob_vector(&self.alice_state_probs, "protocol.alice_state_probs")?;
        check_prob_vector(&self.bob_basis_probs, "protocol.bob_basis_probs")?;
        if let Some(r) = self.sifting_ratio_override {
            check_prob(r, "protocol.sifting_ratio_override")?;
        }
        check((0.0..=0.5).contains(&self.optical_error_prob), "protocol.optical_error_prob", || {
            format!("must lie in [0, 0.5], got {}", self.optical_error_prob)
        })
    }
}

impl SystemConfig {
    /// Checks every declared range, naming the first offending field.
    pub fn validate(&self) -> Result<()> {
        check_positive(self.source.pulse_energy, "source.pulse_energy")?;
        check_positive(self.source.wavelength, "source.wavelength")?;
        check_positive(self.source.pulse_rate, "source.pulse_rate")?;
        if let Some(mu) = self.source.mu_override {
            check_positive(mu, "source.mu_override")?;
        }

        let p = &self.path;
        check_non_negative(p.channel_atten_db_per_km, "path.channel_atten_db_per_km")?;
        check_non_negative(p.channel_length_km, "path.channel_length_km")?;
        check_non_negative(p.extra_loss_db, "path.extra_loss_db")?;
        check_non_negative(p.voa_alice_db, "path.voa_alice_db")?;
        check_non_negative(p.voa_bob_db, "path.voa_bob_db")?;

        self.detector1.validate("detector1")?;
        self.detector2.validate("detector2")?;
        self.protocol.validate()?;

        let tol = self.engine.tail_tol;
        check(tol > 0.0 && tol < 1.0, "engine.tail_tol", || {
            format!("must lie in (0, 1), got {tol}")
        })?;
        self.engine.epsilon.validate()
    }

    /// Short stable identifier of this configuration.
    pub fn digest(&self) -> String {
        use sha2::{Digest, Sha256};
        let bytes = serde_json::to_vec(self).expect("config serializes");
        Sha256::digest(&bytes)[..8]
            .iter()
            .map(|b| format!("{b:02x}"))
            .collect()
    }

    /// Both detectors.
    pub fn detectors(&self) -> [&Detector; 2] {
        [&self.detector1, &self.detector2]
    }
}

/// Mean photon number per pulse leaving Alice.
pub fn mean_photon_number(config: &SystemConfig) -> Result<f64> {
    if let Some(mu) = config.source.mu_override {
        check_positive(mu, "source.mu_override")?;
        return Ok(mu);
    }
    let path = &config.path;
    let attenuation_db = match config.engine.attenuation {
        AttenuationMode::OneWay => path.voa_alice_db,
        AttenuationMode::LoopBack => path.channel_loss_db() + path.voa_alice_db + path.voa_bob_db,
    };
    let ratio = transfer_ratio(attenuation_db)?;
    let mu = config.source.pulse_energy / photon_energy(config.source.wavelength)? * ratio;
    if mu > 0.0 && mu.is_finite() {
        Ok(mu)
    } else {
        Err(ModelError::config(
            "source",
            format!("derived mean photon number must be finite and > 0, got {mu}"),
        ))
    }
}

/// Probability that one photon crosses the quantum channel.
pub fn channel_survival_probability(config: &SystemConfig) -> Result<f64> {
    transfer_ratio(config.path.channel_loss_db())
}
