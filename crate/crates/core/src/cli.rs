//! Configuration ingestion, sweeps and reports behind the `qkd-budget`
//! binary.

use std::time::{SystemTime, UNIX_EPOCH};

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{ModelError, Result};
use crate::metrics::{evaluate, metrics_from_tree, KeyMetrics};
use crate::montecarlo::{binomial_standard_error, simulate, SimulationResult};
use crate::photon::{lumped_three_branch, poisson_pn};
use crate::system::{mean_photon_number, SystemConfig};
use crate::tree::{build_tree, EventTree};

/// Agreement threshold between engines, in standard errors.
pub const COMPARE_SIGMAS: f64 = 3.0;

/// Parses and validates a JSON configuration document.
pub fn parse_config(text: &str) -> Result<SystemConfig> {
    let de = &mut serde_json::Deserializer::from_str(text);
    let config: SystemConfig = serde_path_to_error::deserialize(de).map_err(|e| {
        let path = e.path().to_string();
        ModelError::Parse {
            path,
            message: e.into_inner().to_string(),
        }
    })?;
    config.validate()?;
    Ok(config)
}

/// Pretty JSON that [`parse_config`] reads back to the same value.
pub fn serialize_config(config: &SystemConfig) -> String {
    serde_json::to_string_pretty(config).expect("config serializes")
}

/// Photon-number branch probabilities echoed in reports.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PhotonSummary {
    pub mu: f64,
    pub p0: f64,
    pub p1: f64,
    /// Exactly two photons.
    pub p2: f64,
    /// Two or more photons.
    pub p2plus: f64,
}

impl PhotonSummary {
    fn of(mu: f64) -> Result<Self> {
        let (p0, p1, p2plus) = lumped_three_branch(mu)?;
        Ok(PhotonSummary {
            mu,
            p0,
            p1,
            p2: poisson_pn(mu, 2)?,
            p2plus,
        })
    }
}

/// Analytic against simulated values at the 3·se criterion.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Comparison {
    pub p_sigma_analytic: f64,
    pub p_sigma_simulated: f64,
    pub p_sigma_se: f64,
    pub qber_analytic: Option<f64>,
    pub qber_simulated: Option<f64>,
    pub qber_se: Option<f64>,
    /// Acceptance half-width in standard errors.
    pub sigmas: f64,
    /// Both engines produced no sifted key.
    pub vacuous: bool,
    pub pass: bool,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RunReport {
    pub tool: String,
    pub timestamp_unix: u64,
    pub config: SystemConfig,
    pub config_digest: String,
    pub photon_statistics: PhotonSummary,
    /// Absent when the link produces no sifted key.
    pub metrics: Option<KeyMetrics>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub simulation: Option<SimulationResult>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub comparison: Option<Comparison>,
}

impl RunReport {
    fn new(config: &SystemConfig, metrics: Option<KeyMetrics>) -> Result<Self> {
        let timestamp_unix = SystemTime::now()
            .duration_since(UNIX_EPOCH)
            .map(|d| d.as_secs())
            .unwrap_or(0);
        Ok(RunReport {
            tool: concat!(env!("CARGO_PKG_NAME"), " ", env!("CARGO_PKG_VERSION")).to_string(),
            timestamp_unix,
            config: config.clone(),
            config_digest: config.digest(),
            photon_statistics: PhotonSummary::of(mean_photon_number(config)?)?,
            metrics,
            simulation: None,
            comparison: None,
        })
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("report serializes")
    }
}

/// Builds the tree and computes every metric. Fails with
/// [`ModelError::NoSiftedKey`] when nothing is sifted.
pub fn run_evaluate(config: &SystemConfig) -> Result<(RunReport, EventTree)> {
    let tree = build_tree(config)?;
    let metrics = metrics_from_tree(config, &tree)?;
    Ok((RunReport::new(config, Some(metrics))?, tree))
}

/// Runs both engines on one configuration.
pub fn run_compare(config: &SystemConfig, pulses: u64, seed: u64) -> Result<RunReport> {
    compare_engines(config, config, pulses, seed)
}

/// Runs the analytic engine on `analytic` and the simulator on `simulated`.
/// Distinct configurations are only useful to check that a mismatch is caught.
pub fn compare_engines(analytic: &SystemConfig, simulated: &SystemConfig, pulses: u64, seed: u64) -> Result<RunReport> {
    let metrics = match evaluate(analytic) {
        Ok(m) => Some(m),
        Err(ModelError::NoSiftedKey) => None,
        Err(e) => return Err(e),
    };
    let sim = simulate(simulated, pulses, seed)?;
    let comparison = judge(metrics.as_ref(), &sim);
    let mut report = RunReport::new(analytic, metrics)?;
    report.simulation = Some(sim);
    report.comparison = Some(comparison);
    Ok(report)
}

// Each estimate is tested against the larger of the empirical standard
// error and the one implied by the analytic value, so a zero count does
// not produce a zero-width interval.
fn within(analytic: f64, estimate: f64, se_hat: f64, trials: u64) -> (bool, f64) {
    let se = se_hat.max(binomial_standard_error(analytic, trials));
    ((analytic - estimate).abs() <= COMPARE_SIGMAS * se, se)
}

fn judge(metrics: Option<&KeyMetrics>, sim: &SimulationResult) -> Comparison {
    let p_sigma_analytic = metrics.map_or(0.0, |m| m.p_sigma);
    let qber_analytic = metrics.map(|m| m.p_err);
    let vacuous = metrics.is_none() && sim.sifted_bits == 0;

    let (sigma_ok, p_sigma_se) = within(p_sigma_analytic, sim.p_sigma_hat, sim.p_sigma_se, sim.pulses);
    let (qber_ok, qber_se) = match (qber_analytic, sim.qber_hat) {
        (Some(a), Some(hat)) => {
            let (ok, se) = within(a, hat, sim.qber_se.unwrap_or(0.0), sim.sifted_bits);
            (ok, Some(se))
        }
        (None, None) => (true, None),
        _ => (false, sim.qber_se),
    };
    Comparison {
        p_sigma_analytic,
        p_sigma_simulated: sim.p_sigma_hat,
        p_sigma_se,
        qber_analytic,
        qber_simulated: sim.qber_hat,
        qber_se,
        sigmas: COMPARE_SIGMAS,
        vacuous,
        pass: vacuous || (sigma_ok && qber_ok),
    }
}

/// Parameter swept by [`run_sweep`].
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, clap::ValueEnum)]
#[serde(rename_all = "snake_case")]
#[clap(rename_all = "snake_case")]
pub enum SweepVariable {
    ChannelLengthKm,
    Mu,
    /// Efficiency of both detectors.
    EtaBoth,
    /// Dark carriers of both detectors.
    DarkCarriersBoth,
    EDet,
}

impl SweepVariable {
    pub fn name(self) -> &'static str {
        match self {
            SweepVariable::ChannelLengthKm => "channel_length_km",
            SweepVariable::Mu => "mu",
            SweepVariable::EtaBoth => "eta_both",
            SweepVariable::DarkCarriersBoth => "dark_carriers_both",
            SweepVariable::EDet => "e_det",
        }
    }

    /// Copy of `base` with this variable set to `value`.
    pub fn apply(self, base: &SystemConfig, value: f64) -> SystemConfig {
        let mut cfg = base.clone();
        match self {
            SweepVariable::ChannelLengthKm => cfg.path.channel_length_km = value,
            SweepVariable::Mu => cfg.source.mu_override = Some(value),
            SweepVariable::EtaBoth => {
                cfg.detector1.efficiency = value;
                cfg.detector2.efficiency = value;
            }
            SweepVariable::DarkCarriersBoth => {
                cfg.detector1.dark_carriers = value;
                cfg.detector2.dark_carriers = value;
            }
            SweepVariable::EDet => cfg.protocol.optical_error_prob = value,
        }
        cfg
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum SweepScale {
    #[default]
    Linear,
    Logarithmic,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SweepSpec {
    variable: SweepVariable,
    start: f64,
    stop: f64,
    steps: usize,
    scale: SweepScale,
}

impl SweepSpec {
    pub fn new(variable: SweepVariable, start: f64, stop: f64, steps: usize, scale: SweepScale) -> Result<Self> {
        if !(start.is_finite() && stop.is_finite() && start < stop) {
            return Err(ModelError::config("sweep", format!("need finite start < stop, got {start} .. {stop}")));
        }
        if steps < 2 {
            return Err(ModelError::config("sweep.steps", format!("need at least 2 steps, got {steps}")));
        }
        if scale == SweepScale::Logarithmic && start <= 0.0 {
            return Err(ModelError::config("sweep.start", "logarithmic sweeps need start > 0"));
        }
        Ok(SweepSpec {
            variable,
            start,
            stop,
            steps,
            scale,
        })
    }

    pub fn variable(&self) -> SweepVariable {
        self.variable
    }

    /// Sweep points in ascending order; both ends are hit exactly.
    pub fn points(&self) -> Vec<f64> {
        let last = (self.steps - 1) as f64;
        (0..self.steps)
            .map(|i| {
                if i == 0 {
                    return self.start;
                }
                if i == self.steps - 1 {
                    return self.stop;
                }
                let t = i as f64 / last;
                match self.scale {
                    SweepScale::Linear => self.start + t * (self.stop - self.start),
                    SweepScale::Logarithmic => (self.start.ln() + t * (self.stop.ln() - self.start.ln())).exp(),
                }
            })
            .collect()
    }
}

/// One evaluated sweep point.
#[derive(Debug, Clone, PartialEq)]
pub struct SweepRow {
    pub value: f64,
    pub outcome: Result<KeyMetrics>,
}

/// Evaluates every sweep point, in parallel, in ascending order.
pub fn sweep_rows(base: &SystemConfig, spec: &SweepSpec) -> Vec<SweepRow> {
    spec.points()
        .into_par_iter()
        .map(|value| SweepRow {
            value,
            outcome: evaluate(&spec.variable.apply(base, value)),
        })
        .collect()
}

fn fmt_num(x: f64) -> String {
    format!("{x:.9e}")
}

/// CSV with one row per sweep point. Points that cannot be evaluated keep
/// their row, with empty values and the error in the status column.
pub fn run_sweep(base: &SystemConfig, spec: &SweepSpec) -> Result<String> {
    let mut writer = csv::Writer::from_writer(Vec::new());
    let io = |e: csv::Error| ModelError::domain(format!("csv output failed: {e}"));
    writer
        .write_record([
            spec.variable.name(),
            "p_sigma",
            "qber",
            "epsilon",
            "sifted_rate_bps",
            "private_rate_bps",
            "status",
        ])
        .map_err(io)?;
    for row in sweep_rows(base, spec) {
        let record = match &row.outcome {
            Ok(m) => [
                fmt_num(row.value),
                fmt_num(m.p_sigma),
                fmt_num(m.p_err),
                fmt_num(m.epsilon),
                fmt_num(m.sifted_rate),
                fmt_num(m.private_rate),
                "ok".to_string(),
            ],
            Err(e) => {
                let mut r: [String; 7] = Default::default();
                r[0] = fmt_num(row.value);
                r[6] = format!("error: {e}");
                r
            }
        };
        writer.write_record(&record).map_err(io)?;
    }
    let bytes = writer.into_inner().map_err(|e| ModelError::domain(format!("csv output failed: {e}")))?;
    Ok(String::from_utf8(bytes).expect("csv output is utf-8"))
}
