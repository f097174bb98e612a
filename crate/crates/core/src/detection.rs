//! Detection outcomes at Bob's two avalanche photodiodes.
//!
//! Arriving photons split binomially between the signal detector and the
//! other one. Each detector then has two independent avalanche processes,
//! a real count driven by its photons and a dark count, and clicks if
//! either fires. A single click whose real process fired is attributed to
//! the real count even when the dark process fired as well.

use serde::{Deserialize, Serialize};

use crate::error::{ModelError, Result};
use crate::system::Detector;
use crate::transmission::binomial_transmission;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub enum DetectorId {
    One,
    Two,
}

impl DetectorId {
    pub const BOTH: [DetectorId; 2] = [DetectorId::One, DetectorId::Two];

    pub fn index(self) -> usize {
        match self {
            DetectorId::One => 0,
            DetectorId::Two => 1,
        }
    }

    pub fn other(self) -> DetectorId {
        match self {
            DetectorId::One => DetectorId::Two,
            DetectorId::Two => DetectorId::One,
        }
    }

    pub fn from_index(i: usize) -> DetectorId {
        if i == 0 {
            DetectorId::One
        } else {
            DetectorId::Two
        }
    }
}

impl std::fmt::Display for DetectorId {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        write!(f, "{}", self.index() + 1)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub enum Cause {
    RealCount,
    DarkCount,
}

impl Cause {
    pub const BOTH: [Cause; 2] = [Cause::RealCount, Cause::DarkCount];

    fn index(self) -> usize {
        match self {
            Cause::RealCount => 0,
            Cause::DarkCount => 1,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub enum DetectionOutcome {
    NoDetection,
    Single { detector: DetectorId, cause: Cause },
    Double,
}

impl DetectionOutcome {
    /// All six outcomes.
    pub fn all() -> impl Iterator<Item = DetectionOutcome> {
        let singles = DetectorId::BOTH.into_iter().flat_map(|detector| {
            Cause::BOTH
                .into_iter()
                .map(move |cause| DetectionOutcome::Single { detector, cause })
        });
        std::iter::once(DetectionOutcome::NoDetection)
            .chain(singles)
            .chain(std::iter::once(DetectionOutcome::Double))
    }
}

/// Probability of each detection outcome for one pulse.
#[derive(Debug, Clone, Copy, PartialEq, Default, Serialize, Deserialize)]
pub struct OutcomeDistribution {
    pub no_detection: f64,
    /// Indexed by detector, then cause (real, dark).
    pub single: [[f64; 2]; 2],
    pub double: f64,
}

impl OutcomeDistribution {
    pub fn prob(&self, outcome: DetectionOutcome) -> f64 {
        match outcome {
            DetectionOutcome::NoDetection => self.no_detection,
            DetectionOutcome::Single { detector, cause } => self.single[detector.index()][cause.index()],
            DetectionOutcome::Double => self.double,
        }
    }

    pub fn iter(&self) -> impl Iterator<Item = (DetectionOutcome, f64)> + '_ {
        DetectionOutcome::all().map(move |o| (o, self.prob(o)))
    }

    pub fn total(&self) -> f64 {
        self.iter().map(|(_, p)| p).sum()
    }

    /// Probability that only `detector` clicks, whatever the cause.
    pub fn single_on(&self, detector: DetectorId) -> f64 {
        self.single[detector.index()].iter().sum()
    }
}

/// Probability that `photons` photons trigger a real avalanche,
/// `1 − exp(−p_a·η·i)`.
pub fn real_count_probability(photons: u64, detector: &Detector) -> f64 {
    -(-detector.avalanche_prob * detector.efficiency * photons as f64).exp_m1()
}

/// Probability of a dark avalanche in one gate, `1 − exp(−p_a·N_d)`.
pub fn dark_count_probability(detector: &Detector) -> f64 {
    -(-detector.avalanche_prob * detector.dark_carriers).exp_m1()
}

// (fire, no-fire) probabilities of the real process for `photons` photons.
fn real_pair(photons: u64, detector: &Detector) -> (f64, f64) {
    let x = detector.avalanche_prob * detector.efficiency * photons as f64;
    (-(-x).exp_m1(), (-x).exp())
}

/// Outcome distribution when `arriving` photons reach Bob and `signal` is
/// the detector matching Alice's bit. `optical_error` is the probability
/// that a photon is routed to the other detector.
pub fn outcome_distribution(
    arriving: u64,
    signal: DetectorId,
    optical_error: f64,
    d1: &Detector,
    d2: &Detector,
) -> Result<OutcomeDistribution> {
    if !(0.0..=0.5).contains(&optical_error) {
        return Err(ModelError::domain(format!(
            "optical error probability must lie in [0, 0.5], got {optical_error}"
        )));
    }
    let detectors = [d1, d2];
    let dark: [(f64, f64); 2] = detectors.map(|d| {
        let x = d.avalanche_prob * d.dark_carriers;
        (-(-x).exp_m1(), (-x).exp())
    });
    let s = signal.index();
    let o = signal.other().index();

    let mut dist = OutcomeDistribution::default();
    for to_signal in 0..=arriving {
        let w = binomial_transmission(arriving, to_signal, 1.0 - optical_error)?;
        if w == 0.0 {
            continue;
        }
        let mut photons = [0; 2];
        photons[s] = to_signal;
        photons[o] = arriving - to_signal;

        let real = [real_pair(photons[0], d1), real_pair(photons[1], d2)];
        // silent = neither process fires
        let silent = [real[0].1 * dark[0].1, real[1].1 * dark[1].1];
        let clicks = [1.0 - silent[0], 1.0 - silent[1]];

        dist.no_detection += w * silent[0] * silent[1];
        dist.double += w * clicks[0] * clicks[1];
        for j in 0..2 {
            let other_silent = silent[1 - j];
            dist.single[j][0] += w * real[j].0 * other_silent;
            dist.single[j][1] += w * real[j].1 * dark[j].0 * other_silent;
        }
    }
    Ok(dist)
}
