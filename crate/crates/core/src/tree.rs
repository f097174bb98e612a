//! The event tree of one laser pulse.
//!
//! Levels, root to leaf: photons emitted `n`, photons arriving `m`, basis
//! relation, detection outcome, and the resulting key bit. The tree is
//! stored as a flat list of leaves; every leaf keeps the factors whose
//! product is its probability.
//!
//! Wrong-basis branches are sifted away before detection is expanded, so
//! they end in a single discard leaf per `(n, m)` path. No-detection and
//! double-detection outcomes are discarded as well. Single clicks on the
//! right basis become key bits: correct when the clicking detector is the
//! one matching Alice's bit, an error otherwise.

use std::fmt::Write as _;

use serde::{Deserialize, Serialize};

use crate::detection::{outcome_distribution, Cause, DetectionOutcome, DetectorId, OutcomeDistribution};
use crate::error::Result;
use crate::photon::{LumpedPoissonSource, PhotonNumberDistribution, PhotonSource, PoissonSource};
use crate::system::{channel_survival_probability, mean_photon_number, PhotonMode, SystemConfig};
use crate::transmission::{binomial_transmission, correct_basis_probability, signal_detector_weights};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub enum Basis {
    Correct,
    Incorrect,
}

/// Detection stage of a leaf.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub enum LeafDetection {
    /// Wrong basis: sifted before detection matters.
    NotMeasured,
    NoDetection,
    /// `detector` is `None` when the leaf merges both detectors.
    Single { detector: Option<DetectorId>, cause: Cause },
    Double,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub enum Bit {
    Correct,
    Error,
    /// No key bit comes out of this leaf.
    Discarded,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub enum Subgroup {
    ErrDark,
    BitDark,
    ErrReal,
    BitReal,
    Discard,
}

impl Subgroup {
    fn classify(cause: Cause, bit: Bit) -> Subgroup {
        match (cause, bit) {
            (_, Bit::Discarded) => Subgroup::Discard,
            (Cause::DarkCount, Bit::Error) => Subgroup::ErrDark,
            (Cause::DarkCount, Bit::Correct) => Subgroup::BitDark,
            (Cause::RealCount, Bit::Error) => Subgroup::ErrReal,
            (Cause::RealCount, Bit::Correct) => Subgroup::BitReal,
        }
    }
}

/// Subgroup a sifted single click falls into. Shared with the simulator.
pub fn classify_click(cause: Cause, clicked: DetectorId, signal: DetectorId) -> Subgroup {
    let bit = if clicked == signal { Bit::Correct } else { Bit::Error };
    Subgroup::classify(cause, bit)
}

/// Factors along the path to a leaf. Their product is the leaf probability.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct PathFactors {
    pub photons: f64,
    pub transmission: f64,
    pub basis: f64,
    /// Detection outcome and bit correctness together, averaged over
    /// which detector carries Alice's bit.
    pub detection: f64,
}

impl PathFactors {
    pub fn product(&self) -> f64 {
        self.photons * self.transmission * self.basis * self.detection
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LeafEvent {
    /// Photons emitted. In the lumped layout `n = 2` stands for two or more.
    pub n: u64,
    pub m: u64,
    pub basis: Basis,
    pub detection: LeafDetection,
    pub bit: Bit,
    pub prob: f64,
    pub subgroup: Subgroup,
    pub factors: PathFactors,
}

/// How finely the leaves split.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum TreeLayout {
    /// Three photon branches; every click leaf merges both detectors.
    /// Reproduces the 18 numbered events of the reference tree.
    Lumped,
    /// Real-count leaves kept per detector; dark-count leaves merged.
    Exact,
}

/// Subgroup sums of the classified leaves.
#[derive(Debug, Clone, Copy, PartialEq, Default, Serialize, Deserialize)]
pub struct SubgroupSums {
    #[serde(rename = "p_err_dark")]
    pub err_dark: f64,
    #[serde(rename = "p_bit_dark")]
    pub bit_dark: f64,
    #[serde(rename = "p_err_real")]
    pub err_real: f64,
    #[serde(rename = "p_bit_real")]
    pub bit_real: f64,
}

impl SubgroupSums {
    pub fn total(&self) -> f64 {
        self.err_dark + self.bit_dark + self.bit_real + self.err_real
    }

    pub fn errors(&self) -> f64 {
        self.err_dark + self.err_real
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EventTree {
    leaves: Vec<LeafEvent>,
    tail_discard: f64,
    config_digest: String,
    layout: TreeLayout,
    mu: f64,
    survival: f64,
    sifting: f64,
}

impl EventTree {
    /// Leaves ordered by `(n, m, basis, detection, bit)`.
    pub fn leaves(&self) -> &[LeafEvent] {
        &self.leaves
    }

    /// Mass beyond the photon-number truncation.
    pub fn tail_discard(&self) -> f64 {
        self.tail_discard
    }

    pub fn config_digest(&self) -> &str {
        &self.config_digest
    }

    pub fn layout(&self) -> TreeLayout {
        self.layout
    }

    pub fn mu(&self) -> f64 {
        self.mu
    }

    pub fn channel_survival(&self) -> f64 {
        self.survival
    }

    pub fn sifting_ratio(&self) -> f64 {
        self.sifting
    }

    pub fn total_probability(&self) -> f64 {
        self.leaves.iter().map(|l| l.prob).sum::<f64>() + self.tail_discard
    }

    /// One line per leaf: n, m, basis, outcome, cause, bit, probability.
    pub fn dump(&self) -> String {
        let mut out = String::new();
        let _ = writeln!(
            out,
            "# config {} layout {:?} mu {} tail_discard {:.10e}",
            self.config_digest, self.layout, self.mu, self.tail_discard
        );
        out.push_str("n\tm\tbasis\toutcome\tcause\tbit\tprobability\n");
        for leaf in &self.leaves {
            let (outcome, cause) = match leaf.detection {
                LeafDetection::NotMeasured => ("sifted".to_string(), "-"),
                LeafDetection::NoDetection => ("none".to_string(), "-"),
                LeafDetection::Double => ("double".to_string(), "-"),
                LeafDetection::Single { detector, cause } => (
                    match detector {
                        Some(d) => format!("single{d}"),
                        None => "single".to_string(),
                    },
                    match cause {
                        Cause::RealCount => "real",
                        Cause::DarkCount => "dark",
                    },
                ),
            };
            let basis = match leaf.basis {
                Basis::Correct => "correct",
                Basis::Incorrect => "incorrect",
            };
            let bit = match leaf.bit {
                Bit::Correct => "correct",
                Bit::Error => "error",
                Bit::Discarded => "-",
            };
            let _ = writeln!(
                out,
                "{}\t{}\t{basis}\t{outcome}\t{cause}\t{bit}\t{:.10e}",
                leaf.n, leaf.m, leaf.prob
            );
        }
        out
    }
}

/// Builds the tree with the photon statistics chosen by `engine.mode`.
pub fn build_tree(config: &SystemConfig) -> Result<EventTree> {
    match config.engine.mode {
        PhotonMode::Lumped => build_tree_with(config, &LumpedPoissonSource, TreeLayout::Lumped),
        PhotonMode::Exact => build_tree_with(
            config,
            &PoissonSource {
                n_max: config.engine.n_max,
            },
            TreeLayout::Exact,
        ),
    }
}

/// Builds the tree from any photon source.
pub fn build_tree_with(config: &SystemConfig, source: &dyn PhotonSource, layout: TreeLayout) -> Result<EventTree> {
    config.validate()?;
    let mu = mean_photon_number(config)?;
    let photons = source.distribution(mu, config.engine.tail_tol)?;
    build_from_distribution(config, &photons, layout)
}

fn build_from_distribution(
    config: &SystemConfig,
    photons: &PhotonNumberDistribution,
    layout: TreeLayout,
) -> Result<EventTree> {
    let survival = channel_survival_probability(config)?;
    let sifting = correct_basis_probability(&config.protocol);
    let weights = signal_detector_weights(&config.protocol);
    let e_det = config.protocol.optical_error_prob;

    let mut leaves = Vec::new();
    for (n, &p_n) in photons.probs().iter().enumerate() {
        let n = n as u64;
        for m in 0..=n {
            let p_m = binomial_transmission(n, m, survival)?;
            let factors = |basis: f64, detection: f64| PathFactors {
                photons: p_n,
                transmission: p_m,
                basis,
                detection,
            };
            let mut push = |basis, detection, bit, subgroup, f: PathFactors| {
                leaves.push(LeafEvent {
                    n,
                    m,
                    basis,
                    detection,
                    bit,
                    prob: f.product(),
                    subgroup,
                    factors: f,
                });
            };

            push(
                Basis::Incorrect,
                LeafDetection::NotMeasured,
                Bit::Discarded,
                Subgroup::Discard,
                factors(1.0 - sifting, 1.0),
            );

            // dists[s]: detector s carries Alice's bit
            let dists: [OutcomeDistribution; 2] = [
                outcome_distribution(m, DetectorId::One, e_det, &config.detector1, &config.detector2)?,
                outcome_distribution(m, DetectorId::Two, e_det, &config.detector1, &config.detector2)?,
            ];
            let averaged = |outcome: DetectionOutcome| weights[0] * dists[0].prob(outcome) + weights[1] * dists[1].prob(outcome);
            // Click on `clicked`, bit correct iff it is the signal detector.
            let click = |clicked: DetectorId, cause: Cause, bit: Bit| {
                let signal = match bit {
                    Bit::Correct => clicked,
                    _ => clicked.other(),
                };
                weights[signal.index()] * dists[signal.index()].prob(DetectionOutcome::Single { detector: clicked, cause })
            };

            push(
                Basis::Correct,
                LeafDetection::NoDetection,
                Bit::Discarded,
                Subgroup::Discard,
                factors(sifting, averaged(DetectionOutcome::NoDetection)),
            );
            for cause in Cause::BOTH {
                if cause == Cause::RealCount && m == 0 {
                    continue;
                }
                let per_detector = cause == Cause::RealCount && layout == TreeLayout::Exact;
                for bit in [Bit::Correct, Bit::Error] {
                    let subgroup = Subgroup::classify(cause, bit);
                    if per_detector {
                        for d in DetectorId::BOTH {
                            let detection = LeafDetection::Single { detector: Some(d), cause };
                            push(Basis::Correct, detection, bit, subgroup, factors(sifting, click(d, cause, bit)));
                        }
                    } else {
                        let f = click(DetectorId::One, cause, bit) + click(DetectorId::Two, cause, bit);
                        let detection = LeafDetection::Single { detector: None, cause };
                        push(Basis::Correct, detection, bit, subgroup, factors(sifting, f));
                    }
                }
            }
            push(
                Basis::Correct,
                LeafDetection::Double,
                Bit::Discarded,
                Subgroup::Discard,
                factors(sifting, averaged(DetectionOutcome::Double)),
            );
        }
    }
    leaves.sort_by_key(|l| (l.n, l.m, l.basis, l.detection, l.bit));

    Ok(EventTree {
        leaves,
        tail_discard: photons.tail_mass(),
        config_digest: config.digest(),
        layout,
        mu: photons.mu(),
        survival,
        sifting,
    })
}

/// Sums classified leaf probabilities by subgroup.
pub fn subgroup_sums(tree: &EventTree) -> SubgroupSums {
    let mut sums = SubgroupSums::default();
    for leaf in &tree.leaves {
        match leaf.subgroup {
            Subgroup::ErrDark => sums.err_dark += leaf.prob,
            Subgroup::BitDark => sums.bit_dark += leaf.prob,
            Subgroup::ErrReal => sums.err_real += leaf.prob,
            Subgroup::BitReal => sums.bit_real += leaf.prob,
            Subgroup::Discard => {}
        }
    }
    sums
}

/// Number of leaves that yield a key bit.
pub fn classified_leaf_count(tree: &EventTree) -> usize {
    tree.leaves.iter().filter(|l| l.subgroup != Subgroup::Discard).count()
}
