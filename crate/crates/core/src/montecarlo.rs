//! Pulse-by-pulse simulation of the same physical chain.
//!
//! Every stage is sampled on its own: the photon number from a full
//! Poisson law, survival and routing photon by photon, Alice's state and
//! Bob's basis from their alphabets, and each avalanche process as a coin
//! flip. Only the classification rule is shared with the event tree.
//!
//! Pulses are cut into fixed-size blocks. Block `i` draws from the ChaCha
//! stream `i` of the seed, so the result depends on `(seed, pulses)` only,
//! never on how many workers ran the blocks.

use rand::distr::weighted::WeightedIndex;
use rand::distr::Distribution;
use rand::Rng;
use rand_chacha::rand_core::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::Poisson;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::detection::{dark_count_probability, real_count_probability, Cause, DetectorId};
use crate::error::{ModelError, Result};
use crate::system::{channel_survival_probability, mean_photon_number, Detector, SystemConfig};
use crate::transmission::is_compatible;
use crate::tree::{classify_click, Subgroup};

/// Pulses per random stream.
pub const BLOCK_SIZE: u64 = 1 << 16;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
pub struct SubgroupCounts {
    pub err_dark: u64,
    pub bit_dark: u64,
    pub err_real: u64,
    pub bit_real: u64,
}

impl SubgroupCounts {
    pub fn total(&self) -> u64 {
        self.err_dark + self.bit_dark + self.err_real + self.bit_real
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
pub struct DiscardCounts {
    pub no_detection: u64,
    pub double: u64,
    pub wrong_basis: u64,
}

impl DiscardCounts {
    pub fn total(&self) -> u64 {
        self.no_detection + self.double + self.wrong_basis
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SimulationResult {
    pub pulses: u64,
    pub seed: u64,
    pub sifted_bits: u64,
    pub error_bits: u64,
    pub counts: SubgroupCounts,
    pub discards: DiscardCounts,
    pub p_sigma_hat: f64,
    pub p_sigma_se: f64,
    /// Absent when no bit was sifted.
    pub qber_hat: Option<f64>,
    pub qber_se: Option<f64>,
}

/// `sqrt(p(1 − p)/n)`.
pub fn binomial_standard_error(p: f64, n: u64) -> f64 {
    (p * (1.0 - p) / n as f64).sqrt()
}

/// Standard errors of the effectiveness and QBER estimates.
pub fn estimate_standard_errors(result: &SimulationResult) -> (f64, Option<f64>) {
    let se_sigma = binomial_standard_error(result.p_sigma_hat, result.pulses);
    let se_qber = result
        .qber_hat
        .filter(|_| result.sifted_bits > 0)
        .map(|q| binomial_standard_error(q, result.sifted_bits));
    (se_sigma, se_qber)
}

#[derive(Debug, Clone, Copy, Default)]
struct Tally {
    counts: SubgroupCounts,
    discards: DiscardCounts,
}

impl Tally {
    fn merge(mut self, other: Tally) -> Tally {
        self.counts.err_dark += other.counts.err_dark;
        self.counts.bit_dark += other.counts.bit_dark;
        self.counts.err_real += other.counts.err_real;
        self.counts.bit_real += other.counts.bit_real;
        self.discards.no_detection += other.discards.no_detection;
        self.discards.double += other.discards.double;
        self.discards.wrong_basis += other.discards.wrong_basis;
        self
    }
}

enum Sifting {
    Alphabets(WeightedIndex<f64>),
    Ratio(f64),
}

struct PulseSampler<'a> {
    photons: Option<Poisson<f64>>,
    survival: f64,
    alice: WeightedIndex<f64>,
    sifting: Sifting,
    misroute: f64,
    detectors: [&'a Detector; 2],
    dark: [f64; 2],
}

impl<'a> PulseSampler<'a> {
    fn new(config: &'a SystemConfig) -> Result<Self> {
        config.validate()?;
        let mu = mean_photon_number(config)?;
        let photons = if mu > 0.0 {
            Some(Poisson::new(mu).map_err(|e| ModelError::domain(format!("cannot sample Poisson({mu}): {e}")))?)
        } else {
            None
        };
        let weights = |w: &[f64]| {
            WeightedIndex::new(w.iter().copied()).map_err(|e| ModelError::domain(format!("bad alphabet weights: {e}")))
        };
        let protocol = &config.protocol;
        let sifting = match protocol.sifting_ratio_override {
            Some(r) => Sifting::Ratio(r),
            None => Sifting::Alphabets(weights(&protocol.bob_basis_probs)?),
        };
        let detectors = config.detectors();
        Ok(PulseSampler {
            photons,
            survival: channel_survival_probability(config)?,
            alice: weights(&protocol.alice_state_probs)?,
            sifting,
            misroute: protocol.optical_error_prob,
            detectors,
            dark: detectors.map(dark_count_probability),
        })
    }

    fn coin<R: Rng>(rng: &mut R, p: f64) -> bool {
        rng.random::<f64>() < p
    }

    fn pulse<R: Rng>(&self, rng: &mut R, tally: &mut Tally) {
        let emitted = match &self.photons {
            Some(poisson) => poisson.sample(rng) as u64,
            None => 0,
        };
        let arrived = (0..emitted).filter(|_| Self::coin(rng, self.survival)).count() as u64;

        let state = self.alice.sample(rng);
        let compatible = match &self.sifting {
            Sifting::Alphabets(bob) => is_compatible(state, bob.sample(rng)),
            Sifting::Ratio(r) => Self::coin(rng, *r),
        };
        if !compatible {
            tally.discards.wrong_basis += 1;
            return;
        }

        // states 0, π/2 carry bit 0 (detector 1); π, 3π/2 carry bit 1
        let signal = DetectorId::from_index(state / 2);
        let to_signal = (0..arrived).filter(|_| !Self::coin(rng, self.misroute)).count() as u64;
        let mut at = [0u64; 2];
        at[signal.index()] = to_signal;
        at[signal.other().index()] = arrived - to_signal;

        let mut real = [false; 2];
        let mut clicked = [false; 2];
        for j in 0..2 {
            real[j] = at[j] > 0 && Self::coin(rng, real_count_probability(at[j], self.detectors[j]));
            let dark = Self::coin(rng, self.dark[j]);
            clicked[j] = real[j] || dark;
        }

        match clicked {
            [false, false] => tally.discards.no_detection += 1,
            [true, true] => tally.discards.double += 1,
            [c1, _] => {
                let j = if c1 { 0 } else { 1 };
                let cause = if real[j] { Cause::RealCount } else { Cause::DarkCount };
                let c = &mut tally.counts;
                match classify_click(cause, DetectorId::from_index(j), signal) {
                    Subgroup::ErrDark => c.err_dark += 1,
                    Subgroup::BitDark => c.bit_dark += 1,
                    Subgroup::ErrReal => c.err_real += 1,
                    Subgroup::BitReal => c.bit_real += 1,
                    Subgroup::Discard => unreachable!("single clicks always yield a bit"),
                }
            }
        }
    }

    fn block(&self, seed: u64, index: u64, pulses: u64) -> Tally {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        rng.set_stream(index);
        let mut tally = Tally::default();
        for _ in 0..pulses {
            self.pulse(&mut rng, &mut tally);
        }
        tally
    }
}

fn run_blocks(sampler: &PulseSampler<'_>, pulses: u64, seed: u64) -> Tally {
    let blocks = pulses.div_ceil(BLOCK_SIZE);
    let tallies: Vec<Tally> = (0..blocks)
        .into_par_iter()
        .map(|i| {
            let len = BLOCK_SIZE.min(pulses - i * BLOCK_SIZE);
            sampler.block(seed, i, len)
        })
        .collect();
    tallies.into_iter().fold(Tally::default(), Tally::merge)
}

/// Simulates `pulses` pulses on the global thread pool.
pub fn simulate(config: &SystemConfig, pulses: u64, seed: u64) -> Result<SimulationResult> {
    if pulses == 0 {
        return Err(ModelError::domain("at least one pulse must be simulated"));
    }
    let sampler = PulseSampler::new(config)?;
    let tally = run_blocks(&sampler, pulses, seed);
    Ok(finish(tally, pulses, seed))
}

/// Simulates on a dedicated pool of `workers` threads.
pub fn simulate_with_workers(config: &SystemConfig, pulses: u64, seed: u64, workers: usize) -> Result<SimulationResult> {
    let pool = rayon::ThreadPoolBuilder::new()
        .num_threads(workers.max(1))
        .build()
        .map_err(|e| ModelError::domain(format!("cannot start worker pool: {e}")))?;
    pool.install(|| simulate(config, pulses, seed))
}

fn finish(tally: Tally, pulses: u64, seed: u64) -> SimulationResult {
    let sifted_bits = tally.counts.total();
    let error_bits = tally.counts.err_dark + tally.counts.err_real;
    let p_sigma_hat = sifted_bits as f64 / pulses as f64;
    let qber_hat = (sifted_bits > 0).then(|| error_bits as f64 / sifted_bits as f64);
    let mut result = SimulationResult {
        pulses,
        seed,
        sifted_bits,
        error_bits,
        counts: tally.counts,
        discards: tally.discards,
        p_sigma_hat,
        p_sigma_se: 0.0,
        qber_hat,
        qber_se: None,
    };
    let (se_sigma, se_qber) = estimate_standard_errors(&result);
    result.p_sigma_se = se_sigma;
    result.qber_se = se_qber;
    result
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::system::tests::sample_config;

    #[test]
    fn dark_and_empty_link_never_clicks() {
        let mut cfg = sample_config();
        cfg.source.mu_override = Some(1e-300);
        cfg.detector1.dark_carriers = 0.0;
        cfg.detector2.dark_carriers = 0.0;
        let r = simulate(&cfg, 100_000, 1).unwrap();
        assert_eq!(r.sifted_bits, 0);
        assert_eq!(r.qber_hat, None);
        assert_eq!(r.qber_se, None);
        assert_eq!(r.discards.double, 0);
        assert_eq!(r.discards.no_detection + r.discards.wrong_basis, r.pulses);
    }

    #[test]
    fn error_free_limit() {
        let mut cfg = sample_config();
        cfg.source.mu_override = Some(10.0);
        cfg.path.channel_length_km = 0.0;
        cfg.protocol.sifting_ratio_override = Some(1.0);
        cfg.protocol.optical_error_prob = 0.0;
        for d in [&mut cfg.detector1, &mut cfg.detector2] {
            d.efficiency = 1.0;
            d.avalanche_prob = 1.0;
            d.dark_carriers = 0.0;
        }
        let r = simulate(&cfg, 200_000, 7).unwrap();
        assert_eq!(r.error_bits, 0);
        assert_eq!(r.qber_hat, Some(0.0));
        assert_eq!(r.discards.double, 0);
        assert_eq!(r.discards.wrong_basis, 0);
        // a pulse of n photons clicks with 1 − e^-n, so P(click) = 1 − E[e^-n]
        let expected = 1.0 - (-10.0 * (1.0 - (-1.0f64).exp())).exp();
        assert!((r.p_sigma_hat - expected).abs() < 5.0 * binomial_standard_error(expected, r.pulses) + 1e-6);
    }

    #[test]
    fn every_pulse_lands_in_one_category() {
        let r = simulate(&sample_config(), 300_001, 99).unwrap();
        assert_eq!(r.sifted_bits + r.discards.total(), r.pulses);
        assert_eq!(r.sifted_bits, r.counts.total());
    }

    #[test]
    fn standard_error_values() {
        assert_eq!(binomial_standard_error(0.0, 100), 0.0);
        assert!((binomial_standard_error(0.5, 10_000) - 0.005).abs() < 1e-15);
    }

    #[test]
    fn zero_pulses_rejected() {
        assert!(simulate(&sample_config(), 0, 1).is_err());
    }

    #[test]
    fn worker_count_does_not_change_result() {
        let cfg = sample_config();
        let a = simulate_with_workers(&cfg, 3 * BLOCK_SIZE + 17, 5, 1).unwrap();
        let b = simulate_with_workers(&cfg, 3 * BLOCK_SIZE + 17, 5, 4).unwrap();
        assert_eq!(a, b);
    }
}
