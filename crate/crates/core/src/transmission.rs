//! Photon survival through the quantum channel and basis sifting.

use serde::{Deserialize, Serialize};

use crate::error::{ModelError, Result};
use crate::system::ProtocolConfig;

/// `m` of `n` photons reach Bob.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct TransmissionBranch {
    pub n: u64,
    pub m: u64,
    pub prob: f64,
}

/// Binomial probability that `m` of `n` photons survive a channel with
/// per-photon survival probability `p_qc`.
pub fn binomial_transmission(n: u64, m: u64, p_qc: f64) -> Result<f64> {
    if m > n {
        return Err(ModelError::domain(format!("{m} photons cannot survive out of {n}")));
    }
    if !(0.0..=1.0).contains(&p_qc) {
        return Err(ModelError::domain(format!("survival probability must lie in [0, 1], got {p_qc}")));
    }
    if p_qc == 0.0 {
        return Ok(if m == 0 { 1.0 } else { 0.0 });
    }
    if p_qc == 1.0 {
        return Ok(if m == n { 1.0 } else { 0.0 });
    }
    let lost = n - m;
    if n <= 500 {
        Ok(binomial_coefficient(n, m) * p_qc.powi(m as i32) * (1.0 - p_qc).powi(lost as i32))
    } else {
        let ln = ln_binomial_coefficient(n, m) + m as f64 * p_qc.ln() + lost as f64 * (-p_qc).ln_1p();
        Ok(ln.exp())
    }
}

/// All `n + 1` branches for a pulse of `n` photons.
pub fn transmission_branches(n: u64, p_qc: f64) -> Result<Vec<TransmissionBranch>> {
    (0..=n)
        .map(|m| binomial_transmission(n, m, p_qc).map(|prob| TransmissionBranch { n, m, prob }))
        .collect()
}

fn binomial_coefficient(n: u64, k: u64) -> f64 {
    let k = k.min(n - k);
    (1..=k).fold(1.0, |acc, i| acc * (n - k + i) as f64 / i as f64)
}

fn ln_binomial_coefficient(n: u64, k: u64) -> f64 {
    let k = k.min(n - k);
    (1..=k).map(|i| ((n - k + i) as f64 / i as f64).ln()).sum()
}

// State index (0, π/2, π, 3π/2) → basis index (0, π/2).
const STATE_BASIS: [usize; 4] = [0, 1, 0, 1];

/// Probability that Bob's basis is compatible with Alice's state.
///
/// Alice and Bob choose independently, so each compatible pair contributes
/// `p{A}·p{B}`.
pub fn correct_basis_probability(protocol: &ProtocolConfig) -> f64 {
    protocol
        .sifting_ratio_override
        .unwrap_or_else(|| compatible_mass(protocol).iter().sum())
}

// Compatible mass split by Alice's bit: states 0 and π/2 encode 0, π and 3π/2 encode 1.
fn compatible_mass(protocol: &ProtocolConfig) -> [f64; 2] {
    let mut mass = [0.0; 2];
    for (state, &pa) in protocol.alice_state_probs.iter().enumerate() {
        mass[state / 2] += pa * protocol.bob_basis_probs[STATE_BASIS[state]];
    }
    mass
}

/// Probability that detector 1 (bit 0) or detector 2 (bit 1) is the
/// signal detector, given a sifted pulse.
pub fn signal_detector_weights(protocol: &ProtocolConfig) -> [f64; 2] {
    let mass = match protocol.sifting_ratio_override {
        Some(_) => {
            let a = &protocol.alice_state_probs;
            [a[0] + a[1], a[2] + a[3]]
        }
        None => compatible_mass(protocol),
    };
    let total = mass[0] + mass[1];
    if total > 0.0 {
        [mass[0] / total, mass[1] / total]
    } else {
        [0.5, 0.5]
    }
}

/// Whether Bob's basis matches Alice's state, as a sampling helper.
pub fn is_compatible(state: usize, basis: usize) -> bool {
    STATE_BASIS[state] == basis
}
