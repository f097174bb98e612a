//! Photon-number statistics of an attenuated laser pulse.

use serde::{Deserialize, Serialize};

use crate::error::{ModelError, Result};

const NORMALIZATION_TOL: f64 = 1e-12;

fn check_mu(mu: f64) -> Result<()> {
    if mu >= 0.0 && mu.is_finite() {
        Ok(())
    } else {
        Err(ModelError::domain(format!(
            "mean photon number must be finite and >= 0, got {mu}"
        )))
    }
}

fn ln_factorial(n: u64) -> f64 {
    (2..=n).map(|k| (k as f64).ln()).sum()
}

/// Poisson probability of `n` photons in a pulse with mean `mu`.
pub fn poisson_pn(mu: f64, n: u64) -> Result<f64> {
    check_mu(mu)?;
    if mu == 0.0 {
        return Ok(if n == 0 { 1.0 } else { 0.0 });
    }
    if n <= 100 && mu < 700.0 {
        let mut p = (-mu).exp();
        for k in 1..=n {
            p *= mu / k as f64;
        }
        Ok(p)
    } else {
        Ok((n as f64 * mu.ln() - mu - ln_factorial(n)).exp())
    }
}

/// Zero-, one- and multi-photon probabilities `(p0, p1, p2+)`.
pub fn lumped_three_branch(mu: f64) -> Result<(f64, f64, f64)> {
    let p0 = poisson_pn(mu, 0)?;
    let p1 = poisson_pn(mu, 1)?;
    let p2plus = (1.0 - p0 - p1).clamp(0.0, 1.0);
    Ok((p0, p1, p2plus))
}

/// Distribution over photons per pulse, truncated at `n_max` with the
/// remaining mass kept in `tail_mass`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PhotonNumberDistribution {
    probs: Vec<f64>,
    tail_mass: f64,
    mu: f64,
}

impl PhotonNumberDistribution {
    /// Builds a distribution from explicit probabilities, for sources other
    /// than the attenuated laser.
    pub fn from_parts(probs: Vec<f64>, tail_mass: f64, mu: f64) -> Result<Self> {
        if probs.is_empty() {
            return Err(ModelError::domain("photon distribution needs at least one entry"));
        }
        if let Some(bad) = probs.iter().chain([&tail_mass]).find(|p| !(**p >= 0.0 && p.is_finite())) {
            return Err(ModelError::domain(format!("negative or non-finite probability {bad}")));
        }
        let total: f64 = probs.iter().sum::<f64>() + tail_mass;
        if (total - 1.0).abs() > NORMALIZATION_TOL {
            return Err(ModelError::domain(format!(
                "photon distribution sums to {total}, expected 1"
            )));
        }
        Ok(PhotonNumberDistribution { probs, tail_mass, mu })
    }

    /// `probs[n]` is the probability of `n` photons.
    pub fn probs(&self) -> &[f64] {
        &self.probs
    }

    pub fn tail_mass(&self) -> f64 {
        self.tail_mass
    }

    pub fn mu(&self) -> f64 {
        self.mu
    }

    pub fn n_max(&self) -> usize {
        self.probs.len() - 1
    }

    /// Mean of the retained part, `Σ n·p_n`.
    pub fn truncated_mean(&self) -> f64 {
        self.probs.iter().enumerate().map(|(n, p)| n as f64 * p).sum()
    }
}

/// Exact Poisson terms `0..=n_max` where `n_max` is the smallest bound whose
/// tail is below `tail_tol`.
pub fn truncated_distribution(mu: f64, tail_tol: f64) -> Result<PhotonNumberDistribution> {
    check_mu(mu)?;
    if !(tail_tol > 0.0 && tail_tol < 1.0) {
        return Err(ModelError::domain(format!("tail tolerance must lie in (0, 1), got {tail_tol}")));
    }
    let terms = poisson_terms(mu);
    let suffix = suffix_sums(&terms);
    let n_max = (0..terms.len())
        .find(|&n| suffix[n + 1] < tail_tol)
        .unwrap_or(terms.len() - 1);
    Ok(PhotonNumberDistribution {
        probs: terms[..=n_max].to_vec(),
        tail_mass: suffix[n_max + 1],
        mu,
    })
}

/// Exact Poisson terms with a fixed truncation bound.
pub fn poisson_with_bound(mu: f64, n_max: usize) -> Result<PhotonNumberDistribution> {
    check_mu(mu)?;
    let mut terms = poisson_terms(mu);
    if terms.len() <= n_max {
        terms.resize(n_max + 1, 0.0);
    }
    let suffix = suffix_sums(&terms);
    Ok(PhotonNumberDistribution {
        probs: terms[..=n_max].to_vec(),
        tail_mass: suffix[n_max + 1],
        mu,
    })
}

/// Three-branch form: index 2 carries the whole multi-photon mass.
pub fn lumped_distribution(mu: f64) -> Result<PhotonNumberDistribution> {
    let (p0, p1, p2) = lumped_three_branch(mu)?;
    Ok(PhotonNumberDistribution {
        probs: vec![p0, p1, p2],
        tail_mass: 0.0,
        mu,
    })
}

// All terms up to the point where they underflow past the mode.
fn poisson_terms(mu: f64) -> Vec<f64> {
    if mu == 0.0 {
        return vec![1.0];
    }
    let ln_mu = mu.ln();
    let mut ln_term = -mu;
    let mut terms = vec![ln_term.exp()];
    let mut n = 0u64;
    loop {
        n += 1;
        ln_term += ln_mu - (n as f64).ln();
        let t = ln_term.exp();
        if t == 0.0 && n as f64 > mu {
            break;
        }
        terms.push(t);
    }
    terms
}

// suffix[k] = Σ_{j >= k} terms[j], summed smallest-first; suffix[len] = 0.
fn suffix_sums(terms: &[f64]) -> Vec<f64> {
    let mut suffix = vec![0.0; terms.len() + 1];
    for k in (0..terms.len()).rev() {
        suffix[k] = suffix[k + 1] + terms[k];
    }
    suffix
}

/// A provider of photon-number statistics for a given mean.
pub trait PhotonSource: Send + Sync {
    fn distribution(&self, mu: f64, tail_tol: f64) -> Result<PhotonNumberDistribution>;
}

/// Attenuated laser: Poisson statistics.
#[derive(Debug, Clone, Copy, Default)]
pub struct PoissonSource {
    /// Overrides the tolerance-driven truncation bound.
    pub n_max: Option<usize>,
}

impl PhotonSource for PoissonSource {
    fn distribution(&self, mu: f64, tail_tol: f64) -> Result<PhotonNumberDistribution> {
        match self.n_max {
            Some(n) => poisson_with_bound(mu, n),
            None => truncated_distribution(mu, tail_tol),
        }
    }
}

/// Attenuated laser reduced to the zero/one/multi-photon lumps.
#[derive(Debug, Clone, Copy, Default)]
pub struct LumpedPoissonSource;

impl PhotonSource for LumpedPoissonSource {
    fn distribution(&self, mu: f64, _tail_tol: f64) -> Result<PhotonNumberDistribution> {
        lumped_distribution(mu)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;

    #[test]
    fn poisson_point_values() {
        assert_eq!(poisson_pn(0.0, 0).unwrap(), 1.0);
        assert_eq!(poisson_pn(0.0, 3).unwrap(), 0.0);
        assert_relative_eq!(poisson_pn(0.5, 0).unwrap(), 0.606_530_659_712_633_4, max_relative = 1e-14);
        assert_relative_eq!(poisson_pn(0.5, 2).unwrap(), 0.075_816_332_464_079_18, max_relative = 1e-14);
        assert!((poisson_pn(0.5, 2).unwrap() - 0.0758).abs() < 5e-4);
        assert!(poisson_pn(-0.1, 0).is_err());
    }

    #[test]
    fn log_space_branch_agrees() {
        // n = 120 takes the log-space path; recurrence from n = 100 cross-checks it.
        let mu = 100.0;
        let p100 = poisson_pn(mu, 100).unwrap();
        let mut expected = p100;
        for k in 101..=120 {
            expected *= mu / k as f64;
        }
        assert_relative_eq!(poisson_pn(mu, 120).unwrap(), expected, max_relative = 1e-11);
        assert!(poisson_pn(1e4, 10_000).unwrap().is_finite());
    }

    #[test]
    fn lumped_values() {
        let (p0, p1, p2) = lumped_three_branch(0.5).unwrap();
        assert_relative_eq!(p2, 0.090_204_010_431_049_86, max_relative = 1e-12);
        assert!((p0 + p1 + p2 - 1.0).abs() <= f64::EPSILON);

        assert_eq!(lumped_three_branch(0.0).unwrap(), (1.0, 0.0, 0.0));

        let (p0, p1, p2) = lumped_three_branch(0.1).unwrap();
        assert_relative_eq!(p0, 0.904_837_418_035_959_6, max_relative = 1e-14);
        assert_relative_eq!(p1, 0.090_483_741_803_595_96, max_relative = 1e-14);
        assert_relative_eq!(p2, 0.004_678_840_160_444_47, max_relative = 1e-10);
    }

    #[test]
    fn truncation_bound() {
        let d = truncated_distribution(0.0, 1e-6).unwrap();
        assert_eq!(d.probs(), &[1.0]);
        assert_eq!(d.tail_mass(), 0.0);

        let d = truncated_distribution(0.5, 1e-12).unwrap();
        // smallest bound with remainder below 1e-12 (remainder 3.2147e-13)
        assert_eq!(d.n_max(), 11);
        assert!(d.n_max() <= 14);
        assert_relative_eq!(d.tail_mass(), 3.214_697_303_345_184e-13, max_relative = 1e-6);
        let total: f64 = d.probs().iter().sum::<f64>() + d.tail_mass();
        assert!((total - 1.0).abs() < 1e-12);

        assert!(truncated_distribution(0.5, 0.0).is_err());
        assert!(truncated_distribution(0.5, 1.0).is_err());
    }

    #[test]
    fn fixed_bound() {
        let d = poisson_with_bound(0.5, 2).unwrap();
        let (_, _, p2plus) = lumped_three_branch(0.5).unwrap();
        assert_eq!(d.n_max(), 2);
        assert_relative_eq!(d.probs()[2] + d.tail_mass(), p2plus, max_relative = 1e-12);

        let d = poisson_with_bound(0.0, 3).unwrap();
        assert_eq!(d.probs(), &[1.0, 0.0, 0.0, 0.0]);
    }

    #[test]
    fn from_parts_rejects_bad_input() {
        assert!(PhotonNumberDistribution::from_parts(vec![0.5, 0.5], 0.0, 0.5).is_ok());
        assert!(PhotonNumberDistribution::from_parts(vec![0.5, 0.4], 0.0, 0.5).is_err());
        assert!(PhotonNumberDistribution::from_parts(vec![1.1, -0.1], 0.0, 0.5).is_err());
        assert!(PhotonNumberDistribution::from_parts(vec![], 1.0, 0.5).is_err());
    }

    #[test]
    fn normalization_and_mean_over_grid() {
        for &mu in &[0.01, 0.1, 0.5, 1.0, 5.0] {
            let d = truncated_distribution(mu, 1e-12).unwrap();
            let total: f64 = d.probs().iter().sum::<f64>() + d.tail_mass();
            assert!((total - 1.0).abs() < 1e-12, "mu = {mu}: {total}");
            let mean = d.truncated_mean();
            assert!(mean <= mu + 1e-15);
            if mu <= 1.0 {
                assert!((mean - mu).abs() < 1e-9, "mu = {mu}: mean {mean}");
            }
        }
    }

    #[test]
    fn lumped_matches_truncated_aggregate() {
        for &mu in &[0.01, 0.1, 0.5, 1.0, 5.0] {
            let (_, _, p2plus) = lumped_three_branch(mu).unwrap();
            let d = truncated_distribution(mu, 1e-12).unwrap();
            let multi: f64 = d.probs().iter().skip(2).sum::<f64>() + d.tail_mass();
            assert!((p2plus - multi).abs() < 1e-12, "mu = {mu}");
        }
    }

    #[test]
    fn unimodal_with_mode_at_floor_mu() {
        for &mu in &[0.3f64, 1.5, 4.2, 9.7, 25.0] {
            let mode = mu.floor() as u64;
            let p: Vec<f64> = (0..80).map(|n| poisson_pn(mu, n).unwrap()).collect();
            for n in 0..mode as usize {
                assert!(p[n] <= p[n + 1], "mu = {mu}, n = {n}");
            }
            for n in mode as usize..79 {
                assert!(p[n] >= p[n + 1], "mu = {mu}, n = {n}");
            }
        }
    }
}
