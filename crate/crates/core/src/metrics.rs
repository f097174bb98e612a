//! Sifted-key effectiveness, bit-error probability and key rates.

use serde::{Deserialize, Serialize};

use crate::error::{ModelError, Result};
use crate::system::SystemConfig;
use crate::tree::{build_tree, subgroup_sums, EventTree, SubgroupSums};

/// Key-length shortening after error correction and privacy amplification.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case", deny_unknown_fields)]
pub enum EpsilonStrategy {
    /// `1 − 2·h₂(e)`: Shannon-limit correction plus privacy amplification.
    IdealShannon,
    /// `1 − f_ec·h₂(e) − h₂(e)` for a code working at `f_ec` times the limit.
    LinearEfficiency { f_ec: f64 },
    /// Piecewise-linear in the error rate, clamped at both ends.
    Table { points: Vec<(f64, f64)> },
}

impl Default for EpsilonStrategy {
    fn default() -> Self {
        EpsilonStrategy::LinearEfficiency { f_ec: 1.2 }
    }
}

impl EpsilonStrategy {
    pub fn validate(&self) -> Result<()> {
        match self {
            EpsilonStrategy::IdealShannon => Ok(()),
            EpsilonStrategy::LinearEfficiency { f_ec } => {
                if *f_ec >= 1.0 && f_ec.is_finite() {
                    Ok(())
                } else {
                    Err(ModelError::config("engine.epsilon.f_ec", format!("must be finite and >= 1, got {f_ec}")))
                }
            }
            EpsilonStrategy::Table { points } => {
                if points.is_empty() {
                    return Err(ModelError::config("engine.epsilon.points", "table needs at least one point"));
                }
                for (i, &(e, eps)) in points.iter().enumerate() {
                    if !(0.0..=1.0).contains(&eps) || !(0.0..=1.0).contains(&e) {
                        return Err(ModelError::config(
                            format!("engine.epsilon.points[{i}]"),
                            format!("error rate and coefficient must lie in [0, 1], got ({e}, {eps})"),
                        ));
                    }
                    if i > 0 && e <= points[i - 1].0 {
                        return Err(ModelError::config(
                            format!("engine.epsilon.points[{i}]"),
                            "error rates must be strictly increasing",
                        ));
                    }
                }
                Ok(())
            }
        }
    }
}

/// Binary entropy in bits.
pub fn binary_entropy(x: f64) -> f64 {
    if x <= 0.0 || x >= 1.0 {
        return 0.0;
    }
    -(x * x.log2() + (1.0 - x) * (1.0 - x).log2())
}

/// `ε(p_err)` under the chosen strategy. Analytic strategies yield 0 above
/// an error rate of one half.
pub fn epsilon(strategy: &EpsilonStrategy, p_err: f64) -> f64 {
    match strategy {
        EpsilonStrategy::IdealShannon => {
            if p_err > 0.5 {
                0.0
            } else {
                (1.0 - 2.0 * binary_entropy(p_err)).max(0.0)
            }
        }
        EpsilonStrategy::LinearEfficiency { f_ec } => {
            if p_err > 0.5 {
                0.0
            } else {
                let h = binary_entropy(p_err);
                (1.0 - f_ec * h - h).max(0.0)
            }
        }
        EpsilonStrategy::Table { points } => interpolate(points, p_err),
    }
}

fn interpolate(points: &[(f64, f64)], x: f64) -> f64 {
    let (first, last) = (points[0], points[points.len() - 1]);
    if x <= first.0 {
        return first.1;
    }
    if x >= last.0 {
        return last.1;
    }
    let i = points.partition_point(|p| p.0 <= x);
    let (x0, y0) = points[i - 1];
    let (x1, y1) = points[i];
    y0 + (y1 - y0) * (x - x0) / (x1 - x0)
}

/// Probability that one pulse yields a sifted-key bit.
pub fn sifted_key_effectiveness(sums: &SubgroupSums) -> f64 {
    sums.total()
}

/// Fraction of sifted bits in error.
pub fn bit_error_probability(sums: &SubgroupSums) -> Result<f64> {
    let total = sifted_key_effectiveness(sums);
    if total > 0.0 {
        Ok((sums.errors() / total).clamp(0.0, 1.0))
    } else {
        Err(ModelError::NoSiftedKey)
    }
}

/// Sifted bits per second.
pub fn sifted_key_rate(config: &SystemConfig, p_sigma: f64) -> f64 {
    config.source.pulse_rate * p_sigma
}

/// Private bits per second, `v·p_Σ·ε`.
pub fn private_key_rate(config: &SystemConfig, p_sigma: f64, eps: f64) -> f64 {
    config.source.pulse_rate * p_sigma * eps
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct KeyMetrics {
    pub p_sigma: f64,
    #[serde(flatten)]
    pub subgroups: SubgroupSums,
    #[serde(rename = "qber")]
    pub p_err: f64,
    pub epsilon: f64,
    #[serde(rename = "sifted_rate_bps")]
    pub sifted_rate: f64,
    #[serde(rename = "private_rate_bps")]
    pub private_rate: f64,
}

/// Metrics of an already-built tree.
pub fn metrics_from_tree(config: &SystemConfig, tree: &EventTree) -> Result<KeyMetrics> {
    let subgroups = subgroup_sums(tree);
    let p_sigma = sifted_key_effectiveness(&subgroups);
    let p_err = bit_error_probability(&subgroups)?;
    let eps = epsilon(&config.engine.epsilon, p_err);
    Ok(KeyMetrics {
        p_sigma,
        subgroups,
        p_err,
        epsilon: eps,
        sifted_rate: sifted_key_rate(config, p_sigma),
        private_rate: private_key_rate(config, p_sigma, eps),
    })
}

/// Builds the event tree and evaluates every headline quantity.
pub fn evaluate(config: &SystemConfig) -> Result<KeyMetrics> {
    let tree = build_tree(config)?;
    metrics_from_tree(config, &tree)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::system::tests::sample_config;
    use approx::assert_relative_eq;
    use proptest::prelude::*;

    fn sums(a: f64, b: f64, c: f64, d: f64) -> SubgroupSums {
        SubgroupSums {
            err_dark: a,
            bit_dark: b,
            err_real: c,
            bit_real: d,
        }
    }

    #[test]
    fn effectiveness_is_the_four_term_sum() {
        assert_eq!(sifted_key_effectiveness(&sums(0.0, 0.0, 0.0, 0.0)), 0.0);
        assert_eq!(sifted_key_effectiveness(&sums(0.25, 0.125, 0.5, 0.0625)), 0.9375);
        assert_eq!(sifted_key_effectiveness(&sums(0.0625, 0.5, 0.125, 0.25)), 0.9375);
    }

    #[test]
    fn error_fraction() {
        assert_eq!(bit_error_probability(&sums(0.0, 0.3, 0.0, 0.2)).unwrap(), 0.0);
        assert_eq!(bit_error_probability(&sums(0.1, 0.1, 0.0, 0.0)).unwrap(), 0.5);
        assert_eq!(bit_error_probability(&sums(0.0, 0.0, 0.0, 0.0)), Err(ModelError::NoSiftedKey));
    }

    #[test]
    fn entropy_fixed_points() {
        assert_eq!(binary_entropy(0.0), 0.0);
        assert_eq!(binary_entropy(1.0), 0.0);
        assert_eq!(binary_entropy(0.5), 1.0);
    }

    #[test]
    fn epsilon_examples() {
        assert_eq!(epsilon(&EpsilonStrategy::IdealShannon, 0.0), 1.0);
        let near_threshold = epsilon(&EpsilonStrategy::IdealShannon, 0.11);
        // 1 − 2·h₂(0.11) = 1.68083670944e-4 at 30 digits
        assert_relative_eq!(near_threshold, 1.680_836_709_440_087e-4, max_relative = 1e-9);
        assert!(near_threshold <= 2e-4);
        let table = EpsilonStrategy::Table {
            points: vec![(0.0, 1.0), (0.1, 0.4)],
        };
        assert_relative_eq!(epsilon(&table, 0.05), 0.7, max_relative = 1e-15);
        assert_eq!(epsilon(&table, -1.0), 1.0);
        assert_eq!(epsilon(&table, 0.3), 0.4);
        assert_eq!(epsilon(&EpsilonStrategy::IdealShannon, 0.6), 0.0);
        assert_eq!(epsilon(&EpsilonStrategy::default(), 0.51), 0.0);
        assert_eq!(epsilon(&EpsilonStrategy::default(), 0.0), 1.0);
    }

    #[test]
    fn strategy_validation() {
        assert!(EpsilonStrategy::LinearEfficiency { f_ec: 0.9 }.validate().is_err());
        assert!(EpsilonStrategy::Table { points: vec![] }.validate().is_err());
        assert!(EpsilonStrategy::Table {
            points: vec![(0.1, 0.5), (0.1, 0.4)]
        }
        .validate()
        .is_err());
        assert!(EpsilonStrategy::Table {
            points: vec![(0.0, 1.2)]
        }
        .validate()
        .is_err());
    }

    #[test]
    fn rate_arithmetic() {
        let mut cfg = sample_config();
        cfg.source.pulse_rate = 5e6;
        assert_relative_eq!(private_key_rate(&cfg, 1e-4, 0.5), 250.0, max_relative = 1e-15);
        assert_eq!(private_key_rate(&cfg, 1e-4, 0.0), 0.0);
        assert_relative_eq!(sifted_key_rate(&cfg, 1e-4), 500.0, max_relative = 1e-15);
    }

    #[test]
    fn serialized_field_names() {
        let m = evaluate(&sample_config()).unwrap();
        let v = serde_json::to_value(m).unwrap();
        let keys: Vec<&str> = v.as_object().unwrap().keys().map(String::as_str).collect();
        for k in [
            "p_sigma", "p_err_dark", "p_bit_dark", "p_err_real", "p_bit_real", "qber", "epsilon",
            "sifted_rate_bps", "private_rate_bps",
        ] {
            assert!(keys.contains(&k), "missing {k}");
        }
        assert_eq!(keys.len(), 9);
    }

    proptest! {
        #[test]
        fn entropy_symmetric(x in 0.0f64..=1.0) {
            prop_assert!((binary_entropy(x) - binary_entropy(1.0 - x)).abs() < 1e-12);
        }

        #[test]
        fn qber_scale_invariant(a in 0.0f64..1.0, b in 0.0f64..1.0, c in 0.0f64..1.0, d in 1e-6f64..1.0, k in 1e-6f64..1e3) {
            let base = bit_error_probability(&sums(a, b, c, d)).unwrap();
            let scaled = bit_error_probability(&sums(k * a, k * b, k * c, k * d)).unwrap();
            prop_assert!((base - scaled).abs() < 1e-12);
        }

        #[test]
        fn private_rate_nonincreasing_in_qber(e1 in 0.0f64..0.5, e2 in 0.0f64..0.5, p in 0.0f64..1.0) {
            let cfg = sample_config();
            let (lo, hi) = if e1 <= e2 { (e1, e2) } else { (e2, e1) };
            let r_lo = private_key_rate(&cfg, p, epsilon(&EpsilonStrategy::IdealShannon, lo));
            let r_hi = private_key_rate(&cfg, p, epsilon(&EpsilonStrategy::IdealShannon, hi));
            prop_assert!(r_hi <= r_lo);
        }
    }
}
