#![allow(dead_code)]

use proptest::prelude::*;
use qkd_budget::cli::parse_config;
use qkd_budget::system::{Detector, EngineConfig, LaserSource, OpticalPath, ProtocolConfig, SystemConfig};

pub const FIXTURE: &str = concat!(env!("CARGO_MANIFEST_DIR"), "/fixtures/clavis2_like.json");

pub fn fixture() -> SystemConfig {
    parse_config(&std::fs::read_to_string(FIXTURE).unwrap()).unwrap()
}

pub fn detector() -> impl Strategy<Value = Detector> {
    (0.0f64..=1.0, 0.0f64..1e-2, 0.0f64..=1.0).prop_map(|(efficiency, dark_carriers, avalanche_prob)| Detector {
        efficiency,
        dark_carriers,
        avalanche_prob,
    })
}

fn simplex<const N: usize>() -> impl Strategy<Value = [f64; N]> {
    prop::array::uniform(0.05f64..1.0).prop_map(|raw: [f64; N]| {
        let s: f64 = raw.iter().sum();
        let mut out = raw.map(|x| x / s);
        // force an exact sum of 1
        let rest: f64 = out[..N - 1].iter().sum();
        out[N - 1] = 1.0 - rest;
        out
    })
}

/// Randomized valid link configurations.
pub fn config() -> impl Strategy<Value = SystemConfig> {
    (
        (0.01f64..3.0, 0.0f64..0.5, 0.0f64..150.0, 0.0f64..3.0),
        detector(),
        detector(),
        (simplex::<4>(), simplex::<2>(), 0.0f64..=0.5, prop::option::of(0.05f64..=1.0)),
    )
        .prop_map(|((mu, atten, length, extra), detector1, detector2, (a, b, e_det, sift))| SystemConfig {
            source: LaserSource {
                pulse_energy: 1e-17,
                wavelength: 1550e-9,
                pulse_rate: 1e7,
                mu_override: Some(mu),
            },
            path: OpticalPath {
                channel_atten_db_per_km: atten,
                channel_length_km: length,
                extra_loss_db: extra,
                voa_alice_db: 0.0,
                voa_bob_db: 0.0,
            },
            detector1,
            detector2,
            protocol: ProtocolConfig {
                alice_state_probs: a,
                bob_basis_probs: b,
                sifting_ratio_override: sift,
                optical_error_prob: e_det,
            },
            engine: EngineConfig::default(),
        })
}
