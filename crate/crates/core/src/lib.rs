//! Probabilistic model of key generation in a QKD link.
//!
//! A laser pulse is followed through photon generation, channel loss,
//! basis sifting and avalanche-photodiode detection. The event tree built
//! from these stages gives the sifted-key effectiveness, the bit-error
//! probability and the private-key rate; [`montecarlo`] simulates the same
//! chain pulse by pulse as an independent check.
//!
//! ```
//! use qkd_budget::cli::parse_config;
//! use qkd_budget::metrics::evaluate;
//!
//! let config = parse_config(r#"{
//!     "source": {"pulse_energy": 1e-17, "wavelength": 1.55e-6, "pulse_rate": 5e6, "mu_override": 0.5},
//!     "path": {"channel_atten_db_per_km": 0.2, "channel_length_km": 25},
//!     "detector1": {"efficiency": 0.1, "dark_carriers": 1e-5, "avalanche_prob": 1},
//!     "detector2": {"efficiency": 0.1, "dark_carriers": 1e-5, "avalanche_prob": 1}
//! }"#).unwrap();
//! let metrics = evaluate(&config).unwrap();
//! assert!(metrics.p_err > 0.0 && metrics.p_err < 0.05);
//! ```
//!
//! Each major capability has a runnable example under `examples/`:
//! `photon_statistics`, `link_budget`, `detector_outcomes`, `event_tree`,
//! `key_rate`, `monte_carlo_check`, `length_sweep` and `custom_source`.
//! Run one with `cargo run --example NAME`.

pub mod cli;
pub mod detection;
pub mod error;
pub mod metrics;
pub mod montecarlo;
pub mod photon;
pub mod system;
pub mod transmission;
pub mod tree;

pub use error::{ModelError, Result};
pub use metrics::{evaluate, KeyMetrics};
pub use system::SystemConfig;
pub use tree::{build_tree, EventTree};
