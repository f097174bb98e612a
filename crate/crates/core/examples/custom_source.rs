//! Plugs a non-Poisson source into the event tree: a heralded source that
//! emits exactly one photon with probability `mu` and nothing otherwise.
//! Multi-photon pulses vanish, so only the single-photon branch survives.

use qkd_budget::cli::parse_config;
use qkd_budget::metrics::metrics_from_tree;
use qkd_budget::photon::{PhotonNumberDistribution, PhotonSource, PoissonSource};
use qkd_budget::tree::{build_tree_with, TreeLayout};

struct HeraldedSinglePhoton;

impl PhotonSource for HeraldedSinglePhoton {
    fn distribution(&self, mu: f64, _tail_tol: f64) -> qkd_budget::Result<PhotonNumberDistribution> {
        let p1 = mu.min(1.0);
        PhotonNumberDistribution::from_parts(vec![1.0 - p1, p1], 0.0, mu)
    }
}

fn main() -> qkd_budget::Result<()> {
    let config = parse_config(include_str!("../fixtures/clavis2_like.json"))?;
    let sources: [(&str, &dyn PhotonSource); 2] = [
        ("poisson", &PoissonSource::default()),
        ("heralded", &HeraldedSinglePhoton),
    ];
    for (name, source) in sources {
        let tree = build_tree_with(&config, source, TreeLayout::Exact)?;
        let m = metrics_from_tree(&config, &tree)?;
        println!(
            "{name:>9}: {:>3} leaves, p_sigma {:.4e}, qber {:.4}, private {:.1} bit/s",
            tree.leaves().len(),
            m.p_sigma,
            m.p_err,
            m.private_rate
        );
    }
    Ok(())
}
