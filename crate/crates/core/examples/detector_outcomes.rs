//! Outcome distribution of a two-APD receiver as a function of the number
//! of photons that reach it.

use qkd_budget::detection::{dark_count_probability, outcome_distribution, DetectorId};
use qkd_budget::system::Detector;

fn main() -> qkd_budget::Result<()> {
    let detector = Detector {
        efficiency: 0.1,
        dark_carriers: 1e-5,
        avalanche_prob: 1.0,
    };
    println!("dark-count probability per gate: {:.6e}", dark_count_probability(&detector));
    println!("{:>3} {:>12} {:>12} {:>12} {:>12} {:>12}", "m", "none", "sig real", "sig dark", "other", "double");
    for m in 0..=5 {
        let d = outcome_distribution(m, DetectorId::One, 0.01, &detector, &detector)?;
        let [sig, other] = [d.single[0], d.single[1]];
        println!(
            "{m:>3} {:>12.4e} {:>12.4e} {:>12.4e} {:>12.4e} {:>12.4e}",
            d.no_detection,
            sig[0],
            sig[1],
            other[0] + other[1],
            d.double
        );
    }
    Ok(())
}
