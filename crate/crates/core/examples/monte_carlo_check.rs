//! Pulse-by-pulse simulation of the fixture, compared against the
//! analytic engine.
//!
//! Pass a pulse count as the first argument (default 10^6).

use qkd_budget::cli::{parse_config, run_compare};

fn main() -> qkd_budget::Result<()> {
    let pulses = std::env::args()
        .nth(1)
        .map(|s| s.parse().expect("pulse count must be an integer"))
        .unwrap_or(1_000_000);
    let config = parse_config(include_str!("../fixtures/clavis2_like.json"))?;
    let report = run_compare(&config, pulses, 7)?;
    let sim = report.simulation.as_ref().unwrap();
    let cmp = report.comparison.as_ref().unwrap();

    println!("{pulses} pulses, {} sifted, {} errors", sim.sifted_bits, sim.error_bits);
    println!("counts: {:?}", sim.counts);
    println!("discards: {:?}", sim.discards);
    let z = (cmp.p_sigma_simulated - cmp.p_sigma_analytic) / cmp.p_sigma_se;
    println!(
        "p_sigma: analytic {:.6e}, simulated {:.6e} +/- {:.1e} ({z:+.2} se)",
        cmp.p_sigma_analytic, cmp.p_sigma_simulated, cmp.p_sigma_se
    );
    if let (Some(a), Some(s), Some(se)) = (cmp.qber_analytic, cmp.qber_simulated, cmp.qber_se) {
        println!("qber:    analytic {a:.5}, simulated {s:.5} +/- {se:.1e} ({:+.2} se)", (s - a) / se);
    }
    println!("threshold {} se -> {}", cmp.sigmas, if cmp.pass { "agree" } else { "DISAGREE" });
    Ok(())
}
