//! Headline metrics for the shipped fixture under each key-distillation
//! model.

use qkd_budget::cli::parse_config;
use qkd_budget::evaluate;
use qkd_budget::metrics::EpsilonStrategy;

fn main() -> qkd_budget::Result<()> {
    let mut config = parse_config(include_str!("../fixtures/clavis2_like.json"))?;
    let strategies = [
        EpsilonStrategy::IdealShannon,
        EpsilonStrategy::LinearEfficiency { f_ec: 1.2 },
        EpsilonStrategy::Table {
            points: vec![(0.0, 0.9), (0.05, 0.5), (0.11, 0.0)],
        },
    ];
    for strategy in strategies {
        config.engine.epsilon = strategy.clone();
        let m = evaluate(&config)?;
        println!("{strategy:?}");
        println!("  p_sigma  = {:.6e}", m.p_sigma);
        println!("  qber     = {:.4}%", 100.0 * m.p_err);
        println!("  epsilon  = {:.4}", m.epsilon);
        println!("  sifted   = {:.1} bit/s", m.sifted_rate);
        println!("  private  = {:.1} bit/s", m.private_rate);
    }
    Ok(())
}
