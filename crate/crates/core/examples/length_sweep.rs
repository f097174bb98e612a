//! Key rate against fiber length, written as CSV to stdout.

use qkd_budget::cli::{parse_config, run_sweep, SweepScale, SweepSpec, SweepVariable};

fn main() -> qkd_budget::Result<()> {
    let config = parse_config(include_str!("../fixtures/clavis2_like.json"))?;
    let spec = SweepSpec::new(SweepVariable::ChannelLengthKm, 0.0, 150.0, 16, SweepScale::Linear)?;
    print!("{}", run_sweep(&config, &spec)?);
    Ok(())
}
