//! Photon-number statistics of an attenuated laser pulse.
//!
//! Prints the Poisson probabilities for a few mean photon numbers, the
//! truncation bound the exact engine picks for each, and the lumped
//! zero/one/multi-photon split.

use qkd_budget::photon::{lumped_three_branch, truncated_distribution};
use qkd_budget::system::DEFAULT_TAIL_TOL;

fn main() -> qkd_budget::Result<()> {
    for mu in [0.1, 0.5, 1.0] {
        let dist = truncated_distribution(mu, DEFAULT_TAIL_TOL)?;
        let (p0, p1, p2plus) = lumped_three_branch(mu)?;
        println!("mu = {mu}");
        println!("  lumped: p0 = {p0:.6}  p1 = {p1:.6}  p2+ = {p2plus:.6}");
        println!(
            "  exact: n_max = {}, tail mass = {:.3e}, truncated mean = {:.12}",
            dist.n_max(),
            dist.tail_mass(),
            dist.truncated_mean()
        );
        for (n, p) in dist.probs().iter().enumerate().take(5) {
            println!("    P({n}) = {p:.6e}");
        }
    }
    Ok(())
}
