//! Builds the lumped event tree for the shipped fixture and prints every
//! leaf, then the four subgroup sums.
//!
//! ```text
//! cargo run --example event_tree
//! ```

use qkd_budget::cli::parse_config;
use qkd_budget::system::PhotonMode;
use qkd_budget::tree::{build_tree, classified_leaf_count, subgroup_sums};

fn main() -> qkd_budget::Result<()> {
    let mut config = parse_config(include_str!("../fixtures/clavis2_like.json"))?;
    config.engine.mode = PhotonMode::Lumped;
    let tree = build_tree(&config)?;

    print!("{}", tree.dump());
    println!();
    println!("classified leaves: {}", classified_leaf_count(&tree));
    println!("{}", serde_json::to_string_pretty(&subgroup_sums(&tree)).unwrap());
    Ok(())
}
