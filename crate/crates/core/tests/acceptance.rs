//! Exit criteria of the model. Each test prints one `criterion N` line;
//! run with `-- --nocapture --test-threads=1` to see them in order.

mod common;

use std::time::Instant;

use proptest::strategy::{Strategy, ValueTree};
use proptest::test_runner::TestRunner;
use qkd_budget::cli::{run_compare, run_sweep, sweep_rows, SweepScale, SweepSpec, SweepVariable};
use qkd_budget::detection::{outcome_distribution, DetectorId};
use qkd_budget::metrics::{bit_error_probability, evaluate};
use qkd_budget::montecarlo::{simulate, simulate_with_workers};
use qkd_budget::photon::{lumped_three_branch, poisson_pn};
use qkd_budget::system::{PhotonMode, ProtocolConfig};
use qkd_budget::transmission::correct_basis_probability;
use qkd_budget::tree::{build_tree, classified_leaf_count, subgroup_sums, Subgroup};

fn verdict(n: u32, pass: bool, detail: String) {
    println!("criterion {n} [{}]: {detail}", if pass { "PASS" } else { "FAIL" });
    assert!(pass, "criterion {n} failed: {detail}");
}

#[test]
fn criterion_1_photon_number_values() {
    let (_, _, p2plus) = lumped_three_branch(0.5).unwrap();
    let p2 = poisson_pn(0.5, 2).unwrap();
    let pass = (p2plus - 0.0902).abs() <= 0.0005 && (p2 - 0.0758).abs() <= 0.0005;
    verdict(1, pass, format!("p2plus(0.5) = {p2plus:.6}, p2(0.5) = {p2:.6}"));
}

#[test]
fn criterion_2_uniform_sifting_ratio() {
    let p_cb = correct_basis_probability(&ProtocolConfig::default());
    verdict(2, p_cb == 0.5, format!("p_cb = {p_cb}"));
}

#[test]
fn criterion_3_eighteen_events() {
    let mut cfg = common::fixture();
    cfg.engine.mode = PhotonMode::Lumped;
    let tree = build_tree(&cfg).unwrap();
    let count = |g: Subgroup| tree.leaves().iter().filter(|l| l.subgroup == g).count();
    let split = [
        count(Subgroup::ErrDark),
        count(Subgroup::BitDark),
        count(Subgroup::ErrReal),
        count(Subgroup::BitReal),
    ];
    let total = classified_leaf_count(&tree);
    verdict(
        3,
        total == 18 && split == [6, 6, 3, 3],
        format!("{total} classified leaves, err-dark/bit-dark/err-real/bit-real = {split:?}"),
    );
}

#[test]
fn criterion_4_analytic_matches_monte_carlo() {
    const PULSES: u64 = 10_000_000;
    let benchmarks = [(0.0, 0.5), (10.0, 0.1), (25.0, 0.5), (50.0, 0.1), (50.0, 0.5)];
    let started = Instant::now();
    let mut failures = Vec::new();
    for (i, &(length, mu)) in benchmarks.iter().enumerate() {
        let mut cfg = common::fixture();
        cfg.path.channel_length_km = length;
        cfg.source.mu_override = Some(mu);
        let seed = 4000 + i as u64;
        let mut c = run_compare(&cfg, PULSES, seed).unwrap().comparison.unwrap();
        if !c.pass {
            println!("  {length} km, mu {mu}: seed {seed} outside 3 se, retrying once with seed {}", seed + 1000);
            c = run_compare(&cfg, PULSES, seed + 1000).unwrap().comparison.unwrap();
        }
        println!(
            "  {length:>4} km, mu {mu}: p_sigma {:.6e} vs {:.6e} (se {:.2e}), qber {:.5} vs {:.5} (se {:.2e}) {}",
            c.p_sigma_analytic,
            c.p_sigma_simulated,
            c.p_sigma_se,
            c.qber_analytic.unwrap_or(f64::NAN),
            c.qber_simulated.unwrap_or(f64::NAN),
            c.qber_se.unwrap_or(f64::NAN),
            if c.pass { "ok" } else { "MISMATCH" }
        );
        if !c.pass {
            failures.push((length, mu));
        }
    }
    let elapsed = started.elapsed().as_secs_f64();
    verdict(
        4,
        failures.is_empty() && elapsed < 60.0,
        format!("{} of 5 configs within 3 se at 1e7 pulses, {elapsed:.1} s", 5 - failures.len()),
    );
}

#[test]
fn criterion_5_normalization() {
    let started = Instant::now();
    let mut runner = TestRunner::deterministic();
    let strategy = common::config();
    let mut worst_tree = 0f64;
    let mut worst_outcome = 0f64;
    for _ in 0..150 {
        let cfg = strategy.new_tree(&mut runner).unwrap().current();
        let tree = build_tree(&cfg).unwrap();
        worst_tree = worst_tree.max((tree.total_probability() - 1.0).abs());
        for m in 0..=10 {
            for signal in DetectorId::BOTH {
                let d = outcome_distribution(m, signal, cfg.protocol.optical_error_prob, &cfg.detector1, &cfg.detector2)
                    .unwrap();
                worst_outcome = worst_outcome.max((d.total() - 1.0).abs());
            }
        }
    }
    let elapsed = started.elapsed().as_secs_f64();
    verdict(
        5,
        worst_tree < 1e-9 && worst_outcome < 1e-12 && elapsed < 10.0,
        format!("150 configs: max tree deviation {worst_tree:.2e}, max outcome deviation {worst_outcome:.2e}, {elapsed:.2} s"),
    );
}

#[test]
fn criterion_6_limits() {
    let mut ideal = common::fixture();
    ideal.protocol.optical_error_prob = 0.0;
    let err_real = subgroup_sums(&build_tree(&ideal).unwrap()).err_real;

    let mut dark_free = common::fixture();
    dark_free.detector1.dark_carriers = 0.0;
    dark_free.detector2.dark_carriers = 0.0;
    let s = subgroup_sums(&build_tree(&dark_free).unwrap());

    let mut blind = common::fixture();
    blind.detector1.efficiency = 0.0;
    blind.detector2.efficiency = 0.0;
    let qber = bit_error_probability(&subgroup_sums(&build_tree(&blind).unwrap())).unwrap();

    verdict(
        6,
        err_real == 0.0 && s.err_dark == 0.0 && s.bit_dark == 0.0 && (qber - 0.5).abs() < 1e-9,
        format!(
            "e_det=0: err_real {err_real:e}; N_d=0: err_dark {:e}, bit_dark {:e}; eta=0: qber {qber}",
            s.err_dark, s.bit_dark
        ),
    );
}

#[test]
fn criterion_7_order_of_magnitude_rate() {
    let m = evaluate(&common::fixture()).unwrap();
    let quoted = 500.0;
    let factor = m.sifted_rate / quoted;
    verdict(
        7,
        (0.1..=10.0).contains(&factor),
        format!(
            "sifted rate {:.1} bit/s is {factor:.1}x the quoted {quoted} bit/s (private {:.1} bit/s)",
            m.sifted_rate, m.private_rate
        ),
    );
}

#[test]
fn criterion_8_length_monotonicity() {
    let spec = SweepSpec::new(SweepVariable::ChannelLengthKm, 0.0, 100.0, 101, SweepScale::Linear).unwrap();
    let rows = sweep_rows(&common::fixture(), &spec);
    let metrics: Vec<_> = rows.iter().map(|r| r.outcome.clone().unwrap()).collect();
    let rate_ok = metrics.windows(2).all(|w| w[1].private_rate <= w[0].private_rate);
    let qber_ok = metrics.windows(2).all(|w| w[1].p_err >= w[0].p_err);
    let (first, last) = (&metrics[0], &metrics[metrics.len() - 1]);
    verdict(
        8,
        rate_ok && qber_ok,
        format!(
            "101 points: private rate {:.1} -> {:.1} bit/s, qber {:.4} -> {:.4}",
            first.private_rate, last.private_rate, first.p_err, last.p_err
        ),
    );
}

#[test]
fn criterion_9_determinism() {
    let cfg = common::fixture();
    let a = simulate(&cfg, 2_000_000, 314).unwrap();
    let b = simulate(&cfg, 2_000_000, 314).unwrap();
    let one = simulate_with_workers(&cfg, 2_000_000, 314, 1).unwrap();
    let many = simulate_with_workers(&cfg, 2_000_000, 314, 8).unwrap();
    let sim_ok = a == b && a == one && a == many;

    let spec = SweepSpec::new(SweepVariable::ChannelLengthKm, 0.0, 100.0, 41, SweepScale::Linear).unwrap();
    let csv_a = run_sweep(&cfg, &spec).unwrap();
    let csv_b = run_sweep(&cfg, &spec).unwrap();
    let csv_ok = csv_a.as_bytes() == csv_b.as_bytes();

    verdict(
        9,
        sim_ok && csv_ok,
        format!("simulation identical across runs and 1/8 workers: {sim_ok}; sweep CSV byte-identical: {csv_ok}"),
    );
}
