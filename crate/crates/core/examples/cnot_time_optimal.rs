// Copyright 2026 The monotonic-control Authors
// SPDX-License-Identifier: Apache-2.0

//! Joint field and duration optimization of a CNOT on two coupled spins.
//!
//! ```text
//! cargo run --release --example cnot_time_optimal -- [iterations] [constant seed amplitude]
//! ```

use monotonic_control::{run, OptimizationConfig, Result, SeedField};

pub fn run_example(iterations: usize, seed: Option<f64>) -> Result<()> {
    let config = OptimizationConfig {
        max_iter: iterations,
        seed_field: seed.map_or(SeedField::Zero, SeedField::Constant),
        ..Default::default()
    };
    let history = run(&config)?;
    let every = (iterations / 10).max(1);
    println!(
        "{:>6} {:>12} {:>9} {:>9} {:>10}",
        "k", "J", "T", "P", "fluence"
    );
    for r in history
        .records
        .iter()
        .filter(|r| r.k % every == 0 || r.k == 1)
    {
        println!(
            "{:>6} {:>12.8} {:>9.5} {:>9.6} {:>10.6}",
            r.k, r.cost, r.duration, r.fidelity, r.fluence
        );
    }
    println!(
        "final T = {:.5}, P = {:.6}, largest drop in J = {:.2e}",
        history.final_duration,
        history.final_fidelity,
        history.worst_decrease().max(0.0)
    );
    Ok(())
}

#[allow(dead_code)]
fn main() -> Result<()> {
    let mut args = std::env::args().skip(1);
    let iterations = args
        .next()
        .map_or(5000, |s| s.parse().expect("iteration count"));
    let seed = args.next().map(|s| s.parse().expect("seed amplitude"));
    run_example(iterations, seed)
}
