// Copyright 2026 The monotonic-control Authors
// SPDX-License-Identifier: Apache-2.0

//! The standard monotonic algorithm: the duration stays at `T0`.

use monotonic_control::{run, OptimizationConfig, Result, SeedField, TimeUpdate};

pub fn run_example(duration: f64, iterations: usize, seed: f64) -> Result<()> {
    let config = OptimizationConfig {
        t0: duration,
        time_update: TimeUpdate::Frozen,
        max_iter: iterations,
        seed_field: SeedField::Constant(seed),
        ..Default::default()
    };
    let history = run(&config)?;
    for threshold in [0.5, 0.6, 0.7] {
        match history.first_reaching(threshold) {
            Some(k) => println!("P >= {threshold} after {k} iterations"),
            None => println!("P >= {threshold} not reached"),
        }
    }
    println!(
        "T = {duration}: final P = {:.6}, J = {:.6}",
        history.final_fidelity,
        history.final_cost()
    );
    Ok(())
}

#[allow(dead_code)]
fn main() -> Result<()> {
    let mut args = std::env::args().skip(1);
    let duration = args.next().map_or(2.0, |s| s.parse().expect("duration"));
    let iterations = args
        .next()
        .map_or(1000, |s| s.parse().expect("iteration count"));
    let seed = args
        .next()
        .map_or(1e-3, |s| s.parse().expect("seed amplitude"));
    run_example(duration, iterations, seed)
}
