// Copyright 2026 The monotonic-control Authors
// SPDX-License-Identifier: Apache-2.0

//! Transfer `|00⟩` to `|11⟩` while the duration adapts.

use monotonic_control::{run, OptimizationConfig, Result, TargetSpec, C64};

pub fn run_example(iterations: usize) -> Result<()> {
    let basis = |i: usize| {
        (0..4)
            .map(|j| C64::new(if i == j { 1.0 } else { 0.0 }, 0.0))
            .collect()
    };
    let config = OptimizationConfig {
        target: TargetSpec::StateTransfer {
            initial: basis(0),
            target: basis(3),
        },
        t0: 1.0,
        grid: 400,
        max_iter: iterations,
        ..Default::default()
    };
    let history = run(&config)?;
    println!(
        "Re<11|psi(T)> = {:.6} at T = {:.5} after {} iterations",
        history.final_fidelity,
        history.final_duration,
        history.records.len()
    );
    Ok(())
}

#[allow(dead_code)]
fn main() -> Result<()> {
    let iterations = std::env::args()
        .nth(1)
        .map_or(300, |s| s.parse().expect("iteration count"));
    run_example(iterations)
}
