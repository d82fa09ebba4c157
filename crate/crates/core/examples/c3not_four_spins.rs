// Copyright 2026 The monotonic-control Authors
// SPDX-License-Identifier: Apache-2.0

//! C3NOT on a four-spin chain from two initial durations.

use monotonic_control::{OptimizationConfig, Optimizer, Result};

pub fn run_example(initial_durations: &[f64], iterations: usize, grid: usize) -> Result<()> {
    for &t0 in initial_durations {
        let mut opt = Optimizer::new(OptimizationConfig {
            spins: 4,
            alpha0: 0.01,
            t0,
            grid,
            max_iter: iterations,
            ..Default::default()
        })?;
        println!("T0 = {t0}: P = {:.4}", opt.fidelity());
        let every = (iterations / 5).max(1);
        for _ in 0..iterations {
            let r = opt.iterate()?;
            if r.k % every == 0 {
                println!(
                    "  k = {:>5}  T = {:.5}  P = {:.5}  J = {:.6}",
                    r.k, r.duration, r.fidelity, r.cost
                );
            }
        }
    }
    Ok(())
}

#[allow(dead_code)]
fn main() -> Result<()> {
    let mut args = std::env::args().skip(1);
    let iterations = args
        .next()
        .map_or(1000, |s| s.parse().expect("iteration count"));
    let grid = args.next().map_or(400, |s| s.parse().expect("grid size"));
    run_example(&[0.5, 0.7], iterations, grid)
}
