// Copyright 2026 The monotonic-control Authors
// SPDX-License-Identifier: Apache-2.0

//! Sweep of the initial duration `T0`, written as JSON histories plus a summary table.
//!
//! ```text
//! cargo run --release --example duration_basins -- results/basins 5000
//! ```

use std::path::PathBuf;

use monotonic_control::experiments::{
    run_experiment, ExperimentSpec, OutputKind, Sweep, SweepParameter,
};
use monotonic_control::{OptimizationConfig, Result};

pub fn run_example(output_dir: PathBuf, iterations: usize, grid: usize) -> Result<()> {
    let mut spec = ExperimentSpec::new(
        "basins",
        OptimizationConfig {
            max_iter: iterations,
            grid,
            ..Default::default()
        },
    );
    spec.sweep = Some(Sweep {
        parameter: SweepParameter::T0,
        values: (3..=12).map(|i| i as f64 / 10.0).collect(),
    });
    spec.outputs = vec![OutputKind::History];
    spec.output_dir = output_dir;
    let report = run_experiment(
        &spec,
        std::thread::available_parallelism().map_or(1, usize::from),
    )?;
    println!("{:>5} {:>9} {:>9}", "T0", "T_f", "P");
    for run in &report.runs {
        let h = &run.history;
        println!(
            "{:>5} {:>9.5} {:>9.6}",
            run.value.unwrap_or(h.config.t0),
            h.final_duration,
            h.final_fidelity
        );
    }
    if let Some(path) = &report.summary {
        println!("summary: {}", path.display());
    }
    Ok(())
}

#[allow(dead_code)]
fn main() -> Result<()> {
    let mut args = std::env::args().skip(1);
    let dir = args
        .next()
        .map_or_else(|| PathBuf::from("results/basins"), PathBuf::from);
    let iterations = args
        .next()
        .map_or(5000, |s| s.parse().expect("iteration count"));
    run_example(dir, iterations, 2000)
}
