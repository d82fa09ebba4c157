// Copyright 2026 The monotonic-control Authors
// SPDX-License-Identifier: Apache-2.0

//! Final duration and fidelity as functions of the penalty weight `alpha0`.

use std::path::PathBuf;

use monotonic_control::experiments::{run_experiment, ExperimentSpec, Sweep, SweepParameter};
use monotonic_control::{OptimizationConfig, Result};

pub fn run_example(output_dir: PathBuf, iterations: usize, grid: usize) -> Result<()> {
    let mut spec = ExperimentSpec::new(
        "alpha_scan",
        OptimizationConfig {
            max_iter: iterations,
            grid,
            ..Default::default()
        },
    );
    spec.sweep = Some(Sweep {
        parameter: SweepParameter::Alpha0,
        values: vec![0.02, 0.04, 0.08, 0.16],
    });
    spec.output_dir = output_dir;
    let report = run_experiment(
        &spec,
        std::thread::available_parallelism().map_or(1, usize::from),
    )?;
    if let Some(path) = &report.summary {
        print!(
            "{}",
            std::fs::read_to_string(path).map_err(|e| monotonic_control::Error::Io {
                path: path.clone(),
                source: e,
            })?
        );
    }
    Ok(())
}

#[allow(dead_code)]
fn main() -> Result<()> {
    let mut args = std::env::args().skip(1);
    let dir = args
        .next()
        .map_or_else(|| PathBuf::from("results/alpha_scan"), PathBuf::from);
    let iterations = args
        .next()
        .map_or(5000, |s| s.parse().expect("iteration count"));
    run_example(dir, iterations, 2000)
}
