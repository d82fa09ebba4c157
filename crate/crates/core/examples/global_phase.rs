// Copyright 2026 The monotonic-control Authors
// SPDX-License-Identifier: Apache-2.0

//! The fidelity `Re Tr[C† U] / 4` is phase sensitive, and traceless
//! Hamiltonians only reach `det U = 1`. Since `det CNOT = -1`, the best
//! reachable value is `cos(π/4)`; the unit-determinant representative
//! `e^{iπ/4} CNOT` can be reached exactly.

use monotonic_control::{
    build_cnnot, GateTarget, Objective, OptimizationConfig, Optimizer, Result, SeedField,
    TimeUpdate, C64,
};

pub fn run_example(iterations: usize, grid: usize) -> Result<()> {
    let cnot = build_cnnot(2)?;
    let lifted = GateTarget::new(
        cnot.matrix()
            .scale(C64::from_polar(1.0, std::f64::consts::FRAC_PI_4)),
        "e^{i pi/4} CNOT",
    )?;
    for target in [cnot, lifted] {
        let config = OptimizationConfig {
            t0: 2.0,
            grid,
            max_iter: iterations,
            time_update: TimeUpdate::Frozen,
            seed_field: SeedField::Constant(1e-3),
            ..Default::default()
        };
        let model = config.build_model()?;
        let fields = config.seed_fields(model.channel_count())?;
        let label = target.label().to_string();
        let bound = target.special_unitary_bound();
        let history = Optimizer::with_parts(config, model, Objective::Gate(target), fields)?.run();
        println!(
            "{label:>16}: P = {:.6} after {iterations} iterations (reachable maximum {bound:.6})",
            history.final_fidelity
        );
    }
    Ok(())
}

#[allow(dead_code)]
fn main() -> Result<()> {
    let mut args = std::env::args().skip(1);
    let iterations = args
        .next()
        .map_or(800, |s| s.parse().expect("iteration count"));
    let grid = args.next().map_or(2000, |s| s.parse().expect("grid size"));
    run_example(iterations, grid)
}
