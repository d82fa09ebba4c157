// Copyright 2026 The monotonic-control Authors
// SPDX-License-Identifier: Apache-2.0

//! Adjoint `dJ/dT` against central finite differences.

use std::f64::consts::PI;

use monotonic_control::{
    build_cnnot, evaluate_cost, time_gradient, ControlSet, Objective, PenaltyMode, PenaltySchedule,
    Result, SpinChainModel,
};

pub fn run_example() -> Result<()> {
    let model = SpinChainModel::new(2, 1.0)?;
    let objective = Objective::Gate(build_cnnot(2)?);
    let schedule = PenaltySchedule::new(0.08, PenaltyMode::Direct, 1e-3, 500)?;
    let h = 1e-5;
    println!(
        "{:>6} {:>14} {:>14} {:>10}",
        "T", "adjoint", "difference", "rel err"
    );
    for duration in [0.5, 1.0, 1.5, 2.0, 2.5] {
        let fields = ControlSet::from_fn(4, 500, duration, |j, s| {
            (0.5 + 0.2 * j as f64) * (PI * s).sin()
        })?;
        let adjoint = time_gradient(&model, &fields, &schedule, &objective)?;
        let cost = |t: f64| {
            evaluate_cost(
                &model,
                &fields.clone().with_duration(t),
                &schedule,
                &objective,
            )
        };
        let fd = (cost(duration + h)? - cost(duration - h)?) / (2.0 * h);
        println!(
            "{duration:>6} {adjoint:>14.9} {fd:>14.9} {:>10.2e}",
            (adjoint - fd).abs() / fd.abs()
        );
    }
    Ok(())
}

#[allow(dead_code)]
fn main() -> Result<()> {
    run_example()
}
