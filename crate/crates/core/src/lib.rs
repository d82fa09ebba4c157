// Copyright 2026 The monotonic-control Authors
// SPDX-License-Identifier: Apache-2.0

//! Monotonically convergent quantum optimal control that optimizes the control
//! duration together with the field fluence.
//!
//! The crate is organized bottom-up:
//!
//! - [`linalg`]: dense complex matrices, Kronecker embeddings, Hermitian
//!   exponentials.
//! - [`spin`]: Ising spin-chain Hamiltonians with local controls and
//!   `C^{n-1}NOT` targets.
//! - [`dynamics`]: propagation in rescaled time, fluence, cost and fidelity.
//! - [`optimizer`]: the alternating field/duration iteration.
//! - [`experiments`]: configuration files, sweeps and CSV/JSON export.

pub mod dynamics;
pub mod error;
pub mod experiments;
pub mod linalg;
pub mod optimizer;
pub mod spin;

pub use dynamics::{
    evaluate_cost, fidelity_p, fluence, gate_overlap, propagate_adjoint_backward,
    propagate_forward, propagate_unitary, ControlSet, Objective, PenaltyMode, PenaltySchedule,
    Trajectory,
};
pub use error::{Error, Result};
pub use linalg::{ComplexMatrix, StateVector, C64};
pub use optimizer::{
    field_update_sweep, run, time_gradient, time_update_gradient, time_update_systematic,
    FieldUpdateRule, IterationRecord, OptimizationConfig, Optimizer, RunHistory, SeedField,
    TargetSpec, Termination, TimeUpdate,
};
pub use spin::{build_cnnot, build_controls, build_drift, GateTarget, SpinChainModel};
