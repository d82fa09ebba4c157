// Copyright 2026 The monotonic-control Authors
// SPDX-License-Identifier: Apache-2.0

//! Propagation of the time-rescaled Schrödinger equation.
//!
//! Time is rescaled to `s = t/T ∈ [0, 1]`, so the duration `T` only multiplies
//! the generator: `i ∂_s ψ = T (H₀ + Σ_j E_j(s) H_j) ψ`. Fields are
//! piecewise constant on a uniform grid of `N` intervals and sampled at the
//! interval midpoints; each interval is propagated with the exact exponential
//! of its Hamiltonian, so forward and backward steps are exact adjoints.

use serde::{Deserialize, Serialize};
use std::f64::consts::PI;

use crate::error::{Error, Result};
use crate::linalg::{frobenius_inner, ComplexMatrix, HermitianSpectrum, Propagand, StateVector};
use crate::spin::{GateTarget, SpinChainModel};

/// Field samples `E_j(s_k)` at the midpoints `s_k = (k + ½)/N`, plus the duration `T`.
#[derive(Debug, Clone, PartialEq)]
pub struct ControlSet {
    channels: usize,
    grid: usize,
    // interval-major: samples[k * channels + j]
    samples: Vec<f64>,
    duration: f64,
}

impl ControlSet {
    pub fn zeros(channels: usize, grid: usize, duration: f64) -> Result<Self> {
        Self::from_interval_major(channels, grid, vec![0.0; channels * grid], duration)
    }

    /// Samples `f(channel, s)` at every midpoint.
    pub fn from_fn(
        channels: usize,
        grid: usize,
        duration: f64,
        mut f: impl FnMut(usize, f64) -> f64,
    ) -> Result<Self> {
        let mut samples = Vec::with_capacity(channels * grid);
        for k in 0..grid {
            let s = midpoint(k, grid);
            for j in 0..channels {
                samples.push(f(j, s));
            }
        }
        Self::from_interval_major(channels, grid, samples, duration)
    }

    /// One vector of `N` samples per channel.
    pub fn from_channels(channels: &[Vec<f64>], duration: f64) -> Result<Self> {
        let m = channels.len();
        let n = channels.first().map_or(0, Vec::len);
        if let Some(bad) = channels.iter().find(|c| c.len() != n) {
            return Err(Error::GridMismatch {
                fields: n,
                schedule: bad.len(),
            });
        }
        let mut samples = Vec::with_capacity(m * n);
        for k in 0..n {
            for ch in channels {
                samples.push(ch[k]);
            }
        }
        Self::from_interval_major(m, n, samples, duration)
    }

    fn from_interval_major(
        channels: usize,
        grid: usize,
        samples: Vec<f64>,
        duration: f64,
    ) -> Result<Self> {
        if channels == 0 || grid == 0 {
            return Err(Error::InvalidConfig(
                "fields need at least one channel and one interval".into(),
            ));
        }
        if !(duration.is_finite() && duration >= 0.0) {
            return Err(Error::InvalidConfig(format!(
                "duration must be finite and nonnegative, got {duration}"
            )));
        }
        let set = Self {
            channels,
            grid,
            samples,
            duration,
        };
        set.check_finite()?;
        Ok(set)
    }

    fn check_finite(&self) -> Result<()> {
        match self.samples.iter().position(|x| !x.is_finite()) {
            Some(i) => Err(Error::NonFiniteField {
                channel: i % self.channels,
                index: i / self.channels,
            }),
            None => Ok(()),
        }
    }

    pub fn channels(&self) -> usize {
        self.channels
    }

    pub fn grid(&self) -> usize {
        self.grid
    }

    pub fn duration(&self) -> f64 {
        self.duration
    }

    pub fn step(&self) -> f64 {
        1.0 / self.grid as f64
    }

    pub fn set_duration(&mut self, duration: f64) {
        self.duration = duration;
    }

    pub fn with_duration(mut self, duration: f64) -> Self {
        self.duration = duration;
        self
    }

    /// All channel amplitudes on interval `k`.
    pub fn amplitudes(&self, k: usize) -> &[f64] {
        &self.samples[k * self.channels..(k + 1) * self.channels]
    }

    pub(crate) fn amplitudes_mut(&mut self, k: usize) -> &mut [f64] {
        &mut self.samples[k * self.channels..(k + 1) * self.channels]
    }

    pub fn sample(&self, channel: usize, k: usize) -> f64 {
        self.samples[k * self.channels + channel]
    }

    pub fn channel(&self, channel: usize) -> Vec<f64> {
        (0..self.grid).map(|k| self.sample(channel, k)).collect()
    }

    pub fn midpoints(&self) -> impl Iterator<Item = f64> + '_ {
        (0..self.grid).map(|k| midpoint(k, self.grid))
    }

    /// Largest |E_j(s_k)| over all channels and intervals.
    pub fn max_amplitude(&self) -> f64 {
        self.samples.iter().map(|x| x.abs()).fold(0.0, f64::max)
    }
}

pub(crate) fn midpoint(k: usize, grid: usize) -> f64 {
    (k as f64 + 0.5) / grid as f64
}

/// Shape of the penalty weight α(s).
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum PenaltyMode {
    /// `α(s) = max(α₀ sin²(πs), floor·α₀)`.
    Direct,
    /// `α(s) = α₀ / max(sin²(πs), floor)`, which switches the update off at the edges.
    Shaped,
    /// `α(s) = α₀`.
    Constant,
}

impl std::str::FromStr for PenaltyMode {
    type Err = String;
    fn from_str(s: &str) -> std::result::Result<Self, String> {
        match s {
            "direct" => Ok(Self::Direct),
            "shaped" => Ok(Self::Shaped),
            "constant" => Ok(Self::Constant),
            other => Err(format!(
                "unknown penalty mode `{other}` (expected direct, shaped or constant)"
            )),
        }
    }
}

pub const DEFAULT_FLOOR_FRACTION: f64 = 1e-3;

/// Sampled penalty weights α(s_k) on the field grid.
#[derive(Debug, Clone, PartialEq)]
pub struct PenaltySchedule {
    alpha0: f64,
    mode: PenaltyMode,
    floor_fraction: f64,
    values: Vec<f64>,
}

impl PenaltySchedule {
    pub fn new(alpha0: f64, mode: PenaltyMode, floor_fraction: f64, grid: usize) -> Result<Self> {
        if !(alpha0.is_finite() && alpha0 > 0.0) {
            return Err(Error::InvalidConfig(format!(
                "alpha0 must be positive, got {alpha0}"
            )));
        }
        if !(floor_fraction.is_finite() && floor_fraction > 0.0) {
            return Err(Error::InvalidConfig(format!(
                "penalty floor fraction must be positive, got {floor_fraction}"
            )));
        }
        if grid == 0 {
            return Err(Error::InvalidConfig("penalty grid must be nonempty".into()));
        }
        let values = (0..grid)
            .map(|k| {
                let shape = (PI * midpoint(k, grid)).sin().powi(2);
                match mode {
                    PenaltyMode::Direct => (alpha0 * shape).max(floor_fraction * alpha0),
                    PenaltyMode::Shaped => alpha0 / shape.max(floor_fraction),
                    PenaltyMode::Constant => alpha0,
                }
            })
            .collect();
        Ok(Self {
            alpha0,
            mode,
            floor_fraction,
            values,
        })
    }

    pub fn constant(alpha0: f64, grid: usize) -> Result<Self> {
        Self::new(alpha0, PenaltyMode::Constant, DEFAULT_FLOOR_FRACTION, grid)
    }

    pub fn alpha0(&self) -> f64 {
        self.alpha0
    }

    pub fn mode(&self) -> PenaltyMode {
        self.mode
    }

    pub fn floor_fraction(&self) -> f64 {
        self.floor_fraction
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    pub fn grid(&self) -> usize {
        self.values.len()
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Direction {
    Forward,
    Backward,
}

/// Snapshots at the grid points `s = k/N`, `k = 0..=N`.
#[derive(Debug, Clone)]
pub struct Trajectory<Q> {
    direction: Direction,
    points: Vec<Q>,
}

impl<Q: Propagand> Trajectory<Q> {
    pub fn direction(&self) -> Direction {
        self.direction
    }

    pub fn is_operator(&self) -> bool {
        Q::IS_OPERATOR
    }

    pub fn points(&self) -> &[Q] {
        &self.points
    }

    pub fn at(&self, k: usize) -> &Q {
        &self.points[k]
    }

    pub fn first(&self) -> &Q {
        &self.points[0]
    }

    pub fn last(&self) -> &Q {
        self.points.last().expect("trajectory has N+1 points")
    }

    pub fn len(&self) -> usize {
        self.points.len()
    }

    pub fn is_empty(&self) -> bool {
        self.points.is_empty()
    }

    /// Largest unitarity (or norm) defect over all snapshots.
    pub fn max_physical_defect(&self) -> f64 {
        self.points
            .iter()
            .map(Q::physical_defect)
            .fold(0.0, f64::max)
    }
}

/// Eigendecompositions of the interval Hamiltonians `H(s_k)`.
///
/// These do not depend on `T`, so propagating at a new duration only changes
/// the phases.
#[derive(Debug, Clone)]
pub struct IntervalSpectra {
    spectra: Vec<HermitianSpectrum>,
}

impl IntervalSpectra {
    pub fn new(model: &SpinChainModel, fields: &ControlSet) -> Result<Self> {
        check_model_fields(model, fields)?;
        let spectra = (0..fields.grid())
            .map(|k| {
                HermitianSpectrum::of_hermitian(
                    model.hamiltonian(fields.amplitudes(k)).into_matrix(),
                )
            })
            .collect();
        Ok(Self { spectra })
    }

    pub(crate) fn from_vec(spectra: Vec<HermitianSpectrum>) -> Self {
        Self { spectra }
    }

    pub fn get(&self, k: usize) -> &HermitianSpectrum {
        &self.spectra[k]
    }

    pub fn grid(&self) -> usize {
        self.spectra.len()
    }

    fn check_dim<Q: Propagand>(&self, q: &Q) -> Result<()> {
        let dim = self.spectra[0].dim();
        if q.dim() != dim {
            return Err(Error::DimensionMismatch {
                expected: dim,
                found: q.dim(),
            });
        }
        Ok(())
    }

    pub fn forward<Q: Propagand>(&self, init: &Q, duration: f64) -> Result<Trajectory<Q>> {
        self.check_dim(init)?;
        let theta = duration / self.grid() as f64;
        let mut points = Vec::with_capacity(self.grid() + 1);
        points.push(init.clone());
        for spec in &self.spectra {
            let next = spec.propagate(theta, points.last().unwrap().block());
            points.push(Q::from_block(next));
        }
        Ok(Trajectory {
            direction: Direction::Forward,
            points,
        })
    }

    /// Final snapshot only.
    pub fn forward_final<Q: Propagand>(&self, init: &Q, duration: f64) -> Result<Q> {
        self.check_dim(init)?;
        let theta = duration / self.grid() as f64;
        let mut x = init.block().clone();
        for spec in &self.spectra {
            x = spec.propagate(theta, &x);
        }
        Ok(Q::from_block(x))
    }

    pub fn backward<Q: Propagand>(&self, final_cond: &Q, duration: f64) -> Result<Trajectory<Q>> {
        self.check_dim(final_cond)?;
        let theta = duration / self.grid() as f64;
        let n = self.grid();
        let mut points = vec![final_cond.clone(); n + 1];
        for k in (0..n).rev() {
            let prev = self.spectra[k].propagate(-theta, points[k + 1].block());
            points[k] = Q::from_block(prev);
        }
        Ok(Trajectory {
            direction: Direction::Backward,
            points,
        })
    }
}

fn check_model_fields(model: &SpinChainModel, fields: &ControlSet) -> Result<()> {
    if fields.channels() != model.channel_count() {
        return Err(Error::DimensionMismatch {
            expected: model.channel_count(),
            found: fields.channels(),
        });
    }
    fields.check_finite()
}

pub fn propagate_forward<Q: Propagand>(
    model: &SpinChainModel,
    fields: &ControlSet,
    init: &Q,
) -> Result<Trajectory<Q>> {
    if init.dim() != model.dim() {
        return Err(Error::DimensionMismatch {
            expected: model.dim(),
            found: init.dim(),
        });
    }
    IntervalSpectra::new(model, fields)?.forward(init, fields.duration())
}

/// Evolution operator trajectory starting from the identity.
pub fn propagate_unitary(
    model: &SpinChainModel,
    fields: &ControlSet,
) -> Result<Trajectory<ComplexMatrix>> {
    propagate_forward(model, fields, &ComplexMatrix::identity(model.dim()))
}

pub fn propagate_adjoint_backward<Q: Propagand>(
    model: &SpinChainModel,
    fields: &ControlSet,
    final_cond: &Q,
) -> Result<Trajectory<Q>> {
    if final_cond.dim() != model.dim() {
        return Err(Error::DimensionMismatch {
            expected: model.dim(),
            found: final_cond.dim(),
        });
    }
    IntervalSpectra::new(model, fields)?.backward(final_cond, fields.duration())
}

/// `T Δs Σ_k α(s_k) Σ_j E_j(s_k)²`.
pub fn fluence(fields: &ControlSet, schedule: &PenaltySchedule) -> Result<f64> {
    if fields.grid() != schedule.grid() {
        return Err(Error::GridMismatch {
            fields: fields.grid(),
            schedule: schedule.grid(),
        });
    }
    Ok(fields.duration() * fields.step() * weighted_square_sum(fields, schedule))
}

/// `Σ_k α(s_k) Σ_j E_j(s_k)²`, grids assumed equal.
pub(crate) fn weighted_square_sum(fields: &ControlSet, schedule: &PenaltySchedule) -> f64 {
    schedule
        .values()
        .iter()
        .enumerate()
        .map(|(k, &a)| a * fields.amplitudes(k).iter().map(|e| e * e).sum::<f64>())
        .sum()
}

fn check_gate_dim(final_u: &ComplexMatrix, target: &GateTarget) -> Result<()> {
    if final_u.dim() != target.dim() {
        return Err(Error::DimensionMismatch {
            expected: target.dim(),
            found: final_u.dim(),
        });
    }
    Ok(())
}

/// `2 Re Tr[target† U]`.
pub fn gate_overlap(final_u: &ComplexMatrix, target: &GateTarget) -> Result<f64> {
    check_gate_dim(final_u, target)?;
    Ok(2.0 * frobenius_inner(target.matrix().block(), final_u.block())?.re)
}

/// `Re Tr[target† U] / 2^n`.
pub fn fidelity_p(final_u: &ComplexMatrix, target: &GateTarget, spins: usize) -> Result<f64> {
    check_gate_dim(final_u, target)?;
    let dim = 1usize << spins;
    if dim != target.dim() {
        return Err(Error::DimensionMismatch {
            expected: target.dim(),
            found: dim,
        });
    }
    Ok(gate_overlap(final_u, target)? / (2.0 * dim as f64))
}

/// `2 Re ⟨target|final⟩` for states, `2 Re Tr[target† final]` for operators.
pub(crate) fn overlap_term<Q: Propagand>(target: &Q, final_q: &Q) -> f64 {
    2.0 * frobenius_inner(target.block(), final_q.block())
        .expect("shapes checked by caller")
        .re
}

/// Normalized projection `Re Tr[target† final] / width`.
pub(crate) fn projection<Q: Propagand>(target: &Q, final_q: &Q) -> f64 {
    overlap_term(target, final_q) / (2.0 * target.width() as f64)
}

/// What the control should achieve.
#[derive(Debug, Clone)]
pub enum Objective {
    /// Steer the evolution operator from the identity to a gate.
    Gate(GateTarget),
    /// Steer `initial` onto `target`.
    StateTransfer {
        initial: StateVector,
        target: StateVector,
    },
}

impl Objective {
    pub fn dim(&self) -> usize {
        match self {
            Objective::Gate(g) => g.dim(),
            Objective::StateTransfer { target, .. } => target.dim(),
        }
    }

    pub(crate) fn check(&self, model: &SpinChainModel) -> Result<()> {
        let found = match self {
            Objective::Gate(g) => g.dim(),
            Objective::StateTransfer { initial, target } => {
                if initial.dim() != target.dim() {
                    return Err(Error::DimensionMismatch {
                        expected: target.dim(),
                        found: initial.dim(),
                    });
                }
                target.dim()
            }
        };
        if found != model.dim() {
            return Err(Error::DimensionMismatch {
                expected: model.dim(),
                found,
            });
        }
        Ok(())
    }
}

/// Overlap term minus penalty-weighted fluence.
pub fn evaluate_cost(
    model: &SpinChainModel,
    fields: &ControlSet,
    schedule: &PenaltySchedule,
    objective: &Objective,
) -> Result<f64> {
    objective.check(model)?;
    let penalty = fluence(fields, schedule)?;
    let spectra = IntervalSpectra::new(model, fields)?;
    let overlap = match objective {
        Objective::Gate(g) => {
            let u =
                spectra.forward_final(&ComplexMatrix::identity(model.dim()), fields.duration())?;
            gate_overlap(&u, g)?
        }
        Objective::StateTransfer { initial, target } => {
            let psi = spectra.forward_final(initial, fields.duration())?;
            overlap_term(target, &psi)
        }
    };
    Ok(overlap - penalty)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::linalg::{pauli, unitary_step, C64};
    use crate::spin::build_cnnot;

    fn max_diff(a: &ComplexMatrix, b: &ComplexMatrix) -> f64 {
        a.max_abs_diff(b)
    }

    #[test]
    fn zero_fields_give_diagonal_drift_evolution() {
        let model = SpinChainModel::new(2, 1.0).unwrap();
        let t = 0.83;
        let fields = ControlSet::zeros(4, 50, t).unwrap();
        let traj = propagate_unitary(&model, &fields).unwrap();
        let m = C64::from_polar(1.0, -t);
        let p = C64::from_polar(1.0, t);
        let expected = ComplexMatrix::from_diagonal(&[m, p, p, m]);
        assert!(max_diff(traj.last(), &expected) < 1e-13);
        assert_eq!(traj.len(), 51);
        assert_eq!(traj.direction(), Direction::Forward);
    }

    #[test]
    fn zero_duration_is_identity_map() {
        let model = SpinChainModel::new(2, 1.0).unwrap();
        let fields =
            ControlSet::from_fn(4, 20, 0.0, |j, s| (j as f64 + 1.0) * (3.0 * s).sin()).unwrap();
        let init = StateVector::from_amplitudes(&[
            C64::new(0.5, 0.0),
            C64::new(0.0, 0.5),
            C64::new(-0.5, 0.0),
            C64::new(0.5, 0.0),
        ])
        .unwrap();
        let traj = propagate_forward(&model, &fields, &init).unwrap();
        for (a, b) in traj.last().amplitudes().iter().zip(init.amplitudes()) {
            assert!((a - b).norm() < 1e-13);
        }
    }

    #[test]
    fn single_spin_rotation() {
        let model = SpinChainModel::new(1, 1.0).unwrap();
        let t = 1.7;
        let fields =
            ControlSet::from_fn(2, 37, t, |j, _| if j == 0 { PI / (2.0 * t) } else { 0.0 })
                .unwrap();
        let u = propagate_unitary(&model, &fields).unwrap();
        let expected = unitary_step(&pauli::x(), PI / 2.0).unwrap();
        assert!(max_diff(u.last(), &expected) < 1e-13);
    }

    #[test]
    fn backward_zero_fields_matches_closed_form() {
        let model = SpinChainModel::new(2, 1.0).unwrap();
        let t = 1.3;
        let n = 40;
        let fields = ControlSet::zeros(4, n, t).unwrap();
        let phi = StateVector::from_amplitudes(&[
            C64::new(0.6, 0.0),
            C64::new(0.0, 0.8),
            C64::new(0.0, 0.0),
            C64::new(0.0, 0.0),
        ])
        .unwrap();
        let traj = propagate_adjoint_backward(&model, &fields, &phi).unwrap();
        assert_eq!(traj.direction(), Direction::Backward);
        let drift = [1.0, -1.0, -1.0, 1.0];
        for k in 0..=n {
            let s = k as f64 / n as f64;
            for (i, amp) in traj.at(k).amplitudes().iter().enumerate() {
                let expected = phi.amplitudes()[i] * C64::from_polar(1.0, t * drift[i] * (1.0 - s));
                assert!((amp - expected).norm() < 1e-13);
            }
        }
    }

    #[test]
    fn backward_then_forward_round_trip() {
        let model = SpinChainModel::new(2, 1.0).unwrap();
        let fields =
            ControlSet::from_fn(4, 300, 2.1, |j, s| (j as f64 - 1.5) * (PI * s).sin() * 2.0)
                .unwrap();
        let target = build_cnnot(2).unwrap();
        let back = propagate_adjoint_backward(&model, &fields, target.matrix()).unwrap();
        let fwd = propagate_forward(&model, &fields, back.first()).unwrap();
        assert!(max_diff(fwd.last(), target.matrix()) < 1e-10);
    }

    #[test]
    fn adjoint_overlap_is_conserved() {
        let model = SpinChainModel::new(2, 1.0).unwrap();
        let fields =
            ControlSet::from_fn(4, 500, 1.4, |j, s| ((j + 1) as f64 * s * 5.0).cos()).unwrap();
        let target = build_cnnot(2).unwrap();
        let u = propagate_unitary(&model, &fields).unwrap();
        let v = propagate_adjoint_backward(&model, &fields, target.matrix()).unwrap();
        let reference = crate::linalg::trace_inner(v.at(0), u.at(0)).unwrap();
        for k in 0..=500 {
            let z = crate::linalg::trace_inner(v.at(k), u.at(k)).unwrap();
            assert!((z - reference).norm() < 1e-9);
        }
    }

    #[test]
    fn propagation_errors() {
        let model = SpinChainModel::new(2, 1.0).unwrap();
        let fields = ControlSet::zeros(4, 10, 1.0).unwrap();
        assert!(matches!(
            propagate_forward(&model, &fields, &ComplexMatrix::identity(2)),
            Err(Error::DimensionMismatch { .. })
        ));
        let wrong_channels = ControlSet::zeros(2, 10, 1.0).unwrap();
        assert!(propagate_unitary(&model, &wrong_channels).is_err());
        assert!(matches!(
            ControlSet::from_fn(2, 5, 1.0, |_, s| if s > 0.5 { f64::NAN } else { 0.0 }),
            Err(Error::NonFiniteField {
                channel: 0,
                index: 3
            })
        ));
    }

    #[test]
    fn fluence_examples() {
        let zero = ControlSet::zeros(3, 100, 2.0).unwrap();
        let sched = PenaltySchedule::new(0.1, PenaltyMode::Direct, 1e-3, 100).unwrap();
        assert_eq!(fluence(&zero, &sched).unwrap(), 0.0);

        let ones = ControlSet::from_fn(1, 64, 1.7, |_, _| 1.0).unwrap();
        let constant = PenaltySchedule::constant(0.3, 64).unwrap();
        assert!((fluence(&ones, &constant).unwrap() - 0.3 * 1.7).abs() < 1e-14);

        // ∫₀¹ sin⁴(πs) ds = 3/8, midpoint rule error O(1/N²).
        let n = 400;
        let sine = ControlSet::from_fn(1, n, 1.0, |_, s| (PI * s).sin()).unwrap();
        let direct = PenaltySchedule::new(0.5, PenaltyMode::Direct, 1e-12, n).unwrap();
        let f = fluence(&sine, &direct).unwrap();
        assert!((f - 0.5 * 3.0 / 8.0).abs() < 1.0 / (n * n) as f64);

        let short = PenaltySchedule::constant(0.3, 63).unwrap();
        assert!(matches!(
            fluence(&ones, &short),
            Err(Error::GridMismatch { .. })
        ));
    }

    #[test]
    fn penalty_schedules() {
        let n = 10;
        let direct = PenaltySchedule::new(2.0, PenaltyMode::Direct, 1e-3, n).unwrap();
        let shaped = PenaltySchedule::new(2.0, PenaltyMode::Shaped, 1e-3, n).unwrap();
        for k in 0..n {
            let s2 = (PI * midpoint(k, n)).sin().powi(2);
            assert_eq!(direct.values()[k], (2.0 * s2).max(2e-3));
            assert_eq!(shaped.values()[k], 2.0 / s2.max(1e-3));
            assert!(direct.values()[k] > 0.0 && shaped.values()[k] > 0.0);
        }
        // Floors bind on a fine grid next to the edges.
        let fine = PenaltySchedule::new(1.0, PenaltyMode::Direct, 1e-3, 10_000).unwrap();
        assert_eq!(fine.values()[0], 1e-3);
        let fine = PenaltySchedule::new(1.0, PenaltyMode::Shaped, 1e-3, 10_000).unwrap();
        assert_eq!(fine.values()[0], 1e3);
        assert!(PenaltySchedule::new(0.0, PenaltyMode::Direct, 1e-3, 10).is_err());
        assert!(PenaltySchedule::new(1.0, PenaltyMode::Direct, 0.0, 10).is_err());
    }

    #[test]
    fn overlap_and_fidelity_examples() {
        let target = build_cnnot(2).unwrap();
        assert_eq!(gate_overlap(target.matrix(), &target).unwrap(), 8.0);
        assert_eq!(
            gate_overlap(&ComplexMatrix::identity(4), &target).unwrap(),
            4.0
        );
        let phi = 0.4;
        let rotated = target.matrix().scale(C64::from_polar(1.0, phi));
        assert!((gate_overlap(&rotated, &target).unwrap() - 8.0 * phi.cos()).abs() < 1e-14);

        assert_eq!(fidelity_p(target.matrix(), &target, 2).unwrap(), 1.0);
        assert_eq!(
            fidelity_p(&ComplexMatrix::identity(4), &target, 2).unwrap(),
            0.5
        );
        assert!(gate_overlap(&ComplexMatrix::identity(8), &target).is_err());
        assert!(fidelity_p(target.matrix(), &target, 3).is_err());
    }

    #[test]
    fn cost_examples() {
        let model = SpinChainModel::new(2, 1.0).unwrap();
        let target = Objective::Gate(build_cnnot(2).unwrap());
        let sched = PenaltySchedule::new(0.08, PenaltyMode::Direct, 1e-3, 100).unwrap();
        let fields = ControlSet::zeros(4, 100, 1e-9).unwrap();
        let j = evaluate_cost(&model, &fields, &sched, &target).unwrap();
        assert!((j - 4.0).abs() < 1e-6);

        // J = overlap - fluence, bitwise reproducible.
        let fields =
            ControlSet::from_fn(4, 100, 1.5, |j, s| (j as f64 + 0.5) * (PI * s).sin()).unwrap();
        let a = evaluate_cost(&model, &fields, &sched, &target).unwrap();
        let b = evaluate_cost(&model, &fields, &sched, &target).unwrap();
        assert_eq!(a.to_bits(), b.to_bits());
        let u = propagate_unitary(&model, &fields).unwrap();
        let Objective::Gate(g) = &target else {
            unreachable!()
        };
        let expected = gate_overlap(u.last(), g).unwrap() - fluence(&fields, &sched).unwrap();
        assert!((a - expected).abs() < 1e-13);
    }
}
