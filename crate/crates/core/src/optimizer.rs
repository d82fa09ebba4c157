// Copyright 2026 The monotonic-control Authors
// SPDX-License-Identifier: Apache-2.0

//! Monotonic two-substep optimization of the control field and the duration.
//!
//! Every iteration first improves the field at fixed `T` with an
//! immediate-feedback sweep, then improves `T` at fixed field. Because fields
//! live on the rescaled grid `s ∈ [0, 1]`, changing `T` needs no resampling:
//! the interval Hamiltonians keep their eigendecompositions and only the
//! propagation phases change.
//!
//! The field sweep solves, interval by interval, the implicit update
//!
//! ```text
//! Ẽ = (∇f(E) + ∇f(Ẽ)) / (4 τ α),   f(E) = 2 Re Tr[V_{k+1}† e^{-iτH(E)} Ũ_k],
//! ```
//!
//! the trapezoidal discretization of `Ẽ = Im⟨χ|H_j|ψ̃⟩/α`. With it the
//! cost increment of each interval equals `τ α |Ẽ - E|²` up to a cubic
//! remainder. An interval whose exact increment would still be negative keeps
//! its old field, so the sweep never lowers the discrete cost.

use serde::{Deserialize, Serialize};

use crate::dynamics::{
    overlap_term, projection, weighted_square_sum, ControlSet, IntervalSpectra, Objective,
    PenaltyMode, PenaltySchedule, DEFAULT_FLOOR_FRACTION,
};
use crate::error::{Error, Result};
use crate::linalg::{
    frobenius_inner, ComplexMatrix, HermitianSpectrum, Propagand, StateVector, C64,
};
use crate::spin::{build_cnnot, SpinChainModel};

use nalgebra::DMatrix;

/// Tolerance of the monotonicity guard: `1e-9 (1 + |J|)`.
pub fn monotonicity_tolerance(cost: f64) -> f64 {
    1e-9 * (1.0 + cost.abs())
}

const MAX_BACKTRACKS: usize = 30;
const STOP_WINDOW: usize = 50;
const SOLVER_MAX_ITERS: usize = 60;
const SOLVER_REL_TOL: f64 = 1e-10;
const SOLVER_ABS_TOL: f64 = 1e-14;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum TimeUpdate {
    /// Pick the best of `(1-a)T`, `T`, `(1+a)T`.
    Systematic,
    /// Backtracking ascent along `dJ/dT`.
    Gradient,
    /// Fixed duration: the standard monotonic algorithm.
    Frozen,
}

impl std::str::FromStr for TimeUpdate {
    type Err = String;
    fn from_str(s: &str) -> std::result::Result<Self, String> {
        match s {
            "systematic" => Ok(Self::Systematic),
            "gradient" => Ok(Self::Gradient),
            "frozen" => Ok(Self::Frozen),
            other => Err(format!(
                "unknown time update `{other}` (expected systematic, gradient or frozen)"
            )),
        }
    }
}

/// Discretization of the immediate-feedback field update.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum FieldUpdateRule {
    /// Implicit trapezoidal update with an exact per-interval increment check.
    Trapezoid,
    /// `Ẽ_j = Im Tr[V(s_k)† H_j Ũ(s_k)] / α(s_k)` at the left grid point, explicit.
    LeftPoint,
}

impl std::str::FromStr for FieldUpdateRule {
    type Err = String;
    fn from_str(s: &str) -> std::result::Result<Self, String> {
        match s {
            "trapezoid" => Ok(Self::Trapezoid),
            "left_point" | "left-point" => Ok(Self::LeftPoint),
            other => Err(format!(
                "unknown update rule `{other}` (expected trapezoid or left_point)"
            )),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(into = "String", try_from = "String")]
pub enum SeedField {
    Zero,
    /// Same constant amplitude on every channel.
    Constant(f64),
}

impl std::fmt::Display for SeedField {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            Self::Zero => f.write_str("zero"),
            Self::Constant(v) => write!(f, "constant:{v}"),
        }
    }
}

impl From<SeedField> for String {
    fn from(seed: SeedField) -> String {
        seed.to_string()
    }
}

impl TryFrom<String> for SeedField {
    type Error = String;
    fn try_from(s: String) -> std::result::Result<Self, String> {
        s.parse()
    }
}

impl std::str::FromStr for SeedField {
    type Err = String;
    fn from_str(s: &str) -> std::result::Result<Self, String> {
        if s == "zero" {
            return Ok(Self::Zero);
        }
        s.strip_prefix("constant:")
            .and_then(|v| v.parse().ok())
            .map(Self::Constant)
            .ok_or_else(|| format!("unknown seed field `{s}` (expected zero or constant:<value>)"))
    }
}

/// What to steer toward.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum TargetSpec {
    /// `C^{n-1}NOT` on the whole chain.
    Cnnot,
    /// State transfer between two (normalized) amplitude vectors.
    StateTransfer { initial: Vec<C64>, target: Vec<C64> },
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct OptimizationConfig {
    pub spins: usize,
    pub coupling: f64,
    pub target: TargetSpec,
    pub alpha0: f64,
    #[serde(rename = "T0", alias = "t0")]
    pub t0: f64,
    pub a: f64,
    pub time_update: TimeUpdate,
    pub r0: f64,
    #[serde(rename = "N", alias = "grid")]
    pub grid: usize,
    pub max_iter: usize,
    pub stop_tol: f64,
    pub penalty_mode: PenaltyMode,
    pub floor_fraction: f64,
    pub seed_field: SeedField,
    pub update_rule: FieldUpdateRule,
}

impl Default for OptimizationConfig {
    fn default() -> Self {
        Self {
            spins: 2,
            coupling: 1.0,
            target: TargetSpec::Cnnot,
            alpha0: 0.08,
            t0: 0.5,
            a: 5e-4,
            time_update: TimeUpdate::Systematic,
            r0: 1e-2,
            grid: 2000,
            max_iter: 5000,
            stop_tol: 0.0,
            penalty_mode: PenaltyMode::Direct,
            floor_fraction: DEFAULT_FLOOR_FRACTION,
            seed_field: SeedField::Zero,
            update_rule: FieldUpdateRule::Trapezoid,
        }
    }
}

impl OptimizationConfig {
    /// Checks every field except `max_iter`; zero iterations is a valid degenerate run.
    pub fn validate(&self) -> Result<()> {
        let bad = |msg: String| Err(Error::InvalidConfig(msg));
        if self.spins == 0 || self.spins > 6 {
            return bad(format!("spins must be in 1..=6, got {}", self.spins));
        }
        if !(self.coupling.is_finite()) {
            return bad("coupling must be finite".into());
        }
        if !(self.alpha0.is_finite() && self.alpha0 > 0.0) {
            return bad(format!("alpha0 must be positive, got {}", self.alpha0));
        }
        if !(self.t0.is_finite() && self.t0 > 0.0) {
            return bad(format!("t0 must be positive, got {}", self.t0));
        }
        if !(self.a > 0.0 && self.a < 0.1) {
            return bad(format!("a must lie in (0, 0.1), got {}", self.a));
        }
        if !(self.r0.is_finite() && self.r0 > 0.0) {
            return bad(format!("r0 must be positive, got {}", self.r0));
        }
        if self.grid == 0 {
            return bad("grid must be positive".into());
        }
        if !(self.stop_tol.is_finite() && self.stop_tol >= 0.0) {
            return bad(format!(
                "stop_tol must be nonnegative, got {}",
                self.stop_tol
            ));
        }
        if !(self.floor_fraction.is_finite() && self.floor_fraction > 0.0) {
            return bad(format!(
                "floor_fraction must be positive, got {}",
                self.floor_fraction
            ));
        }
        if let SeedField::Constant(v) = self.seed_field {
            if !v.is_finite() {
                return bad("seed field amplitude must be finite".into());
            }
        }
        if let TargetSpec::StateTransfer { initial, target } = &self.target {
            let dim = 1usize << self.spins;
            if initial.len() != dim || target.len() != dim {
                return bad(format!("state transfer vectors must have {dim} amplitudes"));
            }
        } else if self.spins < 2 {
            return bad("the C^(n-1)NOT target needs at least 2 spins".into());
        }
        Ok(())
    }

    pub fn build_model(&self) -> Result<SpinChainModel> {
        SpinChainModel::new(self.spins, self.coupling)
    }

    pub fn build_objective(&self) -> Result<Objective> {
        match &self.target {
            TargetSpec::Cnnot => Ok(Objective::Gate(build_cnnot(self.spins)?)),
            TargetSpec::StateTransfer { initial, target } => Ok(Objective::StateTransfer {
                initial: StateVector::from_amplitudes(initial)?,
                target: StateVector::from_amplitudes(target)?,
            }),
        }
    }

    pub fn build_schedule(&self) -> Result<PenaltySchedule> {
        PenaltySchedule::new(
            self.alpha0,
            self.penalty_mode,
            self.floor_fraction,
            self.grid,
        )
    }

    pub fn seed_fields(&self, channels: usize) -> Result<ControlSet> {
        let amp = match self.seed_field {
            SeedField::Zero => 0.0,
            SeedField::Constant(v) => v,
        };
        ControlSet::from_fn(channels, self.grid, self.t0, |_, _| amp)
    }
}

/// One completed iteration.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct IterationRecord {
    pub k: usize,
    #[serde(rename = "J")]
    pub cost: f64,
    #[serde(rename = "T")]
    pub duration: f64,
    #[serde(rename = "P")]
    pub fidelity: f64,
    pub fluence: f64,
    #[serde(rename = "dJ_field")]
    pub delta_field: f64,
    #[serde(rename = "dJ_time")]
    pub delta_time: f64,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Termination {
    MaxIter,
    StopTol,
    GuardFailure,
}

impl Termination {
    pub fn as_str(self) -> &'static str {
        match self {
            Termination::MaxIter => "max_iter",
            Termination::StopTol => "stop_tol",
            Termination::GuardFailure => "guard_failure",
        }
    }
}

#[derive(Debug, Clone)]
pub struct RunHistory {
    pub config: OptimizationConfig,
    pub initial_cost: f64,
    pub records: Vec<IterationRecord>,
    pub final_fields: ControlSet,
    pub final_duration: f64,
    pub final_fidelity: f64,
    pub termination: Termination,
    /// Set when the run ended on a guard failure.
    pub guard_error: Option<String>,
}

impl RunHistory {
    /// First iteration whose fidelity reaches `threshold`.
    pub fn first_reaching(&self, threshold: f64) -> Option<usize> {
        self.records
            .iter()
            .find(|r| r.fidelity >= threshold)
            .map(|r| r.k)
    }

    pub fn final_cost(&self) -> f64 {
        self.records.last().map_or(self.initial_cost, |r| r.cost)
    }

    /// Largest drop `J_k - J_{k+1}` across the run, including from the seed.
    pub fn worst_decrease(&self) -> f64 {
        let mut prev = self.initial_cost;
        let mut worst = f64::NEG_INFINITY;
        for r in &self.records {
            worst = worst.max(prev - r.cost);
            prev = r.cost;
        }
        worst
    }

    pub fn is_monotone(&self) -> bool {
        let mut prev = self.initial_cost;
        self.records.iter().all(|r| {
            let ok = r.cost >= prev - monotonicity_tolerance(prev);
            prev = r.cost;
            ok
        })
    }
}

/// Result of one field sweep.
#[derive(Debug, Clone)]
pub struct SweepOutcome {
    pub fields: ControlSet,
    /// Measured `J_new - J_old`.
    pub delta_cost: f64,
    /// `T Δs Σ_k α(s_k) |Ẽ(s_k) - E(s_k)|²`.
    pub predicted_delta: f64,
    pub cost: f64,
    /// Intervals that kept their old field because the update would lower J.
    pub rejected_intervals: usize,
    pub solver_iterations: usize,
}

/// Result of one duration update.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct TimeOutcome {
    pub duration: f64,
    pub delta_cost: f64,
    pub cost: f64,
}

struct Context<'a> {
    model: &'a SpinChainModel,
    schedule: &'a PenaltySchedule,
    rule: FieldUpdateRule,
}

/// Fields, their spectra, and the cached cost/final state at the current `T`.
#[derive(Clone)]
struct Current<Q> {
    fields: ControlSet,
    spectra: IntervalSpectra,
    cost: f64,
    final_q: Q,
}

struct Problem<Q> {
    initial: Q,
    target: Q,
}

impl<Q: Propagand> Problem<Q> {
    fn current(&self, ctx: &Context<'_>, fields: ControlSet) -> Result<Current<Q>> {
        if fields.grid() != ctx.schedule.grid() {
            return Err(Error::GridMismatch {
                fields: fields.grid(),
                schedule: ctx.schedule.grid(),
            });
        }
        let spectra = IntervalSpectra::new(ctx.model, &fields)?;
        let (cost, final_q) = self.evaluate(ctx, &fields, &spectra, fields.duration())?;
        Ok(Current {
            fields,
            spectra,
            cost,
            final_q,
        })
    }

    fn evaluate(
        &self,
        ctx: &Context<'_>,
        fields: &ControlSet,
        spectra: &IntervalSpectra,
        duration: f64,
    ) -> Result<(f64, Q)> {
        let final_q = spectra.forward_final(&self.initial, duration)?;
        let penalty = duration * fields.step() * weighted_square_sum(fields, ctx.schedule);
        Ok((overlap_term(&self.target, &final_q) - penalty, final_q))
    }

    fn sweep(&self, ctx: &Context<'_>, cur: &Current<Q>) -> Result<(SweepOutcome, Current<Q>)> {
        let fields = &cur.fields;
        let n = fields.grid();
        let m = fields.channels();
        let duration = fields.duration();
        let tau = duration * fields.step();
        let adjoint = cur.spectra.backward(&self.target, duration)?;
        let alphas = ctx.schedule.values();

        let mut new_fields = fields.clone();
        let mut spectra = Vec::with_capacity(n);
        let mut u = self.initial.block().clone();
        let mut predicted = 0.0;
        let mut rejected = 0;
        let mut solver_iterations = 0;
        let mut trial = vec![0.0; m];

        for (k, &alpha) in alphas.iter().enumerate().take(n) {
            let old = fields.amplitudes(k);
            let v_left = adjoint.at(k).block();
            let v_right = adjoint.at(k + 1).block();
            let f_old = 2.0 * frobenius_inner(v_left, &u)?.re;

            let spectrum = match ctx.rule {
                FieldUpdateRule::LeftPoint => {
                    left_point_update(ctx.model, &u, v_left, alpha, &mut trial);
                    solver_iterations += 1;
                    HermitianSpectrum::of_hermitian(ctx.model.hamiltonian(&trial).into_matrix())
                }
                FieldUpdateRule::Trapezoid => {
                    let (spec, iters) = trapezoid_update(
                        ctx.model,
                        cur.spectra.get(k),
                        old,
                        &u,
                        v_right,
                        tau,
                        alpha,
                        f_old,
                        &mut trial,
                    );
                    solver_iterations += iters;
                    spec
                }
            };

            let mut next = spectrum.propagate(tau, &u);
            let f_new = 2.0 * frobenius_inner(v_right, &next)?.re;
            let sq = |e: &[f64]| e.iter().map(|x| x * x).sum::<f64>();
            let increment = f_new - f_old - tau * alpha * (sq(&trial) - sq(old));
            let keep_old = ctx.rule == FieldUpdateRule::Trapezoid && increment < 0.0;
            if keep_old {
                rejected += 1;
                next = cur.spectra.get(k).propagate(tau, &u);
                spectra.push(cur.spectra.get(k).clone());
            } else {
                let diff: f64 = trial.iter().zip(old).map(|(a, b)| (a - b) * (a - b)).sum();
                predicted += tau * alpha * diff;
                new_fields.amplitudes_mut(k).copy_from_slice(&trial);
                spectra.push(spectrum);
            }
            u = next;
        }

        let final_q = Q::from_block(u);
        let penalty = tau * weighted_square_sum(&new_fields, ctx.schedule);
        let cost = overlap_term(&self.target, &final_q) - penalty;
        let outcome = SweepOutcome {
            fields: new_fields.clone(),
            delta_cost: cost - cur.cost,
            predicted_delta: predicted,
            cost,
            rejected_intervals: rejected,
            solver_iterations,
        };
        let next = Current {
            fields: new_fields,
            spectra: IntervalSpectra::from_vec(spectra),
            cost,
            final_q,
        };
        Ok((outcome, next))
    }

    fn systematic(&self, ctx: &Context<'_>, cur: &mut Current<Q>, a: f64) -> Result<TimeOutcome> {
        let t = cur.fields.duration();
        let (t_minus, t_plus) = ((1.0 - a) * t, (1.0 + a) * t);
        let (j_minus, q_minus) = self.evaluate(ctx, &cur.fields, &cur.spectra, t_minus)?;
        let (j_plus, q_plus) = self.evaluate(ctx, &cur.fields, &cur.spectra, t_plus)?;
        let choice = select_duration([(t_minus, j_minus), (t, cur.cost), (t_plus, j_plus)]);
        let old_cost = cur.cost;
        match choice {
            0 => self.accept(cur, t_minus, j_minus, q_minus),
            2 => self.accept(cur, t_plus, j_plus, q_plus),
            _ => {}
        }
        Ok(TimeOutcome {
            duration: cur.fields.duration(),
            delta_cost: cur.cost - old_cost,
            cost: cur.cost,
        })
    }

    fn accept(&self, cur: &mut Current<Q>, duration: f64, cost: f64, final_q: Q) {
        cur.fields.set_duration(duration);
        cur.cost = cost;
        cur.final_q = final_q;
    }

    fn time_gradient(&self, ctx: &Context<'_>, cur: &Current<Q>) -> Result<f64> {
        let fields = &cur.fields;
        let duration = fields.duration();
        let ds = fields.step();
        let forward = cur.spectra.forward(&self.initial, duration)?;
        let adjoint = cur.spectra.backward(&self.target, duration)?;
        let mut sum = 0.0;
        for k in 0..fields.grid() {
            let spec = cur.spectra.get(k);
            let x = spec.vectors().ad_mul(forward.at(k).block());
            let y = spec.vectors().ad_mul(adjoint.at(k).block());
            // Tr[V† H U] = Σ_a λ_a (Q†U)(Q†V)†_aa
            let mut z = C64::new(0.0, 0.0);
            for (a, &lambda) in spec.values().iter().enumerate() {
                let row: C64 = x
                    .row(a)
                    .iter()
                    .zip(y.row(a).iter())
                    .map(|(p, q)| p * q.conj())
                    .sum();
                z += row * lambda;
            }
            sum += z.im;
        }
        Ok(2.0 * ds * sum - ds * weighted_square_sum(fields, ctx.schedule))
    }

    fn gradient_step(
        &self,
        ctx: &Context<'_>,
        cur: &mut Current<Q>,
        r0: f64,
    ) -> Result<TimeOutcome> {
        let grad = self.time_gradient(ctx, cur)?;
        let t = cur.fields.duration();
        let old_cost = cur.cost;
        if grad != 0.0 && grad.is_finite() {
            let mut r = r0;
            for _ in 0..=MAX_BACKTRACKS {
                let candidate = t + r * grad;
                if candidate > 0.0 {
                    let (j, q) = self.evaluate(ctx, &cur.fields, &cur.spectra, candidate)?;
                    if j >= old_cost {
                        self.accept(cur, candidate, j, q);
                        break;
                    }
                }
                r *= 0.5;
            }
        }
        Ok(TimeOutcome {
            duration: cur.fields.duration(),
            delta_cost: cur.cost - old_cost,
            cost: cur.cost,
        })
    }
}

/// Index of the best `(duration, cost)` candidate among `[(1-a)T, T, (1+a)T]`.
///
/// Ties keep the middle duration; a tie between the two neighbors goes to the shorter one.
pub fn select_duration(candidates: [(f64, f64); 3]) -> usize {
    let mut best = 1;
    if candidates[0].1 > candidates[best].1 {
        best = 0;
    }
    if candidates[2].1 > candidates[best].1 {
        best = 2;
    }
    best
}

fn left_point_update(
    model: &SpinChainModel,
    u: &DMatrix<C64>,
    v: &DMatrix<C64>,
    alpha: f64,
    out: &mut [f64],
) {
    // Tr[V† H_j U] = Σ_{cd} (H_j)_{cd} (U V†)_{dc}
    let z = u * v.adjoint();
    for (j, e) in out.iter_mut().enumerate() {
        let s: C64 = model
            .sparse_control(j)
            .iter()
            .map(|&(r, c, h)| h * z[(c, r)])
            .sum();
        *e = s.im / alpha;
    }
}

/// `∂/∂E_j 2 Re Tr[V† e^{-iτH(E)} U]` at the field whose spectrum is given.
fn exp_gradient(
    model: &SpinChainModel,
    spectrum: &HermitianSpectrum,
    tau: f64,
    u: &DMatrix<C64>,
    v: &DMatrix<C64>,
    out: &mut [f64],
) {
    let q = spectrum.vectors();
    let x = q.ad_mul(u);
    let y = q.ad_mul(v);
    let p = x * y.adjoint();
    let l = spectrum.exp_divided_differences(tau);
    let r = l.component_mul(&p.transpose());
    let kernel = q.conjugate() * r * q.transpose();
    for (j, g) in out.iter_mut().enumerate() {
        let s: C64 = model
            .sparse_control(j)
            .iter()
            .map(|&(row, col, h)| h * kernel[(row, col)])
            .sum();
        *g = 2.0 * s.re;
    }
}

#[allow(clippy::too_many_arguments)]
fn trapezoid_update(
    model: &SpinChainModel,
    old_spectrum: &HermitianSpectrum,
    old: &[f64],
    u: &DMatrix<C64>,
    v_right: &DMatrix<C64>,
    tau: f64,
    alpha: f64,
    f_old: f64,
    trial: &mut [f64],
) -> (HermitianSpectrum, usize) {
    let m = old.len();
    let mut grad_old = vec![0.0; m];
    exp_gradient(model, old_spectrum, tau, u, v_right, &mut grad_old);

    // Diagonal estimate of the fixed-point map's Jacobian, -τ f/(4α), used as
    // a relaxation so that strong feedback (small α) still converges.
    let jac = (-tau * f_old / (4.0 * alpha)).min(0.5);
    let omega = 1.0 / (1.0 - jac);
    let scale = 1.0 / (2.0 * tau * alpha);
    for j in 0..m {
        trial[j] = old[j] + omega * (grad_old[j] * scale - old[j]);
    }

    let mut grad = vec![0.0; m];
    let mut iters = 0;
    loop {
        iters += 1;
        let spectrum = HermitianSpectrum::of_hermitian(model.hamiltonian(trial).into_matrix());
        exp_gradient(model, &spectrum, tau, u, v_right, &mut grad);
        let mut residual = 0.0f64;
        let mut step = 0.0f64;
        let mut size = 0.0f64;
        for j in 0..m {
            let target = 0.5 * (grad_old[j] + grad[j]) * scale;
            residual = residual.max((target - trial[j]).abs());
            step = step.max((trial[j] - old[j]).abs());
            size = size.max(trial[j].abs());
        }
        if residual <= SOLVER_REL_TOL * step + SOLVER_ABS_TOL * (1.0 + size)
            || iters >= SOLVER_MAX_ITERS
        {
            return (spectrum, iters);
        }
        for j in 0..m {
            let target = 0.5 * (grad_old[j] + grad[j]) * scale;
            trial[j] += omega * (target - trial[j]);
        }
    }
}

enum Engine {
    Gate(Problem<ComplexMatrix>, Current<ComplexMatrix>),
    State(Problem<StateVector>, Current<StateVector>),
}

macro_rules! with_engine {
    ($engine:expr, |$p:ident, $c:ident| $body:expr) => {
        match $engine {
            Engine::Gate($p, $c) => $body,
            Engine::State($p, $c) => $body,
        }
    };
}

impl Engine {
    fn new(ctx: &Context<'_>, objective: &Objective, fields: ControlSet) -> Result<Self> {
        objective.check(ctx.model)?;
        Ok(match objective {
            Objective::Gate(g) => {
                let p = Problem {
                    initial: ComplexMatrix::identity(g.dim()),
                    target: g.matrix().clone(),
                };
                let c = p.current(ctx, fields)?;
                Engine::Gate(p, c)
            }
            Objective::StateTransfer { initial, target } => {
                let p = Problem {
                    initial: initial.clone(),
                    target: target.clone(),
                };
                let c = p.current(ctx, fields)?;
                Engine::State(p, c)
            }
        })
    }

    fn cost(&self) -> f64 {
        with_engine!(self, |_p, c| c.cost)
    }

    fn fields(&self) -> &ControlSet {
        with_engine!(self, |_p, c| &c.fields)
    }

    fn fidelity(&self) -> f64 {
        with_engine!(self, |p, c| projection(&p.target, &c.final_q))
    }

    fn sweep(&mut self, ctx: &Context<'_>) -> Result<SweepOutcome> {
        with_engine!(self, |p, c| {
            let (out, next) = p.sweep(ctx, c)?;
            *c = next;
            Ok(out)
        })
    }

    fn systematic(&mut self, ctx: &Context<'_>, a: f64) -> Result<TimeOutcome> {
        with_engine!(self, |p, c| p.systematic(ctx, c, a))
    }

    fn gradient_step(&mut self, ctx: &Context<'_>, r0: f64) -> Result<TimeOutcome> {
        with_engine!(self, |p, c| p.gradient_step(ctx, c, r0))
    }

    fn time_gradient(&self, ctx: &Context<'_>) -> Result<f64> {
        with_engine!(self, |p, c| p.time_gradient(ctx, c))
    }
}

/// One field sweep at fixed `T` with the default trapezoidal rule.
pub fn field_update_sweep(
    model: &SpinChainModel,
    fields: &ControlSet,
    schedule: &PenaltySchedule,
    objective: &Objective,
) -> Result<SweepOutcome> {
    field_update_sweep_with_rule(
        model,
        fields,
        schedule,
        objective,
        FieldUpdateRule::Trapezoid,
    )
}

/// One field sweep with an explicit discretization rule.
///
/// Fails with [`Error::GuardFailure`] when the cost drops by more than the
/// monotonicity tolerance, which signals a grid too coarse for the fields.
pub fn field_update_sweep_with_rule(
    model: &SpinChainModel,
    fields: &ControlSet,
    schedule: &PenaltySchedule,
    objective: &Objective,
    rule: FieldUpdateRule,
) -> Result<SweepOutcome> {
    let ctx = Context {
        model,
        schedule,
        rule,
    };
    let mut engine = Engine::new(&ctx, objective, fields.clone())?;
    let before = engine.cost();
    let out = engine.sweep(&ctx)?;
    if out.delta_cost < -monotonicity_tolerance(before) {
        return Err(Error::GuardFailure {
            iteration: 0,
            substep: "field",
            delta: out.delta_cost,
        });
    }
    Ok(out)
}

/// Best of `(1-a)T, T, (1+a)T` at fixed fields.
pub fn time_update_systematic(
    model: &SpinChainModel,
    fields: &ControlSet,
    schedule: &PenaltySchedule,
    objective: &Objective,
    a: f64,
) -> Result<TimeOutcome> {
    let ctx = Context {
        model,
        schedule,
        rule: FieldUpdateRule::Trapezoid,
    };
    Engine::new(&ctx, objective, fields.clone())?.systematic(&ctx, a)
}

/// `dJ/dT` from the adjoint quadrature `2Δs Σ_k Im Tr[V_k† H_k U_k] - Δs Σ_k α_k |E_k|²`.
pub fn time_gradient(
    model: &SpinChainModel,
    fields: &ControlSet,
    schedule: &PenaltySchedule,
    objective: &Objective,
) -> Result<f64> {
    let ctx = Context {
        model,
        schedule,
        rule: FieldUpdateRule::Trapezoid,
    };
    Engine::new(&ctx, objective, fields.clone())?.time_gradient(&ctx)
}

/// Backtracking step `T + r dJ/dT`, halving `r` from `r0` until `J` does not drop.
pub fn time_update_gradient(
    model: &SpinChainModel,
    fields: &ControlSet,
    schedule: &PenaltySchedule,
    objective: &Objective,
    r0: f64,
) -> Result<TimeOutcome> {
    let ctx = Context {
        model,
        schedule,
        rule: FieldUpdateRule::Trapezoid,
    };
    Engine::new(&ctx, objective, fields.clone())?.gradient_step(&ctx, r0)
}

/// Iteration driver; [`run`] wraps it for whole runs.
pub struct Optimizer {
    config: OptimizationConfig,
    model: SpinChainModel,
    schedule: PenaltySchedule,
    engine: Engine,
    initial_cost: f64,
    records: Vec<IterationRecord>,
    quiet_streak: usize,
}

impl Optimizer {
    pub fn new(config: OptimizationConfig) -> Result<Self> {
        config.validate()?;
        let model = config.build_model()?;
        let objective = config.build_objective()?;
        let fields = config.seed_fields(model.channel_count())?;
        Self::with_parts(config, model, objective, fields)
    }

    /// Uses a caller-supplied model, objective and starting fields; `config`
    /// supplies the algorithm parameters.
    pub fn with_parts(
        config: OptimizationConfig,
        model: SpinChainModel,
        objective: Objective,
        fields: ControlSet,
    ) -> Result<Self> {
        config.validate()?;
        let schedule = config.build_schedule()?;
        let ctx = Context {
            model: &model,
            schedule: &schedule,
            rule: config.update_rule,
        };
        let engine = Engine::new(&ctx, &objective, fields)?;
        let initial_cost = engine.cost();
        Ok(Self {
            config,
            model,
            schedule,
            engine,
            initial_cost,
            records: Vec::new(),
            quiet_streak: 0,
        })
    }

    pub fn cost(&self) -> f64 {
        self.engine.cost()
    }

    pub fn fields(&self) -> &ControlSet {
        self.engine.fields()
    }

    pub fn fidelity(&self) -> f64 {
        self.engine.fidelity()
    }

    pub fn records(&self) -> &[IterationRecord] {
        &self.records
    }

    pub fn model(&self) -> &SpinChainModel {
        &self.model
    }

    pub fn schedule(&self) -> &PenaltySchedule {
        &self.schedule
    }

    /// One field sweep followed by one duration update.
    pub fn iterate(&mut self) -> Result<IterationRecord> {
        let ctx = Context {
            model: &self.model,
            schedule: &self.schedule,
            rule: self.config.update_rule,
        };
        let k = self.records.len() + 1;
        let before = self.engine.cost();
        let sweep = self.engine.sweep(&ctx)?;
        if sweep.delta_cost < -monotonicity_tolerance(before) {
            return Err(Error::GuardFailure {
                iteration: k,
                substep: "field",
                delta: sweep.delta_cost,
            });
        }
        let mid = self.engine.cost();
        let time = match self.config.time_update {
            TimeUpdate::Systematic => Some(self.engine.systematic(&ctx, self.config.a)?),
            TimeUpdate::Gradient => Some(self.engine.gradient_step(&ctx, self.config.r0)?),
            TimeUpdate::Frozen => None,
        };
        let delta_time = time.map_or(0.0, |t| t.delta_cost);
        if delta_time < -monotonicity_tolerance(mid) {
            return Err(Error::GuardFailure {
                iteration: k,
                substep: "time",
                delta: delta_time,
            });
        }
        let fields = self.engine.fields();
        let record = IterationRecord {
            k,
            cost: self.engine.cost(),
            duration: fields.duration(),
            fidelity: self.engine.fidelity(),
            fluence: crate::dynamics::fluence(fields, &self.schedule)?,
            delta_field: sweep.delta_cost,
            delta_time,
        };
        self.records.push(record);
        if (sweep.delta_cost + delta_time).abs() < self.config.stop_tol {
            self.quiet_streak += 1;
        } else {
            self.quiet_streak = 0;
        }
        Ok(record)
    }

    pub fn converged(&self) -> bool {
        self.quiet_streak >= STOP_WINDOW
    }

    /// Runs to `max_iter`, the stopping rule, or a guard failure.
    pub fn run(mut self) -> RunHistory {
        let mut termination = Termination::MaxIter;
        let mut guard_error = None;
        while self.records.len() < self.config.max_iter {
            match self.iterate() {
                Ok(_) => {
                    if self.converged() {
                        termination = Termination::StopTol;
                        break;
                    }
                }
                Err(e) => {
                    termination = Termination::GuardFailure;
                    guard_error = Some(e.to_string());
                    break;
                }
            }
        }
        self.finish(termination, guard_error)
    }

    fn finish(self, termination: Termination, guard_error: Option<String>) -> RunHistory {
        let final_fields = self.engine.fields().clone();
        let final_fidelity = self.engine.fidelity();
        let history = RunHistory {
            final_duration: final_fields.duration(),
            config: self.config,
            initial_cost: self.initial_cost,
            records: self.records,
            final_fields,
            final_fidelity,
            termination,
            guard_error,
        };
        debug_assert!(termination == Termination::GuardFailure || history.is_monotone());
        history
    }
}

/// Full optimization from a configuration.
pub fn run(config: &OptimizationConfig) -> Result<RunHistory> {
    Ok(Optimizer::new(config.clone())?.run())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::dynamics::evaluate_cost;
    use std::f64::consts::PI;

    fn cnot_setup(
        grid: usize,
        duration: f64,
    ) -> (SpinChainModel, Objective, PenaltySchedule, ControlSet) {
        let model = SpinChainModel::new(2, 1.0).unwrap();
        let objective = Objective::Gate(build_cnnot(2).unwrap());
        let schedule = PenaltySchedule::new(0.08, PenaltyMode::Shaped, 1e-3, grid).unwrap();
        let fields = ControlSet::zeros(4, grid, duration).unwrap();
        (model, objective, schedule, fields)
    }

    #[test]
    fn duration_selection() {
        assert_eq!(select_duration([(0.9, 0.1), (1.0, 0.2), (1.1, 0.3)]), 2);
        assert_eq!(select_duration([(0.9, 0.3), (1.0, 0.3), (1.1, 0.3)]), 1);
        assert_eq!(select_duration([(0.9, 0.5), (1.0, 0.3), (1.1, 0.5)]), 0);
        assert_eq!(select_duration([(0.9, 0.5), (1.0, 0.6), (1.1, 0.1)]), 1);
    }

    #[test]
    fn zero_field_is_stationary_for_cnot() {
        // Every overlap Tr[V† H_j U] is real at zero field, so no channel moves.
        let (model, objective, schedule, fields) = cnot_setup(200, 0.5);
        let out = field_update_sweep(&model, &fields, &schedule, &objective).unwrap();
        assert_eq!(out.fields.max_amplitude(), 0.0);
        assert_eq!(out.delta_cost, 0.0);
    }

    #[test]
    fn first_sweep_from_zero_raises_cost() {
        let model = SpinChainModel::new(4, 1.0).unwrap();
        let objective = Objective::Gate(build_cnnot(4).unwrap());
        let schedule = PenaltySchedule::new(0.01, PenaltyMode::Direct, 1e-3, 100).unwrap();
        let fields = ControlSet::zeros(8, 100, 0.5).unwrap();
        let before = evaluate_cost(&model, &fields, &schedule, &objective).unwrap();
        let out = field_update_sweep(&model, &fields, &schedule, &objective).unwrap();
        let after = evaluate_cost(&model, &out.fields, &schedule, &objective).unwrap();
        assert!(out.fields.max_amplitude() > 0.0);
        assert!(out.delta_cost > 0.0);
        assert!((out.delta_cost - (after - before)).abs() < 1e-12 * (1.0 + after.abs()));
        assert!((out.cost - after).abs() < 1e-12 * (1.0 + after.abs()));
    }

    #[test]
    fn seeded_cnot_sweep_raises_cost() {
        let (model, objective, schedule, _) = cnot_setup(200, 0.5);
        let fields = ControlSet::from_fn(4, 200, 0.5, |_, _| 0.05).unwrap();
        let before = evaluate_cost(&model, &fields, &schedule, &objective).unwrap();
        let out = field_update_sweep(&model, &fields, &schedule, &objective).unwrap();
        let after = evaluate_cost(&model, &out.fields, &schedule, &objective).unwrap();
        assert!(out.delta_cost > 0.0);
        assert!((out.delta_cost - (after - before)).abs() < 1e-12);
    }

    #[test]
    fn sweep_increment_matches_quadrature() {
        let (model, objective, schedule, _) = cnot_setup(1000, 1.2);
        let fields =
            ControlSet::from_fn(4, 1000, 1.2, |j, s| 0.8 * ((j + 1) as f64 * PI * s).sin())
                .unwrap();
        let out = field_update_sweep(&model, &fields, &schedule, &objective).unwrap();
        let rel = (out.delta_cost - out.predicted_delta).abs() / out.delta_cost.abs();
        assert!(rel < 1e-5, "relative mismatch {rel}");
        assert_eq!(out.rejected_intervals, 0);
    }

    #[test]
    fn systematic_update_never_lowers_cost() {
        let (model, objective, schedule, _) = cnot_setup(300, 0.9);
        let fields =
            ControlSet::from_fn(4, 300, 0.9, |j, s| (j as f64 - 1.0) * (PI * s).sin()).unwrap();
        let out = time_update_systematic(&model, &fields, &schedule, &objective, 5e-4).unwrap();
        assert!(out.delta_cost >= 0.0);
        let t = fields.duration();
        assert!([t, t * (1.0 - 5e-4), t * (1.0 + 5e-4)].contains(&out.duration));
        let direct = evaluate_cost(
            &model,
            &fields.clone().with_duration(out.duration),
            &schedule,
            &objective,
        )
        .unwrap();
        assert!((direct - out.cost).abs() < 1e-12);
    }

    #[test]
    fn gradient_update_is_noop_for_flat_cost() {
        // A single spin with no drift and no field: J(T) = 2 Re Tr[C†] is constant.
        let model = SpinChainModel::new(1, 1.0).unwrap();
        let target = ComplexMatrix::identity(2);
        let objective = Objective::Gate(crate::spin::GateTarget::new(target, "I").unwrap());
        let schedule = PenaltySchedule::constant(1.0, 10).unwrap();
        let fields = ControlSet::zeros(2, 10, 0.7).unwrap();
        assert_eq!(
            time_gradient(&model, &fields, &schedule, &objective).unwrap(),
            0.0
        );
        let out = time_update_gradient(&model, &fields, &schedule, &objective, 0.1).unwrap();
        assert_eq!(out.duration, 0.7);
        assert_eq!(out.delta_cost, 0.0);
    }

    #[test]
    fn zero_iterations_gives_empty_history() {
        let config = OptimizationConfig {
            max_iter: 0,
            grid: 50,
            ..Default::default()
        };
        let history = run(&config).unwrap();
        assert!(history.records.is_empty());
        assert_eq!(history.termination, Termination::MaxIter);
        assert_eq!(history.final_duration, config.t0);
    }

    #[test]
    fn stop_tolerance_ends_run() {
        let config = OptimizationConfig {
            grid: 40,
            max_iter: 100_000,
            stop_tol: 1e-3,
            time_update: TimeUpdate::Frozen,
            alpha0: 1.0,
            t0: 1.0,
            ..Default::default()
        };
        let history = run(&config).unwrap();
        assert_eq!(history.termination, Termination::StopTol);
        assert!(history.records.len() >= STOP_WINDOW);
        assert!(history.records.len() < 100_000);
    }

    #[test]
    fn config_validation() {
        let ok = OptimizationConfig::default();
        assert!(ok.validate().is_ok());
        for bad in [
            OptimizationConfig {
                a: 0.0,
                ..ok.clone()
            },
            OptimizationConfig {
                a: 0.2,
                ..ok.clone()
            },
            OptimizationConfig {
                t0: 0.0,
                ..ok.clone()
            },
            OptimizationConfig {
                alpha0: -1.0,
                ..ok.clone()
            },
            OptimizationConfig {
                grid: 0,
                ..ok.clone()
            },
            OptimizationConfig {
                spins: 1,
                ..ok.clone()
            },
            OptimizationConfig {
                stop_tol: -1.0,
                ..ok.clone()
            },
        ] {
            assert!(
                matches!(bad.validate(), Err(Error::InvalidConfig(_))),
                "{bad:?}"
            );
        }
    }

    #[test]
    fn option_parsing() {
        assert_eq!("zero".parse::<SeedField>().unwrap(), SeedField::Zero);
        assert_eq!(
            "constant:0.25".parse::<SeedField>().unwrap(),
            SeedField::Constant(0.25)
        );
        assert!("ones".parse::<SeedField>().is_err());
        assert_eq!("frozen".parse::<TimeUpdate>().unwrap(), TimeUpdate::Frozen);
        assert_eq!(
            "left-point".parse::<FieldUpdateRule>().unwrap(),
            FieldUpdateRule::LeftPoint
        );
    }
}
