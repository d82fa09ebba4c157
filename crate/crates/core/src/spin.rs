// Copyright 2026 The monotonic-control Authors
// SPDX-License-Identifier: Apache-2.0

//! Ising-coupled spin chains with local x/y controls, and gate targets.

use crate::error::{Error, Result};
use crate::linalg::{embed_site_operator, pauli, ComplexMatrix, C64};

/// Drift `H₀` plus the control operators of an `n`-spin chain.
///
/// Controls are ordered `(1x, 1y, 2x, 2y, …)`; every field array in the crate
/// follows that channel order.
#[derive(Debug, Clone)]
pub struct SpinChainModel {
    spins: usize,
    coupling: f64,
    drift: ComplexMatrix,
    controls: Vec<ComplexMatrix>,
    labels: Vec<String>,
    sparse_controls: Vec<Vec<(usize, usize, C64)>>,
}

impl SpinChainModel {
    pub fn new(spins: usize, coupling: f64) -> Result<Self> {
        if spins == 0 {
            return Err(Error::InvalidModel(
                "a chain needs at least one spin".into(),
            ));
        }
        if spins > 6 {
            return Err(Error::InvalidModel(format!(
                "{spins} spins exceeds the dense-matrix limit of 6"
            )));
        }
        let labels = (1..=spins)
            .flat_map(|j| [format!("{j}x"), format!("{j}y")])
            .collect();
        Self::from_parts(
            spins,
            coupling,
            build_drift(spins, coupling),
            build_controls(spins),
            labels,
        )
    }

    /// Model with caller-supplied operators; all must be Hermitian and `2^spins`-dimensional.
    pub fn from_parts(
        spins: usize,
        coupling: f64,
        drift: ComplexMatrix,
        controls: Vec<ComplexMatrix>,
        labels: Vec<String>,
    ) -> Result<Self> {
        let dim = 1usize << spins;
        if controls.is_empty() {
            return Err(Error::InvalidModel(
                "at least one control operator is required".into(),
            ));
        }
        if labels.len() != controls.len() {
            return Err(Error::InvalidModel(
                "one label per control channel is required".into(),
            ));
        }
        for op in std::iter::once(&drift).chain(controls.iter()) {
            if op.dim() != dim {
                return Err(Error::DimensionMismatch {
                    expected: dim,
                    found: op.dim(),
                });
            }
            if !op.is_hermitian() {
                return Err(Error::NotHermitian {
                    deviation: op.hermitian_deviation(),
                });
            }
        }
        let sparse_controls = controls
            .iter()
            .map(|op| {
                let m = op.as_matrix();
                let mut entries = Vec::new();
                for r in 0..dim {
                    for c in 0..dim {
                        if m[(r, c)] != C64::new(0.0, 0.0) {
                            entries.push((r, c, m[(r, c)]));
                        }
                    }
                }
                entries
            })
            .collect();
        Ok(Self {
            spins,
            coupling,
            drift,
            controls,
            labels,
            sparse_controls,
        })
    }

    pub fn spins(&self) -> usize {
        self.spins
    }

    pub fn dim(&self) -> usize {
        self.drift.dim()
    }

    pub fn coupling(&self) -> f64 {
        self.coupling
    }

    pub fn drift(&self) -> &ComplexMatrix {
        &self.drift
    }

    pub fn controls(&self) -> &[ComplexMatrix] {
        &self.controls
    }

    pub fn channel_count(&self) -> usize {
        self.controls.len()
    }

    /// Channel names such as `1x`, `2y`.
    pub fn channel_labels(&self) -> &[String] {
        &self.labels
    }

    /// Nonzero entries `(row, col, value)` of control `channel`.
    pub(crate) fn sparse_control(&self, channel: usize) -> &[(usize, usize, C64)] {
        &self.sparse_controls[channel]
    }

    /// `H₀ + Σ_j amplitudes[j]·H_j`.
    pub fn hamiltonian(&self, amplitudes: &[f64]) -> ComplexMatrix {
        debug_assert_eq!(amplitudes.len(), self.controls.len());
        let mut h = self.drift.as_matrix().clone();
        for (j, &e) in amplitudes.iter().enumerate() {
            if e == 0.0 {
                continue;
            }
            for &(r, c, v) in &self.sparse_controls[j] {
                h[(r, c)] += v * e;
            }
        }
        ComplexMatrix::from_matrix(h).expect("square by construction")
    }
}

/// `coupling · Σ_j σ_z^{(j)} σ_z^{(j+1)}`; zero for a single spin.
pub fn build_drift(spins: usize, coupling: f64) -> ComplexMatrix {
    let dim = 1usize << spins;
    // Diagonal entry of basis state b: each aligned neighbor pair gives +1, anti-aligned -1.
    let diag: Vec<C64> = (0..dim)
        .map(|b| {
            let bit = |site: usize| (b >> (spins - site)) & 1;
            let sum: f64 = (1..spins)
                .map(|j| if bit(j) == bit(j + 1) { 1.0 } else { -1.0 })
                .sum();
            C64::new(coupling * sum, 0.0)
        })
        .collect();
    ComplexMatrix::from_diagonal(&diag)
}

/// Local controls `σ_x, σ_y` on each spin in channel order `(1x, 1y, 2x, 2y, …)`.
pub fn build_controls(spins: usize) -> Vec<ComplexMatrix> {
    let (x, y) = (pauli::x(), pauli::y());
    (1..=spins)
        .flat_map(|site| {
            [
                embed_site_operator(&x, site, spins).expect("site in range"),
                embed_site_operator(&y, site, spins).expect("site in range"),
            ]
        })
        .collect()
}

/// Target evolution operator for gate synthesis.
#[derive(Debug, Clone)]
pub struct GateTarget {
    matrix: ComplexMatrix,
    label: String,
}

impl GateTarget {
    pub fn new(matrix: ComplexMatrix, label: impl Into<String>) -> Result<Self> {
        if matrix.unitarity_defect() > 1e-12 {
            return Err(Error::InvalidModel("gate target must be unitary".into()));
        }
        Ok(Self {
            matrix,
            label: label.into(),
        })
    }

    pub fn matrix(&self) -> &ComplexMatrix {
        &self.matrix
    }

    pub fn label(&self) -> &str {
        &self.label
    }

    pub fn dim(&self) -> usize {
        self.matrix.dim()
    }

    /// Largest `Re Tr[target† U] / dim` over `U` with `det U = 1`.
    ///
    /// Traceless drift and controls only generate such `U`, so this caps the
    /// phase-sensitive fidelity. The optimum spreads the phase of
    /// `det(target)^*` evenly over all eigenvalues of `target† U`.
    pub fn special_unitary_bound(&self) -> f64 {
        let det = self.matrix.as_matrix().determinant();
        let dim = self.dim() as f64;
        // Branch of arg(det*) closest to zero, split over `dim` eigenphases.
        let phase = (-det.arg()).rem_euclid(2.0 * std::f64::consts::PI);
        let phase = phase.min(2.0 * std::f64::consts::PI - phase);
        (phase / dim).cos()
    }
}

/// `C^{n-1}NOT` with qubit `j` on spin `j`: swaps `|1…10⟩ ↔ |1…11⟩`.
pub fn build_cnnot(spins: usize) -> Result<GateTarget> {
    if spins < 2 {
        return Err(Error::InvalidModel(format!(
            "C^(n-1)NOT needs at least 2 spins, got {spins}"
        )));
    }
    let dim = 1usize << spins;
    let (a, b) = (dim - 2, dim - 1);
    let perm = |i: usize| {
        if i == a {
            b
        } else if i == b {
            a
        } else {
            i
        }
    };
    let m = ComplexMatrix::from_fn(dim, |r, c| {
        if perm(c) == r {
            C64::new(1.0, 0.0)
        } else {
            C64::new(0.0, 0.0)
        }
    });
    let label = if spins == 2 {
        "CNOT".to_string()
    } else {
        format!("C{}NOT", spins - 1)
    };
    GateTarget::new(m, label)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn diag(values: &[f64]) -> ComplexMatrix {
        let d: Vec<C64> = values.iter().map(|&v| C64::new(v, 0.0)).collect();
        ComplexMatrix::from_diagonal(&d)
    }

    #[test]
    fn drift_examples() {
        assert_eq!(build_drift(2, 1.0), diag(&[1., -1., -1., 1.]));
        assert_eq!(build_drift(1, 1.0), ComplexMatrix::zeros(2));
        assert_eq!(
            build_drift(3, 1.0),
            diag(&[2., 0., -2., 0., 0., -2., 0., 2.])
        );
        assert_eq!(build_drift(2, 0.5), diag(&[0.5, -0.5, -0.5, 0.5]));
    }

    #[test]
    fn drift_equals_sum_of_embedded_zz() {
        for n in 2..=4 {
            let mut sum = ComplexMatrix::zeros(1 << n);
            for j in 1..n {
                let zj = embed_site_operator(&pauli::z(), j, n).unwrap();
                let zk = embed_site_operator(&pauli::z(), j + 1, n).unwrap();
                sum = &sum + &(&zj * &zk);
            }
            assert_eq!(build_drift(n, 1.0), sum);
        }
    }

    #[test]
    fn control_examples() {
        let c1 = build_controls(1);
        assert_eq!(c1, vec![pauli::x(), pauli::y()]);
        let c2 = build_controls(2);
        assert_eq!(c2.len(), 4);
        assert_eq!(c2[0], crate::linalg::kron(&pauli::x(), &pauli::identity()));
        assert_eq!(c2[3], crate::linalg::kron(&pauli::identity(), &pauli::y()));
    }

    #[test]
    fn model_invariants() {
        for n in 1..=4 {
            let model = SpinChainModel::new(n, 1.0).unwrap();
            assert_eq!(model.channel_count(), 2 * n);
            assert!(model.drift().is_hermitian() && model.drift().is_diagonal());
            for (idx, h) in model.controls().iter().enumerate() {
                assert!(h.is_hermitian());
                assert_eq!(h.trace(), C64::new(0.0, 0.0));
                let site = idx / 2 + 1;
                let z = embed_site_operator(&pauli::z(), site, n).unwrap();
                // Anticommutes with σ_z on its own site.
                assert_eq!(&z * h, &h.scale(C64::new(-1.0, 0.0)) * &z);
                // Commutes with σ_z on every other site.
                for other in (1..=n).filter(|&s| s != site) {
                    let zo = embed_site_operator(&pauli::z(), other, n).unwrap();
                    assert_eq!(&zo * h, h * &zo);
                }
            }
            for site in 1..=n {
                let z = embed_site_operator(&pauli::z(), site, n).unwrap();
                assert_eq!(model.drift().commutator(&z), ComplexMatrix::zeros(1 << n));
            }
            assert_eq!(model.channel_labels()[1], "1y");
        }
    }

    #[test]
    fn hamiltonian_assembly() {
        let model = SpinChainModel::new(2, 1.0).unwrap();
        let e = [0.3, -0.2, 0.0, 1.1];
        let mut expected = model.drift().clone();
        for (j, h) in model.controls().iter().enumerate() {
            expected = &expected + &h.scale(C64::new(e[j], 0.0));
        }
        assert!(model.hamiltonian(&e).max_abs_diff(&expected) < 1e-15);
    }

    #[test]
    fn cnot_matches_truth_table() {
        let g = build_cnnot(2).unwrap();
        let expected = ComplexMatrix::from_real_rows(&[
            &[1., 0., 0., 0.],
            &[0., 1., 0., 0.],
            &[0., 0., 0., 1.],
            &[0., 0., 1., 0.],
        ])
        .unwrap();
        assert_eq!(g.matrix(), &expected);
        assert_eq!(g.matrix() * g.matrix(), ComplexMatrix::identity(4));
        assert_eq!(g.label(), "CNOT");
    }

    #[test]
    fn c3not_truth_table() {
        let g = build_cnnot(4).unwrap();
        // Brute force: flip bit 4 (least significant) iff bits 1..3 are all one.
        for input in 0..16usize {
            let controls_set = (input >> 1) == 0b111;
            let output = if controls_set { input ^ 1 } else { input };
            for row in 0..16 {
                let expected = if row == output { 1.0 } else { 0.0 };
                assert_eq!(g.matrix().get(row, input), C64::new(expected, 0.0));
            }
        }
        let m = g.matrix();
        assert_eq!(m * m, ComplexMatrix::identity(16));
        assert_eq!(m.adjoint(), *m);
        assert_eq!(g.label(), "C3NOT");
    }

    #[test]
    fn special_unitary_bounds() {
        let quarter = std::f64::consts::FRAC_PI_4;
        assert!((build_cnnot(2).unwrap().special_unitary_bound() - quarter.cos()).abs() < 1e-14);
        assert!(
            (build_cnnot(3).unwrap().special_unitary_bound() - (quarter / 2.0).cos()).abs() < 1e-14
        );
        let c3 = build_cnnot(4).unwrap().special_unitary_bound();
        assert!((c3 - (std::f64::consts::PI / 16.0).cos()).abs() < 1e-14);
        let id = GateTarget::new(ComplexMatrix::identity(4), "I").unwrap();
        assert!((id.special_unitary_bound() - 1.0).abs() < 1e-15);
        // e^{iπ/4} CNOT has unit determinant and is reachable exactly.
        let lifted = build_cnnot(2)
            .unwrap()
            .matrix()
            .scale(C64::from_polar(1.0, quarter));
        let lifted = GateTarget::new(lifted, "lifted").unwrap();
        assert!((lifted.special_unitary_bound() - 1.0).abs() < 1e-14);
    }

    #[test]
    fn cnnot_requires_two_spins() {
        assert!(build_cnnot(1).is_err());
        assert!(SpinChainModel::new(0, 1.0).is_err());
    }
}
