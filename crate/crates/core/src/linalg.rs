// Copyright 2026 The monotonic-control Authors
// SPDX-License-Identifier: Apache-2.0

//! Dense complex linear algebra for `2^n`-dimensional spin systems.
//!
//! Everything here is sized for small chains (dimension at most 64), so all
//! storage is dense. Matrix exponentials are only ever taken of Hermitian
//! generators and go through a Hermitian eigendecomposition, which keeps every
//! propagator unitary up to roundoff.

use std::ops::{Add, Mul, Sub};
use std::sync::atomic::{AtomicU64, Ordering};

use nalgebra::{DMatrix, DVector, SymmetricEigen};
use num_complex::Complex64;

use crate::error::{Error, Result};

pub type C64 = Complex64;

const HERMITIAN_TOL: f64 = 1e-12;
const UNITARY_TOL: f64 = 1e-10;

static TOLERANCE_SCALE: AtomicU64 = AtomicU64::new(0x3FF0_0000_0000_0000); // 1.0

/// Multiplier applied to every predicate tolerance in this module.
pub fn tolerance_scale() -> f64 {
    f64::from_bits(TOLERANCE_SCALE.load(Ordering::Relaxed))
}

/// Sets the global tolerance multiplier. Non-positive or non-finite values are ignored.
pub fn set_tolerance_scale(scale: f64) {
    if scale.is_finite() && scale > 0.0 {
        TOLERANCE_SCALE.store(scale.to_bits(), Ordering::Relaxed);
    }
}

/// Dense square complex matrix.
#[derive(Debug, Clone, PartialEq)]
pub struct ComplexMatrix(DMatrix<C64>);

impl ComplexMatrix {
    pub fn zeros(dim: usize) -> Self {
        assert!(dim >= 1, "matrix dimension must be positive");
        Self(DMatrix::zeros(dim, dim))
    }

    pub fn identity(dim: usize) -> Self {
        assert!(dim >= 1, "matrix dimension must be positive");
        Self(DMatrix::identity(dim, dim))
    }

    /// Builds a matrix from row-major entries.
    pub fn from_row_slice(dim: usize, entries: &[C64]) -> Result<Self> {
        if dim == 0 || entries.len() != dim * dim {
            return Err(Error::DimensionMismatch {
                expected: dim * dim,
                found: entries.len(),
            });
        }
        Ok(Self(DMatrix::from_row_slice(dim, dim, entries)))
    }

    pub fn from_real_rows(rows: &[&[f64]]) -> Result<Self> {
        let dim = rows.len();
        let entries: Vec<C64> = rows
            .iter()
            .flat_map(|r| r.iter().map(|&x| C64::new(x, 0.0)))
            .collect();
        Self::from_row_slice(dim, &entries)
    }

    pub fn from_diagonal(diag: &[C64]) -> Self {
        assert!(!diag.is_empty(), "matrix dimension must be positive");
        Self(DMatrix::from_diagonal(&DVector::from_column_slice(diag)))
    }

    pub fn from_fn(dim: usize, f: impl FnMut(usize, usize) -> C64) -> Self {
        assert!(dim >= 1, "matrix dimension must be positive");
        Self(DMatrix::from_fn(dim, dim, f))
    }

    /// Wraps a square nalgebra matrix.
    pub fn from_matrix(m: DMatrix<C64>) -> Result<Self> {
        if m.nrows() == 0 || m.nrows() != m.ncols() {
            return Err(Error::DimensionMismatch {
                expected: m.nrows(),
                found: m.ncols(),
            });
        }
        Ok(Self(m))
    }

    pub fn dim(&self) -> usize {
        self.0.nrows()
    }

    pub fn get(&self, row: usize, col: usize) -> C64 {
        self.0[(row, col)]
    }

    pub fn as_matrix(&self) -> &DMatrix<C64> {
        &self.0
    }

    pub fn into_matrix(self) -> DMatrix<C64> {
        self.0
    }

    pub fn adjoint(&self) -> Self {
        Self(self.0.adjoint())
    }

    pub fn scale(&self, factor: C64) -> Self {
        Self(&self.0 * factor)
    }

    pub fn trace(&self) -> C64 {
        self.0.trace()
    }

    pub fn max_abs(&self) -> f64 {
        self.0.iter().map(|z| z.norm()).fold(0.0, f64::max)
    }

    /// Largest entrywise modulus of `self - other`.
    pub fn max_abs_diff(&self, other: &Self) -> f64 {
        self.0
            .iter()
            .zip(other.0.iter())
            .map(|(a, b)| (a - b).norm())
            .fold(0.0, f64::max)
    }

    pub fn hermitian_deviation(&self) -> f64 {
        let n = self.dim();
        let mut dev = 0.0f64;
        for i in 0..n {
            for j in 0..=i {
                dev = dev.max((self.0[(i, j)] - self.0[(j, i)].conj()).norm());
            }
        }
        dev
    }

    pub fn is_hermitian(&self) -> bool {
        self.hermitian_deviation() <= HERMITIAN_TOL * tolerance_scale() * self.max_abs().max(1.0)
    }

    /// `max |U†U - I|`.
    pub fn unitarity_defect(&self) -> f64 {
        let g = self.0.adjoint() * &self.0;
        let n = self.dim();
        let mut dev = 0.0f64;
        for i in 0..n {
            for j in 0..n {
                let id = if i == j { 1.0 } else { 0.0 };
                dev = dev.max((g[(i, j)] - id).norm());
            }
        }
        dev
    }

    pub fn is_unitary(&self) -> bool {
        self.unitarity_defect() <= UNITARY_TOL * tolerance_scale()
    }

    pub fn commutator(&self, other: &Self) -> Self {
        Self(&self.0 * &other.0 - &other.0 * &self.0)
    }

    /// True when the matrix is diagonal to exact zero off-diagonal entries.
    pub fn is_diagonal(&self) -> bool {
        let n = self.dim();
        (0..n).all(|i| (0..n).all(|j| i == j || self.0[(i, j)] == C64::new(0.0, 0.0)))
    }
}

impl<'a> Mul<&'a ComplexMatrix> for &'a ComplexMatrix {
    type Output = ComplexMatrix;
    fn mul(self, rhs: &'a ComplexMatrix) -> ComplexMatrix {
        ComplexMatrix(&self.0 * &rhs.0)
    }
}

impl<'a> Add<&'a ComplexMatrix> for &'a ComplexMatrix {
    type Output = ComplexMatrix;
    fn add(self, rhs: &'a ComplexMatrix) -> ComplexMatrix {
        ComplexMatrix(&self.0 + &rhs.0)
    }
}

impl<'a> Sub<&'a ComplexMatrix> for &'a ComplexMatrix {
    type Output = ComplexMatrix;
    fn sub(self, rhs: &'a ComplexMatrix) -> ComplexMatrix {
        ComplexMatrix(&self.0 - &rhs.0)
    }
}

/// Pure state amplitudes, stored as a single-column matrix.
#[derive(Debug, Clone, PartialEq)]
pub struct StateVector(DMatrix<C64>);

impl StateVector {
    pub fn from_amplitudes(amplitudes: &[C64]) -> Result<Self> {
        if amplitudes.is_empty() {
            return Err(Error::DimensionMismatch {
                expected: 1,
                found: 0,
            });
        }
        Ok(Self(DMatrix::from_column_slice(
            amplitudes.len(),
            1,
            amplitudes,
        )))
    }

    /// Computational basis state `|index⟩`.
    pub fn basis(dim: usize, index: usize) -> Result<Self> {
        if index >= dim {
            return Err(Error::DimensionMismatch {
                expected: dim,
                found: index,
            });
        }
        let mut m = DMatrix::zeros(dim, 1);
        m[(index, 0)] = C64::new(1.0, 0.0);
        Ok(Self(m))
    }

    pub fn dim(&self) -> usize {
        self.0.nrows()
    }

    pub fn amplitudes(&self) -> &[C64] {
        self.0.as_slice()
    }

    pub fn norm(&self) -> f64 {
        self.0.iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt()
    }

    /// `⟨self|other⟩`.
    pub fn inner(&self, other: &Self) -> Result<C64> {
        frobenius_inner(&self.0, &other.0)
    }

    pub fn apply(&self, op: &ComplexMatrix) -> Result<Self> {
        if op.dim() != self.dim() {
            return Err(Error::DimensionMismatch {
                expected: self.dim(),
                found: op.dim(),
            });
        }
        Ok(Self(&op.0 * &self.0))
    }
}

/// Objects evolved by the Schrödinger equation: states or evolution operators.
///
/// Both are stored as `dim × c` column blocks (`c = 1` for states, `c = dim`
/// for operators), so one propagation code path serves both.
pub trait Propagand: Clone + Send + Sync + 'static {
    const IS_OPERATOR: bool;

    fn block(&self) -> &DMatrix<C64>;

    /// Wraps a block produced by propagation; shape is preserved by construction.
    fn from_block(block: DMatrix<C64>) -> Self;

    fn dim(&self) -> usize {
        self.block().nrows()
    }

    /// Number of columns; the normalization of trace overlaps.
    fn width(&self) -> usize {
        self.block().ncols()
    }

    /// Deviation from a physical value: unitarity defect or `| ‖ψ‖ - 1 |`.
    fn physical_defect(&self) -> f64;
}

impl Propagand for ComplexMatrix {
    const IS_OPERATOR: bool = true;

    fn block(&self) -> &DMatrix<C64> {
        &self.0
    }

    fn from_block(block: DMatrix<C64>) -> Self {
        Self(block)
    }

    fn physical_defect(&self) -> f64 {
        self.unitarity_defect()
    }
}

impl Propagand for StateVector {
    const IS_OPERATOR: bool = false;

    fn block(&self) -> &DMatrix<C64> {
        &self.0
    }

    fn from_block(block: DMatrix<C64>) -> Self {
        Self(block)
    }

    fn physical_defect(&self) -> f64 {
        (self.norm() - 1.0).abs()
    }
}

pub mod pauli {
    use super::{ComplexMatrix, C64};

    const O: C64 = C64::new(0.0, 0.0);
    const ONE: C64 = C64::new(1.0, 0.0);
    const I: C64 = C64::new(0.0, 1.0);

    pub fn identity() -> ComplexMatrix {
        ComplexMatrix::identity(2)
    }

    pub fn x() -> ComplexMatrix {
        ComplexMatrix::from_row_slice(2, &[O, ONE, ONE, O]).unwrap()
    }

    pub fn y() -> ComplexMatrix {
        ComplexMatrix::from_row_slice(2, &[O, -I, I, O]).unwrap()
    }

    pub fn z() -> ComplexMatrix {
        ComplexMatrix::from_row_slice(2, &[ONE, O, O, -ONE]).unwrap()
    }
}

/// Kronecker product `a ⊗ b`.
pub fn kron(a: &ComplexMatrix, b: &ComplexMatrix) -> ComplexMatrix {
    ComplexMatrix(a.0.kronecker(&b.0))
}

/// `I ⊗ … ⊗ op ⊗ … ⊗ I` with `op` on spin `site` (1-based) of an `spins`-spin chain.
///
/// Spin 1 is the leftmost factor, i.e. the most significant bit of the basis index.
pub fn embed_site_operator(op: &ComplexMatrix, site: usize, spins: usize) -> Result<ComplexMatrix> {
    if op.dim() != 2 {
        return Err(Error::DimensionMismatch {
            expected: 2,
            found: op.dim(),
        });
    }
    if site == 0 || site > spins {
        return Err(Error::SiteOutOfRange { site, spins });
    }
    let left = ComplexMatrix::identity(1 << (site - 1));
    let right = ComplexMatrix::identity(1 << (spins - site));
    Ok(kron(&kron(&left, op), &right))
}

/// `exp(-i θ H)` for Hermitian `H`.
pub fn unitary_step(h: &ComplexMatrix, theta: f64) -> Result<ComplexMatrix> {
    Ok(HermitianSpectrum::of(h)?.step_matrix(theta))
}

/// `Tr[A† B]`.
pub fn trace_inner(a: &ComplexMatrix, b: &ComplexMatrix) -> Result<C64> {
    frobenius_inner(&a.0, &b.0)
}

pub(crate) fn frobenius_inner(a: &DMatrix<C64>, b: &DMatrix<C64>) -> Result<C64> {
    if a.shape() != b.shape() {
        return Err(Error::DimensionMismatch {
            expected: a.nrows() * a.ncols(),
            found: b.nrows() * b.ncols(),
        });
    }
    Ok(a.iter().zip(b.iter()).map(|(x, y)| x.conj() * y).sum())
}

/// Eigendecomposition `H = Q Λ Q†` of a Hermitian matrix.
///
/// Propagators `exp(-iθH)` for any θ come from the same spectrum, which is
/// what lets the duration change without re-diagonalizing.
#[derive(Debug, Clone)]
pub struct HermitianSpectrum {
    vectors: DMatrix<C64>,
    values: Vec<f64>,
}

impl HermitianSpectrum {
    pub fn of(h: &ComplexMatrix) -> Result<Self> {
        if !h.is_hermitian() {
            return Err(Error::NotHermitian {
                deviation: h.hermitian_deviation(),
            });
        }
        Ok(Self::of_hermitian(h.0.clone()))
    }

    /// Caller guarantees `h` is Hermitian; only the lower triangle is read.
    pub(crate) fn of_hermitian(h: DMatrix<C64>) -> Self {
        let eig = SymmetricEigen::new(h);
        Self {
            vectors: eig.eigenvectors,
            values: eig.eigenvalues.iter().copied().collect(),
        }
    }

    pub fn dim(&self) -> usize {
        self.values.len()
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    pub fn vectors(&self) -> &DMatrix<C64> {
        &self.vectors
    }

    /// `e^{-iθλ_a}` for every eigenvalue.
    pub fn phases(&self, theta: f64) -> Vec<C64> {
        self.values
            .iter()
            .map(|&l| C64::from_polar(1.0, -theta * l))
            .collect()
    }

    pub fn step_matrix(&self, theta: f64) -> ComplexMatrix {
        let phases = self.phases(theta);
        let mut scaled = self.vectors.clone();
        for (j, mut col) in scaled.column_iter_mut().enumerate() {
            col *= phases[j];
        }
        ComplexMatrix(scaled * self.vectors.adjoint())
    }

    /// `exp(-iθH) x` without forming the propagator.
    pub fn propagate(&self, theta: f64, x: &DMatrix<C64>) -> DMatrix<C64> {
        let mut coeffs = self.vectors.ad_mul(x);
        self.scale_rows(&mut coeffs, theta);
        &self.vectors * coeffs
    }

    /// Rows of `coeffs` (eigenbasis coordinates) times `e^{-iθλ}`.
    pub(crate) fn scale_rows(&self, coeffs: &mut DMatrix<C64>, theta: f64) {
        let phases = self.phases(theta);
        for (i, mut row) in coeffs.row_iter_mut().enumerate() {
            row *= phases[i];
        }
    }

    /// Divided differences of `x ↦ e^{-iθx}` over the eigenvalues.
    ///
    /// The Fréchet derivative of `exp(-iθH)` in direction `D` is
    /// `Q (L ∘ Q†DQ) Q†` with `L` this matrix. Written with a sinc so that
    /// near-degenerate pairs stay accurate.
    pub fn exp_divided_differences(&self, theta: f64) -> DMatrix<C64> {
        let n = self.dim();
        DMatrix::from_fn(n, n, |a, b| {
            let (la, lb) = (self.values[a], self.values[b]);
            let mid = 0.5 * (la + lb);
            let half = 0.5 * theta * (la - lb);
            let sinc = if half.abs() < 1e-8 {
                1.0 - half * half / 6.0
            } else {
                half.sin() / half
            };
            C64::new(0.0, -theta) * C64::from_polar(sinc, -theta * mid)
        })
    }
}
