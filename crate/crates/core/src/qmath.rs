//! Dense complex linear algebra and information measures.
//!
//! Everything here is a pure function over immutable values. Entropies are in
//! bits. Basis vectors are stored 0-based in memory; the erasure flag of a
//! `d`-dimensional input occupies the last index `d` of the `(d+1)`-dimensional
//! output space.

use std::f64::consts::PI;
use std::ops::{Add, Mul, Sub};

use nalgebra::{DMatrix, DVector};
use num_complex::Complex64;

use crate::error::{Error, Result};

/// Tolerance for structural checks (Hermiticity, trace, eigenvalue clipping).
pub const STRUCTURAL_TOL: f64 = 1e-9;
/// Tolerance for normalization of classical distributions and pure states.
pub const NORMALIZATION_TOL: f64 = 1e-12;

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Tolerances {
    pub structural: f64,
    pub normalization: f64,
}

impl Default for Tolerances {
    fn default() -> Self {
        Self {
            structural: STRUCTURAL_TOL,
            normalization: NORMALIZATION_TOL,
        }
    }
}

/// Dense complex matrix of arbitrary shape.
#[derive(Clone, Debug, PartialEq)]
pub struct ComplexMatrix(DMatrix<Complex64>);

impl ComplexMatrix {
    pub fn zeros(rows: usize, cols: usize) -> Self {
        Self(DMatrix::zeros(rows, cols))
    }

    pub fn identity(n: usize) -> Self {
        Self(DMatrix::identity(n, n))
    }

    /// Builds a matrix from entries listed in row-major order.
    pub fn from_row_major(rows: usize, cols: usize, entries: Vec<Complex64>) -> Result<Self> {
        if entries.len() != rows * cols {
            return Err(Error::Shape(format!(
                "{} entries cannot fill a {rows}x{cols} matrix",
                entries.len()
            )));
        }
        if entries.iter().any(|z| !z.re.is_finite() || !z.im.is_finite()) {
            return Err(Error::Shape("matrix entries must be finite".into()));
        }
        Ok(Self(DMatrix::from_row_slice(rows, cols, &entries)))
    }

    pub fn from_real_diagonal(diag: &[f64]) -> Self {
        let n = diag.len();
        Self(DMatrix::from_fn(n, n, |r, c| {
            if r == c {
                Complex64::new(diag[r], 0.0)
            } else {
                Complex64::new(0.0, 0.0)
            }
        }))
    }

    pub fn from_fn(rows: usize, cols: usize, f: impl FnMut(usize, usize) -> Complex64) -> Self {
        Self(DMatrix::from_fn(rows, cols, f))
    }

    /// `|v><v|`
    pub fn outer(v: &PureStateVec) -> Self {
        let a = v.as_vector();
        Self(a * a.adjoint())
    }

    pub fn from_inner(m: DMatrix<Complex64>) -> Self {
        Self(m)
    }

    pub fn inner(&self) -> &DMatrix<Complex64> {
        &self.0
    }

    pub fn into_inner(self) -> DMatrix<Complex64> {
        self.0
    }

    pub fn rows(&self) -> usize {
        self.0.nrows()
    }

    pub fn cols(&self) -> usize {
        self.0.ncols()
    }

    pub fn is_square(&self) -> bool {
        self.rows() == self.cols()
    }

    pub fn get(&self, row: usize, col: usize) -> Complex64 {
        self.0[(row, col)]
    }

    pub fn scale(&self, factor: f64) -> Self {
        Self(self.0.map(|z| z * factor))
    }

    pub fn adjoint(&self) -> Self {
        Self(self.0.adjoint())
    }

    pub fn kron(&self, other: &Self) -> Self {
        Self(self.0.kronecker(&other.0))
    }

    pub fn trace(&self) -> Complex64 {
        self.0.trace()
    }

    /// Largest entrywise modulus of `M - M^H`; infinite for non-square input.
    pub fn hermitian_deviation(&self) -> f64 {
        if !self.is_square() {
            return f64::INFINITY;
        }
        let n = self.rows();
        let mut worst = 0.0_f64;
        for r in 0..n {
            for c in r..n {
                let d = (self.0[(r, c)] - self.0[(c, r)].conj()).norm();
                worst = worst.max(d);
            }
        }
        worst
    }

    pub fn max_abs_diff(&self, other: &Self) -> f64 {
        assert_eq!(self.0.shape(), other.0.shape(), "shape mismatch");
        self.0
            .iter()
            .zip(other.0.iter())
            .map(|(a, b)| (a - b).norm())
            .fold(0.0, f64::max)
    }

    /// Eigenvalues of a Hermitian matrix, ascending. Only the Hermitian part
    /// is read, so callers must check Hermiticity first.
    pub fn hermitian_eigenvalues(&self) -> Vec<f64> {
        let mut ev: Vec<f64> = self.0.clone().symmetric_eigenvalues().iter().copied().collect();
        ev.sort_by(f64::total_cmp);
        ev
    }
}

impl Add for &ComplexMatrix {
    type Output = ComplexMatrix;
    fn add(self, rhs: &ComplexMatrix) -> ComplexMatrix {
        ComplexMatrix(&self.0 + &rhs.0)
    }
}

impl Sub for &ComplexMatrix {
    type Output = ComplexMatrix;
    fn sub(self, rhs: &ComplexMatrix) -> ComplexMatrix {
        ComplexMatrix(&self.0 - &rhs.0)
    }
}

impl Mul for &ComplexMatrix {
    type Output = ComplexMatrix;
    fn mul(self, rhs: &ComplexMatrix) -> ComplexMatrix {
        ComplexMatrix(&self.0 * &rhs.0)
    }
}

/// Zero-pads both operands to the elementwise-maximum shape and adds them.
pub fn boxplus(a: &ComplexMatrix, b: &ComplexMatrix) -> ComplexMatrix {
    let rows = a.rows().max(b.rows());
    let cols = a.cols().max(b.cols());
    let mut out = DMatrix::zeros(rows, cols);
    out.view_mut((0, 0), (a.rows(), a.cols())).copy_from(&a.0);
    let mut tl = out.view_mut((0, 0), (b.rows(), b.cols()));
    tl += &b.0;
    ComplexMatrix(out)
}

/// A classical distribution over `len()` symbols; entry `i` is the mass of
/// symbol `i + 1`.
#[derive(Clone, Debug, PartialEq)]
pub struct ProbVec(Vec<f64>);

impl ProbVec {
    pub fn new(values: Vec<f64>) -> Result<Self> {
        Self::with_tolerance(values, NORMALIZATION_TOL)
    }

    pub fn with_tolerance(values: Vec<f64>, tol: f64) -> Result<Self> {
        if values.is_empty() {
            return Err(Error::ProbVec("empty distribution".into()));
        }
        if let Some(v) = values.iter().find(|v| !v.is_finite() || **v < 0.0) {
            return Err(Error::ProbVec(format!("entry {v} is not a finite non-negative number")));
        }
        let sum: f64 = values.iter().sum();
        if (sum - 1.0).abs() > tol {
            return Err(Error::ProbVec(format!("entries sum to {sum}, expected 1")));
        }
        Ok(Self(values))
    }

    pub fn uniform(len: usize) -> Self {
        assert!(len > 0, "uniform distribution needs at least one symbol");
        Self(vec![1.0 / len as f64; len])
    }

    /// Point mass on the 0-based index `i`, i.e. e^(i+1).
    pub fn unit(len: usize, i: usize) -> Self {
        assert!(i < len, "unit index {i} out of range for length {len}");
        let mut v = vec![0.0; len];
        v[i] = 1.0;
        Self(v)
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }

    pub fn values(&self) -> &[f64] {
        &self.0
    }

    pub fn into_values(self) -> Vec<f64> {
        self.0
    }
}

/// Normalized state vector.
#[derive(Clone, Debug, PartialEq)]
pub struct PureStateVec(DVector<Complex64>);

impl PureStateVec {
    pub fn new(amplitudes: Vec<Complex64>) -> Result<Self> {
        let norm2: f64 = amplitudes.iter().map(|z| z.norm_sqr()).sum();
        if (norm2 - 1.0).abs() > NORMALIZATION_TOL {
            return Err(Error::Shape(format!("state has squared norm {norm2}, expected 1")));
        }
        Ok(Self(DVector::from_vec(amplitudes)))
    }

    pub fn basis(dim: usize, k: usize) -> Self {
        assert!(k < dim);
        let mut v = DVector::zeros(dim);
        v[k] = Complex64::new(1.0, 0.0);
        Self(v)
    }

    pub fn dim(&self) -> usize {
        self.0.len()
    }

    pub fn amplitudes(&self) -> &[Complex64] {
        self.0.as_slice()
    }

    pub fn as_vector(&self) -> &DVector<Complex64> {
        &self.0
    }

    pub fn inner_product(&self, other: &Self) -> Complex64 {
        self.0.dotc(&other.0)
    }
}

/// Validated density operator: Hermitian, unit trace, positive semidefinite.
#[derive(Clone, Debug, PartialEq)]
pub struct DensityOperator {
    matrix: ComplexMatrix,
}

impl DensityOperator {
    pub fn new(matrix: ComplexMatrix) -> Result<Self> {
        Self::with_tolerances(matrix, &Tolerances::default())
    }

    pub fn with_tolerances(matrix: ComplexMatrix, tol: &Tolerances) -> Result<Self> {
        if !matrix.is_square() {
            return Err(Error::Shape(format!(
                "density operator must be square, got {}x{}",
                matrix.rows(),
                matrix.cols()
            )));
        }
        let deviation = matrix.hermitian_deviation();
        if deviation > tol.structural {
            return Err(Error::NotHermitian { deviation });
        }
        let trace = matrix.trace();
        if (trace.re - 1.0).abs() > tol.structural || trace.im.abs() > tol.structural {
            return Err(Error::Trace { trace: trace.re });
        }
        if let Some(&min) = matrix.hermitian_eigenvalues().first() {
            if min < -tol.structural {
                return Err(Error::NegativeEigenvalue { value: min });
            }
        }
        Ok(Self { matrix })
    }

    /// Skips validation; only for operators that are valid by construction.
    pub(crate) fn from_trusted(matrix: ComplexMatrix) -> Self {
        debug_assert!(matrix.is_square());
        Self { matrix }
    }

    pub fn pure(state: &PureStateVec) -> Self {
        Self::from_trusted(ComplexMatrix::outer(state))
    }

    pub fn maximally_mixed(dim: usize) -> Self {
        Self::from_trusted(ComplexMatrix::identity(dim).scale(1.0 / dim as f64))
    }

    /// Computational basis projector `|k><k|`, 0-based `k`.
    pub fn basis_projector(dim: usize, k: usize) -> Self {
        Self::pure(&PureStateVec::basis(dim, k))
    }

    pub fn dim(&self) -> usize {
        self.matrix.rows()
    }

    pub fn matrix(&self) -> &ComplexMatrix {
        &self.matrix
    }

    pub fn into_matrix(self) -> ComplexMatrix {
        self.matrix
    }

    /// Spectrum with round-off negatives clipped to zero.
    pub fn eigenvalues(&self) -> Vec<f64> {
        self.matrix
            .hermitian_eigenvalues()
            .into_iter()
            .map(|v| v.max(0.0))
            .collect()
    }

    pub fn entropy(&self) -> f64 {
        entropy_bits(&self.eigenvalues())
    }

    /// Born probability `<v|rho|v>`.
    pub fn expectation(&self, v: &PureStateVec) -> f64 {
        let a = v.as_vector();
        (a.adjoint() * self.matrix.inner() * a)[(0, 0)].re
    }
}

/// `x log2 x` with the `0 log 0 = 0` convention.
#[inline]
pub fn xlog2x(x: f64) -> f64 {
    if x > 0.0 {
        x * x.log2()
    } else {
        0.0
    }
}

/// Shannon entropy in bits of a non-negative weight list (not renormalized).
pub fn entropy_bits(weights: &[f64]) -> f64 {
    -weights.iter().map(|&w| xlog2x(w)).sum::<f64>()
}

pub fn shannon_entropy(p: &ProbVec) -> f64 {
    entropy_bits(p.values())
}

/// Von Neumann entropy in bits of a Hermitian PSD matrix.
pub fn von_neumann_entropy(m: &ComplexMatrix) -> Result<f64> {
    if !m.is_square() {
        return Err(Error::Shape(format!("expected a square matrix, got {}x{}", m.rows(), m.cols())));
    }
    let deviation = m.hermitian_deviation();
    if deviation > STRUCTURAL_TOL {
        return Err(Error::NotHermitian { deviation });
    }
    let ev = m.hermitian_eigenvalues();
    if let Some(&min) = ev.first() {
        if min < -STRUCTURAL_TOL {
            return Err(Error::NegativeEigenvalue { value: min });
        }
    }
    let clipped: Vec<f64> = ev.into_iter().map(|v| v.max(0.0)).collect();
    Ok(entropy_bits(&clipped))
}

/// Schatten 1-norm. Hermitian input goes through the eigen-decomposition,
/// anything else through the SVD.
pub fn trace_norm(m: &ComplexMatrix) -> Result<f64> {
    if !m.is_square() {
        return Err(Error::Shape(format!(
            "trace norm needs a square matrix, got {}x{}",
            m.rows(),
            m.cols()
        )));
    }
    if m.hermitian_deviation() <= STRUCTURAL_TOL {
        Ok(m.hermitian_eigenvalues().iter().map(|v| v.abs()).sum())
    } else {
        Ok(m.inner().clone().singular_values().iter().sum())
    }
}

/// Generalized Pauli shift `X|k> = |k+1 mod d>`.
pub fn pauli_x(d: usize) -> ComplexMatrix {
    ComplexMatrix::from_fn(d, d, |r, c| {
        if r == (c + 1) % d {
            Complex64::new(1.0, 0.0)
        } else {
            Complex64::new(0.0, 0.0)
        }
    })
}

/// Generalized Pauli clock `Z|k> = exp(2 pi i k / d)|k>` (0-based `k`).
pub fn pauli_z(d: usize) -> ComplexMatrix {
    ComplexMatrix::from_fn(d, d, |r, c| {
        if r == c {
            Complex64::from_polar(1.0, 2.0 * PI * r as f64 / d as f64)
        } else {
            Complex64::new(0.0, 0.0)
        }
    })
}

/// Maximally entangled state `(X^i Z^j ⊗ I)|phi_00>` on `C^d ⊗ C^d`, with the
/// sender's qudit as the first tensor factor (index `a * d + b`).
pub fn bell_state(d: usize, i: usize, j: usize) -> Result<PureStateVec> {
    if d < 2 {
        return Err(Error::IndexOutOfRange(format!("Bell basis needs d >= 2, got {d}")));
    }
    if i >= d || j >= d {
        return Err(Error::IndexOutOfRange(format!("Bell index ({i}, {j}) outside [0, {d})")));
    }
    let norm = 1.0 / (d as f64).sqrt();
    let mut amps = vec![Complex64::new(0.0, 0.0); d * d];
    for k in 0..d {
        let phase = 2.0 * PI * ((j * k) % d) as f64 / d as f64;
        amps[((k + i) % d) * d + k] = Complex64::from_polar(norm, phase);
    }
    Ok(PureStateVec(DVector::from_vec(amps)))
}
