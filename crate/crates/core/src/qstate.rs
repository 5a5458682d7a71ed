//! Dense complex linear algebra and quantum-state primitives for two- and
//! four-dimensional Hilbert spaces.
//!
//! Matrices are stored row-major. Everything here is small and allocation
//! happily; the hierarchy integrator keeps its own flat storage and only
//! crosses into these types at its boundaries.

use std::fmt;
use std::ops::{Add, Mul, Neg, Sub};

use faer::{Mat, Side};
use num_complex::Complex64 as C64;
use serde::{Deserialize, Serialize};
use thiserror::Error;

pub const I: C64 = C64 { re: 0.0, im: 1.0 };
pub const ONE: C64 = C64 { re: 1.0, im: 0.0 };
pub const ZERO: C64 = C64 { re: 0.0, im: 0.0 };

/// Elementwise Hermiticity tolerance for operators and densities.
pub const HERMITIAN_TOL: f64 = 1e-10;
/// Unit-trace tolerance of a [`DensityMatrix`].
pub const TRACE_TOL: f64 = 1e-10;
/// Most negative eigenvalue accepted in a [`DensityMatrix`].
pub const POSITIVITY_TOL: f64 = -1e-8;
/// Eigenvalues at or below this are dropped from the entropy sum.
pub const ENTROPY_CUTOFF: f64 = 1e-14;
/// Eigenvalue gap below which two eigenvalues are treated as degenerate.
pub const DEGENERACY_GAP: f64 = 1e-9;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum QStateError {
    #[error("unsupported dimension {0} (expected 2 or 4)")]
    UnsupportedDimension(usize),
    #[error("expected {expected} entries, got {got}")]
    BadEntryCount { expected: usize, got: usize },
    #[error("dimension mismatch: {left} vs {right}")]
    DimensionMismatch { left: usize, right: usize },
    #[error("matrix is not Hermitian (max |M - M^dag| = {deviation:.3e})")]
    NotHermitian { deviation: f64 },
    #[error("trace is {trace}, expected 1")]
    NotUnitTrace { trace: C64 },
    #[error("minimum eigenvalue {min_eigenvalue:.3e} is below {POSITIVITY_TOL:e}")]
    NotPositive { min_eigenvalue: f64 },
    #[error("basis vectors are not orthonormal (deviation {deviation:.3e})")]
    NotOrthonormal { deviation: f64 },
    #[error("eigendecomposition failed to converge")]
    EigenFailure,
}

pub type Result<T> = std::result::Result<T, QStateError>;

fn check_dim(dim: usize) -> Result<()> {
    match dim {
        2 | 4 => Ok(()),
        d => Err(QStateError::UnsupportedDimension(d)),
    }
}

/// A square complex matrix of dimension 2 or 4, row-major.
#[derive(Clone, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "RawMatrix", into = "RawMatrix")]
pub struct ComplexMatrix {
    dim: usize,
    data: Vec<C64>,
}

#[derive(Serialize, Deserialize)]
struct RawMatrix {
    dim: usize,
    re: Vec<f64>,
    im: Vec<f64>,
}

impl TryFrom<RawMatrix> for ComplexMatrix {
    type Error = QStateError;

    fn try_from(raw: RawMatrix) -> Result<Self> {
        if raw.re.len() != raw.im.len() {
            return Err(QStateError::BadEntryCount { expected: raw.re.len(), got: raw.im.len() });
        }
        let data = raw.re.iter().zip(&raw.im).map(|(&re, &im)| C64::new(re, im)).collect();
        ComplexMatrix::from_vec(raw.dim, data)
    }
}

impl From<ComplexMatrix> for RawMatrix {
    fn from(m: ComplexMatrix) -> Self {
        RawMatrix {
            dim: m.dim,
            re: m.data.iter().map(|z| z.re).collect(),
            im: m.data.iter().map(|z| z.im).collect(),
        }
    }
}

impl fmt::Debug for ComplexMatrix {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        writeln!(f, "ComplexMatrix({}x{}) [", self.dim, self.dim)?;
        for i in 0..self.dim {
            write!(f, "  ")?;
            for j in 0..self.dim {
                let z = self[(i, j)];
                write!(f, "{:+.6e}{:+.6e}i  ", z.re, z.im)?;
            }
            writeln!(f)?;
        }
        write!(f, "]")
    }
}

impl ComplexMatrix {
    pub fn zeros(dim: usize) -> Result<Self> {
        check_dim(dim)?;
        Ok(Self { dim, data: vec![ZERO; dim * dim] })
    }

    pub fn identity(dim: usize) -> Result<Self> {
        let mut m = Self::zeros(dim)?;
        for i in 0..dim {
            m[(i, i)] = ONE;
        }
        Ok(m)
    }

    pub fn from_vec(dim: usize, data: Vec<C64>) -> Result<Self> {
        check_dim(dim)?;
        if data.len() != dim * dim {
            return Err(QStateError::BadEntryCount { expected: dim * dim, got: data.len() });
        }
        Ok(Self { dim, data })
    }

    pub fn from_real(dim: usize, data: &[f64]) -> Result<Self> {
        Self::from_vec(dim, data.iter().map(|&x| C64::new(x, 0.0)).collect())
    }

    pub fn from_fn(dim: usize, f: impl Fn(usize, usize) -> C64) -> Result<Self> {
        check_dim(dim)?;
        let data = (0..dim * dim).map(|k| f(k / dim, k % dim)).collect();
        Ok(Self { dim, data })
    }

    pub fn diagonal(entries: &[C64]) -> Result<Self> {
        let dim = entries.len();
        let mut m = Self::zeros(dim)?;
        for (i, &z) in entries.iter().enumerate() {
            m[(i, i)] = z;
        }
        Ok(m)
    }

    /// Outer product `|a><b|`.
    pub fn outer(a: &[C64], b: &[C64]) -> Result<Self> {
        if a.len() != b.len() {
            return Err(QStateError::DimensionMismatch { left: a.len(), right: b.len() });
        }
        Self::from_fn(a.len(), |i, j| a[i] * b[j].conj())
    }

    /// Kronecker product of two 2x2 matrices.
    pub fn kron(a: &ComplexMatrix, b: &ComplexMatrix) -> Result<Self> {
        if a.dim != 2 || b.dim != 2 {
            return Err(QStateError::DimensionMismatch { left: a.dim, right: b.dim });
        }
        Self::from_fn(4, |i, j| a[(i / 2, j / 2)] * b[(i % 2, j % 2)])
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn as_slice(&self) -> &[C64] {
        &self.data
    }

    pub fn as_mut_slice(&mut self) -> &mut [C64] {
        &mut self.data
    }

    pub fn into_vec(self) -> Vec<C64> {
        self.data
    }

    pub fn adjoint(&self) -> Self {
        let n = self.dim;
        let mut out = self.clone();
        for i in 0..n {
            for j in 0..n {
                out.data[i * n + j] = self.data[j * n + i].conj();
            }
        }
        out
    }

    pub fn trace(&self) -> C64 {
        (0..self.dim).map(|i| self[(i, i)]).sum()
    }

    pub fn scale(&self, s: C64) -> Self {
        Self { dim: self.dim, data: self.data.iter().map(|&z| z * s).collect() }
    }

    pub fn scale_real(&self, s: f64) -> Self {
        Self { dim: self.dim, data: self.data.iter().map(|&z| z * s).collect() }
    }

    fn same_dim(&self, other: &Self) -> Result<()> {
        if self.dim == other.dim {
            Ok(())
        } else {
            Err(QStateError::DimensionMismatch { left: self.dim, right: other.dim })
        }
    }

    pub fn try_matmul(&self, other: &Self) -> Result<Self> {
        self.same_dim(other)?;
        let n = self.dim;
        let mut out = vec![ZERO; n * n];
        for i in 0..n {
            for k in 0..n {
                let a = self.data[i * n + k];
                if a == ZERO {
                    continue;
                }
                for j in 0..n {
                    out[i * n + j] += a * other.data[k * n + j];
                }
            }
        }
        Ok(Self { dim: n, data: out })
    }

    fn zip_with(&self, other: &Self, f: impl Fn(C64, C64) -> C64) -> Result<Self> {
        self.same_dim(other)?;
        let data = self.data.iter().zip(&other.data).map(|(&a, &b)| f(a, b)).collect();
        Ok(Self { dim: self.dim, data })
    }

    pub fn try_add(&self, other: &Self) -> Result<Self> {
        self.zip_with(other, |a, b| a + b)
    }

    pub fn try_sub(&self, other: &Self) -> Result<Self> {
        self.zip_with(other, |a, b| a - b)
    }

    /// `[self, other]`
    pub fn commutator(&self, other: &Self) -> Result<Self> {
        self.try_matmul(other)?.try_sub(&other.try_matmul(self)?)
    }

    /// `{self, other}`
    pub fn anticommutator(&self, other: &Self) -> Result<Self> {
        self.try_matmul(other)?.try_add(&other.try_matmul(self)?)
    }

    /// Largest elementwise modulus.
    pub fn max_abs(&self) -> f64 {
        self.data.iter().map(|z| z.norm()).fold(0.0, f64::max)
    }

    pub fn max_abs_diff(&self, other: &Self) -> Result<f64> {
        Ok(self.try_sub(other)?.max_abs())
    }

    pub fn hermiticity_deviation(&self) -> f64 {
        let n = self.dim;
        let mut dev: f64 = 0.0;
        for i in 0..n {
            for j in i..n {
                dev = dev.max((self.data[i * n + j] - self.data[j * n + i].conj()).norm());
            }
        }
        dev
    }

    pub fn is_hermitian(&self, tol: f64) -> bool {
        self.hermiticity_deviation() <= tol
    }

    /// `(M + M^dag) / 2`
    pub fn hermitian_part(&self) -> Self {
        let adj = self.adjoint();
        self.zip_with(&adj, |a, b| (a + b) * 0.5).expect("same dimension")
    }

    /// Matrix elements in `basis`: `M'_ij = <b_i| M |b_j>`.
    pub fn in_basis(&self, basis: &Basis) -> Result<Self> {
        self.same_dim(&basis.vectors)?;
        basis.vectors.adjoint().try_matmul(self)?.try_matmul(&basis.vectors)
    }

    /// Inverse of [`ComplexMatrix::in_basis`].
    pub fn from_basis(&self, basis: &Basis) -> Result<Self> {
        self.same_dim(&basis.vectors)?;
        basis.vectors.try_matmul(self)?.try_matmul(&basis.vectors.adjoint())
    }

    pub(crate) fn to_faer(&self) -> Mat<C64> {
        Mat::from_fn(self.dim, self.dim, |i, j| self[(i, j)])
    }
}

impl std::ops::Index<(usize, usize)> for ComplexMatrix {
    type Output = C64;

    fn index(&self, (i, j): (usize, usize)) -> &C64 {
        &self.data[i * self.dim + j]
    }
}

impl std::ops::IndexMut<(usize, usize)> for ComplexMatrix {
    fn index_mut(&mut self, (i, j): (usize, usize)) -> &mut C64 {
        &mut self.data[i * self.dim + j]
    }
}

// Operator impls panic on dimension mismatch; the `try_*` methods are the
// fallible forms.
impl Mul for &ComplexMatrix {
    type Output = ComplexMatrix;

    fn mul(self, rhs: &ComplexMatrix) -> ComplexMatrix {
        self.try_matmul(rhs).expect("matrix dimensions must agree")
    }
}

impl Add for &ComplexMatrix {
    type Output = ComplexMatrix;

    fn add(self, rhs: &ComplexMatrix) -> ComplexMatrix {
        self.try_add(rhs).expect("matrix dimensions must agree")
    }
}

impl Sub for &ComplexMatrix {
    type Output = ComplexMatrix;

    fn sub(self, rhs: &ComplexMatrix) -> ComplexMatrix {
        self.try_sub(rhs).expect("matrix dimensions must agree")
    }
}

impl Neg for &ComplexMatrix {
    type Output = ComplexMatrix;

    fn neg(self) -> ComplexMatrix {
        self.scale_real(-1.0)
    }
}

/// An orthonormal basis, stored as the unitary whose columns are the kets.
#[derive(Clone, Debug, PartialEq)]
pub struct Basis {
    vectors: ComplexMatrix,
}

impl Basis {
    /// Builds a basis from kets, checking orthonormality to 1e-12.
    pub fn from_kets(kets: &[Vec<C64>]) -> Result<Self> {
        let dim = kets.len();
        check_dim(dim)?;
        if let Some(bad) = kets.iter().find(|k| k.len() != dim) {
            return Err(QStateError::DimensionMismatch { left: dim, right: bad.len() });
        }
        let vectors = ComplexMatrix::from_fn(dim, |i, j| kets[j][i])?;
        let basis = Self { vectors };
        let deviation = basis.orthonormality_deviation();
        if deviation > 1e-12 {
            return Err(QStateError::NotOrthonormal { deviation });
        }
        Ok(basis)
    }

    pub fn computational(dim: usize) -> Result<Self> {
        Ok(Self { vectors: ComplexMatrix::identity(dim)? })
    }

    pub fn dim(&self) -> usize {
        self.vectors.dim
    }

    pub fn ket(&self, i: usize) -> Vec<C64> {
        (0..self.dim()).map(|r| self.vectors[(r, i)]).collect()
    }

    pub fn kets(&self) -> Vec<Vec<C64>> {
        (0..self.dim()).map(|i| self.ket(i)).collect()
    }

    /// Unitary with the kets as columns.
    pub fn unitary(&self) -> &ComplexMatrix {
        &self.vectors
    }

    /// `|b_i><b_i|`
    pub fn projector(&self, i: usize) -> ComplexMatrix {
        let k = self.ket(i);
        ComplexMatrix::outer(&k, &k).expect("ket has basis dimension")
    }

    pub fn orthonormality_deviation(&self) -> f64 {
        let gram = &self.vectors.adjoint() * &self.vectors;
        let id = ComplexMatrix::identity(self.dim()).expect("valid dim");
        gram.max_abs_diff(&id).expect("same dim")
    }
}

/// Ascending eigenvalues and matching eigenvectors of a Hermitian matrix.
#[derive(Clone, Debug)]
pub struct Eigensystem {
    pub values: Vec<f64>,
    pub vectors: Basis,
}

/// Eigendecomposition of a Hermitian matrix.
///
/// Eigenvalues come back ascending. Inside a degenerate cluster (gap below
/// [`DEGENERACY_GAP`]) the eigenvectors are rebuilt by projecting the
/// standard basis vectors, in order, onto the cluster's eigenspace and
/// Gram-Schmidt orthonormalizing, so the result does not depend on the
/// solver's arbitrary choice inside the eigenspace. Every eigenvector is then
/// rephased so that its largest-modulus component is real and positive.
pub fn hermitian_eigensystem(m: &ComplexMatrix) -> Result<Eigensystem> {
    let deviation = m.hermiticity_deviation();
    if deviation > HERMITIAN_TOL {
        return Err(QStateError::NotHermitian { deviation });
    }
    let n = m.dim();
    let evd = m
        .hermitian_part()
        .to_faer()
        .self_adjoint_eigen(Side::Lower)
        .map_err(|_| QStateError::EigenFailure)?;
    let s = evd.S().column_vector();
    let u = evd.U();
    let values: Vec<f64> = (0..n).map(|i| s[i].re).collect();
    let mut vecs: Vec<Vec<C64>> = (0..n).map(|j| (0..n).map(|i| u[(i, j)]).collect()).collect();

    let mut start = 0;
    while start < n {
        let mut end = start + 1;
        while end < n && values[end] - values[end - 1] < DEGENERACY_GAP {
            end += 1;
        }
        if end - start > 1 {
            let cluster = canonical_cluster_basis(&vecs[start..end], n);
            vecs.splice(start..end, cluster);
        }
        start = end;
    }
    for v in &mut vecs {
        fix_phase(v);
    }
    Ok(Eigensystem { values, vectors: Basis::from_kets(&vecs)? })
}

fn dot(a: &[C64], b: &[C64]) -> C64 {
    a.iter().zip(b).map(|(x, y)| x.conj() * y).sum()
}

fn canonical_cluster_basis(span: &[Vec<C64>], n: usize) -> Vec<Vec<C64>> {
    let mut out: Vec<Vec<C64>> = Vec::with_capacity(span.len());
    for col in 0..n {
        if out.len() == span.len() {
            break;
        }
        // projection of e_col onto the eigenspace
        let mut v = vec![ZERO; n];
        for s in span {
            let c = s[col].conj();
            for (vi, si) in v.iter_mut().zip(s) {
                *vi += c * si;
            }
        }
        for o in &out {
            let c = dot(o, &v);
            for (vi, oi) in v.iter_mut().zip(o) {
                *vi -= c * oi;
            }
        }
        let norm = dot(&v, &v).re.sqrt();
        if norm > 1e-6 {
            v.iter_mut().for_each(|z| *z /= norm);
            out.push(v);
        }
    }
    out
}

fn fix_phase(v: &mut [C64]) {
    let max = v.iter().map(|z| z.norm()).fold(0.0, f64::max);
    if let Some(pivot) = v.iter().find(|z| z.norm() >= max - 1e-12) {
        let phase = pivot.conj() / pivot.norm();
        v.iter_mut().for_each(|z| *z *= phase);
    }
}

/// Applies a real function to the spectrum of a Hermitian matrix.
pub fn hermitian_function(m: &ComplexMatrix, f: impl Fn(f64) -> f64) -> Result<ComplexMatrix> {
    let es = hermitian_eigensystem(m)?;
    let mapped: Vec<C64> = es.values.iter().map(|&x| C64::new(f(x), 0.0)).collect();
    ComplexMatrix::diagonal(&mapped)?.from_basis(&es.vectors)
}

/// Square root of a positive semidefinite matrix; eigenvalues below zero are
/// clipped to zero.
pub fn psd_sqrt(m: &ComplexMatrix) -> Result<ComplexMatrix> {
    hermitian_function(m, |x| x.max(0.0).sqrt())
}

/// A Hermitian, unit-trace, positive semidefinite matrix.
#[derive(Clone, Debug, PartialEq)]
pub struct DensityMatrix {
    matrix: ComplexMatrix,
}

impl DensityMatrix {
    pub fn new(matrix: ComplexMatrix) -> Result<Self> {
        let deviation = matrix.hermiticity_deviation();
        if deviation > HERMITIAN_TOL {
            return Err(QStateError::NotHermitian { deviation });
        }
        let trace = matrix.trace();
        if (trace - ONE).norm() > TRACE_TOL {
            return Err(QStateError::NotUnitTrace { trace });
        }
        let min_eigenvalue = hermitian_eigensystem(&matrix)?.values[0];
        if min_eigenvalue < POSITIVITY_TOL {
            return Err(QStateError::NotPositive { min_eigenvalue });
        }
        Ok(Self { matrix })
    }

    /// Hermitian part of `m` divided by its trace, then validated.
    pub fn normalized(m: &ComplexMatrix) -> Result<Self> {
        let h = m.hermitian_part();
        let tr = h.trace().re;
        Self::new(h.scale_real(1.0 / tr))
    }

    pub fn pure(ket: &[C64]) -> Result<Self> {
        let norm = dot(ket, ket).re.sqrt();
        let k: Vec<C64> = ket.iter().map(|z| z / norm).collect();
        Self::new(ComplexMatrix::outer(&k, &k)?)
    }

    pub fn maximally_mixed(dim: usize) -> Result<Self> {
        Self::new(ComplexMatrix::identity(dim)?.scale_real(1.0 / dim as f64))
    }

    pub fn from_probabilities(p: &[f64]) -> Result<Self> {
        let diag: Vec<C64> = p.iter().map(|&x| C64::new(x, 0.0)).collect();
        Self::new(ComplexMatrix::diagonal(&diag)?)
    }

    pub fn matrix(&self) -> &ComplexMatrix {
        &self.matrix
    }

    pub fn into_matrix(self) -> ComplexMatrix {
        self.matrix
    }

    pub fn dim(&self) -> usize {
        self.matrix.dim()
    }

    pub fn eigenvalues(&self) -> Vec<f64> {
        hermitian_eigensystem(&self.matrix).expect("validated Hermitian").values
    }
}

/// Von Neumann entropy in nats.
pub fn von_neumann_entropy(rho: &DensityMatrix) -> f64 {
    rho.eigenvalues()
        .into_iter()
        .filter(|&p| p > ENTROPY_CUTOFF)
        .map(|p| -p * p.ln())
        .sum()
}

/// Uhlmann fidelity `(Tr sqrt(sqrt(rho) sigma sqrt(rho)))^2`, clamped to [0, 1].
pub fn fidelity(rho: &DensityMatrix, sigma: &DensityMatrix) -> Result<f64> {
    rho.matrix.same_dim(&sigma.matrix)?;
    let sr = psd_sqrt(&rho.matrix)?;
    let inner = (&(&sr * &sigma.matrix) * &sr).hermitian_part();
    let root_trace: f64 = hermitian_eigensystem(&inner)?
        .values
        .iter()
        .map(|&x| x.max(0.0).sqrt())
        .sum();
    Ok((root_trace * root_trace).clamp(0.0, 1.0))
}

/// Half the trace norm of `rho - sigma`.
pub fn trace_distance(rho: &DensityMatrix, sigma: &DensityMatrix) -> Result<f64> {
    let diff = rho.matrix.try_sub(&sigma.matrix)?.hermitian_part();
    let values = hermitian_eigensystem(&diff)?.values;
    Ok(0.5 * values.iter().map(|x| x.abs()).sum::<f64>())
}

/// Pauli matrices and single-qubit ladder operators in the `(|up>, |down>)` basis.
pub mod pauli {
    use super::{ComplexMatrix, C64, I, ONE, ZERO};

    pub fn x() -> ComplexMatrix {
        ComplexMatrix::from_vec(2, vec![ZERO, ONE, ONE, ZERO]).unwrap()
    }

    pub fn y() -> ComplexMatrix {
        ComplexMatrix::from_vec(2, vec![ZERO, -I, I, ZERO]).unwrap()
    }

    pub fn z() -> ComplexMatrix {
        ComplexMatrix::from_vec(2, vec![ONE, ZERO, ZERO, -ONE]).unwrap()
    }

    /// sigma^+ = |up><down|
    pub fn raising() -> ComplexMatrix {
        ComplexMatrix::from_vec(2, vec![ZERO, ONE, ZERO, ZERO]).unwrap()
    }

    pub fn lowering() -> ComplexMatrix {
        ComplexMatrix::from_vec(2, vec![ZERO, ZERO, ONE, ZERO]).unwrap()
    }

    pub fn identity() -> ComplexMatrix {
        ComplexMatrix::identity(2).unwrap()
    }

    pub fn c(re: f64) -> C64 {
        C64::new(re, 0.0)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn close(a: f64, b: f64, tol: f64) -> bool {
        (a - b).abs() <= tol
    }

    #[test]
    fn rejects_bad_dimensions() {
        assert_eq!(ComplexMatrix::zeros(3), Err(QStateError::UnsupportedDimension(3)));
        assert!(matches!(
            ComplexMatrix::from_vec(2, vec![ZERO; 3]),
            Err(QStateError::BadEntryCount { expected: 4, got: 3 })
        ));
    }

    #[test]
    fn identity_eigenvalues() {
        let es = hermitian_eigensystem(&ComplexMatrix::identity(4).unwrap()).unwrap();
        assert_eq!(es.values, vec![1.0; 4]);
        // degenerate cluster resolves to the standard basis
        for i in 0..4 {
            for j in 0..4 {
                let expect = if i == j { 1.0 } else { 0.0 };
                assert!((es.vectors.ket(i)[j] - C64::new(expect, 0.0)).norm() < 1e-14);
            }
        }
    }

    #[test]
    fn sigma_x_eigensystem() {
        let es = hermitian_eigensystem(&pauli::x()).unwrap();
        assert!(close(es.values[0], -1.0, 1e-14) && close(es.values[1], 1.0, 1e-14));
        let h = std::f64::consts::FRAC_1_SQRT_2;
        let minus = es.vectors.ket(0);
        let plus = es.vectors.ket(1);
        // largest component (first, on a tie) real positive
        assert!((minus[0] - C64::new(h, 0.0)).norm() < 1e-14);
        assert!((minus[1] - C64::new(-h, 0.0)).norm() < 1e-14);
        assert!((plus[0] - C64::new(h, 0.0)).norm() < 1e-14);
        assert!((plus[1] - C64::new(h, 0.0)).norm() < 1e-14);
    }

    #[test]
    fn eigensystem_rejects_non_hermitian() {
        let m = ComplexMatrix::from_vec(2, vec![ZERO, ONE, ZERO, ZERO]).unwrap();
        assert!(matches!(hermitian_eigensystem(&m), Err(QStateError::NotHermitian { .. })));
    }

    #[test]
    fn eigenvectors_satisfy_eigen_equation() {
        let m = ComplexMatrix::from_vec(
            4,
            vec![
                C64::new(1.0, 0.0), C64::new(0.2, 0.3), C64::new(0.0, -1.0), C64::new(0.5, 0.0),
                C64::new(0.2, -0.3), C64::new(-2.0, 0.0), C64::new(0.1, 0.1), C64::new(0.0, 0.0),
                C64::new(0.0, 1.0), C64::new(0.1, -0.1), C64::new(0.5, 0.0), C64::new(0.3, 0.7),
                C64::new(0.5, 0.0), C64::new(0.0, 0.0), C64::new(0.3, -0.7), C64::new(3.0, 0.0),
            ],
        )
        .unwrap();
        let es = hermitian_eigensystem(&m).unwrap();
        assert!(es.values.windows(2).all(|w| w[0] <= w[1]));
        for (i, &lam) in es.values.iter().enumerate() {
            let v = es.vectors.ket(i);
            for r in 0..4 {
                let mv: C64 = (0..4).map(|c| m[(r, c)] * v[c]).sum();
                assert!((mv - v[r] * lam).norm() < 1e-10);
            }
        }
    }

    #[test]
    fn degenerate_cluster_is_deterministic() {
        // diag(1, 1) block rotated by a unitary: any orthonormal pair spans it
        let h = std::f64::consts::FRAC_1_SQRT_2;
        let u = ComplexMatrix::from_real(2, &[h, h, h, -h]).unwrap();
        let m = &(&u * &ComplexMatrix::identity(2).unwrap()) * &u.adjoint();
        let es = hermitian_eigensystem(&m).unwrap();
        assert!((es.vectors.ket(0)[0] - ONE).norm() < 1e-12);
        assert!((es.vectors.ket(1)[1] - ONE).norm() < 1e-12);
    }

    #[test]
    fn entropy_examples() {
        let pure = DensityMatrix::pure(&[ONE, ZERO, ZERO, ZERO]).unwrap();
        assert!(close(von_neumann_entropy(&pure), 0.0, 1e-14));
        let mixed = DensityMatrix::maximally_mixed(4).unwrap();
        assert!(close(von_neumann_entropy(&mixed), 4f64.ln(), 1e-12));
        let p = DensityMatrix::from_probabilities(&[0.141, 0.359, 0.359, 0.141]).unwrap();
        // -2 (0.141 ln 0.141 + 0.359 ln 0.359)
        let expect = -2.0 * (0.141 * 0.141f64.ln() + 0.359 * 0.359f64.ln());
        assert!(close(von_neumann_entropy(&p), expect, 1e-12));
        assert!(close(expect, 1.288, 5e-4));
    }

    #[test]
    fn fidelity_examples() {
        let e1 = DensityMatrix::pure(&[ONE, ZERO, ZERO, ZERO]).unwrap();
        let e2 = DensityMatrix::pure(&[ZERO, ONE, ZERO, ZERO]).unwrap();
        assert!(close(fidelity(&e1, &e1).unwrap(), 1.0, 1e-12));
        assert!(close(fidelity(&e1, &e2).unwrap(), 0.0, 1e-12));
        let p = DensityMatrix::from_probabilities(&[0.5, 0.5, 0.0, 0.0]).unwrap();
        let q = DensityMatrix::maximally_mixed(4).unwrap();
        assert!(close(fidelity(&p, &q).unwrap(), 0.5, 1e-12));
        assert!(close(fidelity(&q, &p).unwrap(), 0.5, 1e-12));
    }

    #[test]
    fn fidelity_dimension_mismatch() {
        let a = DensityMatrix::maximally_mixed(2).unwrap();
        let b = DensityMatrix::maximally_mixed(4).unwrap();
        assert_eq!(
            fidelity(&a, &b),
            Err(QStateError::DimensionMismatch { left: 2, right: 4 })
        );
        assert!(trace_distance(&a, &b).is_err());
    }

    #[test]
    fn trace_distance_examples() {
        let e1 = DensityMatrix::pure(&[ONE, ZERO, ZERO, ZERO]).unwrap();
        let e2 = DensityMatrix::pure(&[ZERO, ONE, ZERO, ZERO]).unwrap();
        assert!(close(trace_distance(&e1, &e1).unwrap(), 0.0, 1e-14));
        assert!(close(trace_distance(&e1, &e2).unwrap(), 1.0, 1e-12));
        let a = DensityMatrix::from_probabilities(&[1.0, 0.0]).unwrap();
        let b = DensityMatrix::from_probabilities(&[0.5, 0.5]).unwrap();
        assert!(close(trace_distance(&a, &b).unwrap(), 0.5, 1e-14));
    }

    #[test]
    fn density_validation() {
        let not_unit = ComplexMatrix::identity(2).unwrap();
        assert!(matches!(DensityMatrix::new(not_unit), Err(QStateError::NotUnitTrace { .. })));
        let negative = ComplexMatrix::from_real(2, &[1.5, 0.0, 0.0, -0.5]).unwrap();
        assert!(matches!(DensityMatrix::new(negative), Err(QStateError::NotPositive { .. })));
        let skew = ComplexMatrix::from_real(2, &[0.5, 0.1, 0.0, 0.5]).unwrap();
        assert!(matches!(DensityMatrix::new(skew), Err(QStateError::NotHermitian { .. })));
    }

    #[test]
    fn pauli_algebra() {
        let (x, y, z) = (pauli::x(), pauli::y(), pauli::z());
        let xz = x.commutator(&z).unwrap();
        let expect = y.scale(C64::new(0.0, -2.0));
        assert!(xz.max_abs_diff(&expect).unwrap() < 1e-15);
        assert!(pauli::raising().adjoint() == pauli::lowering());
    }

    #[test]
    fn serde_roundtrip_matrix() {
        let m = pauli::y();
        let s = serde_json::to_string(&m).unwrap();
        let back: ComplexMatrix = serde_json::from_str(&s).unwrap();
        assert_eq!(m, back);
    }
}
