//! Dense complex linear algebra for small multipartite operators.
//!
//! Matrices are stored row-major together with the list of subsystem
//! dimensions they act on, so partial traces and tensor products can be
//! expressed directly in terms of subsystem indices.

use std::fmt;
use std::ops::{Deref, Index, IndexMut};

use nalgebra::{DMatrix, SymmetricEigen};
use num_complex::Complex64;
use thiserror::Error;

pub type C64 = Complex64;

pub(crate) const ZERO: C64 = C64::new(0.0, 0.0);
pub(crate) const ONE: C64 = C64::new(1.0, 0.0);

#[derive(Debug, Error, Clone, PartialEq)]
pub enum QmatError {
    #[error("subsystem dimensions {dims:?} do not multiply to {dim}")]
    DimMismatch { dims: Vec<usize>, dim: usize },
    #[error("expected {expected} entries, got {got}")]
    EntryCount { expected: usize, got: usize },
    #[error("matrix dimensions differ: {0} vs {1}")]
    ShapeMismatch(usize, usize),
    #[error("matrix is not Hermitian (max |M - M^dag| = {deviation:e})")]
    NotHermitian { deviation: f64 },
    #[error("trace is {trace}, expected 1")]
    TraceNotOne { trace: f64 },
    #[error("matrix is not positive semidefinite (min eigenvalue {min_eigenvalue:e})")]
    NotPsd { min_eigenvalue: f64 },
    #[error("keep set is empty")]
    EmptyKeepSet,
    #[error("keep set covers every subsystem; nothing to trace out")]
    EmptyComplement,
    #[error("subsystem index {index} out of range for {count} subsystems")]
    IndexOutOfRange { index: usize, count: usize },
    #[error("subsystem index {0} listed twice")]
    DuplicateIndex(usize),
    #[error("exponent must be positive, got {0}")]
    NonPositiveExponent(f64),
}

/// Validation thresholds for density matrices.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Tolerances {
    pub herm_tol: f64,
    pub norm_tol: f64,
    pub psd_tol: f64,
}

impl Default for Tolerances {
    fn default() -> Self {
        Self {
            herm_tol: 1e-10,
            norm_tol: 1e-10,
            psd_tol: 1e-9,
        }
    }
}

/// Dense complex square matrix acting on a tensor product of subsystems.
#[derive(Clone, PartialEq)]
pub struct CMatrix {
    dim: usize,
    dims: Vec<usize>,
    data: Vec<C64>,
}

impl fmt::Debug for CMatrix {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        writeln!(f, "CMatrix(dims={:?})", self.dims)?;
        for i in 0..self.dim {
            let row: Vec<String> = (0..self.dim)
                .map(|j| {
                    let z = self[(i, j)];
                    format!("{:+.4}{:+.4}i", z.re, z.im)
                })
                .collect();
            writeln!(f, "  [{}]", row.join(", "))?;
        }
        Ok(())
    }
}

fn dims_product(dims: &[usize]) -> usize {
    dims.iter().product()
}

impl CMatrix {
    pub fn new(dims: Vec<usize>, data: Vec<C64>) -> Result<Self, QmatError> {
        let dim = dims_product(&dims);
        if dims.is_empty() || dims.contains(&0) {
            return Err(QmatError::DimMismatch { dims, dim });
        }
        if data.len() != dim * dim {
            return Err(QmatError::EntryCount {
                expected: dim * dim,
                got: data.len(),
            });
        }
        Ok(Self { dim, dims, data })
    }

    /// Single-subsystem matrix from row-major entries.
    pub fn from_rows(dim: usize, data: Vec<C64>) -> Result<Self, QmatError> {
        Self::new(vec![dim], data)
    }

    pub fn zeros(dims: &[usize]) -> Self {
        let dim = dims_product(dims);
        Self {
            dim,
            dims: dims.to_vec(),
            data: vec![ZERO; dim * dim],
        }
    }

    pub fn identity(dims: &[usize]) -> Self {
        let mut m = Self::zeros(dims);
        for i in 0..m.dim {
            m[(i, i)] = ONE;
        }
        m
    }

    pub fn from_diag(dims: &[usize], diag: &[f64]) -> Result<Self, QmatError> {
        let mut m = Self::zeros(dims);
        if diag.len() != m.dim {
            return Err(QmatError::EntryCount {
                expected: m.dim,
                got: diag.len(),
            });
        }
        for (i, &d) in diag.iter().enumerate() {
            m[(i, i)] = C64::new(d, 0.0);
        }
        Ok(m)
    }

    /// Outer product |v><v|.
    pub fn outer(dims: &[usize], v: &[C64]) -> Result<Self, QmatError> {
        let dim = dims_product(dims);
        if v.len() != dim {
            return Err(QmatError::EntryCount {
                expected: dim,
                got: v.len(),
            });
        }
        let mut data = Vec::with_capacity(dim * dim);
        for a in v {
            for b in v {
                data.push(a * b.conj());
            }
        }
        Ok(Self {
            dim,
            dims: dims.to_vec(),
            data,
        })
    }

    pub fn pauli_y() -> Self {
        Self {
            dim: 2,
            dims: vec![2],
            data: vec![ZERO, C64::new(0.0, -1.0), C64::new(0.0, 1.0), ZERO],
        }
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn subsystem_dims(&self) -> &[usize] {
        &self.dims
    }

    /// Row-major entries.
    pub fn entries(&self) -> &[C64] {
        &self.data
    }

    pub fn with_dims(mut self, dims: Vec<usize>) -> Result<Self, QmatError> {
        if dims_product(&dims) != self.dim || dims.contains(&0) {
            return Err(QmatError::DimMismatch {
                dims,
                dim: self.dim,
            });
        }
        self.dims = dims;
        Ok(self)
    }

    pub fn trace(&self) -> C64 {
        (0..self.dim).map(|i| self[(i, i)]).sum()
    }

    pub fn adjoint(&self) -> Self {
        let mut out = self.clone();
        for i in 0..self.dim {
            for j in 0..self.dim {
                out[(i, j)] = self[(j, i)].conj();
            }
        }
        out
    }

    /// Entrywise complex conjugate.
    pub fn conj(&self) -> Self {
        Self {
            dim: self.dim,
            dims: self.dims.clone(),
            data: self.data.iter().map(|z| z.conj()).collect(),
        }
    }

    pub fn matmul(&self, rhs: &Self) -> Result<Self, QmatError> {
        if self.dim != rhs.dim {
            return Err(QmatError::ShapeMismatch(self.dim, rhs.dim));
        }
        let n = self.dim;
        let mut out = Self::zeros(&self.dims);
        for i in 0..n {
            for k in 0..n {
                let a = self.data[i * n + k];
                if a == ZERO {
                    continue;
                }
                for j in 0..n {
                    out.data[i * n + j] += a * rhs.data[k * n + j];
                }
            }
        }
        Ok(out)
    }

    pub fn add(&self, rhs: &Self) -> Result<Self, QmatError> {
        if self.dim != rhs.dim {
            return Err(QmatError::ShapeMismatch(self.dim, rhs.dim));
        }
        let data = self.data.iter().zip(&rhs.data).map(|(a, b)| a + b).collect();
        Ok(Self {
            dim: self.dim,
            dims: self.dims.clone(),
            data,
        })
    }

    pub fn scale(&self, s: f64) -> Self {
        Self {
            dim: self.dim,
            dims: self.dims.clone(),
            data: self.data.iter().map(|z| z * s).collect(),
        }
    }

    /// U M U^dag.
    pub fn conjugate_by(&self, u: &Self) -> Result<Self, QmatError> {
        u.matmul(self)?.matmul(&u.adjoint())
    }

    /// Max-entry norm of `self - other`.
    pub fn max_abs_diff(&self, other: &Self) -> f64 {
        if self.dim != other.dim {
            return f64::INFINITY;
        }
        self.data
            .iter()
            .zip(&other.data)
            .map(|(a, b)| (a - b).norm())
            .fold(0.0, f64::max)
    }

    /// max |M - M^dag|.
    pub fn hermiticity_deviation(&self) -> f64 {
        let n = self.dim;
        let mut dev = 0.0f64;
        for i in 0..n {
            for j in i..n {
                dev = dev.max((self.data[i * n + j] - self.data[j * n + i].conj()).norm());
            }
        }
        dev
    }

    fn to_nalgebra(&self) -> DMatrix<C64> {
        DMatrix::from_row_slice(self.dim, self.dim, &self.data)
    }
}

impl Index<(usize, usize)> for CMatrix {
    type Output = C64;
    fn index(&self, (i, j): (usize, usize)) -> &C64 {
        &self.data[i * self.dim + j]
    }
}

impl IndexMut<(usize, usize)> for CMatrix {
    fn index_mut(&mut self, (i, j): (usize, usize)) -> &mut C64 {
        &mut self.data[i * self.dim + j]
    }
}

/// A validated density matrix: Hermitian, unit trace, positive semidefinite.
#[derive(Debug, Clone, PartialEq)]
pub struct DensityMatrix(CMatrix);

impl DensityMatrix {
    /// Wraps a matrix that is a density matrix by construction.
    pub(crate) fn from_trusted(m: CMatrix) -> Self {
        Self(m)
    }

    pub fn as_matrix(&self) -> &CMatrix {
        &self.0
    }

    pub fn into_matrix(self) -> CMatrix {
        self.0
    }

    /// Eigenvalues in descending order, clamped to [0, 1].
    pub fn spectrum(&self) -> Vec<f64> {
        // A density matrix is Hermitian by invariant, so this cannot fail.
        let eig = eigen_unchecked(&self.0);
        eig.values.into_iter().map(|v| v.clamp(0.0, 1.0)).collect()
    }

    /// Number of eigenvalues above `tol`.
    pub fn rank(&self, tol: f64) -> usize {
        self.spectrum().iter().filter(|&&v| v > tol).count()
    }
}

impl Deref for DensityMatrix {
    type Target = CMatrix;
    fn deref(&self) -> &CMatrix {
        &self.0
    }
}

/// Eigenvalues sorted descending with column-orthonormal eigenvectors.
#[derive(Debug, Clone)]
pub struct EigenSystem {
    pub values: Vec<f64>,
    /// Column `j` holds the eigenvector for `values[j]`.
    pub vectors: CMatrix,
}

impl EigenSystem {
    pub fn vector(&self, j: usize) -> Vec<C64> {
        let n = self.vectors.dim();
        (0..n).map(|i| self.vectors[(i, j)]).collect()
    }

    /// V f(Lambda) V^dag.
    pub fn reconstruct_with(&self, f: impl Fn(f64) -> f64) -> CMatrix {
        let n = self.vectors.dim();
        let mut out = CMatrix::zeros(self.vectors.subsystem_dims());
        for (k, &lam) in self.values.iter().enumerate() {
            let w = f(lam);
            if w == 0.0 {
                continue;
            }
            for i in 0..n {
                let vik = self.vectors[(i, k)] * w;
                for j in 0..n {
                    out[(i, j)] += vik * self.vectors[(j, k)].conj();
                }
            }
        }
        out
    }

    pub fn reconstruct(&self) -> CMatrix {
        self.reconstruct_with(|x| x)
    }
}

/// Kronecker product; subsystem lists are concatenated.
pub fn tensor(a: &CMatrix, b: &CMatrix) -> CMatrix {
    let (na, nb) = (a.dim, b.dim);
    let n = na * nb;
    let mut data = vec![ZERO; n * n];
    for i in 0..na {
        for j in 0..na {
            let aij = a.data[i * na + j];
            if aij == ZERO {
                continue;
            }
            for k in 0..nb {
                for l in 0..nb {
                    data[(i * nb + k) * n + j * nb + l] = aij * b.data[k * nb + l];
                }
            }
        }
    }
    let mut dims = a.dims.clone();
    dims.extend_from_slice(&b.dims);
    CMatrix { dim: n, dims, data }
}

/// Index bookkeeping for splitting a composite system into kept and traced
/// subsystems: full index = kept[k] + traced[t].
pub(crate) struct Split {
    pub kept: Vec<usize>,
    pub traced: Vec<usize>,
    pub kept_dims: Vec<usize>,
}

pub(crate) fn validate_keep(keep: &[usize], count: usize) -> Result<Vec<usize>, QmatError> {
    if keep.is_empty() {
        return Err(QmatError::EmptyKeepSet);
    }
    let mut sorted = keep.to_vec();
    sorted.sort_unstable();
    for w in sorted.windows(2) {
        if w[0] == w[1] {
            return Err(QmatError::DuplicateIndex(w[0]));
        }
    }
    if let Some(&bad) = sorted.iter().find(|&&i| i >= count) {
        return Err(QmatError::IndexOutOfRange { index: bad, count });
    }
    if sorted.len() == count {
        return Err(QmatError::EmptyComplement);
    }
    Ok(sorted)
}

fn offsets(dims: &[usize], strides: &[usize], which: &[usize]) -> Vec<usize> {
    let mut out = vec![0usize];
    for &s in which {
        let mut next = Vec::with_capacity(out.len() * dims[s]);
        for &base in &out {
            for digit in 0..dims[s] {
                next.push(base + digit * strides[s]);
            }
        }
        out = next;
    }
    out
}

/// `keep` must be sorted and valid.
pub(crate) fn split(dims: &[usize], keep: &[usize]) -> Split {
    let n = dims.len();
    let mut strides = vec![1usize; n];
    for s in (0..n.saturating_sub(1)).rev() {
        strides[s] = strides[s + 1] * dims[s + 1];
    }
    let rest: Vec<usize> = (0..n).filter(|s| !keep.contains(s)).collect();
    Split {
        kept: offsets(dims, &strides, keep),
        traced: offsets(dims, &strides, &rest),
        kept_dims: keep.iter().map(|&s| dims[s]).collect(),
    }
}

/// Partial trace of an arbitrary operator, keeping `keep` in original order.
pub fn partial_trace_matrix(m: &CMatrix, keep: &[usize]) -> Result<CMatrix, QmatError> {
    let keep = validate_keep(keep, m.dims.len())?;
    let sp = split(&m.dims, &keep);
    let dk = sp.kept.len();
    let mut out = CMatrix::zeros(&sp.kept_dims);
    for (a, &ka) in sp.kept.iter().enumerate() {
        for (b, &kb) in sp.kept.iter().enumerate() {
            let mut acc = ZERO;
            for &t in &sp.traced {
                acc += m[(ka + t, kb + t)];
            }
            out.data[a * dk + b] = acc;
        }
    }
    Ok(out)
}

/// Reduced density matrix over the subsystems in `keep`.
pub fn partial_trace(m: &DensityMatrix, keep: &[usize]) -> Result<DensityMatrix, QmatError> {
    partial_trace_matrix(&m.0, keep).map(DensityMatrix)
}

/// Reduction of |v><v| onto `keep` without forming the full projector.
/// The vector need not be normalized.
pub(crate) fn reduce_vector(v: &[C64], dims: &[usize], keep: &[usize]) -> Result<CMatrix, QmatError> {
    let keep = validate_keep(keep, dims.len())?;
    let sp = split(dims, &keep);
    let dk = sp.kept.len();
    let mut out = CMatrix::zeros(&sp.kept_dims);
    for (a, &ka) in sp.kept.iter().enumerate() {
        for b in a..dk {
            let kb = sp.kept[b];
            let mut acc = ZERO;
            for &t in &sp.traced {
                acc += v[ka + t] * v[kb + t].conj();
            }
            out.data[a * dk + b] = acc;
            out.data[b * dk + a] = acc.conj();
        }
    }
    Ok(out)
}

fn eigen_unchecked(m: &CMatrix) -> EigenSystem {
    let n = m.dim;
    let a = m.to_nalgebra();
    // Exact Hermitian symmetrization before the solver.
    let herm = (&a + a.adjoint()) * C64::new(0.5, 0.0);
    let se = SymmetricEigen::new(herm);
    let mut order: Vec<usize> = (0..n).collect();
    // Stable sort keeps original index order on ties.
    order.sort_by(|&i, &j| {
        se.eigenvalues[j]
            .partial_cmp(&se.eigenvalues[i])
            .unwrap_or(std::cmp::Ordering::Equal)
    });
    let values = order.iter().map(|&i| se.eigenvalues[i]).collect();
    let mut vectors = CMatrix::zeros(&m.dims);
    for (col, &src) in order.iter().enumerate() {
        for row in 0..n {
            vectors.data[row * n + col] = se.eigenvectors[(row, src)];
        }
    }
    EigenSystem { values, vectors }
}

pub fn hermitian_eigen(m: &CMatrix) -> Result<EigenSystem, QmatError> {
    hermitian_eigen_with(m, &Tolerances::default())
}

pub fn hermitian_eigen_with(m: &CMatrix, tol: &Tolerances) -> Result<EigenSystem, QmatError> {
    let deviation = m.hermiticity_deviation();
    if deviation > tol.herm_tol {
        return Err(QmatError::NotHermitian { deviation });
    }
    Ok(eigen_unchecked(m))
}

/// rho^p from the spectrum clamped to [0, 1].
pub fn mat_power(m: &DensityMatrix, p: f64) -> Result<CMatrix, QmatError> {
    if !(p > 0.0) {
        return Err(QmatError::NonPositiveExponent(p));
    }
    Ok(psd_power(&m.0, p))
}

/// Power of a PSD Hermitian matrix with negative round-off eigenvalues set to 0.
pub(crate) fn psd_power(m: &CMatrix, p: f64) -> CMatrix {
    eigen_unchecked(m).reconstruct_with(|x| if x > 0.0 { x.powf(p) } else { 0.0 })
}

pub(crate) fn hermitian_eigenvalues(m: &CMatrix) -> Vec<f64> {
    eigen_unchecked(m).values
}

/// Checks the density-matrix invariants in order: Hermiticity, unit trace,
/// positivity. Returns the first one violated.
pub fn validate_density(m: CMatrix, tol: &Tolerances) -> Result<DensityMatrix, QmatError> {
    let deviation = m.hermiticity_deviation();
    if !(deviation <= tol.herm_tol) {
        return Err(QmatError::NotHermitian { deviation });
    }
    let tr = m.trace();
    if !((tr.re - 1.0).abs() <= tol.norm_tol) || !(tr.im.abs() <= tol.norm_tol) {
        return Err(QmatError::TraceNotOne { trace: tr.re });
    }
    let min_eigenvalue = eigen_unchecked(&m).values.last().copied().unwrap_or(0.0);
    if !(min_eigenvalue >= -tol.psd_tol) {
        return Err(QmatError::NotPsd { min_eigenvalue });
    }
    Ok(DensityMatrix(m))
}
