//! Dense complex Hermitian linear algebra.
//!
//! [`HermitianOperator`] certifies Hermiticity at construction; [`DensityMatrix`]
//! additionally certifies unit trace and positivity. [`spectral_decompose`]
//! groups raw eigenvalues into distinct clusters with orthogonal projectors,
//! which is the spectral data every perturbative quantity is built from.

use std::ops::{Add, Mul, Neg, Sub};

use nalgebra::{DMatrix, SymmetricEigen};
use num_complex::Complex64;

use crate::error::{Error, Result};
use crate::tolerances::Tolerances;

pub type C64 = Complex64;
pub type CMatrix = DMatrix<C64>;

pub(crate) fn c(re: f64) -> C64 {
    C64::new(re, 0.0)
}

/// Eigenvalues (ascending) and matching eigenvector columns of a Hermitian matrix.
pub(crate) fn hermitian_eigen(m: &CMatrix) -> Result<(Vec<f64>, CMatrix)> {
    let n = m.nrows();
    let eig = SymmetricEigen::try_new(m.clone(), f64::EPSILON, 100_000).ok_or(Error::EigenFailure)?;
    if eig.eigenvalues.iter().any(|v| !v.is_finite()) {
        return Err(Error::EigenFailure);
    }
    let mut order: Vec<usize> = (0..n).collect();
    order.sort_by(|&a, &b| eig.eigenvalues[a].total_cmp(&eig.eigenvalues[b]));
    let values = order.iter().map(|&i| eig.eigenvalues[i]).collect();
    let mut vectors = CMatrix::zeros(n, n);
    for (dst, &src) in order.iter().enumerate() {
        vectors.set_column(dst, &eig.eigenvectors.column(src));
    }
    Ok((values, vectors))
}

fn check_square(m: &CMatrix) -> Result<()> {
    if m.nrows() == 0 || m.nrows() != m.ncols() {
        return Err(Error::NotSquare {
            rows: m.nrows(),
            cols: m.ncols(),
        });
    }
    Ok(())
}

/// Complex square matrix equal to its conjugate transpose.
#[derive(Debug, Clone, PartialEq)]
pub struct HermitianOperator {
    entries: CMatrix,
}

impl HermitianOperator {
    pub fn new(m: CMatrix) -> Result<Self> {
        Self::with_tolerance(m, Tolerances::default().herm)
    }

    /// Symmetrizes `m` after checking `‖m − m†‖_F ≤ tol·‖m‖_F`.
    pub fn with_tolerance(m: CMatrix, tol: f64) -> Result<Self> {
        check_square(&m)?;
        let adjoint = m.adjoint();
        let residual = (&m - &adjoint).norm();
        let allowed = tol * m.norm();
        if residual > allowed {
            return Err(Error::NotHermitian {
                residual,
                tolerance: allowed,
            });
        }
        Ok(Self::symmetrized(m))
    }

    /// For matrices Hermitian by construction (sums of `K X K†` and similar).
    pub(crate) fn symmetrized(m: CMatrix) -> Self {
        let adjoint = m.adjoint();
        Self {
            entries: (m + adjoint) * c(0.5),
        }
    }

    pub fn zeros(dim: usize) -> Self {
        Self {
            entries: CMatrix::zeros(dim, dim),
        }
    }

    pub fn identity(dim: usize) -> Self {
        Self {
            entries: CMatrix::identity(dim, dim),
        }
    }

    pub fn from_real_diagonal(diag: &[f64]) -> Self {
        let n = diag.len();
        Self {
            entries: CMatrix::from_fn(n, n, |i, j| if i == j { c(diag[i]) } else { C64::default() }),
        }
    }

    /// `|u⟩⟨v| + |v⟩⟨u|` style builders go through this: the outer product `|v⟩⟨v|`.
    pub fn outer(v: &[C64]) -> Self {
        let n = v.len();
        Self {
            entries: CMatrix::from_fn(n, n, |i, j| v[i] * v[j].conj()),
        }
    }

    pub fn from_real_rows(rows: &[&[f64]]) -> Result<Self> {
        let n = rows.len();
        if rows.iter().any(|r| r.len() != n) {
            return Err(Error::NotSquare {
                rows: n,
                cols: rows.first().map_or(0, |r| r.len()),
            });
        }
        Self::new(CMatrix::from_fn(n, n, |i, j| c(rows[i][j])))
    }

    pub fn dim(&self) -> usize {
        self.entries.nrows()
    }

    pub fn matrix(&self) -> &CMatrix {
        &self.entries
    }

    pub fn into_matrix(self) -> CMatrix {
        self.entries
    }

    pub fn trace(&self) -> f64 {
        self.entries.diagonal().iter().map(|z| z.re).sum()
    }

    pub fn frobenius_norm(&self) -> f64 {
        self.entries.norm()
    }

    pub fn scale(&self, factor: f64) -> Self {
        Self {
            entries: &self.entries * c(factor),
        }
    }

    /// `Re Tr(self · other)`; exact for Hermitian pairs up to round-off.
    pub fn trace_product(&self, other: &HermitianOperator) -> f64 {
        trace_product(&self.entries, &other.entries)
    }

    pub fn kron(&self, other: &HermitianOperator) -> Self {
        Self {
            entries: self.entries.kronecker(&other.entries),
        }
    }

    /// `U · self · U†`.
    pub fn conjugate_by(&self, u: &CMatrix) -> Self {
        Self::symmetrized(u * &self.entries * u.adjoint())
    }

    /// Compression `P · self · P` by another Hermitian operator.
    pub fn sandwich(&self, p: &HermitianOperator) -> Self {
        Self::symmetrized(&p.entries * &self.entries * &p.entries)
    }

    /// Eigenvalues in ascending order.
    pub fn eigenvalues(&self) -> Result<Vec<f64>> {
        hermitian_eigen(&self.entries).map(|(v, _)| v)
    }
}

/// `Re Tr(a · b)` without forming the product.
pub(crate) fn trace_product(a: &CMatrix, b: &CMatrix) -> f64 {
    let n = a.nrows();
    let mut acc = 0.0;
    for i in 0..n {
        for k in 0..n {
            acc += (a[(i, k)] * b[(k, i)]).re;
        }
    }
    acc
}

impl Add for &HermitianOperator {
    type Output = HermitianOperator;
    fn add(self, rhs: Self) -> HermitianOperator {
        HermitianOperator {
            entries: &self.entries + &rhs.entries,
        }
    }
}

impl Sub for &HermitianOperator {
    type Output = HermitianOperator;
    fn sub(self, rhs: Self) -> HermitianOperator {
        HermitianOperator {
            entries: &self.entries - &rhs.entries,
        }
    }
}

impl Neg for &HermitianOperator {
    type Output = HermitianOperator;
    fn neg(self) -> HermitianOperator {
        self.scale(-1.0)
    }
}

impl Mul<f64> for &HermitianOperator {
    type Output = HermitianOperator;
    fn mul(self, rhs: f64) -> HermitianOperator {
        self.scale(rhs)
    }
}

/// Unit-trace positive semi-definite operator.
#[derive(Debug, Clone, PartialEq)]
pub struct DensityMatrix {
    op: HermitianOperator,
}

impl DensityMatrix {
    pub fn new(op: HermitianOperator) -> Result<Self> {
        Self::with_tolerances(op, &Tolerances::default())
    }

    pub fn with_tolerances(op: HermitianOperator, tol: &Tolerances) -> Result<Self> {
        let trace = op.trace();
        if (trace - 1.0).abs() > tol.trace {
            return Err(Error::TraceMismatch {
                trace,
                tolerance: tol.trace,
            });
        }
        let min = op.eigenvalues()?[0];
        if min < -tol.psd {
            return Err(Error::NotPositive { min_eigenvalue: min });
        }
        Ok(Self { op })
    }

    pub fn from_matrix(m: CMatrix) -> Result<Self> {
        Self::new(HermitianOperator::new(m)?)
    }

    pub fn maximally_mixed(dim: usize) -> Self {
        Self {
            op: HermitianOperator::identity(dim).scale(1.0 / dim as f64),
        }
    }

    /// Pure state from a (not necessarily normalized) ket.
    pub fn pure(ket: &[C64]) -> Result<Self> {
        let norm: f64 = ket.iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt();
        if norm == 0.0 || !norm.is_finite() {
            return Err(Error::TraceMismatch {
                trace: norm,
                tolerance: 0.0,
            });
        }
        let v: Vec<C64> = ket.iter().map(|z| z / norm).collect();
        Ok(Self {
            op: HermitianOperator::outer(&v),
        })
    }

    /// `|k⟩⟨k|` in dimension `dim`.
    pub fn basis(dim: usize, k: usize) -> Self {
        let mut diag = vec![0.0; dim];
        diag[k] = 1.0;
        Self {
            op: HermitianOperator::from_real_diagonal(&diag),
        }
    }

    pub fn from_diagonal(diag: &[f64]) -> Result<Self> {
        Self::new(HermitianOperator::from_real_diagonal(diag))
    }

    pub fn op(&self) -> &HermitianOperator {
        &self.op
    }

    pub fn matrix(&self) -> &CMatrix {
        self.op.matrix()
    }

    pub fn dim(&self) -> usize {
        self.op.dim()
    }

    pub fn tensor(&self, other: &DensityMatrix) -> DensityMatrix {
        DensityMatrix {
            op: self.op.kron(&other.op),
        }
    }

    /// Ascending eigenvalues with round-off negatives clamped to zero.
    pub fn eigenvalues(&self) -> Result<Vec<f64>> {
        Ok(self.op.eigenvalues()?.into_iter().map(|v| v.max(0.0)).collect())
    }

    pub fn largest_eigenvalue(&self) -> Result<f64> {
        Ok(*self.op.eigenvalues()?.last().expect("dim >= 1"))
    }
}

/// Distinct (clustered) eigenvalues of a Hermitian operator with their projectors.
#[derive(Debug, Clone)]
pub struct SpectralDecomposition {
    eigenvalues: Vec<f64>,
    projectors: Vec<HermitianOperator>,
    multiplicities: Vec<usize>,
    cluster_tol: f64,
}

impl SpectralDecomposition {
    /// Cluster values, descending.
    pub fn eigenvalues(&self) -> &[f64] {
        &self.eigenvalues
    }

    pub fn projectors(&self) -> &[HermitianOperator] {
        &self.projectors
    }

    pub fn multiplicities(&self) -> &[usize] {
        &self.multiplicities
    }

    pub fn cluster_tol(&self) -> f64 {
        self.cluster_tol
    }

    pub fn len(&self) -> usize {
        self.eigenvalues.len()
    }

    pub fn is_empty(&self) -> bool {
        self.eigenvalues.is_empty()
    }

    pub fn dim(&self) -> usize {
        self.projectors[0].dim()
    }

    /// `Σ_i λ_i P_i`.
    pub fn reconstruct(&self) -> HermitianOperator {
        self.eigenvalues
            .iter()
            .zip(&self.projectors)
            .fold(HermitianOperator::zeros(self.dim()), |acc, (&l, p)| &acc + &p.scale(l))
    }

    /// Indices of clusters whose value lies within `kernel_tol` of zero.
    pub fn kernel_indices(&self, kernel_tol: f64) -> Vec<usize> {
        (0..self.len()).filter(|&i| self.eigenvalues[i].abs() <= kernel_tol).collect()
    }

    pub fn min_eigenvalue(&self) -> f64 {
        *self.eigenvalues.last().expect("non-empty decomposition")
    }
}

/// Eigendecomposition with chain-merged clustering: sorted raw eigenvalues
/// whose consecutive gaps are at most `cluster_tol` share one cluster, valued
/// at their (multiplicity-weighted) mean.
pub fn spectral_decompose(h: &HermitianOperator, cluster_tol: f64) -> Result<SpectralDecomposition> {
    if !(cluster_tol > 0.0) {
        return Err(Error::ParameterRange {
            name: "cluster_tol".into(),
            value: cluster_tol,
            expected: "> 0".into(),
        });
    }
    let (values, vectors) = hermitian_eigen(h.matrix())?;
    let n = values.len();

    let mut groups: Vec<Vec<usize>> = vec![vec![0]];
    for i in 1..n {
        if values[i] - values[i - 1] <= cluster_tol {
            groups.last_mut().unwrap().push(i);
        } else {
            groups.push(vec![i]);
        }
    }
    groups.reverse();

    let mut eigenvalues = Vec::with_capacity(groups.len());
    let mut projectors = Vec::with_capacity(groups.len());
    let mut multiplicities = Vec::with_capacity(groups.len());
    for g in groups {
        let mean = g.iter().map(|&i| values[i]).sum::<f64>() / g.len() as f64;
        let mut basis = CMatrix::zeros(n, g.len());
        for (col, &i) in g.iter().enumerate() {
            basis.set_column(col, &vectors.column(i));
        }
        eigenvalues.push(mean);
        projectors.push(HermitianOperator::symmetrized(&basis * basis.adjoint()));
        multiplicities.push(g.len());
    }
    Ok(SpectralDecomposition {
        eigenvalues,
        projectors,
        multiplicities,
        cluster_tol,
    })
}

/// [`spectral_decompose`] with the default clustering tolerance for `h`.
pub fn spectral_decompose_default(h: &HermitianOperator, tol: &Tolerances) -> Result<SpectralDecomposition> {
    spectral_decompose(h, tol.cluster_for(h.frobenius_norm()))
}

/// Orthogonal projector with its rank.
#[derive(Debug, Clone)]
pub struct Projector {
    op: HermitianOperator,
    rank: usize,
}

impl Projector {
    pub fn zero(dim: usize) -> Self {
        Self {
            op: HermitianOperator::zeros(dim),
            rank: 0,
        }
    }

    pub fn op(&self) -> &HermitianOperator {
        &self.op
    }

    pub fn rank(&self) -> usize {
        self.rank
    }

    pub fn is_zero(&self) -> bool {
        self.rank == 0
    }
}

/// Projector onto the clusters within `kernel_tol` of zero; the zero
/// projector when the source operator has full rank.
pub fn kernel_projector(decomp: &SpectralDecomposition, kernel_tol: f64) -> Result<Projector> {
    let min = decomp.min_eigenvalue();
    if min < -kernel_tol {
        return Err(Error::NotPositive { min_eigenvalue: min });
    }
    let mut proj = Projector::zero(decomp.dim());
    for i in decomp.kernel_indices(kernel_tol) {
        proj.op = &proj.op + &decomp.projectors[i];
        proj.rank += decomp.multiplicities[i];
    }
    Ok(proj)
}

/// `Σ_{j≠i} (λ_j − λ_i)^{-1} P_j` for the target cluster `i`.
pub fn reduced_resolvent(decomp: &SpectralDecomposition, target_index: usize) -> Result<HermitianOperator> {
    if target_index >= decomp.len() {
        return Err(Error::ClusterIndex {
            index: target_index,
            count: decomp.len(),
        });
    }
    let target = decomp.eigenvalues[target_index];
    let mut acc = HermitianOperator::zeros(decomp.dim());
    for (j, (&l, p)) in decomp.eigenvalues.iter().zip(&decomp.projectors).enumerate() {
        if j != target_index {
            acc = &acc + &p.scale(1.0 / (l - target));
        }
    }
    Ok(acc)
}

pub fn psd_min_eig(h: &HermitianOperator) -> Result<f64> {
    Ok(h.eigenvalues()?[0])
}
