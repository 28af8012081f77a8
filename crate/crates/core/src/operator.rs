//! Dense Hermitian operator algebra on finite-dimensional Hilbert spaces.
//!
//! Every operator is immutable after construction. Hermitian operators are
//! stored either densely or, for classical (diagonal) states, as a real
//! diagonal, which keeps the 2^n-dimensional classical densities cheap.
//! Matrix functions are always evaluated in the eigenbasis.
//!
//! Eigenvalues at or below [`CLIP_THRESHOLD`] times the largest eigenvalue
//! magnitude are treated as exact zeros when forming powers and supports.

use std::sync::Arc;

use nalgebra::{DMatrix, DVector, SymmetricEigen};
use num_complex::Complex64;

use crate::error::{Error, Result};

/// Default hard cap on the dimension of any constructed matrix.
pub const DEFAULT_MAX_DIM: usize = 8192;

/// Relative eigenvalue threshold separating the kernel from round-off.
pub const CLIP_THRESHOLD: f64 = 1e-10;

const HERMITIAN_TOL: f64 = 1e-12;
const TRACE_TOL: f64 = 1e-10;
const PSD_TOL: f64 = 1e-10;
const PROJECTOR_TOL: f64 = 1e-9;
const IMAG_TRACE_TOL: f64 = 1e-10;

fn c(re: f64) -> Complex64 {
    Complex64::new(re, 0.0)
}

/// Square complex matrix with finite entries.
#[derive(Clone, Debug, PartialEq)]
pub struct ComplexMatrix(DMatrix<Complex64>);

impl ComplexMatrix {
    pub fn new(m: DMatrix<Complex64>) -> Result<Self> {
        if m.nrows() != m.ncols() {
            return Err(Error::NotSquare {
                rows: m.nrows(),
                cols: m.ncols(),
            });
        }
        if m.nrows() == 0 {
            return Err(Error::Empty);
        }
        if m.iter().any(|z| !z.re.is_finite() || !z.im.is_finite()) {
            return Err(Error::NonFinite);
        }
        Ok(Self(m))
    }

    /// Builds a matrix from row vectors.
    pub fn from_rows(rows: &[Vec<Complex64>]) -> Result<Self> {
        let n = rows.len();
        if let Some(bad) = rows.iter().find(|r| r.len() != n) {
            return Err(Error::NotSquare {
                rows: n,
                cols: bad.len(),
            });
        }
        Self::new(DMatrix::from_fn(n, n, |i, j| rows[i][j]))
    }

    pub fn identity(dim: usize) -> Self {
        Self(DMatrix::identity(dim, dim))
    }

    pub fn zeros(dim: usize) -> Self {
        Self(DMatrix::zeros(dim, dim))
    }

    pub fn from_real_diagonal(values: &[f64]) -> Self {
        let n = values.len();
        Self(DMatrix::from_fn(n, n, |i, j| {
            if i == j {
                c(values[i])
            } else {
                Complex64::default()
            }
        }))
    }

    pub fn dim(&self) -> usize {
        self.0.nrows()
    }

    pub fn get(&self, i: usize, j: usize) -> Complex64 {
        self.0[(i, j)]
    }

    pub fn as_dmatrix(&self) -> &DMatrix<Complex64> {
        &self.0
    }

    pub fn into_dmatrix(self) -> DMatrix<Complex64> {
        self.0
    }

    pub fn adjoint(&self) -> Self {
        Self(self.0.adjoint())
    }

    pub fn trace(&self) -> Complex64 {
        self.0.trace()
    }

    pub fn matmul(&self, other: &Self) -> Result<Self> {
        check_dims(self.dim(), other.dim())?;
        Ok(Self(&self.0 * &other.0))
    }

    pub fn add(&self, other: &Self) -> Result<Self> {
        check_dims(self.dim(), other.dim())?;
        Ok(Self(&self.0 + &other.0))
    }

    /// Largest entrywise modulus of `self - other`.
    pub fn max_abs_diff(&self, other: &Self) -> Result<f64> {
        check_dims(self.dim(), other.dim())?;
        Ok(self
            .0
            .iter()
            .zip(other.0.iter())
            .map(|(a, b)| (a - b).norm())
            .fold(0.0, f64::max))
    }
}

fn check_dims(left: usize, right: usize) -> Result<()> {
    if left != right {
        Err(Error::DimensionMismatch { left, right })
    } else {
        Ok(())
    }
}

fn checked_product(a: usize, b: usize, cap: usize) -> Result<usize> {
    match a.checked_mul(b) {
        Some(d) if d <= cap => Ok(d),
        Some(d) => Err(Error::DimensionCap { requested: d, cap }),
        None => Err(Error::DimensionCap {
            requested: usize::MAX,
            cap,
        }),
    }
}

fn kron(a: &DMatrix<Complex64>, b: &DMatrix<Complex64>) -> DMatrix<Complex64> {
    let (da, db) = (a.nrows(), b.nrows());
    let mut out = DMatrix::zeros(da * db, da * db);
    for ac in 0..da {
        for ar in 0..da {
            let x = a[(ar, ac)];
            if x == Complex64::default() {
                continue;
            }
            for bc in 0..db {
                for br in 0..db {
                    out[(ar * db + br, ac * db + bc)] = x * b[(br, bc)];
                }
            }
        }
    }
    out
}

/// Kronecker product, left factor as the most significant index.
pub fn tensor(a: &ComplexMatrix, b: &ComplexMatrix) -> Result<ComplexMatrix> {
    tensor_with_cap(a, b, DEFAULT_MAX_DIM)
}

pub fn tensor_with_cap(a: &ComplexMatrix, b: &ComplexMatrix, cap: usize) -> Result<ComplexMatrix> {
    checked_product(a.dim(), b.dim(), cap)?;
    Ok(ComplexMatrix(kron(&a.0, &b.0)))
}

#[derive(Clone, Debug, PartialEq)]
enum Repr {
    Dense(DMatrix<Complex64>),
    Diagonal(Vec<f64>),
}

/// Self-adjoint operator, stored densely or as a real diagonal.
#[derive(Clone, Debug, PartialEq)]
pub struct HermitianOperator {
    repr: Repr,
}

impl HermitianOperator {
    /// Accepts a matrix that is Hermitian within 1e-12 and symmetrizes it exactly.
    pub fn new(m: ComplexMatrix) -> Result<Self> {
        let a = &m.0;
        let n = a.nrows();
        let mut deviation = 0.0f64;
        for j in 0..n {
            for i in 0..=j {
                deviation = deviation.max((a[(i, j)] - a[(j, i)].conj()).norm());
            }
        }
        if deviation > HERMITIAN_TOL {
            return Err(Error::NotHermitian(deviation));
        }
        Ok(hermitize(&m))
    }

    pub fn from_diagonal(values: Vec<f64>) -> Result<Self> {
        if values.is_empty() {
            return Err(Error::Empty);
        }
        if values.iter().any(|v| !v.is_finite()) {
            return Err(Error::NonFinite);
        }
        Ok(Self {
            repr: Repr::Diagonal(values),
        })
    }

    fn dense_unchecked(m: DMatrix<Complex64>) -> Self {
        Self {
            repr: Repr::Dense(m),
        }
    }

    pub fn zeros(dim: usize) -> Self {
        Self {
            repr: Repr::Diagonal(vec![0.0; dim]),
        }
    }

    pub fn identity(dim: usize) -> Self {
        Self {
            repr: Repr::Diagonal(vec![1.0; dim]),
        }
    }

    pub fn dim(&self) -> usize {
        match &self.repr {
            Repr::Dense(m) => m.nrows(),
            Repr::Diagonal(d) => d.len(),
        }
    }

    pub fn is_diagonal(&self) -> bool {
        matches!(self.repr, Repr::Diagonal(_))
    }

    /// The stored diagonal, if the operator is kept in diagonal form.
    pub fn diagonal(&self) -> Option<&[f64]> {
        match &self.repr {
            Repr::Diagonal(d) => Some(d),
            Repr::Dense(_) => None,
        }
    }

    pub fn entry(&self, i: usize, j: usize) -> Complex64 {
        match &self.repr {
            Repr::Dense(m) => m[(i, j)],
            Repr::Diagonal(d) if i == j => c(d[i]),
            Repr::Diagonal(_) => Complex64::default(),
        }
    }

    pub fn to_matrix(&self) -> ComplexMatrix {
        match &self.repr {
            Repr::Dense(m) => ComplexMatrix(m.clone()),
            Repr::Diagonal(d) => ComplexMatrix::from_real_diagonal(d),
        }
    }

    pub fn trace(&self) -> f64 {
        match &self.repr {
            Repr::Dense(m) => (0..m.nrows()).map(|i| m[(i, i)].re).sum(),
            Repr::Diagonal(d) => d.iter().sum(),
        }
    }

    pub fn scale(&self, factor: f64) -> Self {
        let repr = match &self.repr {
            Repr::Dense(m) => Repr::Dense(m * c(factor)),
            Repr::Diagonal(d) => Repr::Diagonal(d.iter().map(|v| v * factor).collect()),
        };
        Self { repr }
    }

    fn combine(&self, other: &Self, sign: f64) -> Result<Self> {
        check_dims(self.dim(), other.dim())?;
        let repr = match (&self.repr, &other.repr) {
            (Repr::Diagonal(a), Repr::Diagonal(b)) => {
                Repr::Diagonal(a.iter().zip(b).map(|(x, y)| x + sign * y).collect())
            }
            _ => {
                let a = self.to_matrix().0;
                let b = other.to_matrix().0;
                Repr::Dense(a + b * c(sign))
            }
        };
        Ok(Self { repr })
    }

    pub fn add(&self, other: &Self) -> Result<Self> {
        self.combine(other, 1.0)
    }

    pub fn sub(&self, other: &Self) -> Result<Self> {
        self.combine(other, -1.0)
    }

    pub fn neg(&self) -> Self {
        self.scale(-1.0)
    }

    /// Kronecker product; diagonal operators stay diagonal.
    pub fn tensor(&self, other: &Self, cap: usize) -> Result<Self> {
        checked_product(self.dim(), other.dim(), cap)?;
        let repr = match (&self.repr, &other.repr) {
            (Repr::Diagonal(a), Repr::Diagonal(b)) => Repr::Diagonal(
                a.iter()
                    .flat_map(|x| b.iter().map(move |y| x * y))
                    .collect(),
            ),
            _ => Repr::Dense(kron(&self.to_matrix().0, &other.to_matrix().0)),
        };
        Ok(Self { repr })
    }

    /// Operator product `self * other` as a general matrix.
    pub fn matmul(&self, other: &Self) -> Result<ComplexMatrix> {
        check_dims(self.dim(), other.dim())?;
        Ok(match (&self.repr, &other.repr) {
            (Repr::Diagonal(a), Repr::Diagonal(b)) => ComplexMatrix::from_real_diagonal(
                &a.iter().zip(b).map(|(x, y)| x * y).collect::<Vec<_>>(),
            ),
            _ => ComplexMatrix(self.to_matrix().0 * other.to_matrix().0),
        })
    }

    pub fn max_abs_diff(&self, other: &Self) -> Result<f64> {
        check_dims(self.dim(), other.dim())?;
        match (&self.repr, &other.repr) {
            (Repr::Diagonal(a), Repr::Diagonal(b)) => Ok(a
                .iter()
                .zip(b)
                .map(|(x, y)| (x - y).abs())
                .fold(0.0, f64::max)),
            _ => self.to_matrix().max_abs_diff(&other.to_matrix()),
        }
    }

    /// Frobenius norm of `self - other`.
    pub fn frobenius_distance(&self, other: &Self) -> Result<f64> {
        check_dims(self.dim(), other.dim())?;
        let a = self.to_matrix().0;
        let b = other.to_matrix().0;
        Ok((a - b).norm())
    }
}

/// Returns `(M + M†)/2`.
pub fn hermitize(m: &ComplexMatrix) -> HermitianOperator {
    let a = &m.0;
    let h = (a + a.adjoint()) * c(0.5);
    HermitianOperator::dense_unchecked(h)
}

/// Orthonormal eigenbasis of a [`SpectralDecomposition`].
#[derive(Clone, Debug)]
pub enum Eigenbasis {
    /// Eigenvectors stored as the columns of a unitary matrix.
    Dense(DMatrix<Complex64>),
    /// Standard basis vectors; entry `k` is the basis index of eigenvector `k`.
    Standard(Vec<usize>),
}

/// Eigenvalues in ascending order with matching orthonormal eigenvectors.
#[derive(Clone, Debug)]
pub struct SpectralDecomposition {
    eigenvalues: Vec<f64>,
    basis: Eigenbasis,
}

impl SpectralDecomposition {
    fn sorted(eigenvalues: Vec<f64>, basis: Eigenbasis) -> Self {
        let mut order: Vec<usize> = (0..eigenvalues.len()).collect();
        order.sort_by(|&a, &b| eigenvalues[a].total_cmp(&eigenvalues[b]));
        let values = order.iter().map(|&k| eigenvalues[k]).collect();
        let basis = match basis {
            Eigenbasis::Dense(u) => Eigenbasis::Dense(u.select_columns(order.iter())),
            Eigenbasis::Standard(p) => Eigenbasis::Standard(order.iter().map(|&k| p[k]).collect()),
        };
        Self {
            eigenvalues: values,
            basis,
        }
    }

    pub fn eigenvalues(&self) -> &[f64] {
        &self.eigenvalues
    }

    pub fn basis(&self) -> &Eigenbasis {
        &self.basis
    }

    pub fn dim(&self) -> usize {
        self.eigenvalues.len()
    }

    pub fn max_abs_eigenvalue(&self) -> f64 {
        self.eigenvalues.iter().fold(0.0, |m, v| m.max(v.abs()))
    }

    /// Absolute clipping threshold for this spectrum.
    pub fn threshold(&self) -> f64 {
        CLIP_THRESHOLD * self.max_abs_eigenvalue()
    }

    pub fn eigenvector(&self, k: usize) -> DVector<Complex64> {
        match &self.basis {
            Eigenbasis::Dense(u) => u.column(k).into_owned(),
            Eigenbasis::Standard(p) => {
                let mut v = DVector::zeros(self.dim());
                v[p[k]] = c(1.0);
                v
            }
        }
    }

    pub fn eigenvector_matrix(&self) -> DMatrix<Complex64> {
        match &self.basis {
            Eigenbasis::Dense(u) => u.clone(),
            Eigenbasis::Standard(p) => {
                let mut u = DMatrix::zeros(self.dim(), self.dim());
                for (k, &i) in p.iter().enumerate() {
                    u[(i, k)] = c(1.0);
                }
                u
            }
        }
    }

    /// Applies `f` to the eigenvalues: `U diag(f(λ)) U†`.
    pub fn map(&self, f: impl Fn(f64) -> f64) -> HermitianOperator {
        let mapped: Vec<f64> = self.eigenvalues.iter().map(|&l| f(l)).collect();
        match &self.basis {
            Eigenbasis::Standard(p) => {
                let mut d = vec![0.0; self.dim()];
                for (k, &i) in p.iter().enumerate() {
                    d[i] = mapped[k];
                }
                HermitianOperator {
                    repr: Repr::Diagonal(d),
                }
            }
            Eigenbasis::Dense(u) => {
                let keep: Vec<usize> = (0..self.dim()).filter(|&k| mapped[k] != 0.0).collect();
                let n = self.dim();
                if keep.is_empty() {
                    return HermitianOperator::dense_unchecked(DMatrix::zeros(n, n));
                }
                let sub = u.select_columns(keep.iter());
                let mut scaled = sub.clone();
                for (col, &k) in keep.iter().enumerate() {
                    scaled.column_mut(col).scale_mut(mapped[k]);
                }
                let m = scaled * sub.adjoint();
                hermitize(&ComplexMatrix(m))
            }
        }
    }

    /// `U diag(λ) U†`.
    pub fn reconstruct(&self) -> HermitianOperator {
        self.map(|l| l)
    }

    /// Spectrum of the Kronecker product of the two decomposed operators.
    pub fn tensor(&self, other: &Self) -> Self {
        let values: Vec<f64> = self
            .eigenvalues
            .iter()
            .flat_map(|a| other.eigenvalues.iter().map(move |b| a * b))
            .collect();
        let basis = match (&self.basis, &other.basis) {
            (Eigenbasis::Standard(p), Eigenbasis::Standard(q)) => {
                let db = other.dim();
                Eigenbasis::Standard(
                    p.iter()
                        .flat_map(|a| q.iter().map(move |b| a * db + b))
                        .collect(),
                )
            }
            _ => Eigenbasis::Dense(kron(
                &self.eigenvector_matrix(),
                &other.eigenvector_matrix(),
            )),
        };
        Self::sorted(values, basis)
    }
}

pub fn spectral_decompose(h: &HermitianOperator) -> Result<SpectralDecomposition> {
    match &h.repr {
        Repr::Diagonal(d) => Ok(SpectralDecomposition::sorted(
            d.clone(),
            Eigenbasis::Standard((0..d.len()).collect()),
        )),
        Repr::Dense(m) => {
            let n = m.nrows();
            let eig = SymmetricEigen::try_new(m.clone(), f64::EPSILON, 1000 * n.max(10))
                .ok_or(Error::Decomposition(n))?;
            if eig.eigenvalues.iter().any(|v| !v.is_finite()) {
                return Err(Error::Decomposition(n));
            }
            Ok(SpectralDecomposition::sorted(
                eig.eigenvalues.iter().copied().collect(),
                Eigenbasis::Dense(eig.eigenvectors),
            ))
        }
    }
}

/// Unit-trace positive semidefinite operator with its cached spectrum.
#[derive(Clone, Debug)]
pub struct DensityMatrix {
    op: HermitianOperator,
    spectrum: Arc<SpectralDecomposition>,
}

impl DensityMatrix {
    pub fn new(op: HermitianOperator) -> Result<Self> {
        let spectrum = spectral_decompose(&op)?;
        Self::from_parts(op, spectrum)
    }

    fn from_parts(op: HermitianOperator, spectrum: SpectralDecomposition) -> Result<Self> {
        let trace = op.trace();
        if (trace - 1.0).abs() > TRACE_TOL {
            return Err(Error::NotNormalized(trace));
        }
        let min = spectrum.eigenvalues().first().copied().unwrap_or(0.0);
        if min < -PSD_TOL {
            return Err(Error::NotPositive(min));
        }
        Ok(Self {
            op,
            spectrum: Arc::new(spectrum),
        })
    }

    /// Rank-one density `|ψ⟩⟨ψ|` of the normalized vector.
    pub fn from_pure(psi: &[Complex64]) -> Result<Self> {
        if psi.is_empty() {
            return Err(Error::Empty);
        }
        if psi.iter().any(|z| !z.re.is_finite() || !z.im.is_finite()) {
            return Err(Error::NonFinite);
        }
        let v = DVector::from_column_slice(psi);
        let norm = v.norm();
        if norm == 0.0 {
            return Err(Error::ZeroVector);
        }
        let v = v / c(norm);
        let m = &v * v.adjoint();
        Self::new(hermitize(&ComplexMatrix(m)))
    }

    /// Diagonal density from a probability vector.
    pub fn from_probabilities(p: &[f64]) -> Result<Self> {
        Self::new(HermitianOperator::from_diagonal(p.to_vec())?)
    }

    pub fn maximally_mixed(dim: usize) -> Result<Self> {
        Self::from_probabilities(&vec![1.0 / dim as f64; dim])
    }

    pub fn operator(&self) -> &HermitianOperator {
        &self.op
    }

    pub fn spectrum(&self) -> &SpectralDecomposition {
        &self.spectrum
    }

    pub fn dim(&self) -> usize {
        self.op.dim()
    }

    /// Kronecker product of two densities; the spectrum is assembled from the factors.
    pub fn tensor(&self, other: &Self, cap: usize) -> Result<Self> {
        let op = self.op.tensor(&other.op, cap)?;
        let spectrum = self.spectrum.tensor(&other.spectrum);
        Self::from_parts(op, spectrum)
    }

    /// The unit vector `ψ` if the state is pure, i.e. has a single eigenvalue at 1.
    pub fn pure_vector(&self) -> Option<DVector<Complex64>> {
        let thr = self.spectrum.threshold();
        let support: Vec<usize> = self
            .spectrum
            .eigenvalues()
            .iter()
            .enumerate()
            .filter(|(_, &l)| l > thr)
            .map(|(k, _)| k)
            .collect();
        match support.as_slice() {
            [k] if (self.spectrum.eigenvalues()[*k] - 1.0).abs() <= TRACE_TOL => {
                Some(self.spectrum.eigenvector(*k))
            }
            _ => None,
        }
    }
}

/// Orthogonal projector.
#[derive(Clone, Debug, PartialEq)]
pub struct Projector(HermitianOperator);

impl Projector {
    /// Checks `P² = P` entrywise within 1e-9.
    pub fn new(op: HermitianOperator) -> Result<Self> {
        let sq = op.matmul(&op)?;
        let deviation = sq.max_abs_diff(&op.to_matrix())?;
        if deviation > PROJECTOR_TOL {
            return Err(Error::NotProjector(deviation));
        }
        Ok(Self(op))
    }

    pub(crate) fn from_trusted(op: HermitianOperator) -> Self {
        Self(op)
    }

    pub fn zero(dim: usize) -> Self {
        Self(HermitianOperator::zeros(dim))
    }

    pub fn identity(dim: usize) -> Self {
        Self(HermitianOperator::identity(dim))
    }

    /// `1 - P`.
    pub fn complement(&self) -> Self {
        let id = HermitianOperator::identity(self.dim());
        Self(id.sub(&self.0).expect("same dimension"))
    }

    pub fn operator(&self) -> &HermitianOperator {
        &self.0
    }

    pub fn dim(&self) -> usize {
        self.0.dim()
    }

    pub fn rank(&self) -> usize {
        self.0.trace().round() as usize
    }
}

/// `ρ^t` for `t ∈ [0, 1]`; eigenvalues at or below the clipping threshold map to 0
/// for every `t`, so `ρ^0` is the support projector.
pub fn matrix_power(rho: &DensityMatrix, t: f64) -> Result<HermitianOperator> {
    if !(0.0..=1.0).contains(&t) {
        return Err(Error::ExponentOutOfRange(t));
    }
    let spec = rho.spectrum();
    let thr = spec.threshold();
    Ok(spec.map(|l| {
        let l = l.max(0.0);
        if l <= thr {
            0.0
        } else {
            l.powf(t)
        }
    }))
}

/// `H_+ = (|H| + H)/2`.
pub fn positive_part(h: &HermitianOperator) -> Result<HermitianOperator> {
    Ok(spectral_decompose(h)?.map(|l| l.max(0.0)))
}

/// Projector onto the eigenvectors with `|λ|` above the clipping threshold.
pub fn support(h: &HermitianOperator) -> Result<Projector> {
    let spec = spectral_decompose(h)?;
    let thr = spec.threshold();
    Ok(Projector(
        spec.map(|l| if l.abs() > thr { 1.0 } else { 0.0 }),
    ))
}

/// Projector onto the eigenvectors of `h` with eigenvalue above the clipping
/// threshold of `h` itself, i.e. `supp(h_+)`.
pub fn positive_support(h: &HermitianOperator) -> Result<Projector> {
    let spec = spectral_decompose(h)?;
    let thr = spec.threshold();
    Ok(Projector(spec.map(|l| if l > thr { 1.0 } else { 0.0 })))
}

/// Trace norm `‖H‖₁ = Σ|λ|`.
pub fn trace_norm(h: &HermitianOperator) -> Result<f64> {
    Ok(spectral_decompose(h)?
        .eigenvalues()
        .iter()
        .map(|l| l.abs())
        .sum())
}

/// `Re tr(AB)`; fails if the imaginary part is not negligible.
pub fn trace_inner(a: &HermitianOperator, b: &HermitianOperator) -> Result<f64> {
    check_dims(a.dim(), b.dim())?;
    let (re, im) = match (&a.repr, &b.repr) {
        (Repr::Diagonal(x), Repr::Diagonal(y)) => (x.iter().zip(y).map(|(p, q)| p * q).sum(), 0.0),
        (Repr::Diagonal(x), Repr::Dense(m)) | (Repr::Dense(m), Repr::Diagonal(x)) => {
            x.iter().enumerate().fold((0.0, 0.0), |(re, im), (i, v)| {
                (re + v * m[(i, i)].re, im + v * m[(i, i)].im)
            })
        }
        (Repr::Dense(x), Repr::Dense(y)) => {
            // tr(AB) = Σ_ij A_ij B_ji = Σ_ij A_ij conj(B_ij) for Hermitian B.
            let s = x
                .iter()
                .zip(y.iter())
                .fold(Complex64::default(), |acc, (p, q)| acc + p * q.conj());
            (s.re, s.im)
        }
    };
    if im.abs() > IMAG_TRACE_TOL * re.abs().max(1.0) {
        return Err(Error::ComplexTrace(im));
    }
    Ok(re)
}
