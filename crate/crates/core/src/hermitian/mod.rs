//! Dense complex linear algebra used by every other module.
//!
//! Matrices are small (dimension at most a few hundred) and stored row-major. Kronecker
//! products use the row-major block convention: `(A ⊗ B)[(a, i), (b, j)] = A[a, b] B[i, j]`
//! with the index of `A` as the slow index.

mod eigen;
mod factor;

use std::fmt;
use std::ops::{Add, AddAssign, Index, IndexMut, Mul, Neg, Sub, SubAssign};

use num_complex::Complex64;

use crate::error::{Error, Result};

pub use eigen::Eigen;
pub use factor::{cholesky, inverse_pd, logdet_pd, solve_spd};

pub type C64 = Complex64;

/// Maximum allowed `|M - M^†|` entry for a matrix to count as Hermitian.
pub const TOL_HERM: f64 = 1e-10;

/// Default tolerance for PSD checks.
pub const TOL_PSD: f64 = 1e-9;

#[inline]
pub fn c64(re: f64, im: f64) -> C64 {
    C64::new(re, im)
}

#[inline]
pub fn re(x: f64) -> C64 {
    C64::new(x, 0.0)
}

/// Dense complex matrix, row-major.
#[derive(Clone, PartialEq)]
pub struct ComplexMatrix {
    rows: usize,
    cols: usize,
    data: Vec<C64>,
}

impl fmt::Debug for ComplexMatrix {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        writeln!(f, "ComplexMatrix {}x{} [", self.rows, self.cols)?;
        for i in 0..self.rows {
            write!(f, "  ")?;
            for j in 0..self.cols {
                let z = self[(i, j)];
                write!(f, "{:+.4}{:+.4}i ", z.re, z.im)?;
            }
            writeln!(f)?;
        }
        write!(f, "]")
    }
}

impl ComplexMatrix {
    pub fn zeros(rows: usize, cols: usize) -> Self {
        Self {
            rows,
            cols,
            data: vec![C64::new(0.0, 0.0); rows * cols],
        }
    }

    pub fn identity(n: usize) -> Self {
        let mut m = Self::zeros(n, n);
        for i in 0..n {
            m[(i, i)] = re(1.0);
        }
        m
    }

    pub fn from_fn(rows: usize, cols: usize, mut f: impl FnMut(usize, usize) -> C64) -> Self {
        let mut data = Vec::with_capacity(rows * cols);
        for i in 0..rows {
            for j in 0..cols {
                data.push(f(i, j));
            }
        }
        Self { rows, cols, data }
    }

    /// Builds a matrix from row-major data.
    pub fn from_vec(rows: usize, cols: usize, data: Vec<C64>) -> Result<Self> {
        if data.len() != rows * cols {
            return Err(Error::DimensionMismatch(data.len(), rows * cols));
        }
        Ok(Self { rows, cols, data })
    }

    /// Builds a matrix from real row-major data.
    pub fn from_real(rows: usize, cols: usize, data: &[f64]) -> Result<Self> {
        Self::from_vec(rows, cols, data.iter().map(|&x| re(x)).collect())
    }

    pub fn from_rows(rows: &[Vec<C64>]) -> Result<Self> {
        let n = rows.len();
        let m = rows.first().map_or(0, Vec::len);
        if rows.iter().any(|r| r.len() != m) {
            return Err(Error::Parse("ragged matrix rows".into()));
        }
        Ok(Self {
            rows: n,
            cols: m,
            data: rows.iter().flatten().copied().collect(),
        })
    }

    pub fn diag(values: &[C64]) -> Self {
        let n = values.len();
        let mut m = Self::zeros(n, n);
        for (i, &v) in values.iter().enumerate() {
            m[(i, i)] = v;
        }
        m
    }

    #[inline]
    pub fn rows(&self) -> usize {
        self.rows
    }

    #[inline]
    pub fn cols(&self) -> usize {
        self.cols
    }

    #[inline]
    pub fn is_square(&self) -> bool {
        self.rows == self.cols
    }

    pub fn as_slice(&self) -> &[C64] {
        &self.data
    }

    pub fn row(&self, i: usize) -> &[C64] {
        &self.data[i * self.cols..(i + 1) * self.cols]
    }

    pub fn column(&self, j: usize) -> Vec<C64> {
        (0..self.rows).map(|i| self[(i, j)]).collect()
    }

    pub fn is_finite(&self) -> bool {
        self.data.iter().all(|z| z.re.is_finite() && z.im.is_finite())
    }

    pub fn adjoint(&self) -> Self {
        Self::from_fn(self.cols, self.rows, |i, j| self[(j, i)].conj())
    }

    pub fn transpose(&self) -> Self {
        Self::from_fn(self.cols, self.rows, |i, j| self[(j, i)])
    }

    pub fn conj(&self) -> Self {
        Self {
            rows: self.rows,
            cols: self.cols,
            data: self.data.iter().map(|z| z.conj()).collect(),
        }
    }

    pub fn scale(&self, s: C64) -> Self {
        Self {
            rows: self.rows,
            cols: self.cols,
            data: self.data.iter().map(|z| z * s).collect(),
        }
    }

    pub fn scale_real(&self, s: f64) -> Self {
        self.scale(re(s))
    }

    pub fn trace(&self) -> C64 {
        (0..self.rows.min(self.cols)).map(|i| self[(i, i)]).sum()
    }

    pub fn max_abs(&self) -> f64 {
        self.data.iter().map(|z| z.norm()).fold(0.0, f64::max)
    }

    /// Largest entrywise modulus of `self - other`.
    pub fn max_abs_diff(&self, other: &Self) -> f64 {
        assert_eq!((self.rows, self.cols), (other.rows, other.cols));
        self.data
            .iter()
            .zip(&other.data)
            .map(|(a, b)| (a - b).norm())
            .fold(0.0, f64::max)
    }

    pub fn frobenius_norm(&self) -> f64 {
        self.data.iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt()
    }

    /// `tr(A^† B)`.
    pub fn inner(&self, other: &Self) -> C64 {
        self.data.iter().zip(&other.data).map(|(a, b)| a.conj() * b).sum()
    }

    pub fn matmul(&self, other: &Self) -> Self {
        assert_eq!(self.cols, other.rows, "matmul dimension mismatch");
        let mut out = Self::zeros(self.rows, other.cols);
        for i in 0..self.rows {
            let out_row = &mut out.data[i * other.cols..(i + 1) * other.cols];
            for k in 0..self.cols {
                let a = self.data[i * self.cols + k];
                if a.re == 0.0 && a.im == 0.0 {
                    continue;
                }
                let b_row = &other.data[k * other.cols..(k + 1) * other.cols];
                for (o, b) in out_row.iter_mut().zip(b_row) {
                    *o += a * b;
                }
            }
        }
        out
    }

    pub fn mul_vec(&self, v: &[C64]) -> Vec<C64> {
        assert_eq!(self.cols, v.len());
        (0..self.rows)
            .map(|i| self.row(i).iter().zip(v).map(|(a, b)| a * b).sum())
            .collect()
    }

    /// Largest entrywise deviation from self-adjointness.
    pub fn hermiticity_defect(&self) -> f64 {
        let mut worst: f64 = 0.0;
        for i in 0..self.rows {
            for j in i..self.cols {
                worst = worst.max((self[(i, j)] - self[(j, i)].conj()).norm());
            }
        }
        worst
    }

    /// `(M + M^†) / 2`.
    pub fn hermitian_part(&self) -> HermitianMatrix {
        assert!(self.is_square());
        let n = self.rows;
        HermitianMatrix(Self::from_fn(n, n, |i, j| {
            if i == j {
                re(self[(i, i)].re)
            } else {
                (self[(i, j)] + self[(j, i)].conj()) * 0.5
            }
        }))
    }

    /// Extracts the rows `start..start+count`.
    pub fn row_block(&self, start: usize, count: usize) -> Self {
        Self {
            rows: count,
            cols: self.cols,
            data: self.data[start * self.cols..(start + count) * self.cols].to_vec(),
        }
    }
}

impl Index<(usize, usize)> for ComplexMatrix {
    type Output = C64;
    #[inline]
    fn index(&self, (i, j): (usize, usize)) -> &C64 {
        &self.data[i * self.cols + j]
    }
}

impl IndexMut<(usize, usize)> for ComplexMatrix {
    #[inline]
    fn index_mut(&mut self, (i, j): (usize, usize)) -> &mut C64 {
        &mut self.data[i * self.cols + j]
    }
}

impl Add<&ComplexMatrix> for &ComplexMatrix {
    type Output = ComplexMatrix;
    fn add(self, rhs: &ComplexMatrix) -> ComplexMatrix {
        assert_eq!((self.rows, self.cols), (rhs.rows, rhs.cols));
        ComplexMatrix {
            rows: self.rows,
            cols: self.cols,
            data: self.data.iter().zip(&rhs.data).map(|(a, b)| a + b).collect(),
        }
    }
}

impl Sub<&ComplexMatrix> for &ComplexMatrix {
    type Output = ComplexMatrix;
    fn sub(self, rhs: &ComplexMatrix) -> ComplexMatrix {
        assert_eq!((self.rows, self.cols), (rhs.rows, rhs.cols));
        ComplexMatrix {
            rows: self.rows,
            cols: self.cols,
            data: self.data.iter().zip(&rhs.data).map(|(a, b)| a - b).collect(),
        }
    }
}

impl Mul<&ComplexMatrix> for &ComplexMatrix {
    type Output = ComplexMatrix;
    fn mul(self, rhs: &ComplexMatrix) -> ComplexMatrix {
        self.matmul(rhs)
    }
}

impl AddAssign<&ComplexMatrix> for ComplexMatrix {
    fn add_assign(&mut self, rhs: &ComplexMatrix) {
        assert_eq!((self.rows, self.cols), (rhs.rows, rhs.cols));
        for (a, b) in self.data.iter_mut().zip(&rhs.data) {
            *a += b;
        }
    }
}

/// A square matrix that is Hermitian up to [`TOL_HERM`]; the stored data is exactly
/// self-adjoint.
#[derive(Clone, PartialEq)]
pub struct HermitianMatrix(ComplexMatrix);

impl fmt::Debug for HermitianMatrix {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "Hermitian{:?}", self.0)
    }
}

impl std::ops::Deref for HermitianMatrix {
    type Target = ComplexMatrix;
    fn deref(&self) -> &ComplexMatrix {
        &self.0
    }
}

impl HermitianMatrix {
    /// Validates self-adjointness within [`TOL_HERM`] and symmetrizes exactly.
    pub fn new(m: ComplexMatrix) -> Result<Self> {
        if !m.is_square() {
            return Err(Error::NotSquare(m.rows, m.cols));
        }
        if !m.is_finite() {
            return Err(Error::NonFinite);
        }
        let defect = m.hermiticity_defect();
        if defect > TOL_HERM {
            return Err(Error::NotHermitian(defect));
        }
        Ok(m.hermitian_part())
    }

    pub fn zeros(n: usize) -> Self {
        Self(ComplexMatrix::zeros(n, n))
    }

    pub fn identity(n: usize) -> Self {
        Self(ComplexMatrix::identity(n))
    }

    pub fn from_real_diag(values: &[f64]) -> Self {
        Self(ComplexMatrix::diag(
            &values.iter().map(|&x| re(x)).collect::<Vec<_>>(),
        ))
    }

    /// Real symmetric matrix from row-major data.
    pub fn from_real(n: usize, data: &[f64]) -> Result<Self> {
        Self::new(ComplexMatrix::from_real(n, n, data)?)
    }

    /// `|v><v|`.
    pub fn outer(v: &[C64]) -> Self {
        let n = v.len();
        Self(ComplexMatrix::from_fn(n, n, |i, j| v[i] * v[j].conj()))
    }

    #[inline]
    pub fn dim(&self) -> usize {
        self.0.rows
    }

    pub fn as_matrix(&self) -> &ComplexMatrix {
        &self.0
    }

    pub fn into_matrix(self) -> ComplexMatrix {
        self.0
    }

    pub fn trace_re(&self) -> f64 {
        self.0.trace().re
    }

    pub fn scale(&self, s: f64) -> Self {
        Self(self.0.scale_real(s))
    }

    /// `V M V^†`.
    pub fn conjugate_by(&self, v: &ComplexMatrix) -> Self {
        v.matmul(&self.0).matmul(&v.adjoint()).hermitian_part()
    }

    /// `tr(A B)` for Hermitian `A`, `B`; the result is real.
    pub fn trace_product(&self, other: &Self) -> f64 {
        self.0.inner(&other.0).re
    }

    pub fn eig(&self) -> Result<Eigen> {
        eigen::eig(self)
    }

    pub fn eigenvalues(&self) -> Result<Vec<f64>> {
        eigen::eigenvalues(self)
    }

    pub fn min_eigenvalue(&self) -> Result<f64> {
        Ok(self.eigenvalues()?.first().copied().unwrap_or(0.0))
    }

    pub fn max_eigenvalue(&self) -> Result<f64> {
        Ok(self.eigenvalues()?.last().copied().unwrap_or(0.0))
    }

    pub fn is_psd(&self, tol: f64) -> Result<bool> {
        Ok(self.min_eigenvalue()? >= -tol)
    }

    /// Applies a real function to the spectrum.
    pub fn map_spectrum(&self, f: impl Fn(f64) -> f64) -> Result<Self> {
        let e = self.eig()?;
        Ok(e.reconstruct_with(|l| f(l)))
    }

    /// Principal square root of a PSD matrix. Eigenvalues in `[-TOL_PSD * scale, 0)` are
    /// treated as zero.
    pub fn sqrt_psd(&self) -> Result<Self> {
        let e = self.eig()?;
        let scale = e.values.iter().fold(1.0_f64, |m, l| m.max(l.abs()));
        let min = e.values.first().copied().unwrap_or(0.0);
        if min < -TOL_PSD * scale {
            return Err(Error::NotPsd(min));
        }
        Ok(e.reconstruct_with(|l| l.max(0.0).sqrt()))
    }

    /// Pseudo-inverse square root: eigenvalues below `1e-9 * ||M||` are mapped to zero.
    pub fn pinv_sqrt(&self) -> Result<Self> {
        let e = self.eig()?;
        let norm = e.values.iter().fold(0.0_f64, |m, l| m.max(l.abs()));
        let min = e.values.first().copied().unwrap_or(0.0);
        if min < -TOL_PSD * norm.max(1.0) {
            return Err(Error::NotPsd(min));
        }
        let cut = 1e-9 * norm;
        Ok(e.reconstruct_with(|l| if l > cut { 1.0 / l.sqrt() } else { 0.0 }))
    }

    /// Orthogonal projection onto the span of eigenvectors with eigenvalue above
    /// `1e-9 * ||M||`.
    pub fn support_projector(&self) -> Result<Self> {
        let e = self.eig()?;
        let norm = e.values.iter().fold(0.0_f64, |m, l| m.max(l.abs()));
        let cut = 1e-9 * norm;
        Ok(e.reconstruct_with(|l| if l > cut { 1.0 } else { 0.0 }))
    }

    /// Schatten 1-norm.
    pub fn trace_norm(&self) -> Result<f64> {
        Ok(self.eigenvalues()?.iter().map(|l| l.abs()).sum())
    }

    /// Positive part `(M + |M|) / 2`.
    pub fn positive_part(&self) -> Result<Self> {
        self.map_spectrum(|l| l.max(0.0))
    }
}

impl Add<&HermitianMatrix> for &HermitianMatrix {
    type Output = HermitianMatrix;
    fn add(self, rhs: &HermitianMatrix) -> HermitianMatrix {
        HermitianMatrix(&self.0 + &rhs.0)
    }
}

impl Sub<&HermitianMatrix> for &HermitianMatrix {
    type Output = HermitianMatrix;
    fn sub(self, rhs: &HermitianMatrix) -> HermitianMatrix {
        HermitianMatrix(&self.0 - &rhs.0)
    }
}

impl Neg for &HermitianMatrix {
    type Output = HermitianMatrix;
    fn neg(self) -> HermitianMatrix {
        self.scale(-1.0)
    }
}

impl Mul<f64> for &HermitianMatrix {
    type Output = HermitianMatrix;
    fn mul(self, s: f64) -> HermitianMatrix {
        self.scale(s)
    }
}

impl AddAssign<&HermitianMatrix> for HermitianMatrix {
    fn add_assign(&mut self, rhs: &HermitianMatrix) {
        self.0 += &rhs.0;
    }
}

impl SubAssign<&HermitianMatrix> for HermitianMatrix {
    fn sub_assign(&mut self, rhs: &HermitianMatrix) {
        for (a, b) in self.0.data.iter_mut().zip(&rhs.0.data) {
            *a -= b;
        }
    }
}

impl std::iter::Sum for HermitianMatrix {
    /// Panics on an empty iterator: the dimension would be unknown.
    fn sum<I: Iterator<Item = Self>>(mut iter: I) -> Self {
        let mut acc = iter.next().expect("sum of an empty set of matrices");
        for m in iter {
            acc += &m;
        }
        acc
    }
}

/// Column-stacked vector `|E>` of a square matrix.
#[derive(Clone, Debug, PartialEq)]
pub struct SuperVector(pub Vec<C64>);

impl SuperVector {
    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }

    pub fn as_slice(&self) -> &[C64] {
        &self.0
    }

    pub fn outer(&self) -> HermitianMatrix {
        HermitianMatrix::outer(&self.0)
    }
}

pub fn eig_hermitian(m: &HermitianMatrix) -> Result<Eigen> {
    m.eig()
}

pub fn is_psd(m: &HermitianMatrix, tol: f64) -> Result<bool> {
    m.is_psd(tol)
}

pub fn sqrt_psd(m: &HermitianMatrix) -> Result<HermitianMatrix> {
    m.sqrt_psd()
}

pub fn pinv_sqrt(m: &HermitianMatrix) -> Result<HermitianMatrix> {
    m.pinv_sqrt()
}

pub fn trace_norm(m: &HermitianMatrix) -> Result<f64> {
    m.trace_norm()
}

/// Column-major stacking: entry `i + d*j` of the result is `E[i, j]`.
pub fn vectorize(e: &ComplexMatrix) -> SuperVector {
    let (r, c) = (e.rows(), e.cols());
    let mut out = Vec::with_capacity(r * c);
    for j in 0..c {
        for i in 0..r {
            out.push(e[(i, j)]);
        }
    }
    SuperVector(out)
}

/// Inverse of [`vectorize`] for a `d x d` matrix.
pub fn unvectorize(v: &[C64], d: usize) -> Result<ComplexMatrix> {
    if v.len() != d * d {
        return Err(Error::DimensionMismatch(v.len(), d * d));
    }
    Ok(ComplexMatrix::from_fn(d, d, |i, j| v[i + d * j]))
}

/// Kronecker product, row-major block convention.
pub fn tensor(a: &ComplexMatrix, b: &ComplexMatrix) -> ComplexMatrix {
    let (br, bc) = (b.rows(), b.cols());
    ComplexMatrix::from_fn(a.rows() * br, a.cols() * bc, |i, j| {
        a[(i / br, j / bc)] * b[(i % br, j % bc)]
    })
}

pub fn tensor_herm(a: &HermitianMatrix, b: &HermitianMatrix) -> HermitianMatrix {
    HermitianMatrix(tensor(a, b))
}

/// Integer square root of a dimension that must be a perfect square.
pub fn factor_dim(n: usize) -> Result<usize> {
    let d = (n as f64).sqrt().round() as usize;
    if d * d != n {
        return Err(Error::DimNotSquare(n));
    }
    Ok(d)
}

/// Partial transpose on the second tensor factor of `C^d ⊗ C^d`.
pub fn partial_transpose(m: &HermitianMatrix) -> Result<HermitianMatrix> {
    let d = factor_dim(m.dim())?;
    Ok(HermitianMatrix(ComplexMatrix::from_fn(
        d * d,
        d * d,
        |r, c| {
            let (a, i) = (r / d, r % d);
            let (b, j) = (c / d, c % d);
            m[(a * d + j, b * d + i)]
        },
    )))
}

/// Partial trace over one factor of `C^d1 ⊗ C^d2`; `over_first` selects the slow index.
pub fn partial_trace(m: &ComplexMatrix, d1: usize, d2: usize, over_first: bool) -> ComplexMatrix {
    assert_eq!(m.rows(), d1 * d2);
    if over_first {
        ComplexMatrix::from_fn(d2, d2, |i, j| {
            (0..d1).map(|a| m[(a * d2 + i, a * d2 + j)]).sum()
        })
    } else {
        ComplexMatrix::from_fn(d1, d1, |a, b| {
            (0..d2).map(|i| m[(a * d2 + i, b * d2 + i)]).sum()
        })
    }
}

/// Unnormalized maximally entangled projector `|Ω><Ω|`, `|Ω> = Σ_i e_i ⊗ e_i`.
pub fn max_entangled(d: usize) -> HermitianMatrix {
    let mut omega = vec![re(0.0); d * d];
    for i in 0..d {
        omega[i * d + i] = re(1.0);
    }
    HermitianMatrix::outer(&omega)
}

/// The flip operator `x ⊗ y -> y ⊗ x` on `C^d ⊗ C^d`.
pub fn swap(d: usize) -> HermitianMatrix {
    let mut m = ComplexMatrix::zeros(d * d, d * d);
    for a in 0..d {
        for i in 0..d {
            m[(i * d + a, a * d + i)] = re(1.0);
        }
    }
    HermitianMatrix(m)
}

/// Projection onto the symmetric subspace, `(I + SWAP) / 2`.
pub fn sym_projector(d: usize) -> HermitianMatrix {
    (&HermitianMatrix::identity(d * d) + &swap(d)).scale(0.5)
}

/// Permutation `P` with `|X ⊗ Y> = P (|X> ⊗ |Y>)` for `X` of size `d1` and `Y` of size
/// `d2`, returned as the index map `perm[k]`: component `k` of `|X ⊗ Y>` is component
/// `perm[k]` of `|X> ⊗ |Y>`.
pub fn vec_tensor_permutation(d1: usize, d2: usize) -> Vec<usize> {
    let n = d1 * d2;
    let mut perm = vec![0; n * n];
    for a in 0..d1 {
        for b in 0..d1 {
            for i in 0..d2 {
                for j in 0..d2 {
                    // (X ⊗ Y)[(a,i),(b,j)] sits at row a*d2+i, column b*d2+j.
                    let k = (a * d2 + i) + n * (b * d2 + j);
                    let src = (a + d1 * b) * d2 * d2 + (i + d2 * j);
                    perm[k] = src;
                }
            }
        }
    }
    perm
}

/// Conjugates a `(d1 d2)^2`-dimensional operator written in the `|X> ⊗ |Y>` basis into
/// the `|X ⊗ Y>` basis.
pub fn permute_superoperator(m: &HermitianMatrix, perm: &[usize]) -> HermitianMatrix {
    let n = perm.len();
    assert_eq!(m.dim(), n);
    HermitianMatrix(ComplexMatrix::from_fn(n, n, |i, j| m[(perm[i], perm[j])]))
}

/// Real-coordinate basis of Hermitian `n x n` matrices: diagonal units, then for `i < j`
/// the symmetric `E_ij + E_ji` and antisymmetric `i(E_ij - E_ji)` parts.
///
/// Each element is returned as its sparse entries `(row, col, value)`.
pub fn hermitian_basis(n: usize) -> Vec<Vec<(usize, usize, C64)>> {
    let mut basis = Vec::with_capacity(n * n);
    for i in 0..n {
        basis.push(vec![(i, i, re(1.0))]);
    }
    for i in 0..n {
        for j in i + 1..n {
            basis.push(vec![(i, j, re(1.0)), (j, i, re(1.0))]);
            basis.push(vec![(i, j, c64(0.0, 1.0)), (j, i, c64(0.0, -1.0))]);
        }
    }
    basis
}

/// Real coordinates of a Hermitian matrix: diagonal, then `Re` and `Im` of the upper
/// triangle. Together they determine the matrix.
pub fn hermitian_coordinates(m: &ComplexMatrix) -> Vec<f64> {
    let n = m.rows();
    let mut out = Vec::with_capacity(n * n);
    for i in 0..n {
        out.push(m[(i, i)].re);
    }
    for i in 0..n {
        for j in i + 1..n {
            out.push(m[(i, j)].re);
            out.push(m[(i, j)].im);
        }
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    pub(crate) fn random_matrix(n: usize, m: usize, rng: &mut ChaCha8Rng) -> ComplexMatrix {
        ComplexMatrix::from_fn(n, m, |_, _| {
            c64(rng.random_range(-1.0..1.0), rng.random_range(-1.0..1.0))
        })
    }

    fn random_hermitian(n: usize, rng: &mut ChaCha8Rng) -> HermitianMatrix {
        random_matrix(n, n, rng).hermitian_part()
    }

    fn random_psd(n: usize, rng: &mut ChaCha8Rng) -> HermitianMatrix {
        let g = random_matrix(n, n, rng);
        g.matmul(&g.adjoint()).hermitian_part()
    }

    fn pauli() -> [ComplexMatrix; 3] {
        let x = ComplexMatrix::from_real(2, 2, &[0.0, 1.0, 1.0, 0.0]).unwrap();
        let y = ComplexMatrix::from_vec(2, 2, vec![re(0.0), c64(0.0, -1.0), c64(0.0, 1.0), re(0.0)])
            .unwrap();
        let z = ComplexMatrix::from_real(2, 2, &[1.0, 0.0, 0.0, -1.0]).unwrap();
        [x, y, z]
    }

    #[test]
    fn eig_identity_and_diagonal() {
        let e = HermitianMatrix::identity(2).eig().unwrap();
        assert_eq!(e.values, vec![1.0, 1.0]);
        let v = &e.vectors;
        assert!(v.adjoint().matmul(v).max_abs_diff(&ComplexMatrix::identity(2)) < 1e-14);

        let e = HermitianMatrix::from_real_diag(&[3.0, -1.0]).eig().unwrap();
        assert!((e.values[0] + 1.0).abs() < 1e-14 && (e.values[1] - 3.0).abs() < 1e-14);
    }

    #[test]
    fn eig_reconstructs_random_hermitian() {
        let mut rng = ChaCha8Rng::seed_from_u64(7);
        for n in [1, 2, 3, 4, 7, 9, 16, 30] {
            let m = random_hermitian(n, &mut rng);
            let e = m.eig().unwrap();
            assert!(e.values.windows(2).all(|w| w[0] <= w[1]));
            let rec = e.reconstruct_with(|l| l);
            let tol = 1e-9 * n as f64 * m.max_abs().max(1.0);
            assert!(rec.max_abs_diff(&m) < tol, "n={n}");
            let v = &e.vectors;
            assert!(v.adjoint().matmul(v).max_abs_diff(&ComplexMatrix::identity(n)) < 1e-10);
            let vals_only = m.eigenvalues().unwrap();
            for (a, b) in vals_only.iter().zip(&e.values) {
                assert!((a - b).abs() < 1e-10);
            }
        }
    }

    #[test]
    fn eig_low_rank_with_rounding_noise() {
        let mut rng = ChaCha8Rng::seed_from_u64(11);
        let n = 100;
        let mut m = random_hermitian(n, &mut rng).scale(1e-20);
        for k in 0..4 {
            let v: Vec<C64> = (0..n).map(|i| c64(((i * (k + 3)) % 7) as f64, (i % (k + 2)) as f64)).collect();
            m += &HermitianMatrix::outer(&v).scale(1e-5 * (k + 1) as f64);
        }
        let e = m.eig().unwrap();
        let rec = e.reconstruct_with(|l| l);
        assert!(rec.max_abs_diff(&m) < 1e-12 * m.max_abs().max(1.0));
        let rank = e.values.iter().filter(|l| l.abs() > 1e-12 * m.max_abs()).count();
        assert_eq!(rank, 4);
    }

    #[test]
    fn eig_rejects_non_hermitian_input() {
        let m = ComplexMatrix::from_real(2, 2, &[0.0, 1.0, 0.0, 0.0]).unwrap();
        assert!(matches!(HermitianMatrix::new(m), Err(Error::NotHermitian(_))));
    }

    #[test]
    fn psd_predicate() {
        assert!(HermitianMatrix::identity(3).is_psd(1e-9).unwrap());
        assert!(!HermitianMatrix::from_real_diag(&[1.0, -0.5]).is_psd(1e-9).unwrap());
    }

    #[test]
    fn sqrt_psd_cases() {
        let s = HermitianMatrix::identity(3).sqrt_psd().unwrap();
        assert!(s.max_abs_diff(&ComplexMatrix::identity(3)) < 1e-14);
        let s = HermitianMatrix::from_real_diag(&[4.0, 9.0]).sqrt_psd().unwrap();
        assert!(s.max_abs_diff(&HermitianMatrix::from_real_diag(&[2.0, 3.0])) < 1e-14);

        let [_, _, z] = pauli();
        let rho = (&ComplexMatrix::identity(2) + &z.scale_real(0.5)).scale_real(0.5);
        let rho = HermitianMatrix::new(rho).unwrap();
        let r = rho.sqrt_psd().unwrap();
        assert!(r.matmul(&r).max_abs_diff(&rho) < 1e-14);

        let bad = HermitianMatrix::from_real_diag(&[1.0, -0.5]);
        assert!(matches!(bad.sqrt_psd(), Err(Error::NotPsd(_))));
    }

    #[test]
    fn pinv_sqrt_cases() {
        let p = HermitianMatrix::identity(2).pinv_sqrt().unwrap();
        assert!(p.max_abs_diff(&ComplexMatrix::identity(2)) < 1e-14);
        let p = HermitianMatrix::from_real_diag(&[4.0, 0.0]).pinv_sqrt().unwrap();
        assert!(p.max_abs_diff(&HermitianMatrix::from_real_diag(&[0.5, 0.0])) < 1e-14);
    }

    #[test]
    fn sqrt_and_pinv_sqrt_on_random_psd() {
        let mut rng = ChaCha8Rng::seed_from_u64(11);
        for n in 1..=9 {
            // rank-deficient on purpose
            let g = random_matrix(n, (n + 1) / 2, &mut rng);
            let m = g.matmul(&g.adjoint()).hermitian_part();
            let s = m.sqrt_psd().unwrap();
            let tol = 1e-9 * n as f64 * m.max_abs().max(1.0);
            assert!(s.matmul(&s).max_abs_diff(&m) < tol);
            let p = m.pinv_sqrt().unwrap();
            let proj = p.matmul(&m).matmul(&p);
            let supp = m.support_projector().unwrap();
            assert!(proj.max_abs_diff(&supp) < 1e-8);
            assert!(supp.matmul(&supp).max_abs_diff(&supp) < 1e-10);
        }
    }

    #[test]
    fn trace_norm_cases() {
        assert_eq!(HermitianMatrix::from_real_diag(&[1.0, -1.0]).trace_norm().unwrap(), 2.0);
        assert_eq!(HermitianMatrix::zeros(3).trace_norm().unwrap(), 0.0);
        // Difference of the two Fourier (Hadamard) basis Fisher-like projectors in d=2:
        // X1 - X2 with X1 = diag(1,0), X2 = |+><+| has eigenvalues ±1/sqrt(2).
        let x1 = HermitianMatrix::from_real_diag(&[1.0, 0.0]);
        let x2 = HermitianMatrix::from_real(2, &[0.5, 0.5, 0.5, 0.5]).unwrap();
        let tn = (&x1 - &x2).trace_norm().unwrap();
        assert!((tn - 2.0_f64.sqrt()).abs() < 1e-14);
    }

    #[test]
    fn vectorize_conventions() {
        let v = vectorize(&ComplexMatrix::identity(2));
        assert_eq!(v.0, vec![re(1.0), re(0.0), re(0.0), re(1.0)]);
        let mut e01 = ComplexMatrix::zeros(2, 2);
        e01[(0, 1)] = re(1.0);
        let v = vectorize(&e01);
        assert_eq!(v.0.iter().position(|z| z.re == 1.0), Some(2));
        let back = unvectorize(v.as_slice(), 2).unwrap();
        assert_eq!(back, e01);
    }

    #[test]
    fn vectorize_of_tensor_is_permuted_tensor_of_vectors() {
        let mut rng = ChaCha8Rng::seed_from_u64(3);
        for (d1, d2) in [(2, 2), (2, 3), (3, 2)] {
            let x = random_matrix(d1, d1, &mut rng);
            let y = random_matrix(d2, d2, &mut rng);
            let lhs = vectorize(&tensor(&x, &y));
            let vx = vectorize(&x);
            let vy = vectorize(&y);
            let kron: Vec<C64> = vx
                .0
                .iter()
                .flat_map(|a| vy.0.iter().map(move |b| a * b))
                .collect();
            let perm = vec_tensor_permutation(d1, d2);
            for (k, &src) in perm.iter().enumerate() {
                assert!((lhs.0[k] - kron[src]).norm() < 1e-14);
            }
        }
    }

    #[test]
    fn tensor_cases() {
        let i4 = tensor(&ComplexMatrix::identity(2), &ComplexMatrix::identity(2));
        assert_eq!(i4, ComplexMatrix::identity(4));
        let [_, _, z] = pauli();
        let zz = tensor(&z, &z);
        let expected = ComplexMatrix::diag(&[re(1.0), re(-1.0), re(-1.0), re(1.0)]);
        assert_eq!(zz, expected);
        let mut rng = ChaCha8Rng::seed_from_u64(5);
        let (a, b, c, d) = (
            random_matrix(2, 2, &mut rng),
            random_matrix(2, 2, &mut rng),
            random_matrix(2, 2, &mut rng),
            random_matrix(2, 2, &mut rng),
        );
        let lhs = tensor(&a, &b).matmul(&tensor(&c, &d));
        let rhs = tensor(&a.matmul(&c), &b.matmul(&d));
        assert!(lhs.max_abs_diff(&rhs) < 1e-13);
    }

    #[test]
    fn partial_transpose_cases() {
        let pt = partial_transpose(&max_entangled(2)).unwrap();
        assert_eq!(pt.as_matrix(), swap(2).as_matrix());
        let mut rng = ChaCha8Rng::seed_from_u64(9);
        let a = random_hermitian(3, &mut rng);
        let b = random_hermitian(3, &mut rng);
        let ab = tensor_herm(&a, &b);
        let lhs = partial_transpose(&ab).unwrap();
        let rhs = tensor(&a, &b.transpose());
        assert!(lhs.max_abs_diff(&rhs) < 1e-14);
        let twice = partial_transpose(&lhs).unwrap();
        assert!(twice.max_abs_diff(&ab) < 1e-15);
        assert!(matches!(
            partial_transpose(&HermitianMatrix::identity(3)),
            Err(Error::DimNotSquare(3))
        ));
    }

    #[test]
    fn entangled_and_symmetric_projectors() {
        for d in 1..=4 {
            assert_eq!(max_entangled(d).trace_re(), d as f64);
            let p = sym_projector(d);
            assert!(p.matmul(&p).max_abs_diff(&p) < 1e-14);
            assert!((p.trace_re() - (d * (d + 1) / 2) as f64).abs() < 1e-12);
        }
    }

    #[test]
    fn partial_trace_of_product() {
        let mut rng = ChaCha8Rng::seed_from_u64(2);
        let a = random_hermitian(2, &mut rng);
        let b = random_hermitian(3, &mut rng);
        let ab = tensor(&a, &b);
        let tb = partial_trace(&ab, 2, 3, true);
        assert!(tb.max_abs_diff(&b.scale(a.trace_re())) < 1e-13);
        let ta = partial_trace(&ab, 2, 3, false);
        assert!(ta.max_abs_diff(&a.scale(b.trace_re())) < 1e-13);
    }

    #[test]
    fn hermitian_basis_spans_coordinates() {
        let n = 3;
        let basis = hermitian_basis(n);
        assert_eq!(basis.len(), n * n);
        let mut rng = ChaCha8Rng::seed_from_u64(4);
        let m = random_hermitian(n, &mut rng);
        let coords = hermitian_coordinates(&m);
        let mut rebuilt = ComplexMatrix::zeros(n, n);
        for (k, elem) in basis.iter().enumerate() {
            for &(i, j, v) in elem {
                rebuilt[(i, j)] += v * coords[k];
            }
        }
        assert!(rebuilt.max_abs_diff(&m) < 1e-15);
    }

    mod props {
        use super::*;
        use proptest::prelude::*;

        proptest! {
            #[test]
            fn vectorize_is_linear(seed in 0u64..1000, a in -3.0f64..3.0, b in -3.0f64..3.0) {
                let mut rng = ChaCha8Rng::seed_from_u64(seed);
                let x = random_matrix(3, 3, &mut rng);
                let y = random_matrix(3, 3, &mut rng);
                let lhs = vectorize(&(&x.scale_real(a) + &y.scale_real(b)));
                let vx = vectorize(&x);
                let vy = vectorize(&y);
                for k in 0..9 {
                    prop_assert!((lhs.0[k] - (vx.0[k] * a + vy.0[k] * b)).norm() < 1e-12);
                }
            }

            #[test]
            fn trace_norm_matches_eigen_route(seed in 0u64..1000, n in 1usize..8) {
                let mut rng = ChaCha8Rng::seed_from_u64(seed);
                let m = random_hermitian(n, &mut rng);
                let e = m.eig().unwrap();
                let oracle: f64 = e.values.iter().map(|l| l.abs()).sum();
                prop_assert!((m.trace_norm().unwrap() - oracle).abs() < 1e-10);
            }

            #[test]
            fn psd_square_root_squares_back(seed in 0u64..1000, n in 1usize..9) {
                let mut rng = ChaCha8Rng::seed_from_u64(seed);
                let m = random_psd(n, &mut rng);
                let s = m.sqrt_psd().unwrap();
                prop_assert!(s.is_psd(1e-9).unwrap());
                prop_assert!(s.matmul(&s).max_abs_diff(&m) < 1e-9 * n as f64 * m.max_abs().max(1.0));
            }
        }
    }
}
