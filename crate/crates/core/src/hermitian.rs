//! Dense complex Hermitian matrices.

use nalgebra::{DMatrix, DVector, SymmetricEigen};
use num_complex::Complex64;

use crate::error::{Error, Result};

const ASYMMETRY_TOL: f64 = 1e-12;

/// Hermitian `n×n` matrix. The stored entries are exactly Hermitian: the
/// constructors symmetrize as `(A + A*)/2`.
#[derive(Clone, Debug, PartialEq)]
pub struct HermitianMatrix(DMatrix<Complex64>);

impl HermitianMatrix {
    /// Accepts `a` when its asymmetry `max |a_ij − conj(a_ji)|` is at most
    /// `1e−12·‖a‖_F`, then symmetrizes.
    pub fn new(a: DMatrix<Complex64>) -> Result<Self> {
        if !a.is_square() {
            return Err(Error::DimensionMismatch {
                expected: a.nrows(),
                got: a.ncols(),
            });
        }
        if a.iter().any(|z| !(z.re.is_finite() && z.im.is_finite())) {
            return Err(Error::param("matrix", "entries must be finite"));
        }
        let asymmetry = (&a - a.adjoint()).iter().map(|z| z.norm()).fold(0.0, f64::max);
        let tolerance = ASYMMETRY_TOL * a.norm();
        if asymmetry > tolerance {
            return Err(Error::NotHermitian { asymmetry, tolerance });
        }
        Ok(Self::symmetrized(a))
    }

    /// `(a + a*)/2` without any tolerance check.
    pub fn symmetrized(a: DMatrix<Complex64>) -> Self {
        let h = (&a + a.adjoint()) * Complex64::new(0.5, 0.0);
        Self(h)
    }

    pub fn identity(n: usize) -> Self {
        Self(DMatrix::identity(n, n))
    }

    pub fn zeros(n: usize) -> Self {
        Self(DMatrix::zeros(n, n))
    }

    pub fn from_real_diagonal(d: &[f64]) -> Self {
        let v = DVector::from_iterator(d.len(), d.iter().map(|&x| Complex64::new(x, 0.0)));
        Self(DMatrix::from_diagonal(&v))
    }

    /// `u·u*`
    pub fn outer(u: &DVector<Complex64>) -> Self {
        Self::symmetrized(u * u.adjoint())
    }

    /// Row-major complex entries.
    pub fn from_rows(n: usize, entries: &[Complex64]) -> Result<Self> {
        if entries.len() != n * n {
            return Err(Error::DimensionMismatch {
                expected: n * n,
                got: entries.len(),
            });
        }
        Self::new(DMatrix::from_row_slice(n, n, entries))
    }

    pub fn size(&self) -> usize {
        self.0.nrows()
    }

    pub fn as_matrix(&self) -> &DMatrix<Complex64> {
        &self.0
    }

    pub fn into_matrix(self) -> DMatrix<Complex64> {
        self.0
    }

    pub fn get(&self, i: usize, j: usize) -> Complex64 {
        self.0[(i, j)]
    }

    pub fn frobenius_norm(&self) -> f64 {
        self.0.norm()
    }

    pub fn trace(&self) -> f64 {
        self.0.diagonal().iter().map(|z| z.re).sum()
    }

    pub fn scale(&self, c: f64) -> Self {
        Self(&self.0 * Complex64::new(c, 0.0))
    }

    /// `a·self + b·other`
    pub fn combine(&self, a: f64, other: &Self, b: f64) -> Result<Self> {
        self.check_size(other)?;
        Ok(Self::symmetrized(
            &self.0 * Complex64::new(a, 0.0) + &other.0 * Complex64::new(b, 0.0),
        ))
    }

    /// `self + δI`
    pub fn shifted(&self, delta: f64) -> Self {
        let mut m = self.0.clone();
        for i in 0..m.nrows() {
            m[(i, i)] += delta;
        }
        Self(m)
    }

    /// `Re trace(A* B)`
    pub fn frobenius_inner(&self, other: &Self) -> Result<f64> {
        self.check_size(other)?;
        Ok(self.0.iter().zip(other.0.iter()).map(|(a, b)| (a.conj() * b).re).sum())
    }

    pub fn distance(&self, other: &Self) -> Result<f64> {
        self.check_size(other)?;
        Ok((&self.0 - &other.0).norm())
    }

    /// `Q·self·Q*`
    pub fn conjugated_by(&self, q: &DMatrix<Complex64>) -> Self {
        Self::symmetrized(q * &self.0 * q.adjoint())
    }

    /// `x* A y`
    pub fn sesquilinear(&self, x: &[Complex64], y: &[Complex64]) -> Complex64 {
        x.iter()
            .enumerate()
            .map(|(i, xi)| {
                xi.conj()
                    * y.iter()
                        .enumerate()
                        .map(|(j, yj)| self.0[(i, j)] * yj)
                        .sum::<Complex64>()
            })
            .sum()
    }

    pub fn eigendecompose(&self) -> Result<EigenDecomposition> {
        let eig = SymmetricEigen::try_new(self.0.clone(), 1e-15, 10_000).ok_or(Error::EigenNonConvergence)?;
        let n = self.size();
        let mut order: Vec<usize> = (0..n).collect();
        // stable sort keeps the routine's order for ties
        order.sort_by(|&a, &b| eig.eigenvalues[b].total_cmp(&eig.eigenvalues[a]));
        let values: Vec<f64> = order.iter().map(|&i| eig.eigenvalues[i]).collect();
        let mut vectors = DMatrix::zeros(n, n);
        for (dst, &src) in order.iter().enumerate() {
            vectors.set_column(dst, &eig.eigenvectors.column(src));
        }
        if values.iter().any(|v| !v.is_finite()) {
            return Err(Error::EigenNonConvergence);
        }
        Ok(EigenDecomposition { vectors, values })
    }

    pub fn eigenvalues(&self) -> Result<Vec<f64>> {
        Ok(self.eigendecompose()?.values)
    }

    pub fn min_eigenvalue(&self) -> Result<f64> {
        Ok(*self.eigenvalues()?.last().expect("matrix is nonempty"))
    }

    fn check_size(&self, other: &Self) -> Result<()> {
        if self.size() != other.size() {
            return Err(Error::DimensionMismatch {
                expected: self.size(),
                got: other.size(),
            });
        }
        Ok(())
    }
}

/// `A = U diag(λ) U*` with `λ` sorted descending.
#[derive(Clone, Debug)]
pub struct EigenDecomposition {
    pub vectors: DMatrix<Complex64>,
    pub values: Vec<f64>,
}

impl EigenDecomposition {
    /// `U diag(d) U*`
    pub fn reassemble(&self, d: &[f64]) -> HermitianMatrix {
        let mut scaled = self.vectors.clone();
        for (j, &dj) in d.iter().enumerate() {
            scaled.column_mut(j).scale_mut(dj);
        }
        HermitianMatrix::symmetrized(scaled * self.vectors.adjoint())
    }
}

/// `⟨A, B⟩_F = Re trace(A* B)`
pub fn frobenius_inner(a: &HermitianMatrix, b: &HermitianMatrix) -> Result<f64> {
    a.frobenius_inner(b)
}
