//! Dense complex linear algebra: matrices, Hermitian operators, density
//! matrices, Kronecker products and the Hermitian eigensolver.

mod eigen;
mod lstsq;
mod matrix;

use std::sync::OnceLock;

pub use eigen::{hermitian_eigen, hermitian_eigenvalues, Eigen};
pub use lstsq::{least_squares, LeastSquares};
pub use matrix::{kron, kron_capped, kron_vec, ComplexMatrix, DEFAULT_DIM_CAP};

use crate::error::{Error, Result};
use crate::scalar::{Real, C};

/// Default absolute tolerance for Hermiticity, trace and positivity checks.
pub const DEFAULT_TOL: f64 = 1e-9;

/// Square matrix equal to its adjoint within a tolerance, with lazily
/// cached spectral data.
#[derive(Clone, Debug)]
pub struct HermitianOperator<T> {
    matrix: ComplexMatrix<T>,
    tol: T,
    spectrum: OnceLock<Eigen<T>>,
    eigenvalues: OnceLock<Vec<T>>,
}

impl<T: Real> HermitianOperator<T> {
    pub fn new(matrix: ComplexMatrix<T>) -> Result<Self> {
        Self::with_tol(matrix, T::lit(DEFAULT_TOL))
    }

    /// Accepts `matrix` if `‖M − M†‖_max ≤ tol`; the stored matrix is the
    /// exact Hermitian part.
    pub fn with_tol(matrix: ComplexMatrix<T>, tol: T) -> Result<Self> {
        if !matrix.is_square() {
            return Err(Error::NotSquare { rows: matrix.rows(), cols: matrix.cols() });
        }
        let deviation = matrix.hermiticity_deviation();
        if deviation.is_nan() || deviation > tol {
            return Err(Error::NotHermitian { deviation: deviation.as_f64(), tol: tol.as_f64() });
        }
        Ok(Self::trusted_with_tol(matrix.hermitian_part(), tol))
    }

    /// For matrices Hermitian by construction (sums, real multiples and
    /// conjugations of Hermitian operators).
    pub(crate) fn trusted(matrix: ComplexMatrix<T>) -> Self {
        Self::trusted_with_tol(matrix, T::lit(DEFAULT_TOL))
    }

    pub(crate) fn trusted_with_tol(matrix: ComplexMatrix<T>, tol: T) -> Self {
        Self { matrix, tol, spectrum: OnceLock::new(), eigenvalues: OnceLock::new() }
    }

    pub fn from_real_diagonal(diag: &[T]) -> Self {
        Self::trusted(ComplexMatrix::from_real_diagonal(diag))
    }

    pub fn identity(d: usize) -> Self {
        Self::trusted(ComplexMatrix::identity(d))
    }

    pub fn matrix(&self) -> &ComplexMatrix<T> {
        &self.matrix
    }

    pub fn into_matrix(self) -> ComplexMatrix<T> {
        self.matrix
    }

    pub fn dim(&self) -> usize {
        self.matrix.rows()
    }

    pub fn tol(&self) -> T {
        self.tol
    }

    /// Eigendecomposition, computed on first use.
    pub fn spectrum(&self) -> Result<&Eigen<T>> {
        if let Some(e) = self.spectrum.get() {
            return Ok(e);
        }
        let e = hermitian_eigen(&self.matrix)?;
        Ok(self.spectrum.get_or_init(|| e))
    }

    /// Ascending eigenvalues, from the cached decomposition when present.
    pub fn eigenvalues(&self) -> Result<&[T]> {
        if let Some(e) = self.spectrum.get() {
            return Ok(&e.values);
        }
        if let Some(v) = self.eigenvalues.get() {
            return Ok(v);
        }
        let v = hermitian_eigenvalues(&self.matrix)?;
        Ok(self.eigenvalues.get_or_init(|| v))
    }

    pub fn min_eigenvalue(&self) -> Result<T> {
        Ok(self.eigenvalues()?.first().copied().unwrap_or(T::zero()))
    }

    /// `(λ_min, λ_max)`.
    pub fn eigen_range(&self) -> Result<(T, T)> {
        let v = self.eigenvalues()?;
        Ok((v.first().copied().unwrap_or(T::zero()), v.last().copied().unwrap_or(T::zero())))
    }

    /// Largest eigenvalue modulus.
    pub fn spectral_norm(&self) -> Result<T> {
        let (lo, hi) = self.eigen_range()?;
        Ok(lo.abs().max(hi.abs()))
    }

    pub fn scale(&self, s: T) -> Self {
        Self::trusted_with_tol(self.matrix.scale_real(s), self.tol)
    }

    pub fn square(&self) -> Self {
        Self::trusted_with_tol((&self.matrix * &self.matrix).hermitian_part(), self.tol)
    }
}

impl<T: Real> PartialEq for HermitianOperator<T> {
    fn eq(&self, other: &Self) -> bool {
        self.matrix == other.matrix
    }
}

/// Positive semidefinite, unit-trace matrix.
#[derive(Clone, Debug)]
pub struct DensityMatrix<T> {
    matrix: ComplexMatrix<T>,
}

impl<T: Real> DensityMatrix<T> {
    pub fn new(matrix: ComplexMatrix<T>) -> Result<Self> {
        Self::with_tolerances(matrix, T::lit(DEFAULT_TOL), T::lit(DEFAULT_TOL))
    }

    pub fn with_tolerances(matrix: ComplexMatrix<T>, trace_tol: T, psd_tol: T) -> Result<Self> {
        let h = HermitianOperator::with_tol(matrix, psd_tol)?;
        let trace = h.matrix().trace().re;
        if (trace - T::one()).abs().is_nan() || (trace - T::one()).abs() > trace_tol {
            return Err(Error::StateTrace { trace: trace.as_f64(), tol: trace_tol.as_f64() });
        }
        let min = h.min_eigenvalue()?;
        if min < -psd_tol {
            return Err(Error::StateNotPsd { min_eigenvalue: min.as_f64(), tol: psd_tol.as_f64() });
        }
        Ok(Self { matrix: h.into_matrix() })
    }

    pub(crate) fn trusted(matrix: ComplexMatrix<T>) -> Self {
        Self { matrix }
    }

    /// `|ψ⟩⟨ψ| / ⟨ψ|ψ⟩`.
    pub fn pure(psi: &[C<T>]) -> Result<Self> {
        let norm2: T = psi.iter().map(|z| z.norm_sqr()).sum();
        if norm2.is_nan() || norm2 <= T::zero() || !norm2.is_finite() {
            return Err(Error::InvalidArgument("state vector has zero or non-finite norm".into()));
        }
        Ok(Self { matrix: ComplexMatrix::outer(psi, psi).scale_real(T::one() / norm2) })
    }

    pub fn maximally_mixed(d: usize) -> Self {
        Self { matrix: ComplexMatrix::identity(d).scale_real(T::one() / T::from_count(d)) }
    }

    pub fn matrix(&self) -> &ComplexMatrix<T> {
        &self.matrix
    }

    pub fn dim(&self) -> usize {
        self.matrix.rows()
    }

    /// `ρ^⊗n` under the given dimension cap.
    pub fn tensor_power(&self, n: usize, cap: usize) -> Result<DensityMatrix<T>> {
        if n == 0 {
            return Err(Error::ZeroCopies);
        }
        let mut acc = self.matrix.clone();
        for _ in 1..n {
            acc = kron_capped(&acc, &self.matrix, cap)?;
        }
        Ok(Self { matrix: acc })
    }
}

/// Spectral decomposition of a Hermitian operator.
pub fn eigh<T: Real>(h: &HermitianOperator<T>) -> Result<Eigen<T>> {
    h.spectrum().cloned()
}

pub fn min_eigenvalue<T: Real>(h: &HermitianOperator<T>) -> Result<T> {
    h.min_eigenvalue()
}

/// `Re Tr[ρ h]`, rejecting an imaginary residue above `1e-10·max(1, ‖h‖)`.
pub fn expect<T: Real>(h: &HermitianOperator<T>, s: &DensityMatrix<T>) -> Result<T> {
    if h.dim() != s.dim() {
        return Err(Error::DimensionMismatch(format!(
            "observable of dimension {} on state of dimension {}",
            h.dim(),
            s.dim()
        )));
    }
    let t = s.matrix().trace_product(h.matrix())?;
    let limit = imag_residue_limit::<T>() * h.matrix().max_abs().max(T::one());
    if t.im.abs() > limit {
        return Err(Error::Numeric(format!("expectation has imaginary part {:e}", t.im.as_f64())));
    }
    Ok(t.re)
}

pub(crate) fn imag_residue_limit<T: Real>() -> T {
    T::lit(1e-10).max(T::epsilon() * T::lit(1e4))
}

/// `Re Tr[ρ h]` for matrices of any origin; used where the joint state was
/// already validated.
pub(crate) fn real_trace_product<T: Real>(a: &ComplexMatrix<T>, b: &ComplexMatrix<T>) -> Result<T> {
    Ok(a.trace_product(b)?.re)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn z() -> HermitianOperator<f64> {
        HermitianOperator::from_real_diagonal(&[1.0, -1.0])
    }

    #[test]
    fn expectation_of_z() {
        let zero = DensityMatrix::pure(&[C::new(1.0, 0.0), C::new(0.0, 0.0)]).unwrap();
        assert_eq!(expect(&z(), &zero).unwrap(), 1.0);
        assert_eq!(expect(&z(), &DensityMatrix::maximally_mixed(2)).unwrap(), 0.0);
    }

    #[test]
    fn min_eigenvalues() {
        assert!((min_eigenvalue(&HermitianOperator::<f64>::identity(2)).unwrap() - 1.0).abs() < 1e-15);
        assert!((min_eigenvalue(&z()).unwrap() + 1.0).abs() < 1e-15);
        let plus: DensityMatrix<f64> = DensityMatrix::pure(&[C::new(1.0, 0.0), C::new(1.0, 0.0)]).unwrap();
        let proj = HermitianOperator::new(plus.matrix().clone()).unwrap();
        assert!(min_eigenvalue(&proj).unwrap().abs() < 1e-12);
    }

    #[test]
    fn rejects_non_hermitian() {
        let m = ComplexMatrix::from_vec(2, 2, vec![C::new(0.0, 0.0), C::new(1.0, 0.0), C::new(0.0, 0.0), C::new(0.0, 0.0)]).unwrap();
        assert_eq!(HermitianOperator::new(m).unwrap_err().code(), "NOT_HERMITIAN");
        let rect = ComplexMatrix::<f64>::zeros(2, 3);
        assert_eq!(HermitianOperator::new(rect).unwrap_err().code(), "NOT_SQUARE");
    }

    #[test]
    fn density_validation() {
        let bad_trace = ComplexMatrix::<f64>::identity(2);
        assert_eq!(DensityMatrix::new(bad_trace).unwrap_err().code(), "STATE_TRACE");
        let neg = ComplexMatrix::from_real_diagonal(&[1.5, -0.5]);
        assert_eq!(DensityMatrix::new(neg).unwrap_err().code(), "STATE_PSD");
    }

    #[test]
    fn expectation_dimension_mismatch() {
        let rho = DensityMatrix::<f64>::maximally_mixed(3);
        assert_eq!(expect(&z(), &rho).unwrap_err().code(), "DIM_MISMATCH");
    }

    #[test]
    fn tensor_power_trace_and_cap() {
        let rho = DensityMatrix::<f64>::maximally_mixed(2);
        let p = rho.tensor_power(3, 4096).unwrap();
        assert_eq!(p.dim(), 8);
        assert!((p.matrix().trace().re - 1.0).abs() < 1e-15);
        assert_eq!(rho.tensor_power(13, 4096).unwrap_err().code(), "DIM_CAP");
    }
}
