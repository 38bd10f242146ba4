use serde::{Deserialize, Serialize};

use super::matrix::ComplexMatrix;
use super::DIM;
use crate::error::{Error, Result};
use crate::scalar::{Real, Scalar};

/// Acceptance thresholds for density-matrix validity.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct Tolerances {
    pub herm: f64,
    pub trace: f64,
    pub psd: f64,
}

impl Default for Tolerances {
    fn default() -> Self {
        Self { herm: 1e-10, trace: 1e-10, psd: 1e-8 }
    }
}

/// A 4×4 two-qubit density matrix.
#[derive(Clone, Debug, PartialEq)]
pub struct DensityMatrix<T> {
    mat: ComplexMatrix<T>,
}

impl<T: Scalar> DensityMatrix<T> {
    /// Wraps a matrix without checking the physical invariants.
    pub fn new_unchecked(mat: ComplexMatrix<T>) -> Self {
        assert!(mat.rows() == DIM && mat.cols() == DIM, "density matrix must be 4x4");
        Self { mat }
    }

    pub fn matrix(&self) -> &ComplexMatrix<T> {
        &self.mat
    }

    pub fn into_matrix(self) -> ComplexMatrix<T> {
        self.mat
    }
}

impl<T: Real> DensityMatrix<T> {
    pub fn new(mat: ComplexMatrix<T>, tol: &Tolerances) -> Result<Self> {
        if mat.rows() != DIM || mat.cols() != DIM {
            return Err(Error::Dimension(format!("density matrix must be 4x4, got {}x{}", mat.rows(), mat.cols())));
        }
        let rho = Self { mat };
        rho.validate(tol)?;
        Ok(rho)
    }

    /// Checks Hermiticity, unit trace and positive semidefiniteness.
    pub fn validate(&self, tol: &Tolerances) -> Result<()> {
        if !self.mat.is_finite() {
            return Err(Error::InvalidState("non-finite entries".into()));
        }
        let herm = self.mat.hermiticity_defect().to_f64_lossy();
        if herm > tol.herm {
            return Err(Error::InvalidState(format!("hermiticity defect {herm:e} exceeds {:e}", tol.herm)));
        }
        let tr = self.mat.trace();
        let tr_err = (tr.re - T::one()).hypot(tr.im).to_f64_lossy();
        if tr_err > tol.trace {
            return Err(Error::InvalidState(format!("trace error {tr_err:e} exceeds {:e}", tol.trace)));
        }
        let min_ev = self.min_eigenvalue().to_f64_lossy();
        if min_ev < -tol.psd {
            return Err(Error::InvalidState(format!("minimum eigenvalue {min_ev:e} below -{:e}", tol.psd)));
        }
        Ok(())
    }

    pub fn min_eigenvalue(&self) -> T {
        self.mat.hermitian_eigenvalues().into_iter().fold(T::infinity(), T::min)
    }

    pub fn eigenvalues(&self) -> Vec<T> {
        self.mat.hermitian_eigenvalues()
    }

    pub fn hs_dist_sq(&self, other: &Self) -> T {
        super::hs_dist_sq(&self.mat, &other.mat)
    }

    /// Converts to the real 16-coordinate layout: the upper triangle read
    /// row by row, diagonal entries as a single real value, off-diagonal
    /// entries as real part followed by imaginary part.
    pub fn to_real_coords(&self) -> [T; 16] {
        let mut x = [T::zero(); 16];
        let mut k = 0;
        for r in 0..DIM {
            for c in r..DIM {
                let z = self.mat.get(r, c);
                if r == c {
                    x[k] = z.re;
                    k += 1;
                } else {
                    x[k] = z.re;
                    x[k + 1] = z.im;
                    k += 2;
                }
            }
        }
        x
    }

    /// Inverse of [`to_real_coords`](Self::to_real_coords); the result is Hermitian by construction.
    pub fn from_real_coords(x: &[T; 16]) -> Self {
        let mut mat = ComplexMatrix::zeros(DIM, DIM);
        let mut k = 0;
        for r in 0..DIM {
            for c in r..DIM {
                if r == c {
                    mat.set(r, c, num_complex::Complex::new(x[k], T::zero()));
                    k += 1;
                } else {
                    let z = num_complex::Complex::new(x[k], x[k + 1]);
                    mat.set(r, c, z);
                    mat.set(c, r, z.conj());
                    k += 2;
                }
            }
        }
        Self { mat }
    }
}
