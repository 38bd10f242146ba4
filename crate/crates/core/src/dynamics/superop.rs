//! Column-stacked vectorization and the affine Liouvillian split.
//!
//! `vec(ρ)[c·4 + r] = ρ[r, c]`, so that `vec(AρB) = (Bᵀ ⊗ A) vec(ρ)`.

use num_complex::Complex;

use super::system::{SystemOperators, SystemSpec};
use crate::quantum::{ComplexMatrix, DIM};
use crate::scalar::Real;

/// Dimension of the vectorized state space.
pub const VEC_DIM: usize = DIM * DIM;

#[derive(Clone, Debug, PartialEq)]
pub struct Superoperator<T> {
    pub mat: ComplexMatrix<T>,
}

impl<T: Real> Superoperator<T> {
    pub fn zero() -> Self {
        Self { mat: ComplexMatrix::zeros(VEC_DIM, VEC_DIM) }
    }

    /// `X ↦ A X B`.
    pub fn sandwich(a: &ComplexMatrix<T>, b: &ComplexMatrix<T>) -> Self {
        Self { mat: b.transpose().kron(a) }
    }

    /// `X ↦ −i[H, X]`.
    pub fn commutator(h: &ComplexMatrix<T>) -> Self {
        let id = ComplexMatrix::identity(DIM);
        let left = Self::sandwich(h, &id).mat;
        let right = Self::sandwich(&id, h).mat;
        Self { mat: (&left - &right).scale(Complex::new(T::zero(), -T::one())) }
    }

    /// `X ↦ 2 L X L† − L†L X − X L†L`.
    pub fn lindblad(jump: &ComplexMatrix<T>) -> Self {
        let id = ComplexMatrix::identity(DIM);
        let jd = jump.adjoint();
        let jdj = jd.matmul(jump);
        let sandwich = Self::sandwich(jump, &jd).mat.scale_real(T::lit(2.0));
        let left = Self::sandwich(&jdj, &id).mat;
        let right = Self::sandwich(&id, &jdj).mat;
        Self { mat: &(&sandwich - &left) - &right }
    }

    pub fn apply(&self, rho: &ComplexMatrix<T>) -> ComplexMatrix<T> {
        unvec(&matvec(self.mat.as_slice(), &vec_of(rho)))
    }

    fn axpy(&mut self, s: T, other: &Self) {
        for (a, b) in self.mat.as_mut_slice().iter_mut().zip(other.mat.as_slice()) {
            *a += *b * s;
        }
    }
}

/// Control-affine pieces of the generator: `L = l0 + u·l_u + n₁·l_n1 + n₂·l_n2`.
#[derive(Clone, Debug, PartialEq)]
pub struct LiouvillianParts<T> {
    pub l0: Superoperator<T>,
    pub l_u: Superoperator<T>,
    pub l_n1: Superoperator<T>,
    pub l_n2: Superoperator<T>,
}

pub fn liouvillian_parts<T: Real>(ops: &SystemOperators<T>, spec: &SystemSpec<T>) -> LiouvillianParts<T> {
    let eps = spec.eps;
    let mut l0 = Superoperator::commutator(&ops.h_free);
    let mut l_n = [Superoperator::zero(), Superoperator::zero()];
    for j in 0..2 {
        let down = Superoperator::lindblad(&ops.lowering[j]);
        let up = Superoperator::lindblad(&ops.raising[j]);
        let rate = eps * ops.decay[j];
        // Ωⱼ(nⱼ + 1) splits into a constant Ωⱼ part and an nⱼ-proportional part.
        l0.axpy(rate, &down);
        l_n[j].axpy(eps, &Superoperator::commutator(&ops.h_eff[j]));
        l_n[j].axpy(rate, &down);
        l_n[j].axpy(rate, &up);
    }
    let [l_n1, l_n2] = l_n;
    LiouvillianParts { l0, l_u: Superoperator::commutator(&ops.v), l_n1, l_n2 }
}

impl<T: Real> LiouvillianParts<T> {
    pub fn assemble(&self, u: T, n1: T, n2: T) -> Superoperator<T> {
        let mut out = self.l0.clone();
        self.assemble_into(u, n1, n2, &mut out.mat);
        out
    }

    /// Writes `l0 + u·l_u + n₁·l_n1 + n₂·l_n2` into `out` (16×16).
    pub(crate) fn assemble_into(&self, u: T, n1: T, n2: T, out: &mut ComplexMatrix<T>) {
        let dst = out.as_mut_slice();
        let (a, b, c, d) = (self.l0.mat.as_slice(), self.l_u.mat.as_slice(), self.l_n1.mat.as_slice(), self.l_n2.mat.as_slice());
        for i in 0..dst.len() {
            dst[i] = a[i] + b[i] * u + c[i] * n1 + d[i] * n2;
        }
    }
}

pub fn vec_of<T: Real>(rho: &ComplexMatrix<T>) -> Vec<Complex<T>> {
    let (r, c) = (rho.rows(), rho.cols());
    let mut v = Vec::with_capacity(r * c);
    for col in 0..c {
        for row in 0..r {
            v.push(*rho.get(row, col));
        }
    }
    v
}

pub fn unvec<T: Real>(v: &[Complex<T>]) -> ComplexMatrix<T> {
    let n = (v.len() as f64).sqrt() as usize;
    assert_eq!(n * n, v.len(), "unvec of non-square length");
    ComplexMatrix::from_fn(n, n, |r, c| v[c * n + r])
}

pub(crate) fn matvec<T: Real>(m: &[Complex<T>], v: &[Complex<T>]) -> Vec<Complex<T>> {
    let n = v.len();
    debug_assert_eq!(m.len(), n * n);
    let mut out = vec![Complex::new(T::zero(), T::zero()); n];
    for (i, o) in out.iter_mut().enumerate() {
        let row = &m[i * n..(i + 1) * n];
        let mut acc = Complex::new(T::zero(), T::zero());
        for (a, b) in row.iter().zip(v) {
            acc = acc + *a * *b;
        }
        *o = acc;
    }
    out
}
