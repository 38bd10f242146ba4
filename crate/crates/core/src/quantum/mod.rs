//! Two-qubit operator algebra: Pauli and ladder matrices, target gates,
//! the three-state initial set and Hilbert–Schmidt distances.

mod density;
pub(crate) mod eigen;
mod matrix;

use std::fmt;
use std::str::FromStr;

use num_complex::Complex;
use serde::{Deserialize, Serialize};

pub use density::{DensityMatrix, Tolerances};
pub use matrix::ComplexMatrix;

use crate::error::Error;
use crate::scalar::{Real, Scalar};

/// Two-qubit Hilbert space dimension.
pub const DIM: usize = 4;

pub fn identity2<T: Scalar>() -> ComplexMatrix<T> {
    ComplexMatrix::identity(2)
}

pub fn sigma_x<T: Scalar>() -> ComplexMatrix<T> {
    ComplexMatrix::from_int_rows(&[[0, 1], [1, 0]])
}

pub fn sigma_y<T: Scalar>() -> ComplexMatrix<T> {
    let z = T::zero;
    ComplexMatrix::from_vec(
        2,
        2,
        vec![
            Complex::new(z(), z()),
            Complex::new(z(), -T::one()),
            Complex::new(z(), T::one()),
            Complex::new(z(), z()),
        ],
    )
}

pub fn sigma_z<T: Scalar>() -> ComplexMatrix<T> {
    ComplexMatrix::from_int_rows(&[[1, 0], [0, -1]])
}

/// `σ⁺` with its single unit entry in the lower-left corner.
pub fn sigma_plus<T: Scalar>() -> ComplexMatrix<T> {
    ComplexMatrix::from_int_rows(&[[0, 0], [1, 0]])
}

/// `σ⁻ = (σ⁺)ᵀ`, unit entry in the upper-right corner.
pub fn sigma_minus<T: Scalar>() -> ComplexMatrix<T> {
    ComplexMatrix::from_int_rows(&[[0, 1], [0, 0]])
}

/// All-ones 4×4 matrix `J₄`.
pub fn ones4<T: Scalar>() -> ComplexMatrix<T> {
    ComplexMatrix::from_fn(DIM, DIM, |_, _| Complex::new(T::one(), T::zero()))
}

pub fn kron<T: Scalar>(a: &ComplexMatrix<T>, b: &ComplexMatrix<T>) -> ComplexMatrix<T> {
    a.kron(b)
}

/// Lifts a single-qubit operator onto qubit `j ∈ {1, 2}`.
pub fn on_qubit<T: Scalar>(op: &ComplexMatrix<T>, j: usize) -> ComplexMatrix<T> {
    match j {
        1 => op.kron(&identity2()),
        2 => identity2().kron(op),
        _ => panic!("qubit index must be 1 or 2, got {j}"),
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum GateKind {
    Cnot,
    Swap,
    Cz,
}

impl GateKind {
    pub const ALL: [GateKind; 3] = [GateKind::Cnot, GateKind::Swap, GateKind::Cz];

    pub fn name(self) -> &'static str {
        match self {
            GateKind::Cnot => "cnot",
            GateKind::Swap => "swap",
            GateKind::Cz => "cz",
        }
    }

    /// Stable small integer used in seed derivation.
    pub fn id(self) -> u64 {
        match self {
            GateKind::Cnot => 1,
            GateKind::Swap => 2,
            GateKind::Cz => 3,
        }
    }
}

impl fmt::Display for GateKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for GateKind {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self, Error> {
        match s.to_ascii_lowercase().replace('-', "").as_str() {
            "cnot" => Ok(GateKind::Cnot),
            "swap" => Ok(GateKind::Swap),
            "cz" => Ok(GateKind::Cz),
            _ => Err(Error::param("gate", format!("unknown gate `{s}` (expected cnot, swap or cz)"))),
        }
    }
}

/// Computational-basis matrix of a target gate.
pub fn gate_matrix<T: Scalar>(kind: GateKind) -> ComplexMatrix<T> {
    match kind {
        GateKind::Cnot => ComplexMatrix::from_int_rows(&[[1, 0, 0, 0], [0, 1, 0, 0], [0, 0, 0, 1], [0, 0, 1, 0]]),
        GateKind::Swap => ComplexMatrix::from_int_rows(&[[1, 0, 0, 0], [0, 0, 1, 0], [0, 1, 0, 0], [0, 0, 0, 1]]),
        GateKind::Cz => ComplexMatrix::from_int_rows(&[[1, 0, 0, 0], [0, 1, 0, 0], [0, 0, 1, 0], [0, 0, 0, -1]]),
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct GateTarget<T> {
    pub kind: GateKind,
    pub matrix: ComplexMatrix<T>,
}

impl<T: Scalar> GateTarget<T> {
    pub fn new(kind: GateKind) -> Self {
        Self { kind, matrix: gate_matrix(kind) }
    }

    /// Same gate multiplied by a global phase; the conjugation targets are unchanged.
    pub fn with_phase(&self, phase: Complex<T>) -> Self {
        Self { kind: self.kind, matrix: self.matrix.scale(phase) }
    }
}

/// The three initial states `diag(2/5, 3/10, 1/5, 1/10)`, `J₄/4` and `𝕀₄/4`.
pub fn grk_initial_states<T: Scalar>() -> [DensityMatrix<T>; 3] {
    let r = T::ratio;
    let quarter = Complex::new(r(1, 4), T::zero());
    [
        DensityMatrix::new_unchecked(ComplexMatrix::diag(&[r(2, 5), r(3, 10), r(1, 5), r(1, 10)])),
        DensityMatrix::new_unchecked(ones4().scale(quarter.clone())),
        DensityMatrix::new_unchecked(ComplexMatrix::identity(DIM).scale(quarter)),
    ]
}

/// `U ρ U†`.
pub fn apply_gate<T: Scalar>(gate: &GateTarget<T>, rho: &DensityMatrix<T>) -> DensityMatrix<T> {
    DensityMatrix::new_unchecked(rho.matrix().conjugate_by(&gate.matrix))
}

/// Targets `U ρ₀,ₘ U†` for the three initial states.
pub fn grk_targets<T: Scalar>(gate: &GateTarget<T>) -> [DensityMatrix<T>; 3] {
    grk_initial_states().map(|rho| apply_gate(gate, &rho))
}

/// Squared Hilbert–Schmidt distance `Tr[(a−b)†(a−b)]`.
pub fn hs_dist_sq<T: Real>(a: &ComplexMatrix<T>, b: &ComplexMatrix<T>) -> T {
    assert_eq!((a.rows(), a.cols()), (b.rows(), b.cols()), "hs_dist_sq on mismatched shapes");
    a.as_slice().iter().zip(b.as_slice()).fold(T::zero(), |acc, (x, y)| acc + (x - y).norm_sqr())
}

#[cfg(test)]
mod tests {
    use super::*;
    use num_rational::Ratio;
    use proptest::prelude::*;

    type M = ComplexMatrix<f64>;
    type Q = Ratio<i64>;

    fn c(re: f64, im: f64) -> Complex<f64> {
        Complex::new(re, im)
    }

    #[test]
    fn kron_identity_case() {
        assert_eq!(kron(&identity2::<f64>(), &identity2()), M::identity(4));
    }

    #[test]
    fn kron_sigma_z_identity() {
        assert_eq!(kron(&sigma_z::<f64>(), &identity2()), M::diag(&[1.0, 1.0, -1.0, -1.0]));
    }

    #[test]
    fn kron_sigma_plus_identity() {
        let k = kron(&sigma_plus::<Q>(), &identity2());
        for r in 0..4 {
            for col in 0..4 {
                // 1-based (3,1) and (4,2)
                let expect = if (r, col) == (2, 0) || (r, col) == (3, 1) { 1 } else { 0 };
                assert_eq!(*k.get(r, col), Complex::new(Q::from_integer(expect), Q::from_integer(0)));
            }
        }
    }

    #[test]
    fn ladder_matrices_as_printed() {
        assert_eq!(*sigma_plus::<f64>().get(1, 0), c(1.0, 0.0));
        assert_eq!(*sigma_minus::<f64>().get(0, 1), c(1.0, 0.0));
        assert_eq!(sigma_minus::<f64>(), sigma_plus::<f64>().transpose());
    }

    #[test]
    fn gate_matrices() {
        let cnot = gate_matrix::<f64>(GateKind::Cnot);
        assert_eq!(*cnot.get(2, 3), c(1.0, 0.0));
        assert_eq!(*cnot.get(3, 2), c(1.0, 0.0));
        assert_eq!(*cnot.get(2, 2), c(0.0, 0.0));
        assert_eq!(gate_matrix::<f64>(GateKind::Cz), M::diag(&[1.0, 1.0, 1.0, -1.0]));
        let swap = gate_matrix::<Q>(GateKind::Swap);
        assert_eq!(swap.matmul(&swap), ComplexMatrix::identity(4));
    }

    #[test]
    fn gates_unitary() {
        for kind in GateKind::ALL {
            let u = gate_matrix::<f64>(kind);
            assert!(u.adjoint().matmul(&u).approx_eq(&M::identity(4), 1e-15));
            let uq = gate_matrix::<Q>(kind);
            assert_eq!(uq.adjoint().matmul(&uq), ComplexMatrix::identity(4));
        }
    }

    #[test]
    fn initial_states() {
        let [r1, r2, r3] = grk_initial_states::<f64>();
        assert!((r1.matrix().trace().re - 1.0).abs() < 1e-15);
        let d: Vec<f64> = (0..4).map(|i| r1.matrix().get(i, i).re).collect();
        assert_eq!(d, vec![0.4, 0.3, 0.2, 0.1]);
        let ev = r2.matrix().hermitian_eigenvalues();
        for (got, want) in ev.iter().zip([0.0, 0.0, 0.0, 1.0]) {
            assert!((got - want).abs() < 1e-12, "{ev:?}");
        }
        let tol = Tolerances::default();
        for rho in [&r1, &r2, &r3] {
            rho.validate(&tol).unwrap();
        }
    }

    #[test]
    fn apply_gate_examples() {
        let [r1, r2, _] = grk_initial_states::<Q>();
        let q = |n, d| Q::new(n, d);
        let cnot = GateTarget::<Q>::new(GateKind::Cnot);
        let swap = GateTarget::<Q>::new(GateKind::Swap);
        let cz = GateTarget::<Q>::new(GateKind::Cz);
        assert_eq!(apply_gate(&cnot, &r1).matrix(), &ComplexMatrix::diag(&[q(2, 5), q(3, 10), q(1, 10), q(1, 5)]));
        assert_eq!(apply_gate(&swap, &r1).matrix(), &ComplexMatrix::diag(&[q(2, 5), q(1, 5), q(3, 10), q(1, 10)]));
        assert_eq!(apply_gate(&cz, &r1), r1);
        let expected = ComplexMatrix::<Q>::from_int_rows(&[[1, 1, 1, -1], [1, 1, 1, -1], [1, 1, 1, -1], [-1, -1, -1, 1]])
            .scale(Complex::new(q(1, 4), q(0, 1)));
        assert_eq!(apply_gate(&cz, &r2).matrix(), &expected);
    }

    #[test]
    fn hs_distance_examples() {
        let a = M::diag(&[1.0, 0.0, 0.0, 0.0]);
        let b = M::diag(&[0.0, 1.0, 0.0, 0.0]);
        assert_eq!(hs_dist_sq(&a, &a), 0.0);
        assert!((hs_dist_sq(&a, &b) - 2.0).abs() < 1e-15);
        let [r1, _, _] = grk_initial_states::<f64>();
        let t = apply_gate(&GateTarget::new(GateKind::Cnot), &r1);
        assert!((hs_dist_sq(r1.matrix(), t.matrix()) - 0.02).abs() < 1e-15);
    }

    fn mat2() -> impl Strategy<Value = M> {
        prop::collection::vec(-1.0f64..1.0, 8)
            .prop_map(|v| M::from_fn(2, 2, |r, col| c(v[2 * (2 * r + col)], v[2 * (2 * r + col) + 1])))
    }

    fn rand_density() -> impl Strategy<Value = M> {
        prop::collection::vec(-1.0f64..1.0, 32).prop_map(|v| {
            let a = M::from_fn(4, 4, |r, col| c(v[2 * (4 * r + col)], v[2 * (4 * r + col) + 1]));
            let p = a.matmul(&a.adjoint());
            let tr = p.trace().re;
            p.scale_real(1.0 / tr)
        })
    }

    proptest! {
        #[test]
        fn kron_mixed_product(a in mat2(), b in mat2(), cc in mat2(), d in mat2()) {
            let lhs = a.kron(&b).matmul(&cc.kron(&d));
            let rhs = a.matmul(&cc).kron(&b.matmul(&d));
            prop_assert!(lhs.approx_eq(&rhs, 1e-12));
        }

        #[test]
        fn kron_bilinear(a in mat2(), b in mat2(), cc in mat2(), s in -2.0f64..2.0) {
            let lhs = (&a + &cc.scale_real(s)).kron(&b);
            let rhs = &a.kron(&b) + &cc.kron(&b).scale_real(s);
            prop_assert!(lhs.approx_eq(&rhs, 1e-12));
        }

        #[test]
        fn apply_gate_preserves_trace_and_spectrum(rho in rand_density(), g in 0usize..3) {
            let rho = DensityMatrix::new_unchecked(rho);
            let out = apply_gate(&GateTarget::new(GateKind::ALL[g]), &rho);
            prop_assert!((out.matrix().trace() - rho.matrix().trace()).norm() < 1e-12);
            let e0 = rho.matrix().hermitian_eigenvalues();
            let e1 = out.matrix().hermitian_eigenvalues();
            for (x, y) in e0.iter().zip(&e1) {
                prop_assert!((x - y).abs() < 1e-12);
            }
        }

        #[test]
        fn hs_distance_metric(a in rand_density(), b in rand_density(), cc in rand_density()) {
            let ab = hs_dist_sq(&a, &b);
            prop_assert!(ab >= 0.0);
            prop_assert_eq!(ab, hs_dist_sq(&b, &a));
            let bc = hs_dist_sq(&b, &cc);
            let ac = hs_dist_sq(&a, &cc);
            prop_assert!(ac.sqrt() <= ab.sqrt() + bc.sqrt() + 1e-12);
        }
    }
}
