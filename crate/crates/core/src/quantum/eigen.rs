//! Hermitian eigenvalues via cyclic Jacobi rotations.
//!
//! A Hermitian `A = X + iY` is embedded as the real symmetric
//! `[[X, -Y], [Y, X]]`, whose spectrum is the spectrum of `A` with every
//! eigenvalue doubled.

use super::matrix::ComplexMatrix;
use crate::scalar::Real;

const MAX_SWEEPS: usize = 100;

pub(crate) fn hermitian_eigenvalues<T: Real>(m: &ComplexMatrix<T>) -> Vec<T> {
    assert!(m.is_square(), "eigenvalues of non-square matrix");
    let n = m.rows();
    let dim = 2 * n;
    // Symmetrize first so that small Hermiticity defects do not bias the result.
    let half = T::lit(0.5);
    let mut a = vec![T::zero(); dim * dim];
    for r in 0..n {
        for c in 0..n {
            let z = *m.get(r, c);
            let zt = *m.get(c, r);
            let x = (z.re + zt.re) * half;
            let y = (z.im - zt.im) * half;
            a[r * dim + c] = x;
            a[(r + n) * dim + (c + n)] = x;
            a[r * dim + (c + n)] = -y;
            a[(r + n) * dim + c] = y;
        }
    }
    jacobi_symmetric(&mut a, dim);
    let mut diag: Vec<T> = (0..dim).map(|i| a[i * dim + i]).collect();
    diag.sort_by(|x, y| x.partial_cmp(y).unwrap_or(std::cmp::Ordering::Equal));
    diag.into_iter().step_by(2).collect()
}

fn jacobi_symmetric<T: Real>(a: &mut [T], n: usize) {
    for _ in 0..MAX_SWEEPS {
        let off: T = (0..n)
            .flat_map(|p| (0..n).filter(move |&q| q != p).map(move |q| (p, q)))
            .fold(T::zero(), |acc, (p, q)| acc + a[p * n + q] * a[p * n + q]);
        let scale: T = (0..n).fold(T::zero(), |acc, i| acc + a[i * n + i] * a[i * n + i]);
        if off <= T::epsilon() * T::epsilon() * (scale + T::min_positive_value()) {
            return;
        }
        for p in 0..n {
            for q in (p + 1)..n {
                let apq = a[p * n + q];
                if apq == T::zero() {
                    continue;
                }
                let app = a[p * n + p];
                let aqq = a[q * n + q];
                let theta = (aqq - app) / (T::lit(2.0) * apq);
                let t = theta.signum() / (theta.abs() + (theta * theta + T::one()).sqrt());
                let c = T::one() / (t * t + T::one()).sqrt();
                let s = t * c;
                for k in 0..n {
                    let akp = a[k * n + p];
                    let akq = a[k * n + q];
                    a[k * n + p] = c * akp - s * akq;
                    a[k * n + q] = s * akp + c * akq;
                }
                for k in 0..n {
                    let apk = a[p * n + k];
                    let aqk = a[q * n + k];
                    a[p * n + k] = c * apk - s * aqk;
                    a[q * n + k] = s * apk + c * aqk;
                }
            }
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use num_complex::Complex64;

    #[test]
    fn diagonal_spectrum() {
        let m = ComplexMatrix::<f64>::diag(&[3.0, -1.0, 2.0]);
        let ev = hermitian_eigenvalues(&m);
        assert_eq!(ev.len(), 3);
        for (got, want) in ev.iter().zip([-1.0, 2.0, 3.0]) {
            assert!((got - want).abs() < 1e-14);
        }
    }

    #[test]
    fn pauli_y_spectrum() {
        let m = ComplexMatrix::from_vec(
            2,
            2,
            vec![Complex64::new(0.0, 0.0), Complex64::new(0.0, -1.0), Complex64::new(0.0, 1.0), Complex64::new(0.0, 0.0)],
        );
        let ev = hermitian_eigenvalues(&m);
        assert!((ev[0] + 1.0).abs() < 1e-14 && (ev[1] - 1.0).abs() < 1e-14);
    }
}
