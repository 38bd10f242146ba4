//! Matrix exponential by scaling and squaring with diagonal Padé
//! approximants (Higham 2005). The Padé degree and the number of squarings
//! are chosen from the 1-norm of the argument.

use num_complex::Complex;

use crate::quantum::ComplexMatrix;
use crate::scalar::Real;

const B3: [f64; 4] = [120.0, 60.0, 12.0, 1.0];
const B5: [f64; 6] = [30240.0, 15120.0, 3360.0, 420.0, 30.0, 1.0];
const B7: [f64; 8] = [17297280.0, 8648640.0, 1995840.0, 277200.0, 25200.0, 1512.0, 56.0, 1.0];
const B9: [f64; 10] = [
    17643225600.0,
    8821612800.0,
    2075673600.0,
    302702400.0,
    30270240.0,
    2162160.0,
    110880.0,
    3960.0,
    90.0,
    1.0,
];
const B13: [f64; 14] = [
    64764752532480000.0,
    32382376266240000.0,
    7771770303897600.0,
    1187353796428800.0,
    129060195264000.0,
    10559470521600.0,
    670442572800.0,
    33522128640.0,
    1323241920.0,
    40840800.0,
    960960.0,
    16380.0,
    182.0,
    1.0,
];

// Backward-error bounds on ‖A‖₁ for degrees 3, 5, 7, 9, 13.
const THETA_F64: [f64; 5] =
    [1.495585217958292e-2, 2.539398330063230e-1, 9.504178996162932e-1, 2.097847961257068, 5.371920351148152];
// Single precision stops at degree 7.
const THETA_F32: [f64; 3] = [4.258730016922831e-1, 1.880152677804762, 3.925724783138660];

type Buf<T> = Vec<Complex<T>>;

/// `e^m` for a square complex matrix.
pub fn expm<T: Real>(m: &ComplexMatrix<T>) -> ComplexMatrix<T> {
    assert!(m.is_square(), "expm of non-square matrix");
    let n = m.rows();
    if n == 0 {
        return m.clone();
    }
    let out = expm_flat(m.as_slice(), n, m.one_norm());
    ComplexMatrix::from_vec(n, n, out)
}

pub(crate) fn expm_flat<T: Real>(a: &[Complex<T>], n: usize, norm: T) -> Buf<T> {
    let norm = norm.to_f64_lossy();
    let double = T::epsilon().to_f64_lossy() < 1e-10;
    if !norm.is_finite() {
        return vec![Complex::new(T::nan(), T::nan()); n * n];
    }
    if double {
        for (theta, b) in THETA_F64[..4].iter().zip([&B3[..], &B5[..], &B7[..], &B9[..]]) {
            if norm <= *theta {
                return pade_low(a, n, b);
            }
        }
        let s = scaling_exponent(norm, THETA_F64[4]);
        let scaled = scale(a, T::lit(0.5f64.powi(s as i32)));
        square(pade13(&scaled, n), n, s)
    } else {
        for (theta, b) in THETA_F32[..2].iter().zip([&B3[..], &B5[..]]) {
            if norm <= *theta {
                return pade_low(a, n, b);
            }
        }
        let s = scaling_exponent(norm, THETA_F32[2]);
        let scaled = scale(a, T::lit(0.5f64.powi(s as i32)));
        square(pade_low(&scaled, n, &B7), n, s)
    }
}

fn scaling_exponent(norm: f64, theta: f64) -> u32 {
    if norm <= theta {
        0
    } else {
        (norm / theta).log2().ceil().max(0.0) as u32
    }
}

fn zeros<T: Real>(n: usize) -> Buf<T> {
    vec![Complex::new(T::zero(), T::zero()); n * n]
}

fn eye<T: Real>(n: usize) -> Buf<T> {
    let mut m = zeros(n);
    for i in 0..n {
        m[i * n + i] = Complex::new(T::one(), T::zero());
    }
    m
}

fn scale<T: Real>(a: &[Complex<T>], s: T) -> Buf<T> {
    a.iter().map(|z| *z * s).collect()
}

pub(crate) fn mm<T: Real>(a: &[Complex<T>], b: &[Complex<T>], n: usize) -> Buf<T> {
    let mut out = zeros(n);
    for i in 0..n {
        let row = &mut out[i * n..(i + 1) * n];
        for k in 0..n {
            let aik = a[i * n + k];
            if aik.re == T::zero() && aik.im == T::zero() {
                continue;
            }
            let brow = &b[k * n..(k + 1) * n];
            for (o, bkj) in row.iter_mut().zip(brow) {
                *o = *o + aik * *bkj;
            }
        }
    }
    out
}

/// `Σₖ cₖ Mₖ` plus `c_id · I`.
fn lincomb<T: Real>(terms: &[(f64, &[Complex<T>])], c_id: f64, n: usize) -> Buf<T> {
    let mut out = zeros(n);
    for (c, m) in terms {
        let c = T::lit(*c);
        for (o, x) in out.iter_mut().zip(m.iter()) {
            *o = *o + *x * c;
        }
    }
    let c_id = T::lit(c_id);
    for i in 0..n {
        out[i * n + i].re += c_id;
    }
    out
}

fn pade_low<T: Real>(a: &[Complex<T>], n: usize, b: &[f64]) -> Buf<T> {
    let a2 = mm(a, a, n);
    let mut powers: Vec<Buf<T>> = vec![eye(n), a2];
    let degree = b.len() - 1;
    while 2 * (powers.len() - 1) < degree - 1 {
        let next = mm(powers.last().unwrap(), &powers[1], n);
        powers.push(next);
    }
    let odd: Vec<(f64, &[Complex<T>])> = powers.iter().enumerate().map(|(k, p)| (b[2 * k + 1], p.as_slice())).collect();
    let even: Vec<(f64, &[Complex<T>])> = powers.iter().enumerate().skip(1).map(|(k, p)| (b[2 * k], p.as_slice())).collect();
    let u_inner = lincomb(&odd[1..], b[1], n);
    let u = mm(a, &u_inner, n);
    let v = lincomb(&even, b[0], n);
    solve_pade(&u, &v, n)
}

fn pade13<T: Real>(a: &[Complex<T>], n: usize) -> Buf<T> {
    let b = &B13;
    let a2 = mm(a, a, n);
    let a4 = mm(&a2, &a2, n);
    let a6 = mm(&a4, &a2, n);
    let u_hi = lincomb(&[(b[13], &a6), (b[11], &a4), (b[9], &a2)], 0.0, n);
    let u_inner = {
        let mut t = mm(&a6, &u_hi, n);
        let rest = lincomb(&[(b[7], &a6), (b[5], &a4), (b[3], &a2)], b[1], n);
        t.iter_mut().zip(rest).for_each(|(x, y)| *x = *x + y);
        t
    };
    let u = mm(a, &u_inner, n);
    let v_hi = lincomb(&[(b[12], &a6), (b[10], &a4), (b[8], &a2)], 0.0, n);
    let mut v = mm(&a6, &v_hi, n);
    let rest = lincomb(&[(b[6], &a6), (b[4], &a4), (b[2], &a2)], b[0], n);
    v.iter_mut().zip(rest).for_each(|(x, y)| *x = *x + y);
    solve_pade(&u, &v, n)
}

/// Solves `(V − U) X = V + U`.
fn solve_pade<T: Real>(u: &[Complex<T>], v: &[Complex<T>], n: usize) -> Buf<T> {
    let p: Buf<T> = v.iter().zip(u).map(|(a, b)| *a - *b).collect();
    let q: Buf<T> = v.iter().zip(u).map(|(a, b)| *a + *b).collect();
    lu_solve(p, q, n)
}

/// Gaussian elimination with partial pivoting; `b` has `n` right-hand-side columns.
fn lu_solve<T: Real>(mut a: Buf<T>, mut b: Buf<T>, n: usize) -> Buf<T> {
    for col in 0..n {
        let pivot = (col..n)
            .max_by(|&i, &j| a[i * n + col].norm_sqr().partial_cmp(&a[j * n + col].norm_sqr()).unwrap_or(std::cmp::Ordering::Equal))
            .unwrap_or(col);
        if pivot != col {
            for k in 0..n {
                a.swap(pivot * n + k, col * n + k);
                b.swap(pivot * n + k, col * n + k);
            }
        }
        let d = a[col * n + col];
        if d.norm_sqr() == T::zero() {
            return vec![Complex::new(T::nan(), T::nan()); n * n];
        }
        let inv = Complex::new(T::one(), T::zero()) / d;
        for row in (col + 1)..n {
            let f = a[row * n + col] * inv;
            if f.re == T::zero() && f.im == T::zero() {
                continue;
            }
            for k in col..n {
                let t = a[col * n + k];
                a[row * n + k] = a[row * n + k] - f * t;
            }
            for k in 0..n {
                let t = b[col * n + k];
                b[row * n + k] = b[row * n + k] - f * t;
            }
        }
    }
    for col in (0..n).rev() {
        let inv = Complex::new(T::one(), T::zero()) / a[col * n + col];
        for k in 0..n {
            b[col * n + k] = b[col * n + k] * inv;
        }
        for row in 0..col {
            let f = a[row * n + col];
            if f.re == T::zero() && f.im == T::zero() {
                continue;
            }
            for k in 0..n {
                let t = b[col * n + k];
                b[row * n + k] = b[row * n + k] - f * t;
            }
        }
    }
    b
}

fn square<T: Real>(mut x: Buf<T>, n: usize, times: u32) -> Buf<T> {
    for _ in 0..times {
        x = mm(&x, &x, n);
    }
    x
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::quantum::{sigma_x, sigma_y};
    use num_complex::Complex64;
    use rand::{Rng, SeedableRng};

    /// Taylor series with many terms after heavy scaling; slow but independent.
    fn expm_taylor(m: &ComplexMatrix<f64>) -> ComplexMatrix<f64> {
        let n = m.rows();
        // few squarings: each one doubles the accumulated rounding error
        let s = m.one_norm().log2().ceil().max(0.0) as i32 + 4;
        let a = m.scale_real(0.5f64.powi(s));
        let mut term = ComplexMatrix::identity(n);
        let mut sum = ComplexMatrix::identity(n);
        for k in 1..30 {
            term = term.matmul(&a).scale_real(1.0 / k as f64);
            sum = &sum + &term;
        }
        for _ in 0..s {
            sum = sum.matmul(&sum);
        }
        sum
    }

    #[test]
    fn zero_gives_identity() {
        let z = ComplexMatrix::<f64>::zeros(5, 5);
        assert_eq!(expm(&z), ComplexMatrix::identity(5));
    }

    #[test]
    fn diagonal_case() {
        let d = ComplexMatrix::<f64>::diag(&[1.5, -2.0, 0.0, 3.0]);
        let e = expm(&d);
        let want = ComplexMatrix::diag(&[1.5f64.exp(), (-2.0f64).exp(), 1.0, 3.0f64.exp()]);
        for i in 0..4 {
            let rel = (e.get(i, i) - want.get(i, i)).norm() / want.get(i, i).norm();
            assert!(rel < 1e-14, "{rel}");
        }
        assert!(e.approx_eq(&want, 1e-12));
    }

    #[test]
    fn pauli_rotation() {
        let arg = sigma_x::<f64>().scale(Complex64::new(0.0, -std::f64::consts::FRAC_PI_2));
        let want = sigma_x::<f64>().scale(Complex64::new(0.0, -1.0));
        assert!(expm(&arg).approx_eq(&want, 1e-12));
        let arg = sigma_y::<f64>().scale(Complex64::new(0.0, -0.3));
        let (c, s) = (0.3f64.cos(), 0.3f64.sin());
        let want = &ComplexMatrix::identity(2).scale_real(c) - &sigma_y::<f64>().scale(Complex64::new(0.0, s));
        assert!(expm(&arg).approx_eq(&want, 1e-14));
    }

    #[test]
    fn matches_taylor_across_norms() {
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(11);
        for target_norm in [1e-3, 0.1, 0.5, 1.5, 4.0, 12.0, 60.0, 100.0] {
            let m = ComplexMatrix::from_fn(16, 16, |_, _| {
                Complex64::new(rng.random_range(-1.0..1.0), rng.random_range(-1.0..1.0))
            });
            // skew-Hermitian plus a mild dissipative part keeps e^m well conditioned
            let skew = (&m - &m.adjoint()).scale_real(0.5);
            let m = &skew + &ComplexMatrix::identity(16).scale_real(-0.05);
            let m = m.scale_real(target_norm / m.one_norm());
            let got = expm(&m);
            let want = expm_taylor(&m);
            let rel = (&got - &want).hs_norm() / want.hs_norm();
            assert!(rel < 1e-12, "norm {target_norm}: rel {rel}");
        }
    }

    #[test]
    fn single_precision() {
        let d = ComplexMatrix::<f32>::diag(&[1.0, -2.0, 0.5]);
        let e = expm(&d);
        assert!((e.get(0, 0).re - 1.0f32.exp()).abs() / 1.0f32.exp() < 1e-5);
        assert!((e.get(1, 1).re - (-2.0f32).exp()).abs() < 1e-6);
        let big = ComplexMatrix::<f32>::diag(&[10.0, -10.0]);
        let e = expm(&big);
        assert!((e.get(0, 0).re / 10.0f32.exp() - 1.0).abs() < 1e-4);
    }
}
