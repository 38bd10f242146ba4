//! Segment-by-segment propagation of vectorized density matrices.

use num_complex::Complex;

use super::expm::expm_flat;
use super::superop::{matvec, unvec, vec_of, LiouvillianParts, VEC_DIM};
use crate::error::{Error, Result};
use crate::objective::ControlSchedule;
use crate::quantum::{ComplexMatrix, DensityMatrix};
use crate::scalar::Real;

/// Propagator `exp(Δt · L(uⁱ, n₁ⁱ, n₂ⁱ))` of one segment as a flat 16×16 buffer.
fn segment_propagator<T: Real>(parts: &LiouvillianParts<T>, schedule: &ControlSchedule<T>, i: usize, gen: &mut ComplexMatrix<T>) -> Vec<Complex<T>> {
    let (u, n1, n2) = schedule.segment(i);
    parts.assemble_into(u, n1, n2, gen);
    let dt = schedule.dt();
    let scaled: Vec<Complex<T>> = gen.as_slice().iter().map(|z| *z * dt).collect();
    let norm = one_norm(&scaled, VEC_DIM);
    expm_flat(&scaled, VEC_DIM, norm)
}

fn one_norm<T: Real>(m: &[Complex<T>], n: usize) -> T {
    (0..n).map(|c| (0..n).fold(T::zero(), |acc, r| acc + m[r * n + c].norm())).fold(T::zero(), T::max)
}

fn check_finite<T: Real>(v: &[Complex<T>], segment: usize) -> Result<()> {
    if v.iter().all(|z| z.re.is_finite() && z.im.is_finite()) {
        Ok(())
    } else {
        Err(Error::Numerical(format!("non-finite state after segment {segment}")))
    }
}

/// `ρ(T)` for one initial state.
pub fn propagate<T: Real>(rho0: &DensityMatrix<T>, schedule: &ControlSchedule<T>, parts: &LiouvillianParts<T>) -> Result<DensityMatrix<T>> {
    let mut out = propagate_batch(std::slice::from_ref(rho0), schedule, parts)?;
    Ok(out.pop().expect("one state in, one state out"))
}

/// Propagates several initial states, computing each segment propagator once.
pub fn propagate_batch<T: Real>(
    rhos: &[DensityMatrix<T>],
    schedule: &ControlSchedule<T>,
    parts: &LiouvillianParts<T>,
) -> Result<Vec<DensityMatrix<T>>> {
    propagate_inner(rhos, schedule, parts, |_, _: &mut ()| (), &mut ())
}

/// Like [`propagate_batch`] but also returns the states after every segment,
/// indexed `[segment][state]`.
pub fn propagate_trajectory<T: Real>(
    rhos: &[DensityMatrix<T>],
    schedule: &ControlSchedule<T>,
    parts: &LiouvillianParts<T>,
) -> Result<Vec<Vec<DensityMatrix<T>>>> {
    let mut snapshots = Vec::with_capacity(schedule.segments());
    propagate_inner(rhos, schedule, parts, |states: &[Vec<Complex<T>>], out: &mut Vec<Vec<DensityMatrix<T>>>| {
        out.push(states.iter().map(|v| DensityMatrix::new_unchecked(unvec(v))).collect());
    }, &mut snapshots)?;
    Ok(snapshots)
}

fn propagate_inner<T: Real, S>(
    rhos: &[DensityMatrix<T>],
    schedule: &ControlSchedule<T>,
    parts: &LiouvillianParts<T>,
    mut observe: impl FnMut(&[Vec<Complex<T>>], &mut S),
    sink: &mut S,
) -> Result<Vec<DensityMatrix<T>>> {
    if rhos.is_empty() {
        return Ok(Vec::new());
    }
    let mut states: Vec<Vec<Complex<T>>> = rhos.iter().map(|r| vec_of(r.matrix())).collect();
    let mut gen = ComplexMatrix::zeros(VEC_DIM, VEC_DIM);
    for i in 0..schedule.segments() {
        let prop = segment_propagator(parts, schedule, i, &mut gen);
        for v in states.iter_mut() {
            *v = matvec(&prop, v);
            check_finite(v, i)?;
        }
        observe(&states, sink);
    }
    Ok(states.iter().map(|v| DensityMatrix::new_unchecked(unvec(v))).collect())
}

/// Classical fixed-step RK4 on `d vec(ρ)/dt = L vec(ρ)` with `substeps` steps per segment.
pub fn rk4_reference<T: Real>(
    rho0: &DensityMatrix<T>,
    schedule: &ControlSchedule<T>,
    parts: &LiouvillianParts<T>,
    substeps: usize,
) -> Result<DensityMatrix<T>> {
    if substeps == 0 {
        return Err(Error::param("substeps", "must be at least 1"));
    }
    let mut v = vec_of(rho0.matrix());
    let h = schedule.dt() / T::from_usize(substeps).expect("substep count");
    let half = T::lit(0.5);
    let sixth = T::one() / T::lit(6.0);
    for i in 0..schedule.segments() {
        let (u, n1, n2) = schedule.segment(i);
        let gen = parts.assemble(u, n1, n2).mat;
        let l = gen.as_slice();
        for _ in 0..substeps {
            let k1 = matvec(l, &v);
            let k2 = matvec(l, &axpy(&v, h * half, &k1));
            let k3 = matvec(l, &axpy(&v, h * half, &k2));
            let k4 = matvec(l, &axpy(&v, h, &k3));
            for j in 0..v.len() {
                v[j] = v[j] + (k1[j] + (k2[j] + k3[j]) * T::lit(2.0) + k4[j]) * (h * sixth);
            }
        }
        check_finite(&v, i)?;
    }
    Ok(DensityMatrix::new_unchecked(unvec(&v)))
}

fn axpy<T: Real>(x: &[Complex<T>], a: T, y: &[Complex<T>]) -> Vec<Complex<T>> {
    x.iter().zip(y).map(|(xi, yi)| *xi + *yi * a).collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::dynamics::{build_system, liouvillian_parts, SystemSpec, SystemVariant};
    use crate::objective::ScheduleTemplate;
    use crate::quantum::grk_initial_states;
    use rand::{Rng, SeedableRng};

    fn parts(v: SystemVariant, eps: f64) -> LiouvillianParts<f64> {
        let spec = SystemSpec::reference(v, eps);
        liouvillian_parts(&build_system(&spec).unwrap(), &spec)
    }

    fn random_schedule(rng: &mut impl Rng, k: usize, horizon: f64) -> ControlSchedule<f64> {
        let t = ScheduleTemplate { horizon, segments: k, u_max: 20.0, n_max: 20.0 };
        ControlSchedule::new(
            t,
            (0..k).map(|_| rng.random_range(-20.0..20.0)).collect(),
            (0..k).map(|_| rng.random_range(0.0..20.0)).collect(),
            (0..k).map(|_| rng.random_range(0.0..20.0)).collect(),
        )
        .unwrap()
    }

    #[test]
    fn diagonal_state_stationary_without_controls() {
        let p = parts(SystemVariant::Sys1, 0.0);
        let t = ScheduleTemplate { horizon: 20.0, segments: 1, u_max: 20.0, n_max: 20.0 };
        let [r1, ..] = grk_initial_states::<f64>();
        let out = propagate(&r1, &ControlSchedule::zeros(t).unwrap(), &p).unwrap();
        assert!(out.matrix().approx_eq(r1.matrix(), 1e-14));
    }

    #[test]
    fn zero_horizon_is_identity() {
        let p = parts(SystemVariant::Sys2, 0.1);
        let t = ScheduleTemplate { horizon: 0.0, segments: 3, u_max: 20.0, n_max: 20.0 };
        let s = ControlSchedule::constant(t, 7.0, 3.0, 1.0).unwrap();
        let [_, r2, _] = grk_initial_states::<f64>();
        assert_eq!(propagate(&r2, &s, &p).unwrap(), r2);
    }

    #[test]
    fn batch_equals_individual_calls() {
        let p = parts(SystemVariant::Sys3, 0.05);
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(5);
        let s = random_schedule(&mut rng, 8, 2.0);
        let states = grk_initial_states::<f64>();
        let batch = propagate_batch(&states, &s, &p).unwrap();
        for (rho, got) in states.iter().zip(&batch) {
            assert_eq!(&propagate(rho, &s, &p).unwrap(), got);
        }
        assert!(propagate_batch(&[], &s, &p).unwrap().is_empty());
    }

    #[test]
    fn rk4_zero_generator() {
        let zero = LiouvillianParts {
            l0: crate::dynamics::Superoperator::zero(),
            l_u: crate::dynamics::Superoperator::zero(),
            l_n1: crate::dynamics::Superoperator::zero(),
            l_n2: crate::dynamics::Superoperator::zero(),
        };
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(2);
        let s = random_schedule(&mut rng, 3, 1.0);
        let [r1, ..] = grk_initial_states::<f64>();
        assert_eq!(rk4_reference(&r1, &s, &zero, 4).unwrap(), r1);
        assert!(rk4_reference(&r1, &s, &zero, 0).is_err());
    }

    #[test]
    fn rk4_populations_constant_without_drive() {
        let p = parts(SystemVariant::Sys1, 0.0);
        let t = ScheduleTemplate { horizon: 5.0, segments: 5, u_max: 20.0, n_max: 20.0 };
        let [_, r2, _] = grk_initial_states::<f64>();
        let out = rk4_reference(&r2, &ControlSchedule::zeros(t).unwrap(), &p, 50).unwrap();
        for i in 0..4 {
            assert!((out.matrix().get(i, i).re - 0.25).abs() < 1e-12);
        }
        // coherences rotate, so the state itself did change
        assert!(out.hs_dist_sq(&r2) > 1e-3);
    }

    #[test]
    fn rk4_converges_at_fourth_order() {
        let p = parts(SystemVariant::Sys2, 0.1);
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(9);
        let s = random_schedule(&mut rng, 2, 1.0);
        let [r1, ..] = grk_initial_states::<f64>();
        let exact = propagate(&r1, &s, &p).unwrap();
        let errs: Vec<f64> = [40, 80, 160]
            .iter()
            .map(|&m| rk4_reference(&r1, &s, &p, m).unwrap().hs_dist_sq(&exact).sqrt())
            .collect();
        for w in errs.windows(2) {
            let order = (w[0] / w[1]).log2();
            assert!((3.6..4.4).contains(&order), "observed order {order}, errors {errs:?}");
        }
    }

    #[test]
    fn single_precision_propagation() {
        let spec = SystemSpec::<f32>::reference(SystemVariant::Sys1, 0.1);
        let p = liouvillian_parts(&build_system(&spec).unwrap(), &spec);
        let t = ScheduleTemplate { horizon: 2.0f32, segments: 4, u_max: 20.0, n_max: 20.0 };
        let s = ControlSchedule::constant(t, 3.0, 1.0, 2.0).unwrap();
        let [_, r2, _] = grk_initial_states::<f32>();
        let out = propagate(&r2, &s, &p).unwrap();
        assert!((out.matrix().trace().re - 1.0).abs() < 1e-4);
    }
}
