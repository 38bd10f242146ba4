use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::scalar::Real;

/// Horizon, segment count and box bounds shared by every schedule of a problem.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct ScheduleTemplate<T> {
    pub horizon: T,
    pub segments: usize,
    pub u_max: T,
    pub n_max: T,
}

impl<T: Real> ScheduleTemplate<T> {
    /// `T = 20`, `K = 200`, `u_max = n_max = 20`.
    pub fn reference() -> Self {
        Self { horizon: T::lit(20.0), segments: 200, u_max: T::lit(20.0), n_max: T::lit(20.0) }
    }

    pub fn validate(&self) -> Result<()> {
        if self.segments == 0 {
            return Err(Error::param("K", "at least one segment is required"));
        }
        if !self.horizon.is_finite() || self.horizon < T::zero() {
            return Err(Error::param("T", "horizon must be finite and non-negative"));
        }
        if !(self.u_max > T::zero()) || !self.u_max.is_finite() {
            return Err(Error::param("u_max", "must be positive and finite"));
        }
        if !(self.n_max > T::zero()) || !self.n_max.is_finite() {
            return Err(Error::param("n_max", "must be positive and finite"));
        }
        Ok(())
    }

    pub fn dt(&self) -> T {
        self.horizon / T::from_usize(self.segments).expect("segment count")
    }

    pub fn dim(&self) -> usize {
        3 * self.segments
    }
}

/// Piecewise-constant coherent control `u` and incoherent controls `n₁, n₂`
/// on `K` equal left-closed segments of `[0, T]`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ControlSchedule<T> {
    pub template: ScheduleTemplate<T>,
    pub u: Vec<T>,
    pub n1: Vec<T>,
    pub n2: Vec<T>,
}

impl<T: Real> ControlSchedule<T> {
    pub fn new(template: ScheduleTemplate<T>, u: Vec<T>, n1: Vec<T>, n2: Vec<T>) -> Result<Self> {
        template.validate()?;
        let k = template.segments;
        for (name, v) in [("u", &u), ("n1", &n1), ("n2", &n2)] {
            if v.len() != k {
                return Err(Error::Dimension(format!("{name} has {} values, expected K = {k}", v.len())));
            }
        }
        let s = Self { template, u, n1, n2 };
        s.check_bounds()?;
        Ok(s)
    }

    /// All controls identically zero.
    pub fn zeros(template: ScheduleTemplate<T>) -> Result<Self> {
        let k = template.segments;
        Self::new(template, vec![T::zero(); k], vec![T::zero(); k], vec![T::zero(); k])
    }

    pub fn constant(template: ScheduleTemplate<T>, u: T, n1: T, n2: T) -> Result<Self> {
        let k = template.segments;
        Self::new(template, vec![u; k], vec![n1; k], vec![n2; k])
    }

    pub fn segments(&self) -> usize {
        self.u.len()
    }

    pub fn dt(&self) -> T {
        self.template.dt()
    }

    /// `(uⁱ, n₁ⁱ, n₂ⁱ)` of segment `i`.
    pub fn segment(&self, i: usize) -> (T, T, T) {
        (self.u[i], self.n1[i], self.n2[i])
    }

    /// Control values at time `t`; the last segment continues to `t = T`.
    pub fn value_at(&self, t: T) -> Option<(T, T, T)> {
        if !(t >= T::zero()) || t > self.template.horizon {
            return None;
        }
        let k = self.segments();
        let idx = if self.template.horizon == T::zero() { 0 } else { (t / self.dt()).floor().to_usize().unwrap_or(k) };
        Some(self.segment(idx.min(k - 1)))
    }

    fn check_bounds(&self) -> Result<()> {
        let ScheduleTemplate { u_max, n_max, .. } = self.template;
        for (i, &u) in self.u.iter().enumerate() {
            if !u.is_finite() || u.abs() > u_max {
                return Err(Error::OutOfBounds(format!("u[{i}] = {u} outside [-{u_max}, {u_max}]")));
            }
        }
        for (name, v) in [("n1", &self.n1), ("n2", &self.n2)] {
            for (i, &n) in v.iter().enumerate() {
                if !n.is_finite() || n < T::zero() || n > n_max {
                    return Err(Error::OutOfBounds(format!("{name}[{i}] = {n} outside [0, {n_max}]")));
                }
            }
        }
        Ok(())
    }

    /// `(u_min, u_max, n1_min, n1_max, n2_min, n2_max)` over the segments.
    pub fn ranges(&self) -> ControlRanges<T> {
        let ext = |v: &[T]| {
            v.iter().fold((T::infinity(), T::neg_infinity()), |(lo, hi), &x| (lo.min(x), hi.max(x)))
        };
        let (u_min, u_max) = ext(&self.u);
        let (n1_min, n1_max) = ext(&self.n1);
        let (n2_min, n2_max) = ext(&self.n2);
        ControlRanges { u_min, u_max, n1_min, n1_max, n2_min, n2_max }
    }
}

/// Per-trial extrema of the optimized controls.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct ControlRanges<T> {
    pub u_min: T,
    pub u_max: T,
    pub n1_min: T,
    pub n1_max: T,
    pub n2_min: T,
    pub n2_max: T,
}
