//! Parameter encoding of piecewise-constant controls and the three-state
//! squared-distance gate infidelity.

mod schedule;

use serde::{Deserialize, Serialize};

pub use schedule::{ControlRanges, ControlSchedule, ScheduleTemplate};

use crate::annealing::Objective;
use crate::dynamics::{build_system, liouvillian_parts, propagate_batch, LiouvillianParts, SystemSpec};
use crate::error::{Error, Result};
use crate::quantum::{grk_initial_states, grk_targets, DensityMatrix, GateKind, GateTarget};
use crate::scalar::Real;

/// Distance from the box within which inputs are snapped onto the boundary.
pub const BOUNDARY_SNAP: f64 = 1e-12;

/// Flat optimizer parameters `[u¹…uᴷ, n₁¹…n₁ᴷ, n₂¹…n₂ᴷ]`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(transparent)]
pub struct ParamVector<T>(pub Vec<T>);

impl<T> ParamVector<T> {
    pub fn as_slice(&self) -> &[T] {
        &self.0
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }
}

pub fn encode<T: Real>(schedule: &ControlSchedule<T>) -> ParamVector<T> {
    let mut p = Vec::with_capacity(3 * schedule.segments());
    p.extend_from_slice(&schedule.u);
    p.extend_from_slice(&schedule.n1);
    p.extend_from_slice(&schedule.n2);
    ParamVector(p)
}

pub fn decode<T: Real>(p: &[T], template: &ScheduleTemplate<T>) -> Result<ControlSchedule<T>> {
    let k = template.segments;
    if p.len() != 3 * k {
        return Err(Error::Dimension(format!("parameter vector has length {}, expected 3K = {}", p.len(), 3 * k)));
    }
    ControlSchedule::new(*template, p[..k].to_vec(), p[k..2 * k].to_vec(), p[2 * k..].to_vec())
}

/// Box `[−u_max, u_max]ᴷ × [0, n_max]²ᴷ` as (lower, upper).
pub fn bounds<T: Real>(template: &ScheduleTemplate<T>) -> (Vec<T>, Vec<T>) {
    let k = template.segments;
    let mut lower = vec![-template.u_max; k];
    lower.extend(std::iter::repeat_n(T::zero(), 2 * k));
    let mut upper = vec![template.u_max; k];
    upper.extend(std::iter::repeat_n(template.n_max, 2 * k));
    (lower, upper)
}

/// Snaps coordinates that sit within [`BOUNDARY_SNAP`] outside the box back onto it.
pub fn snap_to_box<T: Real>(p: &[T], lower: &[T], upper: &[T]) -> Vec<T> {
    let tol = T::lit(BOUNDARY_SNAP);
    p.iter()
        .zip(lower.iter().zip(upper))
        .map(|(&x, (&lo, &hi))| {
            if x < lo && x >= lo - tol {
                lo
            } else if x > hi && x <= hi + tol {
                hi
            } else {
                x
            }
        })
        .collect()
}

/// A complete gate-synthesis objective: system, target gate and control discretization.
#[derive(Clone, Debug)]
pub struct GateProblem<T> {
    spec: SystemSpec<T>,
    target: GateTarget<T>,
    template: ScheduleTemplate<T>,
    parts: LiouvillianParts<T>,
    initial: [DensityMatrix<T>; 3],
    targets: [DensityMatrix<T>; 3],
    lower: Vec<T>,
    upper: Vec<T>,
}

impl<T: Real> GateProblem<T> {
    pub fn new(spec: SystemSpec<T>, gate: GateKind, template: ScheduleTemplate<T>) -> Result<Self> {
        template.validate()?;
        let ops = build_system(&spec)?;
        let parts = liouvillian_parts(&ops, &spec);
        let target = GateTarget::new(gate);
        let targets = grk_targets(&target);
        let (lower, upper) = bounds(&template);
        Ok(Self { spec, target, template, parts, initial: grk_initial_states(), targets, lower, upper })
    }

    pub fn spec(&self) -> &SystemSpec<T> {
        &self.spec
    }

    pub fn target(&self) -> &GateTarget<T> {
        &self.target
    }

    pub fn template(&self) -> &ScheduleTemplate<T> {
        &self.template
    }

    pub fn parts(&self) -> &LiouvillianParts<T> {
        &self.parts
    }

    pub fn initial_states(&self) -> &[DensityMatrix<T>; 3] {
        &self.initial
    }

    pub fn targets(&self) -> &[DensityMatrix<T>; 3] {
        &self.targets
    }

    pub fn bounds(&self) -> (&[T], &[T]) {
        (&self.lower, &self.upper)
    }

    pub fn dim(&self) -> usize {
        self.template.dim()
    }

    /// Replaces the target gate matrix, e.g. by a phase-shifted copy.
    pub fn with_target(mut self, target: GateTarget<T>) -> Self {
        self.targets = grk_targets(&target);
        self.target = target;
        self
    }

    /// Final states `ρₘ(T)` for a schedule.
    pub fn final_states(&self, schedule: &ControlSchedule<T>) -> Result<Vec<DensityMatrix<T>>> {
        propagate_batch(&self.initial, schedule, &self.parts)
    }

    /// `F = (1/6) Σₘ ‖ρₘ(T) − U ρ₀,ₘ U†‖²_HS`.
    pub fn grk_infidelity(&self, p: &[T]) -> Result<T> {
        let snapped = snap_to_box(p, &self.lower, &self.upper);
        let schedule = decode(&snapped, &self.template)?;
        let finals = self.final_states(&schedule)?;
        let value = infidelity_from_finals(&finals, &self.targets);
        if value.is_finite() {
            Ok(value)
        } else {
            Err(Error::Numerical("non-finite objective value".into()))
        }
    }
}

/// The infidelity functional applied to given final states.
pub fn infidelity_from_finals<T: Real>(finals: &[DensityMatrix<T>], targets: &[DensityMatrix<T>; 3]) -> T {
    assert_eq!(finals.len(), 3, "three final states expected");
    let sum = finals.iter().zip(targets).fold(T::zero(), |acc, (f, t)| acc + f.hs_dist_sq(t));
    sum / T::lit(6.0)
}

pub fn grk_infidelity<T: Real>(p: &ParamVector<T>, problem: &GateProblem<T>) -> Result<T> {
    problem.grk_infidelity(p.as_slice())
}

impl<T: Real> Objective<T> for GateProblem<T> {
    fn eval(&self, x: &[T]) -> Result<T> {
        self.grk_infidelity(x)
    }
}
