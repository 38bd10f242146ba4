//! Dual annealing: generalized simulated annealing with a Tsallis visiting
//! distribution and generalized Metropolis acceptance, periodic restarts,
//! and a bound-constrained local search on strategic points.
//!
//! Iteration `k` (counting from 1 after every restart) runs a chain of
//! `2·dim` proposals at visiting temperature `T_v(k)`: the first `dim`
//! proposals move every coordinate at once, the remaining `dim` move one
//! coordinate each. Proposals that leave the box are folded back in modulo
//! the box span. Uphill moves are accepted with the generalized Metropolis
//! probability at temperature `T_v(k)/k`. Whenever the chain strictly
//! improves the global best, a local search is started from the new best
//! (at most once per iteration), and one final local search polishes the
//! result. When `T_v(k)` drops below `restart_temp_ratio · initial_temp`
//! the chain restarts from a fresh uniform point.
//!
//! Randomness comes from `ChaCha20Rng::seed_from_u64(seed)`, which is
//! portable and fully determined by the seed.

mod config;
mod local;
mod visit;

use std::time::Instant;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha20Rng;
use serde::{Deserialize, Serialize};

pub use config::AnnealConfig;
pub use local::{default_max_iter, local_search, LocalSearchResult};
pub use visit::{
    accept, acceptance_probability, acceptance_temperature, visit_sample, visiting_temperature, wrap_into,
    VisitingDistribution,
};

use crate::error::{Error, Result};
use crate::objective::ParamVector;
use crate::scalar::Real;

/// Anything that can be minimized; failures count as `+∞`.
pub trait Objective<T> {
    fn eval(&self, x: &[T]) -> Result<T>;
}

impl<T, F> Objective<T> for F
where
    F: Fn(&[T]) -> T,
{
    fn eval(&self, x: &[T]) -> Result<T> {
        Ok(self(x))
    }
}

/// Adapter for closures that can fail.
pub struct Fallible<F>(pub F);

impl<T, F> Objective<T> for Fallible<F>
where
    F: Fn(&[T]) -> Result<T>,
{
    fn eval(&self, x: &[T]) -> Result<T> {
        (self.0)(x)
    }
}

/// Outcome of one annealing run.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct TrialResult<T> {
    pub best_params: ParamVector<T>,
    pub best_value: T,
    pub n_evals: usize,
    pub n_iters: usize,
    pub seed: u64,
    pub wall_time: f64,
    /// `(evaluation index, best value so far)` at every improvement.
    pub history: Vec<(usize, T)>,
}

impl<T: PartialEq> TrialResult<T> {
    /// Equality of everything except the wall-clock time.
    pub fn same_outcome(&self, other: &Self) -> bool {
        self.best_params == other.best_params
            && self.best_value == other.best_value
            && self.n_evals == other.n_evals
            && self.n_iters == other.n_iters
            && self.seed == other.seed
            && self.history == other.history
    }
}

struct Stop;

struct Search<'a, T, O: ?Sized> {
    f: &'a O,
    lower: &'a [T],
    upper: &'a [T],
    cfg: &'a AnnealConfig,
    rng: ChaCha20Rng,
    visit: VisitingDistribution,
    nfev: usize,
    current: (Vec<T>, T),
    best: (Vec<T>, T),
    history: Vec<(usize, T)>,
}

impl<'a, T: Real, O: Objective<T> + ?Sized> Search<'a, T, O> {
    fn eval(&mut self, x: &[T]) -> std::result::Result<T, Stop> {
        if self.nfev >= self.cfg.maxfun {
            return Err(Stop);
        }
        self.nfev += 1;
        Ok(match self.f.eval(x) {
            Ok(v) if !v.is_nan() => v,
            _ => T::infinity(),
        })
    }

    fn offer_best(&mut self, x: &[T], e: T) -> bool {
        if e < self.best.1 {
            self.best = (x.to_vec(), e);
            self.history.push((self.nfev, e));
            true
        } else {
            false
        }
    }

    fn uniform_point(&mut self) -> Vec<T> {
        self.lower
            .iter()
            .zip(self.upper)
            .map(|(&lo, &hi)| lo + (hi - lo) * T::lit(self.rng.random::<f64>()))
            .collect()
    }

    fn restart(&mut self) -> std::result::Result<(), Stop> {
        let x = self.uniform_point();
        let e = self.eval(&x)?;
        self.offer_best(&x, e);
        self.current = (x, e);
        Ok(())
    }

    fn propose(&mut self, step: usize, t_visit: f64) -> Vec<T> {
        let dim = self.lower.len();
        let mut x = self.current.0.clone();
        if step < dim {
            for i in 0..dim {
                let d = T::lit(self.visit.sample_one(&mut self.rng, t_visit));
                x[i] = wrap_into(x[i] + d, self.lower[i], self.upper[i]);
            }
        } else {
            let i = step - dim;
            let d = T::lit(self.visit.sample_one(&mut self.rng, t_visit));
            x[i] = wrap_into(x[i] + d, self.lower[i], self.upper[i]);
        }
        x
    }

    /// One Markov chain at iteration `k`; returns whether the global best strictly improved.
    fn chain(&mut self, k: usize, t_visit: f64) -> std::result::Result<bool, Stop> {
        let t_accept = acceptance_temperature(k, t_visit);
        let mut improved = false;
        for step in 0..2 * self.lower.len() {
            let x = self.propose(step, t_visit);
            let e = self.eval(&x)?;
            if !e.is_finite() {
                continue;
            }
            if e < self.current.1 {
                improved |= self.offer_best(&x, e);
                self.current = (x, e);
            } else {
                let delta = (e - self.current.1).to_f64_lossy();
                if accept(&mut self.rng, delta, t_accept, self.cfg.accept) {
                    self.current = (x, e);
                }
            }
        }
        Ok(improved)
    }

    fn polish(&mut self) {
        let budget = self.cfg.maxfun.saturating_sub(self.nfev);
        if budget == 0 {
            return;
        }
        let (x0, f0) = self.best.clone();
        let r = local_search(self.f, &x0, Some(f0), self.lower, self.upper, budget, default_max_iter(x0.len()));
        self.nfev += r.evals;
        if r.value < self.best.1 {
            self.offer_best(&r.x, r.value);
            self.current = (r.x, r.value);
        }
    }
}

/// Minimizes `f` over the box `[lower, upper]`.
pub fn dual_anneal<T: Real, O: Objective<T> + ?Sized>(
    f: &O,
    lower: &[T],
    upper: &[T],
    cfg: &AnnealConfig,
) -> Result<TrialResult<T>> {
    cfg.validate()?;
    if lower.len() != upper.len() || lower.is_empty() {
        return Err(Error::Dimension(format!("bounds of lengths {} and {}", lower.len(), upper.len())));
    }
    for (i, (lo, hi)) in lower.iter().zip(upper).enumerate() {
        if !lo.is_finite() || !hi.is_finite() || !(lo < hi) {
            return Err(Error::param(format!("bounds[{i}]"), "need finite lower < upper"));
        }
    }
    let started = Instant::now();
    let mut s = Search {
        f,
        lower,
        upper,
        cfg,
        rng: ChaCha20Rng::seed_from_u64(cfg.seed),
        visit: VisitingDistribution::from_config(cfg),
        nfev: 0,
        current: (Vec::new(), T::infinity()),
        best: (Vec::new(), T::infinity()),
        history: Vec::new(),
    };
    let x0 = s.uniform_point();
    s.best = (x0.clone(), T::infinity());
    s.current = (x0, T::infinity());
    let mut iterations = 0usize;

    if let Ok(e) = s.eval(&s.current.0.clone()) {
        let x = s.current.0.clone();
        s.offer_best(&x, e);
        s.current.1 = e;
        let restart_below = cfg.restart_temp_ratio * cfg.initial_temp;
        'outer: while iterations < cfg.maxiter {
            let mut k = 1;
            loop {
                if iterations >= cfg.maxiter {
                    break 'outer;
                }
                let t_visit = visiting_temperature(k, cfg);
                if t_visit < restart_below {
                    if s.restart().is_err() {
                        break 'outer;
                    }
                    continue 'outer;
                }
                let improved = match s.chain(k, t_visit) {
                    Ok(v) => v,
                    Err(Stop) => {
                        iterations += 1;
                        break 'outer;
                    }
                };
                iterations += 1;
                if cfg.local_search && improved {
                    s.polish();
                }
                if s.nfev >= cfg.maxfun {
                    break 'outer;
                }
                k += 1;
            }
        }
        if cfg.local_search {
            s.polish();
        }
    }

    let (best_params, best_value) = s.best;
    Ok(TrialResult {
        best_params: ParamVector(best_params),
        best_value,
        n_evals: s.nfev,
        n_iters: iterations,
        seed: cfg.seed,
        wall_time: started.elapsed().as_secs_f64(),
        history: s.history,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::cell::Cell;

    fn sphere(x: &[f64]) -> f64 {
        x.iter().map(|v| v * v).sum()
    }

    #[test]
    fn sphere_2d() {
        let cfg = AnnealConfig { maxfun: 2000, seed: 42, ..AnnealConfig::default() };
        let r = dual_anneal(&sphere, &[-5.0; 2], &[5.0; 2], &cfg).unwrap();
        assert!(r.best_value <= 1e-6, "{}", r.best_value);
        assert!(r.n_evals <= 2000);
    }

    #[test]
    fn deterministic_for_fixed_seed() {
        let cfg = AnnealConfig { maxfun: 1500, seed: 9, ..AnnealConfig::default() };
        let f = |x: &[f64]| x.iter().map(|v| v * v - 10.0 * (2.0 * std::f64::consts::PI * v).cos() + 10.0).sum::<f64>();
        let a = dual_anneal(&f, &[-5.12; 3], &[5.12; 3], &cfg).unwrap();
        let b = dual_anneal(&f, &[-5.12; 3], &[5.12; 3], &cfg).unwrap();
        assert!(a.same_outcome(&b));
        let c = dual_anneal(&f, &[-5.12; 3], &[5.12; 3], &cfg.with_seed(10)).unwrap();
        assert_ne!(a.best_params, c.best_params);
    }

    #[test]
    fn candidates_stay_in_box_and_history_monotone() {
        let lo = [-1.0, 0.0, 2.0];
        let hi = [1.0, 20.0, 2.5];
        let count = Cell::new(0usize);
        let f = |x: &[f64]| {
            count.set(count.get() + 1);
            for i in 0..3 {
                assert!(x[i] >= lo[i] && x[i] <= hi[i], "{x:?}");
            }
            (x[0] - 0.3).powi(2) + (x[1] - 19.0).abs() + x[2]
        };
        let cfg = AnnealConfig { maxfun: 3000, seed: 1, ..AnnealConfig::default() };
        let r = dual_anneal(&f, &lo, &hi, &cfg).unwrap();
        assert_eq!(r.n_evals, count.get());
        assert!(r.n_evals <= 3000);
        assert!(r.history.windows(2).all(|w| w[1].1 <= w[0].1 && w[1].0 >= w[0].0));
        assert_eq!(r.history.last().unwrap().1, r.best_value);
        assert_eq!(f(r.best_params.as_slice()), r.best_value);
    }

    #[test]
    fn failing_objective_is_survived() {
        let f = Fallible(|x: &[f64]| {
            if x[0] > 0.0 {
                Err(Error::Numerical("boom".into()))
            } else {
                Ok(x[0] * x[0] + x[1] * x[1])
            }
        });
        let cfg = AnnealConfig { maxfun: 2000, seed: 3, ..AnnealConfig::default() };
        let r = dual_anneal(&f, &[-2.0; 2], &[2.0; 2], &cfg).unwrap();
        assert!(r.best_value.is_finite());
        assert!(r.best_params.as_slice()[0] <= 0.0);
    }

    #[test]
    fn greedy_without_local_search_terminates() {
        let cfg = AnnealConfig { maxfun: 100_000, maxiter: 50, accept: -1e12, local_search: false, seed: 5, ..AnnealConfig::default() };
        let r = dual_anneal(&sphere, &[-5.0; 4], &[5.0; 4], &cfg).unwrap();
        assert_eq!(r.n_iters, 50);
        assert!(r.best_params.as_slice().iter().all(|v| (-5.0..=5.0).contains(v)));
        assert!(r.best_value.is_finite());
    }

    #[test]
    fn restarts_reset_the_schedule() {
        // high restart ratio forces a restart after a couple of iterations
        let cfg = AnnealConfig { restart_temp_ratio: 0.3, maxiter: 20, maxfun: 100_000, local_search: false, seed: 8, ..AnnealConfig::default() };
        let r = dual_anneal(&sphere, &[-1.0; 2], &[1.0; 2], &cfg).unwrap();
        assert_eq!(r.n_iters, 20);
        // each iteration costs 2·dim evaluations, restarts one each
        assert!(r.n_evals > 1 + 20 * 4);
    }

    #[test]
    fn rejects_bad_bounds() {
        let cfg = AnnealConfig::default();
        assert!(dual_anneal(&sphere, &[0.0, 1.0], &[1.0], &cfg).is_err());
        assert!(dual_anneal(&sphere, &[1.0], &[1.0], &cfg).is_err());
        assert!(dual_anneal(&sphere, &[f64::NEG_INFINITY], &[1.0], &cfg).is_err());
    }
}
