//! Derivative-free bound-constrained local search: projected limited-memory
//! BFGS with forward-difference gradients and an Armijo backtracking line
//! search along the projected path.

use std::collections::VecDeque;

use super::Objective;
use crate::scalar::Real;

const MEMORY: usize = 10;
const ARMIJO: f64 = 1e-4;
const MAX_BACKTRACKS: usize = 40;
const MAX_EXPANSIONS: usize = 20;
/// Relative decrease below which the search is considered converged.
const FTOL: f64 = 2.220446049250313e-9;
const PGTOL: f64 = 1e-8;

#[derive(Clone, Debug, PartialEq)]
pub struct LocalSearchResult<T> {
    pub x: Vec<T>,
    pub value: T,
    pub evals: usize,
}

/// Iteration cap used by the annealer: `min(max(6·dim, 100), 1000)`.
pub fn default_max_iter(dim: usize) -> usize {
    (6 * dim).clamp(100, 1000)
}

struct Budgeted<'a, T, O: ?Sized> {
    f: &'a O,
    remaining: usize,
    used: usize,
    best: (Vec<T>, T),
}

impl<'a, T: Real, O: Objective<T> + ?Sized> Budgeted<'a, T, O> {
    fn eval(&mut self, x: &[T]) -> Option<T> {
        if self.remaining == 0 {
            return None;
        }
        self.remaining -= 1;
        self.used += 1;
        let v = match self.f.eval(x) {
            Ok(v) if v.is_finite() => v,
            _ => T::infinity(),
        };
        if v < self.best.1 {
            self.best = (x.to_vec(), v);
        }
        Some(v)
    }
}

fn project<T: Real>(x: &mut [T], lower: &[T], upper: &[T]) {
    for ((xi, &lo), &hi) in x.iter_mut().zip(lower).zip(upper) {
        *xi = xi.max(lo).min(hi);
    }
}

fn dot<T: Real>(a: &[T], b: &[T]) -> T {
    a.iter().zip(b).fold(T::zero(), |acc, (x, y)| acc + *x * *y)
}

/// Minimizes `f` from `x0` inside `[lower, upper]` using at most `budget` evaluations.
///
/// `f0` may supply the already-known value at `x0`, saving one evaluation.
/// The returned point never has a larger value than the starting point.
pub fn local_search<T: Real, O: Objective<T> + ?Sized>(
    f: &O,
    x0: &[T],
    f0: Option<T>,
    lower: &[T],
    upper: &[T],
    budget: usize,
    max_iter: usize,
) -> LocalSearchResult<T> {
    let n = x0.len();
    let mut x = x0.to_vec();
    project(&mut x, lower, upper);
    let mut ev = Budgeted { f, remaining: budget, used: 0, best: (x.clone(), T::infinity()) };
    let mut fx = match f0 {
        Some(v) if x.as_slice() == x0 => {
            ev.best.1 = v;
            v
        }
        _ => match ev.eval(&x) {
            Some(v) => v,
            None => return LocalSearchResult { x: x0.to_vec(), value: f0.unwrap_or(T::infinity()), evals: 0 },
        },
    };
    if !fx.is_finite() {
        return finish(ev, x0, f0);
    }

    let sqrt_eps = T::epsilon().sqrt();
    let mut history: VecDeque<(Vec<T>, Vec<T>, T)> = VecDeque::with_capacity(MEMORY);
    let mut pending: Option<(Vec<T>, Vec<T>)> = None; // (s, previous gradient)

    for _ in 0..max_iter {
        // forward differences, stepping backwards at the upper face
        if ev.remaining < n {
            break;
        }
        let mut g = vec![T::zero(); n];
        let mut probe = x.clone();
        for i in 0..n {
            let h = sqrt_eps * x[i].abs().max(T::one());
            let forward = x[i] + h <= upper[i];
            probe[i] = if forward { x[i] + h } else { x[i] - h };
            let fp = ev.eval(&probe).expect("budget checked");
            probe[i] = x[i];
            g[i] = if fp.is_finite() {
                if forward { (fp - fx) / h } else { (fx - fp) / h }
            } else {
                T::zero()
            };
        }

        if let Some((s, g_prev)) = pending.take() {
            let y: Vec<T> = g.iter().zip(&g_prev).map(|(a, b)| *a - *b).collect();
            let sy = dot(&s, &y);
            if sy > T::epsilon() * dot(&y, &y) {
                if history.len() == MEMORY {
                    history.pop_front();
                }
                history.push_back((s, y, T::one() / sy));
            }
        }

        let free: Vec<bool> = (0..n)
            .map(|i| !((x[i] <= lower[i] && g[i] > T::zero()) || (x[i] >= upper[i] && g[i] < T::zero())))
            .collect();
        let pg_norm = (0..n)
            .map(|i| {
                let mut t = x[i] - g[i];
                t = t.max(lower[i]).min(upper[i]);
                (t - x[i]).abs()
            })
            .fold(T::zero(), T::max);
        if pg_norm <= T::lit(PGTOL) {
            break;
        }

        let g_free: Vec<T> = g.iter().zip(&free).map(|(gi, &fr)| if fr { *gi } else { T::zero() }).collect();
        let mut d = two_loop(&history, &g_free);
        for (di, &fr) in d.iter_mut().zip(&free) {
            if !fr {
                *di = T::zero();
            }
        }
        if !(dot(&d, &g_free) < T::zero()) {
            history.clear();
            d = g_free.iter().map(|v| -*v).collect();
        }

        // without curvature information the first trial step has unit length
        let steepest = history.is_empty();
        let mut alpha = if steepest { T::one() / dot(&d, &d).sqrt().max(T::min_positive_value()) } else { T::one() };
        let trial_at = |alpha: T| {
            let mut t: Vec<T> = x.iter().zip(&d).map(|(xi, di)| *xi + alpha * *di).collect();
            project(&mut t, lower, upper);
            t
        };
        let mut accepted: Option<(Vec<T>, T)> = None;
        for attempt in 0..MAX_BACKTRACKS {
            let trial = trial_at(alpha);
            if trial == x {
                break;
            }
            let Some(ft) = ev.eval(&trial) else { break };
            let step: Vec<T> = trial.iter().zip(&x).map(|(a, b)| *a - *b).collect();
            if ft.is_finite() && ft <= fx + T::lit(ARMIJO) * dot(&g, &step) {
                accepted = Some((trial, ft));
                // a full steepest-descent step that succeeded may be too timid on flat ground
                if steepest && attempt == 0 {
                    for _ in 0..MAX_EXPANSIONS {
                        let longer = trial_at(alpha * T::lit(2.0));
                        let Some(fl) = ev.eval(&longer) else { break };
                        let best = accepted.as_ref().map_or(fx, |a| a.1);
                        if !(fl < best) {
                            break;
                        }
                        alpha *= T::lit(2.0);
                        accepted = Some((longer, fl));
                    }
                }
                break;
            }
            alpha *= T::lit(0.5);
        }
        let accepted = accepted.map(|(t, ft)| {
            let step: Vec<T> = t.iter().zip(&x).map(|(a, b)| *a - *b).collect();
            (t, ft, step)
        });
        let Some((x_new, f_new, step)) = accepted else {
            if history.is_empty() {
                break;
            }
            // quasi-Newton direction failed: retry from steepest descent
            history.clear();
            continue;
        };
        let decrease = fx - f_new;
        let scale = fx.abs().max(f_new.abs()).max(T::one());
        pending = Some((step, g));
        x = x_new;
        fx = f_new;
        if decrease <= T::lit(FTOL) * scale {
            break;
        }
    }
    finish(ev, x0, f0)
}

fn finish<T: Real, O: ?Sized>(ev: Budgeted<'_, T, O>, x0: &[T], f0: Option<T>) -> LocalSearchResult<T> {
    let (x, value) = ev.best;
    match f0 {
        Some(v) if !(value < v) => LocalSearchResult { x: x0.to_vec(), value: v, evals: ev.used },
        _ => LocalSearchResult { x, value, evals: ev.used },
    }
}

fn two_loop<T: Real>(history: &VecDeque<(Vec<T>, Vec<T>, T)>, g: &[T]) -> Vec<T> {
    let mut q = g.to_vec();
    let mut alphas = Vec::with_capacity(history.len());
    for (s, y, rho) in history.iter().rev() {
        let a = *rho * dot(s, &q);
        for (qi, yi) in q.iter_mut().zip(y) {
            *qi -= a * *yi;
        }
        alphas.push(a);
    }
    if let Some((s, y, _)) = history.back() {
        let gamma = dot(s, y) / dot(y, y);
        for qi in q.iter_mut() {
            *qi *= gamma;
        }
    }
    for ((s, y, rho), a) in history.iter().zip(alphas.into_iter().rev()) {
        let b = *rho * dot(y, &q);
        for (qi, si) in q.iter_mut().zip(s) {
            *qi += (a - b) * *si;
        }
    }
    q.iter().map(|v| -*v).collect()
}
