//! Trial orchestration and the ε sweep: seeded annealing trials per
//! problem, min/max/mean statistics over trials, and control extrema.

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::annealing::{dual_anneal, AnnealConfig, TrialResult};
use crate::dynamics::SystemSpec;
use crate::error::{Error, Result};
use crate::objective::{decode, ControlRanges, GateProblem, ScheduleTemplate};
use crate::quantum::GateKind;
use crate::scalar::Real;

/// Environment variable holding the default worker count.
pub const WORKERS_ENV: &str = "GATESYNTH_WORKERS";

fn splitmix64(mut z: u64) -> u64 {
    z = z.wrapping_add(0x9e37_79b9_7f4a_7c15);
    z = (z ^ (z >> 30)).wrapping_mul(0xbf58_476d_1ce4_e5b9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94d0_49bb_1331_11eb);
    z ^ (z >> 31)
}

/// Trial seed: the five inputs are absorbed one at a time through splitmix64.
pub fn derive_seed(base: u64, gate_id: u64, system_id: u64, eps_index: u64, trial: u64) -> u64 {
    [gate_id, system_id, eps_index, trial].iter().fold(splitmix64(base), |h, &x| splitmix64(h ^ x))
}

/// Default worker count: `GATESYNTH_WORKERS` if set and positive, else the number of CPUs.
pub fn default_workers() -> usize {
    std::env::var(WORKERS_ENV)
        .ok()
        .and_then(|v| v.trim().parse::<usize>().ok())
        .filter(|&n| n > 0)
        .unwrap_or_else(|| std::thread::available_parallelism().map(|n| n.get()).unwrap_or(1))
}

/// One trial as recorded by the harness; failures are kept, not dropped.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct TrialOutcome<T> {
    pub index: usize,
    pub seed: u64,
    pub result: std::result::Result<TrialResult<T>, String>,
}

impl<T> TrialOutcome<T> {
    pub fn ok(&self) -> Option<&TrialResult<T>> {
        self.result.as_ref().ok()
    }
}

fn pool(workers: usize) -> Result<rayon::ThreadPool> {
    rayon::ThreadPoolBuilder::new()
        .num_threads(workers.max(1))
        .build()
        .map_err(|e| Error::Runtime(format!("thread pool: {e}")))
}

/// `n` trials with seeds `derive_seed(base_seed, gate, system, eps_index, i)`, in index order.
pub fn run_trials_scoped<T: Real>(
    problem: &GateProblem<T>,
    cfg: &AnnealConfig,
    n: usize,
    base_seed: u64,
    eps_index: usize,
    workers: usize,
) -> Result<Vec<TrialOutcome<T>>> {
    if n == 0 {
        return Err(Error::param("trials", "must be at least 1"));
    }
    cfg.validate()?;
    let gate = problem.target().kind.id();
    let system = u64::from(problem.spec().variant.number());
    let (lower, upper) = problem.bounds();
    let one = |i: usize| {
        let seed = derive_seed(base_seed, gate, system, eps_index as u64, i as u64);
        let result = dual_anneal(problem, lower, upper, &cfg.with_seed(seed)).map_err(|e| e.to_string());
        TrialOutcome { index: i, seed, result }
    };
    let mut out: Vec<TrialOutcome<T>> = if workers <= 1 {
        (0..n).map(one).collect()
    } else {
        pool(workers)?.install(|| (0..n).into_par_iter().map(one).collect())
    };
    out.sort_by_key(|t| t.index);
    Ok(out)
}

/// `n` trials at ε index 0 using the default worker count.
pub fn run_trials<T: Real>(problem: &GateProblem<T>, cfg: &AnnealConfig, n: usize, base_seed: u64) -> Result<Vec<TrialOutcome<T>>> {
    run_trials_scoped(problem, cfg, n, base_seed, 0, default_workers())
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct Stats<T> {
    pub min_min: T,
    pub max_min: T,
    pub mean_min: T,
}

/// Min, max and mean of the best values.
pub fn stats<T: Real>(values: &[T]) -> Result<Stats<T>> {
    if values.is_empty() {
        return Err(Error::NoSuccessfulTrials);
    }
    let min_min = values.iter().copied().fold(T::infinity(), T::min);
    let max_min = values.iter().copied().fold(T::neg_infinity(), T::max);
    let sum = values.iter().copied().fold(T::zero(), |a, b| a + b);
    let mean_min = sum / T::from_usize(values.len()).expect("trial count");
    // rounding in the mean must not escape the order statistics
    Ok(Stats { min_min, max_min, mean_min: mean_min.max(min_min).min(max_min) })
}

/// Statistics over the successful trials.
pub fn trial_stats<T: Real>(trials: &[TrialOutcome<T>]) -> Result<Stats<T>> {
    let values: Vec<T> = trials.iter().filter_map(|t| t.ok().map(|r| r.best_value)).collect();
    stats(&values)
}

pub fn control_ranges<T: Real>(result: &TrialResult<T>, template: &ScheduleTemplate<T>) -> Result<ControlRanges<T>> {
    Ok(decode(result.best_params.as_slice(), template)?.ranges())
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SweepPlan<T> {
    /// System parameters; the ε stored here is ignored.
    pub system: SystemSpec<T>,
    pub gate: GateKind,
    pub eps_values: Vec<T>,
    pub trials_per_eps: usize,
    pub base_seed: u64,
    pub anneal: AnnealConfig,
    pub template: ScheduleTemplate<T>,
}

/// ε ∈ {0, 0.01, …, 0.1}.
pub fn reference_eps_series<T: Real>() -> Vec<T> {
    (0..=10).map(|i| T::ratio(i, 100)).collect()
}

impl<T: Real> SweepPlan<T> {
    /// Ten trials over the reference ε series with the reference template and annealing settings.
    pub fn reference(system: SystemSpec<T>, gate: GateKind, base_seed: u64) -> Self {
        Self {
            system,
            gate,
            eps_values: reference_eps_series(),
            trials_per_eps: 10,
            base_seed,
            anneal: AnnealConfig::default(),
            template: ScheduleTemplate::reference(),
        }
    }

    pub fn validate(&self) -> Result<()> {
        if self.eps_values.is_empty() {
            return Err(Error::param("eps_values", "must not be empty"));
        }
        if let Some(e) = self.eps_values.iter().find(|e| !(**e >= T::zero()) || !e.is_finite()) {
            return Err(Error::param("eps_values", format!("{e} is not a finite nonnegative value")));
        }
        if self.trials_per_eps == 0 {
            return Err(Error::param("trials_per_eps", "must be at least 1"));
        }
        self.template.validate()?;
        self.anneal.validate()?;
        self.system.with_eps(T::zero()).validate()
    }

    /// Total objective evaluations the sweep may spend.
    pub fn max_evaluations(&self) -> usize {
        self.eps_values.len() * self.trials_per_eps * self.anneal.maxfun
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct TrialSummary<T> {
    pub outcome: TrialOutcome<T>,
    pub ranges: Option<ControlRanges<T>>,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SweepRow<T> {
    pub eps_index: usize,
    pub eps: T,
    /// `None` when every trial at this ε failed.
    pub stats: Option<Stats<T>>,
    pub failures: usize,
    pub trials: Vec<TrialSummary<T>>,
    /// Set when the problem itself could not be built at this ε.
    pub error: Option<String>,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SweepSummary<T> {
    pub rows: Vec<SweepRow<T>>,
}

fn sweep_row<T: Real>(plan: &SweepPlan<T>, eps_index: usize, eps: T, workers: usize) -> SweepRow<T> {
    let failed = |msg: String| SweepRow { eps_index, eps, stats: None, failures: plan.trials_per_eps, trials: Vec::new(), error: Some(msg) };
    let problem = match GateProblem::new(plan.system.with_eps(eps), plan.gate, plan.template) {
        Ok(p) => p,
        Err(e) => return failed(e.to_string()),
    };
    let outcomes = match run_trials_scoped(&problem, &plan.anneal, plan.trials_per_eps, plan.base_seed, eps_index, workers) {
        Ok(o) => o,
        Err(e) => return failed(e.to_string()),
    };
    let trials: Vec<TrialSummary<T>> = outcomes
        .into_iter()
        .map(|outcome| {
            let ranges = outcome.ok().and_then(|r| control_ranges(r, &plan.template).ok());
            TrialSummary { outcome, ranges }
        })
        .collect();
    let values: Vec<T> = trials.iter().filter_map(|t| t.outcome.ok().map(|r| r.best_value)).collect();
    SweepRow {
        eps_index,
        eps,
        stats: stats(&values).ok(),
        failures: trials.len() - values.len(),
        trials,
        error: None,
    }
}

/// Runs the plan, handing every finished row to `on_row` before starting the next ε.
pub fn sweep_with<T: Real>(
    plan: &SweepPlan<T>,
    workers: usize,
    mut on_row: impl FnMut(&SweepRow<T>) -> Result<()>,
) -> Result<SweepSummary<T>> {
    plan.validate()?;
    let mut rows = Vec::with_capacity(plan.eps_values.len());
    for (i, &eps) in plan.eps_values.iter().enumerate() {
        let row = sweep_row(plan, i, eps, workers);
        on_row(&row)?;
        rows.push(row);
    }
    Ok(SweepSummary { rows })
}

pub fn sweep<T: Real>(plan: &SweepPlan<T>) -> Result<SweepSummary<T>> {
    sweep_with(plan, default_workers(), |_| Ok(()))
}

/// Spearman rank correlation with average ranks for ties.
pub fn spearman(x: &[f64], y: &[f64]) -> Option<f64> {
    if x.len() != y.len() || x.len() < 2 {
        return None;
    }
    fn ranks(v: &[f64]) -> Vec<f64> {
        let mut idx: Vec<usize> = (0..v.len()).collect();
        idx.sort_by(|&a, &b| v[a].total_cmp(&v[b]));
        let mut r = vec![0.0; v.len()];
        let mut i = 0;
        while i < idx.len() {
            let mut j = i;
            while j + 1 < idx.len() && v[idx[j + 1]] == v[idx[i]] {
                j += 1;
            }
            let avg = (i + j) as f64 / 2.0 + 1.0;
            for &k in &idx[i..=j] {
                r[k] = avg;
            }
            i = j + 1;
        }
        r
    }
    let (rx, ry) = (ranks(x), ranks(y));
    let n = x.len() as f64;
    let (mx, my) = (rx.iter().sum::<f64>() / n, ry.iter().sum::<f64>() / n);
    let cov: f64 = rx.iter().zip(&ry).map(|(a, b)| (a - mx) * (b - my)).sum();
    let vx: f64 = rx.iter().map(|a| (a - mx).powi(2)).sum();
    let vy: f64 = ry.iter().map(|b| (b - my).powi(2)).sum();
    if vx == 0.0 || vy == 0.0 {
        None
    } else {
        Some(cov / (vx * vy).sqrt())
    }
}
