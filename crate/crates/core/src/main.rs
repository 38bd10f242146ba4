use std::path::{Path, PathBuf};
use std::process::ExitCode;
use std::time::Instant;

use anyhow::{bail, Context, Result};
use clap::{Args, Parser, Subcommand};
use rand::{Rng, SeedableRng};
use serde::Serialize;

use gatesynth::annealing::{dual_anneal, AnnealConfig};
use gatesynth::dynamics::{rk4_reference, SystemSpec, SystemVariant};
use gatesynth::experiments::{default_workers, reference_eps_series, sweep_with, SweepPlan, WORKERS_ENV};
use gatesynth::objective::{GateProblem, ScheduleTemplate};
use gatesynth::quantum::{DensityMatrix, GateKind};
use gatesynth::report::{
    append_records, figure_csv, format_controls, load_verified, parse_controls, write_file_atomic, write_summary_csv,
    Figure, RunRecord, TrialContext,
};

#[derive(Parser)]
#[command(name = "gatesynth", version, about = "Two-qubit gate synthesis for open quantum systems")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Propagate the three initial states under a controls file and print the infidelity.
    Simulate(SimulateArgs),
    /// Run one annealing trial and append its record.
    Optimize(OptimizeArgs),
    /// Run trials over a list of ε values.
    Sweep(SweepArgs),
    /// Turn stored records into a CSV table.
    Report(ReportArgs),
}

fn parse_system(s: &str) -> Result<SystemVariant, String> {
    s.parse().map_err(|e: gatesynth::Error| e.to_string())
}

fn parse_gate(s: &str) -> Result<GateKind, String> {
    s.parse().map_err(|e: gatesynth::Error| e.to_string())
}

fn parse_figure(s: &str) -> Result<Figure, String> {
    s.parse().map_err(|e: gatesynth::Error| e.to_string())
}

#[derive(Args)]
struct ProblemArgs {
    /// System 1, 2 or 3.
    #[arg(long, value_parser = parse_system)]
    system: SystemVariant,
    /// cnot, swap or cz.
    #[arg(long, value_parser = parse_gate)]
    gate: GateKind,
}

#[derive(Args)]
struct Tuning {
    #[arg(long, default_value_t = 30_000)]
    maxfun: usize,
    #[arg(long, default_value_t = 3_000)]
    maxiter: usize,
    #[arg(long, default_value_t = 30_000.0)]
    initial_temp: f64,
    /// Number of control segments.
    #[arg(long, default_value_t = 200)]
    k: usize,
    /// Final time.
    #[arg(long, default_value_t = 20.0)]
    t: f64,
    #[arg(long, default_value_t = 20.0)]
    umax: f64,
    #[arg(long, default_value_t = 20.0)]
    nmax: f64,
}

impl Tuning {
    fn template(&self) -> Result<ScheduleTemplate<f64>> {
        positive_time(self.t)?;
        let t = ScheduleTemplate { horizon: self.t, segments: self.k, u_max: self.umax, n_max: self.nmax };
        t.validate()?;
        Ok(t)
    }

    fn anneal(&self, seed: u64) -> Result<AnnealConfig> {
        let c = AnnealConfig {
            initial_temp: self.initial_temp,
            maxfun: self.maxfun,
            maxiter: self.maxiter,
            seed,
            ..AnnealConfig::default()
        };
        c.validate()?;
        Ok(c)
    }

    fn echo(&self) -> String {
        format!(
            "initial_temp={} maxfun={} maxiter={} K={} T={} u_max={} n_max={}",
            self.initial_temp, self.maxfun, self.maxiter, self.k, self.t, self.umax, self.nmax
        )
    }
}

fn positive_time(t: f64) -> Result<()> {
    if !(t > 0.0) || !t.is_finite() {
        bail!("invalid parameter `t`: final time must be positive and finite, got {t}");
    }
    Ok(())
}

#[derive(Args)]
struct SimulateArgs {
    #[command(flatten)]
    problem: ProblemArgs,
    #[arg(long, default_value_t = 0.0)]
    eps: f64,
    /// Controls file (header T, K, u_max, n_max followed by K lines `u n1 n2`).
    #[arg(long)]
    controls: PathBuf,
    /// Overrides the final time from the controls file.
    #[arg(long)]
    t: Option<f64>,
    /// Also integrate with fixed-step RK4 and print the largest HS discrepancy.
    #[arg(long)]
    oracle_check: bool,
    /// RK4 steps per segment for --oracle-check.
    #[arg(long, default_value_t = 10_000)]
    substeps: usize,
    /// Write the final states as JSON here instead of stdout.
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Args)]
struct OptimizeArgs {
    #[command(flatten)]
    problem: ProblemArgs,
    #[arg(long, default_value_t = 0.0)]
    eps: f64,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    #[command(flatten)]
    tuning: Tuning,
    /// Run-record file (line-delimited JSON), appended to.
    #[arg(long, default_value = "runs.jsonl")]
    out: PathBuf,
    /// Also write the best controls in controls-file format.
    #[arg(long)]
    controls_out: Option<PathBuf>,
}

#[derive(Args)]
struct SweepArgs {
    #[command(flatten)]
    problem: ProblemArgs,
    /// Comma-separated ε values; defaults to 0, 0.01, ..., 0.1.
    #[arg(long)]
    eps_list: Option<String>,
    #[arg(long, default_value_t = 10)]
    trials: usize,
    #[arg(long, default_value_t = 0)]
    base_seed: u64,
    /// Concurrent trials; defaults to $GATESYNTH_WORKERS or the CPU count.
    #[arg(long)]
    workers: Option<usize>,
    #[command(flatten)]
    tuning: Tuning,
    /// Run-record file (line-delimited JSON), appended to.
    #[arg(long, default_value = "runs.jsonl")]
    out: PathBuf,
    /// Summary CSV; defaults to the record file name with `.summary.csv` appended.
    #[arg(long)]
    summary: Option<PathBuf>,
    /// Print the plan and cost estimate, then exit.
    #[arg(long)]
    dry_run: bool,
}

#[derive(Args)]
struct ReportArgs {
    #[arg(long = "in")]
    input: PathBuf,
    /// stats or trials.
    #[arg(long, value_parser = parse_figure)]
    figure: Figure,
    #[arg(long)]
    out: PathBuf,
    #[arg(long, value_parser = parse_gate)]
    gate: Option<GateKind>,
    #[arg(long, value_parser = parse_system)]
    system: Option<SystemVariant>,
    /// Records re-evaluated on load to confirm their stored values.
    #[arg(long, default_value_t = 3)]
    spot_checks: usize,
}

fn spec(variant: SystemVariant, eps: f64) -> Result<SystemSpec<f64>> {
    let s = SystemSpec::reference(variant, eps);
    s.validate()?;
    Ok(s)
}

#[derive(Serialize)]
struct StateDump {
    label: String,
    /// Row-major `[re, im]` pairs.
    matrix: Vec<Vec<[f64; 2]>>,
    /// Upper triangle row by row: diagonals as one real, off-diagonals as real then imaginary part.
    real_coords: Vec<f64>,
}

#[derive(Serialize)]
struct SimulateOutput {
    system: u8,
    gate: GateKind,
    eps: f64,
    horizon: f64,
    segments: usize,
    objective: f64,
    final_states: Vec<StateDump>,
    #[serde(skip_serializing_if = "Option::is_none")]
    oracle_discrepancy: Option<f64>,
}

fn dump(label: &str, rho: &DensityMatrix<f64>) -> StateDump {
    let m = rho.matrix();
    StateDump {
        label: label.to_string(),
        matrix: (0..4).map(|r| (0..4).map(|c| [m.get(r, c).re, m.get(r, c).im]).collect()).collect(),
        real_coords: rho.to_real_coords().to_vec(),
    }
}

fn simulate(a: SimulateArgs) -> Result<()> {
    let text = std::fs::read_to_string(&a.controls).with_context(|| format!("reading {}", a.controls.display()))?;
    let mut schedule = parse_controls(&text).with_context(|| format!("in {}", a.controls.display()))?;
    if let Some(t) = a.t {
        positive_time(t)?;
        schedule.template.horizon = t;
    }
    positive_time(schedule.template.horizon)?;
    let problem = GateProblem::new(spec(a.problem.system, a.eps)?, a.problem.gate, schedule.template)?;
    let finals = problem.final_states(&schedule)?;
    let objective = gatesynth::objective::infidelity_from_finals(&finals, problem.targets());
    println!("F = {objective:.16e}");

    let oracle_discrepancy = if a.oracle_check {
        let mut worst = 0.0f64;
        for (rho0, fin) in problem.initial_states().iter().zip(&finals) {
            let r = rk4_reference(rho0, &schedule, problem.parts(), a.substeps)?;
            worst = worst.max((r.matrix() - fin.matrix()).hs_norm());
        }
        println!("oracle discrepancy (HS) = {worst:.3e}");
        Some(worst)
    } else {
        None
    };

    let out = SimulateOutput {
        system: a.problem.system.number(),
        gate: a.problem.gate,
        eps: a.eps,
        horizon: schedule.template.horizon,
        segments: schedule.segments(),
        objective,
        final_states: finals.iter().enumerate().map(|(i, r)| dump(&format!("rho{}", i + 1), r)).collect(),
        oracle_discrepancy,
    };
    let json = serde_json::to_string_pretty(&out)?;
    match a.out {
        Some(path) => write_file_atomic(&path, format!("{json}\n").as_bytes())?,
        None => println!("{json}"),
    }
    Ok(())
}

fn optimize(a: OptimizeArgs) -> Result<()> {
    let template = a.tuning.template()?;
    let cfg = a.tuning.anneal(a.seed)?;
    let system = spec(a.problem.system, a.eps)?;
    println!("{}", a.tuning.echo());
    println!("system={} gate={} eps={} seed={}", a.problem.system, a.problem.gate, a.eps, a.seed);
    let problem = GateProblem::new(system.clone(), a.problem.gate, template)?;
    let (lo, hi) = problem.bounds();
    let result = dual_anneal(&problem, lo, hi, &cfg)?;
    let ctx = TrialContext { gate: a.problem.gate, system: &system, template: &template, anneal: &cfg, trial_index: 0, base_seed: None };
    let record = RunRecord::new(ctx, a.seed, Ok(&result));
    append_records(&a.out, &[record])?;
    if let Some(path) = &a.controls_out {
        let schedule = gatesynth::objective::decode(result.best_params.as_slice(), &template)?;
        write_file_atomic(path, format_controls(&schedule).as_bytes())?;
    }
    println!("best_value={:.16e} n_evals={} n_iters={} wall_time={:.1}s", result.best_value, result.n_evals, result.n_iters, result.wall_time);
    Ok(())
}

fn parse_eps_list(s: &str) -> Result<Vec<f64>> {
    s.split(',')
        .map(|t| {
            let v: f64 = t.trim().parse().with_context(|| format!("invalid parameter `eps_list`: `{t}` is not a number"))?;
            if !(v >= 0.0) || !v.is_finite() {
                bail!("invalid parameter `eps_list`: {v} must be finite and non-negative");
            }
            Ok(v)
        })
        .collect()
}

/// Seconds per objective evaluation, measured on a few random points.
fn seconds_per_eval(problem: &GateProblem<f64>) -> Result<f64> {
    let (lo, hi) = problem.bounds();
    let mut rng = rand_chacha::ChaCha20Rng::seed_from_u64(0);
    let probes = 3;
    let started = Instant::now();
    for _ in 0..probes {
        let x: Vec<f64> = lo.iter().zip(hi).map(|(l, h)| l + (h - l) * rng.random::<f64>()).collect();
        problem.grk_infidelity(&x)?;
    }
    Ok(started.elapsed().as_secs_f64() / probes as f64)
}

fn summary_path(out: &Path) -> PathBuf {
    let mut s = out.as_os_str().to_owned();
    s.push(".summary.csv");
    PathBuf::from(s)
}

fn sweep(a: SweepArgs) -> Result<()> {
    let template = a.tuning.template()?;
    let anneal = a.tuning.anneal(0)?;
    let eps_values = match &a.eps_list {
        Some(s) => parse_eps_list(s)?,
        None => reference_eps_series(),
    };
    let workers = a.workers.unwrap_or_else(default_workers);
    if workers == 0 {
        bail!("invalid parameter `workers`: must be at least 1");
    }
    let plan = SweepPlan {
        system: spec(a.problem.system, 0.0)?,
        gate: a.problem.gate,
        eps_values,
        trials_per_eps: a.trials,
        base_seed: a.base_seed,
        anneal,
        template,
    };
    plan.validate()?;

    println!("{}", a.tuning.echo());
    println!(
        "system={} gate={} eps={:?} trials={} base_seed={} workers={} ({}={})",
        a.problem.system,
        a.problem.gate,
        plan.eps_values,
        plan.trials_per_eps,
        plan.base_seed,
        workers,
        WORKERS_ENV,
        std::env::var(WORKERS_ENV).unwrap_or_else(|_| "unset".into())
    );
    let probe = GateProblem::new(plan.system.with_eps(plan.eps_values[0]), plan.gate, plan.template)?;
    let per_eval = seconds_per_eval(&probe)?;
    let evals = plan.max_evaluations();
    let parallel = workers.min(plan.trials_per_eps).max(1);
    let secs = evals as f64 * per_eval / parallel as f64;
    println!(
        "cost estimate: up to {evals} objective evaluations at {:.3} ms each, about {:.2} h with {parallel} concurrent trials",
        per_eval * 1e3,
        secs / 3600.0
    );
    if a.dry_run {
        return Ok(());
    }

    let summary = sweep_with(&plan, workers, |row| {
        let system = plan.system.with_eps(row.eps);
        let records: Vec<RunRecord> = row
            .trials
            .iter()
            .map(|t| {
                let ctx = TrialContext {
                    gate: plan.gate,
                    system: &system,
                    template: &plan.template,
                    anneal: &plan.anneal,
                    trial_index: t.outcome.index,
                    base_seed: Some(plan.base_seed),
                };
                RunRecord::new(ctx, t.outcome.seed, t.outcome.result.as_ref().map_err(|e| e.as_str()))
            })
            .collect();
        append_records(&a.out, &records)?;
        match (&row.stats, &row.error) {
            (Some(s), _) => println!(
                "eps={} min_min={:.6e} max_min={:.6e} mean_min={:.6e} failures={}",
                row.eps, s.min_min, s.max_min, s.mean_min, row.failures
            ),
            (None, Some(e)) => println!("eps={} failed: {e}", row.eps),
            (None, None) => println!("eps={} all {} trials failed", row.eps, row.failures),
        }
        Ok(())
    })?;
    let path = a.summary.unwrap_or_else(|| summary_path(&a.out));
    let mut csv = Vec::new();
    write_summary_csv(&mut csv, &summary)?;
    write_file_atomic(&path, &csv)?;
    println!("records: {}  summary: {}", a.out.display(), path.display());
    Ok(())
}

fn report(a: ReportArgs) -> Result<()> {
    let records = load_verified(&a.input, a.spot_checks).with_context(|| format!("loading {}", a.input.display()))?;
    let csv = figure_csv(&records, a.figure, a.gate, a.system)?;
    write_file_atomic(&a.out, &csv)?;
    Ok(())
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let result = match cli.command {
        Command::Simulate(a) => simulate(a),
        Command::Optimize(a) => optimize(a),
        Command::Sweep(a) => sweep(a),
        Command::Report(a) => report(a),
    };
    match result {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e:#}");
            ExitCode::FAILURE
        }
    }
}
