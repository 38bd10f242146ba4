//! Figure-ready CSV tables. Numbers carry 17 significant digits.

use std::io::Write;
use std::str::FromStr;

use crate::dynamics::SystemVariant;
use crate::error::{Error, Result};
use crate::experiments::{stats, Stats, SweepSummary};
use crate::quantum::GateKind;

use super::record::RunRecord;

pub const STATS_HEADER: [&str; 4] = ["eps", "min_min", "max_min", "mean_min"];
pub const TRIALS_HEADER: [&str; 3] = ["eps", "trial_index", "best_value"];
pub const SUMMARY_HEADER: [&str; 6] = ["eps", "min_min", "max_min", "mean_min", "successes", "failures"];

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Figure {
    /// Per-ε min/max/mean of the trial minima.
    Stats,
    /// Every trial's minimum.
    Trials,
}

impl FromStr for Figure {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        match s {
            "stats" => Ok(Figure::Stats),
            "trials" => Ok(Figure::Trials),
            other => Err(Error::param("figure", format!("unknown kind `{other}` (expected stats or trials)"))),
        }
    }
}

pub fn num(v: f64) -> String {
    format!("{v:.16e}")
}

/// Successful records of a single (gate, system) pair.
pub fn select<'a>(records: &'a [RunRecord], gate: Option<GateKind>, system: Option<SystemVariant>) -> Result<Vec<&'a RunRecord>> {
    let picked: Vec<&RunRecord> = records
        .iter()
        .filter(|r| gate.is_none_or(|g| r.gate == g) && system.is_none_or(|s| r.system.variant == s))
        .filter(|r| r.best_value.is_some())
        .collect();
    let mut groups: Vec<(GateKind, SystemVariant)> = picked.iter().map(|r| (r.gate, r.system.variant)).collect();
    groups.sort_by_key(|(g, s)| (g.id(), s.number()));
    groups.dedup();
    if groups.len() > 1 {
        let names: Vec<String> = groups.iter().map(|(g, s)| format!("{g}/{s}")).collect();
        return Err(Error::param("gate/system", format!("records mix {}; choose one with filters", names.join(", "))));
    }
    Ok(picked)
}

/// `(eps, trial_index, best_value)` sorted by ε then trial.
pub fn trial_rows(records: &[&RunRecord]) -> Vec<(f64, usize, f64)> {
    let mut rows: Vec<(f64, usize, f64)> =
        records.iter().filter_map(|r| r.best_value.map(|v| (r.eps, r.trial_index, v))).collect();
    rows.sort_by(|a, b| a.0.total_cmp(&b.0).then(a.1.cmp(&b.1)));
    rows
}

/// Per-ε statistics over the trial rows, in increasing ε.
pub fn stats_rows(trials: &[(f64, usize, f64)]) -> Vec<(f64, Stats<f64>)> {
    let mut out = Vec::new();
    let mut i = 0;
    while i < trials.len() {
        let eps = trials[i].0;
        let mut j = i;
        while j < trials.len() && trials[j].0 == eps {
            j += 1;
        }
        let values: Vec<f64> = trials[i..j].iter().map(|t| t.2).collect();
        out.push((eps, stats(&values).expect("non-empty group")));
        i = j;
    }
    out
}

fn writer<W: Write>(w: W) -> csv::Writer<W> {
    csv::WriterBuilder::new().terminator(csv::Terminator::CRLF).from_writer(w)
}

fn csv_err(e: csv::Error) -> Error {
    Error::Runtime(format!("csv: {e}"))
}

pub fn write_trials_csv<W: Write>(w: W, rows: &[(f64, usize, f64)]) -> Result<()> {
    let mut c = writer(w);
    c.write_record(TRIALS_HEADER).map_err(csv_err)?;
    for (eps, idx, v) in rows {
        c.write_record([num(*eps), idx.to_string(), num(*v)]).map_err(csv_err)?;
    }
    c.flush().map_err(|e| Error::Runtime(e.to_string()))
}

pub fn write_stats_csv<W: Write>(w: W, rows: &[(f64, Stats<f64>)]) -> Result<()> {
    let mut c = writer(w);
    c.write_record(STATS_HEADER).map_err(csv_err)?;
    for (eps, s) in rows {
        c.write_record([num(*eps), num(s.min_min), num(s.max_min), num(s.mean_min)]).map_err(csv_err)?;
    }
    c.flush().map_err(|e| Error::Runtime(e.to_string()))
}

/// Sweep summary table; statistics columns stay empty for an ε where every trial failed.
pub fn write_summary_csv<W: Write>(w: W, summary: &SweepSummary<f64>) -> Result<()> {
    let mut c = writer(w);
    c.write_record(SUMMARY_HEADER).map_err(csv_err)?;
    for row in &summary.rows {
        let (a, b, m) = match row.stats {
            Some(s) => (num(s.min_min), num(s.max_min), num(s.mean_min)),
            None => (String::new(), String::new(), String::new()),
        };
        let successes = row.trials.len() - row.failures.min(row.trials.len());
        c.write_record([num(row.eps), a, b, m, successes.to_string(), row.failures.to_string()]).map_err(csv_err)?;
    }
    c.flush().map_err(|e| Error::Runtime(e.to_string()))
}

/// Builds the CSV for `figure` from stored records.
pub fn figure_csv(records: &[RunRecord], figure: Figure, gate: Option<GateKind>, system: Option<SystemVariant>) -> Result<Vec<u8>> {
    let picked = select(records, gate, system)?;
    let trials = trial_rows(&picked);
    let mut out = Vec::new();
    match figure {
        Figure::Trials => write_trials_csv(&mut out, &trials)?,
        Figure::Stats => write_stats_csv(&mut out, &stats_rows(&trials))?,
    }
    Ok(out)
}
