//! Line-delimited JSON run records.
//!
//! One [`RunRecord`] per line. Version 1 fields:
//!
//! | field | meaning |
//! |---|---|
//! | `schema_version` | always 1 |
//! | `timestamp` | RFC 3339, UTC |
//! | `fingerprint` | hex SHA-256 of the canonical JSON of [`RecordInputs`] |
//! | `gate`, `system`, `eps`, `template`, `anneal` | everything needed to rerun the trial |
//! | `trial_index`, `base_seed`, `seed` | trial position and seeds (`anneal.seed == seed`) |
//! | `best_value`, `best_params`, `ranges` | result; absent when the trial failed |
//! | `n_evals`, `n_iters`, `wall_time` | cost |
//! | `failure` | error message of a failed trial |

use std::fs;
use std::io::Write;
use std::path::Path;

use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

use crate::annealing::{AnnealConfig, TrialResult};
use crate::dynamics::SystemSpec;
use crate::error::{Error, Result};
use crate::objective::{ControlRanges, GateProblem, ScheduleTemplate};
use crate::quantum::GateKind;

pub const SCHEMA_VERSION: u32 = 1;

/// Tolerance of the re-evaluation check on load.
pub const SPOT_CHECK_TOL: f64 = 1e-9;

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct RunRecord {
    pub schema_version: u32,
    pub timestamp: String,
    pub fingerprint: String,
    pub gate: GateKind,
    pub system: SystemSpec<f64>,
    pub eps: f64,
    pub template: ScheduleTemplate<f64>,
    pub anneal: AnnealConfig,
    pub trial_index: usize,
    pub base_seed: Option<u64>,
    pub seed: u64,
    pub best_value: Option<f64>,
    pub n_evals: usize,
    pub n_iters: usize,
    pub wall_time: f64,
    pub best_params: Vec<f64>,
    pub ranges: Option<ControlRanges<f64>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub failure: Option<String>,
}

/// The inputs that determine a trial, hashed into the fingerprint.
#[derive(Serialize)]
pub struct RecordInputs<'a> {
    pub schema_version: u32,
    pub gate: GateKind,
    pub system: &'a SystemSpec<f64>,
    pub template: &'a ScheduleTemplate<f64>,
    pub anneal: &'a AnnealConfig,
    pub trial_index: usize,
    pub base_seed: Option<u64>,
}

pub fn fingerprint(inputs: &RecordInputs<'_>) -> String {
    let json = serde_json::to_vec(inputs).expect("inputs serialize");
    hex::encode(Sha256::digest(&json))
}

/// Where a trial sits inside a run.
#[derive(Clone, Copy, Debug)]
pub struct TrialContext<'a> {
    pub gate: GateKind,
    pub system: &'a SystemSpec<f64>,
    pub template: &'a ScheduleTemplate<f64>,
    pub anneal: &'a AnnealConfig,
    pub trial_index: usize,
    pub base_seed: Option<u64>,
}

impl RunRecord {
    pub fn new(ctx: TrialContext<'_>, seed: u64, result: std::result::Result<&TrialResult<f64>, &str>) -> Self {
        let anneal = ctx.anneal.with_seed(seed);
        let fingerprint = fingerprint(&RecordInputs {
            schema_version: SCHEMA_VERSION,
            gate: ctx.gate,
            system: ctx.system,
            template: ctx.template,
            anneal: &anneal,
            trial_index: ctx.trial_index,
            base_seed: ctx.base_seed,
        });
        let mut rec = RunRecord {
            schema_version: SCHEMA_VERSION,
            timestamp: chrono::Utc::now().to_rfc3339(),
            fingerprint,
            gate: ctx.gate,
            system: ctx.system.clone(),
            eps: ctx.system.eps,
            template: *ctx.template,
            anneal,
            trial_index: ctx.trial_index,
            base_seed: ctx.base_seed,
            seed,
            best_value: None,
            n_evals: 0,
            n_iters: 0,
            wall_time: 0.0,
            best_params: Vec::new(),
            ranges: None,
            failure: None,
        };
        match result {
            Ok(r) => {
                rec.best_value = Some(r.best_value);
                rec.n_evals = r.n_evals;
                rec.n_iters = r.n_iters;
                rec.wall_time = r.wall_time;
                rec.best_params = r.best_params.0.clone();
                rec.ranges = crate::objective::decode(&rec.best_params, ctx.template).ok().map(|s| s.ranges());
            }
            Err(msg) => rec.failure = Some(msg.to_string()),
        }
        rec
    }

    pub fn expected_fingerprint(&self) -> String {
        fingerprint(&RecordInputs {
            schema_version: self.schema_version,
            gate: self.gate,
            system: &self.system,
            template: &self.template,
            anneal: &self.anneal,
            trial_index: self.trial_index,
            base_seed: self.base_seed,
        })
    }

    /// Structural consistency: version, fingerprint, seed and ε agreement.
    pub fn check(&self) -> Result<()> {
        if self.schema_version != SCHEMA_VERSION {
            return Err(Error::param("schema_version", format!("unsupported version {}", self.schema_version)));
        }
        if self.fingerprint != self.expected_fingerprint() {
            return Err(Error::param("fingerprint", "does not match the stored inputs"));
        }
        if self.anneal.seed != self.seed {
            return Err(Error::param("seed", "differs from anneal.seed"));
        }
        if self.eps != self.system.eps {
            return Err(Error::param("eps", "differs from system.eps"));
        }
        match (self.best_value, &self.failure) {
            (Some(_), None) if self.best_params.len() == self.template.dim() => Ok(()),
            (Some(_), None) => Err(Error::param("best_params", format!("expected {} values", self.template.dim()))),
            (None, Some(_)) => Ok(()),
            _ => Err(Error::param("failure", "a record has either a best value or a failure")),
        }
    }

    /// Re-evaluates `best_params` and compares with the stored value.
    pub fn verify_value(&self) -> Result<()> {
        let Some(stored) = self.best_value else { return Ok(()) };
        let problem = GateProblem::new(self.system.clone(), self.gate, self.template)?;
        let again = problem.grk_infidelity(&self.best_params)?;
        if (again - stored).abs() > SPOT_CHECK_TOL {
            return Err(Error::Numerical(format!("stored best_value {stored:e} but re-evaluation gives {again:e}")));
        }
        Ok(())
    }

    /// Equality ignoring the timestamp and wall-clock time.
    pub fn same_content(&self, other: &Self) -> bool {
        let strip = |r: &Self| Self { timestamp: String::new(), wall_time: 0.0, ..r.clone() };
        strip(self) == strip(other)
    }
}

/// Appends `records` by writing a complete new file next to `path` and renaming it over.
pub fn append_records(path: &Path, records: &[RunRecord]) -> Result<()> {
    let io = |e: std::io::Error| Error::Runtime(format!("{}: {e}", path.display()));
    let mut content = match fs::read(path) {
        Ok(c) => c,
        Err(e) if e.kind() == std::io::ErrorKind::NotFound => Vec::new(),
        Err(e) => return Err(io(e)),
    };
    if !content.is_empty() && !content.ends_with(b"\n") {
        content.push(b'\n');
    }
    for r in records {
        serde_json::to_writer(&mut content, r).map_err(|e| Error::Runtime(e.to_string()))?;
        content.push(b'\n');
    }
    write_file_atomic(path, &content)
}

pub fn write_file_atomic(path: &Path, content: &[u8]) -> Result<()> {
    let io = |e: std::io::Error| Error::Runtime(format!("{}: {e}", path.display()));
    let name = path.file_name().ok_or_else(|| Error::param("path", "has no file name"))?;
    let mut tmp_name = std::ffi::OsString::from(".");
    tmp_name.push(name);
    tmp_name.push(format!(".tmp{}", std::process::id()));
    let tmp = path.with_file_name(tmp_name);
    let result = (|| {
        let mut f = fs::File::create(&tmp)?;
        f.write_all(content)?;
        f.sync_all()?;
        fs::rename(&tmp, path)
    })();
    if result.is_err() {
        let _ = fs::remove_file(&tmp);
    }
    result.map_err(io)
}

/// Parses and structurally checks every record in the file.
pub fn load_records(path: &Path) -> Result<Vec<RunRecord>> {
    let text = fs::read_to_string(path).map_err(|e| Error::Runtime(format!("{}: {e}", path.display())))?;
    let mut out = Vec::new();
    for (i, line) in text.lines().enumerate() {
        if line.trim().is_empty() {
            continue;
        }
        let rec: RunRecord = serde_json::from_str(line).map_err(|e| Error::param(format!("line {}", i + 1), e.to_string()))?;
        rec.check().map_err(|e| Error::param(format!("line {}", i + 1), e.to_string()))?;
        out.push(rec);
    }
    Ok(out)
}

/// Loads and re-evaluates up to `spot_checks` evenly spaced successful records.
pub fn load_verified(path: &Path, spot_checks: usize) -> Result<Vec<RunRecord>> {
    let records = load_records(path)?;
    let ok: Vec<&RunRecord> = records.iter().filter(|r| r.best_value.is_some()).collect();
    if !ok.is_empty() && spot_checks > 0 {
        let picks = spot_checks.min(ok.len());
        for j in 0..picks {
            let idx = if picks == 1 { 0 } else { j * (ok.len() - 1) / (picks - 1) };
            ok[idx].verify_value()?;
        }
    }
    Ok(records)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::annealing::dual_anneal;
    use crate::dynamics::SystemVariant;

    fn sample(trial_index: usize) -> RunRecord {
        let template = ScheduleTemplate { horizon: 1.0, segments: 2, u_max: 20.0, n_max: 20.0 };
        let system = SystemSpec::reference(SystemVariant::Sys1, 0.03);
        let anneal = AnnealConfig { maxfun: 60, ..AnnealConfig::default() };
        let problem = GateProblem::new(system.clone(), GateKind::Cz, template).unwrap();
        let (lo, hi) = problem.bounds();
        let r = dual_anneal(&problem, lo, hi, &anneal.with_seed(11)).unwrap();
        let ctx = TrialContext { gate: GateKind::Cz, system: &system, template: &template, anneal: &anneal, trial_index, base_seed: Some(4) };
        RunRecord::new(ctx, 11, Ok(&r))
    }

    #[test]
    fn round_trip_through_file() {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("runs.jsonl");
        let a = sample(0);
        let b = sample(1);
        append_records(&path, std::slice::from_ref(&a)).unwrap();
        append_records(&path, std::slice::from_ref(&b)).unwrap();
        let loaded = load_verified(&path, 2).unwrap();
        assert_eq!(loaded, vec![a, b]);
        let leftovers: Vec<_> = fs::read_dir(dir.path()).unwrap().collect();
        assert_eq!(leftovers.len(), 1);
    }

    #[test]
    fn fingerprint_detects_edits() {
        let mut r = sample(0);
        r.check().unwrap();
        assert_eq!(r.fingerprint.len(), 64);
        r.system.omega[0] = 1.5;
        assert!(r.check().is_err());
    }

    #[test]
    fn tampered_value_fails_spot_check() {
        let mut r = sample(0);
        r.verify_value().unwrap();
        r.best_value = Some(r.best_value.unwrap() + 1e-6);
        assert!(r.verify_value().is_err());
    }

    #[test]
    fn failed_trial_record() {
        let template = ScheduleTemplate { horizon: 1.0, segments: 2, u_max: 20.0, n_max: 20.0 };
        let system = SystemSpec::reference(SystemVariant::Sys2, 0.0);
        let anneal = AnnealConfig::default();
        let ctx = TrialContext { gate: GateKind::Cnot, system: &system, template: &template, anneal: &anneal, trial_index: 3, base_seed: None };
        let r = RunRecord::new(ctx, 5, Err("diverged"));
        r.check().unwrap();
        assert_eq!(r.best_value, None);
        let line = serde_json::to_string(&r).unwrap();
        assert_eq!(serde_json::from_str::<RunRecord>(&line).unwrap(), r);
    }

    #[test]
    fn bad_line_is_reported_with_position() {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("runs.jsonl");
        let good = serde_json::to_string(&sample(0)).unwrap();
        fs::write(&path, format!("{good}\n{{not json\n")).unwrap();
        let err = load_records(&path).unwrap_err().to_string();
        assert!(err.contains("line 2"), "{err}");
    }
}
