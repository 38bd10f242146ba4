use std::path::Path;
use std::process::{Command, Output};

use gatesynth::report::load_records;

const BIN: &str = env!("CARGO_BIN_EXE_gatesynth");

fn run(args: &[&str]) -> Output {
    Command::new(BIN).args(args).output().expect("binary runs")
}

fn stdout(o: &Output) -> String {
    String::from_utf8_lossy(&o.stdout).into_owned()
}

fn stderr(o: &Output) -> String {
    String::from_utf8_lossy(&o.stderr).into_owned()
}

fn p(path: &Path) -> &str {
    path.to_str().unwrap()
}

fn zero_controls(dir: &Path, k: usize) -> std::path::PathBuf {
    let path = dir.join("zero.ctl");
    let mut text = format!("T 20\nK {k}\nu_max 20\nn_max 20\n");
    for _ in 0..k {
        text.push_str("0 0 0\n");
    }
    std::fs::write(&path, text).unwrap();
    path
}

#[test]
fn simulate_matches_rk4_oracle() {
    let dir = tempfile::tempdir().unwrap();
    let ctl = zero_controls(dir.path(), 4);
    let json = dir.path().join("finals.json");
    let o = run(&[
        "simulate", "--system", "1", "--gate", "cz", "--eps", "0", "--controls", p(&ctl), "--oracle-check",
        "--substeps", "2000", "--out", p(&json),
    ]);
    assert!(o.status.success(), "{}", stderr(&o));
    let line = stdout(&o).lines().find(|l| l.starts_with("oracle discrepancy")).unwrap().to_string();
    let d: f64 = line.rsplit(' ').next().unwrap().parse().unwrap();
    assert!(d <= 1e-6, "{line}");
    let v: serde_json::Value = serde_json::from_str(&std::fs::read_to_string(&json).unwrap()).unwrap();
    assert_eq!(v["final_states"].as_array().unwrap().len(), 3);
    assert_eq!(v["final_states"][0]["real_coords"].as_array().unwrap().len(), 16);
}

#[test]
fn simulate_rejects_malformed_controls() {
    let dir = tempfile::tempdir().unwrap();
    let ctl = dir.path().join("bad.ctl");
    std::fs::write(&ctl, "T 20\nK 2\nu_max 20\nn_max 20\n0 0 0\n0 zero 0\n").unwrap();
    let json = dir.path().join("finals.json");
    let o = run(&["simulate", "--system", "1", "--gate", "cz", "--controls", p(&ctl), "--out", p(&json)]);
    assert!(!o.status.success());
    assert!(stderr(&o).contains("n1 (line 6)"), "{}", stderr(&o));
    assert!(!json.exists());
}

#[test]
fn simulate_rejects_nonpositive_time() {
    let dir = tempfile::tempdir().unwrap();
    let ctl = zero_controls(dir.path(), 2);
    let o = run(&["simulate", "--system", "1", "--gate", "cz", "--controls", p(&ctl), "--t", "0"]);
    assert!(!o.status.success());
    assert!(stderr(&o).contains("`t`"), "{}", stderr(&o));
}

#[test]
fn optimize_echoes_defaults() {
    let dir = tempfile::tempdir().unwrap();
    let runs = dir.path().join("runs.jsonl");
    let o = run(&["optimize", "--system", "2", "--gate", "cnot", "--maxfun", "3", "--out", p(&runs)]);
    assert!(o.status.success(), "{}", stderr(&o));
    assert!(stdout(&o).contains("initial_temp=30000 maxfun=3 maxiter=3000 K=200 T=20 u_max=20 n_max=20"), "{}", stdout(&o));
}

#[test]
fn optimize_is_reproducible() {
    let dir = tempfile::tempdir().unwrap();
    let runs = dir.path().join("runs.jsonl");
    let args = ["optimize", "--system", "3", "--gate", "swap", "--eps", "0.05", "--k", "10", "--maxfun", "500", "--seed", "7", "--out", p(&runs)];
    for _ in 0..2 {
        let o = run(&args);
        assert!(o.status.success(), "{}", stderr(&o));
    }
    let recs = load_records(&runs).unwrap();
    assert_eq!(recs.len(), 2);
    assert!(recs[0].same_content(&recs[1]));
    assert!(recs[0].best_value.unwrap().is_finite());
    assert!(recs[0].n_evals <= 500);
}

#[test]
fn optimize_writes_controls_that_simulate_reproduces() {
    let dir = tempfile::tempdir().unwrap();
    let runs = dir.path().join("runs.jsonl");
    let ctl = dir.path().join("best.ctl");
    let o = run(&[
        "optimize", "--system", "2", "--gate", "cnot", "--eps", "0.1", "--k", "5", "--maxfun", "300", "--out", p(&runs),
        "--controls-out", p(&ctl),
    ]);
    assert!(o.status.success(), "{}", stderr(&o));
    let best = load_records(&runs).unwrap()[0].best_value.unwrap();
    let s = run(&["simulate", "--system", "2", "--gate", "cnot", "--eps", "0.1", "--controls", p(&ctl)]);
    assert!(s.status.success(), "{}", stderr(&s));
    let f: f64 = stdout(&s).lines().next().unwrap().trim_start_matches("F = ").parse().unwrap();
    assert!((f - best).abs() <= 1e-12 * best.max(1.0), "{f} vs {best}");
}

fn small_sweep(dir: &Path, name: &str, workers: &str) -> std::path::PathBuf {
    let runs = dir.join(name);
    let o = run(&[
        "sweep", "--system", "2", "--gate", "cz", "--eps-list", "0,0.05,0.1", "--trials", "2", "--k", "3", "--maxfun",
        "200", "--base-seed", "5", "--workers", workers, "--out", p(&runs),
    ]);
    assert!(o.status.success(), "{}", stderr(&o));
    runs
}

#[test]
fn sweep_writes_records_and_summary() {
    let dir = tempfile::tempdir().unwrap();
    let runs = small_sweep(dir.path(), "runs.jsonl", "1");
    assert_eq!(load_records(&runs).unwrap().len(), 6);
    let summary = std::fs::read_to_string(dir.path().join("runs.jsonl.summary.csv")).unwrap();
    let lines: Vec<&str> = summary.lines().collect();
    assert_eq!(lines[0], "eps,min_min,max_min,mean_min,successes,failures");
    assert_eq!(lines.len(), 4);
}

#[test]
fn sweep_independent_of_worker_count() {
    let dir = tempfile::tempdir().unwrap();
    let a = load_records(&small_sweep(dir.path(), "a.jsonl", "1")).unwrap();
    let b = load_records(&small_sweep(dir.path(), "b.jsonl", "4")).unwrap();
    assert_eq!(a.len(), b.len());
    assert!(a.iter().zip(&b).all(|(x, y)| x.same_content(y)));
}

#[test]
fn sweep_rejects_bad_eps_list() {
    let o = run(&["sweep", "--system", "2", "--gate", "cz", "--eps-list", "0,-0.1", "--dry-run"]);
    assert!(!o.status.success());
    assert!(stderr(&o).contains("eps_list"), "{}", stderr(&o));
}

#[test]
fn report_single_record() {
    let dir = tempfile::tempdir().unwrap();
    let runs = dir.path().join("runs.jsonl");
    let o = run(&["optimize", "--system", "1", "--gate", "cz", "--k", "3", "--maxfun", "100", "--out", p(&runs)]);
    assert!(o.status.success(), "{}", stderr(&o));
    let out = dir.path().join("trials.csv");
    let r = run(&["report", "--in", p(&runs), "--figure", "trials", "--out", p(&out)]);
    assert!(r.status.success(), "{}", stderr(&r));
    let text = std::fs::read_to_string(&out).unwrap();
    assert_eq!(text.lines().count(), 2);
    assert!(text.starts_with("eps,trial_index,best_value\r\n"));

    let bad = run(&["report", "--in", p(&runs), "--figure", "histogram", "--out", p(&out)]);
    assert!(!bad.status.success());
    assert!(stderr(&bad).contains("figure"));
}
