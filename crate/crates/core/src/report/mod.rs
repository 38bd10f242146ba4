//! Durable results: run records, controls files and CSV tables.

mod controls;
mod record;
mod tables;

pub use controls::{format_controls, parse_controls};
pub use record::{
    append_records, fingerprint, load_records, load_verified, write_file_atomic, RecordInputs, RunRecord, TrialContext,
    SCHEMA_VERSION, SPOT_CHECK_TOL,
};
pub use tables::{
    figure_csv, num, select, stats_rows, trial_rows, write_stats_csv, write_summary_csv, write_trials_csv, Figure,
    STATS_HEADER, SUMMARY_HEADER, TRIALS_HEADER,
};

