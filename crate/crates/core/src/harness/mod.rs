//! Seeded trials, metrics and the command-line front end.

mod cli;
mod config;
mod metrics;
mod replay;
mod trial;

use std::path::{Path, PathBuf};

use rayon::prelude::*;
use thiserror::Error;

pub use cli::{run_cli, run_cli_with};
pub use config::{
    load_configs, parse_configs, GenerateNovelty, NoveltySource, NrpDenominator, TrialConfig, SCHEMA_VERSION,
};
pub use metrics::{compute_metrics, report_csv, summary_table, Metrics, MetricsError, MetricsReport};
pub use replay::{replay_log, ReplayReport};
pub use trial::{
    failed_trial, game_log, parse_game_start, run_trial, run_trial_logged, write_record, GameRecord, GameStart,
    LogSink, TrialHeader, TrialRecord,
};

#[derive(Debug, Error)]
pub enum HarnessError {
    #[error("config error: {0}")]
    Config(String),
    #[error("trial failed: {0}")]
    Trial(String),
    #[error("i/o error: {0}")]
    Io(String),
    #[error("bad record: {0}")]
    Record(String),
    #[error("replay mismatch: {0}")]
    Replay(String),
    #[error(transparent)]
    Metrics(#[from] MetricsError),
}

impl HarnessError {
    /// 1 for anything the user can fix in their inputs, 2 otherwise.
    pub fn exit_code(&self) -> i32 {
        match self {
            HarnessError::Config(_) => 1,
            _ => 2,
        }
    }
}

/// Output of [`run_suite`]: records per config, a report per config and the
/// rendered summary table.
pub struct SuiteResult {
    pub records: Vec<Vec<TrialRecord>>,
    pub reports: Vec<(String, Result<MetricsReport, String>)>,
    pub summary: String,
}

fn record_name(config: usize, trial: usize) -> String {
    format!("c{config:02}_t{trial:04}")
}

/// Run every trial of every config, in parallel across trials. A trial that
/// fails is recorded as failed; the rest still run. With `out`, one record
/// file per trial plus `summary.txt` and `summary.json` are written there.
pub fn run_suite(configs: &[TrialConfig], out: Option<&Path>, parallel: usize) -> Result<SuiteResult, HarnessError> {
    if let Some(dir) = out {
        std::fs::create_dir_all(dir).map_err(|e| HarnessError::Io(format!("{}: {e}", dir.display())))?;
        if configs.iter().any(|c| c.event_logs) {
            let logs = dir.join("logs");
            std::fs::create_dir_all(&logs).map_err(|e| HarnessError::Io(format!("{}: {e}", logs.display())))?;
        }
    }
    let jobs: Vec<(usize, usize)> = configs
        .iter()
        .enumerate()
        .flat_map(|(ci, c)| (0..c.trials).map(move |t| (ci, t)))
        .collect();
    let run = |&(ci, t): &(usize, usize)| -> Result<TrialRecord, HarnessError> {
        let config = &configs[ci];
        let sink = out.filter(|_| config.event_logs).map(|dir| LogSink {
            dir: dir.join("logs"),
            prefix: record_name(ci, t),
        });
        let record = run_trial_logged(config, t, sink.as_ref()).unwrap_or_else(|e| failed_trial(config, t, &e));
        if let Some(dir) = out {
            write_record(&dir.join(format!("{}.jsonl", record_name(ci, t))), &record)?;
        }
        Ok(record)
    };
    let results: Vec<Result<TrialRecord, HarnessError>> = if parallel == 1 {
        jobs.iter().map(run).collect()
    } else {
        let pool = rayon::ThreadPoolBuilder::new()
            .num_threads(parallel)
            .build()
            .map_err(|e| HarnessError::Io(e.to_string()))?;
        pool.install(|| jobs.par_iter().map(run).collect())
    };
    let mut records: Vec<Vec<TrialRecord>> = vec![Vec::new(); configs.len()];
    for (&(ci, _), r) in jobs.iter().zip(results) {
        records[ci].push(r?);
    }
    let reports: Vec<(String, Result<MetricsReport, String>)> = configs
        .iter()
        .zip(&records)
        .map(|(c, rs)| {
            let report = compute_metrics(rs, c.focal, c.nrp_denominator).map_err(|e| e.to_string());
            (c.label(), report)
        })
        .collect();
    let summary = summary_table(&reports);
    if let Some(dir) = out {
        let write = |name: &str, body: String| {
            let p: PathBuf = dir.join(name);
            std::fs::write(&p, body).map_err(|e| HarnessError::Io(format!("{}: {e}", p.display())))
        };
        write("summary.txt", summary.clone())?;
        let json: Vec<serde_json::Value> = reports
            .iter()
            .map(|(label, r)| match r {
                Ok(r) => serde_json::json!({"config": label, "report": r}),
                Err(e) => serde_json::json!({"config": label, "error": e}),
            })
            .collect();
        let body = serde_json::json!({"schema_version": SCHEMA_VERSION, "reports": json});
        write(
            "summary.json",
            serde_json::to_string_pretty(&body).expect("summary serializes"),
        )?;
    }
    Ok(SuiteResult {
        records,
        reports,
        summary,
    })
}

/// Load every trial record (`*.jsonl` with a trial header) in `dir`.
pub fn read_records(dir: &Path) -> Result<Vec<TrialRecord>, HarnessError> {
    let entries =
        std::fs::read_dir(dir).map_err(|e| HarnessError::Config(format!("cannot read {}: {e}", dir.display())))?;
    let mut paths: Vec<PathBuf> = entries
        .filter_map(|e| e.ok().map(|e| e.path()))
        .filter(|p| p.is_file() && p.extension().is_some_and(|x| x == "jsonl"))
        .collect();
    paths.sort();
    let mut records = Vec::new();
    for p in paths {
        let file = std::fs::File::open(&p).map_err(|e| HarnessError::Io(format!("{}: {e}", p.display())))?;
        let r = TrialRecord::read_jsonl(std::io::BufReader::new(file))
            .map_err(|e| HarnessError::Record(format!("{}: {e}", p.display())))?;
        records.push(r);
    }
    Ok(records)
}
