use std::collections::BTreeMap;
use std::fmt::Write as _;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use super::config::{NrpDenominator, SCHEMA_VERSION};
use super::trial::TrialRecord;

#[derive(Debug, Error, PartialEq)]
pub enum MetricsError {
    #[error("no trial records")]
    NoRecords,
    #[error("PNWP is undefined: no pre-novelty games")]
    NoPreNoveltyGames,
    #[error("NRP is undefined: the pre-novelty win ratio is zero")]
    ZeroDenominator,
}

/// Pooled win-rate and detection figures for a set of trials.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Metrics {
    pub trials: usize,
    pub failed_trials: usize,
    pub pre_games: usize,
    pub post_games: usize,
    /// Focal wins over pre-novelty games.
    pub pnwp: f64,
    /// Focal wins over post-novelty games, if there were any.
    pub win_rate_post: Option<f64>,
    /// Share of novelty trials announced no earlier than the trigger game.
    pub nda: Option<f64>,
    /// Share of novelty-free trials with any announcement.
    pub false_positive_rate: Option<f64>,
    pub nrp: Option<f64>,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct MetricsReport {
    pub schema_version: u32,
    pub focal: usize,
    pub nrp_denominator: NrpDenominator,
    pub overall: Metrics,
    /// Same figures per novelty row (`class-difficulty`, or `none`).
    pub by_class: BTreeMap<String, Metrics>,
}

fn ratio(num: usize, den: usize) -> Option<f64> {
    (den > 0).then(|| num as f64 / den as f64)
}

fn row_label(r: &TrialRecord) -> String {
    r.header
        .novelty
        .as_ref()
        .map_or_else(|| "none".to_string(), |n| n.label())
}

fn metrics(records: &[&TrialRecord], focal: usize, denominator: NrpDenominator) -> Result<Metrics, MetricsError> {
    if records.is_empty() {
        return Err(MetricsError::NoRecords);
    }
    let played: Vec<&&TrialRecord> = records.iter().filter(|r| !r.failed()).collect();
    let (mut pre, mut post, mut pre_wins, mut post_wins, mut other_pre_wins) = (0, 0, 0, 0, 0);
    let mut seats = 0;
    let (mut novel, mut detected, mut clean, mut false_alarms) = (0, 0, 0, 0);
    for r in &played {
        seats = seats.max(r.header.agents.len());
        for g in &r.games {
            let won = g.winner == Some(focal);
            if g.novelty_active {
                post += 1;
                post_wins += won as usize;
            } else {
                pre += 1;
                pre_wins += won as usize;
                other_pre_wins += g.winner.is_some_and(|w| w != focal) as usize;
            }
        }
        match r.header.trigger_game {
            Some(t) => {
                novel += 1;
                detected += r
                    .header
                    .announcement
                    .is_some_and(|a| a >= t && a < r.header.games_per_trial) as usize;
            }
            None => {
                clean += 1;
                false_alarms += r.header.announcement.is_some() as usize;
            }
        }
    }
    let pnwp = ratio(pre_wins, pre).ok_or(MetricsError::NoPreNoveltyGames)?;
    let win_rate_post = ratio(post_wins, post);
    let nrp = match win_rate_post {
        None => None,
        Some(w) => {
            let den = match denominator {
                NrpDenominator::Own => pnwp,
                NrpDenominator::Baseline => other_pre_wins as f64 / (pre * seats.saturating_sub(1).max(1)) as f64,
            };
            if den <= 0.0 {
                return Err(MetricsError::ZeroDenominator);
            }
            Some(w / den)
        }
    };
    Ok(Metrics {
        trials: records.len(),
        failed_trials: records.len() - played.len(),
        pre_games: pre,
        post_games: post,
        pnwp,
        win_rate_post,
        nda: ratio(detected, novel),
        false_positive_rate: ratio(false_alarms, clean),
        nrp,
    })
}

/// PNWP, post-novelty win rate, NDA and NRP, pooled over games and trials.
pub fn compute_metrics(
    records: &[TrialRecord],
    focal: usize,
    denominator: NrpDenominator,
) -> Result<MetricsReport, MetricsError> {
    let all: Vec<&TrialRecord> = records.iter().collect();
    let overall = metrics(&all, focal, denominator)?;
    let mut rows: BTreeMap<String, Vec<&TrialRecord>> = BTreeMap::new();
    for r in records {
        rows.entry(row_label(r)).or_default().push(r);
    }
    let by_class = rows
        .into_iter()
        .filter_map(|(k, rs)| metrics(&rs, focal, denominator).ok().map(|m| (k, m)))
        .collect();
    Ok(MetricsReport {
        schema_version: SCHEMA_VERSION,
        focal,
        nrp_denominator: denominator,
        overall,
        by_class,
    })
}

fn pct(x: Option<f64>) -> String {
    x.map_or_else(|| "-".into(), |v| format!("{:.2}%", 100.0 * v))
}

/// One row per config in the layout `config | trials | PNWP | post | NDA | NRP`.
pub fn summary_table(rows: &[(String, Result<MetricsReport, String>)]) -> String {
    let mut out = String::new();
    let _ = writeln!(
        out,
        "{:<20} {:>7} {:>9} {:>9} {:>9} {:>7}",
        "config", "trials", "PNWP", "win-post", "NDA", "NRP"
    );
    for (label, report) in rows {
        match report {
            Ok(r) => {
                let m = &r.overall;
                let trials = if m.failed_trials > 0 {
                    format!("{}({}!)", m.trials, m.failed_trials)
                } else {
                    m.trials.to_string()
                };
                let _ = writeln!(
                    out,
                    "{:<20} {:>7} {:>9} {:>9} {:>9} {:>7}",
                    label,
                    trials,
                    pct(Some(m.pnwp)),
                    pct(m.win_rate_post),
                    pct(m.nda),
                    m.nrp.map_or_else(|| "-".into(), |v| format!("{v:.3}"))
                );
            }
            Err(e) => {
                let _ = writeln!(out, "{label:<20} FAILED: {e}");
            }
        }
    }
    out
}

/// CSV with, per config, one line for the overall figures and one per
/// novelty row.
pub fn report_csv(reports: &[(String, MetricsReport)]) -> Result<String, csv::Error> {
    let mut w = csv::Writer::from_writer(Vec::new());
    w.write_record([
        "schema_version",
        "config",
        "row",
        "trials",
        "failed_trials",
        "pre_games",
        "post_games",
        "PNWP",
        "win_rate_post",
        "NDA",
        "false_positive_rate",
        "NRP",
    ])?;
    let opt = |x: Option<f64>| x.map_or_else(String::new, |v| v.to_string());
    for (config, report) in reports {
        let rows = std::iter::once(("all".to_string(), &report.overall))
            .chain(report.by_class.iter().map(|(k, m)| (k.clone(), m)));
        for (row, m) in rows {
            w.write_record([
                report.schema_version.to_string(),
                config.clone(),
                row,
                m.trials.to_string(),
                m.failed_trials.to_string(),
                m.pre_games.to_string(),
                m.post_games.to_string(),
                m.pnwp.to_string(),
                opt(m.win_rate_post),
                opt(m.nda),
                opt(m.false_positive_rate),
                opt(m.nrp),
            ])?;
        }
    }
    let bytes = w.into_inner().map_err(|e| e.into_error())?;
    Ok(String::from_utf8(bytes).expect("csv is utf-8"))
}
