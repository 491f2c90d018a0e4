use serde::Serialize;

use super::trial::{game_log, parse_game_start, play};
use super::HarnessError;
use crate::agents::{build_agent, Agent};

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct ReplayReport {
    pub game_index: usize,
    pub events: usize,
    pub winner: Option<usize>,
}

/// Play the game described by a log's `game_start` header again and check
/// that every line of the log comes out byte-identical.
pub fn replay_log(text: &str) -> Result<ReplayReport, HarnessError> {
    let first = text
        .lines()
        .next()
        .ok_or_else(|| HarnessError::Record("empty event log".into()))?;
    let start = parse_game_start(first)?;
    let mut agents: Vec<Box<dyn Agent>> = start
        .agents
        .iter()
        .map(|a| build_agent(a, 0))
        .collect::<Result<_, _>>()
        .map_err(|e| HarnessError::Record(e.to_string()))?;
    for (agent, snap) in agents.iter_mut().zip(&start.snapshots) {
        if let Some(s) = snap {
            agent.restore(s).map_err(|e| HarnessError::Record(e.to_string()))?;
        }
    }
    let result = play(
        &mut agents,
        &start.board,
        start.novelty.as_ref(),
        start.seed,
        start.game_index,
        start.max_rounds,
    )?;
    let again = game_log(&start, &result.events);
    let mut recorded = text.lines();
    let mut replayed = again.lines();
    let mut line = 0;
    loop {
        line += 1;
        match (recorded.next(), replayed.next()) {
            (None, None) => break,
            (a, b) if a == b => continue,
            (a, b) => {
                return Err(HarnessError::Replay(format!(
                    "line {line} differs: log has {}, replay has {}",
                    a.unwrap_or("<end>"),
                    b.unwrap_or("<end>")
                )))
            }
        }
    }
    Ok(ReplayReport {
        game_index: start.game_index,
        events: result.events.len(),
        winner: result.winner,
    })
}
