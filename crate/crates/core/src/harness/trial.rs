use std::io::{BufRead, Write};
use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};

use super::config::{TrialConfig, SCHEMA_VERSION};
use super::HarnessError;
use crate::agents::{build_agent, Agent, AgentSpec};
use crate::board::BoardSpec;
use crate::engine::{GameEvent, GameResult};
use crate::novelty::{DeviationEvent, NoveltySpec};
use crate::{derive_seed, PlayerId};

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct GameRecord {
    pub game_index: usize,
    pub seed: u64,
    pub winner: Option<PlayerId>,
    pub rounds: u32,
    pub novelty_active: bool,
    /// The focal agent's announcement as of the end of this game.
    pub announcement: Option<usize>,
    pub digest: String,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct TrialHeader {
    pub schema_version: u32,
    pub config: String,
    pub config_digest: String,
    pub trial_index: usize,
    pub seed: u64,
    pub board: String,
    pub agents: Vec<String>,
    pub focal: usize,
    pub games_per_trial: usize,
    pub novelty: Option<NoveltySpec>,
    pub trigger_game: Option<usize>,
    /// First game at which the focal agent announced a novelty.
    pub announcement: Option<usize>,
    pub deviations: Vec<DeviationEvent>,
    pub error: Option<String>,
}

#[derive(Clone, Debug, PartialEq)]
pub struct TrialRecord {
    pub header: TrialHeader,
    pub games: Vec<GameRecord>,
}

#[derive(Serialize, Deserialize)]
#[serde(tag = "record", rename_all = "snake_case")]
enum RecordLine {
    Trial(Box<TrialHeader>),
    Game(GameRecord),
}

impl TrialRecord {
    /// Header line, then one line per game.
    pub fn write_jsonl(&self, mut w: impl Write) -> std::io::Result<()> {
        let line = |v: &RecordLine| serde_json::to_string(v).expect("record serializes");
        writeln!(w, "{}", line(&RecordLine::Trial(Box::new(self.header.clone()))))?;
        for g in &self.games {
            writeln!(w, "{}", line(&RecordLine::Game(g.clone())))?;
        }
        Ok(())
    }

    pub fn read_jsonl(r: impl BufRead) -> Result<TrialRecord, HarnessError> {
        let mut header = None;
        let mut games = Vec::new();
        for (i, line) in r.lines().enumerate() {
            let line = line.map_err(|e| HarnessError::Io(e.to_string()))?;
            if line.trim().is_empty() {
                continue;
            }
            let parsed: RecordLine =
                serde_json::from_str(&line).map_err(|e| HarnessError::Record(format!("line {}: {e}", i + 1)))?;
            match parsed {
                RecordLine::Trial(h) if header.is_none() => header = Some(*h),
                RecordLine::Trial(_) => return Err(HarnessError::Record("second trial header".into())),
                RecordLine::Game(g) => games.push(g),
            }
        }
        let header = header.ok_or_else(|| HarnessError::Record("missing trial header".into()))?;
        Ok(TrialRecord { header, games })
    }

    pub fn failed(&self) -> bool {
        self.header.error.is_some()
    }
}

/// First line of a per-game event log: everything needed to play the game
/// again.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct GameStart {
    pub schema_version: u32,
    pub board: BoardSpec,
    pub novelty: Option<NoveltySpec>,
    /// Roster with every seed pinned.
    pub agents: Vec<AgentSpec>,
    /// Each agent's carried-over knowledge at the start of the game.
    pub snapshots: Vec<Option<serde_json::Value>>,
    pub seed: u64,
    pub game_index: usize,
    pub max_rounds: u32,
}

#[derive(Serialize, Deserialize)]
struct GameStartLine {
    game_start: GameStart,
}

/// Render a game as its JSONL event log.
pub fn game_log(start: &GameStart, events: &[GameEvent]) -> String {
    let mut out = serde_json::to_string(&GameStartLine {
        game_start: start.clone(),
    })
    .expect("header serializes");
    out.push('\n');
    out.push_str(&crate::engine::events_to_jsonl(events));
    out
}

pub fn parse_game_start(line: &str) -> Result<GameStart, HarnessError> {
    serde_json::from_str::<GameStartLine>(line)
        .map(|l| l.game_start)
        .map_err(|e| HarnessError::Record(format!("bad game_start header: {e}")))
}

/// Where per-game event logs go, if anywhere.
pub struct LogSink {
    pub dir: PathBuf,
    pub prefix: String,
}

impl LogSink {
    pub fn path(&self, game: usize) -> PathBuf {
        self.dir.join(format!("{}_g{game:04}.jsonl", self.prefix))
    }
}

fn pinned_roster(config: &TrialConfig, trial_seed: u64) -> Vec<AgentSpec> {
    config
        .agents
        .iter()
        .enumerate()
        .map(|(seat, a)| AgentSpec {
            seed: Some(a.seed.unwrap_or_else(|| TrialConfig::agent_seed(trial_seed, seat))),
            ..a.clone()
        })
        .collect()
}

fn header(config: &TrialConfig, trial: usize, seed: u64) -> TrialHeader {
    TrialHeader {
        schema_version: SCHEMA_VERSION,
        config: config.label(),
        config_digest: config.digest(),
        trial_index: trial,
        seed,
        board: config.board.clone(),
        agents: config.agents.iter().map(|a| a.agent.clone()).collect(),
        focal: config.focal,
        games_per_trial: config.games_per_trial,
        novelty: None,
        trigger_game: None,
        announcement: None,
        deviations: Vec::new(),
        error: None,
    }
}

pub fn run_trial(config: &TrialConfig, trial: usize) -> Result<TrialRecord, HarnessError> {
    run_trial_logged(config, trial, None)
}

/// Play games `0..games_per_trial` with one persistent set of agents. The
/// novelty, if any, is active from its trigger game onward.
pub fn run_trial_logged(
    config: &TrialConfig,
    trial: usize,
    logs: Option<&LogSink>,
) -> Result<TrialRecord, HarnessError> {
    let seed = config.trial_seed(trial);
    let board = config.load_board()?;
    let novelty = config.novelty_for(&board, seed)?;
    if let Some(n) = &novelty {
        n.validate(config.games_per_trial)
            .map_err(|e| HarnessError::Trial(format!("novelty: {e}")))?;
    }
    let roster = pinned_roster(config, seed);
    let mut agents: Vec<Box<dyn Agent>> = roster
        .iter()
        .map(|a| build_agent(a, 0))
        .collect::<Result<_, _>>()
        .map_err(|e| HarnessError::Config(e.to_string()))?;
    let trigger = novelty.as_ref().map(|n| n.trigger_game);
    let mut games = Vec::with_capacity(config.games_per_trial);
    for g in 0..config.games_per_trial {
        let active = trigger.is_some_and(|t| g >= t);
        let game_novelty = novelty.as_ref().filter(|_| active);
        let game_seed = derive_seed(seed, g as u64);
        let start = logs.map(|_| GameStart {
            schema_version: SCHEMA_VERSION,
            board: board.clone(),
            novelty: game_novelty.cloned(),
            agents: roster.clone(),
            snapshots: agents.iter().map(|a| a.snapshot()).collect(),
            seed: game_seed,
            game_index: g,
            max_rounds: config.max_rounds,
        });
        let result = play(&mut agents, &board, game_novelty, game_seed, g, config.max_rounds)?;
        if let (Some(sink), Some(start)) = (logs, &start) {
            std::fs::write(sink.path(g), game_log(start, &result.events))
                .map_err(|e| HarnessError::Io(format!("{}: {e}", sink.path(g).display())))?;
        }
        games.push(GameRecord {
            game_index: g,
            seed: game_seed,
            winner: result.winner,
            rounds: result.rounds,
            novelty_active: active,
            announcement: agents[config.focal].novelty_announcement(),
            digest: result.digest,
        });
    }
    let mut h = header(config, trial, seed);
    h.novelty = novelty;
    h.trigger_game = trigger;
    h.announcement = agents[config.focal].novelty_announcement();
    h.deviations = agents[config.focal].deviations();
    Ok(TrialRecord { header: h, games })
}

pub(crate) fn play(
    agents: &mut [Box<dyn Agent>],
    board: &BoardSpec,
    novelty: Option<&NoveltySpec>,
    seed: u64,
    game_index: usize,
    max_rounds: u32,
) -> Result<GameResult, HarnessError> {
    crate::engine::Game::new(agents, board, novelty, seed, max_rounds)
        .and_then(|g| g.game_index(game_index).run())
        .map_err(|e| HarnessError::Trial(format!("game {game_index}: {e}")))
}

/// Record of a trial that could not be played.
pub fn failed_trial(config: &TrialConfig, trial: usize, error: &HarnessError) -> TrialRecord {
    let mut h = header(config, trial, config.trial_seed(trial));
    h.error = Some(error.to_string());
    TrialRecord {
        header: h,
        games: Vec::new(),
    }
}

pub fn write_record(path: &Path, record: &TrialRecord) -> Result<(), HarnessError> {
    let file = std::fs::File::create(path).map_err(|e| HarnessError::Io(format!("{}: {e}", path.display())))?;
    let mut w = std::io::BufWriter::new(file);
    record
        .write_jsonl(&mut w)
        .and_then(|_| w.flush())
        .map_err(|e| HarnessError::Io(format!("{}: {e}", path.display())))
}
