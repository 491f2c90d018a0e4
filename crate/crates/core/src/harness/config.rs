use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

use super::HarnessError;
use crate::agents::{build_agent, AgentSpec};
use crate::board::{builtin_board, load_board_spec, BoardSpec};
use crate::novelty::{generate_novelty, Difficulty, NoveltyClass, NoveltySpec};

pub const SCHEMA_VERSION: u32 = 1;

/// A fixed novelty, or one drawn per trial from the built-in generator.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum NoveltySource {
    Fixed(NoveltySpec),
    Generate { generate: GenerateNovelty },
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct GenerateNovelty {
    pub class: NoveltyClass,
    pub difficulty: Difficulty,
}

/// Which pre-novelty win ratio divides the post-novelty one.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum NrpDenominator {
    /// The focal agent's own pre-novelty win ratio.
    #[default]
    Own,
    /// Mean pre-novelty win ratio of the other seats.
    Baseline,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct TrialConfig {
    pub schema_version: u32,
    /// Row label in the summary; defaults to the novelty label.
    pub name: Option<String>,
    /// Path to a board JSON file, or `builtin:standard` / `builtin:tb8`.
    pub board: String,
    pub agents: Vec<AgentSpec>,
    /// Seat whose results the metrics are about.
    pub focal: usize,
    pub games_per_trial: usize,
    pub trials: usize,
    pub novelty: Option<NoveltySource>,
    pub seed: u64,
    pub max_rounds: u32,
    /// Worker threads; 0 uses all cores.
    pub parallel: usize,
    pub out: Option<PathBuf>,
    /// Also write one JSONL event log per game.
    pub event_logs: bool,
    pub nrp_denominator: NrpDenominator,
    /// Directory relative board paths are resolved against.
    #[serde(skip)]
    pub base_dir: Option<PathBuf>,
}

impl Default for TrialConfig {
    fn default() -> Self {
        TrialConfig {
            schema_version: SCHEMA_VERSION,
            name: None,
            board: "builtin:standard".into(),
            agents: vec![
                AgentSpec::named("value"),
                AgentSpec::named("simple"),
                AgentSpec::named("simple"),
                AgentSpec::named("simple"),
            ],
            focal: 0,
            games_per_trial: 100,
            trials: 1,
            novelty: None,
            seed: 0,
            max_rounds: 200,
            parallel: 0,
            out: None,
            event_logs: false,
            nrp_denominator: NrpDenominator::Own,
            base_dir: None,
        }
    }
}

pub fn parse_configs(text: &str, base_dir: Option<&Path>) -> Result<Vec<TrialConfig>, HarnessError> {
    let bad = |e: serde_json::Error| HarnessError::Config(format!("bad config: {e}"));
    // A config file holds one trial config or a list of them.
    let mut configs: Vec<TrialConfig> = if text.trim_start().starts_with('[') {
        serde_json::from_str(text).map_err(bad)?
    } else {
        vec![serde_json::from_str(text).map_err(bad)?]
    };
    for c in &mut configs {
        c.base_dir = base_dir.map(Path::to_path_buf);
    }
    Ok(configs)
}

pub fn load_configs(path: &Path) -> Result<Vec<TrialConfig>, HarnessError> {
    let text = std::fs::read_to_string(path)
        .map_err(|e| HarnessError::Config(format!("cannot read config {}: {e}", path.display())))?;
    parse_configs(&text, path.parent())
}

impl TrialConfig {
    pub fn label(&self) -> String {
        if let Some(n) = &self.name {
            return n.clone();
        }
        match &self.novelty {
            None => "none".into(),
            Some(NoveltySource::Fixed(n)) => n.label(),
            Some(NoveltySource::Generate { generate }) => format!("{}-{}", generate.class, generate.difficulty),
        }
    }

    pub fn board_path(&self) -> Option<PathBuf> {
        if builtin_board(&self.board).is_some() {
            return None;
        }
        let p = PathBuf::from(&self.board);
        Some(match &self.base_dir {
            Some(dir) if p.is_relative() => dir.join(p),
            _ => p,
        })
    }

    pub fn load_board(&self) -> Result<BoardSpec, HarnessError> {
        match self.board_path() {
            None => Ok(builtin_board(&self.board).expect("checked builtin")),
            Some(path) => {
                let bytes = std::fs::read(&path)
                    .map_err(|e| HarnessError::Config(format!("cannot read board file {}: {e}", path.display())))?;
                load_board_spec(&bytes)
                    .map_err(|e| HarnessError::Config(format!("invalid board file {}: {e}", path.display())))
            }
        }
    }

    pub fn trial_seed(&self, trial: usize) -> u64 {
        crate::derive_seed(self.seed, trial as u64)
    }

    /// Default seed of the agent in `seat` for a trial.
    pub fn agent_seed(trial_seed: u64, seat: usize) -> u64 {
        crate::derive_seed(trial_seed, 0xA9E0_0000 + seat as u64)
    }

    /// The novelty a given trial plays with.
    pub fn novelty_for(&self, board: &BoardSpec, trial_seed: u64) -> Result<Option<NoveltySpec>, HarnessError> {
        match &self.novelty {
            None => Ok(None),
            Some(NoveltySource::Fixed(n)) => Ok(Some(n.clone())),
            Some(NoveltySource::Generate { generate }) => generate_novelty(
                board,
                generate.class,
                generate.difficulty,
                self.games_per_trial,
                crate::derive_seed(trial_seed, 0x0E17),
            )
            .map(Some)
            .map_err(|e| HarnessError::Trial(e.to_string())),
        }
    }

    /// Static checks: roster, counts, board, agent params, fixed novelty.
    pub fn validate(&self) -> Result<(), HarnessError> {
        let bad = |m: String| Err(HarnessError::Config(m));
        if self.schema_version != SCHEMA_VERSION {
            return bad(format!("unsupported schema_version {}", self.schema_version));
        }
        if !(2..=4).contains(&self.agents.len()) {
            return bad(format!("roster must have 2 to 4 agents, got {}", self.agents.len()));
        }
        if self.focal >= self.agents.len() {
            return bad(format!("focal seat {} is not in the roster", self.focal));
        }
        if self.games_per_trial == 0 || self.trials == 0 || self.max_rounds == 0 {
            return bad("games_per_trial, trials and max_rounds must be at least 1".into());
        }
        for a in &self.agents {
            build_agent(a, 0).map_err(|e| HarnessError::Config(e.to_string()))?;
        }
        let board = self.load_board()?;
        if let Some(NoveltySource::Fixed(n)) = &self.novelty {
            n.validate(self.games_per_trial)
                .and_then(|_| crate::novelty::inject_novelty(&board, n).map(|_| ()))
                .map_err(|e| HarnessError::Config(format!("novelty: {e}")))?;
        }
        Ok(())
    }

    /// Hex SHA-256 of the canonical config JSON, leaving out where and how
    /// fast the trial runs.
    pub fn digest(&self) -> String {
        let canonical = TrialConfig {
            parallel: 0,
            out: None,
            ..self.clone()
        };
        let body = serde_json::to_vec(&canonical).expect("config serializes");
        hex::encode(Sha256::digest(&body))
    }
}
