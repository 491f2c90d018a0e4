//! The agent interface and the baseline opponents.

mod random;
mod simple;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::engine::{GameEvent, Move, StateView, TradeOffer};
use crate::novelty::DeviationEvent;
use crate::value::{ValueAgent, ValueConfig};
use crate::{Money, PlayerId, SquareId};

pub use random::{random_legal_agent, RandomAgent};
pub use simple::{simple_baseline_agent, SimpleAgent, SimpleParams};

/// Where a game sits in its trial, handed to agents at game start.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct GameContext {
    pub game_index: usize,
    pub seat: PlayerId,
    pub seed: u64,
}

/// A seat at the table. Every returned move must come from the offered set;
/// anything else, or a panic, forfeits the game for that seat.
pub trait Agent: Send {
    fn name(&self) -> &str;

    fn on_game_start(&mut self, _view: &StateView<'_>, _ctx: &GameContext) {}

    fn decide(&mut self, view: &StateView<'_>, legal: &[Move]) -> Move;

    /// Auction turn: `standing` is the current high bid, if any.
    fn bid(&mut self, view: &StateView<'_>, square: SquareId, standing: Option<Money>, min_bid: Money) -> Move;

    fn respond_trade(&mut self, view: &StateView<'_>, offer: &TradeOffer) -> Move;

    fn on_event(&mut self, _event: &GameEvent) {}

    fn on_game_end(&mut self, _view: &StateView<'_>) {}

    /// Game index at which the agent announced a novelty, if it has.
    fn novelty_announcement(&self) -> Option<usize> {
        None
    }

    fn deviations(&self) -> Vec<DeviationEvent> {
        Vec::new()
    }

    /// Persistent knowledge carried between games, for replay.
    fn snapshot(&self) -> Option<serde_json::Value> {
        None
    }

    fn restore(&mut self, _snapshot: &serde_json::Value) -> Result<(), AgentError> {
        Ok(())
    }
}

#[derive(Debug, Error)]
pub enum AgentError {
    #[error("unknown agent {0:?}; expected value, random or simple")]
    UnknownAgent(String),
    #[error("bad parameters for agent {agent}: {source}")]
    Params {
        agent: String,
        #[source]
        source: serde_json::Error,
    },
}

/// Roster entry: `{"agent": "value" | "random" | "simple", "params": {...}}`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct AgentSpec {
    pub agent: String,
    #[serde(default, skip_serializing_if = "serde_json::Value::is_null")]
    pub params: serde_json::Value,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub seed: Option<u64>,
}

impl AgentSpec {
    pub fn named(agent: &str) -> Self {
        AgentSpec {
            agent: agent.into(),
            params: serde_json::Value::Null,
            seed: None,
        }
    }
}

fn params<T: serde::de::DeserializeOwned + Default>(spec: &AgentSpec) -> Result<T, AgentError> {
    if spec.params.is_null() {
        return Ok(T::default());
    }
    serde_json::from_value(spec.params.clone()).map_err(|source| AgentError::Params {
        agent: spec.agent.clone(),
        source,
    })
}

/// Instantiate a roster entry. `default_seed` is used when the entry does
/// not pin its own seed.
pub fn build_agent(spec: &AgentSpec, default_seed: u64) -> Result<Box<dyn Agent>, AgentError> {
    let seed = spec.seed.unwrap_or(default_seed);
    Ok(match spec.agent.as_str() {
        "random" => Box::new(random_legal_agent(seed)),
        "simple" => Box::new(simple_baseline_agent(params::<SimpleParams>(spec)?)),
        "value" => Box::new(ValueAgent::new(params::<ValueConfig>(spec)?)),
        other => return Err(AgentError::UnknownAgent(other.into())),
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn roster_entries_build() {
        for name in ["random", "simple", "value"] {
            let a = build_agent(&AgentSpec::named(name), 1).unwrap();
            assert_eq!(a.name(), name);
        }
        assert!(matches!(
            build_agent(&AgentSpec::named("greedy"), 1),
            Err(AgentError::UnknownAgent(_))
        ));
        let spec: AgentSpec = serde_json::from_str(r#"{"agent":"simple","params":{"reserve":300}}"#).unwrap();
        assert!(build_agent(&spec, 0).is_ok());
        let bad: AgentSpec = serde_json::from_str(r#"{"agent":"simple","params":{"reserve":"x"}}"#).unwrap();
        assert!(matches!(build_agent(&bad, 0), Err(AgentError::Params { .. })));
    }
}
