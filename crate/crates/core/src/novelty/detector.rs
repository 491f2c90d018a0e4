use std::collections::BTreeSet;

use serde::{Deserialize, Serialize};

use super::dice::{detect_dice_novelty, update_dice_beliefs, DiceBeliefs, DriftParams};
use super::tracker::{AttributeTracker, DeviationEvent, Outcome};
use crate::board::{BoardSpec, DiceSpec};
use crate::engine::{EventKind, GameEvent};

pub const DEFAULT_THRESHOLD: f64 = 0.95;

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct DetectorConfig {
    pub drift: DriftParams,
    /// Confidence needed to announce a novelty.
    pub threshold: f64,
    /// Pseudo-count of the dice prior around the known weights.
    pub dice_prior_strength: f64,
}

impl Default for DetectorConfig {
    fn default() -> Self {
        DetectorConfig {
            drift: DriftParams::default(),
            threshold: DEFAULT_THRESHOLD,
            dice_prior_strength: 200.0,
        }
    }
}

/// First deviation at or above `threshold`, as a game index.
pub fn novelty_flag(deviations: &[DeviationEvent], threshold: f64) -> Option<usize> {
    deviations
        .iter()
        .find(|d| d.confidence >= threshold)
        .map(|d| d.game_index)
}

/// Trial-long detector state: attribute table, dice posterior and every
/// deviation found so far. Created on the first game of a trial.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct NoveltyDetector {
    pub config: DetectorConfig,
    tracker: Option<AttributeTracker>,
    beliefs: Option<DiceBeliefs>,
    known_dice: Option<DiceSpec>,
    dice_reported: BTreeSet<String>,
    deviations: Vec<DeviationEvent>,
    game_index: usize,
}

impl NoveltyDetector {
    pub fn new(config: DetectorConfig) -> Self {
        NoveltyDetector {
            config,
            tracker: None,
            beliefs: None,
            known_dice: None,
            dice_reported: BTreeSet::new(),
            deviations: Vec::new(),
            game_index: 0,
        }
    }

    /// Snapshot on the first call, then compare the visible board.
    pub fn begin_game(&mut self, board: &BoardSpec, game_index: usize) -> Vec<DeviationEvent> {
        self.game_index = game_index;
        if self.tracker.is_none() {
            self.tracker = Some(AttributeTracker::new(board));
            self.beliefs = Some(DiceBeliefs::new(&board.dice, self.config.dice_prior_strength));
            self.known_dice = Some(board.dice.clone());
            return Vec::new();
        }
        let found = self
            .tracker
            .as_mut()
            .map(|t| t.observe_board(board, game_index))
            .unwrap_or_default();
        self.record(found)
    }

    pub fn observe_event(&mut self, event: &GameEvent) -> Vec<DeviationEvent> {
        match &event.kind {
            EventKind::Roll { faces, .. } => {
                let (Some(beliefs), Some(known)) = (self.beliefs.as_mut(), self.known_dice.as_ref()) else {
                    return Vec::new();
                };
                update_dice_beliefs(beliefs, faces);
                let threshold = self.config.threshold;
                let found: Vec<DeviationEvent> =
                    detect_dice_novelty(beliefs, known, &self.config.drift, self.game_index)
                        .into_iter()
                        .filter(|d| d.confidence >= threshold && self.dice_reported.insert(d.path.clone()))
                        .collect();
                self.record(found)
            }
            EventKind::Transfer { .. } => {
                let (Some((outcome, amount)), Some(tracker)) = (Outcome::from_event(event), self.tracker.as_mut())
                else {
                    return Vec::new();
                };
                let found = tracker.observe_outcome(&outcome, amount, self.game_index);
                self.record(found)
            }
            _ => Vec::new(),
        }
    }

    fn record(&mut self, found: Vec<DeviationEvent>) -> Vec<DeviationEvent> {
        self.deviations.extend(found.iter().cloned());
        found
    }

    pub fn deviations(&self) -> &[DeviationEvent] {
        &self.deviations
    }

    pub fn announcement(&self) -> Option<usize> {
        novelty_flag(&self.deviations, self.config.threshold)
    }

    pub fn beliefs(&self) -> Option<&DiceBeliefs> {
        self.beliefs.as_ref()
    }

    pub fn tracker(&self) -> Option<&AttributeTracker> {
        self.tracker.as_ref()
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::novelty::AttrValue;

    fn dev(game_index: usize, confidence: f64) -> DeviationEvent {
        DeviationEvent {
            path: "rent.1.base".into(),
            expected: AttrValue::Num(10.0),
            observed: AttrValue::Num(40.0),
            game_index,
            confidence,
        }
    }

    #[test]
    fn flag_rules() {
        assert_eq!(novelty_flag(&[dev(57, 1.0)], 0.95), Some(57));
        assert_eq!(novelty_flag(&[], 0.95), None);
        assert_eq!(novelty_flag(&[dev(12, 0.5)], 0.95), None);
        assert_eq!(
            novelty_flag(&[dev(12, 0.5), dev(20, 0.99), dev(30, 1.0)], 0.95),
            Some(20)
        );
    }
}
