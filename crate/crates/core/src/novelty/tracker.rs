use std::collections::{BTreeMap, BTreeSet};

use serde::{Deserialize, Serialize};

use super::path::{tracked_attributes, AttrValue, AttributePath};
use crate::board::{BoardSpec, Deck};
use crate::engine::{EventKind, GameEvent, StateView, TransferReason};
use crate::{Money, SquareId};

/// A tracked attribute found to differ from its expected value.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct DeviationEvent {
    pub path: String,
    pub expected: AttrValue,
    pub observed: AttrValue,
    pub game_index: usize,
    pub confidence: f64,
}

/// Actions whose cash effect is fixed by a board attribute.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "type", rename_all = "snake_case")]
pub enum Outcome {
    Mortgage { square: SquareId },
    Unmortgage { square: SquareId },
    ImprovementSale { square: SquareId },
    GoBonus { laps: u32 },
    Card { deck: Deck, index: usize },
    JailFine,
}

impl Outcome {
    /// The outcome and cash amount carried by a transfer event, if any.
    pub fn from_event(event: &GameEvent) -> Option<(Outcome, Money)> {
        let EventKind::Transfer { amount, reason, .. } = &event.kind else {
            return None;
        };
        let outcome = match *reason {
            TransferReason::Mortgage { square } => Outcome::Mortgage { square },
            TransferReason::Unmortgage { square } => Outcome::Unmortgage { square },
            TransferReason::ImprovementSale { square } => Outcome::ImprovementSale { square },
            TransferReason::GoBonus { laps } => Outcome::GoBonus { laps },
            TransferReason::Card { deck, index } => Outcome::Card { deck, index },
            TransferReason::JailFine => Outcome::JailFine,
            _ => return None,
        };
        Some((outcome, *amount))
    }
}

/// Expected values of every watched attribute plus the set of paths
/// already reported this trial.
#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
pub struct AttributeTracker {
    expected: BTreeMap<String, AttrValue>,
    reported: BTreeSet<String>,
}

impl AttributeTracker {
    pub fn new(board: &BoardSpec) -> Self {
        AttributeTracker {
            expected: tracked_attributes(board)
                .into_iter()
                .map(|(p, v)| (p.to_string(), v))
                .collect(),
            reported: BTreeSet::new(),
        }
    }

    pub fn expected(&self, path: &str) -> Option<&AttrValue> {
        self.expected.get(path)
    }

    pub fn is_reported(&self, path: &str) -> bool {
        self.reported.contains(path)
    }

    fn report(
        &mut self,
        path: String,
        expected: AttrValue,
        observed: AttrValue,
        game_index: usize,
        out: &mut Vec<DeviationEvent>,
    ) {
        self.expected.insert(path.clone(), observed.clone());
        if self.reported.insert(path.clone()) {
            out.push(DeviationEvent {
                path,
                expected,
                observed,
                game_index,
                confidence: 1.0,
            });
        }
    }

    /// Compare every attribute visible on `board` with the expected table.
    pub fn observe_board(&mut self, board: &BoardSpec, game_index: usize) -> Vec<DeviationEvent> {
        let current: BTreeMap<String, AttrValue> = tracked_attributes(board)
            .into_iter()
            .filter(|(p, _)| p.is_state_visible())
            .map(|(p, v)| (p.to_string(), v))
            .collect();
        let mut out = Vec::new();
        for (path, observed) in &current {
            match self.expected.get(path) {
                Some(e) if e.matches(observed) => {}
                e => {
                    let expected = e.cloned().unwrap_or_else(AttrValue::absent);
                    self.report(path.clone(), expected, observed.clone(), game_index, &mut out);
                }
            }
        }
        let vanished: Vec<(String, AttrValue)> = self
            .expected
            .iter()
            .filter(|(p, v)| {
                !current.contains_key(*p)
                    && **v != AttrValue::absent()
                    && AttributePath::parse(p).is_ok_and(|p| p.is_state_visible())
            })
            .map(|(p, v)| (p.clone(), v.clone()))
            .collect();
        for (path, expected) in vanished {
            self.report(path, expected, AttrValue::absent(), game_index, &mut out);
        }
        out
    }

    /// Compare the cash effect of an attribute-determined action with what
    /// the expected table predicts.
    pub fn observe_outcome(&mut self, outcome: &Outcome, observed: Money, game_index: usize) -> Vec<DeviationEvent> {
        let (path, value) = match *outcome {
            Outcome::Mortgage { square } => (AttributePath::MortgageValue(square), observed),
            Outcome::Unmortgage { square } => {
                let principal = self
                    .expected(&AttributePath::MortgageValue(square).to_string())
                    .and_then(AttrValue::as_num)
                    .unwrap_or(0.0);
                if principal <= 0.0 {
                    return Vec::new();
                }
                (AttributePath::MortgageRate, observed / principal - 1.0)
            }
            Outcome::ImprovementSale { square } => (AttributePath::HouseCost(square), observed * 2.0),
            Outcome::GoBonus { laps } if laps > 0 => (AttributePath::GoIncrement, observed / laps as f64),
            Outcome::GoBonus { .. } => return Vec::new(),
            Outcome::Card { deck, index } => (AttributePath::CardAmount { deck, index }, observed),
            Outcome::JailFine => (AttributePath::JailFine, observed),
        };
        let path = path.to_string();
        let mut out = Vec::new();
        if let Some(expected) = self.expected.get(&path).cloned() {
            let observed = AttrValue::Num(value);
            if !expected.matches(&observed) {
                self.report(path, expected, observed, game_index, &mut out);
            }
        }
        out
    }
}

pub fn observe_state(tracker: &mut AttributeTracker, view: &StateView<'_>, game_index: usize) -> Vec<DeviationEvent> {
    tracker.observe_board(&view.board, game_index)
}

pub fn observe_outcome(
    tracker: &mut AttributeTracker,
    outcome: &Outcome,
    observed: Money,
    game_index: usize,
) -> Vec<DeviationEvent> {
    tracker.observe_outcome(outcome, observed, game_index)
}
