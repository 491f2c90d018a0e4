use std::collections::BTreeSet;
use std::fs::{File, OpenOptions};
use std::io::{BufWriter, Write};
use std::path::PathBuf;

use serde::{Deserialize, Serialize};

use super::params::{adapt_dice, adapt_params, ValueParams};
use super::policy::{accept_trade, choose_bid, choose_move, propose_trade, Decision};
use crate::agents::{Agent, AgentError, GameContext};
use crate::engine::{EventKind, GameEvent, Move, MoveKind, StateView, TradeOffer, TurnPhase};
use crate::novelty::{AttributePath, DetectorConfig, DeviationEvent, NoveltyDetector};
use crate::{Money, PlayerId, SquareId};

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct ValueConfig {
    pub k_short: u32,
    pub k_loops: u32,
    /// Guard floor; the board's largest compulsory payment when unset.
    pub cash_min: Option<Money>,
    pub detector: DetectorConfig,
    /// Append one JSON line per decision to this file.
    pub trace: Option<PathBuf>,
}

impl Default for ValueConfig {
    fn default() -> Self {
        ValueConfig {
            k_short: 5,
            k_loops: 5,
            cash_min: None,
            detector: DetectorConfig::default(),
            trace: None,
        }
    }
}

#[derive(Serialize, Deserialize)]
struct Snapshot {
    params: Option<ValueParams>,
    detector: NoveltyDetector,
    dice_novel: bool,
}

#[derive(Serialize)]
struct TraceLine<'a> {
    game: usize,
    seat: PlayerId,
    round: u32,
    #[serde(flatten)]
    decision: &'a Decision,
}

/// Picks the legal move whose post-decision state scores highest, after
/// dropping moves that fail the bankruptcy guards. Its beliefs about the
/// board follow whatever the novelty detector reports.
pub struct ValueAgent {
    config: ValueConfig,
    params: Option<ValueParams>,
    detector: NoveltyDetector,
    dice_novel: bool,
    seat: PlayerId,
    game_index: usize,
    rejected: BTreeSet<(PlayerId, SquareId, SquareId)>,
    trace: Option<BufWriter<File>>,
}

impl ValueAgent {
    pub fn new(config: ValueConfig) -> Self {
        ValueAgent {
            detector: NoveltyDetector::new(config.detector.clone()),
            config,
            params: None,
            dice_novel: false,
            seat: 0,
            game_index: 0,
            rejected: BTreeSet::new(),
            trace: None,
        }
    }

    pub fn params(&self) -> Option<&ValueParams> {
        self.params.as_ref()
    }

    pub fn detector(&self) -> &NoveltyDetector {
        &self.detector
    }

    fn adapt(&mut self, found: &[DeviationEvent]) {
        if found.is_empty() {
            return;
        }
        let dice = found.iter().any(|d| {
            matches!(
                AttributePath::parse(&d.path),
                Ok(AttributePath::DiceCount | AttributePath::DieFace { .. } | AttributePath::DieBias(_))
            )
        });
        self.dice_novel |= dice;
        if let Some(p) = &self.params {
            self.params = Some(adapt_params(p, found));
        }
        if self.dice_novel {
            self.refresh_dice();
        }
    }

    fn refresh_dice(&mut self) {
        if let (Some(p), Some(b)) = (&self.params, self.detector.beliefs()) {
            if let Ok(q) = adapt_dice(p, b) {
                self.params = Some(q);
            }
        }
    }

    fn params_for(&mut self, view: &StateView<'_>) -> &ValueParams {
        let (k_short, k_loops, cash_min) = (self.config.k_short, self.config.k_loops, self.config.cash_min);
        self.params
            .get_or_insert_with(|| ValueParams::from_board(&view.board, k_short, k_loops, cash_min))
    }

    fn write_trace(&mut self, round: u32, decision: &Decision) {
        let Some(path) = &self.config.trace else { return };
        if self.trace.is_none() {
            match OpenOptions::new().create(true).append(true).open(path) {
                Ok(f) => self.trace = Some(BufWriter::new(f)),
                Err(_) => return,
            }
        }
        let line = TraceLine {
            game: self.game_index,
            seat: self.seat,
            round,
            decision,
        };
        if let (Some(w), Ok(json)) = (self.trace.as_mut(), serde_json::to_string(&line)) {
            let _ = writeln!(w, "{json}");
        }
    }
}

fn fallback(legal: &[Move]) -> Move {
    legal
        .iter()
        .find(|m| m.cost <= 0.0)
        .or(legal.first())
        .cloned()
        .unwrap_or_else(Move::end_phase)
}

impl Agent for ValueAgent {
    fn name(&self) -> &str {
        "value"
    }

    fn on_game_start(&mut self, view: &StateView<'_>, ctx: &GameContext) {
        self.seat = ctx.seat;
        self.game_index = ctx.game_index;
        self.rejected.clear();
        self.params_for(view);
        let found = self.detector.begin_game(&view.board, ctx.game_index);
        self.adapt(&found);
        if self.dice_novel {
            self.refresh_dice();
        }
    }

    fn decide(&mut self, view: &StateView<'_>, legal: &[Move]) -> Move {
        let me = view.me();
        let params = self.params_for(view).clone();
        let state = view.state();
        if let TurnPhase::OutOfTurn { trade_used: false, .. } = state.phase {
            let rejected = &self.rejected;
            let skip = |o: &TradeOffer| rejected.contains(&(o.counterparty, o.give, o.take));
            if let Some(mv) = propose_trade(state, me, legal, &params, &skip) {
                return mv;
            }
        }
        match choose_move(state, me, legal, &params) {
            Ok(decision) => {
                self.write_trace(state.round, &decision);
                decision.chosen
            }
            Err(_) => fallback(legal),
        }
    }

    fn bid(&mut self, view: &StateView<'_>, square: SquareId, _standing: Option<Money>, min_bid: Money) -> Move {
        let params = self.params_for(view).clone();
        choose_bid(view.state(), view.me(), square, min_bid, &params).unwrap_or_else(|_| Move::free(MoveKind::PassBid))
    }

    fn respond_trade(&mut self, view: &StateView<'_>, offer: &TradeOffer) -> Move {
        let params = self.params_for(view).clone();
        if accept_trade(view.state(), view.me(), offer, &params) {
            Move::new(MoveKind::AcceptTrade, offer.outlay_for(view.me()))
        } else {
            Move::free(MoveKind::RejectTrade)
        }
    }

    fn on_event(&mut self, event: &GameEvent) {
        if let EventKind::Trade { offer, accepted: false } = &event.kind {
            if offer.proposer == self.seat {
                self.rejected.insert((offer.counterparty, offer.give, offer.take));
            }
        }
        let found = self.detector.observe_event(event);
        self.adapt(&found);
    }

    fn on_game_end(&mut self, _view: &StateView<'_>) {
        if let Some(w) = self.trace.as_mut() {
            let _ = w.flush();
        }
    }

    fn novelty_announcement(&self) -> Option<usize> {
        self.detector.announcement()
    }

    fn deviations(&self) -> Vec<DeviationEvent> {
        self.detector.deviations().to_vec()
    }

    fn snapshot(&self) -> Option<serde_json::Value> {
        serde_json::to_value(Snapshot {
            params: self.params.clone(),
            detector: self.detector.clone(),
            dice_novel: self.dice_novel,
        })
        .ok()
    }

    fn restore(&mut self, snapshot: &serde_json::Value) -> Result<(), AgentError> {
        let s: Snapshot = serde_json::from_value(snapshot.clone()).map_err(|source| AgentError::Params {
            agent: "value".into(),
            source,
        })?;
        self.params = s.params;
        self.detector = s.detector;
        self.dice_novel = s.dice_novel;
        Ok(())
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::board::tb8_board;
    use crate::engine::GameState;

    #[test]
    fn config_defaults_and_overrides() {
        let c: ValueConfig = serde_json::from_str(r#"{"k_short": 3, "cash_min": 120}"#).unwrap();
        assert_eq!((c.k_short, c.k_loops, c.cash_min), (3, 5, Some(120.0)));
        assert!(serde_json::from_str::<ValueConfig>(r#"{"k": 1}"#).is_err());
    }

    #[test]
    fn snapshot_round_trips() {
        let s = GameState::new(tb8_board(), 2, 0);
        let mut a = ValueAgent::new(ValueConfig::default());
        let ctx = GameContext {
            game_index: 0,
            seat: 0,
            seed: 1,
        };
        a.on_game_start(&StateView::new(&s, 0), &ctx);
        let snap = a.snapshot().unwrap();
        let mut b = ValueAgent::new(ValueConfig::default());
        b.restore(&snap).unwrap();
        assert_eq!(b.params(), a.params());
        assert_eq!(b.snapshot().unwrap(), snap);
    }

    #[test]
    fn rejected_offers_are_not_repeated() {
        let mut s = GameState::new(tb8_board(), 2, 0);
        s.ownership[1] = Some(0);
        s.ownership[4] = Some(0);
        s.ownership[2] = Some(1);
        s.phase = TurnPhase::OutOfTurn {
            actor: 0,
            trade_used: false,
        };
        let mut a = ValueAgent::new(ValueConfig {
            cash_min: Some(0.0),
            ..ValueConfig::default()
        });
        let legal = crate::engine::legal_moves(&s, 0);
        let first = a.decide(&StateView::new(&s, 0), &legal);
        let MoveKind::ProposeTrade { offer } = first.kind else {
            panic!("{first:?}")
        };
        a.on_event(&GameEvent {
            round: 0,
            kind: EventKind::Trade { offer, accepted: false },
            player: Some(1),
        });
        let second = a.decide(&StateView::new(&s, 0), &legal);
        assert!(!matches!(second.kind, MoveKind::ProposeTrade { .. }));
    }
}
