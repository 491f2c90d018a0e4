use std::panic::{catch_unwind, AssertUnwindSafe};
use std::sync::Arc;

use super::events::{AuctionAction, EventKind, GameEvent, Party, TransferReason};
use super::moves::{Move, MoveKind, TradeOffer};
use super::rules::{self, EngineError, LandingOutcome, AUCTION_INCREMENT, AUCTION_START};
use super::state::{GameState, StateView, TurnPhase};
use crate::agents::{Agent, GameContext};
use crate::board::BoardSpec;
use crate::novelty::{inject_novelty, NoveltySpec};
use crate::{approx_eq, Money, PlayerId, SquareId};

/// Upper bound on actions one player may take in a single development phase.
pub const MAX_PHASE_ACTIONS: usize = 12;

#[derive(Clone, Debug)]
pub struct GameResult {
    pub winner: Option<PlayerId>,
    pub rounds: u32,
    pub digest: String,
    pub events: Vec<GameEvent>,
    pub final_state: GameState,
}

type Observer<'a> = Box<dyn FnMut(&GameState, &[GameEvent]) + 'a>;

/// A single game in progress. Owns the state; borrows the seated agents.
pub struct Game<'a> {
    state: GameState,
    agents: &'a mut [Box<dyn Agent>],
    events: Vec<GameEvent>,
    delivered: usize,
    checked: usize,
    max_rounds: u32,
    game_index: usize,
    seed: u64,
    observer: Option<Observer<'a>>,
}

/// Play one game to completion. A novelty, if given, is applied to the
/// board before the first turn.
pub fn play_game(
    agents: &mut [Box<dyn Agent>],
    board: &BoardSpec,
    novelty: Option<&NoveltySpec>,
    seed: u64,
    max_rounds: u32,
) -> Result<GameResult, EngineError> {
    Game::new(agents, board, novelty, seed, max_rounds)?.run()
}

/// Auction `square` among the solvent players, querying in seat order from
/// `first_bidder`.
pub fn run_auction(
    state: &mut GameState,
    agents: &mut [Box<dyn Agent>],
    square: SquareId,
    first_bidder: PlayerId,
) -> Vec<GameEvent> {
    let mut game = Game::from_state(state.clone(), agents, u32::MAX);
    game.auction(square, first_bidder);
    *state = game.state;
    game.events
}

impl<'a> Game<'a> {
    pub fn new(
        agents: &'a mut [Box<dyn Agent>],
        board: &BoardSpec,
        novelty: Option<&NoveltySpec>,
        seed: u64,
        max_rounds: u32,
    ) -> Result<Self, EngineError> {
        let board = match novelty {
            Some(n) => inject_novelty(board, n)?,
            None => board.clone(),
        };
        let state = GameState::new(Arc::new(board), agents.len(), seed);
        let mut game = Game::from_state(state, agents, max_rounds);
        game.seed = seed;
        if let Some(n) = novelty {
            rules::emit(
                &game.state,
                &mut game.events,
                None,
                EventKind::NoveltyInjected { novelty: n.clone() },
            );
        }
        Ok(game)
    }

    /// Resume from an arbitrary state, e.g. a hand-built test position.
    pub fn from_state(state: GameState, agents: &'a mut [Box<dyn Agent>], max_rounds: u32) -> Self {
        Game {
            state,
            agents,
            events: Vec::new(),
            delivered: 0,
            checked: 0,
            max_rounds,
            game_index: 0,
            seed: 0,
            observer: None,
        }
    }

    pub fn game_index(mut self, index: usize) -> Self {
        self.game_index = index;
        self
    }

    /// Called after every engine step with the state and the events the step
    /// produced.
    pub fn observe(mut self, f: impl FnMut(&GameState, &[GameEvent]) + 'a) -> Self {
        self.observer = Some(Box::new(f));
        self
    }

    pub fn state(&self) -> &GameState {
        &self.state
    }

    pub fn run(mut self) -> Result<GameResult, EngineError> {
        let n = self.agents.len();
        if !(2..=4).contains(&n) {
            return Err(EngineError::Setup(format!("need 2 to 4 agents, got {n}")));
        }
        if self.max_rounds == 0 {
            return Err(EngineError::Setup("max_rounds must be at least 1".into()));
        }
        for seat in 0..n {
            let ctx = GameContext {
                game_index: self.game_index,
                seat,
                seed: self.seed,
            };
            let view = StateView::new(&self.state, seat);
            let agent = &mut self.agents[seat];
            if catch_unwind(AssertUnwindSafe(|| agent.on_game_start(&view, &ctx))).is_err() {
                self.forfeit(seat, "agent panicked at game start");
            }
        }
        self.checkpoint();
        while !self.finished() {
            let p = self.state.current;
            if self.state.is_solvent(p) {
                self.take_turn(p);
            }
            if self.finished() {
                break;
            }
            self.state.current = (p + 1) % n;
            if self.state.current == 0 {
                self.state.round += 1;
            }
        }
        Ok(self.finish())
    }

    fn finished(&self) -> bool {
        self.state.solvent_count() <= 1 || self.state.round >= self.max_rounds
    }

    fn finish(mut self) -> GameResult {
        let capped = self.state.solvent_count() > 1;
        let winner = if capped {
            self.richest()
        } else {
            self.state.solvent_players().next()
        };
        let rounds = if capped { self.max_rounds } else { self.state.round + 1 };
        self.state.phase = TurnPhase::GameOver;
        let cash = self.state.players.iter().map(|p| p.cash).collect();
        rules::emit(
            &self.state,
            &mut self.events,
            None,
            EventKind::GameEnd { winner, rounds, cash },
        );
        self.checkpoint();
        self.flush();
        for seat in 0..self.agents.len() {
            let view = StateView::new(&self.state, seat);
            let agent = &mut self.agents[seat];
            let _ = catch_unwind(AssertUnwindSafe(|| agent.on_game_end(&view)));
        }
        GameResult {
            winner,
            rounds,
            digest: self.state.digest(),
            events: self.events,
            final_state: self.state,
        }
    }

    /// Highest net worth among solvent players; a tie means no winner.
    fn richest(&self) -> Option<PlayerId> {
        let worths: Vec<(PlayerId, Money)> = self
            .state
            .solvent_players()
            .map(|p| (p, self.state.net_worth(p)))
            .collect();
        let best = worths.iter().map(|w| w.1).fold(f64::NEG_INFINITY, f64::max);
        let mut top = worths.iter().filter(|w| approx_eq(w.1, best, 1e-9));
        match (top.next(), top.next()) {
            (Some(&(p, _)), None) => Some(p),
            _ => None,
        }
    }

    fn push(&mut self, events: Vec<GameEvent>) {
        self.events.extend(events);
        self.checkpoint();
    }

    fn checkpoint(&mut self) {
        if let Some(obs) = self.observer.as_mut() {
            obs(&self.state, &self.events[self.checked..]);
        }
        self.checked = self.events.len();
    }

    /// Deliver pending observable events to every agent.
    fn flush(&mut self) {
        let pending = self.delivered..self.events.len();
        self.delivered = self.events.len();
        for i in pending {
            if !self.events[i].is_observable() {
                continue;
            }
            for seat in 0..self.agents.len() {
                let event = &self.events[i];
                let agent = &mut self.agents[seat];
                if catch_unwind(AssertUnwindSafe(|| agent.on_event(event))).is_err() {
                    self.forfeit(seat, "agent panicked while observing");
                }
            }
        }
    }

    fn forfeit(&mut self, p: PlayerId, reason: &str) {
        if !self.state.is_solvent(p) {
            return;
        }
        let mut out = Vec::new();
        rules::emit(
            &self.state,
            &mut out,
            Some(p),
            EventKind::Forfeit { reason: reason.into() },
        );
        out.extend(rules::resolve_bankruptcy(&mut self.state, p, Party::Bank));
        self.push(out);
    }

    /// Invoke an agent callback, converting a panic into a forfeit.
    fn call<F>(&mut self, p: PlayerId, f: F) -> Option<Move>
    where
        F: FnOnce(&mut dyn Agent, &StateView<'_>) -> Move,
    {
        self.flush();
        if !self.state.is_solvent(p) {
            return None;
        }
        let view = StateView::new(&self.state, p);
        let agent = &mut *self.agents[p];
        match catch_unwind(AssertUnwindSafe(|| f(agent, &view))) {
            Ok(mv) => Some(mv),
            Err(_) => {
                self.forfeit(p, "agent panicked");
                None
            }
        }
    }

    /// Ask `p` to choose from `legal`; anything outside it forfeits.
    fn ask(&mut self, p: PlayerId, legal: &[Move]) -> Option<Move> {
        let mv = self.call(p, |a, v| a.decide(v, legal))?;
        self.check_legal(p, legal, mv)
    }

    fn check_legal(&mut self, p: PlayerId, legal: &[Move], mv: Move) -> Option<Move> {
        if legal.iter().any(|m| m.admits(&mv)) {
            Some(mv)
        } else {
            self.forfeit(p, &format!("illegal move {:?}", mv.kind));
            None
        }
    }

    fn apply(&mut self, p: PlayerId, mv: &Move) {
        match rules::apply_move(&mut self.state, p, mv) {
            Ok(events) => self.push(events),
            Err(e) => self.forfeit(p, &e.to_string()),
        }
    }

    fn take_turn(&mut self, p: PlayerId) {
        self.out_of_turn_round(p);
        if self.finished() || !self.state.is_solvent(p) {
            return;
        }
        let mut rolled = false;
        if self.state.players[p].in_jail {
            self.state.phase = TurnPhase::Jail;
            let legal = rules::legal_moves(&self.state, p);
            if let Some(mv) = self.ask(p, &legal) {
                rolled = mv.kind == MoveKind::UseRollForJail;
                self.apply(p, &mv);
            }
            self.drain_auctions(p);
            if !self.state.is_solvent(p) || self.state.players[p].in_jail {
                self.state.phase = TurnPhase::Idle;
                return;
            }
        }
        if !rolled {
            let events = rules::roll_and_advance(&mut self.state, p);
            self.push(events);
        }
        let (events, outcome) = rules::resolve_landing(&mut self.state, p);
        self.push(events);
        if let LandingOutcome::BuyDecision(square) = outcome {
            self.state.phase = TurnPhase::BuyDecision { square };
            let legal = rules::legal_moves(&self.state, p);
            if let Some(mv) = self.ask(p, &legal) {
                self.apply(p, &mv);
            }
            if self.state.ownership[square].is_none() {
                self.auction(square, p + 1);
            }
        }
        self.drain_auctions(p);
        if self.state.is_solvent(p) && !self.finished() {
            self.development_phase(p, false);
            self.drain_auctions(p);
        }
        self.state.phase = TurnPhase::Idle;
    }

    fn out_of_turn_round(&mut self, first: PlayerId) {
        let n = self.agents.len();
        for offset in 0..n {
            if self.finished() {
                return;
            }
            let actor = (first + offset) % n;
            if self.state.is_solvent(actor) {
                self.development_phase(actor, true);
                self.drain_auctions(first);
            }
        }
    }

    /// Repeated improve / mortgage / trade decisions until the actor ends
    /// the phase or hits the action cap.
    fn development_phase(&mut self, actor: PlayerId, out_of_turn: bool) {
        let mut trade_used = false;
        for _ in 0..MAX_PHASE_ACTIONS {
            if !self.state.is_solvent(actor) || self.state.solvent_count() <= 1 {
                break;
            }
            self.state.phase = if out_of_turn {
                TurnPhase::OutOfTurn { actor, trade_used }
            } else {
                TurnPhase::PostRoll
            };
            let legal = rules::legal_moves(&self.state, actor);
            if legal.len() <= 1 {
                break;
            }
            let Some(mv) = self.ask(actor, &legal) else { break };
            match &mv.kind {
                MoveKind::EndPhase => break,
                MoveKind::ProposeTrade { offer } => {
                    trade_used = true;
                    self.negotiate(offer.clone());
                }
                _ => self.apply(actor, &mv),
            }
        }
        self.state.phase = TurnPhase::Idle;
    }

    fn negotiate(&mut self, offer: TradeOffer) {
        let saved = self.state.phase.clone();
        let counterparty = offer.counterparty;
        self.state.phase = TurnPhase::TradeResponse { offer: offer.clone() };
        let legal = rules::legal_moves(&self.state, counterparty);
        if !legal.is_empty() {
            let response = self
                .call(counterparty, |a, v| a.respond_trade(v, &offer))
                .and_then(|mv| self.check_legal(counterparty, &legal, mv));
            if let Some(mv) = response {
                self.apply(counterparty, &mv);
            }
        }
        self.state.phase = saved;
    }

    fn drain_auctions(&mut self, first: PlayerId) {
        while let Some(square) = self.state.pending_auctions.pop_front() {
            if self.state.ownership[square].is_none() && self.state.solvent_count() >= 2 {
                self.auction(square, first);
            }
        }
    }

    fn auction_step(
        &mut self,
        square: SquareId,
        bidder: Option<PlayerId>,
        action: AuctionAction,
        amount: Option<Money>,
    ) {
        let mut out = Vec::new();
        rules::emit(
            &self.state,
            &mut out,
            bidder,
            EventKind::AuctionStep { square, action, amount },
        );
        self.push(out);
    }

    /// English ascending auction. Passing, or bidding below the minimum or
    /// above one's cash, drops a bidder out for good.
    fn auction(&mut self, square: SquareId, first_bidder: PlayerId) {
        let n = self.agents.len();
        let mut active: Vec<PlayerId> = (0..n)
            .map(|i| (first_bidder + i) % n)
            .filter(|&p| self.state.is_solvent(p))
            .collect();
        self.auction_step(square, None, AuctionAction::Open, None);
        let saved = self.state.phase.clone();
        let mut standing: Option<(PlayerId, Money)> = None;
        let mut i = 0;
        while !active.is_empty() {
            let holder = standing.map(|s| s.0);
            if active.len() == 1 && holder == Some(active[0]) {
                break;
            }
            if i >= active.len() {
                i = 0;
            }
            let bidder = active[i];
            if holder == Some(bidder) {
                i += 1;
                continue;
            }
            if !self.state.is_solvent(bidder) {
                active.remove(i);
                continue;
            }
            let min_bid = standing.map_or(AUCTION_START, |s| s.1 + AUCTION_INCREMENT);
            self.state.phase = TurnPhase::Auction {
                square,
                bidder,
                min_bid,
            };
            let current = standing.map(|s| s.1);
            let Some(mv) = self.call(bidder, |a, v| a.bid(v, square, current, min_bid)) else {
                active.remove(i);
                continue;
            };
            match mv.kind {
                MoveKind::Bid { amount }
                    if amount.is_finite() && amount >= min_bid && amount <= self.state.players[bidder].cash =>
                {
                    standing = Some((bidder, amount));
                    self.auction_step(square, Some(bidder), AuctionAction::Bid, Some(amount));
                    i += 1;
                }
                MoveKind::Bid { .. } | MoveKind::PassBid => {
                    self.auction_step(square, Some(bidder), AuctionAction::Pass, None);
                    active.remove(i);
                }
                other => {
                    active.remove(i);
                    self.forfeit(bidder, &format!("illegal move {other:?}"));
                }
            }
        }
        self.state.phase = saved;
        match standing {
            Some((winner, price)) if self.state.is_solvent(winner) => {
                let mut out = Vec::new();
                rules::transfer(
                    &mut self.state,
                    &mut out,
                    Party::Player(winner),
                    Party::Bank,
                    price,
                    TransferReason::Auction { square },
                );
                self.state.ownership[square] = Some(winner);
                self.push(out);
                self.auction_step(square, Some(winner), AuctionAction::Won, Some(price));
            }
            _ => self.auction_step(square, None, AuctionAction::Unsold, None),
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::agents::random_legal_agent;
    use crate::board::{tb8_board, DiceSpec, Die};

    /// Bids the minimum while it stays within a private cap.
    struct CapBidder(Money);

    impl Agent for CapBidder {
        fn name(&self) -> &str {
            "cap"
        }
        fn decide(&mut self, _: &StateView<'_>, legal: &[Move]) -> Move {
            legal.last().cloned().unwrap_or_else(Move::end_phase)
        }
        fn bid(&mut self, _: &StateView<'_>, _: SquareId, _: Option<Money>, min_bid: Money) -> Move {
            if min_bid <= self.0 {
                Move::new(MoveKind::Bid { amount: min_bid }, min_bid)
            } else {
                Move::free(MoveKind::PassBid)
            }
        }
        fn respond_trade(&mut self, _: &StateView<'_>, _: &TradeOffer) -> Move {
            Move::free(MoveKind::RejectTrade)
        }
    }

    fn caps(caps: &[Money]) -> Vec<Box<dyn Agent>> {
        caps.iter().map(|&c| Box::new(CapBidder(c)) as Box<dyn Agent>).collect()
    }

    #[test]
    fn higher_cap_wins_one_step_above_the_other() {
        let mut s = GameState::new(tb8_board(), 2, 0);
        let mut agents = caps(&[50.0, 100.0]);
        run_auction(&mut s, &mut agents, 4, 0);
        assert_eq!(s.ownership[4], Some(1));
        assert_eq!(s.players[1].cash, 440.0);
        assert_eq!(s.players[0].cash, 500.0);
    }

    #[test]
    fn everyone_passes() {
        let mut s = GameState::new(tb8_board(), 3, 0);
        let mut agents = caps(&[0.0, 5.0, 0.0]);
        let events = run_auction(&mut s, &mut agents, 4, 1);
        assert_eq!(s.ownership[4], None);
        assert!(s.players.iter().all(|p| p.cash == 500.0));
        assert!(events.iter().any(|e| matches!(
            e.kind,
            EventKind::AuctionStep {
                action: AuctionAction::Unsold,
                ..
            }
        )));
    }

    #[test]
    fn lone_bidder_pays_the_opening_price() {
        let mut s = GameState::new(tb8_board(), 3, 0);
        let mut agents = caps(&[0.0, 30.0, 0.0]);
        run_auction(&mut s, &mut agents, 4, 0);
        assert_eq!(s.ownership[4], Some(1));
        assert_eq!(s.players[1].cash, 490.0);
    }

    #[test]
    fn broke_player_loses_to_tax() {
        let mut b = tb8_board();
        b.dice = DiceSpec {
            dice: vec![Die::uniform(vec![3])],
        };
        let mut s = GameState::new(b, 2, 0);
        s.players[0].cash = 0.0;
        let mut agents: Vec<Box<dyn Agent>> = vec![Box::new(random_legal_agent(1)), Box::new(random_legal_agent(2))];
        let r = Game::from_state(s, &mut agents, 10).run().unwrap();
        assert_eq!(r.winner, Some(1));
        assert!(r.final_state.players[0].bankrupt);
        assert_eq!(r.rounds, 1);
    }

    fn random_game(seed: u64) -> GameResult {
        let mut agents: Vec<Box<dyn Agent>> = (0..4)
            .map(|i| Box::new(random_legal_agent(i)) as Box<dyn Agent>)
            .collect();
        play_game(&mut agents, &tb8_board(), None, seed, 200).unwrap()
    }

    #[test]
    fn same_seed_same_log() {
        let a = random_game(1);
        assert!(a.rounds <= 200);
        assert_eq!(events_jsonl(&a), events_jsonl(&random_game(1)));
        assert_ne!(events_jsonl(&a), events_jsonl(&random_game(2)));
    }

    fn events_jsonl(r: &GameResult) -> String {
        crate::engine::events_to_jsonl(&r.events)
    }

    #[test]
    fn roster_size_is_checked() {
        let mut agents = caps(&[0.0]);
        assert!(matches!(
            play_game(&mut agents, &tb8_board(), None, 0, 10),
            Err(EngineError::Setup(_))
        ));
    }

    struct Panicker;

    impl Agent for Panicker {
        fn name(&self) -> &str {
            "panicker"
        }
        fn decide(&mut self, _: &StateView<'_>, _: &[Move]) -> Move {
            panic!("boom")
        }
        fn bid(&mut self, _: &StateView<'_>, _: SquareId, _: Option<Money>, _: Money) -> Move {
            panic!("boom")
        }
        fn respond_trade(&mut self, _: &StateView<'_>, _: &TradeOffer) -> Move {
            panic!("boom")
        }
    }

    #[test]
    fn panicking_agent_forfeits() {
        let hook = std::panic::take_hook();
        std::panic::set_hook(Box::new(|_| {}));
        let mut agents: Vec<Box<dyn Agent>> = vec![Box::new(Panicker), Box::new(random_legal_agent(3))];
        let r = play_game(&mut agents, &tb8_board(), None, 5, 50);
        std::panic::set_hook(hook);
        let r = r.unwrap();
        assert_eq!(r.winner, Some(1));
        assert!(r.events.iter().any(|e| matches!(e.kind, EventKind::Forfeit { .. })));
    }
}
