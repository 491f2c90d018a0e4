//! Rules engine: state, moves, event log, rule primitives and the game loop.

mod events;
mod game;
mod moves;
mod rules;
mod state;

pub use events::{events_to_jsonl, AuctionAction, EventKind, GameEvent, Party, TransferReason};
pub use game::{play_game, run_auction, Game, GameResult, MAX_PHASE_ACTIONS};
pub use moves::{Move, MoveKind, TradeOffer};
pub use rules::{
    apply_move, can_improve, can_mortgage, can_sell_improvement, is_legal, is_tradable, legal_moves, liquidate,
    resolve_bankruptcy, resolve_landing, roll_and_advance, roll_dice, settle_debt, transfer, unmortgage_cost,
    EngineError, LandingOutcome, AUCTION_INCREMENT, AUCTION_START, JAIL_ATTEMPTS,
};
pub use state::{GameState, PlayerState, StateView, TurnPhase};
