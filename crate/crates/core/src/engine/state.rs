use std::collections::VecDeque;
use std::sync::Arc;

use rand::seq::SliceRandom;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::Serialize;
use sha2::{Digest, Sha256};

use super::moves::TradeOffer;
use crate::board::{BoardSpec, Deck};
use crate::{Money, PlayerId, SquareId};

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct PlayerState {
    pub id: PlayerId,
    pub position: SquareId,
    pub cash: Money,
    pub in_jail: bool,
    pub jail_turns: u32,
    pub bankrupt: bool,
}

/// Which decision, if any, the engine is waiting on.
#[derive(Clone, Debug, PartialEq)]
pub enum TurnPhase {
    Idle,
    /// Pre-roll window in which `actor` may develop, mortgage or trade.
    OutOfTurn {
        actor: PlayerId,
        trade_used: bool,
    },
    Jail,
    BuyDecision {
        square: SquareId,
    },
    /// Development window for the player who just moved; no trades.
    PostRoll,
    Auction {
        square: SquareId,
        bidder: PlayerId,
        min_bid: Money,
    },
    TradeResponse {
        offer: TradeOffer,
    },
    GameOver,
}

/// Complete mutable game situation.
#[derive(Clone, Debug)]
pub struct GameState {
    pub board: Arc<BoardSpec>,
    pub players: Vec<PlayerState>,
    /// `None` means the bank holds the square.
    pub ownership: Vec<Option<PlayerId>>,
    /// Improvement level per square; the hotel is the top level.
    pub improvements: Vec<u32>,
    pub mortgaged: Vec<bool>,
    pub round: u32,
    pub current: PlayerId,
    pub phase: TurnPhase,
    pub chance_order: Vec<usize>,
    pub chance_cursor: usize,
    pub community_order: Vec<usize>,
    pub community_cursor: usize,
    pub houses_available: u32,
    pub hotels_available: u32,
    pub pending_auctions: VecDeque<SquareId>,
    rng: ChaCha8Rng,
}

impl GameState {
    /// Fresh game: everyone on Go with the board's starting cash, decks
    /// shuffled from `seed`.
    pub fn new(board: impl Into<Arc<BoardSpec>>, n_players: usize, seed: u64) -> Self {
        let board: Arc<BoardSpec> = board.into();
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let mut chance_order: Vec<usize> = (0..board.chance_deck.len()).collect();
        let mut community_order: Vec<usize> = (0..board.community_deck.len()).collect();
        chance_order.shuffle(&mut rng);
        community_order.shuffle(&mut rng);
        let n = board.len();
        let players = (0..n_players)
            .map(|id| PlayerState {
                id,
                position: 0,
                cash: board.starting_cash,
                in_jail: false,
                jail_turns: 0,
                bankrupt: false,
            })
            .collect();
        GameState {
            players,
            ownership: vec![None; n],
            improvements: vec![0; n],
            mortgaged: vec![false; n],
            round: 0,
            current: 0,
            phase: TurnPhase::Idle,
            chance_order,
            chance_cursor: 0,
            community_order,
            community_cursor: 0,
            houses_available: board.bank_houses,
            hotels_available: board.bank_hotels,
            pending_auctions: VecDeque::new(),
            rng,
            board,
        }
    }

    pub(crate) fn rng(&mut self) -> &mut ChaCha8Rng {
        &mut self.rng
    }

    pub fn n_players(&self) -> usize {
        self.players.len()
    }

    pub fn owner(&self, sq: SquareId) -> Option<PlayerId> {
        self.ownership[sq]
    }

    pub fn is_solvent(&self, p: PlayerId) -> bool {
        !self.players[p].bankrupt
    }

    pub fn solvent_players(&self) -> impl Iterator<Item = PlayerId> + '_ {
        self.players.iter().filter(|p| !p.bankrupt).map(|p| p.id)
    }

    pub fn solvent_count(&self) -> usize {
        self.players.iter().filter(|p| !p.bankrupt).count()
    }

    pub fn owned_by(&self, p: PlayerId) -> impl Iterator<Item = SquareId> + '_ {
        self.ownership
            .iter()
            .enumerate()
            .filter(move |(_, o)| **o == Some(p))
            .map(|(i, _)| i)
    }

    pub fn color_of(&self, sq: SquareId) -> Option<&str> {
        self.board.property(sq).map(|p| p.color.as_str())
    }

    /// Squares of `color` held by `p`.
    pub fn owned_in_color<'s>(&'s self, p: PlayerId, color: &'s str) -> impl Iterator<Item = SquareId> + 's {
        self.board
            .color_squares(color)
            .iter()
            .copied()
            .filter(move |&s| self.ownership[s] == Some(p))
    }

    pub fn has_monopoly(&self, p: PlayerId, color: &str) -> bool {
        let required = self.board.monopoly_required(color);
        required > 0 && self.owned_in_color(p, color).count() >= required
    }

    /// `p` holds a monopoly on the colour of `sq`.
    pub fn monopoly_at(&self, p: PlayerId, sq: SquareId) -> bool {
        let required = self.board.required_for(sq);
        required > 0
            && self
                .board
                .peers(sq)
                .iter()
                .filter(|&&s| self.ownership[s] == Some(p))
                .count()
                >= required
    }

    /// Owner holds a monopoly on the square's colour.
    pub fn square_monopolized(&self, sq: SquareId) -> bool {
        self.ownership[sq].is_some_and(|p| self.monopoly_at(p, sq))
    }

    /// Rent a visitor owes on `sq` under the board's actual schedule.
    pub fn rent_due(&self, sq: SquareId) -> Money {
        match (self.board.property(sq), self.ownership[sq]) {
            (Some(p), Some(_)) if !self.mortgaged[sq] => p.rent_at(self.improvements[sq], self.square_monopolized(sq)),
            _ => 0.0,
        }
    }

    /// Any square of the colour carries improvements.
    pub fn color_improved(&self, color: &str) -> bool {
        self.board
            .color_squares(color)
            .iter()
            .any(|&s| self.improvements[s] > 0)
    }

    /// Cash plus list price of unmortgaged holdings plus improvements at cost.
    pub fn net_worth(&self, p: PlayerId) -> Money {
        let holdings: Money = self
            .owned_by(p)
            .filter_map(|s| {
                let prop = self.board.property(s)?;
                let price = if self.mortgaged[s] { 0.0 } else { prop.price };
                Some(price + self.improvements[s] as Money * prop.house_cost)
            })
            .sum();
        self.players[p].cash + holdings
    }

    /// Houses and hotels currently standing on `p`'s squares.
    pub fn building_counts(&self, p: PlayerId) -> (u32, u32) {
        let mut houses = 0;
        let mut hotels = 0;
        for s in self.owned_by(p) {
            let level = self.improvements[s];
            match self.board.property(s) {
                Some(prop) if prop.has_hotel_level(level) => hotels += 1,
                Some(_) => houses += level,
                None => {}
            }
        }
        (houses, hotels)
    }

    pub(crate) fn next_card(&mut self, deck: Deck) -> Option<usize> {
        let (order, cursor) = match deck {
            Deck::Chance => (&self.chance_order, &mut self.chance_cursor),
            Deck::Community => (&self.community_order, &mut self.community_cursor),
        };
        if order.is_empty() {
            return None;
        }
        let card = order[*cursor % order.len()];
        *cursor = (*cursor + 1) % order.len();
        Some(card)
    }

    /// Replace the board, keeping holdings. Used by the value agent to swap
    /// in its beliefs and by tests to rescale money.
    pub fn with_board(&self, board: impl Into<Arc<BoardSpec>>) -> GameState {
        let mut s = self.clone();
        s.board = board.into();
        s
    }

    /// Multiply all cash and every monetary board quantity by `factor`.
    pub fn scaled(&self, factor: f64) -> GameState {
        let mut s = self.with_board(self.board.scaled(factor));
        for p in &mut s.players {
            p.cash *= factor;
        }
        s.phase = match &self.phase {
            TurnPhase::Auction {
                square,
                bidder,
                min_bid,
            } => TurnPhase::Auction {
                square: *square,
                bidder: *bidder,
                min_bid: min_bid * factor,
            },
            TurnPhase::TradeResponse { offer } => TurnPhase::TradeResponse {
                offer: TradeOffer {
                    cash: offer.cash * factor,
                    ..offer.clone()
                },
            },
            other => other.clone(),
        };
        s
    }

    /// Hex SHA-256 over players, holdings and round.
    pub fn digest(&self) -> String {
        #[derive(Serialize)]
        struct Digest<'a> {
            players: &'a [PlayerState],
            ownership: &'a [Option<PlayerId>],
            improvements: &'a [u32],
            mortgaged: &'a [bool],
            round: u32,
        }
        let body = serde_json::to_vec(&Digest {
            players: &self.players,
            ownership: &self.ownership,
            improvements: &self.improvements,
            mortgaged: &self.mortgaged,
            round: self.round,
        })
        .expect("digest serializes");
        hex::encode(Sha256::digest(&body))
    }
}

/// Read-only projection of the game handed to one player. Monopoly is an
/// open-information game, so the view exposes the whole state.
#[derive(Clone, Copy)]
pub struct StateView<'a> {
    state: &'a GameState,
    me: PlayerId,
}

impl<'a> StateView<'a> {
    pub fn new(state: &'a GameState, me: PlayerId) -> Self {
        StateView { state, me }
    }

    pub fn me(&self) -> PlayerId {
        self.me
    }

    pub fn state(&self) -> &'a GameState {
        self.state
    }
}

impl std::ops::Deref for StateView<'_> {
    type Target = GameState;

    fn deref(&self) -> &GameState {
        self.state
    }
}
