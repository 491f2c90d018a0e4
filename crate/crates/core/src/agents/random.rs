use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use super::{Agent, GameContext};
use crate::derive_seed;
use crate::engine::{Move, MoveKind, StateView, TradeOffer};
use crate::{Money, SquareId};

/// Picks uniformly among whatever it is offered.
pub struct RandomAgent {
    seed: u64,
    rng: ChaCha8Rng,
}

pub fn random_legal_agent(seed: u64) -> RandomAgent {
    RandomAgent {
        seed,
        rng: ChaCha8Rng::seed_from_u64(seed),
    }
}

impl Agent for RandomAgent {
    fn name(&self) -> &str {
        "random"
    }

    fn on_game_start(&mut self, _view: &StateView<'_>, ctx: &GameContext) {
        self.rng = ChaCha8Rng::seed_from_u64(derive_seed(self.seed, ctx.seed));
    }

    fn decide(&mut self, _view: &StateView<'_>, legal: &[Move]) -> Move {
        legal.choose(&mut self.rng).cloned().unwrap_or_else(Move::end_phase)
    }

    fn bid(&mut self, _view: &StateView<'_>, _square: SquareId, _standing: Option<Money>, min_bid: Money) -> Move {
        if self.rng.gen_bool(0.5) {
            Move::new(MoveKind::Bid { amount: min_bid }, min_bid)
        } else {
            Move::free(MoveKind::PassBid)
        }
    }

    fn respond_trade(&mut self, view: &StateView<'_>, offer: &TradeOffer) -> Move {
        if self.rng.gen_bool(0.5) {
            Move::new(MoveKind::AcceptTrade, offer.outlay_for(view.me()))
        } else {
            Move::free(MoveKind::RejectTrade)
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::board::tb8_board;
    use crate::engine::GameState;

    fn buy_or_decline() -> Vec<Move> {
        vec![
            Move::new(MoveKind::BuyProperty { square: 1 }, 100.0),
            Move::free(MoveKind::DeclineBuy),
        ]
    }

    #[test]
    fn reproducible_for_a_seed() {
        let s = GameState::new(tb8_board(), 2, 0);
        let v = StateView::new(&s, 0);
        let picks = |seed| {
            let mut a = random_legal_agent(seed);
            (0..20).map(|_| a.decide(&v, &buy_or_decline())).collect::<Vec<_>>()
        };
        assert_eq!(picks(3), picks(3));
    }

    #[test]
    fn singleton_is_forced() {
        let s = GameState::new(tb8_board(), 2, 0);
        let mut a = random_legal_agent(1);
        assert_eq!(
            a.decide(&StateView::new(&s, 0), &[Move::end_phase()]),
            Move::end_phase()
        );
    }

    #[test]
    fn buy_rate_is_half() {
        let s = GameState::new(tb8_board(), 2, 0);
        let v = StateView::new(&s, 0);
        let mut a = random_legal_agent(11);
        let legal = buy_or_decline();
        let buys = (0..10_000)
            .filter(|_| matches!(a.decide(&v, &legal).kind, MoveKind::BuyProperty { .. }))
            .count();
        let rate = buys as f64 / 10_000.0;
        assert!((rate - 0.5).abs() <= 0.02, "buy rate {rate}");
    }
}
