use serde::{Deserialize, Serialize};

use super::Agent;
use crate::engine::{Move, MoveKind, StateView, TradeOffer, TurnPhase};
use crate::{Money, SquareId};

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct SimpleParams {
    /// Cash to keep in hand after any voluntary purchase.
    pub reserve: Money,
    /// Highest bid as a fraction of list price.
    pub bid_fraction: f64,
}

impl Default for SimpleParams {
    fn default() -> Self {
        SimpleParams {
            reserve: 150.0,
            bid_fraction: 0.75,
        }
    }
}

/// Fixed-rule opponent: buys and builds while it can keep its reserve,
/// never proposes trades.
pub struct SimpleAgent {
    params: SimpleParams,
}

pub fn simple_baseline_agent(params: SimpleParams) -> SimpleAgent {
    SimpleAgent { params }
}

fn price(view: &StateView<'_>, sq: SquareId) -> Money {
    view.board.property(sq).map_or(0.0, |p| p.price)
}

impl SimpleAgent {
    fn develop(&self, view: &StateView<'_>, legal: &[Move]) -> Move {
        let cash = view.players[view.me()].cash;
        if cash < 0.0 {
            let cheapest = legal
                .iter()
                .filter(|m| matches!(m.kind, MoveKind::Mortgage { .. }))
                .min_by(|a, b| {
                    let pa = price(view, a.kind.square().unwrap_or(0));
                    let pb = price(view, b.kind.square().unwrap_or(0));
                    pa.total_cmp(&pb)
                });
            if let Some(m) = cheapest {
                return m.clone();
            }
        }
        let improve = legal
            .iter()
            .filter(|m| matches!(m.kind, MoveKind::Improve { .. }) && cash - m.cost >= self.params.reserve)
            .min_by(|a, b| a.cost.total_cmp(&b.cost).then(a.kind.square().cmp(&b.kind.square())));
        improve.cloned().unwrap_or_else(Move::end_phase)
    }
}

impl Agent for SimpleAgent {
    fn name(&self) -> &str {
        "simple"
    }

    fn decide(&mut self, view: &StateView<'_>, legal: &[Move]) -> Move {
        let cash = view.players[view.me()].cash;
        let reserve = self.params.reserve;
        let find = |pred: &dyn Fn(&MoveKind) -> bool| legal.iter().find(|m| pred(&m.kind)).cloned();
        match &view.phase {
            TurnPhase::BuyDecision { .. } => {
                let buy = find(&|k| matches!(k, MoveKind::BuyProperty { .. })).filter(|m| cash - m.cost >= reserve);
                buy.unwrap_or_else(|| Move::free(MoveKind::DeclineBuy))
            }
            TurnPhase::Jail => {
                let roll = find(&|k| *k == MoveKind::UseRollForJail);
                let fine = find(&|k| *k == MoveKind::PayJailFine);
                match (roll, fine) {
                    (Some(roll), Some(fine)) if cash - fine.cost < reserve => roll,
                    (_, Some(fine)) => fine,
                    (Some(roll), None) => roll,
                    (None, None) => legal[0].clone(),
                }
            }
            TurnPhase::OutOfTurn { .. } | TurnPhase::PostRoll => self.develop(view, legal),
            _ => legal.last().cloned().unwrap_or_else(Move::end_phase),
        }
    }

    fn bid(&mut self, view: &StateView<'_>, square: SquareId, _standing: Option<Money>, min_bid: Money) -> Move {
        let cap = self.params.bid_fraction * price(view, square);
        if min_bid <= cap && min_bid <= view.players[view.me()].cash {
            Move::new(MoveKind::Bid { amount: min_bid }, min_bid)
        } else {
            Move::free(MoveKind::PassBid)
        }
    }

    fn respond_trade(&mut self, view: &StateView<'_>, offer: &TradeOffer) -> Move {
        let received = price(view, offer.give) + offer.cash;
        let given = price(view, offer.take);
        let outlay = offer.outlay_for(view.me());
        if received > given && view.players[view.me()].cash >= outlay {
            Move::new(MoveKind::AcceptTrade, outlay)
        } else {
            Move::free(MoveKind::RejectTrade)
        }
    }
}
