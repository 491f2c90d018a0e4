use serde::{Deserialize, Serialize};

use crate::{Money, PlayerId, SquareId};

/// One-for-one property swap with an optional cash sweetener. Positive
/// `cash` flows from proposer to counterparty.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct TradeOffer {
    pub proposer: PlayerId,
    pub counterparty: PlayerId,
    pub give: SquareId,
    pub take: SquareId,
    pub cash: Money,
}

impl TradeOffer {
    /// Cash the given party pays if the trade goes through.
    pub fn outlay_for(&self, party: PlayerId) -> Money {
        if party == self.proposer {
            self.cash.max(0.0)
        } else {
            (-self.cash).max(0.0)
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "type", rename_all = "snake_case")]
pub enum MoveKind {
    BuyProperty { square: SquareId },
    DeclineBuy,
    Improve { square: SquareId },
    SellImprovement { square: SquareId },
    Mortgage { square: SquareId },
    Unmortgage { square: SquareId },
    Bid { amount: Money },
    PassBid,
    ProposeTrade { offer: TradeOffer },
    AcceptTrade,
    RejectTrade,
    PayJailFine,
    UseRollForJail,
    EndPhase,
}

impl MoveKind {
    /// Fixed tie-break order; "do nothing" moves come last.
    pub fn priority(&self) -> u8 {
        match self {
            MoveKind::BuyProperty { .. } => 0,
            MoveKind::Improve { .. } => 1,
            MoveKind::Unmortgage { .. } => 2,
            MoveKind::Bid { .. } => 3,
            MoveKind::AcceptTrade => 4,
            MoveKind::ProposeTrade { .. } => 5,
            MoveKind::SellImprovement { .. } => 6,
            MoveKind::Mortgage { .. } => 7,
            MoveKind::UseRollForJail => 8,
            MoveKind::PayJailFine => 9,
            MoveKind::RejectTrade => 10,
            MoveKind::PassBid => 11,
            MoveKind::DeclineBuy => 12,
            MoveKind::EndPhase => 13,
        }
    }

    pub fn square(&self) -> Option<SquareId> {
        match self {
            MoveKind::BuyProperty { square }
            | MoveKind::Improve { square }
            | MoveKind::SellImprovement { square }
            | MoveKind::Mortgage { square }
            | MoveKind::Unmortgage { square } => Some(*square),
            MoveKind::ProposeTrade { offer } => Some(offer.take),
            _ => None,
        }
    }
}

/// An agent decision together with its cash outlay `C(m)`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Move {
    pub kind: MoveKind,
    pub cost: Money,
}

impl Move {
    pub fn new(kind: MoveKind, cost: Money) -> Self {
        Move { kind, cost }
    }

    pub fn free(kind: MoveKind) -> Self {
        Move { kind, cost: 0.0 }
    }

    pub fn end_phase() -> Self {
        Move::free(MoveKind::EndPhase)
    }

    /// Whether `chosen` is an instance of this offered move. Bids may exceed
    /// the offered minimum and trade templates may carry any cash amount;
    /// everything else must match exactly.
    pub fn admits(&self, chosen: &Move) -> bool {
        match (&self.kind, &chosen.kind) {
            (MoveKind::Bid { amount: min }, MoveKind::Bid { amount }) => amount.is_finite() && amount >= min,
            (MoveKind::ProposeTrade { offer: t }, MoveKind::ProposeTrade { offer: o }) => {
                t.proposer == o.proposer
                    && t.counterparty == o.counterparty
                    && t.give == o.give
                    && t.take == o.take
                    && o.cash.is_finite()
            }
            (a, b) => a == b,
        }
    }
}
