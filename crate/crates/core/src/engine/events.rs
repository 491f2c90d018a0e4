use serde::{Deserialize, Serialize};

use super::moves::TradeOffer;
use crate::board::Deck;
use crate::novelty::NoveltySpec;
use crate::{Money, PlayerId, SquareId};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Party {
    Bank,
    Player(PlayerId),
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "type", rename_all = "snake_case")]
pub enum TransferReason {
    Rent { square: SquareId },
    GoBonus { laps: u32 },
    Tax { square: SquareId },
    Card { deck: Deck, index: usize },
    Purchase { square: SquareId },
    Auction { square: SquareId },
    Mortgage { square: SquareId },
    Unmortgage { square: SquareId },
    Improvement { square: SquareId },
    ImprovementSale { square: SquareId },
    JailFine,
    Trade,
    Bankruptcy,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum AuctionAction {
    Open,
    Bid,
    Pass,
    Won,
    Unsold,
}

/// Event body. Every cash movement is a `Transfer`; the other kinds record
/// what happened without moving money.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", content = "payload", rename_all = "snake_case")]
pub enum EventKind {
    NoveltyInjected {
        novelty: NoveltySpec,
    },
    Roll {
        faces: Vec<i64>,
        total: i64,
    },
    Moved {
        from: SquareId,
        to: SquareId,
    },
    Landed {
        square: SquareId,
    },
    Transfer {
        from: Party,
        to: Party,
        amount: Money,
        reason: TransferReason,
    },
    RentPaid {
        square: SquareId,
        owner: PlayerId,
        amount: Money,
    },
    CardDrawn {
        deck: Deck,
        index: usize,
        text: String,
    },
    Purchase {
        square: SquareId,
        price: Money,
    },
    AuctionStep {
        square: SquareId,
        action: AuctionAction,
        amount: Option<Money>,
    },
    Mortgage {
        square: SquareId,
        mortgaged: bool,
    },
    Improvement {
        square: SquareId,
        level: u32,
    },
    Jail {
        entered: bool,
    },
    Trade {
        offer: TradeOffer,
        accepted: bool,
    },
    PropertyTransferred {
        square: SquareId,
        to: Party,
        mortgaged: bool,
    },
    MoveFailed {
        reason: String,
    },
    Forfeit {
        reason: String,
    },
    Bankruptcy {
        creditor: Party,
        shortfall: Money,
    },
    GameEnd {
        winner: Option<PlayerId>,
        rounds: u32,
        cash: Vec<Money>,
    },
}

/// One line of the JSONL event log: `round`, `kind`, `payload`, `player`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct GameEvent {
    pub round: u32,
    #[serde(flatten)]
    pub kind: EventKind,
    pub player: Option<PlayerId>,
}

impl GameEvent {
    /// Signed cash change of `party` caused by this event.
    pub fn cash_delta(&self, party: Party) -> Money {
        match &self.kind {
            EventKind::Transfer { from, to, amount, .. } => {
                let mut d = 0.0;
                if *from == party {
                    d -= amount;
                }
                if *to == party {
                    d += amount;
                }
                d
            }
            _ => 0.0,
        }
    }

    /// Whether agents get to see this event (novelty injections are log-only).
    pub fn is_observable(&self) -> bool {
        !matches!(self.kind, EventKind::NoveltyInjected { .. })
    }
}

pub fn events_to_jsonl(events: &[GameEvent]) -> String {
    let mut out = Vec::with_capacity(events.len() * 112);
    for e in events {
        serde_json::to_writer(&mut out, e).expect("event serializes");
        out.push(b'\n');
    }
    String::from_utf8(out).expect("json is utf-8")
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn jsonl_line_has_stable_top_level_keys() {
        let e = GameEvent {
            round: 3,
            kind: EventKind::Roll {
                faces: vec![2, 5],
                total: 7,
            },
            player: Some(1),
        };
        let line = serde_json::to_string(&e).unwrap();
        let v: serde_json::Value = serde_json::from_str(&line).unwrap();
        let mut keys: Vec<_> = v.as_object().unwrap().keys().cloned().collect();
        keys.sort();
        assert_eq!(keys, ["kind", "payload", "player", "round"]);
        assert_eq!(v["kind"], "roll");
        assert_eq!(v["payload"]["faces"], serde_json::json!([2, 5]));
        let back: GameEvent = serde_json::from_str(&line).unwrap();
        assert_eq!(back, e);
    }

    #[test]
    fn transfer_deltas() {
        let e = GameEvent {
            round: 0,
            kind: EventKind::Transfer {
                from: Party::Player(0),
                to: Party::Player(1),
                amount: 10.0,
                reason: TransferReason::Rent { square: 1 },
            },
            player: Some(0),
        };
        assert_eq!(e.cash_delta(Party::Player(0)), -10.0);
        assert_eq!(e.cash_delta(Party::Player(1)), 10.0);
        assert_eq!(e.cash_delta(Party::Bank), 0.0);
        let back: GameEvent = serde_json::from_str(&serde_json::to_string(&e).unwrap()).unwrap();
        assert_eq!(back, e);
    }
}
