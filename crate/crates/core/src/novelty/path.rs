use std::fmt;

use serde::{Deserialize, Serialize};

use super::NoveltyError;
use crate::board::{BoardSpec, CardEffect, Deck, RentTier, SquareKind};
use crate::{Money, SquareId};

/// Value of a tracked attribute.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum AttrValue {
    Num(f64),
    Text(String),
}

impl AttrValue {
    pub fn as_num(&self) -> Option<f64> {
        match self {
            AttrValue::Num(v) => Some(*v),
            AttrValue::Text(_) => None,
        }
    }

    pub(crate) fn absent() -> Self {
        AttrValue::Text("absent".into())
    }

    /// Equal, with a small relative tolerance for numbers.
    pub fn matches(&self, other: &AttrValue) -> bool {
        match (self, other) {
            (AttrValue::Num(a), AttrValue::Num(b)) => (a - b).abs() <= 1e-9 * (1.0 + a.abs().max(b.abs())),
            (a, b) => a == b,
        }
    }
}

impl fmt::Display for AttrValue {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            AttrValue::Num(v) => write!(f, "{v}"),
            AttrValue::Text(s) => f.write_str(s),
        }
    }
}

/// Dotted name of one board attribute, e.g. `rent.1.base` or `go_increment`.
#[derive(Clone, Debug, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum AttributePath {
    Rent { square: SquareId, tier: RentTier },
    Price(SquareId),
    MortgageValue(SquareId),
    HouseCost(SquareId),
    Tax(SquareId),
    GoIncrement,
    MortgageRate,
    JailFine,
    StartingCash,
    CardAmount { deck: Deck, index: usize },
    SquareName(SquareId),
    Color(SquareId),
    MonopolyRequired(String),
    DiceCount,
    DieFace { die: usize, face: i64 },
    DieBias(usize),
}

fn deck_name(deck: Deck) -> &'static str {
    match deck {
        Deck::Chance => "chance",
        Deck::Community => "community",
    }
}

impl fmt::Display for AttributePath {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        use AttributePath::*;
        match self {
            Rent { square, tier } => match tier {
                RentTier::Base => write!(f, "rent.{square}.base"),
                RentTier::Monopoly => write!(f, "rent.{square}.monopoly"),
                RentTier::Houses(n) => write!(f, "rent.{square}.house{n}"),
                RentTier::Hotel => write!(f, "rent.{square}.hotel"),
            },
            Price(s) => write!(f, "price.{s}"),
            MortgageValue(s) => write!(f, "mortgage_value.{s}"),
            HouseCost(s) => write!(f, "house_cost.{s}"),
            Tax(s) => write!(f, "tax.{s}"),
            GoIncrement => f.write_str("go_increment"),
            MortgageRate => f.write_str("mortgage_interest_rate"),
            JailFine => f.write_str("jail_fine"),
            StartingCash => f.write_str("starting_cash"),
            CardAmount { deck, index } => write!(f, "card.{}.{index}.amount", deck_name(*deck)),
            SquareName(s) => write!(f, "square.{s}.name"),
            Color(s) => write!(f, "color.{s}"),
            MonopolyRequired(c) => write!(f, "monopoly_required.{c}"),
            DiceCount => f.write_str("dice.count"),
            DieFace { die, face } => write!(f, "dice.{die}.face.{face}"),
            DieBias(d) => write!(f, "dice.{d}.bias"),
        }
    }
}

impl AttributePath {
    pub fn parse(s: &str) -> Result<Self, NoveltyError> {
        use AttributePath::*;
        let bad = || NoveltyError::BadPath(s.to_string());
        let parts: Vec<&str> = s.split('.').collect();
        let idx =
            |i: usize| -> Result<usize, NoveltyError> { parts.get(i).and_then(|p| p.parse().ok()).ok_or_else(bad) };
        let path = match parts.as_slice() {
            ["rent", _, tier] => {
                let tier = match *tier {
                    "base" => RentTier::Base,
                    "monopoly" => RentTier::Monopoly,
                    "hotel" => RentTier::Hotel,
                    t => {
                        let n: u32 = t.strip_prefix("house").and_then(|n| n.parse().ok()).ok_or_else(bad)?;
                        if n == 0 {
                            return Err(bad());
                        }
                        RentTier::Houses(n)
                    }
                };
                Rent { square: idx(1)?, tier }
            }
            ["price", _] => Price(idx(1)?),
            ["mortgage_value", _] => MortgageValue(idx(1)?),
            ["house_cost", _] => HouseCost(idx(1)?),
            ["tax", _] => Tax(idx(1)?),
            ["go_increment"] => GoIncrement,
            ["mortgage_interest_rate"] => MortgageRate,
            ["jail_fine"] => JailFine,
            ["starting_cash"] => StartingCash,
            ["card", deck, _, "amount"] => {
                let deck = match *deck {
                    "chance" => Deck::Chance,
                    "community" => Deck::Community,
                    _ => return Err(bad()),
                };
                CardAmount { deck, index: idx(2)? }
            }
            ["square", _, "name"] => SquareName(idx(1)?),
            ["color", _] => Color(idx(1)?),
            ["monopoly_required", color] => MonopolyRequired(color.to_string()),
            ["dice", "count"] => DiceCount,
            ["dice", _, "face", face] => DieFace {
                die: idx(1)?,
                face: face.parse().map_err(|_| bad())?,
            },
            ["dice", _, "bias"] => DieBias(idx(1)?),
            _ => return Err(bad()),
        };
        Ok(path)
    }

    /// Numeric attributes a novelty may overwrite.
    pub fn is_settable(&self) -> bool {
        use AttributePath::*;
        matches!(
            self,
            Rent { .. }
                | Price(_)
                | MortgageValue(_)
                | HouseCost(_)
                | Tax(_)
                | GoIncrement
                | MortgageRate
                | JailFine
                | StartingCash
                | CardAmount { .. }
        )
    }

    /// Whether the value can be read directly off the board by a player.
    pub fn is_state_visible(&self) -> bool {
        use AttributePath::*;
        matches!(
            self,
            Rent { .. }
                | Price(_)
                | HouseCost(_)
                | Tax(_)
                | GoIncrement
                | SquareName(_)
                | Color(_)
                | MonopolyRequired(_)
        )
    }

    /// The target exists on `board` and can be set.
    pub fn check(&self, board: &BoardSpec) -> Result<(), NoveltyError> {
        if !self.is_settable() || self.read(board).is_none() {
            return Err(NoveltyError::UnknownTarget(self.to_string()));
        }
        Ok(())
    }

    /// Current value on `board`, or `None` if the target does not exist.
    pub fn read(&self, board: &BoardSpec) -> Option<AttrValue> {
        use AttributePath::*;
        let num = |v: Money| Some(AttrValue::Num(v));
        match self {
            Rent { square, tier } => {
                let p = board.property(*square)?;
                match tier {
                    RentTier::Houses(n) if *n as usize > p.house_rents.len() || *n == 0 => None,
                    RentTier::Hotel if p.hotel_rent.is_none() => None,
                    t => num(p.rent_for(*t)),
                }
            }
            Price(s) => num(board.property(*s)?.price),
            MortgageValue(s) => num(board.property(*s)?.mortgage_value),
            HouseCost(s) => {
                let p = board.property(*s)?;
                p.is_buildable().then_some(AttrValue::Num(p.house_cost))
            }
            Tax(s) => match board.squares.get(*s)?.kind {
                SquareKind::Tax { amount } => num(amount),
                _ => None,
            },
            GoIncrement => num(board.go_increment),
            MortgageRate => num(board.mortgage_interest_rate),
            JailFine => num(board.jail_fine),
            StartingCash => num(board.starting_cash),
            CardAmount { deck, index } => match board.deck(*deck).get(*index)?.effect {
                CardEffect::Pay { amount } | CardEffect::Receive { amount } => num(amount),
                _ => None,
            },
            SquareName(s) => Some(AttrValue::Text(board.squares.get(*s)?.name.clone())),
            Color(s) => Some(AttrValue::Text(board.property(*s)?.color.clone())),
            MonopolyRequired(c) => {
                let r = board.monopoly_required(c);
                (r > 0).then_some(AttrValue::Num(r as f64))
            }
            DiceCount => num(board.dice.dice.len() as f64),
            DieFace { die, face } => {
                let d = board.dice.dice.get(*die)?;
                Some(AttrValue::Text(
                    if d.faces.contains(face) { "present" } else { "absent" }.into(),
                ))
            }
            DieBias(_) => None,
        }
    }

    /// Overwrite a numeric attribute in place.
    pub fn set(&self, board: &mut BoardSpec, value: f64) -> Result<(), NoveltyError> {
        use AttributePath::*;
        let unknown = || NoveltyError::UnknownTarget(self.to_string());
        fn prop(board: &mut BoardSpec, s: SquareId) -> Option<&mut crate::board::PropertySpec> {
            board.squares.get_mut(s).and_then(|sq| sq.property_mut())
        }
        match self {
            Rent { square, tier } => {
                self.read(board).ok_or_else(unknown)?;
                let p = prop(board, *square).ok_or_else(unknown)?;
                match tier {
                    RentTier::Base => p.base_rent = value,
                    RentTier::Monopoly => p.monopoly_rent = value,
                    RentTier::Houses(n) => p.house_rents[*n as usize - 1] = value,
                    RentTier::Hotel => p.hotel_rent = Some(value),
                }
            }
            Price(s) => prop(board, *s).ok_or_else(unknown)?.price = value,
            MortgageValue(s) => prop(board, *s).ok_or_else(unknown)?.mortgage_value = value,
            HouseCost(s) => prop(board, *s).ok_or_else(unknown)?.house_cost = value,
            Tax(s) => match board.squares.get_mut(*s).map(|sq| &mut sq.kind) {
                Some(SquareKind::Tax { amount }) => *amount = value,
                _ => return Err(unknown()),
            },
            GoIncrement => board.go_increment = value,
            MortgageRate => board.mortgage_interest_rate = value,
            JailFine => board.jail_fine = value,
            StartingCash => board.starting_cash = value,
            CardAmount { deck, index } => {
                let cards = match deck {
                    Deck::Chance => &mut board.chance_deck,
                    Deck::Community => &mut board.community_deck,
                };
                match cards.get_mut(*index).map(|c| &mut c.effect) {
                    Some(CardEffect::Pay { amount } | CardEffect::Receive { amount }) => *amount = value,
                    _ => return Err(unknown()),
                }
            }
            _ => return Err(unknown()),
        }
        Ok(())
    }
}

/// Every attribute a player can watch, with its value on `board`.
pub fn tracked_attributes(board: &BoardSpec) -> Vec<(AttributePath, AttrValue)> {
    use AttributePath::*;
    let mut paths = vec![GoIncrement, MortgageRate, JailFine, DiceCount];
    for (i, sq) in board.squares.iter().enumerate() {
        paths.push(SquareName(i));
        match &sq.kind {
            SquareKind::Property(p) => {
                paths.extend([Color(i), Price(i), MortgageValue(i), HouseCost(i)]);
                paths.push(Rent {
                    square: i,
                    tier: RentTier::Base,
                });
                paths.push(Rent {
                    square: i,
                    tier: RentTier::Monopoly,
                });
                for n in 1..=p.house_rents.len() as u32 {
                    paths.push(Rent {
                        square: i,
                        tier: RentTier::Houses(n),
                    });
                }
                if p.hotel_rent.is_some() {
                    paths.push(Rent {
                        square: i,
                        tier: RentTier::Hotel,
                    });
                }
            }
            SquareKind::Tax { .. } => paths.push(Tax(i)),
            _ => {}
        }
    }
    for color in board.colors().keys() {
        paths.push(MonopolyRequired(color.clone()));
    }
    for deck in [Deck::Chance, Deck::Community] {
        for index in 0..board.deck(deck).len() {
            paths.push(CardAmount { deck, index });
        }
    }
    paths
        .into_iter()
        .filter_map(|p| p.read(board).map(|v| (p, v)))
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::board::tb8_board;

    #[test]
    fn paths_round_trip_through_text() {
        for s in [
            "rent.1.base",
            "rent.4.house2",
            "rent.3.hotel",
            "price.6",
            "mortgage_value.1",
            "go_increment",
            "card.chance.0.amount",
            "monopoly_required.red",
            "dice.0.face.3",
            "dice.count",
        ] {
            assert_eq!(AttributePath::parse(s).unwrap().to_string(), s);
        }
        assert!(AttributePath::parse("rent.1.house0").is_err());
        assert!(AttributePath::parse("colour.1").is_err());
    }

    #[test]
    fn read_and_set_on_tb8() {
        let mut b = tb8_board();
        let p = AttributePath::parse("rent.1.house2").unwrap();
        assert_eq!(p.read(&b), Some(AttrValue::Num(60.0)));
        p.set(&mut b, 75.0).unwrap();
        assert_eq!(b.property(1).unwrap().house_rents[1], 75.0);
        assert!(AttributePath::parse("rent.1.hotel").unwrap().read(&b).is_none());
        assert!(AttributePath::parse("rent.9.base").unwrap().check(&b).is_err());
        assert!(AttributePath::parse("tax.3").unwrap().check(&b).is_ok());
        assert!(AttributePath::parse("tax.2").unwrap().check(&b).is_err());
    }

    #[test]
    fn tracked_set_covers_tb8() {
        let b = tb8_board();
        let attrs = tracked_attributes(&b);
        let names: Vec<String> = attrs.iter().map(|(p, _)| p.to_string()).collect();
        assert!(names.contains(&"rent.6.house2".to_string()));
        assert!(names.contains(&"card.chance.1.amount".to_string()));
        assert!(names.contains(&"monopoly_required.blue".to_string()));
        assert!(!names.iter().any(|n| n.starts_with("house_cost.3")));
    }
}
