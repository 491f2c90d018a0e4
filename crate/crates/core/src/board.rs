//! Static game configuration: squares, colour groups, cards and dice.
//!
//! A [`BoardSpec`] is immutable once loaded and is shared between games
//! behind an `Arc`. Boards are read from JSON (see `boards/README.md` for the
//! schema); two boards ship with the crate: the classic 40-square layout and
//! the eight-square `TB8` fixture used throughout the tests.

use std::collections::BTreeMap;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::novelty::{NoveltyPayload, NoveltySpec};
use crate::{Money, SquareId};

pub const STANDARD_BOARD_JSON: &str = include_str!("../boards/standard.json");
pub const TB8_BOARD_JSON: &str = include_str!("../boards/tb8.json");

const WEIGHT_TOLERANCE: f64 = 1e-12;

#[derive(Debug, Error)]
pub enum BoardError {
    #[error("parse error: {0}")]
    Parse(#[from] serde_json::Error),
    #[error("invalid board: {field}: {message}")]
    Validation { field: String, message: String },
    #[error("unknown novelty target: {0}")]
    UnknownTarget(String),
}

fn invalid(field: impl Into<String>, message: impl Into<String>) -> BoardError {
    BoardError::Validation {
        field: field.into(),
        message: message.into(),
    }
}

/// Full rent/price schedule of a purchasable square.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct PropertySpec {
    pub color: String,
    pub price: Money,
    pub mortgage_value: Money,
    pub base_rent: Money,
    pub monopoly_rent: Money,
    /// `house_rents[i]` is the rent with `i + 1` houses.
    #[serde(default)]
    pub house_rents: Vec<Money>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub hotel_rent: Option<Money>,
    #[serde(default)]
    pub house_cost: Money,
}

/// Rent tier of a property; the hotel sits one level above the last house.
#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum RentTier {
    Base,
    Monopoly,
    Houses(u32),
    Hotel,
}

impl PropertySpec {
    /// Highest improvement level (houses, plus one if a hotel tier exists).
    pub fn max_level(&self) -> u32 {
        self.house_rents.len() as u32 + u32::from(self.hotel_rent.is_some())
    }

    pub fn has_hotel_level(&self, level: u32) -> bool {
        self.hotel_rent.is_some() && level == self.max_level()
    }

    pub fn tier(&self, level: u32, monopolized: bool) -> RentTier {
        match level {
            0 if monopolized => RentTier::Monopoly,
            0 => RentTier::Base,
            l if self.has_hotel_level(l) => RentTier::Hotel,
            l => RentTier::Houses(l),
        }
    }

    pub fn rent_for(&self, tier: RentTier) -> Money {
        match tier {
            RentTier::Base => self.base_rent,
            RentTier::Monopoly => self.monopoly_rent,
            RentTier::Houses(n) => self.house_rents[(n as usize).saturating_sub(1)],
            RentTier::Hotel => self.hotel_rent.unwrap_or(0.0),
        }
    }

    pub fn rent_at(&self, level: u32, monopolized: bool) -> Money {
        self.rent_for(self.tier(level, monopolized))
    }

    /// Streets can be built on; railroads and utilities cannot.
    pub fn is_buildable(&self) -> bool {
        self.max_level() > 0
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "kebab-case")]
pub enum SquareKind {
    Go,
    Property(PropertySpec),
    Tax { amount: Money },
    Chance,
    Community,
    FreeParking,
    JailVisit,
    GoToJail,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SquareSpec {
    pub name: String,
    #[serde(flatten)]
    pub kind: SquareKind,
}

impl SquareSpec {
    pub fn property(&self) -> Option<&PropertySpec> {
        match &self.kind {
            SquareKind::Property(p) => Some(p),
            _ => None,
        }
    }

    pub fn property_mut(&mut self) -> Option<&mut PropertySpec> {
        match &mut self.kind {
            SquareKind::Property(p) => Some(p),
            _ => None,
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Die {
    pub faces: Vec<i64>,
    pub weights: Vec<f64>,
}

impl Die {
    pub fn uniform(faces: Vec<i64>) -> Self {
        let w = 1.0 / faces.len() as f64;
        let weights = vec![w; faces.len()];
        Die { faces, weights }
    }

    pub fn mean(&self) -> f64 {
        self.faces.iter().zip(&self.weights).map(|(&f, &w)| f as f64 * w).sum()
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct DiceSpec {
    pub dice: Vec<Die>,
}

impl DiceSpec {
    /// Distribution of the sum of all dice as `(total, probability)` pairs,
    /// sorted by total, zero-probability totals dropped.
    pub fn sum_distribution(&self) -> Vec<(i64, f64)> {
        let mut acc: BTreeMap<i64, f64> = BTreeMap::new();
        acc.insert(0, 1.0);
        for die in &self.dice {
            let mut next = BTreeMap::new();
            for (&total, &p) in &acc {
                for (&face, &w) in die.faces.iter().zip(&die.weights) {
                    if w > 0.0 {
                        *next.entry(total + face).or_insert(0.0) += p * w;
                    }
                }
            }
            acc = next;
        }
        acc.into_iter().collect()
    }

    pub fn mean_sum(&self) -> f64 {
        self.dice.iter().map(Die::mean).sum()
    }

    pub fn min_sum(&self) -> i64 {
        self.dice.iter().filter_map(|d| d.faces.iter().min()).sum()
    }

    pub fn max_sum(&self) -> i64 {
        self.dice.iter().filter_map(|d| d.faces.iter().max()).sum()
    }

    pub fn validate(&self) -> Result<(), BoardError> {
        if self.dice.is_empty() {
            return Err(invalid("dice", "at least one die is required"));
        }
        for (i, die) in self.dice.iter().enumerate() {
            let field = format!("dice[{i}]");
            if die.faces.is_empty() {
                return Err(invalid(field, "die has no faces"));
            }
            if die.faces.len() != die.weights.len() {
                return Err(invalid(field, "faces and weights differ in length"));
            }
            if die.faces.iter().any(|&f| f < 0) {
                return Err(invalid(field, "negative face value"));
            }
            let mut sorted = die.faces.clone();
            sorted.sort_unstable();
            sorted.dedup();
            if sorted.len() != die.faces.len() {
                return Err(invalid(field, "duplicate face value"));
            }
            if die.weights.iter().any(|w| !w.is_finite() || *w < 0.0) {
                return Err(invalid(field, "weights must be finite and non-negative"));
            }
            let total: f64 = die.weights.iter().sum();
            if (total - 1.0).abs() > WEIGHT_TOLERANCE {
                return Err(invalid(field, format!("weights sum to {total}, expected 1")));
            }
        }
        Ok(())
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "type", rename_all = "kebab-case")]
pub enum CardEffect {
    MoveTo { square: SquareId },
    Pay { amount: Money },
    Receive { amount: Money },
    GoToJail,
    PayPerHouse { per_house: Money, per_hotel: Money },
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct CardSpec {
    pub text: String,
    pub effect: CardEffect,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Deck {
    Chance,
    Community,
}

fn default_jail_fine() -> Money {
    50.0
}

fn default_starting_cash() -> Money {
    1500.0
}

/// On-disk shape of a board. Field order here is the serialization order.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct BoardFile {
    pub squares: Vec<SquareSpec>,
    pub go_increment: Money,
    pub dice: DiceSpec,
    pub chance_deck: Vec<CardSpec>,
    pub community_deck: Vec<CardSpec>,
    pub mortgage_interest_rate: f64,
    pub bank_houses: u32,
    pub bank_hotels: u32,
    #[serde(default = "default_jail_fine")]
    pub jail_fine: Money,
    #[serde(default = "default_starting_cash")]
    pub starting_cash: Money,
    /// Per-colour override of how many squares make a monopoly.
    #[serde(default, skip_serializing_if = "BTreeMap::is_empty")]
    pub monopoly_size: BTreeMap<String, usize>,
}

/// Validated, immutable board configuration.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "BoardFile", into = "BoardFile")]
pub struct BoardSpec {
    pub squares: Vec<SquareSpec>,
    pub go_increment: Money,
    pub dice: DiceSpec,
    pub chance_deck: Vec<CardSpec>,
    pub community_deck: Vec<CardSpec>,
    pub mortgage_interest_rate: f64,
    pub bank_houses: u32,
    pub bank_hotels: u32,
    pub jail_fine: Money,
    pub starting_cash: Money,
    pub monopoly_size: BTreeMap<String, usize>,
    /// Derived: colour → square indices in board order.
    colors: BTreeMap<String, Vec<SquareId>>,
    /// Derived: for each property square, its colour group.
    peers: Vec<Vec<SquareId>>,
}

impl TryFrom<BoardFile> for BoardSpec {
    type Error = BoardError;

    fn try_from(file: BoardFile) -> Result<Self, BoardError> {
        let board = BoardSpec::from_file_unchecked(file);
        board.validate()?;
        Ok(board)
    }
}

impl From<BoardSpec> for BoardFile {
    fn from(b: BoardSpec) -> Self {
        BoardFile {
            squares: b.squares,
            go_increment: b.go_increment,
            dice: b.dice,
            chance_deck: b.chance_deck,
            community_deck: b.community_deck,
            mortgage_interest_rate: b.mortgage_interest_rate,
            bank_houses: b.bank_houses,
            bank_hotels: b.bank_hotels,
            jail_fine: b.jail_fine,
            starting_cash: b.starting_cash,
            monopoly_size: b.monopoly_size,
        }
    }
}

/// Parse and validate a board file.
pub fn load_board_spec(source: &[u8]) -> Result<BoardSpec, BoardError> {
    let file: BoardFile = serde_json::from_slice(source)?;
    BoardSpec::try_from(file)
}

pub fn standard_board() -> BoardSpec {
    load_board_spec(STANDARD_BOARD_JSON.as_bytes()).expect("bundled standard board is valid")
}

pub fn tb8_board() -> BoardSpec {
    load_board_spec(TB8_BOARD_JSON.as_bytes()).expect("bundled TB8 board is valid")
}

/// Resolve `builtin:standard` / `builtin:tb8` names.
pub fn builtin_board(name: &str) -> Option<BoardSpec> {
    match name {
        "builtin:standard" | "standard" => Some(standard_board()),
        "builtin:tb8" | "tb8" | "TB8" => Some(tb8_board()),
        _ => None,
    }
}

impl BoardSpec {
    fn from_file_unchecked(file: BoardFile) -> Self {
        let mut board = BoardSpec {
            squares: file.squares,
            go_increment: file.go_increment,
            dice: file.dice,
            chance_deck: file.chance_deck,
            community_deck: file.community_deck,
            mortgage_interest_rate: file.mortgage_interest_rate,
            bank_houses: file.bank_houses,
            bank_hotels: file.bank_hotels,
            jail_fine: file.jail_fine,
            starting_cash: file.starting_cash,
            monopoly_size: file.monopoly_size,
            colors: BTreeMap::new(),
            peers: Vec::new(),
        };
        board.reindex();
        board
    }

    /// Rebuild the colour index after squares were edited.
    pub(crate) fn reindex(&mut self) {
        let mut colors: BTreeMap<String, Vec<SquareId>> = BTreeMap::new();
        for (i, sq) in self.squares.iter().enumerate() {
            if let Some(p) = sq.property() {
                colors.entry(p.color.clone()).or_default().push(i);
            }
        }
        self.peers = self
            .squares
            .iter()
            .map(|sq| sq.property().map_or_else(Vec::new, |p| colors[&p.color].clone()))
            .collect();
        self.colors = colors;
    }

    pub fn len(&self) -> usize {
        self.squares.len()
    }

    pub fn is_empty(&self) -> bool {
        self.squares.is_empty()
    }

    pub fn colors(&self) -> &BTreeMap<String, Vec<SquareId>> {
        &self.colors
    }

    pub fn color_squares(&self, color: &str) -> &[SquareId] {
        self.colors.get(color).map(Vec::as_slice).unwrap_or(&[])
    }

    /// The colour group `sq` belongs to, itself included; empty for
    /// non-properties.
    pub fn peers(&self, sq: SquareId) -> &[SquareId] {
        self.peers.get(sq).map(Vec::as_slice).unwrap_or(&[])
    }

    /// [`monopoly_required`](Self::monopoly_required) for the colour of `sq`.
    pub fn required_for(&self, sq: SquareId) -> usize {
        let size = self.peers(sq).len();
        match self.property(sq) {
            Some(p) if !self.monopoly_size.is_empty() => {
                self.monopoly_size.get(&p.color).copied().unwrap_or(size).min(size)
            }
            _ => size,
        }
    }

    pub fn property(&self, sq: SquareId) -> Option<&PropertySpec> {
        self.squares.get(sq).and_then(SquareSpec::property)
    }

    /// Number of squares of `color` one player must hold for a monopoly.
    pub fn monopoly_required(&self, color: &str) -> usize {
        let size = self.color_squares(color).len();
        self.monopoly_size.get(color).copied().unwrap_or(size).min(size)
    }

    /// First jail square, the destination of go-to-jail effects.
    pub fn jail_square(&self) -> Option<SquareId> {
        self.squares
            .iter()
            .position(|s| matches!(s.kind, SquareKind::JailVisit))
    }

    pub fn deck(&self, deck: Deck) -> &[CardSpec] {
        match deck {
            Deck::Chance => &self.chance_deck,
            Deck::Community => &self.community_deck,
        }
    }

    /// Properties in groups that can carry improvements.
    pub fn street_count(&self) -> usize {
        self.squares
            .iter()
            .filter_map(SquareSpec::property)
            .filter(|p| p.is_buildable())
            .count()
    }

    /// Largest single compulsory payment on the board (taxes and pay cards).
    pub fn worst_penalty(&self) -> Money {
        let taxes = self.squares.iter().filter_map(|s| match s.kind {
            SquareKind::Tax { amount } => Some(amount),
            _ => None,
        });
        let cards = self
            .chance_deck
            .iter()
            .chain(&self.community_deck)
            .filter_map(|c| match c.effect {
                CardEffect::Pay { amount } => Some(amount),
                _ => None,
            });
        taxes.chain(cards).fold(0.0, f64::max)
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("board serializes")
    }

    /// Multiply every monetary quantity by `factor`.
    pub fn scaled(&self, factor: f64) -> BoardSpec {
        let mut b = self.clone();
        b.go_increment *= factor;
        b.jail_fine *= factor;
        b.starting_cash *= factor;
        for sq in &mut b.squares {
            match &mut sq.kind {
                SquareKind::Property(p) => {
                    p.price *= factor;
                    p.mortgage_value *= factor;
                    p.base_rent *= factor;
                    p.monopoly_rent *= factor;
                    p.house_cost *= factor;
                    p.house_rents.iter_mut().for_each(|r| *r *= factor);
                    if let Some(h) = &mut p.hotel_rent {
                        *h *= factor;
                    }
                }
                SquareKind::Tax { amount } => *amount *= factor,
                _ => {}
            }
        }
        for card in b.chance_deck.iter_mut().chain(b.community_deck.iter_mut()) {
            match &mut card.effect {
                CardEffect::Pay { amount } | CardEffect::Receive { amount } => *amount *= factor,
                CardEffect::PayPerHouse { per_house, per_hotel } => {
                    *per_house *= factor;
                    *per_hotel *= factor;
                }
                _ => {}
            }
        }
        b
    }

    /// Full validation, including the rent-schedule ordering and
    /// mortgage-value bounds that apply to shipped board files.
    pub fn validate(&self) -> Result<(), BoardError> {
        self.validate_structure()?;
        for (i, sq) in self.squares.iter().enumerate() {
            if let Some(p) = sq.property() {
                let field = format!("squares[{i}]");
                if p.mortgage_value > p.price {
                    return Err(invalid(field, "mortgage_value exceeds price"));
                }
                let mut schedule = vec![p.base_rent, p.monopoly_rent];
                schedule.extend(&p.house_rents);
                schedule.extend(p.hotel_rent);
                if schedule.windows(2).any(|w| w[0] > w[1]) {
                    return Err(invalid(field, "rent schedule is not non-decreasing"));
                }
            }
        }
        Ok(())
    }

    /// Structural invariants that every board, including novelty-mutated
    /// ones, must satisfy.
    pub fn validate_structure(&self) -> Result<(), BoardError> {
        let n = self.squares.len();
        if n < 4 {
            return Err(invalid("squares", format!("need at least 4 squares, got {n}")));
        }
        let gos: Vec<_> = self
            .squares
            .iter()
            .enumerate()
            .filter(|(_, s)| matches!(s.kind, SquareKind::Go))
            .map(|(i, _)| i)
            .collect();
        match gos.as_slice() {
            [] => return Err(invalid("squares", "no Go square")),
            [0] => {}
            [_] => return Err(invalid("squares", "Go square must be at index 0")),
            _ => return Err(invalid("squares", "multiple Go squares")),
        }
        for (i, sq) in self.squares.iter().enumerate() {
            let field = format!("squares[{i}]");
            match &sq.kind {
                SquareKind::Property(p) => {
                    if p.color.is_empty() {
                        return Err(invalid(field, "property without colour"));
                    }
                    let mut amounts = vec![p.price, p.mortgage_value, p.base_rent, p.monopoly_rent, p.house_cost];
                    amounts.extend(&p.house_rents);
                    amounts.extend(p.hotel_rent);
                    if amounts.iter().any(|a| !a.is_finite() || *a < 0.0) {
                        return Err(invalid(field, "negative or non-finite amount"));
                    }
                }
                SquareKind::Tax { amount } if !amount.is_finite() || *amount < 0.0 => {
                    return Err(invalid(field, "negative tax"));
                }
                _ => {}
            }
        }
        for (color, size) in &self.monopoly_size {
            let have = self.color_squares(color).len();
            if have == 0 {
                return Err(invalid(format!("monopoly_size.{color}"), "unknown colour"));
            }
            if *size == 0 || *size > have {
                return Err(invalid(
                    format!("monopoly_size.{color}"),
                    format!("required count {size} outside 1..={have}"),
                ));
            }
        }
        let scalars = [
            ("go_increment", self.go_increment),
            ("jail_fine", self.jail_fine),
            ("starting_cash", self.starting_cash),
            ("mortgage_interest_rate", self.mortgage_interest_rate),
        ];
        for (name, v) in scalars {
            if !v.is_finite() || v < 0.0 {
                return Err(invalid(name, "must be finite and non-negative"));
            }
        }
        self.dice.validate()?;
        let needs_jail = self.squares.iter().any(|s| matches!(s.kind, SquareKind::GoToJail));
        for (deck, cards) in [
            ("chance_deck", &self.chance_deck),
            ("community_deck", &self.community_deck),
        ] {
            for (j, card) in cards.iter().enumerate() {
                let field = format!("{deck}[{j}]");
                match &card.effect {
                    CardEffect::MoveTo { square } if *square >= n => {
                        return Err(invalid(field, format!("target square {square} out of range")));
                    }
                    CardEffect::Pay { amount } | CardEffect::Receive { amount }
                        if !amount.is_finite() || *amount < 0.0 =>
                    {
                        return Err(invalid(field, "negative amount"));
                    }
                    CardEffect::GoToJail if self.jail_square().is_none() => {
                        return Err(invalid(field, "go-to-jail card on a board without a jail"));
                    }
                    _ => {}
                }
            }
        }
        if needs_jail && self.jail_square().is_none() {
            return Err(invalid("squares", "go-to-jail square on a board without a jail"));
        }
        Ok(())
    }
}

/// Check that every target a novelty names exists on `board`.
pub fn validate_novelty_compat(board: &BoardSpec, novelty: &NoveltySpec) -> Result<(), BoardError> {
    let n = board.len();
    let unknown = |what: String| Err(BoardError::UnknownTarget(what));
    match &novelty.payload {
        NoveltyPayload::SetAttribute { path, .. } => {
            crate::novelty::AttributePath::parse(path)
                .and_then(|p| p.check(board))
                .map_err(|_| BoardError::UnknownTarget(path.clone()))?;
        }
        NoveltyPayload::Permute { order } => {
            if order.len() != n {
                return unknown(format!("permutation of length {} on {n} squares", order.len()));
            }
            let mut seen = vec![false; n];
            for &i in order {
                if i >= n || std::mem::replace(&mut seen[i], true) {
                    return unknown(format!("square {i}"));
                }
            }
        }
        NoveltyPayload::Swap { a, b } => {
            for s in [a, b] {
                if *s >= n {
                    return unknown(format!("square {s}"));
                }
            }
        }
        NoveltyPayload::Recolor { square, .. } => {
            if board.property(*square).is_none() {
                return unknown(format!("property square {square}"));
            }
        }
        NoveltyPayload::SetSize { color, .. } => {
            if board.color_squares(color).is_empty() {
                return unknown(format!("colour {color}"));
            }
        }
        NoveltyPayload::AddDie { .. } => {}
        NoveltyPayload::RemoveDie { die }
        | NoveltyPayload::SetDieFaces { die, .. }
        | NoveltyPayload::SetDieWeights { die, .. } => {
            if *die >= board.dice.dice.len() {
                return unknown(format!("die {die}"));
            }
        }
    }
    Ok(())
}
