use serde::{Deserialize, Serialize};

use crate::board::{BoardSpec, DiceSpec};
use crate::novelty::{AttrValue, AttributePath, DeviationEvent, DiceBeliefs, NoveltyError};
use crate::{Money, SquareId};

/// Position of a rent tier in a row of `rent_expectations`: base, monopoly,
/// then one entry per improvement level (hotel last).
pub fn tier_index(level: u32, monopolized: bool) -> usize {
    match level {
        0 if monopolized => 1,
        0 => 0,
        l => 1 + l as usize,
    }
}

/// The value agent's parameters and its beliefs about the board.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ValueParams {
    pub k_short: u32,
    pub k_loops: u32,
    /// Cash floor of the first guard; `None` uses the board's largest
    /// compulsory payment.
    pub cash_min: Option<Money>,
    /// Believed rent per square, indexed by [`tier_index`].
    pub rent_expectations: Vec<Vec<Money>>,
    pub go_increment_belief: Money,
    pub mortgage_rate_belief: f64,
    pub mortgage_value_belief: Vec<Money>,
    pub dice_model: DiceSpec,
}

impl ValueParams {
    pub fn from_board(board: &BoardSpec, k_short: u32, k_loops: u32, cash_min: Option<Money>) -> Self {
        let rent_expectations = (0..board.len())
            .map(|i| match board.property(i) {
                Some(p) => {
                    let mut row = vec![p.base_rent, p.monopoly_rent];
                    row.extend(&p.house_rents);
                    row.extend(p.hotel_rent);
                    row
                }
                None => Vec::new(),
            })
            .collect();
        let mortgage_value_belief = (0..board.len())
            .map(|i| board.property(i).map_or(0.0, |p| p.mortgage_value))
            .collect();
        ValueParams {
            k_short: k_short.max(1),
            k_loops: k_loops.max(1),
            cash_min,
            rent_expectations,
            go_increment_belief: board.go_increment,
            mortgage_rate_belief: board.mortgage_interest_rate,
            mortgage_value_belief,
            dice_model: board.dice.clone(),
        }
    }

    /// Believed rent of `sq` at an improvement level; tiers the agent has no
    /// belief about are read off the board.
    pub fn rent(&self, board: &BoardSpec, sq: SquareId, level: u32, monopolized: bool) -> Money {
        self.rent_expectations
            .get(sq)
            .and_then(|row| row.get(tier_index(level, monopolized)))
            .copied()
            .or_else(|| board.property(sq).map(|p| p.rent_at(level, monopolized)))
            .unwrap_or(0.0)
    }

    pub fn mortgage_value(&self, board: &BoardSpec, sq: SquareId) -> Money {
        self.mortgage_value_belief
            .get(sq)
            .copied()
            .or_else(|| board.property(sq).map(|p| p.mortgage_value))
            .unwrap_or(0.0)
    }

    pub fn cash_min(&self, board: &BoardSpec) -> Money {
        self.cash_min.unwrap_or_else(|| board.worst_penalty())
    }
}

fn set_rent(params: &mut ValueParams, sq: SquareId, idx: usize, value: Money) {
    if params.rent_expectations.len() <= sq {
        params.rent_expectations.resize(sq + 1, Vec::new());
    }
    let row = &mut params.rent_expectations[sq];
    if row.len() <= idx {
        row.resize(idx + 1, 0.0);
    }
    row[idx] = value;
}

/// Fold observed attribute values into the beliefs. Dice deviations are
/// handled by [`adapt_dice`], which needs the posterior.
pub fn adapt_params(params: &ValueParams, detections: &[DeviationEvent]) -> ValueParams {
    use crate::board::RentTier;
    let mut out = params.clone();
    for d in detections {
        let (Ok(path), AttrValue::Num(v)) = (AttributePath::parse(&d.path), &d.observed) else {
            continue;
        };
        let v = *v;
        match path {
            AttributePath::Rent { square, tier } => {
                let idx = match tier {
                    RentTier::Base => 0,
                    RentTier::Monopoly => 1,
                    RentTier::Houses(n) => 1 + n as usize,
                    // The hotel is the last entry of the row; a new hotel
                    // tier is appended.
                    RentTier::Hotel => {
                        let len = out.rent_expectations.get(square).map_or(2, Vec::len).max(2);
                        if d.expected.as_num().is_some() {
                            len - 1
                        } else {
                            len
                        }
                    }
                };
                set_rent(&mut out, square, idx, v);
            }
            AttributePath::GoIncrement => out.go_increment_belief = v,
            AttributePath::MortgageRate => out.mortgage_rate_belief = v,
            AttributePath::MortgageValue(sq) => {
                if out.mortgage_value_belief.len() <= sq {
                    out.mortgage_value_belief.resize(sq + 1, 0.0);
                }
                out.mortgage_value_belief[sq] = v;
            }
            _ => {}
        }
    }
    out
}

/// Replace the dice model by the posterior mode.
pub fn adapt_dice(params: &ValueParams, beliefs: &DiceBeliefs) -> Result<ValueParams, NoveltyError> {
    let mut out = params.clone();
    out.dice_model = beliefs.map_model()?;
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::board::tb8_board;

    fn dev(path: &str, expected: f64, observed: f64) -> DeviationEvent {
        DeviationEvent {
            path: path.into(),
            expected: AttrValue::Num(expected),
            observed: AttrValue::Num(observed),
            game_index: 0,
            confidence: 1.0,
        }
    }

    #[test]
    fn rent_deviation_updates_belief() {
        let b = tb8_board();
        let p = ValueParams::from_board(&b, 5, 5, None);
        let q = adapt_params(&p, &[dev("rent.1.base", 10.0, 40.0)]);
        assert_eq!(q.rent_expectations[1][0], 40.0);
        assert_eq!(q.rent(&b, 1, 0, false), 40.0);
        assert_eq!(q.rent(&b, 1, 0, true), 20.0);
    }

    #[test]
    fn go_increment_deviation() {
        let p = ValueParams::from_board(&tb8_board(), 5, 5, None);
        let q = adapt_params(&p, &[dev("go_increment", 200.0, 0.0)]);
        assert_eq!(q.go_increment_belief, 0.0);
    }

    #[test]
    fn no_detections_is_identity() {
        let p = ValueParams::from_board(&tb8_board(), 5, 5, None);
        assert_eq!(adapt_params(&p, &[]), p);
    }

    #[test]
    fn hotel_tier_index() {
        let b = crate::board::standard_board();
        let p = ValueParams::from_board(&b, 5, 5, None);
        let q = adapt_params(&p, &[dev("rent.1.hotel", 250.0, 999.0)]);
        assert_eq!(q.rent(&b, 1, 5, true), 999.0);
        assert_eq!(q.rent_expectations[1].len(), p.rent_expectations[1].len());
    }
}
