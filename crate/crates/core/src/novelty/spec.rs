use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use super::NoveltyError;
use crate::board::{BoardSpec, Deck, SquareKind};
use crate::{Money, SquareId};

#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub enum NoveltyClass {
    /// New classes of objects or rules: dice structure, set sizes.
    CN,
    /// Attribute values.
    AN,
    /// Representation: square order and colour membership.
    RN,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Difficulty {
    Easy,
    Medium,
    Hard,
}

impl std::fmt::Display for NoveltyClass {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        write!(f, "{self:?}")
    }
}

impl std::fmt::Display for Difficulty {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        let s = match self {
            Difficulty::Easy => "easy",
            Difficulty::Medium => "medium",
            Difficulty::Hard => "hard",
        };
        f.write_str(s)
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "type", rename_all = "snake_case")]
pub enum NoveltyPayload {
    /// Overwrite one numeric attribute, e.g. `rent.1.base`.
    SetAttribute {
        path: String,
        value: f64,
    },
    /// New board order: square `i` becomes old square `order[i]`.
    Permute {
        order: Vec<SquareId>,
    },
    Swap {
        a: SquareId,
        b: SquareId,
    },
    Recolor {
        square: SquareId,
        color: String,
    },
    /// Number of squares of a colour needed for a monopoly.
    SetSize {
        color: String,
        required: usize,
    },
    AddDie {
        faces: Vec<i64>,
        #[serde(default, skip_serializing_if = "Option::is_none")]
        weights: Option<Vec<f64>>,
    },
    RemoveDie {
        die: usize,
    },
    SetDieFaces {
        die: usize,
        faces: Vec<i64>,
    },
    SetDieWeights {
        die: usize,
        weights: Vec<f64>,
    },
}

impl NoveltyPayload {
    pub fn class(&self) -> NoveltyClass {
        match self {
            NoveltyPayload::SetAttribute { .. } => NoveltyClass::AN,
            NoveltyPayload::Permute { .. } | NoveltyPayload::Swap { .. } | NoveltyPayload::Recolor { .. } => {
                NoveltyClass::RN
            }
            _ => NoveltyClass::CN,
        }
    }
}

/// A single persistent rule change, active from `trigger_game` onward.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct NoveltySpec {
    pub class: NoveltyClass,
    pub difficulty: Difficulty,
    pub trigger_game: usize,
    pub payload: NoveltyPayload,
}

impl NoveltySpec {
    pub fn validate(&self, games_per_trial: usize) -> Result<(), NoveltyError> {
        if self.payload.class() != self.class {
            return Err(NoveltyError::Incompatible(format!(
                "payload is a {} change but class is {}",
                self.payload.class(),
                self.class
            )));
        }
        if self.trigger_game >= games_per_trial {
            return Err(NoveltyError::Incompatible(format!(
                "trigger_game {} must be below games_per_trial {games_per_trial}",
                self.trigger_game
            )));
        }
        Ok(())
    }

    pub fn label(&self) -> String {
        format!("{}-{}", self.class, self.difficulty)
    }
}

/// Draw a novelty of the given class and difficulty with a trigger in
/// `1..games`.
///
/// | class | easy | medium | hard |
/// |---|---|---|---|
/// | AN | street base rent ×4 | go_increment or a tax changed | mortgage rate or a card amount |
/// | RN | swap two streets of different colours | recolour a street | permutation fixing Go |
/// | CN | colour set size −1 | extra face on die 0 | die 0 weights skewed |
pub fn generate_novelty(
    board: &BoardSpec,
    class: NoveltyClass,
    difficulty: Difficulty,
    games: usize,
    seed: u64,
) -> Result<NoveltySpec, NoveltyError> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let trigger_game = if games > 1 { rng.gen_range(1..games) } else { 0 };
    let streets: Vec<SquareId> = (0..board.len())
        .filter(|&i| board.property(i).is_some_and(|p| p.is_buildable()))
        .collect();
    let pick = |rng: &mut ChaCha8Rng, items: &[SquareId]| -> Result<SquareId, NoveltyError> {
        items
            .choose(rng)
            .copied()
            .ok_or_else(|| NoveltyError::Incompatible("board has no streets".into()))
    };
    use Difficulty::*;
    use NoveltyClass::*;
    let payload = match (class, difficulty) {
        (AN, Easy) => {
            let sq = pick(&mut rng, &streets)?;
            let base = board.property(sq).map_or(0.0, |p| p.base_rent);
            NoveltyPayload::SetAttribute {
                path: format!("rent.{sq}.base"),
                value: (base * 4.0).max(10.0),
            }
        }
        (AN, Medium) => {
            let taxes: Vec<SquareId> = (0..board.len())
                .filter(|&i| matches!(board.squares[i].kind, SquareKind::Tax { .. }))
                .collect();
            if taxes.is_empty() || rng.gen_bool(0.5) {
                let value = **[0.0, 100.0, 300.0, 400.0]
                    .iter()
                    .filter(|&&v| v != board.go_increment)
                    .collect::<Vec<_>>()
                    .choose(&mut rng)
                    .expect("non-empty");
                NoveltyPayload::SetAttribute {
                    path: "go_increment".into(),
                    value,
                }
            } else {
                let sq = *taxes.choose(&mut rng).expect("non-empty");
                let SquareKind::Tax { amount } = board.squares[sq].kind else {
                    unreachable!()
                };
                NoveltyPayload::SetAttribute {
                    path: format!("tax.{sq}"),
                    value: amount * 2.0 + 50.0,
                }
            }
        }
        (AN, Hard) => {
            let cards: Vec<(Deck, usize, Money)> = [Deck::Chance, Deck::Community]
                .into_iter()
                .flat_map(|d| {
                    board
                        .deck(d)
                        .iter()
                        .enumerate()
                        .filter_map(move |(i, c)| match c.effect {
                            crate::board::CardEffect::Pay { amount } | crate::board::CardEffect::Receive { amount } => {
                                Some((d, i, amount))
                            }
                            _ => None,
                        })
                })
                .collect();
            if cards.is_empty() || rng.gen_bool(0.5) {
                NoveltyPayload::SetAttribute {
                    path: "mortgage_interest_rate".into(),
                    value: board.mortgage_interest_rate + 0.2,
                }
            } else {
                let (deck, i, amount) = *cards.choose(&mut rng).expect("non-empty");
                let deck_name = match deck {
                    Deck::Chance => "chance",
                    Deck::Community => "community",
                };
                NoveltyPayload::SetAttribute {
                    path: format!("card.{deck_name}.{i}.amount"),
                    value: amount * 2.0 + 50.0,
                }
            }
        }
        (RN, Easy) => {
            let a = pick(&mut rng, &streets)?;
            let color = board.property(a).map(|p| p.color.clone());
            let others: Vec<SquareId> = streets
                .iter()
                .copied()
                .filter(|&s| board.property(s).map(|p| p.color.clone()) != color)
                .collect();
            let b = pick(&mut rng, &others)?;
            NoveltyPayload::Swap { a, b }
        }
        (RN, Medium) => {
            let square = pick(&mut rng, &streets)?;
            let own = board.property(square).map(|p| p.color.clone()).unwrap_or_default();
            let colors: Vec<&String> = board
                .colors()
                .keys()
                .filter(|c| **c != own && board.color_squares(c).iter().all(|&s| streets.contains(&s)))
                .collect();
            let color = colors
                .choose(&mut rng)
                .map(|c| c.to_string())
                .ok_or_else(|| NoveltyError::Incompatible("no other colour to move to".into()))?;
            NoveltyPayload::Recolor { square, color }
        }
        (RN, Hard) => {
            let mut rest: Vec<SquareId> = (1..board.len()).collect();
            rest.shuffle(&mut rng);
            let mut order = vec![0];
            order.extend(rest);
            NoveltyPayload::Permute { order }
        }
        (CN, Easy) => {
            let colors: Vec<&String> = board
                .colors()
                .keys()
                .filter(|c| board.monopoly_required(c) >= 2)
                .collect();
            let color = colors
                .choose(&mut rng)
                .map(|c| c.to_string())
                .ok_or_else(|| NoveltyError::Incompatible("no colour with two or more squares".into()))?;
            let required = board.monopoly_required(&color) - 1;
            NoveltyPayload::SetSize { color, required }
        }
        (CN, Medium) => {
            let die = rng.gen_range(0..board.dice.dice.len());
            let mut faces = board.dice.dice[die].faces.clone();
            faces.push(faces.iter().max().copied().unwrap_or(0) + 1);
            NoveltyPayload::SetDieFaces { die, faces }
        }
        (CN, Hard) => {
            let die = rng.gen_range(0..board.dice.dice.len());
            let k = board.dice.dice[die].faces.len();
            let heavy = rng.gen_range(0..k);
            let weights = if k == 1 {
                vec![1.0]
            } else {
                let light = 0.4 / (k - 1) as f64;
                let mut w = vec![light; k];
                w[heavy] = 1.0 - light * (k - 1) as f64;
                w
            };
            NoveltyPayload::SetDieWeights { die, weights }
        }
    };
    Ok(NoveltySpec {
        class,
        difficulty,
        trigger_game,
        payload,
    })
}
