use super::path::AttributePath;
use super::spec::{NoveltyPayload, NoveltySpec};
use super::NoveltyError;
use crate::board::{validate_novelty_compat, BoardSpec, CardEffect, Die};
use crate::SquareId;

/// Apply a novelty to a copy of `board`. The result satisfies the structural
/// board invariants; attribute edits may break rent-schedule ordering on
/// purpose.
pub fn inject_novelty(board: &BoardSpec, novelty: &NoveltySpec) -> Result<BoardSpec, NoveltyError> {
    validate_novelty_compat(board, novelty)?;
    let mut b = board.clone();
    match &novelty.payload {
        NoveltyPayload::SetAttribute { path, value } => AttributePath::parse(path)?.set(&mut b, *value)?,
        NoveltyPayload::Permute { order } => {
            let old = std::mem::take(&mut b.squares);
            b.squares = order.iter().map(|&i| old[i].clone()).collect();
            let mut new_index = vec![0; order.len()];
            for (new, &old) in order.iter().enumerate() {
                new_index[old] = new;
            }
            remap_card_targets(&mut b, |s| new_index[s]);
        }
        NoveltyPayload::Swap { a, b: c } => {
            let (a, c) = (*a, *c);
            b.squares.swap(a, c);
            remap_card_targets(&mut b, |s| {
                if s == a {
                    c
                } else if s == c {
                    a
                } else {
                    s
                }
            });
        }
        NoveltyPayload::Recolor { square, color } => {
            if color.is_empty() {
                return Err(NoveltyError::Incompatible("empty colour".into()));
            }
            if let Some(p) = b.squares[*square].property_mut() {
                p.color = color.clone();
            }
        }
        NoveltyPayload::SetSize { color, required } => {
            b.monopoly_size.insert(color.clone(), *required);
        }
        NoveltyPayload::AddDie { faces, weights } => {
            let die = match weights {
                Some(w) => Die {
                    faces: faces.clone(),
                    weights: w.clone(),
                },
                None => Die::uniform(faces.clone()),
            };
            b.dice.dice.push(die);
        }
        NoveltyPayload::RemoveDie { die } => {
            if b.dice.dice.len() < 2 {
                return Err(NoveltyError::Incompatible("cannot remove the only die".into()));
            }
            b.dice.dice.remove(*die);
        }
        NoveltyPayload::SetDieFaces { die, faces } => b.dice.dice[*die] = Die::uniform(faces.clone()),
        NoveltyPayload::SetDieWeights { die, weights } => {
            if weights.len() != b.dice.dice[*die].faces.len() {
                return Err(NoveltyError::Incompatible(format!(
                    "die {die} has {} faces but {} weights were given",
                    b.dice.dice[*die].faces.len(),
                    weights.len()
                )));
            }
            b.dice.dice[*die].weights = weights.clone();
        }
    }
    b.reindex();
    // Colours emptied by a recolour lose their size override; shrunken ones are clamped.
    let sizes: Vec<(String, usize)> = std::mem::take(&mut b.monopoly_size).into_iter().collect();
    for (color, required) in sizes {
        let have = b.color_squares(&color).len();
        if have > 0 {
            b.monopoly_size.insert(color, required.min(have));
        }
    }
    b.validate_structure()?;
    Ok(b)
}

fn remap_card_targets(board: &mut BoardSpec, f: impl Fn(SquareId) -> SquareId) {
    for card in board.chance_deck.iter_mut().chain(board.community_deck.iter_mut()) {
        if let CardEffect::MoveTo { square } = &mut card.effect {
            *square = f(*square);
        }
    }
}
