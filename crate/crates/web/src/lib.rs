//! wasm-bindgen bindings behind the browser demo. Each export takes and
//! returns JSON strings; the `*_json` functions hold the logic so native
//! tests can call them without a JS host.

use monolab::board::{builtin_board, load_board_spec, BoardSpec, DiceSpec, Die};
use monolab::engine::GameState;
use monolab::novelty::{dice_map_estimate, kl_divergence, update_dice_beliefs, DiceBeliefs};
use monolab::value::{evaluate_state, landing_prob, ValueBreakdown, ValueParams};
use serde::{Deserialize, Serialize};
use wasm_bindgen::prelude::*;

const MAX_TURNS: usize = 20;

fn resolve_board(board: &str) -> Result<BoardSpec, String> {
    if let Some(b) = builtin_board(board.trim()) {
        return Ok(b);
    }
    load_board_spec(board.as_bytes()).map_err(|e| format!("board: {e}"))
}

#[derive(Serialize)]
pub struct Heatmap {
    pub names: Vec<String>,
    pub colors: Vec<Option<String>>,
    /// `rows[t]` holds the landing probabilities after `t + 1` rolls.
    pub rows: Vec<Vec<f64>>,
    /// Sum over turns: expected number of visits per square.
    pub visits: Vec<f64>,
}

pub fn landing_heatmap_json(board: &str, start: usize, turns: usize) -> Result<String, String> {
    let board = resolve_board(board)?;
    if start >= board.len() {
        return Err(format!("start square {start} is off a {}-square board", board.len()));
    }
    if turns == 0 || turns > MAX_TURNS {
        return Err(format!("turns must be in 1..={MAX_TURNS}"));
    }
    let mut state = GameState::new(board.clone(), 1, 0);
    state.players[0].position = start;
    let rows = landing_prob(&state, 0, turns, &board.dice).rows;
    let mut visits = vec![0.0; board.len()];
    for row in &rows {
        for (v, p) in visits.iter_mut().zip(row) {
            *v += p;
        }
    }
    let out = Heatmap {
        names: board.squares.iter().map(|s| s.name.clone()).collect(),
        colors: (0..board.len())
            .map(|i| board.property(i).map(|p| p.color.clone()))
            .collect(),
        rows,
        visits,
    };
    Ok(serde_json::to_string(&out).expect("heatmap serializes"))
}

#[derive(Deserialize)]
struct PlayerInput {
    position: usize,
    cash: f64,
}

#[derive(Deserialize)]
struct HoldingInput {
    square: usize,
    owner: usize,
    #[serde(default)]
    level: u32,
    #[serde(default)]
    mortgaged: bool,
}

#[derive(Deserialize)]
struct PositionInput {
    players: Vec<PlayerInput>,
    #[serde(default)]
    holdings: Vec<HoldingInput>,
    #[serde(default = "default_k_short")]
    k_short: u32,
    #[serde(default = "default_k_loops")]
    k_loops: u32,
}

fn default_k_short() -> u32 {
    5
}

fn default_k_loops() -> u32 {
    5
}

#[derive(Serialize)]
pub struct PlayerValue {
    pub player: usize,
    #[serde(flatten)]
    pub value: ValueBreakdown,
}

pub fn evaluate_position_json(board: &str, position: &str) -> Result<String, String> {
    let board = resolve_board(board)?;
    let input: PositionInput = serde_json::from_str(position).map_err(|e| format!("position: {e}"))?;
    if !(2..=8).contains(&input.players.len()) {
        return Err("position needs 2 to 8 players".into());
    }
    let n = board.len();
    let mut s = GameState::new(board.clone(), input.players.len(), 0);
    for (p, pi) in s.players.iter_mut().zip(&input.players) {
        if pi.position >= n {
            return Err(format!("player {} stands on square {} of {n}", p.id, pi.position));
        }
        p.position = pi.position;
        p.cash = pi.cash;
    }
    for h in &input.holdings {
        let prop = board
            .property(h.square)
            .ok_or_else(|| format!("square {} cannot be owned", h.square))?;
        if h.owner >= input.players.len() {
            return Err(format!("no player {}", h.owner));
        }
        let top = prop.house_rents.len() as u32 + u32::from(prop.hotel_rent.is_some());
        if h.level > top {
            return Err(format!("square {} has at most {top} improvements", h.square));
        }
        s.ownership[h.square] = Some(h.owner);
        s.improvements[h.square] = h.level;
        s.mortgaged[h.square] = h.mortgaged;
    }
    for h in input.holdings.iter().filter(|h| h.level > 0) {
        if !s.monopoly_at(h.owner, h.square) {
            return Err(format!("square {} is improved without a full colour set", h.square));
        }
    }
    let params = ValueParams::from_board(&board, input.k_short.max(1), input.k_loops.max(1), None);
    let values = (0..input.players.len())
        .map(|p| {
            evaluate_state(&s, p, &params)
                .map(|value| PlayerValue { player: p, value })
                .map_err(|e| e.to_string())
        })
        .collect::<Result<Vec<_>, _>>()?;
    Ok(serde_json::to_string(&values).expect("values serialize"))
}

#[derive(Serialize)]
pub struct Posterior {
    pub faces: Vec<i64>,
    pub alpha: Vec<f64>,
    pub map: Vec<f64>,
    pub expected: Vec<f64>,
    /// KL(MAP ‖ expected) in nats over the union of faces; `None` when
    /// the MAP puts mass on a face the expected die lacks.
    pub kl: Option<f64>,
    pub rolls: usize,
    pub unseen_faces: Vec<i64>,
}

/// Posterior for a single die with prior `α = 2` per expected face, fed
/// one observed face per roll. `weights` are relative and get normalised.
pub fn dice_posterior_json(faces: &str, weights: &str, rolls: &str) -> Result<String, String> {
    let faces: Vec<i64> = serde_json::from_str(faces).map_err(|e| format!("faces: {e}"))?;
    let mut weights: Vec<f64> = serde_json::from_str(weights).map_err(|e| format!("weights: {e}"))?;
    let total: f64 = weights.iter().sum();
    if total > 0.0 {
        weights.iter_mut().for_each(|w| *w /= total);
    }
    let rolls: Vec<i64> = serde_json::from_str(rolls).map_err(|e| format!("rolls: {e}"))?;
    let die = Die { faces, weights };
    let spec = DiceSpec {
        dice: vec![die.clone()],
    };
    spec.validate().map_err(|e| e.to_string())?;
    let mut beliefs = DiceBeliefs::new(&spec, 0.0);
    for &r in &rolls {
        update_dice_beliefs(&mut beliefs, &[r]);
    }
    let map = dice_map_estimate(&beliefs, 0).map_err(|e| e.to_string())?;
    let belief = &beliefs.dice[0];
    let expected: Vec<f64> = belief
        .faces
        .iter()
        .map(|f| die.faces.iter().position(|g| g == f).map_or(0.0, |i| die.weights[i]))
        .collect();
    let out = Posterior {
        kl: Some(kl_divergence(&map, &expected)).filter(|k| k.is_finite()),
        faces: belief.faces.clone(),
        alpha: belief.alpha.clone(),
        map,
        expected,
        rolls: rolls.len(),
        unseen_faces: beliefs.extended.iter().map(|&(_, f)| f).collect(),
    };
    Ok(serde_json::to_string(&out).expect("posterior serializes"))
}

fn js(r: Result<String, String>) -> Result<String, JsValue> {
    r.map_err(|e| JsValue::from_str(&e))
}

/// Landing probabilities for the next `turns` rolls from `start`.
/// `board` is `"standard"`, `"tb8"` or a board JSON document.
#[wasm_bindgen]
pub fn landing_heatmap(board: &str, start: usize, turns: usize) -> Result<String, JsValue> {
    js(landing_heatmap_json(board, start, turns))
}

/// Value breakdown for every player of a hand-built position.
#[wasm_bindgen]
pub fn evaluate_position(board: &str, position: &str) -> Result<String, JsValue> {
    js(evaluate_position_json(board, position))
}

#[wasm_bindgen]
pub fn dice_posterior(faces: &str, weights: &str, rolls: &str) -> Result<String, JsValue> {
    js(dice_posterior_json(faces, weights, rolls))
}
