use serde::Serialize;
use thiserror::Error;

use super::params::ValueParams;
use crate::board::{BoardSpec, DiceSpec};
use crate::engine::GameState;
use crate::{Money, PlayerId, SquareId};

#[derive(Debug, Error, PartialEq)]
pub enum ValueError {
    #[error("expected dice sum is zero; long-term rent is undefined")]
    DegenerateDice,
}

/// `a ≥ b` up to a relative tolerance, so comparisons survive rescaling.
pub(crate) fn geq(a: f64, b: f64) -> bool {
    a >= b - 1e-9 * a.abs().max(b.abs())
}

/// Landing probabilities of one player for turns `1..=k`.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct LandingDistribution {
    /// `rows[t - 1][square]` is the probability of standing on `square`
    /// after `t` rolls.
    pub rows: Vec<Vec<f64>>,
}

impl LandingDistribution {
    pub fn turn(&self, t: usize) -> &[f64] {
        &self.rows[t - 1]
    }
}

fn landing_rows(n: usize, start: SquareId, k: usize, sums: &[(i64, f64)]) -> Vec<Vec<f64>> {
    let mut rows = Vec::with_capacity(k);
    let mut cur = vec![0.0; n];
    cur[start % n] = 1.0;
    for _ in 0..k {
        let mut next = vec![0.0; n];
        for (i, &p) in cur.iter().enumerate() {
            if p == 0.0 {
                continue;
            }
            for &(s, q) in sums {
                next[(i + s.rem_euclid(n as i64) as usize) % n] += p * q;
            }
        }
        rows.push(next.clone());
        cur = next;
    }
    rows
}

/// k-step dice-sum chain on the cyclic board from the player's square.
/// Cards and jail are ignored.
pub fn landing_prob(state: &GameState, player: PlayerId, k: usize, dice: &DiceSpec) -> LandingDistribution {
    LandingDistribution {
        rows: landing_rows(
            state.board.len(),
            state.players[player].position,
            k,
            &dice.sum_distribution(),
        ),
    }
}

/// The four terms of `V(s)` and their sum.
#[derive(Clone, Copy, Debug, Default, PartialEq, Serialize)]
pub struct ValueBreakdown {
    pub assets: Money,
    pub short_term: Money,
    pub long_term: Money,
    pub monopoly: Money,
    pub total: Money,
}

/// Evaluation context for one decision: the landing distributions of every
/// player are computed once and reused for all candidate states, which
/// share positions.
pub struct Evaluator<'p> {
    params: &'p ValueParams,
    rows: Vec<Vec<Vec<f64>>>,
    min_sum: i64,
    max_sum: i64,
    mean_sum: f64,
}

impl<'p> Evaluator<'p> {
    pub fn new(state: &GameState, params: &'p ValueParams) -> Self {
        let sums = params.dice_model.sum_distribution();
        let k = params.k_short.max(1) as usize;
        let n = state.board.len();
        let rows = state
            .players
            .iter()
            .map(|p| {
                if p.bankrupt {
                    Vec::new()
                } else {
                    landing_rows(n, p.position, k, &sums)
                }
            })
            .collect();
        Evaluator {
            params,
            rows,
            min_sum: params.dice_model.min_sum(),
            max_sum: params.dice_model.max_sum(),
            mean_sum: params.dice_model.mean_sum(),
        }
    }

    pub fn params(&self) -> &ValueParams {
        self.params
    }

    /// Believed rent a visitor would pay on each square right now.
    fn rents(&self, state: &GameState) -> Vec<Money> {
        (0..state.board.len()).map(|sq| self.square_rent(state, sq)).collect()
    }

    fn square_rent(&self, state: &GameState, sq: SquareId) -> Money {
        match state.ownership[sq] {
            Some(_) if !state.mortgaged[sq] => {
                self.params
                    .rent(&state.board, sq, state.improvements[sq], state.square_monopolized(sq))
            }
            _ => 0.0,
        }
    }

    fn opponents(state: &GameState, me: PlayerId) -> impl Iterator<Item = PlayerId> + '_ {
        state.solvent_players().filter(move |&g| g != me)
    }

    /// `M_assets`: list price of unmortgaged holdings plus improvements at cost.
    pub fn assets(&self, state: &GameState, me: PlayerId) -> Money {
        state
            .owned_by(me)
            .filter_map(|sq| {
                let p = state.board.property(sq)?;
                let price = if state.mortgaged[sq] { 0.0 } else { p.price };
                Some(price + state.improvements[sq] as Money * p.house_cost)
            })
            .sum()
    }

    /// `R_s` over turns `1..=k` and its income part (the first sum alone).
    fn short_term_parts(&self, state: &GameState, me: PlayerId, k: usize, rents: &[Money]) -> (Money, Money) {
        let k = k.min(self.rows[me].len());
        let mut income = 0.0;
        let mut outgo = 0.0;
        for g in Self::opponents(state, me) {
            for t in 0..k {
                let theirs = &self.rows[g][t];
                let mine = &self.rows[me][t];
                for (sq, owner) in state.ownership.iter().enumerate() {
                    match owner {
                        Some(o) if *o == me => income += theirs[sq] * rents[sq],
                        Some(o) if *o == g => outgo += mine[sq] * rents[sq],
                        _ => {}
                    }
                }
            }
        }
        (income - outgo, income)
    }

    pub fn short_term(&self, state: &GameState, me: PlayerId, k: usize) -> Money {
        self.short_term_parts(state, me, k, &self.rents(state)).0
    }

    /// `R_l` with per-loop landing rate `1 / E[dice sum]`.
    pub fn long_term(&self, state: &GameState, me: PlayerId) -> Result<Money, ValueError> {
        self.long_term_with(state, me, &self.rents(state))
    }

    fn long_term_with(&self, state: &GameState, me: PlayerId, rents: &[Money]) -> Result<Money, ValueError> {
        if self.mean_sum <= 0.0 {
            return Err(ValueError::DegenerateDice);
        }
        let q = 1.0 / self.mean_sum;
        let mut total = 0.0;
        for g in Self::opponents(state, me) {
            for (sq, owner) in state.ownership.iter().enumerate() {
                match owner {
                    Some(o) if *o == me => total += q * rents[sq],
                    Some(o) if *o == g => total -= q * rents[sq],
                    _ => {}
                }
            }
        }
        Ok(self.params.k_loops as Money * total)
    }

    /// `M_monopoly` given `R_l`: the best scaled rent any held colour could
    /// reach if the expected funds were spent completing and building it.
    pub fn monopoly(&self, state: &GameState, me: PlayerId, long_term: Money) -> Money {
        let board: &BoardSpec = &state.board;
        let funds = state.players[me].cash + self.params.k_loops as Money * self.params.go_increment_belief + long_term;
        let rate = self.params.mortgage_rate_belief;
        let mut best: Option<Money> = None;
        for (color, squares) in board.colors() {
            let owned: Vec<SquareId> = squares
                .iter()
                .copied()
                .filter(|&s| state.ownership[s] == Some(me))
                .collect();
            if owned.is_empty() {
                continue;
            }
            let required = board.monopoly_required(color);
            let mut budget = funds;
            for &s in owned.iter().filter(|&&s| state.mortgaged[s]) {
                budget -= self.params.mortgage_value(board, s) * (1.0 + rate);
            }
            let mut others: Vec<SquareId> = squares.iter().copied().filter(|s| !owned.contains(s)).collect();
            others.sort_by(|&a, &b| price(board, a).total_cmp(&price(board, b)).then(a.cmp(&b)));
            let mut held = owned.clone();
            for s in others {
                let p = price(board, s);
                if geq(budget, p) {
                    budget -= p;
                    held.push(s);
                }
            }
            held.sort_unstable();
            let monopolized = held.len() >= required;
            let mut levels: Vec<u32> = held.iter().map(|&s| state.improvements[s]).collect();
            if monopolized {
                while let Some(min) = levels
                    .iter()
                    .zip(&held)
                    .filter(|(l, &s)| **l < max_level(board, s))
                    .map(|(l, _)| *l)
                    .min()
                {
                    let next = (0..held.len())
                        .filter(|&i| levels[i] == min && levels[i] < max_level(board, held[i]))
                        .min_by(|&i, &j| {
                            house_cost(board, held[i])
                                .total_cmp(&house_cost(board, held[j]))
                                .then(i.cmp(&j))
                        })
                        .expect("some square is below its cap");
                    let cost = house_cost(board, held[next]);
                    if !geq(budget, cost) {
                        break;
                    }
                    budget -= cost;
                    levels[next] += 1;
                }
            }
            let r_c: Money = held
                .iter()
                .zip(&levels)
                .map(|(&s, &l)| self.params.rent(board, s, l, monopolized))
                .sum();
            let missing = required.saturating_sub(owned.len()) as i32;
            let scaled = r_c / 2f64.powi(missing);
            best = Some(best.map_or(scaled, |b: Money| b.max(scaled)));
        }
        best.unwrap_or(0.0)
    }

    pub fn evaluate(&self, state: &GameState, me: PlayerId) -> Result<ValueBreakdown, ValueError> {
        let rents = self.rents(state);
        let assets = self.assets(state, me);
        let (short_term, _) = self.short_term_parts(state, me, self.params.k_short as usize, &rents);
        let long_term = self.long_term_with(state, me, &rents)?;
        let monopoly = self.monopoly(state, me, long_term);
        Ok(ValueBreakdown {
            assets,
            short_term,
            long_term,
            monopoly,
            total: assets + short_term + long_term + monopoly,
        })
    }

    /// Quantities the bankruptcy guards need, all taken from `state`.
    pub fn guard_inputs(&self, state: &GameState, me: PlayerId) -> GuardInputs {
        let rents = self.rents(state);
        let (r_next, r_owed) = self.short_term_parts(state, me, 1, &rents);
        let board = &state.board;
        let worth_scaled = state
            .owned_by(me)
            .filter(|&s| !state.mortgaged[s])
            .map(|s| self.params.mortgage_value(board, s) + state.improvements[s] as Money * house_cost(board, s) / 2.0)
            .sum();
        let n = board.len() as i64;
        let pos = state.players[me].position as i64;
        let r_worst = (self.min_sum..=self.max_sum)
            .map(|s| (pos + s).rem_euclid(n) as usize)
            .filter(|&sq| state.ownership[sq].is_some_and(|o| o != me))
            .map(|sq| rents[sq])
            .fold(0.0, f64::max);
        GuardInputs {
            cash: state.players[me].cash,
            r_next,
            r_owed,
            worth_scaled,
            r_worst,
            cash_min: self.params.cash_min(board),
        }
    }
}

fn price(board: &BoardSpec, sq: SquareId) -> Money {
    board.property(sq).map_or(0.0, |p| p.price)
}

fn house_cost(board: &BoardSpec, sq: SquareId) -> Money {
    board.property(sq).map_or(0.0, |p| p.house_cost)
}

fn max_level(board: &BoardSpec, sq: SquareId) -> u32 {
    board.property(sq).map_or(0, |p| p.max_level())
}

/// Pre-move quantities of both bankruptcy guards.
#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct GuardInputs {
    pub cash: Money,
    pub r_next: Money,
    pub r_owed: Money,
    pub worth_scaled: Money,
    pub r_worst: Money,
    pub cash_min: Money,
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct GuardReport {
    pub condition1: bool,
    pub condition2: bool,
}

impl GuardReport {
    pub fn passed(&self) -> bool {
        self.condition1 && self.condition2
    }
}

impl GuardInputs {
    /// `cash + R_next − C(m) ≥ cash_min` and
    /// `cash + R_owed + worth_scaled − C(m) − R_worst > 0`.
    pub fn check(&self, cost: Money) -> GuardReport {
        let c1 = geq(self.cash + self.r_next - cost, self.cash_min);
        let lhs = self.cash + self.r_owed + self.worth_scaled;
        let rhs = cost + self.r_worst;
        let c2 = lhs > rhs && !crate::approx_eq(lhs, rhs, 1e-9);
        GuardReport {
            condition1: c1,
            condition2: c2,
        }
    }
}

pub fn assets_value(state: &GameState, me: PlayerId) -> Money {
    let params = ValueParams::from_board(&state.board, 1, 1, None);
    Evaluator::new(state, &params).assets(state, me)
}

pub fn short_term_gain(state: &GameState, me: PlayerId, k: u32, params: &ValueParams) -> Money {
    let p = ValueParams {
        k_short: k.max(1),
        ..params.clone()
    };
    Evaluator::new(state, &p).short_term(state, me, k as usize)
}

pub fn long_term_gain(state: &GameState, me: PlayerId, params: &ValueParams) -> Result<Money, ValueError> {
    Evaluator::new(state, params).long_term(state, me)
}

pub fn monopoly_gain(state: &GameState, me: PlayerId, params: &ValueParams) -> Result<Money, ValueError> {
    let ev = Evaluator::new(state, params);
    let r_l = ev.long_term(state, me)?;
    Ok(ev.monopoly(state, me, r_l))
}

pub fn evaluate_state(state: &GameState, me: PlayerId, params: &ValueParams) -> Result<ValueBreakdown, ValueError> {
    Evaluator::new(state, params).evaluate(state, me)
}
