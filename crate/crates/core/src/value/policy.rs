use serde::Serialize;

use super::eval::{Evaluator, GuardReport, ValueError};
use super::params::ValueParams;
use crate::engine::{unmortgage_cost, GameState, Move, MoveKind, TradeOffer, TurnPhase};
use crate::{Money, PlayerId, SquareId};

fn price(state: &GameState, sq: SquareId) -> Money {
    state.board.property(sq).map_or(0.0, |p| p.price)
}

fn apply_trade(s: &mut GameState, offer: &TradeOffer) {
    s.ownership[offer.give] = Some(offer.counterparty);
    s.ownership[offer.take] = Some(offer.proposer);
    s.players[offer.proposer].cash -= offer.cash;
    s.players[offer.counterparty].cash += offer.cash;
}

/// Post-decision state: the move's direct effects only, with no dice and no
/// reaction from anyone else. A bid is simulated as winning.
pub fn simulate_move(state: &GameState, me: PlayerId, mv: &Move) -> GameState {
    let mut s = state.clone();
    let board = state.board.clone();
    match &mv.kind {
        MoveKind::BuyProperty { square } => {
            s.players[me].cash -= mv.cost;
            s.ownership[*square] = Some(me);
        }
        MoveKind::Bid { amount } => {
            if let TurnPhase::Auction { square, .. } = state.phase {
                s.players[me].cash -= amount;
                s.ownership[square] = Some(me);
            }
        }
        MoveKind::Improve { square } => {
            s.players[me].cash -= board.property(*square).map_or(mv.cost, |p| p.house_cost);
            s.improvements[*square] += 1;
        }
        MoveKind::SellImprovement { square } => {
            s.players[me].cash += board.property(*square).map_or(0.0, |p| p.house_cost / 2.0);
            s.improvements[*square] = s.improvements[*square].saturating_sub(1);
        }
        MoveKind::Mortgage { square } => {
            s.players[me].cash += board.property(*square).map_or(0.0, |p| p.mortgage_value);
            s.mortgaged[*square] = true;
        }
        MoveKind::Unmortgage { square } => {
            s.players[me].cash -= unmortgage_cost(&board, *square);
            s.mortgaged[*square] = false;
        }
        MoveKind::AcceptTrade => {
            if let TurnPhase::TradeResponse { offer } = &state.phase {
                apply_trade(&mut s, offer);
            }
        }
        MoveKind::ProposeTrade { offer } => apply_trade(&mut s, offer),
        MoveKind::PayJailFine => {
            s.players[me].cash -= board.jail_fine;
            s.players[me].in_jail = false;
            s.players[me].jail_turns = 0;
        }
        MoveKind::DeclineBuy
        | MoveKind::PassBid
        | MoveKind::RejectTrade
        | MoveKind::UseRollForJail
        | MoveKind::EndPhase => {}
    }
    s
}

/// One scored candidate, as written to the decision trace.
#[derive(Clone, Debug, Serialize)]
pub struct Candidate {
    #[serde(rename = "move")]
    pub mv: Move,
    #[serde(rename = "V")]
    pub value: Money,
    pub guards: GuardReport,
}

#[derive(Clone, Debug, Serialize)]
pub struct Decision {
    pub chosen: Move,
    pub candidates: Vec<Candidate>,
    /// No candidate passed the guards; only zero-cost moves were considered.
    pub fallback: bool,
}

fn order_key(m: &Move) -> (u8, SquareId) {
    (m.kind.priority(), m.kind.square().unwrap_or(SquareId::MAX))
}

/// Guard filter, then argmax of V over post-decision states. Ties go to the
/// earlier move in priority order, then the lower square. Trade proposals
/// are left to [`propose_trade`].
pub fn choose_move(
    state: &GameState,
    me: PlayerId,
    legal: &[Move],
    params: &ValueParams,
) -> Result<Decision, ValueError> {
    let ev = Evaluator::new(state, params);
    let guards = ev.guard_inputs(state, me);
    let mut candidates: Vec<&Move> = legal
        .iter()
        .filter(|m| !matches!(m.kind, MoveKind::ProposeTrade { .. }))
        .collect();
    candidates.sort_by_key(|m| order_key(m));
    let mut scored = Vec::with_capacity(candidates.len());
    for m in candidates {
        let g = guards.check(m.cost);
        let value = ev.evaluate(&simulate_move(state, me, m), me)?.total;
        scored.push(Candidate {
            mv: m.clone(),
            value,
            guards: g,
        });
    }
    let fallback = !scored.iter().any(|c| c.guards.passed());
    let pick = |c: &&Candidate| if fallback { c.mv.cost <= 0.0 } else { c.guards.passed() };
    let mut best: Option<&Candidate> = None;
    for c in scored.iter().filter(pick) {
        match best {
            Some(b) if !(c.value > b.value && !crate::approx_eq(c.value, b.value, 1e-9)) => {}
            _ => best = Some(c),
        }
    }
    let chosen = best
        .map(|c| c.mv.clone())
        .or_else(|| legal.iter().min_by_key(|m| (m.cost > 0.0, order_key(m))).cloned())
        .unwrap_or_else(Move::end_phase);
    Ok(Decision {
        chosen,
        candidates: scored,
        fallback,
    })
}

/// Marginal value of owning `square` outright with cash unchanged.
pub fn ownership_gain(
    state: &GameState,
    me: PlayerId,
    square: SquareId,
    params: &ValueParams,
) -> Result<Money, ValueError> {
    let ev = Evaluator::new(state, params);
    let before = ev.evaluate(state, me)?.total;
    let mut s = state.clone();
    s.ownership[square] = Some(me);
    Ok(ev.evaluate(&s, me)?.total - before)
}

/// Bid the minimum while it does not exceed the value of owning the square
/// and the guards hold at that price.
pub fn choose_bid(
    state: &GameState,
    me: PlayerId,
    square: SquareId,
    min_bid: Money,
    params: &ValueParams,
) -> Result<Move, ValueError> {
    let gain = ownership_gain(state, me, square, params)?;
    let bid = Move::new(MoveKind::Bid { amount: min_bid }, min_bid);
    let guards = Evaluator::new(state, params).guard_inputs(state, me).check(min_bid);
    if min_bid <= gain && guards.passed() && min_bid <= state.players[me].cash {
        Ok(bid)
    } else {
        Ok(Move::free(MoveKind::PassBid))
    }
}

fn completes_color(state: &GameState, after: &GameState, who: PlayerId, sq: SquareId) -> bool {
    match state.color_of(sq) {
        Some(c) => !state.has_monopoly(who, c) && after.has_monopoly(who, c),
        None => false,
    }
}

/// Accept iff the swap completes one of our colour sets, completes none
/// for the proposer, and its cash outlay passes the guards.
pub fn accept_trade(state: &GameState, me: PlayerId, offer: &TradeOffer, params: &ValueParams) -> bool {
    let mut after = state.clone();
    apply_trade(&mut after, offer);
    let other = if offer.proposer == me {
        offer.counterparty
    } else {
        offer.proposer
    };
    let received = if offer.proposer == me { offer.take } else { offer.give };
    let handed = if offer.proposer == me { offer.give } else { offer.take };
    completes_color(state, &after, me, received)
        && !completes_color(state, &after, other, handed)
        && Evaluator::new(state, params)
            .guard_inputs(state, me)
            .check(offer.outlay_for(me))
            .passed()
}

/// A swap for the one square missing from a colour we almost hold, paid
/// with our cheapest square that completes nothing for the other side and
/// enough cash to cover the price gap. `skip` filters offers already turned
/// down.
pub fn propose_trade(
    state: &GameState,
    me: PlayerId,
    legal: &[Move],
    params: &ValueParams,
    skip: &dyn Fn(&TradeOffer) -> bool,
) -> Option<Move> {
    let templates: Vec<&TradeOffer> = legal
        .iter()
        .filter_map(|m| match &m.kind {
            MoveKind::ProposeTrade { offer } => Some(offer),
            _ => None,
        })
        .collect();
    if templates.is_empty() {
        return None;
    }
    let guards = Evaluator::new(state, params).guard_inputs(state, me);
    for (color, squares) in state.board.colors() {
        let required = state.board.monopoly_required(color);
        let owned = state.owned_in_color(me, color).count();
        if required == 0 || owned + 1 != required {
            continue;
        }
        let mut wanted: Vec<SquareId> = squares
            .iter()
            .copied()
            .filter(|&s| state.ownership[s].is_some_and(|o| o != me))
            .collect();
        wanted.sort_by(|&a, &b| price(state, a).total_cmp(&price(state, b)).then(a.cmp(&b)));
        for take in wanted {
            let mut offers: Vec<&TradeOffer> = templates
                .iter()
                .copied()
                .filter(|t| t.take == take && state.color_of(t.give) != Some(color.as_str()))
                .collect();
            offers.sort_by(|a, b| {
                price(state, a.give)
                    .total_cmp(&price(state, b.give))
                    .then(a.give.cmp(&b.give))
            });
            for t in offers {
                let offer = TradeOffer {
                    cash: (price(state, take) - price(state, t.give) + 10.0).max(0.0),
                    ..t.clone()
                };
                let mut after = state.clone();
                apply_trade(&mut after, &offer);
                if completes_color(state, &after, offer.counterparty, offer.give) || skip(&offer) {
                    continue;
                }
                if guards.check(offer.cash).passed() {
                    return Some(Move::new(MoveKind::ProposeTrade { offer: offer.clone() }, offer.cash));
                }
            }
        }
    }
    None
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::board::tb8_board;
    use crate::engine::legal_moves;

    fn params(s: &GameState) -> ValueParams {
        ValueParams::from_board(&s.board, 5, 5, None)
    }

    #[test]
    fn simulate_examples() {
        let mut s = GameState::new(tb8_board(), 2, 0);
        let buy = simulate_move(&s, 0, &Move::new(MoveKind::BuyProperty { square: 1 }, 100.0));
        assert_eq!(buy.players[0].cash, 400.0);
        assert_eq!(buy.ownership[1], Some(0));
        let same = simulate_move(&s, 0, &Move::end_phase());
        assert_eq!(same.digest(), s.digest());
        s.ownership[1] = Some(0);
        let m = simulate_move(&s, 0, &Move::free(MoveKind::Mortgage { square: 1 }));
        assert_eq!(m.players[0].cash, 550.0);
        assert!(m.mortgaged[1]);
        assert_eq!(s.players[0].cash, 500.0);
    }

    #[test]
    fn buys_when_it_raises_value() {
        let mut s = GameState::new(tb8_board(), 2, 0);
        s.players[0].position = 1;
        s.phase = TurnPhase::BuyDecision { square: 1 };
        let legal = legal_moves(&s, 0);
        let d = choose_move(&s, 0, &legal, &params(&s)).unwrap();
        assert_eq!(d.chosen.kind, MoveKind::BuyProperty { square: 1 });
        assert!(!d.fallback);
    }

    #[test]
    fn guard_failure_means_decline() {
        let mut s = GameState::new(tb8_board(), 2, 0);
        s.players[0].position = 1;
        s.players[0].cash = 120.0;
        s.phase = TurnPhase::BuyDecision { square: 1 };
        let p = ValueParams {
            cash_min: Some(200.0),
            ..params(&s)
        };
        let d = choose_move(&s, 0, &legal_moves(&s, 0), &p).unwrap();
        assert_eq!(d.chosen.kind, MoveKind::DeclineBuy);
    }

    #[test]
    fn fallback_picks_zero_cost() {
        let mut s = GameState::new(tb8_board(), 2, 0);
        s.ownership[1] = Some(0);
        s.players[0].cash = 0.0;
        s.phase = TurnPhase::PostRoll;
        let p = ValueParams {
            cash_min: Some(10_000.0),
            ..params(&s)
        };
        let legal = legal_moves(&s, 0);
        let d = choose_move(&s, 0, &legal, &p).unwrap();
        assert!(d.fallback);
        assert_eq!(d.chosen.cost, 0.0);
    }

    #[test]
    fn accepts_only_completing_trades() {
        let mut s = GameState::new(tb8_board(), 2, 0);
        s.ownership[1] = Some(1);
        s.ownership[4] = Some(1);
        s.ownership[2] = Some(0);
        let p = params(&s);
        let offer = TradeOffer {
            proposer: 0,
            counterparty: 1,
            give: 2,
            take: 4,
            cash: 0.0,
        };
        // Player 1 would complete red and give up blue: nothing completes
        // for player 0.
        assert!(accept_trade(&s, 1, &offer, &p));
        s.ownership[6] = Some(0);
        assert!(!accept_trade(&s, 1, &offer, &p));
    }

    #[test]
    fn proposes_for_missing_square() {
        let mut s = GameState::new(tb8_board(), 2, 0);
        s.ownership[1] = Some(0);
        s.ownership[4] = Some(0);
        s.ownership[2] = Some(1);
        s.phase = TurnPhase::OutOfTurn {
            actor: 0,
            trade_used: false,
        };
        let p = ValueParams {
            cash_min: Some(0.0),
            ..params(&s)
        };
        let legal = legal_moves(&s, 0);
        let mv = propose_trade(&s, 0, &legal, &p, &|_| false).unwrap();
        let MoveKind::ProposeTrade { offer } = &mv.kind else {
            panic!()
        };
        assert_eq!((offer.give, offer.take, offer.cash), (4, 2, 0.0));
        assert!(propose_trade(&s, 0, &legal, &p, &|_| true).is_none());
    }
}
