//! Rule primitives operating directly on a [`GameState`].
//!
//! Each public operation returns the events it produced. Cash only ever
//! changes through [`transfer`], which records a `Transfer` event, so the
//! event log alone reproduces every player's balance.

use rand::distributions::{Distribution, WeightedIndex};
use thiserror::Error;

use super::events::{EventKind, GameEvent, Party, TransferReason};
use super::moves::{Move, MoveKind, TradeOffer};
use super::state::{GameState, TurnPhase};
use crate::board::{BoardError, BoardSpec, CardEffect, Deck, SquareKind};
use crate::{Money, PlayerId, SquareId};

pub const AUCTION_START: Money = 10.0;
pub const AUCTION_INCREMENT: Money = 10.0;
/// Failed doubles attempts allowed before the fine becomes mandatory.
pub const JAIL_ATTEMPTS: u32 = 3;
/// Card moves may chain into further card squares at most this deep.
const MAX_LANDING_DEPTH: u32 = 3;

#[derive(Debug, Error)]
pub enum EngineError {
    #[error("player {player} attempted illegal move {mv:?}")]
    IllegalMove { player: PlayerId, mv: Move },
    #[error("invalid game setup: {0}")]
    Setup(String),
    #[error(transparent)]
    Board(#[from] BoardError),
    #[error(transparent)]
    Novelty(#[from] crate::novelty::NoveltyError),
}

/// What the engine needs after a landing has been resolved.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum LandingOutcome {
    Done,
    BuyDecision(SquareId),
}

pub(crate) fn emit(state: &GameState, out: &mut Vec<GameEvent>, player: Option<PlayerId>, kind: EventKind) {
    out.push(GameEvent {
        round: state.round,
        kind,
        player,
    });
}

fn cash_mut(state: &mut GameState, party: Party) -> Option<&mut Money> {
    match party {
        Party::Bank => None,
        Party::Player(p) => Some(&mut state.players[p].cash),
    }
}

/// Move `amount` from one party to another and log it. The bank is a ledger
/// with unlimited funds.
pub fn transfer(
    state: &mut GameState,
    out: &mut Vec<GameEvent>,
    from: Party,
    to: Party,
    amount: Money,
    reason: TransferReason,
) {
    if amount <= 0.0 || from == to {
        return;
    }
    if let Some(c) = cash_mut(state, from) {
        *c -= amount;
    }
    if let Some(c) = cash_mut(state, to) {
        *c += amount;
    }
    let actor = match (from, to) {
        (Party::Player(p), _) | (Party::Bank, Party::Player(p)) => Some(p),
        _ => None,
    };
    emit(
        state,
        out,
        actor,
        EventKind::Transfer {
            from,
            to,
            amount,
            reason,
        },
    );
}

pub fn unmortgage_cost(board: &BoardSpec, sq: SquareId) -> Money {
    board
        .property(sq)
        .map(|p| p.mortgage_value * (1.0 + board.mortgage_interest_rate))
        .unwrap_or(0.0)
}

fn my_color_squares(state: &GameState, p: PlayerId, sq: SquareId) -> impl Iterator<Item = SquareId> + '_ {
    state
        .board
        .peers(sq)
        .iter()
        .copied()
        .filter(move |&s| state.ownership[s] == Some(p))
}

pub fn can_improve(state: &GameState, p: PlayerId, sq: SquareId) -> bool {
    let Some(prop) = state.board.property(sq) else {
        return false;
    };
    if state.ownership[sq] != Some(p) || !prop.is_buildable() || !state.monopoly_at(p, sq) {
        return false;
    }
    if my_color_squares(state, p, sq).any(|s| state.mortgaged[s]) {
        return false;
    }
    let level = state.improvements[sq];
    if level >= prop.max_level() {
        return false;
    }
    let min_level = my_color_squares(state, p, sq)
        .map(|s| state.improvements[s])
        .min()
        .unwrap_or(0);
    if level != min_level {
        return false;
    }
    if prop.has_hotel_level(level + 1) {
        state.hotels_available >= 1
    } else {
        state.houses_available >= 1
    }
}

pub fn can_sell_improvement(state: &GameState, p: PlayerId, sq: SquareId) -> bool {
    let Some(prop) = state.board.property(sq) else {
        return false;
    };
    let level = state.improvements[sq];
    if state.ownership[sq] != Some(p) || level == 0 {
        return false;
    }
    let max_level = my_color_squares(state, p, sq)
        .map(|s| state.improvements[s])
        .max()
        .unwrap_or(0);
    if level != max_level {
        return false;
    }
    !prop.has_hotel_level(level) || state.houses_available >= prop.house_rents.len() as u32
}

pub fn can_mortgage(state: &GameState, p: PlayerId, sq: SquareId) -> bool {
    state.board.property(sq).is_some()
        && state.ownership[sq] == Some(p)
        && !state.mortgaged[sq]
        && my_color_squares(state, p, sq).all(|s| state.improvements[s] == 0)
}

/// Properties in unimproved colour groups can change hands by trade.
pub fn is_tradable(state: &GameState, sq: SquareId) -> bool {
    state.ownership[sq].is_some()
        && state.board.property(sq).is_some()
        && state.board.peers(sq).iter().all(|&s| state.improvements[s] == 0)
}

fn development_moves(state: &GameState, p: PlayerId, allow_trades: bool) -> Vec<Move> {
    let board = &state.board;
    let owned: Vec<SquareId> = state.owned_by(p).collect();
    let tradable: Vec<SquareId> = if allow_trades {
        (0..board.len()).filter(|&s| is_tradable(state, s)).collect()
    } else {
        Vec::new()
    };
    let mine = tradable.iter().filter(|&&s| state.ownership[s] == Some(p)).count();
    let mut moves = Vec::with_capacity(4 * owned.len() + 1 + mine * (tradable.len() - mine));
    for &sq in &owned {
        if can_improve(state, p, sq) {
            let cost = board.property(sq).map_or(0.0, |x| x.house_cost);
            moves.push(Move::new(MoveKind::Improve { square: sq }, cost));
        }
    }
    for &sq in &owned {
        if can_sell_improvement(state, p, sq) {
            moves.push(Move::free(MoveKind::SellImprovement { square: sq }));
        }
    }
    for &sq in &owned {
        if can_mortgage(state, p, sq) {
            moves.push(Move::free(MoveKind::Mortgage { square: sq }));
        }
    }
    for &sq in &owned {
        if state.mortgaged[sq] {
            moves.push(Move::new(
                MoveKind::Unmortgage { square: sq },
                unmortgage_cost(board, sq),
            ));
        }
    }
    if allow_trades {
        let give: Vec<SquareId> = tradable
            .iter()
            .copied()
            .filter(|&s| state.ownership[s] == Some(p))
            .collect();
        for q in state.solvent_players().filter(|&q| q != p) {
            for take in tradable.iter().copied().filter(|&s| state.ownership[s] == Some(q)) {
                for &give in &give {
                    let offer = TradeOffer {
                        proposer: p,
                        counterparty: q,
                        give,
                        take,
                        cash: 0.0,
                    };
                    moves.push(Move::free(MoveKind::ProposeTrade { offer }));
                }
            }
        }
    }
    moves.push(Move::end_phase());
    moves
}

/// Moves the ruleset permits `player` in the current phase. Affordability is
/// deliberately not checked; that is the agent's call.
pub fn legal_moves(state: &GameState, player: PlayerId) -> Vec<Move> {
    if player >= state.n_players() || state.players[player].bankrupt {
        return Vec::new();
    }
    match &state.phase {
        TurnPhase::OutOfTurn { actor, trade_used } if *actor == player => development_moves(state, player, !trade_used),
        TurnPhase::PostRoll if state.current == player => development_moves(state, player, false),
        TurnPhase::Jail if state.current == player && state.players[player].in_jail => {
            let mut moves = vec![Move::new(MoveKind::PayJailFine, state.board.jail_fine)];
            if state.board.dice.dice.len() >= 2 && state.players[player].jail_turns < JAIL_ATTEMPTS {
                moves.push(Move::free(MoveKind::UseRollForJail));
            }
            moves
        }
        TurnPhase::BuyDecision { square } if state.current == player => {
            let price = state.board.property(*square).map_or(0.0, |p| p.price);
            vec![
                Move::new(MoveKind::BuyProperty { square: *square }, price),
                Move::free(MoveKind::DeclineBuy),
            ]
        }
        TurnPhase::Auction { bidder, min_bid, .. } if *bidder == player => vec![
            Move::new(MoveKind::Bid { amount: *min_bid }, *min_bid),
            Move::free(MoveKind::PassBid),
        ],
        TurnPhase::TradeResponse { offer } if offer.counterparty == player => vec![
            Move::new(MoveKind::AcceptTrade, offer.outlay_for(player)),
            Move::free(MoveKind::RejectTrade),
        ],
        _ => Vec::new(),
    }
}

fn in_development(state: &GameState, player: PlayerId) -> Option<bool> {
    if player >= state.n_players() || state.players[player].bankrupt {
        return None;
    }
    match &state.phase {
        TurnPhase::OutOfTurn { actor, trade_used } if *actor == player => Some(!trade_used),
        TurnPhase::PostRoll if state.current == player => Some(false),
        _ => None,
    }
}

/// Whether [`legal_moves`] would offer a move admitting `mv`, decided
/// without listing the whole set.
pub fn is_legal(state: &GameState, player: PlayerId, mv: &Move) -> bool {
    let Some(trades) = in_development(state, player) else {
        return legal_moves(state, player).iter().any(|m| m.admits(mv));
    };
    let board = &state.board;
    let offered = match &mv.kind {
        MoveKind::Improve { square } if can_improve(state, player, *square) => {
            Move::new(mv.kind.clone(), board.property(*square).map_or(0.0, |x| x.house_cost))
        }
        MoveKind::SellImprovement { square } if can_sell_improvement(state, player, *square) => {
            Move::free(mv.kind.clone())
        }
        MoveKind::Mortgage { square } if can_mortgage(state, player, *square) => Move::free(mv.kind.clone()),
        MoveKind::Unmortgage { square }
            if state.ownership.get(*square) == Some(&Some(player)) && state.mortgaged[*square] =>
        {
            Move::new(mv.kind.clone(), unmortgage_cost(board, *square))
        }
        MoveKind::ProposeTrade { offer }
            if trades
                && offer.proposer == player
                && offer.counterparty != player
                && offer.counterparty < state.n_players()
                && state.is_solvent(offer.counterparty)
                && state.ownership.get(offer.give) == Some(&Some(player))
                && state.ownership.get(offer.take) == Some(&Some(offer.counterparty))
                && is_tradable(state, offer.give)
                && is_tradable(state, offer.take) =>
        {
            Move::free(MoveKind::ProposeTrade {
                offer: TradeOffer {
                    cash: 0.0,
                    ..offer.clone()
                },
            })
        }
        MoveKind::EndPhase => Move::end_phase(),
        _ => return false,
    };
    offered.admits(mv)
}

fn fail(state: &GameState, out: &mut Vec<GameEvent>, p: PlayerId, reason: &str) {
    emit(state, out, Some(p), EventKind::MoveFailed { reason: reason.into() });
}

fn buy(state: &mut GameState, out: &mut Vec<GameEvent>, p: PlayerId, sq: SquareId) {
    let price = state.board.property(sq).map_or(0.0, |x| x.price);
    if state.players[p].cash < price {
        return fail(state, out, p, "insufficient funds to buy");
    }
    transfer(
        state,
        out,
        Party::Player(p),
        Party::Bank,
        price,
        TransferReason::Purchase { square: sq },
    );
    state.ownership[sq] = Some(p);
    emit(state, out, Some(p), EventKind::Purchase { square: sq, price });
}

fn improve(state: &mut GameState, out: &mut Vec<GameEvent>, p: PlayerId, sq: SquareId) {
    let prop = state.board.property(sq).cloned().expect("improve targets a property");
    if state.players[p].cash < prop.house_cost {
        return fail(state, out, p, "insufficient funds to improve");
    }
    transfer(
        state,
        out,
        Party::Player(p),
        Party::Bank,
        prop.house_cost,
        TransferReason::Improvement { square: sq },
    );
    let level = state.improvements[sq] + 1;
    if prop.has_hotel_level(level) {
        state.hotels_available -= 1;
        state.houses_available += prop.house_rents.len() as u32;
    } else {
        state.houses_available -= 1;
    }
    state.improvements[sq] = level;
    emit(state, out, Some(p), EventKind::Improvement { square: sq, level });
}

fn sell_improvement(state: &mut GameState, out: &mut Vec<GameEvent>, p: PlayerId, sq: SquareId) {
    let prop = state.board.property(sq).cloned().expect("sale targets a property");
    let level = state.improvements[sq];
    if prop.has_hotel_level(level) {
        state.hotels_available += 1;
        state.houses_available -= prop.house_rents.len() as u32;
    } else {
        state.houses_available += 1;
    }
    state.improvements[sq] = level - 1;
    emit(
        state,
        out,
        Some(p),
        EventKind::Improvement {
            square: sq,
            level: level - 1,
        },
    );
    transfer(
        state,
        out,
        Party::Bank,
        Party::Player(p),
        prop.house_cost / 2.0,
        TransferReason::ImprovementSale { square: sq },
    );
}

/// Return every building on `p`'s squares of one colour at half cost,
/// regardless of house supply.
fn clear_color(state: &mut GameState, out: &mut Vec<GameEvent>, p: PlayerId, color: &str) {
    let squares: Vec<SquareId> = state.owned_in_color(p, color).collect();
    for sq in squares {
        let level = state.improvements[sq];
        if level == 0 {
            continue;
        }
        let prop = state.board.property(sq).cloned().expect("property");
        return_buildings(state, sq);
        emit(state, out, Some(p), EventKind::Improvement { square: sq, level: 0 });
        for _ in 0..level {
            transfer(
                state,
                out,
                Party::Bank,
                Party::Player(p),
                prop.house_cost / 2.0,
                TransferReason::ImprovementSale { square: sq },
            );
        }
    }
}

/// Put the buildings on `sq` back into the bank's supply and zero its level.
fn return_buildings(state: &mut GameState, sq: SquareId) {
    let level = state.improvements[sq];
    if let Some(prop) = state.board.property(sq) {
        if prop.has_hotel_level(level) {
            state.hotels_available += 1;
        } else {
            state.houses_available += level;
        }
    }
    state.improvements[sq] = 0;
}

fn mortgage(state: &mut GameState, out: &mut Vec<GameEvent>, p: PlayerId, sq: SquareId) {
    let value = state.board.property(sq).map_or(0.0, |x| x.mortgage_value);
    state.mortgaged[sq] = true;
    emit(
        state,
        out,
        Some(p),
        EventKind::Mortgage {
            square: sq,
            mortgaged: true,
        },
    );
    transfer(
        state,
        out,
        Party::Bank,
        Party::Player(p),
        value,
        TransferReason::Mortgage { square: sq },
    );
}

fn unmortgage(state: &mut GameState, out: &mut Vec<GameEvent>, p: PlayerId, sq: SquareId) {
    let cost = unmortgage_cost(&state.board, sq);
    if state.players[p].cash < cost {
        return fail(state, out, p, "insufficient funds to unmortgage");
    }
    transfer(
        state,
        out,
        Party::Player(p),
        Party::Bank,
        cost,
        TransferReason::Unmortgage { square: sq },
    );
    state.mortgaged[sq] = false;
    emit(
        state,
        out,
        Some(p),
        EventKind::Mortgage {
            square: sq,
            mortgaged: false,
        },
    );
}

fn execute_trade(state: &mut GameState, out: &mut Vec<GameEvent>, offer: &TradeOffer) {
    let (a, b) = (offer.proposer, offer.counterparty);
    let valid = state.is_solvent(a)
        && state.is_solvent(b)
        && state.ownership[offer.give] == Some(a)
        && state.ownership[offer.take] == Some(b)
        && is_tradable(state, offer.give)
        && is_tradable(state, offer.take)
        && state.players[a].cash >= offer.outlay_for(a)
        && state.players[b].cash >= offer.outlay_for(b);
    if !valid {
        return fail(state, out, b, "trade no longer valid");
    }
    state.ownership[offer.give] = Some(b);
    state.ownership[offer.take] = Some(a);
    if offer.cash > 0.0 {
        transfer(
            state,
            out,
            Party::Player(a),
            Party::Player(b),
            offer.cash,
            TransferReason::Trade,
        );
    } else if offer.cash < 0.0 {
        transfer(
            state,
            out,
            Party::Player(b),
            Party::Player(a),
            -offer.cash,
            TransferReason::Trade,
        );
    }
    emit(
        state,
        out,
        Some(b),
        EventKind::Trade {
            offer: offer.clone(),
            accepted: true,
        },
    );
}

/// Sample one face per die from the game's rng stream.
pub fn roll_dice(state: &mut GameState) -> Vec<i64> {
    let board = state.board.clone();
    board
        .dice
        .dice
        .iter()
        .map(|die| {
            let idx = WeightedIndex::new(&die.weights).expect("validated weights");
            die.faces[idx.sample(state.rng())]
        })
        .collect()
}

fn advance_by(state: &mut GameState, out: &mut Vec<GameEvent>, p: PlayerId, steps: i64) {
    let n = state.board.len();
    let from = state.players[p].position;
    let raw = from + steps.max(0) as usize;
    let laps = (raw / n) as u32;
    let to = raw % n;
    state.players[p].position = to;
    emit(state, out, Some(p), EventKind::Moved { from, to });
    pay_go_bonus(state, out, p, laps);
}

fn pay_go_bonus(state: &mut GameState, out: &mut Vec<GameEvent>, p: PlayerId, laps: u32) {
    if laps > 0 {
        let amount = state.board.go_increment * laps as Money;
        transfer(
            state,
            out,
            Party::Bank,
            Party::Player(p),
            amount,
            TransferReason::GoBonus { laps },
        );
    }
}

fn move_to(state: &mut GameState, out: &mut Vec<GameEvent>, p: PlayerId, target: SquareId) {
    let from = state.players[p].position;
    state.players[p].position = target;
    emit(state, out, Some(p), EventKind::Moved { from, to: target });
    if target <= from {
        pay_go_bonus(state, out, p, 1);
    }
}

pub(crate) fn send_to_jail(state: &mut GameState, out: &mut Vec<GameEvent>, p: PlayerId) {
    let Some(jail) = state.board.jail_square() else { return };
    let from = state.players[p].position;
    let player = &mut state.players[p];
    player.position = jail;
    player.in_jail = true;
    player.jail_turns = 0;
    emit(state, out, Some(p), EventKind::Moved { from, to: jail });
    emit(state, out, Some(p), EventKind::Jail { entered: true });
}

fn release_from_jail(state: &mut GameState, out: &mut Vec<GameEvent>, p: PlayerId) {
    state.players[p].in_jail = false;
    state.players[p].jail_turns = 0;
    emit(state, out, Some(p), EventKind::Jail { entered: false });
}

/// Roll for `player` and move them, paying the Go bonus on every wrap.
pub fn roll_and_advance(state: &mut GameState, player: PlayerId) -> Vec<GameEvent> {
    let mut out = Vec::new();
    let faces = roll_dice(state);
    let total = faces.iter().sum();
    emit(state, &mut out, Some(player), EventKind::Roll { faces, total });
    advance_by(state, &mut out, player, total);
    out
}

/// Apply the square the player is standing on: rent, tax, card, jail, or
/// a pending buy decision.
pub fn resolve_landing(state: &mut GameState, player: PlayerId) -> (Vec<GameEvent>, LandingOutcome) {
    let mut out = Vec::new();
    let outcome = land(state, &mut out, player, 0);
    (out, outcome)
}

fn land(state: &mut GameState, out: &mut Vec<GameEvent>, p: PlayerId, depth: u32) -> LandingOutcome {
    let sq = state.players[p].position;
    emit(state, out, Some(p), EventKind::Landed { square: sq });
    match state.board.squares[sq].kind.clone() {
        SquareKind::Property(_) => match state.ownership[sq] {
            None => return LandingOutcome::BuyDecision(sq),
            Some(owner) if owner != p && !state.mortgaged[sq] => {
                let rent = state.rent_due(sq);
                if rent > 0.0 {
                    emit(
                        state,
                        out,
                        Some(p),
                        EventKind::RentPaid {
                            square: sq,
                            owner,
                            amount: rent,
                        },
                    );
                    settle_into(
                        state,
                        out,
                        p,
                        Party::Player(owner),
                        rent,
                        TransferReason::Rent { square: sq },
                    );
                }
            }
            _ => {}
        },
        SquareKind::Tax { amount } => {
            settle_into(state, out, p, Party::Bank, amount, TransferReason::Tax { square: sq });
        }
        SquareKind::Chance => return draw_card(state, out, p, Deck::Chance, depth),
        SquareKind::Community => return draw_card(state, out, p, Deck::Community, depth),
        SquareKind::GoToJail => send_to_jail(state, out, p),
        SquareKind::Go | SquareKind::FreeParking | SquareKind::JailVisit => {}
    }
    LandingOutcome::Done
}

fn draw_card(state: &mut GameState, out: &mut Vec<GameEvent>, p: PlayerId, deck: Deck, depth: u32) -> LandingOutcome {
    let Some(index) = state.next_card(deck) else {
        return LandingOutcome::Done;
    };
    let card = state.board.deck(deck)[index].clone();
    emit(
        state,
        out,
        Some(p),
        EventKind::CardDrawn {
            deck,
            index,
            text: card.text,
        },
    );
    let reason = TransferReason::Card { deck, index };
    match card.effect {
        CardEffect::MoveTo { square } => {
            move_to(state, out, p, square);
            if depth < MAX_LANDING_DEPTH {
                return land(state, out, p, depth + 1);
            }
        }
        CardEffect::Pay { amount } => {
            settle_into(state, out, p, Party::Bank, amount, reason);
        }
        CardEffect::Receive { amount } => transfer(state, out, Party::Bank, Party::Player(p), amount, reason),
        CardEffect::GoToJail => send_to_jail(state, out, p),
        CardEffect::PayPerHouse { per_house, per_hotel } => {
            let (houses, hotels) = state.building_counts(p);
            let amount = houses as Money * per_house + hotels as Money * per_hotel;
            settle_into(state, out, p, Party::Bank, amount, reason);
        }
    }
    LandingOutcome::Done
}

/// Sell improvements, then mortgage, until `p` holds at least `target` cash
/// or has nothing left to liquidate.
pub fn liquidate(state: &mut GameState, out: &mut Vec<GameEvent>, p: PlayerId, target: Money) {
    while state.players[p].cash < target {
        let owned: Vec<SquareId> = state.owned_by(p).collect();
        let house_cost = |s: SquareId| state.board.property(s).map_or(0.0, |x| x.house_cost);
        let sale = owned
            .iter()
            .copied()
            .filter(|&s| can_sell_improvement(state, p, s))
            .min_by(|&a, &b| house_cost(a).total_cmp(&house_cost(b)).then(a.cmp(&b)));
        if let Some(sq) = sale {
            sell_improvement(state, out, p, sq);
            continue;
        }
        if let Some(&stuck) = owned.iter().find(|&&s| state.improvements[s] > 0) {
            let color = state.color_of(stuck).expect("improved square has colour").to_string();
            clear_color(state, out, p, &color);
            continue;
        }
        let mortgage_value = |s: SquareId| state.board.property(s).map_or(0.0, |x| x.mortgage_value);
        let pledge = owned
            .iter()
            .copied()
            .filter(|&s| can_mortgage(state, p, s))
            .min_by(|&a, &b| mortgage_value(a).total_cmp(&mortgage_value(b)).then(a.cmp(&b)));
        match pledge {
            Some(sq) => mortgage(state, out, p, sq),
            None => break,
        }
    }
}

/// Collect a compulsory payment, liquidating and if necessary bankrupting
/// the debtor. Returns whether the debt was paid in full.
pub fn settle_debt(
    state: &mut GameState,
    debtor: PlayerId,
    creditor: Party,
    amount: Money,
    reason: TransferReason,
) -> (Vec<GameEvent>, bool) {
    let mut out = Vec::new();
    let paid = settle_into(state, &mut out, debtor, creditor, amount, reason);
    (out, paid)
}

fn settle_into(
    state: &mut GameState,
    out: &mut Vec<GameEvent>,
    debtor: PlayerId,
    creditor: Party,
    amount: Money,
    reason: TransferReason,
) -> bool {
    if amount <= 0.0 {
        return true;
    }
    if state.players[debtor].cash < amount {
        liquidate(state, out, debtor, amount);
    }
    let cash = state.players[debtor].cash;
    if cash >= amount {
        transfer(state, out, Party::Player(debtor), creditor, amount, reason);
        return true;
    }
    // A partial payment is logged as part of the bankruptcy, not under the
    // debt's own reason, so observers never see a short rent or fee.
    bankrupt(state, out, debtor, creditor, amount - cash.max(0.0));
    false
}

/// Hand everything the debtor still owns to the creditor and remove them
/// from play. Properties owed to the bank are queued for auction.
pub fn resolve_bankruptcy(state: &mut GameState, debtor: PlayerId, creditor: Party) -> Vec<GameEvent> {
    let mut out = Vec::new();
    bankrupt(state, &mut out, debtor, creditor, 0.0);
    out
}

fn bankrupt(state: &mut GameState, out: &mut Vec<GameEvent>, debtor: PlayerId, creditor: Party, shortfall: Money) {
    if state.players[debtor].bankrupt {
        return;
    }
    emit(state, out, Some(debtor), EventKind::Bankruptcy { creditor, shortfall });
    let owned: Vec<SquareId> = state.owned_by(debtor).collect();
    for &sq in &owned {
        if state.improvements[sq] > 0 {
            return_buildings(state, sq);
            emit(
                state,
                out,
                Some(debtor),
                EventKind::Improvement { square: sq, level: 0 },
            );
        }
    }
    let cash = state.players[debtor].cash;
    transfer(
        state,
        out,
        Party::Player(debtor),
        creditor,
        cash,
        TransferReason::Bankruptcy,
    );
    for sq in owned {
        match creditor {
            Party::Player(c) => state.ownership[sq] = Some(c),
            Party::Bank => {
                state.ownership[sq] = None;
                state.mortgaged[sq] = false;
                state.pending_auctions.push_back(sq);
            }
        }
        let mortgaged = state.mortgaged[sq];
        emit(
            state,
            out,
            Some(debtor),
            EventKind::PropertyTransferred {
                square: sq,
                to: creditor,
                mortgaged,
            },
        );
    }
    let player = &mut state.players[debtor];
    player.bankrupt = true;
    player.in_jail = false;
}

/// Apply the direct effect of a legal move. Bids, trade proposals and
/// phase ends are routed by the game loop and have no direct effect here.
pub fn apply_move(state: &mut GameState, player: PlayerId, mv: &Move) -> Result<Vec<GameEvent>, EngineError> {
    if !is_legal(state, player, mv) {
        return Err(EngineError::IllegalMove { player, mv: mv.clone() });
    }
    let mut out = Vec::new();
    match &mv.kind {
        MoveKind::BuyProperty { square } => buy(state, &mut out, player, *square),
        MoveKind::Improve { square } => improve(state, &mut out, player, *square),
        MoveKind::SellImprovement { square } => sell_improvement(state, &mut out, player, *square),
        MoveKind::Mortgage { square } => mortgage(state, &mut out, player, *square),
        MoveKind::Unmortgage { square } => unmortgage(state, &mut out, player, *square),
        MoveKind::AcceptTrade => {
            if let TurnPhase::TradeResponse { offer } = state.phase.clone() {
                execute_trade(state, &mut out, &offer);
            }
        }
        MoveKind::RejectTrade => {
            if let TurnPhase::TradeResponse { offer } = state.phase.clone() {
                emit(
                    state,
                    &mut out,
                    Some(player),
                    EventKind::Trade { offer, accepted: false },
                );
            }
        }
        MoveKind::PayJailFine => {
            let fine = state.board.jail_fine;
            if settle_into(state, &mut out, player, Party::Bank, fine, TransferReason::JailFine) {
                release_from_jail(state, &mut out, player);
            }
        }
        MoveKind::UseRollForJail => {
            let faces = roll_dice(state);
            let total: i64 = faces.iter().sum();
            let doubles = faces.len() >= 2 && faces.windows(2).all(|w| w[0] == w[1]);
            emit(state, &mut out, Some(player), EventKind::Roll { faces, total });
            if doubles {
                release_from_jail(state, &mut out, player);
                advance_by(state, &mut out, player, total);
            } else {
                state.players[player].jail_turns += 1;
            }
        }
        MoveKind::DeclineBuy
        | MoveKind::Bid { .. }
        | MoveKind::PassBid
        | MoveKind::ProposeTrade { .. }
        | MoveKind::EndPhase => {}
    }
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::board::{tb8_board, DiceSpec, Die};

    fn tb8(players: usize) -> GameState {
        GameState::new(tb8_board(), players, 3)
    }

    fn fixed_die(face: i64) -> GameState {
        let mut b = tb8_board();
        b.dice = DiceSpec {
            dice: vec![Die::uniform(vec![face])],
        };
        GameState::new(b, 2, 0)
    }

    #[test]
    fn buy_phase_offers_buy_and_decline() {
        let mut s = tb8(2);
        s.players[0].position = 1;
        s.phase = TurnPhase::BuyDecision { square: 1 };
        let legal = legal_moves(&s, 0);
        assert_eq!(
            legal,
            vec![
                Move::new(MoveKind::BuyProperty { square: 1 }, 100.0),
                Move::free(MoveKind::DeclineBuy)
            ]
        );
        s.players[0].cash = 30.0;
        assert!(legal_moves(&s, 0)
            .iter()
            .any(|m| matches!(m.kind, MoveKind::BuyProperty { .. })));
    }

    #[test]
    fn monopoly_owner_may_build_and_mortgage() {
        let mut s = tb8(2);
        s.ownership[1] = Some(0);
        s.ownership[2] = Some(0);
        s.phase = TurnPhase::OutOfTurn {
            actor: 0,
            trade_used: false,
        };
        let kinds: Vec<MoveKind> = legal_moves(&s, 0).into_iter().map(|m| m.kind).collect();
        for k in [
            MoveKind::Improve { square: 1 },
            MoveKind::Improve { square: 2 },
            MoveKind::Mortgage { square: 1 },
            MoveKind::EndPhase,
        ] {
            assert!(kinds.contains(&k), "{k:?} missing");
        }
    }

    #[test]
    fn buy_mortgage_unmortgage_cash() {
        let mut s = tb8(2);
        s.players[0].position = 1;
        s.phase = TurnPhase::BuyDecision { square: 1 };
        apply_move(&mut s, 0, &Move::new(MoveKind::BuyProperty { square: 1 }, 100.0)).unwrap();
        assert_eq!(s.players[0].cash, 400.0);
        assert_eq!(s.ownership[1], Some(0));
        s.phase = TurnPhase::PostRoll;
        apply_move(&mut s, 0, &Move::free(MoveKind::Mortgage { square: 1 })).unwrap();
        assert_eq!(s.players[0].cash, 450.0);
        assert!(s.mortgaged[1]);
        let cost = unmortgage_cost(&s.board, 1);
        assert!((cost - 55.0).abs() < 1e-12);
        apply_move(&mut s, 0, &Move::new(MoveKind::Unmortgage { square: 1 }, cost)).unwrap();
        assert!((s.players[0].cash - 395.0).abs() < 1e-9);
        assert!(!s.mortgaged[1]);
    }

    #[test]
    fn illegal_moves_are_rejected() {
        let mut s = tb8(2);
        s.phase = TurnPhase::PostRoll;
        let err = apply_move(&mut s, 0, &Move::free(MoveKind::Mortgage { square: 1 }));
        assert!(matches!(err, Err(EngineError::IllegalMove { .. })));
    }

    #[test]
    fn passing_go_pays_the_increment() {
        let mut s = fixed_die(2);
        s.players[0].position = 7;
        roll_and_advance(&mut s, 0);
        assert_eq!(s.players[0].position, 1);
        assert_eq!(s.players[0].cash, 700.0);
        let mut s = fixed_die(1);
        roll_and_advance(&mut s, 0);
        assert_eq!(s.players[0].position, 1);
        assert_eq!(s.players[0].cash, 500.0);
    }

    #[test]
    fn rolls_are_reproducible() {
        let rolls = |seed| {
            let mut s = GameState::new(tb8_board(), 2, seed);
            (0..5).map(|_| roll_dice(&mut s)).collect::<Vec<_>>()
        };
        assert_eq!(rolls(9), rolls(9));
    }

    #[test]
    fn rent_tiers_and_mortgage() {
        let mut s = tb8(2);
        s.ownership[1] = Some(1);
        s.players[0].position = 1;
        resolve_landing(&mut s, 0);
        assert_eq!((s.players[0].cash, s.players[1].cash), (490.0, 510.0));
        s.ownership[2] = Some(1);
        resolve_landing(&mut s, 0);
        assert_eq!(s.players[0].cash, 470.0);
        s.ownership[4] = Some(1);
        s.mortgaged[4] = true;
        s.players[0].position = 4;
        resolve_landing(&mut s, 0);
        assert_eq!(s.players[0].cash, 470.0);
    }

    #[test]
    fn unowned_square_asks_to_buy() {
        let mut s = tb8(2);
        s.players[0].position = 4;
        assert_eq!(resolve_landing(&mut s, 0).1, LandingOutcome::BuyDecision(4));
    }

    #[test]
    fn liquidation_then_bankruptcy_to_player() {
        let mut s = tb8(2);
        s.players[0].cash = 40.0;
        s.ownership[1] = Some(0);
        let (events, paid) = settle_debt(&mut s, 0, Party::Player(1), 100.0, TransferReason::Rent { square: 1 });
        assert!(!paid);
        assert!(s.players[0].bankrupt);
        assert_eq!(s.ownership[1], Some(1));
        assert!(s.mortgaged[1]);
        assert_eq!(s.players[1].cash, 590.0);
        assert!(events
            .iter()
            .any(|e| matches!(e.kind, EventKind::Bankruptcy { shortfall, .. } if shortfall == 10.0)));
    }

    #[test]
    fn mortgaging_can_cover_a_debt() {
        let mut s = tb8(2);
        s.players[0].cash = 60.0;
        s.ownership[1] = Some(0);
        let (_, paid) = settle_debt(&mut s, 0, Party::Player(1), 100.0, TransferReason::Rent { square: 1 });
        assert!(paid);
        assert!(!s.players[0].bankrupt);
        assert_eq!(s.players[0].cash, 10.0);
    }

    #[test]
    fn bank_bankruptcy_frees_properties() {
        let mut s = tb8(2);
        s.ownership[1] = Some(0);
        s.mortgaged[1] = true;
        s.ownership[2] = Some(0);
        resolve_bankruptcy(&mut s, 0, Party::Bank);
        assert_eq!(s.ownership[1], None);
        assert!(!s.mortgaged[1]);
        assert_eq!(s.pending_auctions.iter().copied().collect::<Vec<_>>(), vec![1, 2]);
    }

    #[test]
    fn improvements_are_sold_before_mortgaging() {
        let mut s = tb8(2);
        s.ownership[1] = Some(0);
        s.ownership[2] = Some(0);
        s.improvements[1] = 1;
        s.players[0].cash = 0.0;
        let mut out = Vec::new();
        liquidate(&mut s, &mut out, 0, 25.0);
        assert_eq!(s.improvements[1], 0);
        assert_eq!(s.players[0].cash, 25.0);
        assert!(!s.mortgaged[1] && !s.mortgaged[2]);
    }

    #[test]
    fn even_build_rule() {
        let mut s = tb8(2);
        s.ownership[1] = Some(0);
        s.ownership[2] = Some(0);
        s.improvements[1] = 1;
        assert!(!can_improve(&s, 0, 1));
        assert!(can_improve(&s, 0, 2));
        assert!(!can_sell_improvement(&s, 0, 2));
        assert!(!can_mortgage(&s, 0, 2));
    }
}
