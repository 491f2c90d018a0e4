use super::eval::{Evaluator, GuardReport};
use super::params::ValueParams;
use crate::engine::{GameState, Move};
use crate::PlayerId;

/// Both bankruptcy conditions for `mv`, evaluated on the pre-move state.
pub fn passes_guards(state: &GameState, me: PlayerId, mv: &Move, params: &ValueParams) -> GuardReport {
    Evaluator::new(state, params).guard_inputs(state, me).check(mv.cost)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::board::tb8_board;
    use crate::engine::MoveKind;

    #[test]
    fn safe_state_passes_zero_cost_moves() {
        let s = GameState::new(tb8_board(), 2, 0);
        let p = ValueParams::from_board(&s.board, 5, 5, Some(200.0));
        assert!(passes_guards(&s, 0, &Move::end_phase(), &p).passed());
    }

    #[test]
    fn opponent_rent_in_reach_counts() {
        let mut s = GameState::new(tb8_board(), 2, 0);
        s.ownership[2] = Some(1);
        let p = ValueParams::from_board(&s.board, 5, 5, Some(0.0));
        let g = Evaluator::new(&s, &p).guard_inputs(&s, 0);
        assert_eq!(g.r_worst, 10.0);
        assert_eq!(g.r_next, -5.0);
        let cash = s.players[0].cash;
        let exact = Move::new(MoveKind::BuyProperty { square: 1 }, cash - 10.0);
        assert!(!passes_guards(&s, 0, &exact, &p).condition2);
        let under = Move::new(MoveKind::BuyProperty { square: 1 }, cash - 11.0);
        assert!(passes_guards(&s, 0, &under, &p).condition2);
    }
}
