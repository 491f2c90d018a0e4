//! A hermetic Monopoly laboratory.
//!
//! * [`board`]: static configuration (squares, cards, dice) and bundled boards.
//! * [`engine`]: the rules engine, turn loop and JSONL event log.
//! * [`agents`]: the agent interface plus random and rule-based opponents.
//! * [`value`]: the one-step-lookahead value agent and its evaluation function.
//! * [`novelty`]: novelty injection and online detection.
//! * [`harness`]: seeded trials, metrics and the command-line front end.

pub mod agents;
pub mod board;
pub mod engine;
pub mod harness;
pub mod novelty;
pub mod value;

/// Amounts of money. Floating point so that every monetary quantity can be
/// rescaled without rounding.
pub type Money = f64;
pub type PlayerId = usize;
pub type SquareId = usize;

/// Stable 64-bit mixer used to derive per-trial, per-game and per-seat seeds.
pub fn derive_seed(base: u64, index: u64) -> u64 {
    fn splitmix(mut z: u64) -> u64 {
        z = z.wrapping_add(0x9E37_79B9_7F4A_7C15);
        z = (z ^ (z >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
        z = (z ^ (z >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
        z ^ (z >> 31)
    }
    splitmix(base ^ splitmix(index.wrapping_add(0x5851_F42D_4C95_7F2D)))
}

/// `a` and `b` agree up to a relative tolerance.
pub(crate) fn approx_eq(a: f64, b: f64, rel: f64) -> bool {
    (a - b).abs() <= rel * a.abs().max(b.abs())
}
