//! Novelty injection and online detection.
//!
//! A [`NoveltySpec`] describes one persistent rule change. Detection works
//! from three sources: the visible board ([`AttributeTracker::observe_board`]),
//! the cash effect of attribute-determined actions
//! ([`AttributeTracker::observe_outcome`]) and dice rolls
//! ([`update_dice_beliefs`], [`detect_dice_novelty`]).

mod detector;
mod dice;
mod inject;
mod path;
mod spec;
mod tracker;

use thiserror::Error;

use crate::board::BoardError;

pub use detector::{novelty_flag, DetectorConfig, NoveltyDetector, DEFAULT_THRESHOLD};
pub use dice::{
    detect_dice_novelty, dice_map_estimate, kl_divergence, update_dice_beliefs, DiceBeliefs, DieBelief, DriftParams,
    PRIOR_FLOOR,
};
pub use inject::inject_novelty;
pub use path::{tracked_attributes, AttrValue, AttributePath};
pub use spec::{generate_novelty, Difficulty, NoveltyClass, NoveltyPayload, NoveltySpec};
pub use tracker::{observe_outcome, observe_state, AttributeTracker, DeviationEvent, Outcome};

#[derive(Debug, Error)]
pub enum NoveltyError {
    #[error("malformed attribute path {0:?}")]
    BadPath(String),
    #[error("unknown novelty target: {0}")]
    UnknownTarget(String),
    #[error("incompatible novelty: {0}")]
    Incompatible(String),
    #[error("degenerate dice belief: {0}")]
    Degenerate(String),
    #[error(transparent)]
    Board(BoardError),
}

impl From<BoardError> for NoveltyError {
    fn from(e: BoardError) -> Self {
        match e {
            BoardError::UnknownTarget(t) => NoveltyError::UnknownTarget(t),
            other => NoveltyError::Board(other),
        }
    }
}
