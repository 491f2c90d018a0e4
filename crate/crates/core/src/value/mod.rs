//! The value-function agent: V(s) = M_assets + R_s + R_l + M_monopoly,
//! maximised over guarded post-decision states.

mod agent;
mod eval;
mod guards;
mod params;
mod policy;

pub use agent::{ValueAgent, ValueConfig};
pub use eval::{
    assets_value, evaluate_state, landing_prob, long_term_gain, monopoly_gain, short_term_gain, Evaluator, GuardInputs,
    GuardReport, LandingDistribution, ValueBreakdown, ValueError,
};
pub use guards::passes_guards;
pub use params::{adapt_dice, adapt_params, tier_index, ValueParams};
pub use policy::{
    accept_trade, choose_bid, choose_move, ownership_gain, propose_trade, simulate_move, Candidate, Decision,
};
