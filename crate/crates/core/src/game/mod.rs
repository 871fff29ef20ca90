//! Game constants and the closed-form payoff, cost and leakage formulas.
//!
//! Everything here is a pure function of immutable inputs; callers may share
//! configs across threads freely.

mod config;
mod payoff;

pub use config::{GameConfig, StrategyProfile};
pub use payoff::{
    attack_cost, attacker_payoff_bounds, defender_payoff_bounds, model_utility_bounds,
    privacy_leakage_bounds, privacy_leakage_empirical, protection_cost, robust_value, Interval,
    LeakageBounds, LeakageRegime, RobustOperator,
};

pub(crate) use payoff::{attacker_lower_uniform, leakage_interval};
