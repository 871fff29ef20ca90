//! Repeated-game simulator: every player runs bandit-feedback exponential
//! weights, the game master evaluates losses on the joint action, and the
//! empirical joint distribution is checked against the
//! approximate-coarse-correlated-equilibrium implication.

mod game_tables;
mod player;
mod run;

pub use game_tables::{flpg_loss_tables, LossTables, NormalizationConstants};
pub use player::{exploration_floor, learning_rate, ExpWeightsPlayer};
pub use run::{cce_gap, empirical_regret, run_dynamics, DynamicsTrace, RepeatedGameSpec};
