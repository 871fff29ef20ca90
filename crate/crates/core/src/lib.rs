//! Federated-learning privacy game toolkit.
//!
//! The crate is organized around five subsystems:
//!
//! - [`game`]: game constants plus the closed-form payoff, cost and
//!   privacy-leakage bound formulas.
//! - [`equilibrium`]: best responses, the no-attack threshold, robust
//!   equilibrium orchestration and the attacker-payoff region scan.
//! - [`oracle`]: the correlation-device oracle — LP coefficients from 2x2
//!   robust payoff tables, the cost-minimizing LP over correlation
//!   probabilities, the multiplier system and its special solution families.
//! - [`dynamics`]: repeated-game simulator running bandit-feedback
//!   exponential weights for every player, with regret and
//!   coarse-correlated-equilibrium gap evaluation.
//! - [`sandbox`]: a linear gradient-inversion instance with exactly known
//!   constants, used to validate the leakage bounds empirically.

// Negated comparisons like `!(x >= 0.0)` are input guards that reject NaN
// along with the out-of-range values.
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod dynamics;
pub mod equilibrium;
mod error;
pub mod game;
pub mod oracle;
pub mod sandbox;

pub use error::{Error, Result};
