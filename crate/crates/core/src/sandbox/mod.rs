//! Toy empirical federated-learning instance: a linear gradient map with
//! exactly known Lipschitz constants, a noise-protected published gradient,
//! and a gradient-matching attacker running plain gradient descent. The
//! traces it produces feed the privacy-leakage bound containment checks.

mod fit;
mod task;
mod utility;

pub use fit::{fit_constants, validate_bounds, validate_bounds_with, ContainmentReport, FitReport, ResidualRegime};
pub use task::{simulate_attack, AttackTrace, LinearTask};
pub use utility::{model_utility_empirical, UtilityCheck};
