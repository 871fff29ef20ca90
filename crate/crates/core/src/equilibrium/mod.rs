//! Best responses, the no-attack threshold, robust-equilibrium orchestration
//! and the attacker-payoff region scan.
//!
//! The attacker's lower-bound payoff, as a function of the attacking extent
//! with `y > 1 - p`, is decreasing up to the stationary point returned by
//! [`hat_attack_rounds`] and increasing beyond it, so its maximum over the
//! admissible integer extents always sits at an endpoint. The no-attack
//! threshold is therefore anchored at the attacker's optimal extent rather
//! than at the stationary point itself; see `zero_eq_threshold`.

mod best_response;
mod report;
mod scan;

pub use best_response::{
    attacker_best_response, best_conditional_extent, defender_best_response, hat_attack_rounds,
    is_zero_equilibrium, threshold_rhs_at, zero_eq_threshold, ZeroEqDecision,
};
pub use report::{
    check_regularity, robust_equilibrium, tau_condition, tau_equilibrium_check, Classification,
    EquilibriumReport, RegularityReport,
};
pub use scan::{linspace, region_scan, scan_csv, ScanCell, ScanSign};

/// Thresholds below this magnitude are reported as boundary cases rather
/// than decided.
pub const THRESHOLD_BOUNDARY_TOL: f64 = 1e-9;
