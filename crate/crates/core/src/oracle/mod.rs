//! The correlation-device oracle for the one-defender/one-attacker game.
//!
//! From a 2x2 table of robust payoffs the oracle derives the eight
//! follow-the-instruction coefficients, solves the cost-minimizing linear
//! program over correlation probabilities by exact vertex enumeration,
//! solves the 4x4 multiplier system, and classifies the two special
//! solution families in which one diagonal of the probability matrix
//! vanishes.

mod kkt;
mod lp;

pub use kkt::{kkt_multipliers, kkt_residual, special_case, Family, SpecialCase};
pub use lp::{simplex_grid_optimum, solve_oracle_lp, OracleSolution};

use serde::{Deserialize, Serialize};

/// Robust 2x2 payoff tables plus the oracle's cost vector.
///
/// Rows index the defender's strategy (0 = give up, 1 = candidate), columns
/// the attacker's (0 = give up, 1 = candidate). `cost[i]` prices the
/// correlation probability `x_{i+1}` in the order
/// (GdGa, GdEa, EdGa, EdEa).
#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct CorrelatedGame2x2 {
    pub defender_payoff: [[f64; 2]; 2],
    pub attacker_payoff: [[f64; 2]; 2],
    pub cost: [f64; 4],
}

/// The coefficients of the four follow-with-probability-1 constraints.
///
/// By construction `a21 = -a11` and `a22 = -a12`: the defender's incentive
/// to follow "give up" is the mirror of the incentive to follow the
/// candidate strategy.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct LpCoefficients {
    pub a11: f64,
    pub a12: f64,
    pub a21: f64,
    pub a22: f64,
    pub a31: f64,
    pub a32: f64,
    pub a41: f64,
    pub a42: f64,
}

impl LpCoefficients {
    /// Builds coefficients from the six free entries, deriving the two
    /// antisymmetric ones.
    pub fn from_free(a11: f64, a12: f64, a31: f64, a32: f64, a41: f64, a42: f64) -> Self {
        Self {
            a11,
            a12,
            a21: -a11,
            a22: -a12,
            a31,
            a32,
            a41,
            a42,
        }
    }
}

const GIVE_UP: usize = 0;
const ENGAGE: usize = 1;

/// Differences of robust payoffs per the follow-the-oracle constraints.
pub fn coefficients(game: &CorrelatedGame2x2) -> LpCoefficients {
    let d = &game.defender_payoff;
    let a = &game.attacker_payoff;
    LpCoefficients {
        a11: d[GIVE_UP][GIVE_UP] - d[ENGAGE][GIVE_UP],
        a12: d[GIVE_UP][ENGAGE] - d[ENGAGE][ENGAGE],
        a21: d[ENGAGE][GIVE_UP] - d[GIVE_UP][GIVE_UP],
        a22: d[ENGAGE][ENGAGE] - d[GIVE_UP][ENGAGE],
        a31: a[GIVE_UP][GIVE_UP] - a[GIVE_UP][ENGAGE],
        a32: a[ENGAGE][GIVE_UP] - a[ENGAGE][ENGAGE],
        a41: a[GIVE_UP][ENGAGE] - a[GIVE_UP][GIVE_UP],
        a42: a[ENGAGE][ENGAGE] - a[ENGAGE][GIVE_UP],
    }
}

/// Constraint left-hand sides for a probability vector `x`.
pub fn constraint_margins(a: &LpCoefficients, x: &[f64; 4]) -> [f64; 4] {
    [
        a.a11 * x[0] + a.a12 * x[1],
        a.a21 * x[2] + a.a22 * x[3],
        a.a31 * x[0] + a.a32 * x[2],
        a.a41 * x[1] + a.a42 * x[3],
    ]
}

/// Following the oracle with probability 1 is an equilibrium iff all four
/// constraint left-hand sides are strictly positive at `x`.
pub fn verify_following_equilibrium(x: &[f64; 4], game: &CorrelatedGame2x2) -> (bool, [f64; 4]) {
    let margins = constraint_margins(&coefficients(game), x);
    (margins.iter().all(|&m| m > 0.0), margins)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn constant_defender_table_zeroes_defender_coefficients() {
        let game = CorrelatedGame2x2 {
            defender_payoff: [[0.3, 0.3], [0.3, 0.3]],
            attacker_payoff: [[0.1, -0.2], [0.5, -0.4]],
            cost: [0.0; 4],
        };
        let a = coefficients(&game);
        assert_eq!((a.a11, a.a12, a.a21, a.a22), (0.0, 0.0, 0.0, 0.0));
    }

    #[test]
    fn quit_payoff_zero_and_negative_attacks_fix_signs() {
        // Attacker's give-up column is 0, attacking strictly loses.
        let game = CorrelatedGame2x2 {
            defender_payoff: [[0.2, -0.1], [0.4, 0.1]],
            attacker_payoff: [[0.0, -0.3], [0.0, -0.6]],
            cost: [0.0; 4],
        };
        let a = coefficients(&game);
        assert!(a.a31 > 0.0 && a.a32 > 0.0);
        assert!(a.a41 < 0.0 && a.a42 < 0.0);
    }

    #[test]
    fn antisymmetry_is_exact() {
        let game = CorrelatedGame2x2 {
            defender_payoff: [[0.17, -0.23], [0.41, 0.09]],
            attacker_payoff: [[0.0, 0.37], [-0.11, 0.05]],
            cost: [1.0, 2.0, 3.0, 4.0],
        };
        let a = coefficients(&game);
        assert_eq!(a.a21, -a.a11);
        assert_eq!(a.a22, -a.a12);
    }

    #[test]
    fn uniform_x_fails_when_first_constraint_sums_negative() {
        let game = CorrelatedGame2x2 {
            defender_payoff: [[0.0, 0.0], [0.5, 0.5]], // a11 = a12 = -0.5
            attacker_payoff: [[0.4, 0.0], [0.4, 0.0]],
            cost: [0.0; 4],
        };
        let x = [0.25; 4];
        let (ok, margins) = verify_following_equilibrium(&x, &game);
        assert!(!ok);
        assert!(margins[0] < 0.0);
    }

    #[test]
    fn constant_tables_never_verify() {
        let game = CorrelatedGame2x2 {
            defender_payoff: [[0.3; 2]; 2],
            attacker_payoff: [[-0.1; 2]; 2],
            cost: [0.0; 4],
        };
        for x in [[0.25; 4], [1.0, 0.0, 0.0, 0.0], [0.0, 0.5, 0.5, 0.0]] {
            let (ok, margins) = verify_following_equilibrium(&x, &game);
            assert!(!ok);
            assert_eq!(margins, [0.0; 4]);
        }
    }
}
