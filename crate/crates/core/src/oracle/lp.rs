use nalgebra::{Matrix4, Vector4};
use serde::{Deserialize, Serialize};

use crate::oracle::kkt::{special_case, Family};
use crate::oracle::{constraint_margins, LpCoefficients};

const FEAS_TOL: f64 = 1e-9;

/// Solution of the oracle's cost-minimizing LP over correlation
/// probabilities.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct OracleSolution {
    pub x: [f64; 4],
    /// Left-hand sides of the four follow-the-oracle constraints at `x`.
    pub margins: [f64; 4],
    /// Multipliers of the 4x4 system, when it is nonsingular.
    pub multipliers: Option<[f64; 4]>,
    pub family: Family,
    /// Indices (0-3 constraints, 4-7 nonnegativity) violated at the
    /// least-infeasible basic solution; present only when infeasible.
    #[serde(skip_serializing_if = "Option::is_none")]
    pub infeasibility_certificate: Option<Vec<usize>>,
    pub cost_value: f64,
}

/// Minimizes `sum c_i x_i` over the simplex intersected with the four
/// margin constraints `lhs_i >= margin`, by enumerating the vertices of the
/// (at most 3-dimensional) polytope exactly.
///
/// The paper's constraints are strict; the closed relaxation with a positive
/// margin keeps the feasible set closed so the infimum is attained.
/// Ties on cost break lexicographically on `x`.
pub fn solve_oracle_lp(a: &LpCoefficients, cost: [f64; 4], margin: f64) -> OracleSolution {
    assert!(margin > 0.0, "margin must be positive, got {margin}");

    // Inequality rows: four oracle constraints (rhs = margin) followed by
    // x_i >= 0 (rhs = 0). The simplex equality is always active.
    let rows: [[f64; 4]; 8] = [
        [a.a11, a.a12, 0.0, 0.0],
        [0.0, 0.0, a.a21, a.a22],
        [a.a31, 0.0, a.a32, 0.0],
        [0.0, a.a41, 0.0, a.a42],
        [1.0, 0.0, 0.0, 0.0],
        [0.0, 1.0, 0.0, 0.0],
        [0.0, 0.0, 1.0, 0.0],
        [0.0, 0.0, 0.0, 1.0],
    ];
    let rhs = [margin, margin, margin, margin, 0.0, 0.0, 0.0, 0.0];

    let mut best: Option<([f64; 4], f64)> = None;
    let mut least_violation = f64::INFINITY;
    let mut certificate: Vec<usize> = Vec::new();

    for i in 0..8 {
        for j in (i + 1)..8 {
            for k in (j + 1)..8 {
                let m = Matrix4::from_rows(&[
                    Vector4::new(1.0, 1.0, 1.0, 1.0).transpose(),
                    Vector4::from_row_slice(&rows[i]).transpose(),
                    Vector4::from_row_slice(&rows[j]).transpose(),
                    Vector4::from_row_slice(&rows[k]).transpose(),
                ]);
                let b = Vector4::new(1.0, rhs[i], rhs[j], rhs[k]);
                let Some(solution) = m.lu().solve(&b) else {
                    continue;
                };
                let x = [solution[0], solution[1], solution[2], solution[3]];
                if x.iter().any(|v| !v.is_finite()) {
                    continue;
                }
                let violations: Vec<usize> = (0..8)
                    .filter(|&r| {
                        let lhs: f64 = (0..4).map(|c| rows[r][c] * x[c]).sum();
                        lhs < rhs[r] - FEAS_TOL
                    })
                    .collect();
                if violations.is_empty() {
                    let value: f64 = (0..4).map(|c| cost[c] * x[c]).sum();
                    let better = match &best {
                        None => true,
                        Some((bx, bv)) => {
                            value < bv - 1e-15
                                || ((value - bv).abs() <= 1e-15 && lex_less(&x, bx))
                        }
                    };
                    if better {
                        best = Some((x, value));
                    }
                } else {
                    let worst = (0..8)
                        .map(|r| {
                            let lhs: f64 = (0..4).map(|c| rows[r][c] * x[c]).sum();
                            (rhs[r] - lhs).max(0.0)
                        })
                        .fold(0.0f64, f64::max);
                    if worst < least_violation {
                        least_violation = worst;
                        certificate = violations;
                    }
                }
            }
        }
    }

    let multipliers = crate::oracle::kkt::kkt_multipliers(a, cost).ok();
    match best {
        Some((x, value)) => {
            let family = special_case(a, cost).map(|s| s.family).unwrap_or(Family::Generic);
            OracleSolution {
                x,
                margins: constraint_margins(a, &x),
                multipliers,
                family,
                infeasibility_certificate: None,
                cost_value: value,
            }
        }
        None => OracleSolution {
            x: [0.0; 4],
            margins: [0.0; 4],
            multipliers,
            family: Family::Infeasible,
            infeasibility_certificate: Some(certificate),
            cost_value: f64::NAN,
        },
    }
}

fn lex_less(a: &[f64; 4], b: &[f64; 4]) -> bool {
    for (x, y) in a.iter().zip(b) {
        if x < y {
            return true;
        }
        if x > y {
            return false;
        }
    }
    false
}

/// Brute-force reference: scans the probability simplex with the given step
/// and returns the cheapest feasible grid point. Test oracle only; kept in
/// the library so both the unit tests and the acceptance suite share it.
pub fn simplex_grid_optimum(
    a: &LpCoefficients,
    cost: [f64; 4],
    margin: f64,
    step: f64,
) -> Option<([f64; 4], f64)> {
    let n = (1.0 / step).round() as i64;
    let mut best: Option<([f64; 4], f64)> = None;
    for i in 0..=n {
        for j in 0..=(n - i) {
            for k in 0..=(n - i - j) {
                let l = n - i - j - k;
                let x = [
                    i as f64 / n as f64,
                    j as f64 / n as f64,
                    k as f64 / n as f64,
                    l as f64 / n as f64,
                ];
                let margins = constraint_margins(a, &x);
                if margins.iter().any(|&m| m < margin) {
                    continue;
                }
                let value: f64 = (0..4).map(|c| cost[c] * x[c]).sum();
                if best.as_ref().is_none_or(|(_, bv)| value < *bv) {
                    best = Some((x, value));
                }
            }
        }
    }
    best
}
