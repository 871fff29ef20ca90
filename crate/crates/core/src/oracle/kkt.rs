use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::oracle::LpCoefficients;

const SINGULAR_TOL: f64 = 1e-9;
const COND_TOL: f64 = 1e-9;

/// Structure of the oracle's optimal correlation matrix.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Family {
    /// Neither special condition list holds.
    Generic,
    /// x2 = x4 = 0: the oracle always tells the attacker to give up.
    X2X4Zero,
    /// x1 = x3 = 0: the oracle always suggests the candidate attack.
    X1X3Zero,
    /// The margin-relaxed constraint set is empty.
    Infeasible,
}

/// Classified family plus the probability vector its condition list pins
/// down.
#[derive(Debug, Clone, Copy, Serialize, Deserialize)]
pub struct SpecialCase {
    pub family: Family,
    pub x: Option<[f64; 4]>,
}

pub(crate) fn det(a: &LpCoefficients) -> f64 {
    a.a11 * a.a41 * a.a32 * a.a22 - a.a31 * a.a12 * a.a21 * a.a42
}

/// Unique solution of the 4x4 multiplier system
///
/// ```text
/// [a11  0   a31  0 ] [v1]   [c1]
/// [a12  0   0    a41] [v2] = [c2]
/// [0    a21 a32  0 ] [v3]   [c3]
/// [0    a22 0    a42] [v4]   [c4]
/// ```
///
/// in closed form. Requires `|a11*a41*a32*a22 - a31*a12*a21*a42| > 1e-9`.
pub fn kkt_multipliers(a: &LpCoefficients, cost: [f64; 4]) -> Result<[f64; 4]> {
    let d = det(a);
    if d.abs() <= SINGULAR_TOL {
        return Err(Error::SingularSystem { det: d.abs() });
    }
    let [c1, c2, c3, c4] = cost;
    let v1 = (a.a31 * a.a41 * a.a21 * c4 - a.a31 * a.a41 * a.a22 * c3
        - a.a31 * a.a21 * a.a42 * c2
        + a.a41 * a.a32 * a.a22 * c1)
        / d;
    let v2 = (a.a11 * a.a41 * a.a32 * c4 - a.a11 * a.a32 * a.a42 * c2
        - a.a31 * a.a12 * a.a42 * c3
        + a.a12 * a.a32 * a.a42 * c1)
        / d;
    let v3 = (-a.a11 * a.a41 * a.a21 * c4
        + a.a11 * a.a41 * a.a22 * c3
        + a.a11 * a.a21 * a.a42 * c2
        - a.a12 * a.a21 * a.a42 * c1)
        / d;
    let v4 = (a.a11 * a.a32 * a.a22 * c2 - a.a31 * a.a12 * a.a21 * c4
        + a.a31 * a.a12 * a.a22 * c3
        - a.a12 * a.a32 * a.a22 * c1)
        / d;
    Ok([v1, v2, v3, v4])
}

/// Evaluates both special-solution condition lists.
///
/// The first list zeroes the attack column (x2 = x4 = 0, x1 + x3 = 1), the
/// mirrored list zeroes the give-up column (x1 = x3 = 0, x2 + x4 = 1). Each
/// list is checked in its stated order; when the interior sub-case applies
/// the closed-form split between the two surviving probabilities is
/// returned, and the underdetermined sub-case reports the first corner.
pub fn special_case(a: &LpCoefficients, cost: [f64; 4]) -> Result<SpecialCase> {
    let v = kkt_multipliers(a, cost)?;
    let zero = |t: f64| t.abs() <= COND_TOL;

    // x2 = x4 = 0 family.
    if zero(v[1] * a.a21) && zero(v[2] * a.a32) {
        return Ok(case(Family::X2X4Zero, [0.0, 0.0, 1.0, 0.0]));
    }
    if zero(v[0] * a.a11) && zero(v[2] * a.a31) {
        return Ok(case(Family::X2X4Zero, [1.0, 0.0, 0.0, 0.0]));
    }
    if zero(v[0] * a.a11) && zero(v[1] * a.a21) {
        if zero(v[2] * a.a31 * a.a32) {
            return Ok(case(Family::X2X4Zero, [1.0, 0.0, 0.0, 0.0]));
        }
        if a.a31 * a.a32 < 0.0 {
            let x1 = a.a32 / (a.a32 - a.a31);
            return Ok(case(Family::X2X4Zero, [x1, 0.0, 1.0 - x1, 0.0]));
        }
    }

    // x1 = x3 = 0 family.
    if zero(v[1] * a.a22) && zero(v[3] * a.a42) {
        return Ok(case(Family::X1X3Zero, [0.0, 0.0, 0.0, 1.0]));
    }
    if zero(v[0] * a.a12) && zero(v[3] * a.a41) {
        return Ok(case(Family::X1X3Zero, [0.0, 1.0, 0.0, 0.0]));
    }
    if zero(v[0] * a.a12) && zero(v[1] * a.a22) {
        if zero(v[3] * a.a41 * a.a42) {
            return Ok(case(Family::X1X3Zero, [0.0, 1.0, 0.0, 0.0]));
        }
        if a.a41 * a.a42 < 0.0 {
            let x2 = a.a42 / (a.a42 - a.a41);
            return Ok(case(Family::X1X3Zero, [0.0, x2, 0.0, 1.0 - x2]));
        }
    }

    Ok(SpecialCase {
        family: Family::Generic,
        x: None,
    })
}

fn case(family: Family, x: [f64; 4]) -> SpecialCase {
    SpecialCase { family, x: Some(x) }
}

/// Residual of the multiplier system, for verification.
pub fn kkt_residual(a: &LpCoefficients, cost: [f64; 4], v: [f64; 4]) -> f64 {
    let lhs = [
        a.a11 * v[0] + a.a31 * v[2],
        a.a12 * v[0] + a.a41 * v[3],
        a.a21 * v[1] + a.a32 * v[2],
        a.a22 * v[1] + a.a42 * v[3],
    ];
    lhs.iter()
        .zip(&cost)
        .map(|(l, c)| (l - c).abs())
        .fold(0.0, f64::max)
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    fn random_coeffs(rng: &mut ChaCha8Rng) -> LpCoefficients {
        loop {
            let a = LpCoefficients::from_free(
                rng.gen_range(-2.0..2.0),
                rng.gen_range(-2.0..2.0),
                rng.gen_range(-2.0..2.0),
                rng.gen_range(-2.0..2.0),
                rng.gen_range(-2.0..2.0),
                rng.gen_range(-2.0..2.0),
            );
            if det(&a).abs() > 1e-3 {
                return a;
            }
        }
    }

    #[test]
    fn zero_cost_gives_zero_multipliers() {
        let mut rng = ChaCha8Rng::seed_from_u64(5);
        let a = random_coeffs(&mut rng);
        assert_eq!(kkt_multipliers(&a, [0.0; 4]).unwrap(), [0.0; 4]);
    }

    #[test]
    fn residual_small_on_random_nonsingular_instances() {
        let mut rng = ChaCha8Rng::seed_from_u64(6);
        for _ in 0..200 {
            let a = random_coeffs(&mut rng);
            let cost = [
                rng.gen_range(-1.0..1.0),
                rng.gen_range(-1.0..1.0),
                rng.gen_range(-1.0..1.0),
                rng.gen_range(-1.0..1.0),
            ];
            let v = kkt_multipliers(&a, cost).unwrap();
            assert!(kkt_residual(&a, cost, v) <= 1e-9);
        }
    }

    #[test]
    fn v1_matches_the_closed_form() {
        let a = LpCoefficients::from_free(0.7, -0.4, 0.9, -1.3, 0.2, 1.1);
        let cost = [0.3, -0.8, 0.5, 0.1];
        let v = kkt_multipliers(&a, cost).unwrap();
        let d = a.a11 * a.a41 * a.a32 * a.a22 - a.a31 * a.a12 * a.a21 * a.a42;
        let v1 = (a.a31 * a.a41 * a.a21 * cost[3] - a.a31 * a.a41 * a.a22 * cost[2]
            - a.a31 * a.a21 * a.a42 * cost[1]
            + a.a41 * a.a32 * a.a22 * cost[0])
            / d;
        assert!((v[0] - v1).abs() < 1e-15);
    }

    #[test]
    fn singular_system_rejected() {
        // a11 = 0 forces a21 = 0 too, so both determinant products vanish.
        let a = LpCoefficients::from_free(0.0, 1.0, 0.5, 0.5, 0.5, 0.5);
        assert!(matches!(
            kkt_multipliers(&a, [1.0; 4]),
            Err(Error::SingularSystem { .. })
        ));
    }

    /// Builds a cost vector that makes the multipliers exactly `v`.
    fn cost_for(a: &LpCoefficients, v: [f64; 4]) -> [f64; 4] {
        [
            a.a11 * v[0] + a.a31 * v[2],
            a.a12 * v[0] + a.a41 * v[3],
            a.a21 * v[1] + a.a32 * v[2],
            a.a22 * v[1] + a.a42 * v[3],
        ]
    }

    #[test]
    fn engineered_conditions_select_the_stated_corners() {
        let mut rng = ChaCha8Rng::seed_from_u64(7);
        for _ in 0..50 {
            let a = random_coeffs(&mut rng);

            // v2 = v3 = 0 -> v2*a21 = 0 and v3*a32 = 0 -> x = (0,0,1,0).
            let cost = cost_for(&a, [rng.gen_range(0.1..1.0), 0.0, 0.0, rng.gen_range(0.1..1.0)]);
            let sc = special_case(&a, cost).unwrap();
            assert_eq!(sc.family, Family::X2X4Zero);
            let x = sc.x.unwrap();
            assert_eq!(x[1], 0.0);
            assert_eq!(x[3], 0.0);
            assert!((x[0] + x[2] - 1.0).abs() < 1e-12);

            // v2 = v4 = 0 -> v2*a22 = 0 and v4*a42 = 0 -> x1 = x3 = 0,
            // unless the first family's list already fired (v2 = 0 also
            // appears there), which the classifier checks first.
            let cost = cost_for(&a, [rng.gen_range(0.1..1.0), 0.0, rng.gen_range(0.1..1.0), 0.0]);
            let sc = special_case(&a, cost).unwrap();
            assert!(matches!(sc.family, Family::X1X3Zero | Family::X2X4Zero));
        }
    }

    #[test]
    fn interior_split_example() {
        // a31 = -1, a32 = 1 with v1 = v2 = 0 puts half the mass on each
        // give-up cell.
        let mut rng = ChaCha8Rng::seed_from_u64(8);
        loop {
            let mut a = random_coeffs(&mut rng);
            a.a31 = -1.0;
            a.a32 = 1.0;
            if det(&a).abs() <= 1e-3 {
                continue;
            }
            let cost = cost_for(&a, [0.0, 0.0, rng.gen_range(0.5..1.0), rng.gen_range(0.5..1.0)]);
            let sc = special_case(&a, cost).unwrap();
            assert_eq!(sc.family, Family::X2X4Zero);
            let x = sc.x.unwrap();
            assert!((x[0] - 0.5).abs() < 1e-12);
            assert!((x[2] - 0.5).abs() < 1e-12);
            break;
        }
    }
}
