use serde::{Deserialize, Serialize};

use crate::equilibrium::best_response::{
    attacker_best_response, defender_best_response, hat_attack_rounds, zero_eq_threshold,
};
use crate::equilibrium::THRESHOLD_BOUNDARY_TOL;
use crate::error::Result;
use crate::game::{
    attacker_lower_uniform, attacker_payoff_bounds, defender_payoff_bounds, robust_value,
    GameConfig, RobustOperator, StrategyProfile,
};

/// Which closed-form assumptions the config satisfies.
#[derive(Debug, Clone, Copy, Serialize, Deserialize)]
pub struct RegularityReport {
    /// `eta_pa * c_b * c_2 * (1-p) * (2-p) >= D * y * (y+1) * eta_ca`:
    /// the attacker payoff is concave in the extent on `[1, round_cap]`.
    pub second_order_ok: bool,
    /// `y > 1 - p` (strict); the stationary-point formula is defined.
    pub exponent_ok: bool,
    /// Sign of the no-attack threshold; absent when the threshold itself is
    /// undefined (exponent_ok false or eta_pa = 0).
    pub threshold_nonneg: Option<bool>,
    /// Numerical concavity verification (central second differences at 50
    /// log-spaced extents); only run when both flags hold.
    pub concavity_ok: Option<bool>,
}

/// Flags computed exactly, with no tolerance.
pub fn check_regularity(cfg: &GameConfig) -> RegularityReport {
    let second_order_ok = cfg.eta_pa() * cfg.c_b * cfg.c_2 * (1.0 - cfg.p) * (2.0 - cfg.p)
        >= cfg.d * cfg.y * (cfg.y + 1.0) * cfg.eta_ca();
    let exponent_ok = cfg.y > 1.0 - cfg.p;
    let threshold_nonneg = zero_eq_threshold(cfg).ok().map(|t| t >= 0.0);
    let concavity_ok = if second_order_ok && exponent_ok {
        Some(concavity_holds(cfg))
    } else {
        None
    };
    RegularityReport {
        second_order_ok,
        exponent_ok,
        threshold_nonneg,
        concavity_ok,
    }
}

fn concavity_holds(cfg: &GameConfig) -> bool {
    let cap = cfg.round_cap as f64;
    let points = 50;
    (0..points).all(|i| {
        let t = cap.powf(i as f64 / (points - 1) as f64);
        let h = 1e-3 * t;
        let f = |c: f64| attacker_lower_uniform(cfg, 0.0, c);
        let second = (f(t + h) - 2.0 * f(t) + f(t - h)) / (h * h);
        second <= 1e-8
    })
}

/// `eta_pa * c_b * c_2 * (1-p) >= y * eta_ca * D * tau^(1-p-y)`, the
/// condition under which the stationary extent stays at or below `tau`.
pub fn tau_condition(cfg: &GameConfig, tau: f64) -> bool {
    cfg.eta_pa() * cfg.c_b * cfg.c_2 * (1.0 - cfg.p)
        >= cfg.y * cfg.eta_ca() * cfg.d * tau.powf(1.0 - cfg.p - cfg.y)
}

pub fn tau_equilibrium_check(cfg: &GameConfig, tau: u32) -> bool {
    tau_condition(cfg, tau as f64)
}

/// Equilibrium classification for the computed profile.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Classification {
    /// Attacker's optimal extent is 0; nobody protects, nobody attacks.
    ZeroEquilibrium,
    /// The attack extent is positive but capped by the supplied tau.
    TauEquilibrium(u32),
    General,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct RobustPayoffs {
    pub defenders: Vec<f64>,
    pub attacker: f64,
}

/// Output of the robust-equilibrium orchestration.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct EquilibriumReport {
    pub deltas: Vec<f64>,
    pub attack_rounds: f64,
    pub hat_ca: f64,
    pub threshold: f64,
    pub classification: Classification,
    pub regularity: RegularityReport,
    pub robust_payoffs: RobustPayoffs,
    /// Both sides verified as best responses on their candidate sets.
    pub mutual_best_response: bool,
    /// The two-pass orchestration cycled (protection kills the attack, but
    /// no attack removes the incentive to protect).
    pub no_fixed_point: bool,
    /// The threshold sits within 1e-9 of zero; its sign is not trustworthy.
    pub boundary_warning: bool,
}

/// Two-pass orchestration: the attacker's conditional extent does not depend
/// on the protection profile, so one defender pass and one attacker
/// recomputation either reach a fixed point or prove there is none.
///
/// Best responses are always taken on the worst-case (lower bound) payoffs,
/// matching the equilibrium analysis; `op` only selects how the payoffs at
/// the resulting profile are reported.
pub fn robust_equilibrium(
    cfg: &GameConfig,
    op: RobustOperator,
    tau: Option<u32>,
) -> Result<EquilibriumReport> {
    let regularity = check_regularity(cfg);
    let hat_ca = hat_attack_rounds(cfg)?;
    let threshold = zero_eq_threshold(cfg)?;
    let boundary_warning = threshold.abs() < THRESHOLD_BOUNDARY_TOL;

    let k_count = cfg.num_defenders;
    if threshold < 0.0 {
        let deltas = vec![0.0; k_count];
        let report = finish_report(
            cfg,
            op,
            deltas,
            0,
            hat_ca,
            threshold,
            Classification::ZeroEquilibrium,
            regularity,
            boundary_warning,
            false,
        )?;
        return Ok(report);
    }

    let tentative = attacker_best_response(cfg, &vec![0.0; k_count])?;
    if tentative == 0 {
        // Only reachable on the threshold boundary: attacking and not
        // attacking tie at zero protection.
        let deltas = vec![0.0; k_count];
        return finish_report(
            cfg,
            op,
            deltas,
            0,
            hat_ca,
            threshold,
            Classification::General,
            regularity,
            boundary_warning,
            false,
        );
    }

    let mut deltas = Vec::with_capacity(k_count);
    for k in 0..k_count {
        deltas.push(defender_best_response(cfg, k, tentative as f64)?);
    }
    let recomputed = attacker_best_response(cfg, &deltas)?;
    let no_fixed_point = recomputed != tentative;

    let classification = if no_fixed_point {
        Classification::General
    } else {
        match tau {
            Some(t) if tau_equilibrium_check(cfg, t) && recomputed >= 1 && recomputed <= t => {
                Classification::TauEquilibrium(t)
            }
            _ => Classification::General,
        }
    };

    finish_report(
        cfg,
        op,
        deltas,
        recomputed,
        hat_ca,
        threshold,
        classification,
        regularity,
        boundary_warning,
        no_fixed_point,
    )
}

#[allow(clippy::too_many_arguments)]
fn finish_report(
    cfg: &GameConfig,
    op: RobustOperator,
    deltas: Vec<f64>,
    attack_rounds: u32,
    hat_ca: f64,
    threshold: f64,
    classification: Classification,
    regularity: RegularityReport,
    boundary_warning: bool,
    no_fixed_point: bool,
) -> Result<EquilibriumReport> {
    let mutual = if no_fixed_point {
        false
    } else {
        verify_mutual_best_response(cfg, &deltas, attack_rounds)?
    };
    let profile = StrategyProfile::new(deltas.clone(), attack_rounds as f64, cfg)?;
    let defenders = (0..cfg.num_defenders)
        .map(|k| Ok(robust_value(defender_payoff_bounds(&profile, k, cfg)?, op)))
        .collect::<Result<Vec<_>>>()?;
    let attacker = robust_value(attacker_payoff_bounds(&profile, cfg)?, op);
    Ok(EquilibriumReport {
        deltas,
        attack_rounds: attack_rounds as f64,
        hat_ca,
        threshold,
        classification,
        regularity,
        robust_payoffs: RobustPayoffs { defenders, attacker },
        mutual_best_response: mutual,
        no_fixed_point,
        boundary_warning,
    })
}

fn verify_mutual_best_response(cfg: &GameConfig, deltas: &[f64], rounds: u32) -> Result<bool> {
    if attacker_best_response(cfg, deltas)? != rounds {
        return Ok(false);
    }
    for (k, &delta_k) in deltas.iter().enumerate() {
        let candidate = if rounds >= 1 {
            defender_best_response(cfg, k, rounds as f64)?
        } else {
            // Without an attack the payoff decreases in the own extent.
            0.0
        };
        let value_at = |d: f64| -> Result<f64> {
            let mut ds = deltas.to_vec();
            ds[k] = d;
            let profile = StrategyProfile::new(ds, rounds as f64, cfg)?;
            Ok(defender_payoff_bounds(&profile, k, cfg)?.lower)
        };
        if value_at(delta_k)? < value_at(candidate)? - 1e-12 {
            return Ok(false);
        }
    }
    Ok(true)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::game::test_support::config_with;

    fn regular_config() -> GameConfig {
        config_with(|c| {
            c.d = 1.0;
            c.c_a = 0.6;
            c.c_b = 0.6;
            c.c_0 = 0.4;
            c.c_2 = 0.5;
            c.p = 0.5;
            c.y = 1.0;
            c.attacker_prefs = [0.95, 0.05];
        })
    }

    #[test]
    fn regularity_flags() {
        let cfg = regular_config();
        let report = check_regularity(&cfg);
        assert!(report.second_order_ok);
        assert!(report.exponent_ok);
        assert_eq!(report.concavity_ok, Some(true));

        let cfg = config_with(|c| {
            c.p = 0.3;
            c.y = 0.5; // y <= 1 - p
        });
        assert!(!check_regularity(&cfg).exponent_ok);

        let cfg = config_with(|c| c.attacker_prefs = [1.0, 0.0]);
        assert!(check_regularity(&cfg).second_order_ok);
    }

    #[test]
    fn tau_check_examples() {
        // Equality holds exactly: eta_pa*c_b*c_2*(1-p) = y*eta_ca*D*tau^(1-p-y)
        // at tau = 1 means eta_pa*c_b*c_2*(1-p) = y*eta_ca*D.
        let cfg = config_with(|c| {
            c.d = 1.0;
            c.c_b = 1.0;
            c.c_a = 0.5;
            c.c_2 = 0.5;
            c.c_0 = 0.25;
            c.p = 0.5;
            c.y = 1.0;
            c.attacker_prefs = [0.8, 0.2];
        });
        assert!(tau_equilibrium_check(&cfg, 1));

        let cfg = config_with(|c| c.y = 0.0);
        for tau in [1, 5, 10_000] {
            assert!(tau_equilibrium_check(&cfg, tau));
        }
    }

    #[test]
    fn tau_condition_scaling_invariance() {
        for lambda in [0.5, 2.0] {
            let base = regular_config();
            let tau = 7.0;
            let before = tau_condition(&base, tau);
            let mut scaled = base.clone();
            scaled.c_2 *= lambda;
            scaled.c_0 *= lambda.min(1.0); // keep c_0 <= c_2
            let tau_scaled = tau * lambda.powf(1.0 / (1.0 - base.p - base.y));
            assert_eq!(before, tau_condition(&scaled, tau_scaled));
        }
    }

    #[test]
    fn zero_equilibrium_pipeline() {
        let cfg = config_with(|c| {
            c.d = 1.0;
            c.c_b = 2.0;
            c.c_a = 1.8;
            c.c_0 = 0.9;
            c.c_2 = 1.0;
            c.attacker_prefs = [0.3, 0.7];
        });
        let report = robust_equilibrium(&cfg, RobustOperator::WorstCase, None).unwrap();
        assert_eq!(report.classification, Classification::ZeroEquilibrium);
        assert_eq!(report.attack_rounds, 0.0);
        assert!(report.deltas.iter().all(|&d| d == 0.0));
        assert!(report.mutual_best_response);
        assert!(!report.no_fixed_point);
        assert!((report.robust_payoffs.attacker - 0.0).abs() < 1e-15);
    }

    #[test]
    fn general_profile_is_mutual_best_response() {
        let cfg = regular_config();
        let report = robust_equilibrium(&cfg, RobustOperator::WorstCase, None).unwrap();
        assert!(report.threshold >= 0.0);
        assert!(report.attack_rounds >= 1.0);
        assert!(report.mutual_best_response);

        // Unilateral attacker deviations over the full integer range.
        let profile =
            StrategyProfile::new(report.deltas.clone(), report.attack_rounds, &cfg).unwrap();
        let at_profile = attacker_payoff_bounds(&profile, &cfg).unwrap().lower;
        for c in 0..=cfg.round_cap {
            let dev = StrategyProfile::new(report.deltas.clone(), c as f64, &cfg).unwrap();
            let v = attacker_payoff_bounds(&dev, &cfg).unwrap().lower;
            assert!(v <= at_profile + 1e-9, "attack extent {c} improves on the profile");
        }
    }

    #[test]
    fn report_serializes_classification_as_snake_case() {
        let cfg = config_with(|c| {
            c.d = 1.0;
            c.c_b = 2.0;
            c.c_a = 1.8;
            c.c_0 = 0.9;
            c.c_2 = 1.0;
            c.attacker_prefs = [0.3, 0.7];
        });
        let report = robust_equilibrium(&cfg, RobustOperator::WorstCase, None).unwrap();
        let json = serde_json::to_string(&report).unwrap();
        assert!(json.contains("\"zero_equilibrium\""));
    }
}
