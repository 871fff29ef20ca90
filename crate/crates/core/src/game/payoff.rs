use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::game::config::{GameConfig, StrategyProfile};

/// A lower/upper payoff (or leakage) bound pair as published by the oracle.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Interval {
    pub lower: f64,
    pub upper: f64,
}

impl Interval {
    /// Ordering is an invariant of every formula that produces intervals,
    /// so a violation is a bug rather than an input error.
    pub fn new(lower: f64, upper: f64) -> Self {
        assert!(
            lower <= upper + 1e-12,
            "interval ordering violated: lower={lower} > upper={upper}"
        );
        Self { lower, upper }
    }

    pub fn degenerate(value: f64) -> Self {
        Self { lower: value, upper: value }
    }

    pub fn midpoint(&self) -> f64 {
        0.5 * (self.lower + self.upper)
    }
}

/// Scalarization of a payoff interval.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum RobustOperator {
    /// Evaluate an interval at its lower endpoint.
    WorstCase,
    /// Evaluate an interval at its midpoint (uniform law over the interval).
    UniformExpectation,
}

pub fn robust_value(iv: Interval, op: RobustOperator) -> f64 {
    match op {
        RobustOperator::WorstCase => iv.lower,
        RobustOperator::UniformExpectation => iv.midpoint(),
    }
}

/// Whether the protection extent falls inside the saturated-leakage interval
/// [C_l, C_u] for the given attack extent.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum LeakageRegime {
    Interior,
    Exterior,
}

/// Leakage bound pair with the regime and the interval endpoints it came from.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct LeakageBounds {
    pub bounds: Interval,
    pub regime: LeakageRegime,
    pub c_lo: f64,
    pub c_hi: f64,
}

/// Protection cost delta^x.
pub fn protection_cost(delta: f64, x: f64) -> Result<f64> {
    if !(delta >= 0.0) {
        return Err(Error::Domain(format!("protection cost needs delta >= 0, got {delta}")));
    }
    Ok(delta.powf(x))
}

/// Attack cost 1 - rounds^(-y), normalized so one round is free.
///
/// Rejects rounds = 0; the no-attack case is a separate branch of every
/// payoff formula, not a cost of zero rounds.
pub fn attack_cost(rounds: f64, y: f64) -> Result<f64> {
    if !(rounds > 0.0) {
        return Err(Error::Domain(format!("attack cost needs rounds > 0, got {rounds}")));
    }
    Ok(1.0 - rounds.powf(-y))
}

/// Empirical privacy leakage (D - mean reconstruction distance) / D.
///
/// An empty trajectory means no attack happened and leaks nothing.
pub fn privacy_leakage_empirical(distances: &[f64], d: f64) -> Result<f64> {
    if distances.is_empty() {
        return Ok(0.0);
    }
    for (t, dist) in distances.iter().enumerate() {
        if !(0.0..=d).contains(dist) {
            return Err(Error::Domain(format!(
                "distance[{t}]={dist} outside [0, D={d}]"
            )));
        }
    }
    let mean = distances.iter().sum::<f64>() / distances.len() as f64;
    Ok((d - mean) / d)
}

/// Saturated-leakage interval endpoints for attack extent `rounds` > 0.
pub(crate) fn leakage_interval(cfg: &GameConfig, rounds: f64) -> (f64, f64) {
    let tp = rounds.powf(cfg.p - 1.0);
    let c_lo = cfg.c_a * cfg.c_0 / (2.0 * cfg.c_b) * tp;
    let c_hi = 2.0 * cfg.c_2 * cfg.c_b / cfg.c_a * tp;
    (c_lo, c_hi)
}

pub(crate) fn leakage_lower(cfg: &GameConfig, delta: f64, rounds: f64) -> f64 {
    1.0 - (cfg.c_b * delta + cfg.c_b * cfg.c_2 * rounds.powf(cfg.p - 1.0)) / cfg.d
}

fn leakage_upper_exterior(cfg: &GameConfig, delta: f64, rounds: f64) -> f64 {
    1.0 - (cfg.c_a * delta + cfg.c_a * cfg.c_0 * rounds.powf(cfg.p - 1.0)) / (4.0 * cfg.d)
}

/// Lower/upper privacy-leakage bounds for one defender.
///
/// Membership in [C_l, C_u] is closed on both ends, so boundary points take
/// the saturated upper bound of 1.
pub fn privacy_leakage_bounds(delta: f64, rounds: f64, cfg: &GameConfig) -> Result<LeakageBounds> {
    if !(0.0..=cfg.d).contains(&delta) {
        return Err(Error::Domain(format!("delta={delta} outside [0, D={}]", cfg.d)));
    }
    if !(rounds >= 0.0) {
        return Err(Error::Domain(format!("rounds={rounds} must be >= 0")));
    }
    if rounds == 0.0 {
        return Ok(LeakageBounds {
            bounds: Interval::degenerate(0.0),
            regime: LeakageRegime::Exterior,
            c_lo: f64::INFINITY,
            c_hi: f64::INFINITY,
        });
    }
    let (c_lo, c_hi) = leakage_interval(cfg, rounds);
    let lower = leakage_lower(cfg, delta, rounds);
    let (regime, upper) = if delta >= c_lo && delta <= c_hi {
        (LeakageRegime::Interior, 1.0)
    } else {
        (LeakageRegime::Exterior, leakage_upper_exterior(cfg, delta, rounds))
    };
    Ok(LeakageBounds {
        bounds: Interval::new(lower, upper),
        regime,
        c_lo,
        c_hi,
    })
}

/// Model-utility interval [P_m - mean delta, P_m]; the lower end may go
/// negative and is deliberately not clamped.
pub fn model_utility_bounds(delta_mean: f64, perf: f64) -> Interval {
    Interval::new(perf - delta_mean, perf)
}

/// Payoff interval for defender `k` at the given profile.
pub fn defender_payoff_bounds(
    profile: &StrategyProfile,
    k: usize,
    cfg: &GameConfig,
) -> Result<Interval> {
    if k >= cfg.num_defenders {
        return Err(Error::Domain(format!(
            "defender index {k} out of range (num_defenders={})",
            cfg.num_defenders
        )));
    }
    let delta_k = profile.deltas[k];
    let delta_bar = profile.delta_mean();
    let (eta_m, eta_p, eta_c) = (cfg.eta_m(k), cfg.eta_p(k), cfg.eta_c(k));
    let perf = cfg.baseline_perf[k];
    let cost = protection_cost(delta_k, cfg.x)?;

    if profile.attack_rounds == 0.0 {
        let value = eta_m * perf - eta_m * delta_bar - eta_c * cost;
        return Ok(Interval::degenerate(value));
    }

    let leakage = privacy_leakage_bounds(delta_k, profile.attack_rounds, cfg)?;
    let lower = match leakage.regime {
        LeakageRegime::Interior => eta_m * perf - eta_m * delta_bar - eta_p - eta_c * cost,
        LeakageRegime::Exterior => {
            eta_m * perf - eta_m * delta_bar - eta_p * leakage.bounds.upper - eta_c * cost
        }
    };
    let upper = eta_m * perf - eta_p * leakage.bounds.lower - eta_c * cost;
    Ok(Interval::new(lower, upper))
}

/// Payoff interval for the attacker at the given profile.
pub fn attacker_payoff_bounds(profile: &StrategyProfile, cfg: &GameConfig) -> Result<Interval> {
    if profile.attack_rounds == 0.0 {
        return Ok(Interval::degenerate(0.0));
    }
    let eta_pa = cfg.eta_pa();
    let eta_ca = cfg.eta_ca();
    let cost_term =
        eta_ca * cfg.num_defenders_f() * attack_cost(profile.attack_rounds, cfg.y)?;
    let mut lower = -cost_term;
    let mut upper = -cost_term;
    for &delta_k in &profile.deltas {
        let leakage = privacy_leakage_bounds(delta_k, profile.attack_rounds, cfg)?;
        lower += eta_pa * leakage.bounds.lower;
        upper += match leakage.regime {
            LeakageRegime::Interior => eta_pa,
            LeakageRegime::Exterior => eta_pa * leakage.bounds.upper,
        };
    }
    Ok(Interval::new(lower, upper))
}

/// Attacker lower-bound payoff when every defender protects with the same
/// extent. The closed form avoids allocating a profile in grid scans.
pub(crate) fn attacker_lower_uniform(cfg: &GameConfig, delta: f64, rounds: f64) -> f64 {
    if rounds == 0.0 {
        return 0.0;
    }
    let k = cfg.num_defenders_f();
    cfg.eta_pa() * k * leakage_lower(cfg, delta, rounds)
        - cfg.eta_ca() * k * (1.0 - rounds.powf(-cfg.y))
}
