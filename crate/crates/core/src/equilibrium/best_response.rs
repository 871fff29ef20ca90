use serde::{Deserialize, Serialize};

use crate::equilibrium::THRESHOLD_BOUNDARY_TOL;
use crate::error::{Error, Result};
use crate::game::{
    attacker_payoff_bounds, defender_payoff_bounds, GameConfig, StrategyProfile,
};
use crate::game::{attacker_lower_uniform, leakage_interval};

/// Stationary point of the attacker's lower-bound payoff in the attacking
/// extent: `(y*eta_ca*D / (eta_pa*c_b*c_2*(1-p)))^(1/(p+y-1))`.
///
/// Requires `y > 1 - p` (the exponent is undefined otherwise) and a positive
/// attacker privacy preference.
pub fn hat_attack_rounds(cfg: &GameConfig) -> Result<f64> {
    if cfg.eta_pa() <= 0.0 {
        return Err(Error::Regularity(
            "hat attack rounds undefined: eta_pa = 0 divides the stationarity equation".into(),
        ));
    }
    let exponent_base = cfg.p + cfg.y - 1.0;
    if exponent_base <= 0.0 {
        return Err(Error::Regularity(format!(
            "hat attack rounds undefined: require y > 1 - p (exponent_ok), got y={}, p={}",
            cfg.y, cfg.p
        )));
    }
    let denom = cfg.eta_pa() * cfg.c_b * cfg.c_2 * (1.0 - cfg.p);
    let ratio = cfg.y * cfg.eta_ca() * cfg.d / denom;
    Ok(ratio.powf(1.0 / exponent_base))
}

/// The protection-sum threshold formula evaluated at a given attacking
/// extent: the total extent at which the attacker's lower-bound payoff for
/// exactly `rounds` rounds crosses zero.
///
/// At `rounds = 1` the two attacker-cost terms cancel and the expression
/// collapses to `|C| * (D/c_b - c_2)`.
pub fn threshold_rhs_at(cfg: &GameConfig, rounds: f64) -> Result<f64> {
    if cfg.eta_pa() <= 0.0 {
        return Err(Error::Regularity(
            "threshold undefined: eta_pa = 0 divides the cost terms".into(),
        ));
    }
    let k = cfg.num_defenders_f();
    let cost_scale = cfg.eta_ca() * k * cfg.d / (cfg.eta_pa() * cfg.c_b);
    Ok(cfg.d / cfg.c_b * k - cfg.c_2 * k * rounds.powf(cfg.p - 1.0) - cost_scale
        + cost_scale * rounds.powf(-cfg.y))
}

/// The attacker's optimal integer extent conditional on attacking, i.e. the
/// argmax of the lower-bound payoff over `{1, ..., round_cap}`.
///
/// The payoff separates into a term that depends only on the extent plus a
/// term that depends only on the protection profile, so this argmax is the
/// same for every profile. With `y > 1 - p` the payoff dips to its minimum
/// at the stationary point and rises on either side, so the argmax is an
/// endpoint; the stationary point's integer neighbours stay in the
/// candidate set anyway.
pub fn best_conditional_extent(cfg: &GameConfig) -> Result<u32> {
    let hat = hat_attack_rounds(cfg)?;
    let cap = cfg.round_cap;
    let clamped = hat.clamp(1.0, cap as f64);
    let mut candidates = vec![1u32, clamped.floor() as u32, clamped.ceil() as u32, cap];
    candidates.sort_unstable();
    candidates.dedup();
    let mut best = candidates[0];
    let mut best_value = attacker_lower_uniform(cfg, 0.0, best as f64);
    for &c in &candidates[1..] {
        let value = attacker_lower_uniform(cfg, 0.0, c as f64);
        if value > best_value {
            best = c;
            best_value = value;
        }
    }
    Ok(best)
}

/// Total protection extent above which every attack of any admissible
/// extent yields a negative lower-bound payoff.
///
/// Evaluates the threshold formula at the attacker's optimal conditional
/// extent, which makes `sum(delta) > threshold  <=>  U_a(C, delta) < 0 for
/// every C in [1, round_cap]` exact.
pub fn zero_eq_threshold(cfg: &GameConfig) -> Result<f64> {
    let extent = best_conditional_extent(cfg)?;
    threshold_rhs_at(cfg, extent as f64)
}

/// Outcome of the zero-equilibrium test.
#[derive(Debug, Clone, Copy, Serialize, Deserialize)]
pub struct ZeroEqDecision {
    pub is_zero_equilibrium: bool,
    pub threshold: f64,
    /// Set when the threshold sits within 1e-9 of zero; the sign is then not
    /// numerically trustworthy and the classification should not be relied on.
    pub boundary_warning: bool,
}

/// Zero-equilibrium holds iff the threshold is negative: no protection is
/// needed for every attack to be unprofitable.
pub fn is_zero_equilibrium(cfg: &GameConfig) -> Result<ZeroEqDecision> {
    let threshold = zero_eq_threshold(cfg)?;
    Ok(ZeroEqDecision {
        is_zero_equilibrium: threshold < 0.0,
        threshold,
        boundary_warning: threshold.abs() < THRESHOLD_BOUNDARY_TOL,
    })
}

/// Offset used to evaluate the exterior-branch payoff just outside the
/// closed saturated-leakage interval, whose supremum is approached at the
/// boundary but attained only outside it.
const BOUNDARY_EPS_SCALE: f64 = 1e-9;

/// Defender `k`'s best protection extent against `attack_rounds >= 1`.
///
/// Covers the `x >= 1` cost regime only. The argmax in the defender's own
/// extent does not depend on the other defenders' extents (they enter the
/// payoff additively), so no profile argument is needed.
pub fn defender_best_response(cfg: &GameConfig, k: usize, attack_rounds: f64) -> Result<f64> {
    if k >= cfg.num_defenders {
        return Err(Error::Domain(format!(
            "defender index {k} out of range (num_defenders={})",
            cfg.num_defenders
        )));
    }
    if cfg.x < 1.0 {
        return Err(Error::Regularity(format!(
            "defender best response unsupported for x < 1 (got x={})",
            cfg.x
        )));
    }
    if !(attack_rounds >= 1.0) {
        return Err(Error::Domain(format!(
            "defender best response needs attack_rounds >= 1, got {attack_rounds}"
        )));
    }

    let slope_gain = cfg.eta_p(k) * cfg.c_a / (4.0 * cfg.d) - cfg.eta_m(k) / cfg.num_defenders_f();
    if slope_gain <= 0.0 {
        return Ok(0.0);
    }

    let (c_lo, c_hi) = leakage_interval(cfg, attack_rounds);
    let eps = BOUNDARY_EPS_SCALE * cfg.d;
    let mut candidates = vec![0.0, cfg.d, c_lo, c_hi, c_lo - eps, c_hi + eps];
    if cfg.x > 1.0 && cfg.eta_c(k) > 0.0 {
        candidates.push((slope_gain / (cfg.x * cfg.eta_c(k))).powf(1.0 / (cfg.x - 1.0)));
    }
    for c in &mut candidates {
        *c = c.clamp(0.0, cfg.d);
    }
    candidates.sort_by(|a, b| a.total_cmp(b));
    candidates.dedup();

    let rounds = attack_rounds.min(cfg.round_cap as f64);
    let mut best = candidates[0];
    let mut best_value = defender_lower_at(cfg, k, candidates[0], rounds)?;
    for &cand in &candidates[1..] {
        let value = defender_lower_at(cfg, k, cand, rounds)?;
        if value > best_value {
            best = cand;
            best_value = value;
        }
    }
    Ok(best)
}

fn defender_lower_at(cfg: &GameConfig, k: usize, delta_k: f64, rounds: f64) -> Result<f64> {
    let mut deltas = vec![0.0; cfg.num_defenders];
    deltas[k] = delta_k;
    let profile = StrategyProfile::new(deltas, rounds, cfg)?;
    Ok(defender_payoff_bounds(&profile, k, cfg)?.lower)
}

/// The attacker's best integer extent (including not attacking) against the
/// given protection profile. Ties break toward the smaller extent, so a
/// zero-payoff attack loses to not attacking.
pub fn attacker_best_response(cfg: &GameConfig, deltas: &[f64]) -> Result<u32> {
    if deltas.len() != cfg.num_defenders {
        return Err(Error::Domain(format!(
            "profile has {} deltas, config has {} defenders",
            deltas.len(),
            cfg.num_defenders
        )));
    }
    let hat = hat_attack_rounds(cfg)?;
    let clamped = hat.clamp(1.0, cfg.round_cap as f64);
    let mut candidates = vec![
        0u32,
        1,
        clamped.floor() as u32,
        clamped.ceil() as u32,
        cfg.round_cap,
    ];
    candidates.sort_unstable();
    candidates.dedup();

    let mut best = candidates[0];
    let mut best_value = attacker_lower_at(cfg, deltas, candidates[0])?;
    for &c in &candidates[1..] {
        let value = attacker_lower_at(cfg, deltas, c)?;
        if value > best_value {
            best = c;
            best_value = value;
        }
    }
    Ok(best)
}

fn attacker_lower_at(cfg: &GameConfig, deltas: &[f64], rounds: u32) -> Result<f64> {
    let profile = StrategyProfile::new(deltas.to_vec(), rounds as f64, cfg)?;
    Ok(attacker_payoff_bounds(&profile, cfg)?.lower)
}
