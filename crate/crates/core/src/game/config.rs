use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

const PREF_SUM_TOL: f64 = 1e-12;

/// All constants of one game instance.
///
/// `c_a`/`c_b` bracket the gradient map (Lipschitz in both directions),
/// `c_0`/`c_2` bracket the attacker's cumulative optimization residual,
/// `p` is the residual-growth exponent, `D` bounds the data norm, `x` and
/// `y` shape the protection and attack cost curves, and `round_cap = 1/eps`
/// caps the attacking extent.
#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct GameConfig {
    pub c_a: f64,
    pub c_b: f64,
    pub c_0: f64,
    pub c_2: f64,
    pub p: f64,
    #[serde(rename = "D")]
    pub d: f64,
    pub x: f64,
    pub y: f64,
    pub round_cap: u32,
    pub num_defenders: usize,
    /// Per-defender preference triple (eta_m, eta_p, eta_c); each sums to 1.
    pub defender_prefs: Vec<[f64; 3]>,
    /// Attacker preference pair (eta_pa, eta_ca); sums to 1.
    pub attacker_prefs: [f64; 2],
    /// Baseline model performance P_m per defender, in [0, 1].
    pub baseline_perf: Vec<f64>,
}

impl GameConfig {
    /// Validates every hard invariant and returns the non-fatal warnings.
    ///
    /// Range constraints and preference sums fail construction. The two
    /// bound-validity inequalities (`c_b + c_b*c_2 <= D` and
    /// `2*c_2*c_b/c_a <= D`) and the `D != 1` cost-range caveat only warn:
    /// the payoff formulas stay well defined without them, and the
    /// all-negative attacker regime is only reachable outside them.
    pub fn validate(&self) -> Result<Vec<String>> {
        let fail = |m: String| Err(Error::InvalidConfig(m));
        if !(self.c_a > 0.0 && self.c_a <= self.c_b) {
            return fail(format!("require 0 < c_a <= c_b, got c_a={}, c_b={}", self.c_a, self.c_b));
        }
        if !(self.c_0 > 0.0 && self.c_0 <= self.c_2) {
            return fail(format!("require 0 < c_0 <= c_2, got c_0={}, c_2={}", self.c_0, self.c_2));
        }
        if !(self.p > 0.0 && self.p < 1.0) {
            return fail(format!("require p in (0,1), got p={}", self.p));
        }
        if !(self.d > 0.0) {
            return fail(format!("require D > 0, got D={}", self.d));
        }
        if !(self.x > 0.0) {
            return fail(format!("require x > 0, got x={}", self.x));
        }
        if !(self.y >= 0.0) {
            return fail(format!("require y >= 0, got y={}", self.y));
        }
        if self.round_cap == 0 {
            return fail("require round_cap >= 1".to_string());
        }
        if self.num_defenders == 0 {
            return fail("require num_defenders >= 1".to_string());
        }
        if self.defender_prefs.len() != self.num_defenders {
            return fail(format!(
                "defender_prefs has {} entries, expected num_defenders={}",
                self.defender_prefs.len(),
                self.num_defenders
            ));
        }
        if self.baseline_perf.len() != self.num_defenders {
            return fail(format!(
                "baseline_perf has {} entries, expected num_defenders={}",
                self.baseline_perf.len(),
                self.num_defenders
            ));
        }
        for (k, prefs) in self.defender_prefs.iter().enumerate() {
            if prefs.iter().any(|v| !(0.0..=1.0).contains(v)) {
                return fail(format!("defender_prefs[{k}] components must lie in [0,1]"));
            }
            let sum: f64 = prefs.iter().sum();
            if (sum - 1.0).abs() > PREF_SUM_TOL {
                return fail(format!("defender_prefs[{k}] sums to {sum}, expected 1"));
            }
        }
        if self.attacker_prefs.iter().any(|v| !(0.0..=1.0).contains(v)) {
            return fail("attacker_prefs components must lie in [0,1]".to_string());
        }
        let asum: f64 = self.attacker_prefs.iter().sum();
        if (asum - 1.0).abs() > PREF_SUM_TOL {
            return fail(format!("attacker_prefs sums to {asum}, expected 1"));
        }
        for (k, perf) in self.baseline_perf.iter().enumerate() {
            if !(0.0..=1.0).contains(perf) {
                return fail(format!("baseline_perf[{k}]={perf} must lie in [0,1]"));
            }
        }

        let mut warnings = Vec::new();
        if self.c_b + self.c_b * self.c_2 > self.d {
            warnings.push(format!(
                "c_b + c_b*c_2 = {} exceeds D = {}; the leakage lower bound may be vacuous at small attack extents",
                self.c_b + self.c_b * self.c_2,
                self.d
            ));
        }
        if 2.0 * self.c_2 * self.c_b / self.c_a > self.d {
            warnings.push(format!(
                "2*c_2*c_b/c_a = {} exceeds D = {}; the saturated-leakage interval may extend past D",
                2.0 * self.c_2 * self.c_b / self.c_a,
                self.d
            ));
        }
        if (self.d - 1.0).abs() > PREF_SUM_TOL {
            warnings.push(format!(
                "D = {} differs from 1; protection costs delta^x are only guaranteed to stay in [0,1] for D = 1",
                self.d
            ));
        }
        Ok(warnings)
    }

    /// Parses a config from JSON, rejecting unknown fields, and validates it.
    pub fn from_json(text: &str) -> Result<(Self, Vec<String>)> {
        let cfg: GameConfig =
            serde_json::from_str(text).map_err(|e| Error::InvalidConfig(e.to_string()))?;
        let warnings = cfg.validate()?;
        Ok((cfg, warnings))
    }

    pub fn eta_m(&self, k: usize) -> f64 {
        self.defender_prefs[k][0]
    }

    pub fn eta_p(&self, k: usize) -> f64 {
        self.defender_prefs[k][1]
    }

    pub fn eta_c(&self, k: usize) -> f64 {
        self.defender_prefs[k][2]
    }

    pub fn eta_pa(&self) -> f64 {
        self.attacker_prefs[0]
    }

    pub fn eta_ca(&self) -> f64 {
        self.attacker_prefs[1]
    }

    pub fn num_defenders_f(&self) -> f64 {
        self.num_defenders as f64
    }
}

/// One strategy per player: a protection extent per defender plus the
/// attacker's (real-valued) number of reconstruction rounds.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct StrategyProfile {
    pub deltas: Vec<f64>,
    pub attack_rounds: f64,
}

impl StrategyProfile {
    pub fn new(deltas: Vec<f64>, attack_rounds: f64, cfg: &GameConfig) -> Result<Self> {
        if deltas.len() != cfg.num_defenders {
            return Err(Error::Domain(format!(
                "profile has {} deltas, config has {} defenders",
                deltas.len(),
                cfg.num_defenders
            )));
        }
        for (k, delta) in deltas.iter().enumerate() {
            if !(0.0..=cfg.d).contains(delta) {
                return Err(Error::Domain(format!(
                    "delta[{k}]={delta} outside [0, D={}]",
                    cfg.d
                )));
            }
        }
        if !(0.0..=cfg.round_cap as f64).contains(&attack_rounds) {
            return Err(Error::Domain(format!(
                "attack_rounds={attack_rounds} outside [0, {}]",
                cfg.round_cap
            )));
        }
        Ok(Self { deltas, attack_rounds })
    }

    /// Mean protection extent over all defenders.
    pub fn delta_mean(&self) -> f64 {
        self.deltas.iter().sum::<f64>() / self.deltas.len() as f64
    }
}
