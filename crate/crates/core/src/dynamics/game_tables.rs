use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::game::{
    attacker_payoff_bounds, defender_payoff_bounds, robust_value, GameConfig, RobustOperator,
    StrategyProfile,
};

/// Per-player affine map from robust payoff to [0,1] loss:
/// `loss = (u_max - payoff) / (u_max - u_min)`.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct NormalizationConstants {
    pub u_min: Vec<f64>,
    pub u_max: Vec<f64>,
}

/// Finite joint-action loss tables for an N-player game.
///
/// Joint actions are indexed row-major over the per-player action counts;
/// `losses[player][joint]` is that player's loss in [0,1].
#[derive(Debug, Clone)]
pub struct LossTables {
    pub action_counts: Vec<usize>,
    pub losses: Vec<Vec<f64>>,
    /// Human-readable labels for each player's actions (delta levels or
    /// attack extents for the federated game).
    pub action_labels: Vec<Vec<f64>>,
}

impl LossTables {
    pub fn new(action_counts: Vec<usize>, losses: Vec<Vec<f64>>) -> Result<Self> {
        let joint: usize = action_counts.iter().product();
        if action_counts.contains(&0) {
            return Err(Error::Domain("every player needs at least one action".into()));
        }
        if losses.len() != action_counts.len() {
            return Err(Error::Domain("one loss table per player required".into()));
        }
        for (p, table) in losses.iter().enumerate() {
            if table.len() != joint {
                return Err(Error::Domain(format!(
                    "player {p} loss table has {} entries, joint space has {joint}",
                    table.len()
                )));
            }
            if table.iter().any(|l| !(0.0..=1.0).contains(l)) {
                return Err(Error::Domain(format!(
                    "player {p} losses must lie in [0,1]"
                )));
            }
        }
        let action_labels = action_counts
            .iter()
            .map(|&k| (0..k).map(|i| i as f64).collect())
            .collect();
        Ok(Self {
            action_counts,
            losses,
            action_labels,
        })
    }

    pub fn num_players(&self) -> usize {
        self.action_counts.len()
    }

    pub fn joint_size(&self) -> usize {
        self.action_counts.iter().product()
    }

    /// Row-major flat index of a joint action.
    pub fn joint_index(&self, actions: &[usize]) -> usize {
        let mut idx = 0;
        for (a, k) in actions.iter().zip(&self.action_counts) {
            idx = idx * k + a;
        }
        idx
    }

    /// Inverse of [`Self::joint_index`].
    pub fn joint_actions(&self, mut idx: usize) -> Vec<usize> {
        let mut actions = vec![0; self.num_players()];
        for p in (0..self.num_players()).rev() {
            actions[p] = idx % self.action_counts[p];
            idx /= self.action_counts[p];
        }
        actions
    }

    pub fn loss(&self, player: usize, actions: &[usize]) -> f64 {
        self.losses[player][self.joint_index(actions)]
    }
}

/// Geometric attacker action set {0, 1, 2, 4, ...} capped at `round_cap`,
/// with at most `max_len` entries.
pub fn geometric_attacker_actions(round_cap: u32, max_len: usize) -> Vec<f64> {
    let mut actions = vec![0.0, 1.0];
    let mut c = 2u64;
    while c <= round_cap as u64 && actions.len() < max_len {
        actions.push(c as f64);
        c *= 2;
    }
    if actions.last() != Some(&(round_cap as f64)) && actions.len() < max_len {
        actions.push(round_cap as f64);
    }
    actions
}

/// Builds the federated game's loss tables: players are the defenders (each
/// choosing a protection level from a uniform grid) followed by the
/// attacker (choosing an extent from the geometric set). Losses are the
/// negated robust payoffs mapped affinely onto [0,1] per player.
pub fn flpg_loss_tables(
    cfg: &GameConfig,
    op: RobustOperator,
    delta_levels: usize,
    attacker_actions: usize,
) -> Result<(LossTables, NormalizationConstants)> {
    if delta_levels < 1 || attacker_actions < 2 {
        return Err(Error::Domain(
            "need at least one delta level and two attacker actions".into(),
        ));
    }
    let deltas: Vec<f64> = if delta_levels == 1 {
        vec![0.0]
    } else {
        (0..delta_levels)
            .map(|i| cfg.d * i as f64 / (delta_levels - 1) as f64)
            .collect()
    };
    let rounds = geometric_attacker_actions(cfg.round_cap, attacker_actions);

    let num_players = cfg.num_defenders + 1;
    let mut action_counts = vec![delta_levels; cfg.num_defenders];
    action_counts.push(rounds.len());
    let joint: usize = action_counts.iter().product();

    let mut payoffs = vec![vec![0.0f64; joint]; num_players];
    let mut scratch = LossTables {
        action_counts: action_counts.clone(),
        losses: Vec::new(),
        action_labels: Vec::new(),
    };
    for idx in 0..joint {
        let actions = scratch.joint_actions(idx);
        let profile_deltas: Vec<f64> =
            actions[..cfg.num_defenders].iter().map(|&a| deltas[a]).collect();
        let attack = rounds[actions[cfg.num_defenders]];
        let profile = StrategyProfile::new(profile_deltas, attack, cfg)?;
        for (k, table) in payoffs.iter_mut().take(cfg.num_defenders).enumerate() {
            table[idx] = robust_value(defender_payoff_bounds(&profile, k, cfg)?, op);
        }
        payoffs[cfg.num_defenders][idx] =
            robust_value(attacker_payoff_bounds(&profile, cfg)?, op);
    }

    let mut u_min = Vec::with_capacity(num_players);
    let mut u_max = Vec::with_capacity(num_players);
    let mut losses = Vec::with_capacity(num_players);
    for table in &payoffs {
        let lo = table.iter().fold(f64::INFINITY, |m, &v| m.min(v));
        let hi = table.iter().fold(f64::NEG_INFINITY, |m, &v| m.max(v));
        u_min.push(lo);
        u_max.push(hi);
        let span = hi - lo;
        losses.push(
            table
                .iter()
                .map(|&v| if span > 0.0 { (hi - v) / span } else { 0.0 })
                .collect(),
        );
    }
    scratch.losses = losses;
    let mut labels = vec![deltas; cfg.num_defenders];
    labels.push(rounds);
    scratch.action_labels = labels;
    Ok((scratch, NormalizationConstants { u_min, u_max }))
}
