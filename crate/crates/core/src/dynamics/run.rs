use std::collections::BTreeMap;

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::dynamics::game_tables::LossTables;
use crate::dynamics::player::ExpWeightsPlayer;
use crate::error::Result;

/// A repeated-game run: tables, horizon, exploration caps and a seed.
#[derive(Debug, Clone)]
pub struct RepeatedGameSpec {
    pub tables: LossTables,
    pub horizon: u64,
    /// Exploration cap xi applied to every action of every player. The
    /// default of 1 leaves the time-decaying floor in charge.
    pub xi: f64,
    pub seed: u64,
}

impl RepeatedGameSpec {
    pub fn new(tables: LossTables, horizon: u64, seed: u64) -> Self {
        Self {
            tables,
            horizon,
            xi: 1.0,
            seed,
        }
    }
}

/// Everything observable about one run.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct DynamicsTrace {
    /// actions[t][player]
    pub actions: Vec<Vec<usize>>,
    /// realized_losses[t][player]
    pub realized_losses: Vec<Vec<f64>>,
    /// sampling_dists[t][player][action]
    pub sampling_dists: Vec<Vec<Vec<f64>>>,
    /// Final importance-weighted cumulative loss estimates per player.
    pub final_estimates: Vec<Vec<f64>>,
    /// Joint action counts keyed by joint index.
    pub joint_counts: BTreeMap<usize, u64>,
}

/// Runs `horizon` simultaneous rounds. Each player samples from its own
/// seeded stream, so traces are reproducible bit for bit.
pub fn run_dynamics(spec: &RepeatedGameSpec) -> Result<DynamicsTrace> {
    let n = spec.tables.num_players();
    let mut players: Vec<ExpWeightsPlayer> = (0..n)
        .map(|p| ExpWeightsPlayer::new(spec.tables.action_counts[p], spec.xi))
        .collect::<Result<_>>()?;
    let mut rngs: Vec<ChaCha8Rng> = (0..n)
        .map(|p| {
            let mut rng = ChaCha8Rng::seed_from_u64(spec.seed);
            rng.set_stream(p as u64 + 1);
            rng
        })
        .collect();

    let t_len = spec.horizon as usize;
    let mut actions = Vec::with_capacity(t_len);
    let mut realized_losses = Vec::with_capacity(t_len);
    let mut sampling_dists = Vec::with_capacity(t_len);
    let mut joint_counts: BTreeMap<usize, u64> = BTreeMap::new();

    for t in 1..=spec.horizon {
        let mut round_actions = Vec::with_capacity(n);
        let mut round_dists = Vec::with_capacity(n);
        for (player, rng) in players.iter().zip(&mut rngs) {
            let (action, dist) = player.sample(t, rng);
            round_actions.push(action);
            round_dists.push(dist);
        }
        let joint = spec.tables.joint_index(&round_actions);
        *joint_counts.entry(joint).or_insert(0) += 1;
        let mut round_losses = Vec::with_capacity(n);
        for (p, player) in players.iter_mut().enumerate() {
            let loss = spec.tables.losses[p][joint];
            player.update(round_actions[p], loss, round_dists[p][round_actions[p]]);
            round_losses.push(loss);
        }
        actions.push(round_actions);
        realized_losses.push(round_losses);
        sampling_dists.push(round_dists);
    }

    Ok(DynamicsTrace {
        actions,
        realized_losses,
        sampling_dists,
        final_estimates: players.iter().map(|p| p.cumulative_estimates().to_vec()).collect(),
        joint_counts,
    })
}

/// Average external regret per player: realized cumulative loss minus the
/// best fixed action against the opponents' realized sequence, divided by
/// the horizon.
pub fn empirical_regret(trace: &DynamicsTrace, tables: &LossTables) -> Vec<f64> {
    let n = tables.num_players();
    let t_len = trace.actions.len();
    let mut regrets = Vec::with_capacity(n);
    for p in 0..n {
        let realized: f64 = trace.realized_losses.iter().map(|r| r[p]).sum();
        let mut best_fixed = f64::INFINITY;
        for a in 0..tables.action_counts[p] {
            let mut total = 0.0;
            for round in &trace.actions {
                let mut actions = round.clone();
                actions[p] = a;
                total += tables.loss(p, &actions);
            }
            best_fixed = best_fixed.min(total);
        }
        regrets.push((realized - best_fixed) / t_len.max(1) as f64);
    }
    regrets
}

/// Coarse-correlated-equilibrium gap of a joint distribution given as
/// counts over joint indices: the largest one-shot improvement any player
/// can get by committing to a fixed action while the others follow the
/// joint law, floored at zero. Works directly in loss units.
pub fn cce_gap(joint_counts: &BTreeMap<usize, u64>, tables: &LossTables) -> f64 {
    let total: u64 = joint_counts.values().sum();
    if total == 0 {
        return 0.0;
    }
    let mut gap = 0.0f64;
    for p in 0..tables.num_players() {
        let mut expected = 0.0;
        let mut deviation_losses = vec![0.0f64; tables.action_counts[p]];
        for (&joint, &count) in joint_counts {
            let weight = count as f64 / total as f64;
            let actions = tables.joint_actions(joint);
            expected += weight * tables.losses[p][joint];
            let mut dev = actions.clone();
            for (a, acc) in deviation_losses.iter_mut().enumerate() {
                dev[p] = a;
                *acc += weight * tables.loss(p, &dev);
            }
        }
        let best_dev = deviation_losses.iter().cloned().fold(f64::INFINITY, f64::min);
        gap = gap.max(expected - best_dev);
    }
    gap.max(0.0)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::dynamics::game_tables::LossTables;

    fn matching_pennies_losses() -> LossTables {
        // Zero-sum +/-1 payoffs mapped to [0,1] losses: matcher (player 0)
        // loses 0 on a match, 1 on a mismatch; the evader is reversed.
        let p0 = vec![0.0, 1.0, 1.0, 0.0];
        let p1 = vec![1.0, 0.0, 0.0, 1.0];
        LossTables::new(vec![2, 2], vec![p0, p1]).unwrap()
    }

    #[test]
    fn empty_horizon_gives_empty_trace() {
        let spec = RepeatedGameSpec::new(matching_pennies_losses(), 0, 1);
        let trace = run_dynamics(&spec).unwrap();
        assert!(trace.actions.is_empty());
        assert!(trace.joint_counts.is_empty());
    }

    #[test]
    fn identical_seeds_identical_traces() {
        let spec = RepeatedGameSpec::new(matching_pennies_losses(), 500, 42);
        let a = run_dynamics(&spec).unwrap();
        let b = run_dynamics(&spec).unwrap();
        assert_eq!(a.actions, b.actions);
        assert_eq!(a.realized_losses, b.realized_losses);
        assert_eq!(a.final_estimates, b.final_estimates);

        let other = RepeatedGameSpec::new(matching_pennies_losses(), 500, 43);
        let c = run_dynamics(&other).unwrap();
        assert_ne!(a.actions, c.actions);
    }

    #[test]
    fn best_arm_dominates_fixed_loss_bandit() {
        // Single player, 4 arms, arm 2 is free; its empirical frequency
        // exceeds 0.9 by T = 20000.
        let losses = vec![vec![0.8, 0.6, 0.0, 0.9]];
        let tables = LossTables::new(vec![4], losses).unwrap();
        let spec = RepeatedGameSpec::new(tables, 20_000, 7);
        let trace = run_dynamics(&spec).unwrap();
        let hits = trace.actions.iter().filter(|r| r[0] == 2).count();
        assert!(hits as f64 / 20_000.0 > 0.9, "best-arm frequency {}", hits);
    }

    #[test]
    fn single_action_player_has_zero_regret() {
        let tables = LossTables::new(vec![1, 2], vec![vec![0.3, 0.7], vec![0.2, 0.9]]).unwrap();
        let spec = RepeatedGameSpec::new(tables.clone(), 200, 9);
        let trace = run_dynamics(&spec).unwrap();
        let regrets = empirical_regret(&trace, &tables);
        assert!(regrets[0].abs() < 1e-12);
        assert!(regrets.iter().all(|&r| r >= -1e-12));
    }

    #[test]
    fn regret_matches_hand_computation_on_short_trace() {
        // Two actions, adversarial losses known in advance; 5 rounds.
        let tables = LossTables::new(vec![2], vec![vec![0.0, 1.0]]).unwrap();
        let spec = RepeatedGameSpec::new(tables.clone(), 5, 11);
        let trace = run_dynamics(&spec).unwrap();
        let plays_of_bad: u64 = trace.actions.iter().filter(|r| r[0] == 1).count() as u64;
        // Best fixed action is 0 with total loss 0, so average regret is
        // (number of bad plays)/5.
        let regrets = empirical_regret(&trace, &tables);
        assert!((regrets[0] - plays_of_bad as f64 / 5.0).abs() < 1e-12);
    }

    #[test]
    fn cce_gap_zero_on_nash_point_mass() {
        // Prisoner's-dilemma-like loss tables; (1,1) is the dominant-strategy
        // equilibrium.
        let p0 = vec![0.5, 1.0, 0.0, 0.8];
        let p1 = vec![0.5, 0.0, 1.0, 0.8];
        let tables = LossTables::new(vec![2, 2], vec![p0, p1]).unwrap();
        let mut counts = BTreeMap::new();
        counts.insert(tables.joint_index(&[1, 1]), 10u64);
        assert_eq!(cce_gap(&counts, &tables), 0.0);
    }

    #[test]
    fn cce_gap_zero_on_uniform_matching_pennies() {
        let tables = matching_pennies_losses();
        let mut counts = BTreeMap::new();
        for joint in 0..4 {
            counts.insert(joint, 25u64);
        }
        assert!(cce_gap(&counts, &tables) < 1e-15);
    }

    #[test]
    fn theorem_implication_holds_on_traces() {
        let tables = matching_pennies_losses();
        for seed in 0..5 {
            let spec = RepeatedGameSpec::new(tables.clone(), 2_000, seed);
            let trace = run_dynamics(&spec).unwrap();
            let gap = cce_gap(&trace.joint_counts, &tables);
            let max_regret = empirical_regret(&trace, &tables)
                .into_iter()
                .fold(f64::NEG_INFINITY, f64::max);
            assert!(gap <= max_regret + 1e-9, "gap {gap} vs regret {max_regret}");
        }
    }

    #[test]
    fn stored_distributions_sum_to_one() {
        let spec = RepeatedGameSpec::new(matching_pennies_losses(), 300, 5);
        let trace = run_dynamics(&spec).unwrap();
        for round in &trace.sampling_dists {
            for dist in round {
                let sum: f64 = dist.iter().sum();
                assert!((sum - 1.0).abs() < 1e-9);
            }
        }
    }
}
