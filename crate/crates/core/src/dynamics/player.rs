use rand::Rng;

use crate::error::{Error, Result};

/// Learning rate sqrt(ln K / (t K)); matches the exploration floor's scale.
pub fn learning_rate(num_actions: usize, t: u64) -> f64 {
    ((num_actions as f64).ln() / (t as f64 * num_actions as f64)).sqrt()
}

/// Per-action exploration mass min{1/(2K), (1/2)sqrt(ln K / (t K)), xi}.
pub fn exploration_floor(num_actions: usize, t: u64, xi: f64) -> f64 {
    let k = num_actions as f64;
    (1.0 / (2.0 * k))
        .min(0.5 * ((k.ln()) / (t as f64 * k)).sqrt())
        .min(xi)
}

/// One player's bandit-feedback exponential-weights state.
///
/// The player keeps importance-weighted cumulative loss estimates; each
/// round it mixes the exponential-weights distribution with a uniform
/// exploration floor, samples, and sharpens the estimate of the sampled
/// action only.
#[derive(Debug, Clone)]
pub struct ExpWeightsPlayer {
    cumulative_estimates: Vec<f64>,
    xi: f64,
}

impl ExpWeightsPlayer {
    pub fn new(num_actions: usize, xi: f64) -> Result<Self> {
        if num_actions == 0 {
            return Err(Error::Domain("player needs at least one action".into()));
        }
        if !(xi >= 0.0) {
            return Err(Error::Domain(format!("exploration cap xi must be >= 0, got {xi}")));
        }
        Ok(Self {
            cumulative_estimates: vec![0.0; num_actions],
            xi,
        })
    }

    pub fn num_actions(&self) -> usize {
        self.cumulative_estimates.len()
    }

    pub fn cumulative_estimates(&self) -> &[f64] {
        &self.cumulative_estimates
    }

    /// Sampling distribution for round `t >= 1`:
    /// `rho_t(a) ∝ exp(-eta_t L~_{t-1}(a))` mixed with the exploration
    /// floor, `rho~_t(a) = (1 - sum eps) rho_t(a) + eps`.
    pub fn sampling_distribution(&self, t: u64) -> Vec<f64> {
        let k = self.num_actions();
        let eta = learning_rate(k, t);
        let min_estimate = self
            .cumulative_estimates
            .iter()
            .fold(f64::INFINITY, |m, &v| m.min(v));
        let weights: Vec<f64> = self
            .cumulative_estimates
            .iter()
            .map(|&l| (-eta * (l - min_estimate)).exp())
            .collect();
        let total: f64 = weights.iter().sum();
        let eps = exploration_floor(k, t, self.xi);
        let mix = 1.0 - k as f64 * eps;
        weights.iter().map(|w| mix * w / total + eps).collect()
    }

    /// Samples an action from the round-`t` distribution.
    pub fn sample(&self, t: u64, rng: &mut impl Rng) -> (usize, Vec<f64>) {
        let dist = self.sampling_distribution(t);
        let mut u: f64 = rng.gen();
        let mut action = dist.len() - 1;
        for (i, &p) in dist.iter().enumerate() {
            if u < p {
                action = i;
                break;
            }
            u -= p;
        }
        (action, dist)
    }

    /// Bandit update: the realized loss of the sampled action, importance
    /// weighted by its sampling probability, accrues to that action alone.
    pub fn update(&mut self, action: usize, loss: f64, sampled_probability: f64) {
        self.cumulative_estimates[action] += loss / sampled_probability;
    }
}
