use nalgebra::{DMatrix, DVector};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// A linear gradient map `g(s) = G s` with prescribed singular values, the
/// true private vector, and a small labeled dataset for model-utility
/// evaluation.
///
/// The Lipschitz bracket holds with exact constants: `c_a = 1/sigma_max`
/// and `c_b = 1/sigma_min`.
#[derive(Debug, Clone)]
pub struct LinearTask {
    pub matrix: DMatrix<f64>,
    pub s_o: DVector<f64>,
    pub sigma_min: f64,
    pub sigma_max: f64,
    /// Data-norm bound D; all reconstruction distances must stay within it.
    pub d_bound: f64,
    pub dataset: Vec<(DVector<f64>, f64)>,
    pub seed: u64,
}

impl LinearTask {
    /// Builds `G = Q1 diag(sigma) Q2^T` from seeded orthogonal factors, so
    /// the extreme singular values are exact by construction. The private
    /// vector is scaled to `s_norm_frac * d_bound` and the dataset samples
    /// to unit norm at most.
    pub fn random(
        dim: usize,
        sigma_min: f64,
        sigma_max: f64,
        d_bound: f64,
        s_norm_frac: f64,
        dataset_size: usize,
        seed: u64,
    ) -> Result<Self> {
        if dim == 0 {
            return Err(Error::Domain("task dimension must be positive".into()));
        }
        if !(0.0 < sigma_min && sigma_min <= sigma_max) {
            return Err(Error::Domain(format!(
                "require 0 < sigma_min <= sigma_max, got {sigma_min}, {sigma_max}"
            )));
        }
        if !(0.0 < s_norm_frac && s_norm_frac < 1.0) {
            return Err(Error::Domain("s_norm_frac must lie in (0,1)".into()));
        }
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let q1 = random_orthogonal(dim, &mut rng);
        let q2 = random_orthogonal(dim, &mut rng);
        let singulars: Vec<f64> = (0..dim)
            .map(|i| {
                if dim == 1 {
                    sigma_min
                } else {
                    sigma_min + (sigma_max - sigma_min) * i as f64 / (dim - 1) as f64
                }
            })
            .collect();
        let matrix = &q1 * DMatrix::from_diagonal(&DVector::from_vec(singulars)) * q2.transpose();

        let mut s_o = gaussian_vector(dim, &mut rng);
        let scale = s_norm_frac * d_bound / s_o.norm();
        s_o *= scale;

        let dataset = (0..dataset_size)
            .map(|_| {
                let mut s = gaussian_vector(dim, &mut rng);
                let norm_cap: f64 = rng.gen_range(0.2..1.0);
                s *= norm_cap / s.norm();
                let label: f64 = rng.gen_range(-1.0..1.0);
                (s, label)
            })
            .collect();

        Ok(Self {
            matrix,
            s_o,
            sigma_min,
            sigma_max,
            d_bound,
            dataset,
            seed,
        })
    }

    pub fn gradient(&self, s: &DVector<f64>) -> DVector<f64> {
        &self.matrix * s
    }

    pub fn original_gradient(&self) -> DVector<f64> {
        self.gradient(&self.s_o)
    }

    pub fn lipschitz_lower(&self) -> f64 {
        1.0 / self.sigma_max
    }

    pub fn lipschitz_upper(&self) -> f64 {
        1.0 / self.sigma_min
    }
}

fn gaussian_vector(dim: usize, rng: &mut ChaCha8Rng) -> DVector<f64> {
    DVector::from_iterator(dim, (0..dim).map(|_| rng.sample::<f64, _>(StandardNormal)))
}

fn random_orthogonal(dim: usize, rng: &mut ChaCha8Rng) -> DMatrix<f64> {
    let gaussian = DMatrix::from_fn(dim, dim, |_, _| rng.sample::<f64, _>(StandardNormal));
    gaussian.qr().q()
}

/// Per-round reconstruction record of one simulated attack.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct AttackTrace {
    /// `||s_t - s_o||` for t = 1..rounds (s_1 is the zero initialization).
    pub distances: Vec<f64>,
    /// Gradient-matching residuals `||g(s_t) - w_d||`.
    pub residuals: Vec<f64>,
    /// Realized `||w_d - w_o||`; equals the requested protection extent.
    pub published_distortion: f64,
    pub horizon: u32,
}

/// Publishes `w_d = w_o + delta * u` for a seeded unit direction `u`, then
/// runs `rounds` iterations of gradient descent on the least-squares
/// objective from `s_1 = 0` with step `1/sigma_max^2`, recording the
/// distance to the private vector each round.
pub fn simulate_attack(
    task: &LinearTask,
    delta: f64,
    rounds: u32,
    seed: u64,
) -> Result<AttackTrace> {
    if !(0.0..=task.d_bound).contains(&delta) {
        return Err(Error::Domain(format!(
            "delta={delta} outside [0, D={}]",
            task.d_bound
        )));
    }
    let dim = task.s_o.len();
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut direction = gaussian_vector(dim, &mut rng);
    direction /= direction.norm();

    let w_o = task.original_gradient();
    let w_d = &w_o + delta * &direction;
    let published_distortion = (&w_d - &w_o).norm();

    let step = 1.0 / (task.sigma_max * task.sigma_max);
    let mut s = DVector::zeros(dim);
    let mut distances = Vec::with_capacity(rounds as usize);
    let mut residuals = Vec::with_capacity(rounds as usize);
    for _ in 0..rounds {
        let grad_error = task.gradient(&s) - &w_d;
        distances.push((&s - &task.s_o).norm());
        residuals.push(grad_error.norm());
        s -= step * (task.matrix.transpose() * grad_error);
    }
    Ok(AttackTrace {
        distances,
        residuals,
        published_distortion,
        horizon: rounds,
    })
}
