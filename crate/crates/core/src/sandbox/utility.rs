use nalgebra::DVector;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Empirical model utility per defender plus the distortion budget it is
/// compared against.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct UtilityCheck {
    /// Utility of the aggregated protected gradients on each defender's data.
    pub v_m: Vec<f64>,
    /// Same formula on the unprotected gradients.
    pub p_m: Vec<f64>,
    /// Mean published distortion over defenders.
    pub delta_bar: f64,
    /// `v_m[k] >= p_m[k] - delta_bar` for every defender.
    pub inequality_ok: bool,
}

/// Evaluates `V_m = 1 - mean_s |<aggregate gradient, s> - l_s|` per defender
/// for the protected and unprotected gradients and checks the distortion
/// inequality. Samples must have norm at most 1.
pub fn model_utility_empirical(
    protected: &[DVector<f64>],
    original: &[DVector<f64>],
    datasets: &[Vec<(DVector<f64>, f64)>],
) -> Result<UtilityCheck> {
    let k_count = protected.len();
    if k_count == 0 || original.len() != k_count || datasets.len() != k_count {
        return Err(Error::Domain(
            "need matching protected/original gradient lists and one dataset per defender".into(),
        ));
    }
    for dataset in datasets {
        if dataset.is_empty() {
            return Err(Error::Domain("datasets must be non-empty".into()));
        }
        for (sample, _) in dataset {
            if sample.norm() > 1.0 + 1e-12 {
                return Err(Error::Domain(format!(
                    "sample norm {} exceeds 1",
                    sample.norm()
                )));
            }
        }
    }

    let delta_bar = protected
        .iter()
        .zip(original)
        .map(|(d, o)| (d - o).norm())
        .sum::<f64>()
        / k_count as f64;

    let aggregate = |grads: &[DVector<f64>]| -> DVector<f64> {
        let mut sum = grads[0].clone();
        for g in &grads[1..] {
            sum += g;
        }
        sum / k_count as f64
    };
    let agg_d = aggregate(protected);
    let agg_o = aggregate(original);

    let utility = |agg: &DVector<f64>, dataset: &[(DVector<f64>, f64)]| -> f64 {
        let mean_err = dataset
            .iter()
            .map(|(s, label)| (agg.dot(s) - label).abs())
            .sum::<f64>()
            / dataset.len() as f64;
        1.0 - mean_err
    };

    let v_m: Vec<f64> = datasets.iter().map(|ds| utility(&agg_d, ds)).collect();
    let p_m: Vec<f64> = datasets.iter().map(|ds| utility(&agg_o, ds)).collect();
    let inequality_ok = v_m
        .iter()
        .zip(&p_m)
        .all(|(v, p)| *v >= p - delta_bar - 1e-12);

    Ok(UtilityCheck {
        v_m,
        p_m,
        delta_bar,
        inequality_ok,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;
    use rand_distr::StandardNormal;

    fn unit_vector(dim: usize, rng: &mut ChaCha8Rng) -> DVector<f64> {
        let v = DVector::from_iterator(dim, (0..dim).map(|_| rng.sample::<f64, _>(StandardNormal)));
        let n = v.norm();
        v / n
    }

    #[test]
    fn no_distortion_means_equal_utilities() {
        let mut rng = ChaCha8Rng::seed_from_u64(1);
        let w = unit_vector(5, &mut rng);
        let dataset = vec![(unit_vector(5, &mut rng), 0.3)];
        let check =
            model_utility_empirical(std::slice::from_ref(&w), &[w.clone()], &[dataset]).unwrap();
        assert_eq!(check.delta_bar, 0.0);
        assert_eq!(check.v_m, check.p_m);
        assert!(check.inequality_ok);
    }

    #[test]
    fn aligned_distortion_costs_exactly_delta() {
        // Single defender, single unit sample s, w_d = w_o + delta*s and a
        // label below the clean score: the utility drops by exactly delta.
        let mut rng = ChaCha8Rng::seed_from_u64(2);
        let s = unit_vector(4, &mut rng);
        let w_o = 0.5 * s.clone();
        let delta = 0.2;
        let w_d = &w_o + delta * s.clone();
        let label = 0.1; // below <w_o, s> = 0.5, so no sign flip
        let dataset = vec![(s, label)];
        let check = model_utility_empirical(&[w_d], &[w_o], &[dataset]).unwrap();
        assert!((check.v_m[0] - (check.p_m[0] - delta)).abs() < 1e-12);
        assert!(check.inequality_ok);
    }

    #[test]
    fn inequality_holds_on_random_instances() {
        let mut rng = ChaCha8Rng::seed_from_u64(3);
        for _ in 0..300 {
            let dim = rng.gen_range(2..6);
            let k = rng.gen_range(1..4);
            let mut protected = Vec::new();
            let mut original = Vec::new();
            let mut datasets = Vec::new();
            for _ in 0..k {
                let w_o = rng.gen_range(0.1..1.5) * unit_vector(dim, &mut rng);
                let w_d = &w_o + rng.gen_range(0.0..0.8) * unit_vector(dim, &mut rng);
                protected.push(w_d);
                original.push(w_o);
                let samples = rng.gen_range(1..5);
                datasets.push(
                    (0..samples)
                        .map(|_| {
                            let scale = rng.gen_range(0.1..1.0);
                            (scale * unit_vector(dim, &mut rng), rng.gen_range(-1.0..1.0))
                        })
                        .collect(),
                );
            }
            let check = model_utility_empirical(&protected, &original, &datasets).unwrap();
            assert!(check.inequality_ok);
        }
    }

    #[test]
    fn oversized_samples_rejected() {
        let mut rng = ChaCha8Rng::seed_from_u64(4);
        let w = unit_vector(3, &mut rng);
        let dataset = vec![(2.0 * unit_vector(3, &mut rng), 0.0)];
        assert!(model_utility_empirical(std::slice::from_ref(&w), &[w.clone()], &[dataset]).is_err());
    }
}
