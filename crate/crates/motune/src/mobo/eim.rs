use rand::Rng;
use rand_chacha::ChaCha8Rng;

use crate::cost::CostMeter;
use crate::gpr::GPModel;
use crate::metrics::normal_cdf;
use crate::{BoxBounds, ParameterVector, Scalar};

const N_PROBES: usize = 2000;
const N_REFINE_STARTS: usize = 5;
const N_REFINE_ITERS: usize = 200;

/// Single-objective expected improvement of beating the incumbent value `j`
/// under a Gaussian prediction. A vanishing deviation collapses it to the
/// plain improvement.
pub fn expected_improvement(j: Scalar, mu: Scalar, sigma: Scalar) -> Scalar {
    if sigma <= 1e-12 {
        return (j - mu).max(0.0);
    }
    let z = (j - mu) / sigma;
    (j - mu) * normal_cdf(z) + sigma * normal_pdf(z)
}

fn normal_pdf(z: Scalar) -> Scalar {
    (-0.5 * z * z).exp() / (2.0 * std::f64::consts::PI).sqrt()
}

/// Euclidean expected improvement matrix criterion: the minimum over front
/// points of the Euclidean norm of the per-objective expected improvements.
pub fn eim_euclidean(front_points: &[Vec<Scalar>], mu: &[Scalar], sigma: &[Scalar]) -> Scalar {
    front_points
        .iter()
        .map(|member| {
            member
                .iter()
                .zip(mu.iter().zip(sigma))
                .map(|(&j, (&m, &s))| {
                    let ei = expected_improvement(j, m, s);
                    ei * ei
                })
                .sum::<f64>()
                .sqrt()
        })
        .fold(f64::INFINITY, f64::min)
}

/// Maximizes the euclidean expected improvement matrix criterion by random
/// probing followed by coordinate pattern search from the best probes.
pub fn eim_propose(
    models: &[GPModel],
    front_points: &[Vec<Scalar>],
    bounds: &BoxBounds,
    rng: &mut ChaCha8Rng,
    meter: &mut CostMeter,
) -> ParameterVector {
    assert!(!front_points.is_empty(), "front must be non-empty");
    let n = bounds.len();
    let m = models.len();

    let score_batch = |thetas: &[Vec<Scalar>], meter: &mut CostMeter| -> Vec<Scalar> {
        let mut mus = vec![vec![0.0; m]; thetas.len()];
        let mut sigmas = vec![vec![0.0; m]; thetas.len()];
        for (obj, model) in models.iter().enumerate() {
            let (mu, sigma) = model.predict_batch(thetas);
            meter.add_gemm(thetas.len(), model.n_training(), n + 2);
            meter.add_transcendental(thetas.len() * model.n_training());
            for i in 0..thetas.len() {
                mus[i][obj] = mu[i];
                sigmas[i][obj] = sigma[i];
            }
        }
        meter.add_flops((thetas.len() * front_points.len() * m * 8) as f64);
        (0..thetas.len())
            .map(|i| eim_euclidean(front_points, &mus[i], &sigmas[i]))
            .collect()
    };

    let probes: Vec<Vec<Scalar>> = (0..N_PROBES)
        .map(|_| {
            (0..n)
                .map(|d| rng.random_range(bounds.min()[d]..bounds.max()[d]))
                .collect()
        })
        .collect();
    let scores = score_batch(&probes, meter);
    let mut order: Vec<usize> = (0..probes.len()).collect();
    order.sort_by(|&a, &b| scores[b].partial_cmp(&scores[a]).unwrap());

    let mut best_theta = probes[order[0]].clone();
    let mut best_score = scores[order[0]];

    for &start in order.iter().take(N_REFINE_STARTS) {
        let mut x = probes[start].clone();
        let mut fx = scores[start];
        let mut steps: Vec<f64> = (0..n).map(|d| 0.1 * bounds.range(d)).collect();
        for _ in 0..N_REFINE_ITERS {
            let mut neighbors = Vec::with_capacity(2 * n);
            for d in 0..n {
                for sign in [-1.0, 1.0] {
                    let mut y = x.clone();
                    y[d] = (y[d] + sign * steps[d]).clamp(bounds.min()[d], bounds.max()[d]);
                    neighbors.push(y);
                }
            }
            let neighbor_scores = score_batch(&neighbors, meter);
            let (best_idx, &best_val) = neighbor_scores
                .iter()
                .enumerate()
                .max_by(|(_, a), (_, b)| a.partial_cmp(b).unwrap())
                .unwrap();
            if best_val > fx {
                x = neighbors[best_idx].clone();
                fx = best_val;
            } else {
                for s in steps.iter_mut() {
                    *s *= 0.5;
                }
                if steps.iter().all(|&s| s < 1e-7) {
                    break;
                }
            }
        }
        if fx > best_score {
            best_score = fx;
            best_theta = x;
        }
    }
    ParameterVector::new(best_theta, bounds).expect("probe within bounds")
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::gpr::{fit, GPHyperparameters};
    use rand::SeedableRng;

    #[test]
    fn ei_at_known_point_is_zero() {
        // sigma zero, mean equal to the incumbent: no expected improvement
        assert_eq!(expected_improvement(1.0, 1.0, 0.0), 0.0);
        assert_eq!(expected_improvement(1.0, 2.0, 0.0), 0.0);
        assert_eq!(expected_improvement(2.0, 1.0, 0.0), 1.0);
    }

    #[test]
    fn ei_matches_textbook_values() {
        // closed form EI(j=0, mu=0, sigma=1) = phi(0) = 1/sqrt(2 pi)
        let expect = 1.0 / (2.0 * std::f64::consts::PI).sqrt();
        assert!((expected_improvement(0.0, 0.0, 1.0) - expect).abs() < 1e-7);
        // j - mu = 1, sigma = 1: EI = 1 * Phi(1) + phi(1)
        let expect = normal_cdf(1.0) + normal_pdf(1.0);
        assert!((expected_improvement(1.0, 0.0, 1.0) - expect).abs() < 1e-7);
    }

    #[test]
    fn ei_monte_carlo_oracle() {
        // EI = E[max(j - X, 0)], X ~ N(mu, sigma^2)
        let mut rng = ChaCha8Rng::seed_from_u64(9);
        use rand_distr::{Distribution, Normal};
        for (j, mu, sigma) in [(1.0f64, 0.5, 0.8), (0.0, 1.0, 2.0), (-0.5, -1.0, 0.3)] {
            let dist = Normal::new(mu, sigma).unwrap();
            let n = 2_000_000;
            let mc: f64 = (0..n)
                .map(|_| (j - dist.sample(&mut rng)).max(0.0))
                .sum::<f64>()
                / n as f64;
            let analytic = expected_improvement(j, mu, sigma);
            assert!(
                (mc - analytic).abs() < 5e-3,
                "mc {mc} analytic {analytic}"
            );
        }
    }

    #[test]
    fn eim_is_nonnegative_and_zero_at_front_points() {
        let front = vec![vec![1.0, 2.0], vec![2.0, 1.0]];
        // exactly at a front point with no uncertainty
        assert_eq!(eim_euclidean(&front, &[1.0, 2.0], &[0.0, 0.0]), 0.0);
        let mut rng = ChaCha8Rng::seed_from_u64(4);
        for _ in 0..100 {
            let mu = vec![rng.random_range(-2.0..4.0), rng.random_range(-2.0..4.0)];
            let sigma = vec![rng.random_range(0.0..1.0), rng.random_range(0.0..1.0)];
            assert!(eim_euclidean(&front, &mu, &sigma) >= 0.0);
        }
    }

    #[test]
    fn scalar_reduction_matches_plain_ei() {
        // single front point: EIM_e is the norm of the per-objective EIs
        let front = vec![vec![1.5, 2.5]];
        let mu = [1.0, 2.0];
        let sigma = [0.3, 0.4];
        let e1 = expected_improvement(1.5, 1.0, 0.3);
        let e2 = expected_improvement(2.5, 2.0, 0.4);
        let expect = (e1 * e1 + e2 * e2).sqrt();
        assert!((eim_euclidean(&front, &mu, &sigma) - expect).abs() < 1e-12);
    }

    #[test]
    fn proposal_maximizes_the_criterion_over_a_probe_grid() {
        let bounds = BoxBounds::uniform(2, 0.0, 1.0).unwrap();
        let mut rng = ChaCha8Rng::seed_from_u64(10);
        let x: Vec<Vec<f64>> = (0..10)
            .map(|_| vec![rng.random_range(0.0..1.0), rng.random_range(0.0..1.0)])
            .collect();
        let y1: Vec<f64> = x.iter().map(|r| r[0] + 0.3 * (7.0 * r[1]).sin()).collect();
        let y2: Vec<f64> = x.iter().map(|r| 1.0 - r[0] + 0.2 * r[1]).collect();
        let m1 = fit(&bounds, &x, &y1, 2, &mut rng).unwrap();
        let m2 = GPModel::with_hyperparameters(
            &bounds,
            &x,
            &y2,
            GPHyperparameters {
                constant_mean: 0.0,
                signal_variance: 1.0,
                lengthscales: vec![0.3, 0.3],
                noise_variance: 1e-4,
            },
        )
        .unwrap();
        let models = [m1, m2];
        let front = vec![vec![0.4, 0.8], vec![0.8, 0.4]];
        let mut meter = CostMeter::new();
        let proposal = eim_propose(&models, &front, &bounds, &mut rng, &mut meter);
        let score_of = |theta: &[f64]| {
            let mus: Vec<f64> = models
                .iter()
                .map(|m| m.predict(theta).0)
                .collect();
            let sigmas: Vec<f64> = models
                .iter()
                .map(|m| m.predict(theta).1)
                .collect();
            eim_euclidean(&front, &mus, &sigmas)
        };
        let proposed_score = score_of(proposal.values());
        for _ in 0..1000 {
            let probe = vec![rng.random_range(0.0..1.0), rng.random_range(0.0..1.0)];
            assert!(
                score_of(&probe) <= proposed_score * (1.0 + 1e-9) + 1e-12,
                "probe beats proposal: {} > {}",
                score_of(&probe),
                proposed_score
            );
        }
    }
}
