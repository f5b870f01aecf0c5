use rand_chacha::ChaCha8Rng;

use crate::core::{dominates, ObjectiveVector, ParetoFront};
use crate::cost::CostMeter;
use crate::gpr::{fit_with_options, FitOptions, GPModel, GprError};
use crate::{BoxBounds, Dataset, Scalar};

/// Virtual targets for the crashed evaluations of a dataset.
#[derive(Debug, Clone)]
pub struct VdpResult {
    /// One target vector per crashed evaluation, in dataset order.
    pub virtual_targets: Vec<Vec<Scalar>>,
    /// Pessimism factor that produced them.
    pub gamma: f64,
    /// Hyperparameters of the success-only fits, for warm starts.
    pub success_hyperparameters: Vec<crate::gpr::GPHyperparameters>,
}

/// Computes virtual data points for all crashed evaluations: fit models on
/// the successful evaluations only, take the pessimistic prediction
/// `mu + gamma * sigma` at each crashed point, bound it by the worst
/// successful value per objective, and raise `gamma` until no virtual point
/// dominates any front member.
pub fn compute_vdp(
    dataset: &Dataset,
    front: &ParetoFront<Scalar>,
    gamma_init: f64,
    gamma_step: f64,
    bounds: &BoxBounds,
    fit_opts: &[FitOptions],
    rng: &mut ChaCha8Rng,
    meter: &mut CostMeter,
) -> Result<VdpResult, GprError> {
    assert!(dataset.n_successes() >= 1, "need a successful evaluation");
    let m = front.objective_points()[0].len();
    assert_eq!(fit_opts.len(), m);

    let crashed_thetas: Vec<Vec<Scalar>> = dataset
        .crashes()
        .map(|(_, e)| e.theta.values().to_vec())
        .collect();
    if crashed_thetas.is_empty() {
        return Ok(VdpResult {
            virtual_targets: Vec::new(),
            gamma: gamma_init,
            success_hyperparameters: Vec::new(),
        });
    }

    let x_success: Vec<Vec<Scalar>> = dataset
        .successes()
        .map(|(_, e)| e.theta.values().to_vec())
        .collect();
    let worst = dataset.worst_successful().expect("successes present");

    // per-objective predictions at the crashed points
    let mut mus = Vec::with_capacity(m);
    let mut sigmas = Vec::with_capacity(m);
    let mut success_hyperparameters = Vec::with_capacity(m);
    for obj in 0..m {
        let y: Vec<Scalar> = dataset
            .successes()
            .map(|(_, e)| e.objectives.as_ref().unwrap().values()[obj])
            .collect();
        let model: GPModel = fit_with_options(bounds, &x_success, &y, &fit_opts[obj], rng, meter)?;
        let (mu, sigma) = model.predict_batch(&crashed_thetas);
        meter.add_gemm(crashed_thetas.len(), x_success.len(), bounds.len());
        meter.add_transcendental(crashed_thetas.len() * x_success.len());
        success_hyperparameters.push(model.hyperparameters().clone());
        mus.push(mu);
        sigmas.push(sigma);
    }

    let targets_for = |gamma: f64| -> Vec<Vec<Scalar>> {
        (0..crashed_thetas.len())
            .map(|c| {
                (0..m)
                    .map(|obj| (mus[obj][c] + gamma * sigmas[obj][c]).min(worst[obj]))
                    .collect()
            })
            .collect()
    };

    let mut gamma = gamma_init;
    for escalation in 0..=100 {
        let targets = targets_for(gamma);
        let clean = targets.iter().all(|t| {
            let virtual_point = ObjectiveVector::new(t.clone()).expect("finite targets");
            !front
                .objective_points()
                .iter()
                .any(|member| dominates(&virtual_point, member))
        });
        if clean {
            return Ok(VdpResult {
                virtual_targets: targets,
                gamma,
                success_hyperparameters,
            });
        }
        if escalation == 100 {
            break;
        }
        gamma += gamma_step;
    }
    // termination guard: pin every virtual point to the worst successful
    // values; such points cannot dominate any front member
    log::warn!("virtual data points still dominant after 100 escalations, capping at the worst successful values");
    let capped: Vec<Vec<Scalar>> = (0..crashed_thetas.len())
        .map(|_| worst.clone())
        .collect();
    Ok(VdpResult {
        virtual_targets: capped,
        gamma,
        success_hyperparameters,
    })
}

/// The pessimistic prediction of one objective at one crashed point.
pub fn virtual_target(mu: f64, sigma: f64, gamma: f64, worst_successful: f64) -> f64 {
    (mu + gamma * sigma).min(worst_successful)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::core::{current_front, Evaluation, ParameterVector};
    use rand::SeedableRng;

    #[test]
    fn pessimistic_prediction_formula() {
        assert_eq!(virtual_target(1.0, 0.5, 3.0, 10.0), 2.5);
        assert_eq!(virtual_target(9.0, 1.0, 3.0, 10.0), 10.0);
    }

    fn dataset_with_crash(successes: &[(f64, Vec<f64>)], crashes: &[f64]) -> (Dataset, BoxBounds) {
        let bounds = BoxBounds::uniform(2, 0.0, 1.0).unwrap();
        let mut evals = Vec::new();
        for (x, obj) in successes {
            evals.push(Evaluation::success(
                ParameterVector::new(vec![*x, *x], &bounds).unwrap(),
                ObjectiveVector::new(obj.clone()).unwrap(),
                10,
                0.1,
            ));
        }
        for x in crashes {
            evals.push(Evaluation::crashed(
                ParameterVector::new(vec![*x, *x], &bounds).unwrap(),
                10,
                0.1,
            ));
        }
        (Dataset::from_evaluations(evals), bounds)
    }

    #[test]
    fn virtual_points_never_dominate_front() {
        let (ds, bounds) = dataset_with_crash(
            &[
                (0.1, vec![1.0, 3.0]),
                (0.5, vec![2.0, 2.0]),
                (0.9, vec![3.0, 1.0]),
            ],
            &[0.3, 0.7],
        );
        let front = current_front(&ds).unwrap();
        let mut rng = ChaCha8Rng::seed_from_u64(2);
        let mut meter = CostMeter::new();
        let opts = vec![
            FitOptions {
                restarts: 2,
                max_iters: 40,
                warm_start: None
            };
            2
        ];
        let result = compute_vdp(&ds, &front, 3.0, 0.5, &bounds, &opts, &mut rng, &mut meter)
            .unwrap();
        assert_eq!(result.virtual_targets.len(), 2);
        for t in &result.virtual_targets {
            let vp = ObjectiveVector::new(t.clone()).unwrap();
            for member in front.objective_points() {
                assert!(!dominates(&vp, member));
            }
        }
        assert!(result.gamma >= 3.0);
    }

    #[test]
    fn no_crashes_yields_empty_targets() {
        let (ds, bounds) = dataset_with_crash(&[(0.2, vec![1.0, 2.0])], &[]);
        let front = current_front(&ds).unwrap();
        let mut rng = ChaCha8Rng::seed_from_u64(3);
        let mut meter = CostMeter::new();
        let opts = vec![FitOptions::default(); 2];
        let result =
            compute_vdp(&ds, &front, 3.0, 0.5, &bounds, &opts, &mut rng, &mut meter).unwrap();
        assert!(result.virtual_targets.is_empty());
        assert_eq!(result.gamma, 3.0);
    }

    #[test]
    fn capped_targets_equal_worst_successful() {
        // single success: the front member IS the worst value vector, and a
        // capped virtual point equals it without dominating it
        let (ds, bounds) = dataset_with_crash(&[(0.5, vec![2.0, 2.0])], &[0.4]);
        let front = current_front(&ds).unwrap();
        let mut rng = ChaCha8Rng::seed_from_u64(4);
        let mut meter = CostMeter::new();
        let opts = vec![
            FitOptions {
                restarts: 1,
                max_iters: 20,
                warm_start: None
            };
            2
        ];
        let result =
            compute_vdp(&ds, &front, 3.0, 0.5, &bounds, &opts, &mut rng, &mut meter).unwrap();
        for t in &result.virtual_targets {
            assert!(t[0] <= 2.0 && t[1] <= 2.0);
            let vp = ObjectiveVector::new(t.clone()).unwrap();
            assert!(!dominates(&vp, &front.objective_points()[0]));
        }
    }
}
