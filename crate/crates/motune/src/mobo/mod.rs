//! Multi-objective Bayesian optimization with crash constraints and a
//! flexible batch size.

mod batch;
mod eim;
mod tsemo;
mod vdp;

pub use batch::calc_batch_size;
pub use eim::{eim_euclidean, eim_propose, expected_improvement};
pub use tsemo::{internal_reference_point, tsemo_propose};
pub use vdp::{compute_vdp, virtual_target, VdpResult};

use std::time::Instant;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::benchmarks::Problem;
use crate::core::{current_front, dominates, ObjectiveVector};
use crate::cost::CostMeter;
use crate::gpr::{fit_with_options, FitOptions, GPHyperparameters, GPModel};
use crate::record::{IterationTrace, RunBuilder, RunRecord};
use crate::{Dataset, Evaluation, ParameterVector, Scalar};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum Acquisition {
    Tsemo,
    Eim,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub enum BatchMode {
    Constant(usize),
    Adaptive,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum CrashHandling {
    /// Pessimistic model-based targets for crashed evaluations.
    VirtualDataPoints,
    /// The worst successful value per objective (1.0 before any success).
    ConstantPenalty,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct MoboConfig {
    pub n_init: usize,
    pub acquisition: Acquisition,
    pub batch_mode: BatchMode,
    pub p_overhead_desired: f64,
    pub crash_handling: CrashHandling,
    pub gamma_init: f64,
    pub gamma_step: f64,
    /// Internal genetic algorithm on the sampled landscape.
    pub ga_population: usize,
    pub ga_generations: usize,
    pub rff_features: usize,
    /// Multi-starts per in-loop hyperparameter fit.
    pub gp_restarts: usize,
    pub gp_max_iters: usize,
    pub budget_steps: u64,
}

impl Default for MoboConfig {
    fn default() -> Self {
        Self {
            n_init: 5,
            acquisition: Acquisition::Tsemo,
            batch_mode: BatchMode::Adaptive,
            p_overhead_desired: 0.2,
            crash_handling: CrashHandling::VirtualDataPoints,
            gamma_init: 3.0,
            gamma_step: 0.5,
            ga_population: 100,
            ga_generations: 100,
            rff_features: 500,
            gp_restarts: 2,
            gp_max_iters: 60,
            budget_steps: 1_000_000,
        }
    }
}

impl MoboConfig {
    pub fn variant_name(&self) -> String {
        let batch = match self.batch_mode {
            BatchMode::Constant(1) => "1".to_string(),
            BatchMode::Constant(s) => s.to_string(),
            BatchMode::Adaptive => "A".to_string(),
        };
        let crash = match self.crash_handling {
            CrashHandling::VirtualDataPoints => "VDP",
            CrashHandling::ConstantPenalty => "C",
        };
        match self.acquisition {
            Acquisition::Tsemo => format!("TSEMO-{batch}-{crash}"),
            Acquisition::Eim => format!("EIM-{batch}-{crash}"),
        }
    }
}

/// In-loop fit effort: full restarts on small datasets, warm-started short
/// ascents once the training set grows.
fn fit_schedule(cfg: &MoboConfig, n_train: usize, warm: Option<GPHyperparameters>) -> FitOptions {
    let restarts = if n_train <= 100 { cfg.gp_restarts } else { 1 };
    let max_iters = ((cfg.gp_max_iters as f64 * 60.0 / n_train.max(60) as f64) as usize)
        .clamp(8, cfg.gp_max_iters);
    FitOptions {
        restarts,
        max_iters,
        warm_start: warm,
    }
}

/// The full optimization loop: initial design, per-iteration front and
/// crash-handling, surrogate training, batch sizing, acquisition, batched
/// evaluation and augmentation, until the step budget (converted overhead
/// included) is exhausted.
pub fn run_mobo(problem: &dyn Problem, config: &MoboConfig, seed: u64) -> RunRecord {
    assert!(config.n_init >= 1);
    assert!(config.p_overhead_desired > 0.0 && config.p_overhead_desired < 1.0);
    assert!(config.gamma_init > 0.0);
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let variant = config.variant_name();
    let mut builder = RunBuilder::new(problem, &variant, seed, config.budget_steps);
    let bounds = problem.bounds().clone();
    let n_objectives = problem.n_objectives();
    let nominal = problem.nominal_seconds_per_step();

    let random_theta = |rng: &mut ChaCha8Rng| -> ParameterVector {
        let values: Vec<Scalar> = (0..bounds.len())
            .map(|i| rng.random_range(bounds.min()[i]..bounds.max()[i]))
            .collect();
        ParameterVector::new(values, &bounds).unwrap()
    };

    // evaluates a batch concurrently, commits in proposal order, returns the
    // evaluations and their mean reference-clock duration
    let evaluate_batch = |thetas: &[ParameterVector],
                          builder: &mut RunBuilder|
     -> (Vec<Evaluation>, f64) {
        let evals: Vec<Evaluation> = thetas.par_iter().map(|t| problem.evaluate(t)).collect();
        let mut secs = 0.0;
        for ev in &evals {
            secs += ev.sim_steps as f64 * nominal;
            builder.commit(ev.clone());
        }
        (evals.clone(), secs / thetas.len() as f64)
    };

    // initial design, uniform at random
    let init: Vec<ParameterVector> = (0..config.n_init).map(|_| random_theta(&mut rng)).collect();
    let (init_evals, mut t_sim_prev) = evaluate_batch(&init, &mut builder);
    let mut dataset = Dataset::from_evaluations(init_evals);

    // the model-based loop needs one success to stand on
    if dataset.n_successes() == 0 {
        log::warn!("all initial samples crashed, sampling uniformly until one success");
        while dataset.n_successes() == 0 && !builder.budget_exhausted() {
            let theta = random_theta(&mut rng);
            let (evals, _) = evaluate_batch(std::slice::from_ref(&theta), &mut builder);
            dataset = dataset.augment(&evals);
        }
    }
    if dataset.n_successes() == 0 {
        return builder.finish();
    }

    let mut warm_train: Vec<Option<GPHyperparameters>> = vec![None; n_objectives];
    let mut warm_success: Vec<Option<GPHyperparameters>> = vec![None; n_objectives];
    let mut t_overhead_prev = 0.0f64;
    let mut k = 0usize;

    while !builder.budget_exhausted() {
        k += 1;
        let wall = Instant::now();
        let mut meter = CostMeter::new();

        // front over successes
        let front = current_front(&dataset).expect("at least one success");
        meter.add_dominance(dataset.n_successes(), n_objectives);
        let front_points: Vec<Vec<Scalar>> = front
            .objective_points()
            .iter()
            .map(|o| o.values().to_vec())
            .collect();
        let worst = dataset.worst_successful().expect("successes present");

        // crash handling: assemble per-objective training data
        let x_success: Vec<Vec<Scalar>> = dataset
            .successes()
            .map(|(_, e)| e.theta.values().to_vec())
            .collect();
        let x_crashed: Vec<Vec<Scalar>> = dataset
            .crashes()
            .map(|(_, e)| e.theta.values().to_vec())
            .collect();
        let mut gamma_used = None;
        let crashed_targets: Vec<Vec<Scalar>> = if x_crashed.is_empty() {
            Vec::new()
        } else {
            match config.crash_handling {
                CrashHandling::VirtualDataPoints => {
                    let n_s = x_success.len();
                    let opts: Vec<FitOptions> = (0..n_objectives)
                        .map(|obj| fit_schedule(config, n_s, warm_success[obj].clone()))
                        .collect();
                    let result = compute_vdp(
                        &dataset,
                        &front,
                        config.gamma_init,
                        config.gamma_step,
                        &bounds,
                        &opts,
                        &mut rng,
                        &mut meter,
                    )
                    .expect("virtual data point fit failed");
                    gamma_used = Some(result.gamma);
                    for (obj, hyper) in result.success_hyperparameters.iter().enumerate() {
                        warm_success[obj] = Some(hyper.clone());
                    }
                    // invariant: no virtual point may dominate a front member
                    for target in &result.virtual_targets {
                        let vp = ObjectiveVector::new(target.clone()).unwrap();
                        for member in front.objective_points() {
                            assert!(
                                !dominates(&vp, member),
                                "virtual data point dominates a front member"
                            );
                        }
                    }
                    result.virtual_targets
                }
                CrashHandling::ConstantPenalty => {
                    let penalty: Vec<Scalar> = worst.clone();
                    x_crashed.iter().map(|_| penalty.clone()).collect()
                }
            }
        };
        // remember hyperparameters of the success-only fits for warm starts
        // of the next iteration (only the vdp path refits on successes)

        // train data: successes plus one surrogate target per crash
        let mut train_x = x_success.clone();
        train_x.extend(x_crashed.iter().cloned());
        assert_eq!(train_x.len(), dataset.len());
        let models: Vec<GPModel> = (0..n_objectives)
            .map(|obj| {
                let mut y: Vec<Scalar> = dataset
                    .successes()
                    .map(|(_, e)| e.objectives.as_ref().unwrap().values()[obj])
                    .collect();
                y.extend(crashed_targets.iter().map(|t| t[obj]));
                let opts = fit_schedule(config, train_x.len(), warm_train[obj].clone());
                let model = fit_with_options(&bounds, &train_x, &y, &opts, &mut rng, &mut meter)
                    .expect("surrogate fit failed");
                warm_train[obj] = Some(model.hyperparameters().clone());
                if x_crashed.is_empty() {
                    warm_success[obj] = Some(model.hyperparameters().clone());
                }
                model
            })
            .collect();

        // batch size
        let batch_size = match config.batch_mode {
            BatchMode::Constant(s) => s.max(1),
            BatchMode::Adaptive => {
                calc_batch_size(t_overhead_prev, t_sim_prev, config.p_overhead_desired)
            }
        };

        // acquisition
        let ref_point = internal_reference_point(&worst);
        let proposals = match config.acquisition {
            Acquisition::Tsemo => tsemo_propose(
                &models,
                &front_points,
                batch_size,
                &ref_point,
                &bounds,
                config.ga_population,
                config.ga_generations,
                config.rff_features,
                &mut rng,
                &mut meter,
            ),
            Acquisition::Eim => vec![eim_propose(
                &models,
                &front_points,
                &bounds,
                &mut rng,
                &mut meter,
            )],
        };

        let overhead_secs = meter.seconds();
        let overhead_wall = wall.elapsed().as_secs_f64();
        builder.add_overhead(overhead_secs, overhead_wall);

        // evaluate and augment
        let (new_evals, batch_mean_secs) = evaluate_batch(&proposals, &mut builder);
        dataset = dataset.augment(&new_evals);

        builder.push_trace(IterationTrace {
            k,
            batch_size: proposals.len(),
            overhead_secs,
            mean_eval_secs: batch_mean_secs,
            overhead_secs_wall: overhead_wall,
            gamma: gamma_used,
            front_indices: front.member_indices().to_vec(),
            cum_steps: builder.total_steps(),
            cum_overhead_secs_wall: builder.overhead_secs_wall(),
            cum_eval_secs: builder.eval_secs(),
        });
        t_overhead_prev = overhead_secs;
        t_sim_prev = batch_mean_secs;
    }
    builder.finish()
}
