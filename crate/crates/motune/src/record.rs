//! Run traces and budget accounting shared by every optimizer.

use serde::{Deserialize, Serialize};

use crate::benchmarks::Problem;
use crate::core::pareto_filter;
use crate::metrics::{hypervolume, overhead_to_steps};
use crate::{Evaluation, HvCurve, ObjectiveVector};

/// Per-iteration trace of the Bayesian optimizer.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct IterationTrace {
    pub k: usize,
    pub batch_size: usize,
    /// Overhead of this iteration on the deterministic reference clock;
    /// the value the next batch-size computation consumes.
    pub overhead_secs: f64,
    /// Mean reference-clock evaluation time of this iteration's batch.
    pub mean_eval_secs: f64,
    /// Measured wall-clock overhead of this iteration.
    pub overhead_secs_wall: f64,
    /// Final pessimism factor used for virtual data points, if any were
    /// computed.
    pub gamma: Option<f64>,
    /// Dataset indices of the front at the start of the iteration.
    pub front_indices: Vec<usize>,
    /// Totals at the end of the iteration, for overhead-ratio reporting.
    pub cum_steps: u64,
    pub cum_overhead_secs_wall: f64,
    pub cum_eval_secs: f64,
}

/// Full trace of one optimizer run.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RunRecord {
    pub variant: String,
    pub problem: String,
    pub seed: u64,
    pub budget_steps: u64,
    pub evaluations: Vec<Evaluation>,
    /// Total consumed steps (simulation plus converted overhead) at the
    /// commit of each evaluation.
    pub eval_cum_steps: Vec<u64>,
    pub iterations: Vec<IterationTrace>,
    pub hv_curve: HvCurve,
    pub total_sim_steps: u64,
    pub total_overhead_steps: u64,
    /// Reference-clock overhead total.
    pub total_overhead_secs: f64,
    /// Measured wall-clock overhead total.
    pub total_overhead_secs_wall: f64,
    /// Sum of per-evaluation cost in seconds.
    pub total_eval_secs: f64,
}

impl RunRecord {
    pub fn total_steps(&self) -> u64 {
        self.total_sim_steps + self.total_overhead_steps
    }

    /// Objective points of the final front, with their dataset indices.
    pub fn final_front(&self) -> Vec<(usize, &ObjectiveVector)> {
        let successes: Vec<(usize, &ObjectiveVector)> = self
            .evaluations
            .iter()
            .enumerate()
            .filter_map(|(i, e)| e.objectives.as_ref().map(|o| (i, o)))
            .collect();
        let pts: Vec<&[f64]> = successes.iter().map(|(_, o)| o.values()).collect();
        pareto_filter(&pts)
            .into_iter()
            .map(|k| successes[k])
            .collect()
    }
}

/// Collects evaluations and overhead during a run and freezes them into a
/// [`RunRecord`].
pub struct RunBuilder<'p> {
    problem: &'p dyn Problem,
    variant: String,
    seed: u64,
    budget_steps: u64,
    evaluations: Vec<Evaluation>,
    eval_cum_steps: Vec<u64>,
    iterations: Vec<IterationTrace>,
    sim_steps: u64,
    overhead_steps: u64,
    overhead_secs: f64,
    overhead_secs_wall: f64,
    eval_secs: f64,
}

impl<'p> RunBuilder<'p> {
    pub fn new(problem: &'p dyn Problem, variant: &str, seed: u64, budget_steps: u64) -> Self {
        Self {
            problem,
            variant: variant.to_string(),
            seed,
            budget_steps,
            evaluations: Vec::new(),
            eval_cum_steps: Vec::new(),
            iterations: Vec::new(),
            sim_steps: 0,
            overhead_steps: 0,
            overhead_secs: 0.0,
            overhead_secs_wall: 0.0,
            eval_secs: 0.0,
        }
    }

    pub fn problem(&self) -> &'p dyn Problem {
        self.problem
    }

    /// Steps consumed so far, converted overhead included.
    pub fn total_steps(&self) -> u64 {
        self.sim_steps + self.overhead_steps
    }

    pub fn budget_exhausted(&self) -> bool {
        self.total_steps() >= self.budget_steps
    }

    pub fn evaluations(&self) -> &[Evaluation] {
        &self.evaluations
    }

    pub fn n_evaluations(&self) -> usize {
        self.evaluations.len()
    }

    pub fn overhead_secs_wall(&self) -> f64 {
        self.overhead_secs_wall
    }

    pub fn eval_secs(&self) -> f64 {
        self.eval_secs
    }

    /// Books optimizer overhead: `secs` on the deterministic reference
    /// clock drives budget accounting, `wall_secs` is kept for reporting.
    pub fn add_overhead(&mut self, secs: f64, wall_secs: f64) {
        self.overhead_secs += secs;
        self.overhead_secs_wall += wall_secs;
        self.overhead_steps += overhead_to_steps(secs, self.problem.nominal_seconds_per_step());
    }

    pub fn commit(&mut self, evaluation: Evaluation) {
        self.sim_steps += evaluation.sim_steps;
        self.eval_secs += evaluation.wall_time;
        self.evaluations.push(evaluation);
        self.eval_cum_steps.push(self.total_steps());
    }

    pub fn push_trace(&mut self, trace: IterationTrace) {
        self.iterations.push(trace);
    }

    pub fn finish(self) -> RunRecord {
        let grid = log_step_grid(self.budget_steps, 100);
        let hv_curve = hv_curve_on_grid(
            &self.evaluations,
            &self.eval_cum_steps,
            self.problem.reference_point(),
            &grid,
        );
        RunRecord {
            variant: self.variant,
            problem: self.problem.name().to_string(),
            seed: self.seed,
            budget_steps: self.budget_steps,
            evaluations: self.evaluations,
            eval_cum_steps: self.eval_cum_steps,
            iterations: self.iterations,
            hv_curve,
            total_sim_steps: self.sim_steps,
            total_overhead_steps: self.overhead_steps,
            total_overhead_secs: self.overhead_secs,
            total_overhead_secs_wall: self.overhead_secs_wall,
            total_eval_secs: self.eval_secs,
        }
    }
}

/// 100 logarithmically spaced integer steps up to the budget, deduplicated.
pub fn log_step_grid(budget_steps: u64, n: usize) -> Vec<u64> {
    if budget_steps == 0 {
        return Vec::new();
    }
    let b = budget_steps as f64;
    let mut grid: Vec<u64> = (0..n)
        .map(|i| b.powf(i as f64 / (n - 1) as f64).round() as u64)
        .collect();
    grid.dedup();
    grid
}

/// Hypervolume of the front of the evaluation prefix at each grid step,
/// maintained incrementally.
fn hv_curve_on_grid(
    evaluations: &[Evaluation],
    cum_steps: &[u64],
    reference: &ObjectiveVector,
    grid: &[u64],
) -> HvCurve {
    let mut points = Vec::with_capacity(grid.len());
    let mut front: Vec<ObjectiveVector> = Vec::new();
    let mut e = 0usize;
    let mut hv = 0.0;
    let mut dirty = false;
    for &g in grid {
        while e < evaluations.len() && cum_steps[e] <= g {
            if let Some(obj) = evaluations[e].objectives.as_ref() {
                if !front
                    .iter()
                    .any(|f| crate::core::dominates_slice(f.values(), obj.values()) || f == obj)
                {
                    front.retain(|f| !crate::core::dominates_slice(obj.values(), f.values()));
                    front.push(obj.clone());
                    dirty = true;
                }
            }
            e += 1;
        }
        if dirty {
            hv = hypervolume(&front, reference);
            dirty = false;
        }
        points.push((g, hv));
    }
    HvCurve::new(points)
}
