//! Random search and full-factorial grid search benchmarks.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::benchmarks::Problem;
use crate::record::{RunBuilder, RunRecord};
use crate::{ParameterVector, Scalar};

/// Uniform i.i.d. sampling over the box until the budget is exhausted.
/// Evaluations are batched for concurrency but committed in draw order.
pub fn run_random(problem: &dyn Problem, seed: u64, budget_steps: u64) -> RunRecord {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut builder = RunBuilder::new(problem, "Rand", seed, budget_steps);
    let bounds = problem.bounds();
    const BATCH: usize = 16;
    while !builder.budget_exhausted() {
        let thetas: Vec<ParameterVector> = (0..BATCH)
            .map(|_| {
                let values: Vec<Scalar> = (0..bounds.len())
                    .map(|i| rng.random_range(bounds.min()[i]..bounds.max()[i]))
                    .collect();
                ParameterVector::new(values, bounds).unwrap()
            })
            .collect();
        let evals: Vec<crate::Evaluation> =
            thetas.par_iter().map(|t| problem.evaluate(t)).collect();
        for ev in evals {
            builder.commit(ev);
            if builder.budget_exhausted() {
                break;
            }
        }
    }
    builder.finish()
}

/// Full-factorial discretization of the decision space.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct GridSpec {
    pub levels_per_dim: usize,
}

impl Default for GridSpec {
    fn default() -> Self {
        Self { levels_per_dim: 6 }
    }
}

impl GridSpec {
    /// Equally spaced levels from the lower to the upper bound, inclusive.
    pub fn levels(&self, lo: Scalar, hi: Scalar) -> Vec<Scalar> {
        assert!(self.levels_per_dim >= 2);
        let l = self.levels_per_dim;
        (0..l)
            .map(|i| lo + (hi - lo) * i as f64 / (l - 1) as f64)
            .collect()
    }

    pub fn total_points(&self, n_dims: usize) -> u64 {
        (self.levels_per_dim as u64).pow(n_dims as u32)
    }
}

/// Evaluates the Cartesian product of the per-dimension levels in
/// lexicographic order of the level indices, truncating at the budget.
pub fn run_grid(problem: &dyn Problem, spec: &GridSpec, budget_steps: u64) -> RunRecord {
    let mut builder = RunBuilder::new(problem, "Grid", 0, budget_steps);
    let bounds = problem.bounds();
    let n = bounds.len();
    let levels: Vec<Vec<Scalar>> = (0..n)
        .map(|i| spec.levels(bounds.min()[i], bounds.max()[i]))
        .collect();
    let l = spec.levels_per_dim;

    let mut indices = vec![0usize; n];
    let mut done = false;
    const BATCH: usize = 64;
    while !done && !builder.budget_exhausted() {
        let mut thetas = Vec::with_capacity(BATCH);
        for _ in 0..BATCH {
            let values: Vec<Scalar> = indices.iter().enumerate().map(|(d, &i)| levels[d][i]).collect();
            thetas.push(ParameterVector::new(values, bounds).unwrap());
            // odometer increment, last dimension fastest
            let mut d = n;
            loop {
                if d == 0 {
                    done = true;
                    break;
                }
                d -= 1;
                indices[d] += 1;
                if indices[d] < l {
                    break;
                }
                indices[d] = 0;
            }
            if done {
                break;
            }
        }
        let evals: Vec<crate::Evaluation> =
            thetas.par_iter().map(|t| problem.evaluate(t)).collect();
        for ev in evals {
            builder.commit(ev);
            if builder.budget_exhausted() {
                break;
            }
        }
    }
    builder.finish()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::benchmarks::{zdt1_problem, SyntheticProblem};
    use crate::BoxBounds;

    fn wide_zdt1() -> SyntheticProblem {
        zdt1_problem(5).with_bounds(BoxBounds::uniform(5, -3.0, 4.0).unwrap())
    }

    #[test]
    fn random_samples_within_bounds_and_reproducible() {
        let p = wide_zdt1();
        let a = run_random(&p, 3, 200 * 8_400);
        let b = run_random(&p, 3, 200 * 8_400);
        assert_eq!(a.evaluations, b.evaluations);
        assert!(a
            .evaluations
            .iter()
            .all(|e| p.bounds().contains(e.theta.values())));
        let c = run_random(&p, 4, 200 * 8_400);
        assert_ne!(a.evaluations, c.evaluations);
    }

    #[test]
    fn random_sample_mean_near_midpoint() {
        let p = wide_zdt1();
        let rec = run_random(&p, 7, 10_000 * 8_400);
        assert!(rec.evaluations.len() >= 10_000);
        for d in 0..5 {
            let mean: f64 = rec
                .evaluations
                .iter()
                .map(|e| e.theta.values()[d])
                .sum::<f64>()
                / rec.evaluations.len() as f64;
            // midpoint of [-3, 4] is 0.5; within 2 percent of the range
            assert!((mean - 0.5).abs() < 0.02 * 7.0, "dim {d} mean {mean}");
        }
    }

    #[test]
    fn grid_levels_match_equal_spacing() {
        let spec = GridSpec { levels_per_dim: 6 };
        let levels = spec.levels(-3.0, 4.0);
        let expect = [-3.0, -1.6, -0.2, 1.2, 2.6, 4.0];
        for (a, b) in levels.iter().zip(&expect) {
            assert!((a - b).abs() < 1e-12, "{a} vs {b}");
        }
    }

    #[test]
    fn grid_enumerates_all_corners_for_two_levels() {
        let p = zdt1_problem(2).with_bounds(BoxBounds::uniform(2, 0.0, 1.0).unwrap());
        let spec = GridSpec { levels_per_dim: 2 };
        let rec = run_grid(&p, &spec, u64::MAX);
        assert_eq!(rec.evaluations.len(), 4);
        let thetas: Vec<&[f64]> = rec.evaluations.iter().map(|e| e.theta.values()).collect();
        assert_eq!(thetas[0], &[0.0, 0.0]);
        assert_eq!(thetas[1], &[0.0, 1.0]);
        assert_eq!(thetas[2], &[1.0, 0.0]);
        assert_eq!(thetas[3], &[1.0, 1.0]);
    }

    #[test]
    fn grid_is_exhaustive_and_duplicate_free() {
        let p = zdt1_problem(3);
        let spec = GridSpec { levels_per_dim: 4 };
        let rec = run_grid(&p, &spec, u64::MAX);
        assert_eq!(rec.evaluations.len(), 64);
        let mut seen: Vec<Vec<u64>> = rec
            .evaluations
            .iter()
            .map(|e| e.theta.values().iter().map(|v| v.to_bits()).collect())
            .collect();
        seen.sort();
        seen.dedup();
        assert_eq!(seen.len(), 64);
    }

    #[test]
    fn grid_truncates_at_budget() {
        let p = zdt1_problem(3);
        let spec = GridSpec { levels_per_dim: 4 };
        let rec = run_grid(&p, &spec, 10 * 8_400);
        assert!(rec.evaluations.len() < 64);
        assert!(rec.evaluations.len() >= 10);
    }
}
