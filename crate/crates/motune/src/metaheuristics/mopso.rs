use std::collections::BTreeMap;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::benchmarks::Problem;
use crate::core::dominates_slice;
use crate::cost::CostMeter;
use crate::record::{RunBuilder, RunRecord};
use crate::{ParameterVector, Scalar};

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct PsoConfig {
    pub n_pop: usize,
    /// Repository capacity.
    pub n_rep: usize,
    pub n_gen: usize,
    pub inertia: f64,
    pub cognitive: f64,
    pub social: f64,
    /// Hypercube divisions per objective of the adaptive grid.
    pub grid_divisions: usize,
    /// Fraction of particles mutated in the first generation; decays
    /// linearly to zero.
    pub mutation_fraction_start: f64,
    /// Shape exponent of the shrinking non-uniform mutation range.
    pub mutation_power: f64,
}

impl Default for PsoConfig {
    fn default() -> Self {
        Self {
            n_pop: 100,
            n_rep: 250,
            n_gen: 50,
            inertia: 0.4,
            cognitive: 2.0,
            social: 2.0,
            grid_divisions: 7,
            mutation_fraction_start: 0.5,
            mutation_power: 2.0,
        }
    }
}

#[derive(Clone)]
struct Particle {
    position: Vec<Scalar>,
    velocity: Vec<Scalar>,
    value: Option<Vec<Scalar>>,
    pbest_position: Vec<Scalar>,
    pbest_value: Option<Vec<Scalar>>,
}

#[derive(Clone)]
struct RepositoryEntry {
    position: Vec<Scalar>,
    value: Vec<Scalar>,
}

/// Objective-space hypercube partition of the repository.
struct AdaptiveGrid {
    lo: Vec<Scalar>,
    hi: Vec<Scalar>,
    divisions: usize,
    /// Cell key -> repository indices, ordered for determinism.
    cells: BTreeMap<Vec<usize>, Vec<usize>>,
}

impl AdaptiveGrid {
    fn build(repository: &[RepositoryEntry], divisions: usize) -> Self {
        let m = repository.first().map(|e| e.value.len()).unwrap_or(0);
        let mut lo = vec![Scalar::INFINITY; m];
        let mut hi = vec![Scalar::NEG_INFINITY; m];
        for e in repository {
            for d in 0..m {
                lo[d] = lo[d].min(e.value[d]);
                hi[d] = hi[d].max(e.value[d]);
            }
        }
        let mut grid = Self {
            lo,
            hi,
            divisions,
            cells: BTreeMap::new(),
        };
        for (i, e) in repository.iter().enumerate() {
            let key = grid.key_of(&e.value);
            grid.cells.entry(key).or_default().push(i);
        }
        grid
    }

    fn key_of(&self, value: &[Scalar]) -> Vec<usize> {
        value
            .iter()
            .enumerate()
            .map(|(d, &v)| {
                let range = self.hi[d] - self.lo[d];
                if range <= 0.0 {
                    0
                } else {
                    (((v - self.lo[d]) / range * self.divisions as f64).floor() as usize)
                        .min(self.divisions - 1)
                }
            })
            .collect()
    }

    /// Roulette over occupied cells with weight 10 / occupancy, then a
    /// uniform member of the winning cell.
    fn select_leader<R: Rng>(&self, rng: &mut R) -> usize {
        let weights: Vec<f64> = self
            .cells
            .values()
            .map(|members| 10.0 / members.len() as f64)
            .collect();
        let total: f64 = weights.iter().sum();
        let mut pick = rng.random_range(0.0..total);
        for (members, w) in self.cells.values().zip(&weights) {
            if pick < *w {
                return members[rng.random_range(0..members.len())];
            }
            pick -= w;
        }
        let last = self.cells.values().next_back().unwrap();
        last[last.len() - 1]
    }

    /// A member of the most crowded cell, chosen uniformly.
    fn most_crowded_member<R: Rng>(&self, rng: &mut R) -> usize {
        let (_, members) = self
            .cells
            .iter()
            .max_by_key(|(_, v)| v.len())
            .expect("non-empty grid");
        members[rng.random_range(0..members.len())]
    }
}

/// Constraint-rule comparison: feasible beats infeasible, two feasible
/// solutions compare by dominance, and all remaining ties (mutually
/// non-dominated or both infeasible) resolve by a coin flip. Returns true if
/// the challenger wins.
fn challenger_wins<R: Rng>(
    challenger: &Option<Vec<Scalar>>,
    incumbent: &Option<Vec<Scalar>>,
    rng: &mut R,
) -> bool {
    match (challenger, incumbent) {
        (Some(c), Some(i)) => {
            if dominates_slice(c, i) {
                true
            } else if dominates_slice(i, c) {
                false
            } else {
                rng.random_range(0.0..1.0) < 0.5
            }
        }
        (Some(_), None) => true,
        (None, Some(_)) => false,
        (None, None) => rng.random_range(0.0..1.0) < 0.5,
    }
}

/// MOPSO with a repository of non-dominated feasible solutions and an
/// adaptive grid guiding leader selection and truncation.
pub fn run_mopso(
    problem: &dyn Problem,
    config: &PsoConfig,
    seed: u64,
    budget_steps: u64,
) -> RunRecord {
    assert!(config.n_pop >= 1 && config.n_gen >= 1 && config.n_rep >= 1);
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut builder = RunBuilder::new(problem, "MOPSO", seed, budget_steps);
    let bounds = problem.bounds();
    let n = bounds.len();

    let evaluate_positions =
        |positions: &[Vec<Scalar>], builder: &mut RunBuilder| -> Vec<Option<Vec<Scalar>>> {
            let pvs: Vec<ParameterVector> = positions
                .iter()
                .map(|p| ParameterVector::new(p.clone(), bounds).expect("position within bounds"))
                .collect();
            let evals: Vec<crate::Evaluation> =
                pvs.par_iter().map(|pv| problem.evaluate(pv)).collect();
            let mut values = Vec::with_capacity(evals.len());
            for ev in evals {
                values.push(ev.objectives.as_ref().map(|o| o.values().to_vec()));
                builder.commit(ev);
            }
            values
        };

    if builder.budget_exhausted() {
        return builder.finish();
    }

    // initialization
    let positions: Vec<Vec<Scalar>> = (0..config.n_pop)
        .map(|_| {
            (0..n)
                .map(|i| rng.random_range(bounds.min()[i]..bounds.max()[i]))
                .collect()
        })
        .collect();
    let values = evaluate_positions(&positions, &mut builder);
    let mut particles: Vec<Particle> = positions
        .into_iter()
        .zip(values)
        .map(|(position, value)| Particle {
            pbest_position: position.clone(),
            pbest_value: value.clone(),
            velocity: vec![0.0; n],
            position,
            value,
        })
        .collect();

    let mut repository: Vec<RepositoryEntry> = Vec::new();
    let mut grid_logged_empty = false;
    update_repository(&mut repository, &particles, config, &mut rng);
    let mut grid = AdaptiveGrid::build(&repository, config.grid_divisions);

    for gen in 1..=config.n_gen {
        if builder.budget_exhausted() {
            break;
        }
        let wall = std::time::Instant::now();
        let meter = CostMeter::new();

        let decay = 1.0 - (gen - 1) as f64 / config.n_gen as f64;
        let mutate_fraction = config.mutation_fraction_start * decay;
        let shrink = decay.powf(config.mutation_power);

        for p in particles.iter_mut() {
            let leader = if repository.is_empty() {
                if !grid_logged_empty {
                    log::warn!("mopso: empty repository, drawing leaders from the population");
                    grid_logged_empty = true;
                }
                particles_fallback_leader(&mut rng, config.n_pop)
            } else {
                LeaderChoice::Repository(grid.select_leader(&mut rng))
            };
            let leader_position: Vec<Scalar> = match leader {
                LeaderChoice::Repository(i) => repository[i].position.clone(),
                LeaderChoice::SelfBest => p.pbest_position.clone(),
            };
            for d in 0..n {
                let r1: f64 = rng.random_range(0.0..1.0);
                let r2: f64 = rng.random_range(0.0..1.0);
                p.velocity[d] = config.inertia * p.velocity[d]
                    + config.cognitive * r1 * (p.pbest_position[d] - p.position[d])
                    + config.social * r2 * (leader_position[d] - p.position[d]);
                p.position[d] += p.velocity[d];
            }
            // boundary check with velocity zeroing at the wall
            for d in 0..n {
                if p.position[d] < bounds.min()[d] {
                    p.position[d] = bounds.min()[d];
                    p.velocity[d] = 0.0;
                } else if p.position[d] > bounds.max()[d] {
                    p.position[d] = bounds.max()[d];
                    p.velocity[d] = 0.0;
                }
            }
            if rng.random_range(0.0..1.0) < mutate_fraction {
                for d in 0..n {
                    let r: f64 = rng.random_range(0.0..1.0);
                    let span = 1.0 - r.powf(shrink);
                    if rng.random_range(0.0..1.0) < 0.5 {
                        p.position[d] += (bounds.max()[d] - p.position[d]) * span;
                    } else {
                        p.position[d] -= (p.position[d] - bounds.min()[d]) * span;
                    }
                }
            }
        }

        let new_positions: Vec<Vec<Scalar>> = particles.iter().map(|p| p.position.clone()).collect();
        builder.add_overhead(meter.seconds(), wall.elapsed().as_secs_f64());
        let new_values = evaluate_positions(&new_positions, &mut builder);

        let wall = std::time::Instant::now();
        let mut meter = CostMeter::new();
        for (p, value) in particles.iter_mut().zip(new_values) {
            p.value = value;
            if challenger_wins(&p.value, &p.pbest_value, &mut rng) {
                p.pbest_position = p.position.clone();
                p.pbest_value = p.value.clone();
            }
        }
        update_repository(&mut repository, &particles, config, &mut rng);
        meter.add_dominance(repository.len() + config.n_pop, problem.n_objectives());
        grid = AdaptiveGrid::build(&repository, config.grid_divisions);
        builder.add_overhead(meter.seconds(), wall.elapsed().as_secs_f64());
    }
    builder.finish()
}

enum LeaderChoice {
    Repository(usize),
    SelfBest,
}

fn particles_fallback_leader<R: Rng>(rng: &mut R, n_pop: usize) -> LeaderChoice {
    // draw and discard to keep the stream aligned with the repository path
    let _ = rng.random_range(0..n_pop.max(1));
    LeaderChoice::SelfBest
}

/// Inserts the feasible non-dominated particles, drops dominated entries and
/// truncates to capacity by removing from the most crowded grid cells.
fn update_repository<R: Rng>(
    repository: &mut Vec<RepositoryEntry>,
    particles: &[Particle],
    config: &PsoConfig,
    rng: &mut R,
) {
    for p in particles {
        let Some(value) = p.value.as_ref() else {
            continue;
        };
        if repository
            .iter()
            .any(|e| dominates_slice(&e.value, value) || e.value == *value)
        {
            continue;
        }
        repository.retain(|e| !dominates_slice(value, &e.value));
        repository.push(RepositoryEntry {
            position: p.position.clone(),
            value: value.clone(),
        });
        while repository.len() > config.n_rep {
            let grid = AdaptiveGrid::build(repository, config.grid_divisions);
            let victim = grid.most_crowded_member(rng);
            repository.remove(victim);
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::benchmarks::{dtlz2_problem, with_crash_region, zdt1_problem, CrashRegion};

    #[test]
    fn feasible_beats_infeasible() {
        let mut rng = ChaCha8Rng::seed_from_u64(1);
        let feasible = Some(vec![1.0, 1.0]);
        let infeasible: Option<Vec<f64>> = None;
        assert!(challenger_wins(&feasible, &infeasible, &mut rng));
        assert!(!challenger_wins(&infeasible, &feasible, &mut rng));
    }

    #[test]
    fn dominance_decides_between_feasible() {
        let mut rng = ChaCha8Rng::seed_from_u64(2);
        let better = Some(vec![1.0, 1.0]);
        let worse = Some(vec![2.0, 2.0]);
        assert!(challenger_wins(&better, &worse, &mut rng));
        assert!(!challenger_wins(&worse, &better, &mut rng));
    }

    #[test]
    fn both_infeasible_resolves_randomly() {
        let mut rng = ChaCha8Rng::seed_from_u64(3);
        let a: Option<Vec<f64>> = None;
        let mut wins = 0;
        for _ in 0..1000 {
            if challenger_wins(&a, &a, &mut rng) {
                wins += 1;
            }
        }
        assert!(wins > 400 && wins < 600, "wins {wins}");
    }

    #[test]
    fn repository_respects_capacity_and_nondomination() {
        let p = dtlz2_problem(5);
        let cfg = PsoConfig {
            n_pop: 30,
            n_rep: 20,
            n_gen: 10,
            ..PsoConfig::default()
        };
        let rec = run_mopso(&p, &cfg, 5, 1_000 * 8_400);
        // rebuild repository from the trace: replay is costly, so instead
        // check the final front size constraint indirectly: every recorded
        // evaluation is inside bounds and the run is reproducible
        assert!(rec
            .evaluations
            .iter()
            .all(|e| p.bounds().contains(e.theta.values())));
        let rec2 = run_mopso(&p, &cfg, 5, 1_000 * 8_400);
        assert_eq!(rec.evaluations, rec2.evaluations);
    }

    #[test]
    fn repository_unit_behavior() {
        let cfg = PsoConfig {
            n_rep: 3,
            grid_divisions: 4,
            ..PsoConfig::default()
        };
        let mut rng = ChaCha8Rng::seed_from_u64(7);
        let mut repo = Vec::new();
        let mk = |v: Vec<f64>| Particle {
            position: vec![0.0, 0.0],
            velocity: vec![0.0, 0.0],
            value: Some(v.clone()),
            pbest_position: vec![0.0, 0.0],
            pbest_value: Some(v),
        };
        let particles: Vec<Particle> = vec![
            mk(vec![1.0, 5.0]),
            mk(vec![5.0, 1.0]),
            mk(vec![2.0, 4.0]),
            mk(vec![4.0, 2.0]),
            mk(vec![3.0, 3.0]),
            mk(vec![6.0, 6.0]), // dominated
        ];
        update_repository(&mut repo, &particles, &cfg, &mut rng);
        assert!(repo.len() <= 3);
        // mutually non-dominated
        for (i, a) in repo.iter().enumerate() {
            for (j, b) in repo.iter().enumerate() {
                if i != j {
                    assert!(!dominates_slice(&a.value, &b.value));
                }
            }
        }
        // the dominated point never made it in
        assert!(repo.iter().all(|e| e.value != vec![6.0, 6.0]));
    }

    #[test]
    fn crashes_never_enter_repository_and_run_reproduces() {
        let p = with_crash_region(zdt1_problem(5), CrashRegion::corner_ball(5));
        let cfg = PsoConfig {
            n_pop: 50,
            n_rep: 15,
            n_gen: 5,
            ..PsoConfig::default()
        };
        let a = run_mopso(&p, &cfg, 11, 500 * 8_400);
        let b = run_mopso(&p, &cfg, 11, 500 * 8_400);
        assert_eq!(a.evaluations, b.evaluations);
        assert!(a.evaluations.iter().any(|e| !e.crash_ok()));
        assert!(a.evaluations.iter().any(|e| e.crash_ok()));
    }

    #[test]
    fn pso_positions_always_in_bounds() {
        let p = zdt1_problem(5);
        let cfg = PsoConfig {
            n_pop: 15,
            n_gen: 8,
            ..PsoConfig::default()
        };
        let rec = run_mopso(&p, &cfg, 13, 10_000 * 8_400);
        assert!(rec
            .evaluations
            .iter()
            .all(|e| p.bounds().contains(e.theta.values())));
    }
}
