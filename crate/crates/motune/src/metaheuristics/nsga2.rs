use rand::Rng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, StandardNormal};
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::sorting::{crowding_distance, nondominated_sort};
use crate::benchmarks::Problem;
use crate::cost::CostMeter;
use crate::record::{RunBuilder, RunRecord};
use crate::{BoxBounds, ParameterVector, Scalar};
use rand::SeedableRng;

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct GaConfig {
    pub n_pop: usize,
    pub n_gen: usize,
    /// Probability that a child is an interpolation of two parents instead
    /// of a copy of the first.
    pub crossover_prob: f64,
    /// Mutation standard deviation as a fraction of each gene's range.
    pub mutation_scale: f64,
    /// Per-gene mutation probability; `None` means `1 / N`.
    pub mutation_prob: Option<f64>,
}

impl Default for GaConfig {
    fn default() -> Self {
        Self {
            n_pop: 100,
            n_gen: 50,
            crossover_prob: 1.0,
            mutation_scale: 0.1,
            mutation_prob: None,
        }
    }
}

/// Child on the interpolation line between two parents at a uniform random
/// coordinate.
pub fn crossover_interpolate<R: Rng>(
    parent_a: &ParameterVector,
    parent_b: &ParameterVector,
    rng: &mut R,
) -> Vec<Scalar> {
    let lambda: f64 = rng.random_range(0.0..1.0);
    parent_a
        .values()
        .iter()
        .zip(parent_b.values())
        .map(|(&a, &b)| a + lambda * (b - a))
        .collect()
}

/// Perturbs each gene with probability `per_gene_prob` by zero-mean Gaussian
/// noise scaled to the gene's range, then clips to the bounds.
pub fn mutate_gaussian<R: Rng>(
    theta: &[Scalar],
    scale: f64,
    per_gene_prob: f64,
    bounds: &BoxBounds,
    rng: &mut R,
) -> Vec<Scalar> {
    let mut out = theta.to_vec();
    for (i, v) in out.iter_mut().enumerate() {
        if rng.random_range(0.0..1.0) < per_gene_prob {
            let noise: f64 = StandardNormal.sample(rng);
            *v += noise * scale * bounds.range(i);
        }
        *v = v.clamp(bounds.min()[i], bounds.max()[i]);
    }
    out
}

#[derive(Clone)]
struct Individual {
    theta: Vec<Scalar>,
    /// Objective values; all infinite for crashed evaluations.
    cost: Vec<Scalar>,
    crashed: bool,
}

fn random_theta<R: Rng>(bounds: &BoxBounds, rng: &mut R) -> Vec<Scalar> {
    (0..bounds.len())
        .map(|i| rng.random_range(bounds.min()[i]..bounds.max()[i]))
        .collect()
}

/// Binary tournament on (rank, crowding distance).
fn tournament<R: Rng>(ranks: &[usize], crowding: &[Scalar], rng: &mut R) -> usize {
    let n = ranks.len();
    let a = rng.random_range(0..n);
    let b = rng.random_range(0..n);
    if ranks[a] < ranks[b] || (ranks[a] == ranks[b] && crowding[a] > crowding[b]) {
        a
    } else {
        b
    }
}

/// Sorts the union by (rank, crowding) and returns the surviving indices in
/// selection order.
fn truncate_by_rank_and_crowding(costs: &[Vec<Scalar>], keep: usize) -> Vec<usize> {
    let ranks = nondominated_sort(costs);
    let max_rank = ranks.iter().copied().max().unwrap_or(0);
    let mut survivors = Vec::with_capacity(keep);
    for rank in 0..=max_rank {
        let members: Vec<usize> = (0..costs.len()).filter(|&i| ranks[i] == rank).collect();
        if members.is_empty() {
            continue;
        }
        if survivors.len() + members.len() <= keep {
            survivors.extend_from_slice(&members);
        } else {
            let member_costs: Vec<&Vec<Scalar>> = members.iter().map(|&i| &costs[i]).collect();
            let dist = crowding_distance(&member_costs);
            let mut order: Vec<usize> = (0..members.len()).collect();
            order.sort_by(|&i, &j| dist[j].partial_cmp(&dist[i]).unwrap());
            for &o in order.iter().take(keep - survivors.len()) {
                survivors.push(members[o]);
            }
        }
        if survivors.len() >= keep {
            break;
        }
    }
    survivors
}

/// NSGA-II on a budgeted, crash-prone problem. Crashed individuals carry
/// infinite cost so the sorting sinks them, and any that survive truncation
/// re-enter the next parent generation as fresh random points.
pub fn run_nsga2(
    problem: &dyn Problem,
    config: &GaConfig,
    seed: u64,
    budget_steps: u64,
) -> RunRecord {
    assert!(config.n_pop >= 2 && config.n_pop % 2 == 0, "n_pop must be even");
    assert!(config.n_gen >= 1);
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut builder = RunBuilder::new(problem, "NSGA-II", seed, budget_steps);
    let bounds = problem.bounds();
    let mutation_prob = config
        .mutation_prob
        .unwrap_or(1.0 / problem.n_params() as f64);

    let evaluate_batch = |thetas: &[Vec<Scalar>], builder: &mut RunBuilder| -> Vec<Individual> {
        let parameter_vectors: Vec<ParameterVector> = thetas
            .iter()
            .map(|t| ParameterVector::new(t.clone(), bounds).expect("theta within bounds"))
            .collect();
        let evals: Vec<crate::Evaluation> = parameter_vectors
            .par_iter()
            .map(|pv| problem.evaluate(pv))
            .collect();
        let mut individuals = Vec::with_capacity(evals.len());
        for ev in evals {
            let crashed = !ev.crash_ok();
            let cost = match ev.objectives.as_ref() {
                Some(o) => o.values().to_vec(),
                None => vec![Scalar::INFINITY; problem.n_objectives()],
            };
            individuals.push(Individual {
                theta: ev.theta.values().to_vec(),
                cost,
                crashed,
            });
            builder.commit(ev);
        }
        individuals
    };

    // initial population
    if builder.budget_exhausted() {
        return builder.finish();
    }
    let init: Vec<Vec<Scalar>> = (0..config.n_pop)
        .map(|_| random_theta(bounds, &mut rng))
        .collect();
    let mut parents = evaluate_batch(&init, &mut builder);

    for _gen in 1..=config.n_gen {
        if builder.budget_exhausted() {
            break;
        }
        let meter_start = std::time::Instant::now();
        let mut meter = CostMeter::new();

        let parent_costs: Vec<Vec<Scalar>> = parents.iter().map(|p| p.cost.clone()).collect();
        let ranks = nondominated_sort(&parent_costs);
        meter.add_dominance(parent_costs.len(), problem.n_objectives());
        let crowding = crowding_distance(&parent_costs);

        // variation: all random draws happen here, before any evaluation
        let mut children: Vec<Vec<Scalar>> = Vec::with_capacity(config.n_pop);
        for _ in 0..config.n_pop {
            let a = tournament(&ranks, &crowding, &mut rng);
            let child = if rng.random_range(0.0..1.0) < config.crossover_prob {
                let b = tournament(&ranks, &crowding, &mut rng);
                let pa = ParameterVector::new(parents[a].theta.clone(), bounds).unwrap();
                let pb = ParameterVector::new(parents[b].theta.clone(), bounds).unwrap();
                crossover_interpolate(&pa, &pb, &mut rng)
            } else {
                parents[a].theta.clone()
            };
            children.push(mutate_gaussian(
                &child,
                config.mutation_scale,
                mutation_prob,
                bounds,
                &mut rng,
            ));
        }
        builder.add_overhead(meter.seconds(), meter_start.elapsed().as_secs_f64());

        let child_individuals = evaluate_batch(&children, &mut builder);

        let trunc_start = std::time::Instant::now();
        let mut trunc_meter = CostMeter::new();
        let mut union = parents;
        union.extend(child_individuals);
        let union_costs: Vec<Vec<Scalar>> = union.iter().map(|p| p.cost.clone()).collect();
        trunc_meter.add_dominance(union_costs.len(), problem.n_objectives());
        let survivors = truncate_by_rank_and_crowding(&union_costs, config.n_pop);
        parents = survivors.into_iter().map(|i| union[i].clone()).collect();

        // crashed survivors become fresh random crossover material
        for p in parents.iter_mut() {
            if p.crashed {
                p.theta = random_theta(bounds, &mut rng);
            }
        }
        builder.add_overhead(trunc_meter.seconds(), trunc_start.elapsed().as_secs_f64());
    }
    builder.finish()
}

/// NSGA-II machinery over a cheap batch-evaluated landscape, without crash
/// handling or budget accounting. Returns the deduplicated non-dominated set
/// of the final parent population as (theta, values) pairs.
pub(crate) fn nsga2_minimize<F>(
    evaluate: F,
    bounds: &BoxBounds,
    n_pop: usize,
    n_gen: usize,
    mutation_scale: f64,
    rng: &mut ChaCha8Rng,
    meter: &mut CostMeter,
) -> Vec<(Vec<Scalar>, Vec<Scalar>)>
where
    F: Fn(&[Vec<Scalar>]) -> Vec<Vec<Scalar>>,
{
    let n_pop = n_pop.max(2);
    let mutation_prob = 1.0 / bounds.len() as f64;
    let mut thetas: Vec<Vec<Scalar>> = (0..n_pop).map(|_| random_theta(bounds, rng)).collect();
    let mut costs = evaluate(&thetas);
    let m = costs.first().map(|c| c.len()).unwrap_or(0);

    for _ in 0..n_gen {
        let ranks = nondominated_sort(&costs);
        let crowding = crowding_distance(&costs);
        meter.add_dominance(costs.len(), m);

        let mut children: Vec<Vec<Scalar>> = Vec::with_capacity(n_pop);
        for _ in 0..n_pop {
            let a = tournament(&ranks, &crowding, rng);
            let b = tournament(&ranks, &crowding, rng);
            let pa = ParameterVector::new(thetas[a].clone(), bounds).unwrap();
            let pb = ParameterVector::new(thetas[b].clone(), bounds).unwrap();
            let child = crossover_interpolate(&pa, &pb, rng);
            children.push(mutate_gaussian(
                &child,
                mutation_scale,
                mutation_prob,
                bounds,
                rng,
            ));
        }
        let child_costs = evaluate(&children);

        let mut union_thetas = thetas;
        union_thetas.extend(children);
        let mut union_costs = costs;
        union_costs.extend(child_costs);
        meter.add_dominance(union_costs.len(), m);
        let survivors = truncate_by_rank_and_crowding(&union_costs, n_pop);
        thetas = survivors.iter().map(|&i| union_thetas[i].clone()).collect();
        costs = survivors.iter().map(|&i| union_costs[i].clone()).collect();
    }

    let ranks = nondominated_sort(&costs);
    let mut seen: Vec<&[Scalar]> = Vec::new();
    let mut out = Vec::new();
    for i in 0..thetas.len() {
        if ranks[i] == 0 && !seen.iter().any(|s| *s == thetas[i].as_slice()) {
            seen.push(&thetas[i]);
            out.push((thetas[i].clone(), costs[i].clone()));
        }
    }
    out
}
