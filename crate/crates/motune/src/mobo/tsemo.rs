use rand::Rng;
use rand_chacha::ChaCha8Rng;

use crate::cost::CostMeter;
use crate::gpr::{sample_posterior, GPModel};
use crate::metaheuristics::nsga2_minimize;
use crate::metrics::hv_contribution;
use crate::{BoxBounds, ParameterVector, Scalar};

/// Thompson-sampling proposal: optimize one posterior draw per objective
/// with the internal genetic algorithm, then greedily pick the batch by
/// hypervolume improvement over the current front, using model predictions
/// for the not-yet-evaluated picks.
#[allow(clippy::too_many_arguments)]
pub fn tsemo_propose(
    models: &[GPModel],
    front_points: &[Vec<Scalar>],
    batch: usize,
    ref_point: &[Scalar],
    bounds: &BoxBounds,
    ga_population: usize,
    ga_generations: usize,
    rff_features: usize,
    rng: &mut ChaCha8Rng,
    meter: &mut CostMeter,
) -> Vec<ParameterVector> {
    assert!(batch >= 1);
    let m = models.len();

    let draws: Vec<_> = models
        .iter()
        .map(|model| sample_posterior(model, rff_features, rng, meter))
        .collect();

    // GA landscape evaluations are dominated by the cos features
    let ga_meter_flops = (ga_population * ga_generations * m * rff_features) as f64
        * (2.0 * bounds.len() as f64 + crate::cost::TRANSCENDENTAL_FLOPS);
    let evaluate = |thetas: &[Vec<Scalar>]| -> Vec<Vec<Scalar>> {
        let mut per_obj: Vec<Vec<Scalar>> = Vec::with_capacity(m);
        for draw in &draws {
            per_obj.push(draw.eval_batch(thetas));
        }
        (0..thetas.len())
            .map(|i| per_obj.iter().map(|col| col[i]).collect())
            .collect()
    };
    let candidates = nsga2_minimize(
        evaluate,
        bounds,
        ga_population,
        ga_generations,
        0.1,
        rng,
        meter,
    );
    meter.add_flops(ga_meter_flops);

    // degenerate sampled landscape: constant draws give the GA nothing to
    // rank, fall back to uniform random proposals
    let degenerate = (0..m).all(|obj| {
        let lo = candidates
            .iter()
            .map(|(_, v)| v[obj])
            .fold(f64::INFINITY, f64::min);
        let hi = candidates
            .iter()
            .map(|(_, v)| v[obj])
            .fold(f64::NEG_INFINITY, f64::max);
        !(hi - lo).is_finite() || hi - lo < 1e-12
    });
    if candidates.is_empty() || degenerate {
        log::warn!("degenerate sampled landscape, proposing uniformly at random");
        return (0..batch).map(|_| random_point(bounds, rng)).collect();
    }

    // model predictions at the candidate points
    let cand_thetas: Vec<Vec<Scalar>> = candidates.iter().map(|(t, _)| t.clone()).collect();
    let mut predictions: Vec<Vec<Scalar>> = vec![vec![0.0; m]; cand_thetas.len()];
    for (obj, model) in models.iter().enumerate() {
        let (mu, _) = model.predict_batch(&cand_thetas);
        meter.add_gemm(cand_thetas.len(), model.n_training(), bounds.len());
        meter.add_transcendental(cand_thetas.len() * model.n_training());
        for (c, value) in mu.into_iter().enumerate() {
            predictions[c][obj] = value;
        }
    }

    // greedy hypervolume-improvement selection
    let mut base: Vec<Vec<Scalar>> = front_points.to_vec();
    let mut selected: Vec<usize> = Vec::new();
    let mut proposals = Vec::with_capacity(batch);
    for _ in 0..batch.min(cand_thetas.len()) {
        let others: Vec<&[Scalar]> = base.iter().map(|p| p.as_slice()).collect();
        let mut best: Option<(usize, f64)> = None;
        for c in 0..cand_thetas.len() {
            if selected.contains(&c) {
                continue;
            }
            let gain = hv_contribution(&predictions[c], &others, ref_point);
            meter.add_flops((others.len() * m * 40) as f64 + 2_000.0);
            if best.map_or(true, |(_, g)| gain > g) {
                best = Some((c, gain));
            }
        }
        let (winner, _) = best.expect("unselected candidate exists");
        selected.push(winner);
        base.push(predictions[winner].clone());
        proposals.push(
            ParameterVector::new(cand_thetas[winner].clone(), bounds)
                .expect("candidates within bounds"),
        );
    }
    // batch larger than the candidate front: pad with uniform random points
    while proposals.len() < batch {
        proposals.push(random_point(bounds, rng));
    }
    proposals
}

fn random_point(bounds: &BoxBounds, rng: &mut ChaCha8Rng) -> ParameterVector {
    let values: Vec<Scalar> = (0..bounds.len())
        .map(|i| rng.random_range(bounds.min()[i]..bounds.max()[i]))
        .collect();
    ParameterVector::new(values, bounds).unwrap()
}

/// Reference point for internal hypervolume-improvement selection: the
/// componentwise worst successful values padded by ten percent of their
/// magnitude (shifted outward when a component is not positive).
pub fn internal_reference_point(worst_successful: &[Scalar]) -> Vec<Scalar> {
    worst_successful
        .iter()
        .map(|&w| {
            let pad = 0.1 * w.abs();
            w + if pad > 0.0 { pad } else { 0.1 }
        })
        .collect()
}
