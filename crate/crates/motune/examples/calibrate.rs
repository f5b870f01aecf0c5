//! Prints the frozen vehicle-benchmark constants from a pilot run: the
//! hypervolume reference point (componentwise worst successful objectives of
//! 200 random evaluations, padded by 10 percent), the mean step count, and
//! the measured seconds per simulation step.

use std::time::Instant;

use motune::baselines::run_random;
use motune::benchmarks::{Problem, VehicleConfig, VehicleProblem};

fn main() {
    let problem = VehicleProblem::new(VehicleConfig::default());
    let budget = 200 * problem.mean_steps_per_eval() * 3; // generous cap
    let started = Instant::now();
    let record = run_random(&problem, 42, budget);
    let elapsed = started.elapsed().as_secs_f64();

    let n = record.evaluations.len();
    let successes: Vec<&motune::ObjectiveVector> = record
        .evaluations
        .iter()
        .filter_map(|e| e.objectives.as_ref())
        .collect();
    let total_steps: u64 = record.evaluations.iter().map(|e| e.sim_steps).sum();
    let total_eval_secs: f64 = record.evaluations.iter().map(|e| e.wall_time).sum();

    println!("pilot: {n} evaluations in {elapsed:.1} s (wall)");
    println!(
        "success rate: {:.1}% ({} of {n})",
        100.0 * successes.len() as f64 / n as f64,
        successes.len()
    );
    println!("mean steps per eval: {}", total_steps / n as u64);
    println!(
        "measured seconds per step: {:.3e}",
        total_eval_secs / total_steps as f64
    );
    println!(
        "mean eval seconds: {:.4}",
        total_eval_secs / n as f64
    );

    if successes.is_empty() {
        println!("no successful evaluations; widen the search or fix the controller");
        return;
    }
    let m = successes[0].len();
    let mut worst = vec![f64::NEG_INFINITY; m];
    let mut best = vec![f64::INFINITY; m];
    for obj in &successes {
        for d in 0..m {
            worst[d] = worst[d].max(obj.values()[d]);
            best[d] = best[d].min(obj.values()[d]);
        }
    }
    println!("best successful objectives:  {best:?}");
    println!("worst successful objectives: {worst:?}");
    let reference: Vec<f64> = worst.iter().map(|w| w * 1.1).collect();
    println!("frozen reference point (worst x 1.1): {reference:?}");
}
