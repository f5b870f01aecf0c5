// Temporary: criterion-6 style probe, one seed.
use std::time::Instant;

use motune::benchmarks::{dtlz2_problem, with_crash_region, CrashRegion, Problem};
use motune::metrics::hypervolume;
use motune::mobo::{run_mobo, CrashHandling, MoboConfig};

fn main() {
    let p = with_crash_region(dtlz2_problem(5), CrashRegion::corner_ball(5));
    let budget = 100 * p.mean_steps_per_eval();
    for crash in [CrashHandling::VirtualDataPoints, CrashHandling::ConstantPenalty] {
        let cfg = MoboConfig {
            budget_steps: budget,
            crash_handling: crash,
            ..MoboConfig::default()
        };
        let t = Instant::now();
        let rec = run_mobo(&p, &cfg, 0);
        let objs: Vec<motune::ObjectiveVector> = rec
            .evaluations
            .iter()
            .filter_map(|e| e.objectives.clone())
            .collect();
        let hv = hypervolume(&objs, p.reference_point());
        println!(
            "{}: {} evals ({} crashes), {} iterations, hv {:.4}, wall {:.1}s, model overhead {:.1}s",
            cfg.variant_name(),
            rec.evaluations.len(),
            rec.evaluations.iter().filter(|e| !e.crash_ok()).count(),
            rec.iterations.len(),
            hv,
            t.elapsed().as_secs_f64(),
            rec.total_overhead_secs,
        );
    }
    // random baseline
    let rec = motune::baselines::run_random(&p, 0, budget);
    let objs: Vec<motune::ObjectiveVector> = rec
        .evaluations
        .iter()
        .filter_map(|e| e.objectives.clone())
        .collect();
    println!(
        "Rand: {} evals, hv {:.4}",
        rec.evaluations.len(),
        hypervolume(&objs, p.reference_point())
    );
}
