// Temporary diagnostics for batch/overhead behavior on the vehicle problem.
use std::time::Instant;

use motune::benchmarks::{Problem, VehicleConfig, VehicleProblem};
use motune::mobo::{run_mobo, MoboConfig};

fn main() {
    let problem = VehicleProblem::new(VehicleConfig::default());
    let budget = 900 * problem.mean_steps_per_eval();
    let cfg = MoboConfig {
        budget_steps: budget,
        ..MoboConfig::default()
    };
    let started = Instant::now();
    let rec = run_mobo(&problem, &cfg, 0);
    let wall = started.elapsed().as_secs_f64();
    println!(
        "run: {} evals, {} iterations, wall {wall:.1}s",
        rec.evaluations.len(),
        rec.iterations.len()
    );
    println!(
        "total: sim_steps {}, overhead_steps {}, overhead model {:.2}s wall {:.2}s, eval secs {:.2}",
        rec.total_sim_steps,
        rec.total_overhead_steps,
        rec.total_overhead_secs,
        rec.total_overhead_secs_wall,
        rec.total_eval_secs
    );
    println!("k  S_k  t_o_model  t_o_wall  t_sim_mean  cum_ratio_wall  n_evals_seen gamma");
    let mut evals_seen = cfg.n_init;
    for t in &rec.iterations {
        let ratio = if t.cum_eval_secs > 0.0 {
            t.cum_overhead_secs_wall / t.cum_eval_secs
        } else {
            0.0
        };
        evals_seen += t.batch_size;
        println!(
            "{:>3} {:>5} {:>9.3} {:>9.3} {:>10.4} {:>14.3} {:>8} {:?}",
            t.k, t.batch_size, t.overhead_secs, t.overhead_secs_wall, t.mean_eval_secs, ratio,
            evals_seen, t.gamma
        );
    }
    let crashes = rec.evaluations.iter().filter(|e| !e.crash_ok()).count();
    println!("crashes: {crashes} / {}", rec.evaluations.len());
    println!("final front size: {}", rec.final_front().len());
    println!(
        "final hv: {:.4}",
        rec.hv_curve.points.last().map(|p| p.1).unwrap_or(0.0)
    );
}
