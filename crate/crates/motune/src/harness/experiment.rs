use std::fs;
use std::panic::{catch_unwind, AssertUnwindSafe};
use std::path::{Path, PathBuf};

use rayon::prelude::*;

use super::config::{ExperimentConfig, Overrides, Variant};
use super::persist::{load_record, mark_failed, record_dir, save_record, HarnessError};
use crate::baselines::{run_grid, run_random};
use crate::benchmarks::{self, Problem, VehicleConfig, VehicleProblem};
use crate::metaheuristics::{run_mopso, run_nsga2};
use crate::mobo::run_mobo;
use crate::record::RunRecord;

#[derive(Debug, Default)]
pub struct ExperimentOutcome {
    pub completed: Vec<(u64, PathBuf)>,
    pub resumed: Vec<u64>,
    pub failed: Vec<u64>,
}

/// Builds the named problem, applying config-file overrides where they
/// exist.
pub fn build_problem(
    name: &str,
    overrides: &Overrides,
) -> Result<Box<dyn Problem>, HarnessError> {
    if name == "vehicle" {
        let cfg: VehicleConfig = overrides.vehicle.clone().unwrap_or_default();
        return Ok(Box::new(VehicleProblem::new(cfg)));
    }
    benchmarks::by_name(name).ok_or_else(|| HarnessError::UnknownProblem(name.to_string()))
}

fn run_variant(
    problem: &dyn Problem,
    variant: Variant,
    budget_steps: u64,
    seed: u64,
    overrides: &Overrides,
) -> RunRecord {
    match variant {
        Variant::Nsga2 => {
            let cfg = overrides.ga.clone().unwrap_or_default();
            run_nsga2(problem, &cfg, seed, budget_steps)
        }
        Variant::Mopso => {
            let cfg = overrides.pso.clone().unwrap_or_default();
            run_mopso(problem, &cfg, seed, budget_steps)
        }
        Variant::Rand => run_random(problem, seed, budget_steps),
        Variant::Grid => {
            let spec = overrides.grid.clone().unwrap_or_default();
            let mut rec = run_grid(problem, &spec, budget_steps);
            rec.seed = seed;
            rec
        }
        bo => {
            let mut cfg = bo
                .mobo_config(budget_steps)
                .expect("bayesian variant has a mobo config");
            if let Some(patch) = &overrides.mobo {
                patch.apply(&mut cfg);
            }
            run_mobo(problem, &cfg, seed)
        }
    }
}

/// Runs one variant over all configured seeds, persisting one record per
/// seed. Seeds already on disk are reloaded, failing seeds are flagged and
/// do not abort the rest.
pub fn run_experiment(config: &ExperimentConfig) -> Result<ExperimentOutcome, HarnessError> {
    if config.budget_steps == 0 {
        log::warn!("budget of zero steps: nothing to run");
        return Ok(ExperimentOutcome::default());
    }
    let problem = build_problem(&config.problem, &config.overrides)?;
    fs::create_dir_all(&config.out_dir)?;

    let results: Vec<(u64, Result<PathBuf, Option<String>>)> = config
        .seeds
        .par_iter()
        .map(|&seed| {
            let dir = record_dir(
                &config.out_dir,
                problem.name(),
                config.variant.name(),
                seed,
            );
            if load_record(&dir, problem.bounds()).is_ok() {
                return (seed, Err(None)); // already complete, resume
            }
            let outcome = catch_unwind(AssertUnwindSafe(|| {
                run_variant(
                    problem.as_ref(),
                    config.variant,
                    config.budget_steps,
                    seed,
                    &config.overrides,
                )
            }));
            match outcome {
                Ok(record) => match save_record(&config.out_dir, &record) {
                    Ok(path) => (seed, Ok(path)),
                    Err(e) => (seed, Err(Some(e.to_string()))),
                },
                Err(panic) => {
                    let msg = panic
                        .downcast_ref::<String>()
                        .cloned()
                        .or_else(|| panic.downcast_ref::<&str>().map(|s| s.to_string()))
                        .unwrap_or_else(|| "panic".to_string());
                    (seed, Err(Some(msg)))
                }
            }
        })
        .collect();

    let mut outcome = ExperimentOutcome::default();
    for (seed, result) in results {
        match result {
            Ok(path) => outcome.completed.push((seed, path)),
            Err(None) => outcome.resumed.push(seed),
            Err(Some(msg)) => {
                log::error!(
                    "seed {seed} of {} on {} failed: {msg}",
                    config.variant.name(),
                    config.problem
                );
                mark_failed(
                    &config.out_dir,
                    problem.name(),
                    config.variant.name(),
                    seed,
                );
                outcome.failed.push(seed);
            }
        }
    }
    Ok(outcome)
}

/// Writes plot-ready columnar files for a set of persisted runs: hypervolume
/// curves with significance flags, relative cumulative overhead, and the
/// final fronts with their parameter vectors.
pub fn emit_plot_data(
    out_dir: &Path,
    problem: &dyn Problem,
    groups: &[(String, Vec<RunRecord>)],
    alpha: f64,
) -> Result<Vec<PathBuf>, HarnessError> {
    let plot_dir = out_dir.join(problem.name()).join("plots");
    fs::create_dir_all(&plot_dir)?;
    let mut written = Vec::new();

    if groups.len() >= 2 && groups.iter().map(|(_, r)| r.len()).min() == groups.iter().map(|(_, r)| r.len()).max()
    {
        let report = super::compare(groups, alpha);
        let path = plot_dir.join("hv_vs_steps.csv");
        fs::write(&path, report.to_csv())?;
        written.push(path);
        let path = plot_dir.join("comparison.txt");
        fs::write(&path, report.to_string())?;
        written.push(path);
    }

    // relative cumulative overhead per variant
    let mut overhead = String::from("variant,seed,steps,relative_cumulative_overhead\n");
    for (name, records) in groups {
        for rec in records {
            if rec.iterations.is_empty() {
                let ratio = if rec.total_eval_secs > 0.0 {
                    rec.total_overhead_secs_wall / rec.total_eval_secs
                } else {
                    0.0
                };
                overhead.push_str(&format!(
                    "{name},{},{},{ratio}\n",
                    rec.seed,
                    rec.total_steps()
                ));
            } else {
                for t in &rec.iterations {
                    let ratio = if t.cum_eval_secs > 0.0 {
                        t.cum_overhead_secs_wall / t.cum_eval_secs
                    } else {
                        0.0
                    };
                    overhead.push_str(&format!(
                        "{name},{},{},{ratio}\n",
                        rec.seed, t.cum_steps
                    ));
                }
            }
        }
    }
    let path = plot_dir.join("overhead_vs_steps.csv");
    fs::write(&path, overhead)?;
    written.push(path);

    // final Pareto fronts with parameter vectors
    let n_params = problem.n_params();
    let n_obj = problem.n_objectives();
    let mut fronts = String::from("variant,seed,eval_index");
    for d in 0..n_params {
        fronts.push_str(&format!(",theta{d}"));
    }
    for o in 0..n_obj {
        fronts.push_str(&format!(",j{}", o + 1));
    }
    fronts.push('\n');
    for (name, records) in groups {
        for rec in records {
            for (idx, obj) in rec.final_front() {
                fronts.push_str(&format!("{name},{},{idx}", rec.seed));
                for v in rec.evaluations[idx].theta.values() {
                    fronts.push_str(&format!(",{v}"));
                }
                for v in obj.values() {
                    fronts.push_str(&format!(",{v}"));
                }
                fronts.push('\n');
            }
        }
    }
    let path = plot_dir.join("fronts.csv");
    fs::write(&path, fronts)?;
    written.push(path);

    Ok(written)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::metaheuristics::GaConfig;

    fn tmp_dir(tag: &str) -> PathBuf {
        let dir = std::env::temp_dir().join(format!("motune-exp-{tag}-{}", std::process::id()));
        let _ = fs::remove_dir_all(&dir);
        dir
    }

    #[test]
    fn random_experiment_runs_and_resumes() {
        let out = tmp_dir("rand");
        let config = ExperimentConfig {
            problem: "zdt1".into(),
            variant: Variant::Rand,
            budget_steps: 20 * 8_400,
            seeds: vec![0, 1, 2],
            out_dir: out.clone(),
            overrides: Default::default(),
        };
        let outcome = run_experiment(&config).unwrap();
        assert_eq!(outcome.completed.len(), 3);
        assert!(outcome.failed.is_empty());
        // rerun resumes every seed
        let outcome = run_experiment(&config).unwrap();
        assert_eq!(outcome.resumed.len(), 3);
        assert!(outcome.completed.is_empty());
        fs::remove_dir_all(&out).unwrap();
    }

    #[test]
    fn zero_budget_is_an_explicit_no_op() {
        let out = tmp_dir("zero");
        let config = ExperimentConfig {
            problem: "zdt1".into(),
            variant: Variant::Rand,
            budget_steps: 0,
            seeds: vec![0],
            out_dir: out.clone(),
            overrides: Default::default(),
        };
        let outcome = run_experiment(&config).unwrap();
        assert!(outcome.completed.is_empty());
        assert!(outcome.failed.is_empty());
        let _ = fs::remove_dir_all(&out);
    }

    #[test]
    fn distinct_seeds_give_distinct_sequences() {
        let out = tmp_dir("seeds");
        let config = ExperimentConfig {
            problem: "zdt1".into(),
            variant: Variant::Rand,
            budget_steps: 15 * 8_400,
            seeds: vec![4, 5],
            out_dir: out.clone(),
            overrides: Default::default(),
        };
        run_experiment(&config).unwrap();
        let problem = build_problem("zdt1", &Default::default()).unwrap();
        let recs =
            super::super::load_all_records(&out, "zdt1", "Rand", problem.bounds()).unwrap();
        assert_eq!(recs.len(), 2);
        assert_ne!(recs[0].evaluations, recs[1].evaluations);
        fs::remove_dir_all(&out).unwrap();
    }

    #[test]
    fn plot_data_files_are_written() {
        let out = tmp_dir("plots");
        for variant in [Variant::Rand, Variant::Nsga2] {
            let config = ExperimentConfig {
                problem: "zdt1".into(),
                variant,
                budget_steps: 30 * 8_400,
                seeds: vec![0, 1],
                out_dir: out.clone(),
                overrides: Overrides {
                    ga: Some(GaConfig {
                        n_pop: 10,
                        n_gen: 2,
                        ..GaConfig::default()
                    }),
                    ..Default::default()
                },
            };
            run_experiment(&config).unwrap();
        }
        let problem = build_problem("zdt1", &Default::default()).unwrap();
        let groups: Vec<(String, Vec<RunRecord>)> = ["Rand", "NSGA-II"]
            .iter()
            .map(|v| {
                (
                    v.to_string(),
                    super::super::load_all_records(&out, "zdt1", v, problem.bounds()).unwrap(),
                )
            })
            .collect();
        let files = emit_plot_data(&out, problem.as_ref(), &groups, 0.05).unwrap();
        assert!(files.iter().all(|f| f.exists()));
        let fronts = fs::read_to_string(out.join("zdt1/plots/fronts.csv")).unwrap();
        assert!(fronts.lines().count() > 1);
        fs::remove_dir_all(&out).unwrap();
    }
}
