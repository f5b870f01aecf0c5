use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, Subcommand};

use motune::benchmarks::{self, Problem, VehicleProblem, PROBLEM_NAMES};
use motune::harness::{
    self, emit_plot_data, load_all_records, run_experiment, ExperimentConfig, ExperimentFile,
    Variant, VARIANT_NAMES,
};
use motune::record::RunRecord;

#[derive(Parser)]
#[command(
    name = "motune",
    about = "Multi-objective black-box tuning of simulation-evaluated controllers"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Run one optimizer variant on a problem over a set of seeds.
    Run {
        #[arg(long)]
        problem: Option<String>,
        #[arg(long)]
        variant: Option<String>,
        #[arg(long)]
        budget_steps: Option<u64>,
        /// Comma-separated seed list, defaults to 0..9.
        #[arg(long, value_delimiter = ',')]
        seeds: Option<Vec<u64>>,
        #[arg(long, default_value = "runs")]
        out: PathBuf,
        /// TOML file with problem parameters and optimizer overrides.
        #[arg(long)]
        config: Option<PathBuf>,
    },
    /// Compare persisted runs of several variants on one problem.
    Compare {
        #[arg(long)]
        problem: String,
        /// Variants to include; defaults to every variant with records.
        #[arg(long, value_delimiter = ',')]
        variants: Option<Vec<String>>,
        #[arg(long, default_value = "runs")]
        out: PathBuf,
        #[arg(long, default_value_t = 0.05)]
        alpha: f64,
    },
    /// Export plot data and optionally a trajectory of a front member.
    Export {
        #[arg(long)]
        problem: String,
        #[arg(long, value_delimiter = ',')]
        variants: Option<Vec<String>>,
        #[arg(long, default_value = "runs")]
        out: PathBuf,
        #[arg(long, default_value_t = 0.05)]
        alpha: f64,
        /// Re-simulate a front member and write its trajectory log:
        /// `<variant>:<seed>:<eval_index>` (vehicle problem only).
        #[arg(long)]
        trajectory: Option<String>,
    },
    /// List the configured optimizer variants and problems.
    ListVariants,
}

fn main() -> ExitCode {
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or("info")).init();
    let cli = Cli::parse();
    match dispatch(cli.command) {
        Ok(()) => ExitCode::SUCCESS,
        Err(msg) => {
            eprintln!("error: {msg}");
            ExitCode::FAILURE
        }
    }
}

fn dispatch(command: Command) -> Result<(), String> {
    match command {
        Command::Run {
            problem,
            variant,
            budget_steps,
            seeds,
            out,
            config,
        } => {
            let file = match config {
                Some(path) => ExperimentFile::load(&path).map_err(|e| e.to_string())?,
                None => ExperimentFile::default(),
            };
            let problem = problem
                .or(file.problem.clone())
                .ok_or("--problem or a config file entry is required")?;
            let variant: Variant = variant
                .or(file.variant.clone())
                .ok_or("--variant or a config file entry is required")?
                .parse()?;
            let budget_steps = budget_steps
                .or(file.budget_steps)
                .ok_or("--budget-steps or a config file entry is required")?;
            let seeds = seeds
                .or(file.seeds.clone())
                .unwrap_or_else(ExperimentConfig::default_seeds);
            let config = ExperimentConfig {
                problem,
                variant,
                budget_steps,
                seeds,
                out_dir: out,
                overrides: file.overrides,
            };
            let outcome = run_experiment(&config).map_err(|e| e.to_string())?;
            println!(
                "completed {} seed(s), resumed {}, failed {}",
                outcome.completed.len(),
                outcome.resumed.len(),
                outcome.failed.len()
            );
            if outcome.failed.is_empty() {
                Ok(())
            } else {
                Err(format!("seeds failed: {:?}", outcome.failed))
            }
        }
        Command::Compare {
            problem,
            variants,
            out,
            alpha,
        } => {
            let (prob, groups) = load_groups(&problem, variants, &out)?;
            if groups.len() < 2 {
                return Err("need records of at least two variants to compare".into());
            }
            let report = harness::compare(&groups, alpha);
            print!("{report}");
            let _ = prob;
            Ok(())
        }
        Command::Export {
            problem,
            variants,
            out,
            alpha,
            trajectory,
        } => {
            let (prob, groups) = load_groups(&problem, variants, &out)?;
            let files =
                emit_plot_data(&out, prob.as_ref(), &groups, alpha).map_err(|e| e.to_string())?;
            for f in &files {
                println!("wrote {}", f.display());
            }
            if let Some(spec) = trajectory {
                let path = export_trajectory(&spec, &problem, prob.as_ref(), &groups, &out)?;
                println!("wrote {}", path.display());
            }
            Ok(())
        }
        Command::ListVariants => {
            println!("variants:");
            for v in VARIANT_NAMES {
                println!("  {v}");
            }
            println!("problems:");
            for p in PROBLEM_NAMES {
                println!("  {p}");
            }
            Ok(())
        }
    }
}

type Groups = Vec<(String, Vec<RunRecord>)>;

fn load_groups(
    problem: &str,
    variants: Option<Vec<String>>,
    out: &std::path::Path,
) -> Result<(Box<dyn Problem>, Groups), String> {
    let prob = benchmarks::by_name(problem).ok_or_else(|| {
        format!("unknown problem '{problem}', expected one of {PROBLEM_NAMES:?}")
    })?;
    let names: Vec<String> = match variants {
        Some(v) => v,
        None => VARIANT_NAMES.iter().map(|s| s.to_string()).collect(),
    };
    let mut groups = Vec::new();
    for name in names {
        let records =
            load_all_records(out, problem, &name, prob.bounds()).map_err(|e| e.to_string())?;
        if !records.is_empty() {
            groups.push((name, records));
        }
    }
    if groups.is_empty() {
        return Err(format!("no records found under {}", out.display()));
    }
    Ok((prob, groups))
}

/// `<variant>:<seed>:<eval_index>` for the vehicle problem: re-simulates the
/// chosen evaluation and writes its trajectory as columnar text.
fn export_trajectory(
    spec: &str,
    problem_name: &str,
    problem: &dyn Problem,
    groups: &Groups,
    out: &std::path::Path,
) -> Result<PathBuf, String> {
    let parts: Vec<&str> = spec.split(':').collect();
    if parts.len() != 3 {
        return Err("trajectory spec must be <variant>:<seed>:<eval_index>".into());
    }
    let (variant, seed, index) = (
        parts[0],
        parts[1].parse::<u64>().map_err(|e| e.to_string())?,
        parts[2].parse::<usize>().map_err(|e| e.to_string())?,
    );
    if problem_name != "vehicle" {
        return Err("trajectory export only applies to the vehicle problem".into());
    }
    let records = groups
        .iter()
        .find(|(name, _)| name == variant)
        .map(|(_, recs)| recs)
        .ok_or_else(|| format!("no records for variant {variant}"))?;
    let record = records
        .iter()
        .find(|r| r.seed == seed)
        .ok_or_else(|| format!("no record for seed {seed}"))?;
    let eval = record
        .evaluations
        .get(index)
        .ok_or_else(|| format!("evaluation index {index} out of range"))?;
    let _ = problem;
    let vehicle = VehicleProblem::new(Default::default());
    let (log, _) = vehicle.simulate(&eval.theta);
    let path = out
        .join(problem_name)
        .join(variant)
        .join(format!("seed_{seed}"))
        .join(format!("trajectory_{index}.csv"));
    let file = std::fs::File::create(&path).map_err(|e| e.to_string())?;
    log.write_csv(std::io::BufWriter::new(file))
        .map_err(|e| e.to_string())?;
    Ok(path)
}
