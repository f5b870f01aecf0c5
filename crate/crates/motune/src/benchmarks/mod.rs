//! Evaluation targets: synthetic problems with known fronts plus a surrogate
//! vehicle-guidance closed-loop benchmark.

mod controller;
mod synthetic;
mod track;
mod vehicle;
mod weights;

pub use controller::{controller_step, ControlCommand, ControllerParams};
pub use synthetic::{
    dtlz2_problem, with_crash_region, zdt1_problem, CrashRegion, SyntheticProblem,
    SYNTHETIC_SECONDS_PER_EVAL, SYNTHETIC_STEPS_PER_EVAL,
};
pub use track::{Track, TrackConfig};
pub use vehicle::{
    crash_predicate, objective_j1, objective_j2, objective_j3, simulate_vehicle, SimOutcome,
    TrajectoryLog, VehicleConfig, VehicleProblem, VehicleState,
};
pub use weights::WeightMapping;

use crate::{BoxBounds, Evaluation, ObjectiveVector, ParameterVector};

/// A black-box tuning target. Evaluation must be a pure, deterministic
/// function of the parameter vector.
pub trait Problem: Send + Sync {
    fn name(&self) -> &str;
    fn n_params(&self) -> usize;
    fn n_objectives(&self) -> usize;
    fn bounds(&self) -> &BoxBounds;
    /// Hypervolume reference point frozen into the problem definition.
    fn reference_point(&self) -> &ObjectiveVector;
    fn evaluate(&self, theta: &ParameterVector) -> Evaluation;
    /// Typical simulation steps of one evaluation.
    fn mean_steps_per_eval(&self) -> u64;
    /// Seconds one simulation step stands for on this problem's reference
    /// clock; used for budget accounting and batch-size control so that runs
    /// are reproducible independent of wall-clock jitter.
    fn nominal_seconds_per_step(&self) -> f64;
}

/// Problems known to the CLI by name.
pub fn by_name(name: &str) -> Option<Box<dyn Problem>> {
    match name {
        "zdt1" => Some(Box::new(zdt1_problem(5))),
        "zdt1-crash" => Some(Box::new(with_crash_region(
            zdt1_problem(5),
            CrashRegion::corner_ball(5),
        ))),
        "dtlz2" => Some(Box::new(dtlz2_problem(5))),
        "dtlz2-crash" => Some(Box::new(with_crash_region(
            dtlz2_problem(5),
            CrashRegion::corner_ball(5),
        ))),
        "vehicle" => Some(Box::new(VehicleProblem::new(VehicleConfig::default()))),
        _ => None,
    }
}

pub const PROBLEM_NAMES: &[&str] = &["zdt1", "zdt1-crash", "dtlz2", "dtlz2-crash", "vehicle"];
