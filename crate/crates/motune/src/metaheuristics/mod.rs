//! Evolutionary optimizers: NSGA-II and MOPSO with crash-aware comparison
//! rules, plus the sorting machinery they and the Bayesian optimizer share.

mod mopso;
mod nsga2;
mod sorting;

pub use mopso::{run_mopso, PsoConfig};
pub use nsga2::{crossover_interpolate, mutate_gaussian, run_nsga2, GaConfig};
pub(crate) use nsga2::nsga2_minimize;
pub use sorting::{crowding_distance, nondominated_sort};
