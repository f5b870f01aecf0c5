//! Shared domain types and Pareto dominance machinery.

mod pareto;
mod types;

pub use pareto::{current_front, dominates, dominates_slice, pareto_filter, ParetoFront};
pub use types::{BoxBounds, CoreError, Dataset, Evaluation, ObjectiveVector, ParameterVector};
