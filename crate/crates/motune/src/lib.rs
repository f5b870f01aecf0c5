//! Multi-objective black-box tuning of controllers evaluated on expensive,
//! crash-prone simulations.
//!
//! The library bundles several optimizers behind a common budget-accounted
//! interface: Thompson-sampling Bayesian optimization with adaptive batch
//! sizes and virtual data points for crashed evaluations, an expected
//! improvement matrix acquisition, NSGA-II, MOPSO, random search and grid
//! search. A harness runs optimizer x problem x seed matrices and compares
//! them by the hypervolume indicator over simulation steps, including
//! algorithmic overhead converted to equivalent steps.
//!
//! Dominance, front and indicator math is generic over the scalar type via
//! [`Real`]; the crate root exports `f64` aliases which the optimizers, the
//! vehicle benchmark and the harness build on.

pub mod baselines;
pub mod benchmarks;
pub mod core;
pub mod cost;
pub mod gpr;
pub mod harness;
pub mod metaheuristics;
pub mod metrics;
pub mod mobo;
pub mod record;

use std::fmt;

/// Scalar bound for the generic dominance / front / indicator kernels.
///
/// Implemented for `f32` and `f64` through the blanket impl.
pub trait Real:
    num_traits::Float
    + num_traits::FromPrimitive
    + num_traits::ToPrimitive
    + fmt::Debug
    + fmt::Display
    + Default
    + std::iter::Sum
    + Send
    + Sync
    + 'static
{
}

impl<T> Real for T where
    T: num_traits::Float
        + num_traits::FromPrimitive
        + num_traits::ToPrimitive
        + fmt::Debug
        + fmt::Display
        + Default
        + std::iter::Sum
        + Send
        + Sync
        + 'static
{
}

/// Converts an `f64` constant into the working scalar type.
pub(crate) fn cast<T: Real>(x: f64) -> T {
    T::from_f64(x).expect("constant not representable in scalar type")
}

/// Scalar type used by the concrete optimizers, benchmarks and harness.
pub type Scalar = f64;

pub type BoxBounds = crate::core::BoxBounds<Scalar>;
pub type ParameterVector = crate::core::ParameterVector<Scalar>;
pub type ObjectiveVector = crate::core::ObjectiveVector<Scalar>;
pub type Evaluation = crate::core::Evaluation<Scalar>;
pub type Dataset = crate::core::Dataset<Scalar>;
pub type ParetoFront = crate::core::ParetoFront<Scalar>;
pub type HvCurve = crate::metrics::HvCurve<Scalar>;
