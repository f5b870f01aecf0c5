use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::Real;

#[derive(Debug, Error)]
pub enum CoreError {
    #[error("bounds must satisfy min < max per dimension, got min {0} max {1} at index {2}")]
    InvalidBounds(f64, f64, usize),
    #[error("expected vector of length {expected}, got {actual}")]
    DimensionMismatch { expected: usize, actual: usize },
    #[error("objective vectors need at least two entries, got {0}")]
    TooFewObjectives(usize),
    #[error("non-finite value at index {0}")]
    NonFinite(usize),
    #[error("parameter {value} outside [{min}, {max}] at index {index}")]
    OutOfBounds {
        value: f64,
        min: f64,
        max: f64,
        index: usize,
    },
}

/// Box constraints of the decision space: `theta_min <= theta <= theta_max`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BoxBounds<T: Real> {
    theta_min: Vec<T>,
    theta_max: Vec<T>,
}

impl<T: Real> BoxBounds<T> {
    pub fn new(theta_min: Vec<T>, theta_max: Vec<T>) -> Result<Self, CoreError> {
        if theta_min.len() != theta_max.len() || theta_min.is_empty() {
            return Err(CoreError::DimensionMismatch {
                expected: theta_min.len().max(1),
                actual: theta_max.len(),
            });
        }
        for (i, (&lo, &hi)) in theta_min.iter().zip(&theta_max).enumerate() {
            if !(lo < hi) {
                return Err(CoreError::InvalidBounds(
                    lo.to_f64().unwrap_or(f64::NAN),
                    hi.to_f64().unwrap_or(f64::NAN),
                    i,
                ));
            }
        }
        Ok(Self {
            theta_min,
            theta_max,
        })
    }

    /// Same bound on every dimension.
    pub fn uniform(n: usize, lo: T, hi: T) -> Result<Self, CoreError> {
        Self::new(vec![lo; n], vec![hi; n])
    }

    pub fn len(&self) -> usize {
        self.theta_min.len()
    }

    pub fn is_empty(&self) -> bool {
        self.theta_min.is_empty()
    }

    pub fn min(&self) -> &[T] {
        &self.theta_min
    }

    pub fn max(&self) -> &[T] {
        &self.theta_max
    }

    pub fn range(&self, i: usize) -> T {
        self.theta_max[i] - self.theta_min[i]
    }

    pub fn contains(&self, values: &[T]) -> bool {
        values.len() == self.len()
            && values
                .iter()
                .enumerate()
                .all(|(i, &v)| v >= self.theta_min[i] && v <= self.theta_max[i])
    }

    pub fn clip(&self, values: &mut [T]) {
        for (i, v) in values.iter_mut().enumerate() {
            *v = v.max(self.theta_min[i]).min(self.theta_max[i]);
        }
    }

    /// Affine map of a point in these bounds onto the unit cube.
    pub fn to_unit(&self, values: &[T]) -> Vec<T> {
        values
            .iter()
            .enumerate()
            .map(|(i, &v)| (v - self.theta_min[i]) / self.range(i))
            .collect()
    }
}

/// A point in the box-bounded decision space.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ParameterVector<T: Real> {
    values: Vec<T>,
}

impl<T: Real> ParameterVector<T> {
    /// Validates the point against `bounds`.
    pub fn new(values: Vec<T>, bounds: &BoxBounds<T>) -> Result<Self, CoreError> {
        if values.len() != bounds.len() {
            return Err(CoreError::DimensionMismatch {
                expected: bounds.len(),
                actual: values.len(),
            });
        }
        for (i, &v) in values.iter().enumerate() {
            if !v.is_finite() {
                return Err(CoreError::NonFinite(i));
            }
            if v < bounds.min()[i] || v > bounds.max()[i] {
                return Err(CoreError::OutOfBounds {
                    value: v.to_f64().unwrap_or(f64::NAN),
                    min: bounds.min()[i].to_f64().unwrap_or(f64::NAN),
                    max: bounds.max()[i].to_f64().unwrap_or(f64::NAN),
                    index: i,
                });
            }
        }
        Ok(Self { values })
    }

    /// Clips the point into `bounds` instead of rejecting it.
    pub fn clipped(mut values: Vec<T>, bounds: &BoxBounds<T>) -> Self {
        assert_eq!(values.len(), bounds.len(), "parameter dimension mismatch");
        for v in values.iter_mut() {
            if !v.is_finite() {
                *v = T::zero();
            }
        }
        bounds.clip(&mut values);
        Self { values }
    }

    pub fn values(&self) -> &[T] {
        &self.values
    }

    pub fn len(&self) -> usize {
        self.values.len()
    }

    pub fn is_empty(&self) -> bool {
        self.values.is_empty()
    }
}

impl<T: Real> AsRef<[T]> for ParameterVector<T> {
    fn as_ref(&self) -> &[T] {
        &self.values
    }
}

/// Objective values of one successful evaluation, all minimized.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ObjectiveVector<T: Real> {
    values: Vec<T>,
}

impl<T: Real> ObjectiveVector<T> {
    pub fn new(values: Vec<T>) -> Result<Self, CoreError> {
        if values.len() < 2 {
            return Err(CoreError::TooFewObjectives(values.len()));
        }
        if let Some(i) = values.iter().position(|v| !v.is_finite()) {
            return Err(CoreError::NonFinite(i));
        }
        Ok(Self { values })
    }

    pub fn values(&self) -> &[T] {
        &self.values
    }

    pub fn len(&self) -> usize {
        self.values.len()
    }

    pub fn is_empty(&self) -> bool {
        self.values.is_empty()
    }
}

impl<T: Real> AsRef<[T]> for ObjectiveVector<T> {
    fn as_ref(&self) -> &[T] {
        &self.values
    }
}

/// One black-box query result.
///
/// `objectives` is present exactly when the simulation completed without a
/// crash; a crashed query carries no objective values at all.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Evaluation<T: Real> {
    pub theta: ParameterVector<T>,
    pub objectives: Option<ObjectiveVector<T>>,
    /// Simulation time steps consumed by this query.
    pub sim_steps: u64,
    /// Evaluation cost in seconds. Measured for the vehicle benchmark,
    /// fixed nominal for the synthetic problems.
    pub wall_time: f64,
}

impl<T: Real> Evaluation<T> {
    pub fn success(
        theta: ParameterVector<T>,
        objectives: ObjectiveVector<T>,
        sim_steps: u64,
        wall_time: f64,
    ) -> Self {
        Self {
            theta,
            objectives: Some(objectives),
            sim_steps,
            wall_time,
        }
    }

    pub fn crashed(theta: ParameterVector<T>, sim_steps: u64, wall_time: f64) -> Self {
        Self {
            theta,
            objectives: None,
            sim_steps,
            wall_time,
        }
    }

    /// The crash indicator `l`: true when objective values are available.
    pub fn crash_ok(&self) -> bool {
        self.objectives.is_some()
    }
}

/// Ordered, append-only collection of evaluations.
#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
pub struct Dataset<T: Real> {
    evaluations: Vec<Evaluation<T>>,
}

impl<T: Real> Dataset<T> {
    pub fn new() -> Self {
        Self {
            evaluations: Vec::new(),
        }
    }

    pub fn from_evaluations(evaluations: Vec<Evaluation<T>>) -> Self {
        let ds = Self { evaluations };
        ds.assert_consistent();
        ds
    }

    fn assert_consistent(&self) {
        if let Some(first) = self.evaluations.first() {
            let n = first.theta.len();
            let m = self
                .evaluations
                .iter()
                .find_map(|e| e.objectives.as_ref().map(|o| o.len()));
            for e in &self.evaluations {
                assert_eq!(e.theta.len(), n, "mixed parameter dimensions in dataset");
                if let (Some(o), Some(m)) = (e.objectives.as_ref(), m) {
                    assert_eq!(o.len(), m, "mixed objective dimensions in dataset");
                }
            }
        }
    }

    pub fn len(&self) -> usize {
        self.evaluations.len()
    }

    pub fn is_empty(&self) -> bool {
        self.evaluations.is_empty()
    }

    pub fn evaluations(&self) -> &[Evaluation<T>] {
        &self.evaluations
    }

    pub fn iter(&self) -> std::slice::Iter<'_, Evaluation<T>> {
        self.evaluations.iter()
    }

    pub fn successes(&self) -> impl Iterator<Item = (usize, &Evaluation<T>)> {
        self.evaluations
            .iter()
            .enumerate()
            .filter(|(_, e)| e.crash_ok())
    }

    pub fn crashes(&self) -> impl Iterator<Item = (usize, &Evaluation<T>)> {
        self.evaluations
            .iter()
            .enumerate()
            .filter(|(_, e)| !e.crash_ok())
    }

    pub fn n_successes(&self) -> usize {
        self.evaluations.iter().filter(|e| e.crash_ok()).count()
    }

    /// Returns a new dataset with `new` appended after the existing elements,
    /// both in their original order.
    ///
    /// Panics if the new evaluations disagree on parameter or objective
    /// dimensionality.
    pub fn augment(&self, new: &[Evaluation<T>]) -> Self {
        let mut evaluations = self.evaluations.clone();
        evaluations.extend_from_slice(new);
        let out = Self { evaluations };
        out.assert_consistent();
        out
    }

    /// Componentwise worst (largest) objective values over successful
    /// evaluations, if any exist.
    pub fn worst_successful(&self) -> Option<Vec<T>> {
        let mut worst: Option<Vec<T>> = None;
        for (_, e) in self.successes() {
            let obj = e.objectives.as_ref().unwrap().values();
            match worst.as_mut() {
                None => worst = Some(obj.to_vec()),
                Some(w) => {
                    for (wi, &oi) in w.iter_mut().zip(obj) {
                        *wi = wi.max(oi);
                    }
                }
            }
        }
        worst
    }
}

impl<T: Real> std::ops::Index<usize> for Dataset<T> {
    type Output = Evaluation<T>;

    fn index(&self, i: usize) -> &Evaluation<T> {
        &self.evaluations[i]
    }
}
