use serde::{Deserialize, Serialize};

use crate::{cast, Real};

/// Hypervolume as a function of consumed simulation steps (including
/// converted overhead), non-decreasing in both coordinates within one run.
#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
pub struct HvCurve<T> {
    pub points: Vec<(u64, T)>,
}

impl<T: Real> HvCurve<T> {
    pub fn new(points: Vec<(u64, T)>) -> Self {
        debug_assert!(points.windows(2).all(|w| w[0].0 <= w[1].0));
        Self { points }
    }

    pub fn is_empty(&self) -> bool {
        self.points.is_empty()
    }

    /// Value at `step` by last observation carried forward; zero before the
    /// first observation.
    pub fn value_at(&self, step: u64) -> T {
        let mut value = T::zero();
        for &(s, hv) in &self.points {
            if s > step {
                break;
            }
            value = hv;
        }
        value
    }
}

/// Resamples a curve onto a step grid by last observation carried forward.
pub fn sample_locf<T: Real>(curve: &HvCurve<T>, grid: &[u64]) -> HvCurve<T> {
    HvCurve::new(grid.iter().map(|&s| (s, curve.value_at(s))).collect())
}

/// Pointwise median across runs, after aligning every run onto `grid`.
pub fn median_hv_curve<T: Real>(runs: &[HvCurve<T>], grid: &[u64]) -> HvCurve<T> {
    assert!(!runs.is_empty(), "need at least one run");
    let points = grid
        .iter()
        .map(|&s| {
            let mut values: Vec<T> = runs.iter().map(|r| r.value_at(s)).collect();
            values.sort_by(|a, b| a.partial_cmp(b).unwrap());
            let n = values.len();
            let median = if n % 2 == 1 {
                values[n / 2]
            } else {
                (values[n / 2 - 1] + values[n / 2]) / cast::<T>(2.0)
            };
            (s, median)
        })
        .collect();
    HvCurve::new(points)
}

/// Converts optimizer overhead into equivalent simulation steps:
/// `ceil(overhead / seconds_per_step)`.
pub fn overhead_to_steps(overhead_seconds: f64, seconds_per_step: f64) -> u64 {
    assert!(seconds_per_step > 0.0, "seconds per step must be positive");
    assert!(overhead_seconds >= 0.0);
    (overhead_seconds / seconds_per_step).ceil() as u64
}
