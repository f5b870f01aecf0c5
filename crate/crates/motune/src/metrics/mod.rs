//! Hypervolume indicator, budget accounting and the rank-sum test.

mod curve;
mod hypervolume;
mod wilcoxon;

pub use curve::{median_hv_curve, overhead_to_steps, sample_locf, HvCurve};
pub use hypervolume::{
    hv_contribution, hv_slicing, hv_sweep_2d, hypervolume, hypervolume_mc,
};
pub use wilcoxon::{normal_cdf, wilcoxon_one_sided, StatTestResult, TestDirection};
