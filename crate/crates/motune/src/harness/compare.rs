use std::fmt;

use serde::{Deserialize, Serialize};

use crate::metrics::{median_hv_curve, wilcoxon_one_sided};
use crate::record::{log_step_grid, RunRecord};
use crate::HvCurve;

/// Median curve and per-point significance flags of one variant.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct VariantSeries {
    pub variant: String,
    pub median: HvCurve,
    /// Per grid point: whether this variant is statistically significantly
    /// worse than the best variant at that point.
    pub significantly_worse: Vec<bool>,
    pub p_values: Vec<f64>,
    /// Final hypervolume per seed, in seed order.
    pub final_hv_per_seed: Vec<f64>,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct ComparisonReport {
    pub grid: Vec<u64>,
    pub alpha: f64,
    pub series: Vec<VariantSeries>,
    /// Name of the variant with the highest median at each grid point.
    pub best_per_point: Vec<String>,
}

/// Compares variants on a common log step grid: per grid point the median
/// hypervolume across seeds, the best variant, and a one-sided rank-sum flag
/// against the best at level `alpha`.
pub fn compare(groups: &[(String, Vec<RunRecord>)], alpha: f64) -> ComparisonReport {
    assert!(groups.len() >= 2, "need at least two variants to compare");
    let n_seeds = groups[0].1.len();
    assert!(n_seeds >= 1, "need at least one seed");
    assert!(
        groups.iter().all(|(_, recs)| recs.len() == n_seeds),
        "all variants need the same seed count"
    );

    let mut groups: Vec<&(String, Vec<RunRecord>)> = groups.iter().collect();
    groups.sort_by(|a, b| a.0.cmp(&b.0));

    let min_budget = groups
        .iter()
        .flat_map(|(_, recs)| recs.iter().map(|r| r.budget_steps))
        .min()
        .unwrap();
    let grid = log_step_grid(min_budget, 100);

    // per variant, per grid point, HV samples across seeds by LOCF
    let samples: Vec<Vec<Vec<f64>>> = groups
        .iter()
        .map(|(_, recs)| {
            grid.iter()
                .map(|&s| recs.iter().map(|r| r.hv_curve.value_at(s)).collect())
                .collect()
        })
        .collect();

    let medians: Vec<HvCurve> = groups
        .iter()
        .map(|(_, recs)| {
            let curves: Vec<HvCurve> = recs.iter().map(|r| r.hv_curve.clone()).collect();
            median_hv_curve(&curves, &grid)
        })
        .collect();

    let mut best_per_point = Vec::with_capacity(grid.len());
    for gi in 0..grid.len() {
        let best = (0..groups.len())
            .max_by(|&a, &b| {
                medians[a].points[gi]
                    .1
                    .partial_cmp(&medians[b].points[gi].1)
                    .unwrap()
                    .then(groups[b].0.cmp(&groups[a].0))
            })
            .unwrap();
        best_per_point.push(groups[best].0.clone());
    }

    let series = groups
        .iter()
        .enumerate()
        .map(|(vi, (name, recs))| {
            let mut flags = Vec::with_capacity(grid.len());
            let mut p_values = Vec::with_capacity(grid.len());
            for gi in 0..grid.len() {
                let best_name = &best_per_point[gi];
                if name == best_name {
                    flags.push(false);
                    p_values.push(1.0);
                    continue;
                }
                let best_idx = groups.iter().position(|(n, _)| n == best_name).unwrap();
                let result =
                    wilcoxon_one_sided(&samples[vi][gi], &samples[best_idx][gi], alpha);
                flags.push(result.significant);
                p_values.push(result.p_value);
            }
            VariantSeries {
                variant: name.clone(),
                median: medians[vi].clone(),
                significantly_worse: flags,
                p_values,
                final_hv_per_seed: recs
                    .iter()
                    .map(|r| r.hv_curve.value_at(*grid.last().unwrap()))
                    .collect(),
            }
        })
        .collect();

    ComparisonReport {
        grid,
        alpha,
        series,
        best_per_point,
    }
}

impl ComparisonReport {
    /// Plot-ready long-format rows: variant, step, median hv, worse flag.
    pub fn to_csv(&self) -> String {
        let mut out = String::from("variant,steps,median_hv,significantly_worse,p_value\n");
        for s in &self.series {
            for (gi, &(step, hv)) in s.median.points.iter().enumerate() {
                out.push_str(&format!(
                    "{},{},{},{},{}\n",
                    s.variant, step, hv, s.significantly_worse[gi] as u8, s.p_values[gi]
                ));
            }
        }
        out
    }
}

impl fmt::Display for ComparisonReport {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        writeln!(f, "median hypervolume by consumed steps (alpha = {})", self.alpha)?;
        let picks: Vec<usize> = (0..10)
            .map(|i| (self.grid.len().saturating_sub(1)) * i / 9)
            .collect();
        write!(f, "{:>14}", "steps")?;
        for s in &self.series {
            write!(f, "{:>16}", s.variant)?;
        }
        writeln!(f)?;
        let mut last = usize::MAX;
        for &gi in &picks {
            if gi == last {
                continue;
            }
            last = gi;
            write!(f, "{:>14}", self.grid[gi])?;
            for s in &self.series {
                let marker = if s.significantly_worse[gi] { "*" } else { " " };
                write!(f, "{:>15.6}{}", s.median.points[gi].1, marker)?;
            }
            writeln!(f)?;
        }
        writeln!(f, "(* = significantly worse than the best variant at that point)")
    }
}
