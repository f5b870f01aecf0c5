use serde::{Deserialize, Serialize};

use super::Problem;
use crate::{BoxBounds, Evaluation, ObjectiveVector, ParameterVector, Scalar};

/// Nominal cost of one synthetic evaluation, standing in for the expensive
/// closed-loop simulation: 8.4e3 steps at roughly 20 seconds per call.
pub const SYNTHETIC_STEPS_PER_EVAL: u64 = 8_400;
pub const SYNTHETIC_SECONDS_PER_EVAL: f64 = 20.0;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
enum Kind {
    Zdt1,
    Dtlz2,
}

/// Test problem with an analytically known front. Decision variables are
/// mapped affinely from the problem bounds onto the unit cube before the
/// objective formulas apply.
#[derive(Debug, Clone)]
pub struct SyntheticProblem {
    kind: Kind,
    name: String,
    bounds: BoxBounds,
    reference: ObjectiveVector,
}

/// ZDT1 with two objectives; the analytic front is `f2 = 1 - sqrt(f1)`.
pub fn zdt1_problem(n: usize) -> SyntheticProblem {
    assert!(n >= 2);
    SyntheticProblem {
        kind: Kind::Zdt1,
        name: "zdt1".into(),
        bounds: BoxBounds::uniform(n, 0.0, 1.0).unwrap(),
        // analytic nadir (1, 1) padded by 10 percent
        reference: ObjectiveVector::new(vec![1.1, 1.1]).unwrap(),
    }
}

/// DTLZ2 with three objectives; optimal points lie on the unit sphere.
pub fn dtlz2_problem(n: usize) -> SyntheticProblem {
    assert!(n >= 3);
    SyntheticProblem {
        kind: Kind::Dtlz2,
        name: "dtlz2".into(),
        bounds: BoxBounds::uniform(n, 0.0, 1.0).unwrap(),
        reference: ObjectiveVector::new(vec![1.1, 1.1, 1.1]).unwrap(),
    }
}

impl SyntheticProblem {
    /// Same problem over different box bounds (exercised through the affine
    /// map onto the unit cube).
    pub fn with_bounds(mut self, bounds: BoxBounds) -> Self {
        assert_eq!(bounds.len(), self.bounds.len());
        self.bounds = bounds;
        self
    }

    fn objectives(&self, x: &[Scalar]) -> Vec<Scalar> {
        match self.kind {
            Kind::Zdt1 => {
                let n = x.len();
                let f1 = x[0];
                let g = 1.0 + 9.0 * x[1..].iter().sum::<f64>() / (n as f64 - 1.0);
                let f2 = g * (1.0 - (f1 / g).sqrt());
                vec![f1, f2]
            }
            Kind::Dtlz2 => {
                use std::f64::consts::FRAC_PI_2;
                let g: f64 = x[2..].iter().map(|&v| (v - 0.5) * (v - 0.5)).sum();
                let c = 1.0 + g;
                vec![
                    c * (x[0] * FRAC_PI_2).cos() * (x[1] * FRAC_PI_2).cos(),
                    c * (x[0] * FRAC_PI_2).cos() * (x[1] * FRAC_PI_2).sin(),
                    c * (x[0] * FRAC_PI_2).sin(),
                ]
            }
        }
    }
}

impl Problem for SyntheticProblem {
    fn name(&self) -> &str {
        &self.name
    }

    fn n_params(&self) -> usize {
        self.bounds.len()
    }

    fn n_objectives(&self) -> usize {
        self.reference.len()
    }

    fn bounds(&self) -> &BoxBounds {
        &self.bounds
    }

    fn reference_point(&self) -> &ObjectiveVector {
        &self.reference
    }

    fn evaluate(&self, theta: &ParameterVector) -> Evaluation {
        let x = self.bounds.to_unit(theta.values());
        let objectives = ObjectiveVector::new(self.objectives(&x)).unwrap();
        Evaluation::success(
            theta.clone(),
            objectives,
            SYNTHETIC_STEPS_PER_EVAL,
            SYNTHETIC_SECONDS_PER_EVAL,
        )
    }

    fn mean_steps_per_eval(&self) -> u64 {
        SYNTHETIC_STEPS_PER_EVAL
    }

    fn nominal_seconds_per_step(&self) -> f64 {
        SYNTHETIC_SECONDS_PER_EVAL / SYNTHETIC_STEPS_PER_EVAL as f64
    }
}

/// Crash region in raw decision space.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub enum CrashRegion {
    Box { lo: Vec<Scalar>, hi: Vec<Scalar> },
    Ball { center: Vec<Scalar>, radius: Scalar },
}

impl CrashRegion {
    pub fn contains(&self, theta: &[Scalar]) -> bool {
        match self {
            CrashRegion::Box { lo, hi } => theta
                .iter()
                .enumerate()
                .all(|(i, &v)| v >= lo[i] && v <= hi[i]),
            CrashRegion::Ball { center, radius } => {
                let d2: f64 = theta
                    .iter()
                    .zip(center)
                    .map(|(&v, &c)| (v - c) * (v - c))
                    .sum();
                d2 <= radius * radius
            }
        }
    }

    /// Ball of radius 1 around the all-ones corner of the unit cube; leaves
    /// the analytic fronts of ZDT1 and DTLZ2 partially reachable.
    pub fn corner_ball(n: usize) -> Self {
        CrashRegion::Ball {
            center: vec![1.0; n],
            radius: 1.0,
        }
    }
}

/// Wraps a problem so that evaluations inside `region` crash and return no
/// objective values. Crashed queries still consume the usual step count.
pub fn with_crash_region<P: Problem>(problem: P, region: CrashRegion) -> CrashWrapped<P> {
    CrashWrapped {
        name: format!("{}-crash", problem.name()),
        problem,
        region,
    }
}

#[derive(Debug, Clone)]
pub struct CrashWrapped<P> {
    problem: P,
    region: CrashRegion,
    name: String,
}

impl<P: Problem> Problem for CrashWrapped<P> {
    fn name(&self) -> &str {
        &self.name
    }

    fn n_params(&self) -> usize {
        self.problem.n_params()
    }

    fn n_objectives(&self) -> usize {
        self.problem.n_objectives()
    }

    fn bounds(&self) -> &BoxBounds {
        self.problem.bounds()
    }

    fn reference_point(&self) -> &ObjectiveVector {
        self.problem.reference_point()
    }

    fn evaluate(&self, theta: &ParameterVector) -> Evaluation {
        if self.region.contains(theta.values()) {
            let base = self.problem.evaluate(theta);
            Evaluation::crashed(theta.clone(), base.sim_steps, base.wall_time)
        } else {
            self.problem.evaluate(theta)
        }
    }

    fn mean_steps_per_eval(&self) -> u64 {
        self.problem.mean_steps_per_eval()
    }

    fn nominal_seconds_per_step(&self) -> f64 {
        self.problem.nominal_seconds_per_step()
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn theta(p: &dyn Problem, values: &[f64]) -> ParameterVector {
        ParameterVector::new(values.to_vec(), p.bounds()).unwrap()
    }

    #[test]
    fn zdt1_at_origin() {
        let p = zdt1_problem(5);
        let ev = p.evaluate(&theta(&p, &[0.0; 5]));
        let obj = ev.objectives.unwrap();
        assert!((obj.values()[0] - 0.0).abs() < 1e-15);
        assert!((obj.values()[1] - 1.0).abs() < 1e-15);
    }

    #[test]
    fn zdt1_front_points_satisfy_analytic_front() {
        let p = zdt1_problem(5);
        for k in 0..=10 {
            let x1 = k as f64 / 10.0;
            let ev = p.evaluate(&theta(&p, &[x1, 0.0, 0.0, 0.0, 0.0]));
            let obj = ev.objectives.unwrap();
            assert!((obj.values()[1] - (1.0 - x1.sqrt())).abs() < 1e-12);
        }
    }

    #[test]
    fn zdt1_affine_bounds_mapping() {
        let unit = zdt1_problem(5);
        let wide = zdt1_problem(5).with_bounds(BoxBounds::uniform(5, -3.0, 4.0).unwrap());
        // raw 2.0 on [-3, 4] maps to 5/7, not to 2.0
        let ev_unit = unit.evaluate(&theta(&unit, &[5.0 / 7.0; 5]));
        let ev_wide = wide.evaluate(&theta(&wide, &[2.0; 5]));
        assert_eq!(
            ev_unit.objectives.unwrap().values(),
            ev_wide.objectives.unwrap().values()
        );
        // the midpoint of [-3, 4] lands on the middle of the unit cube
        let mid_unit = unit.evaluate(&theta(&unit, &[0.5; 5]));
        let mid_wide = wide.evaluate(&theta(&wide, &[0.5; 5]));
        assert_eq!(
            mid_unit.objectives.unwrap().values(),
            mid_wide.objectives.unwrap().values()
        );
    }

    #[test]
    fn dtlz2_optimal_points_on_unit_sphere() {
        let p = dtlz2_problem(5);
        let ev = p.evaluate(&theta(&p, &[0.3, 0.7, 0.5, 0.5, 0.5]));
        let obj = ev.objectives.unwrap();
        let norm: f64 = obj.values().iter().map(|v| v * v).sum::<f64>().sqrt();
        assert!((norm - 1.0).abs() < 1e-12);
    }

    #[test]
    fn evaluate_is_pure() {
        let p = dtlz2_problem(5);
        let t = theta(&p, &[0.1, 0.9, 0.4, 0.6, 0.2]);
        let first = p.evaluate(&t);
        for _ in 0..1000 {
            assert_eq!(p.evaluate(&t), first);
        }
    }

    #[test]
    fn crash_wrapper_behavior() {
        let p = with_crash_region(zdt1_problem(5), CrashRegion::corner_ball(5));
        // far from the corner: identical to the base problem
        let outside = theta(&p, &[0.1, 0.1, 0.1, 0.1, 0.1]);
        let base = zdt1_problem(5);
        assert_eq!(
            p.evaluate(&outside),
            base.evaluate(&ParameterVector::new(outside.values().to_vec(), base.bounds()).unwrap())
        );
        // inside the ball: crash without objectives
        let inside = theta(&p, &[1.0, 1.0, 1.0, 1.0, 0.9]);
        let ev = p.evaluate(&inside);
        assert!(!ev.crash_ok());
        assert!(ev.objectives.is_none());
        assert_eq!(ev.sim_steps, SYNTHETIC_STEPS_PER_EVAL);
    }

    #[test]
    fn crash_region_spares_zdt1_front_preimage() {
        let p = with_crash_region(zdt1_problem(5), CrashRegion::corner_ball(5));
        for k in 0..=20 {
            let x1 = k as f64 / 20.0;
            let ev = p.evaluate(&theta(&p, &[x1, 0.0, 0.0, 0.0, 0.0]));
            assert!(ev.crash_ok());
        }
    }

    #[test]
    fn wrapped_front_matches_base_on_feasible_grid() {
        // dense 2-d instance: the feasible part of the wrapped problem is
        // pointwise identical to the base problem
        let base = zdt1_problem(2);
        let wrapped = with_crash_region(
            zdt1_problem(2),
            CrashRegion::Ball {
                center: vec![1.0, 1.0],
                radius: 0.5,
            },
        );
        for i in 0..40 {
            for j in 0..40 {
                let t = [i as f64 / 39.0, j as f64 / 39.0];
                let tb = theta(&base, &t);
                let tw = theta(&wrapped, &t);
                let ew = wrapped.evaluate(&tw);
                if ew.crash_ok() {
                    assert_eq!(
                        ew.objectives.unwrap(),
                        base.evaluate(&tb).objectives.unwrap()
                    );
                }
            }
        }
    }
}
