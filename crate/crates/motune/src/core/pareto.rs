use serde::{Deserialize, Serialize};

use super::types::{Dataset, ObjectiveVector};
use crate::Real;

/// True iff `a` dominates `b`: no worse in every component and strictly
/// better in at least one. Both vectors must be finite and of equal length.
pub fn dominates<T: Real>(a: &ObjectiveVector<T>, b: &ObjectiveVector<T>) -> bool {
    assert_eq!(a.len(), b.len(), "objective dimension mismatch");
    dominates_slice(a.values(), b.values())
}

/// Slice-level dominance check. Tolerates `+inf` sentinel entries, which the
/// evolutionary optimizers use internally for crashed individuals.
pub fn dominates_slice<T: Real>(a: &[T], b: &[T]) -> bool {
    debug_assert_eq!(a.len(), b.len());
    let mut strictly_better = false;
    for (&ai, &bi) in a.iter().zip(b) {
        if ai > bi {
            return false;
        }
        if ai < bi {
            strictly_better = true;
        }
    }
    strictly_better
}

/// Indices of the non-dominated points. Duplicates of a non-dominated point
/// are all retained.
pub fn pareto_filter<T: Real, P: AsRef<[T]>>(points: &[P]) -> Vec<usize> {
    let mut kept = Vec::new();
    'outer: for (i, p) in points.iter().enumerate() {
        for (j, q) in points.iter().enumerate() {
            if i != j && dominates_slice(q.as_ref(), p.as_ref()) {
                continue 'outer;
            }
        }
        kept.push(i);
    }
    kept
}

/// Non-dominated subset of the successful evaluations of a dataset.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ParetoFront<T: Real> {
    member_indices: Vec<usize>,
    objective_points: Vec<ObjectiveVector<T>>,
}

impl<T: Real> ParetoFront<T> {
    /// Indices into the originating dataset.
    pub fn member_indices(&self) -> &[usize] {
        &self.member_indices
    }

    pub fn objective_points(&self) -> &[ObjectiveVector<T>] {
        &self.objective_points
    }

    pub fn len(&self) -> usize {
        self.member_indices.len()
    }

    pub fn is_empty(&self) -> bool {
        self.member_indices.is_empty()
    }
}

/// Current Pareto front over the successful evaluations of `dataset`.
///
/// Crashed evaluations never enter the front. Returns `None` while the
/// dataset holds no successful evaluation at all.
pub fn current_front<T: Real>(dataset: &Dataset<T>) -> Option<ParetoFront<T>> {
    let successes: Vec<(usize, &ObjectiveVector<T>)> = dataset
        .successes()
        .map(|(i, e)| (i, e.objectives.as_ref().unwrap()))
        .collect();
    if successes.is_empty() {
        return None;
    }
    let points: Vec<&[T]> = successes.iter().map(|(_, o)| o.values()).collect();
    let kept = pareto_filter(&points);
    Some(ParetoFront {
        member_indices: kept.iter().map(|&k| successes[k].0).collect(),
        objective_points: kept.iter().map(|&k| successes[k].1.clone()).collect(),
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::core::{BoxBounds, Evaluation, ParameterVector};
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    fn obj(values: &[f64]) -> ObjectiveVector<f64> {
        ObjectiveVector::new(values.to_vec()).unwrap()
    }

    #[test]
    fn dominates_basic_cases() {
        assert!(dominates(&obj(&[1.0, 2.0, 3.0]), &obj(&[2.0, 3.0, 4.0])));
        assert!(!dominates(&obj(&[1.0, 2.0]), &obj(&[1.0, 2.0])));
        assert!(!dominates(&obj(&[1.0, 3.0]), &obj(&[2.0, 2.0])));
        // weak improvement in one component suffices
        assert!(dominates(&obj(&[1.0, 2.0]), &obj(&[1.0, 3.0])));
    }

    #[test]
    #[should_panic(expected = "objective dimension mismatch")]
    fn dominates_rejects_length_mismatch() {
        let _ = dominates(&obj(&[1.0, 2.0]), &obj(&[1.0, 2.0, 3.0]));
    }

    #[test]
    fn dominates_with_infinity_sentinels() {
        assert!(dominates_slice(&[1.0, 1.0], &[f64::INFINITY, f64::INFINITY]));
        assert!(!dominates_slice(
            &[f64::INFINITY, f64::INFINITY],
            &[f64::INFINITY, f64::INFINITY]
        ));
    }

    #[test]
    fn pareto_filter_examples() {
        let pts = vec![vec![1.0, 2.0], vec![2.0, 1.0], vec![2.0, 2.0]];
        assert_eq!(pareto_filter(&pts), vec![0, 1]);

        let single = vec![vec![5.0, 5.0]];
        assert_eq!(pareto_filter(&single), vec![0]);

        let empty: Vec<Vec<f64>> = Vec::new();
        assert!(pareto_filter(&empty).is_empty());
    }

    #[test]
    fn pareto_filter_keeps_duplicates_of_non_dominated() {
        let pts = vec![vec![1.0, 2.0], vec![1.0, 2.0], vec![3.0, 3.0]];
        assert_eq!(pareto_filter(&pts), vec![0, 1]);
    }

    /// All-pairs brute force oracle over the definition.
    fn brute_force_front(points: &[Vec<f64>]) -> Vec<usize> {
        (0..points.len())
            .filter(|&i| {
                !points
                    .iter()
                    .enumerate()
                    .any(|(j, q)| j != i && dominates_slice(q, &points[i]))
            })
            .collect()
    }

    #[test]
    fn pareto_filter_matches_brute_force_on_random_points() {
        let mut rng = ChaCha8Rng::seed_from_u64(7);
        for _ in 0..20 {
            let pts: Vec<Vec<f64>> = (0..20)
                .map(|_| (0..3).map(|_| rng.random_range(0.0..1.0)).collect())
                .collect();
            assert_eq!(pareto_filter(&pts), brute_force_front(&pts));
        }
    }

    fn dataset_from(objs: &[Option<Vec<f64>>]) -> Dataset<f64> {
        let b = BoxBounds::uniform(1, 0.0, 1.0).unwrap();
        // dimension 1 bounds but 2-long thetas are invalid; use n=2
        let b2 = BoxBounds::uniform(2, 0.0, 1.0).unwrap();
        let _ = b;
        Dataset::from_evaluations(
            objs.iter()
                .map(|o| {
                    let theta = ParameterVector::new(vec![0.5, 0.5], &b2).unwrap();
                    match o {
                        Some(v) => Evaluation::success(
                            theta,
                            ObjectiveVector::new(v.clone()).unwrap(),
                            1,
                            0.1,
                        ),
                        None => Evaluation::crashed(theta, 1, 0.1),
                    }
                })
                .collect(),
        )
    }

    #[test]
    fn current_front_excludes_dominated_and_crashed() {
        let ds = dataset_from(&[
            Some(vec![1.0, 2.0]),
            Some(vec![2.0, 1.0]),
            Some(vec![2.0, 2.0]),
        ]);
        let front = current_front(&ds).unwrap();
        assert_eq!(front.member_indices(), &[0, 1]);

        let ds = dataset_from(&[None, None, None, None, None, Some(vec![9.0, 9.0])]);
        let front = current_front(&ds).unwrap();
        assert_eq!(front.member_indices(), &[5]);

        assert!(current_front(&dataset_from(&[None, None])).is_none());
        assert!(current_front(&Dataset::<f64>::new()).is_none());
    }

    #[test]
    fn current_front_equals_filter_of_successes() {
        let mut rng = ChaCha8Rng::seed_from_u64(11);
        for _ in 0..10 {
            let objs: Vec<Option<Vec<f64>>> = (0..25)
                .map(|_| {
                    if rng.random_range(0.0..1.0) < 0.3 {
                        None
                    } else {
                        Some((0..2).map(|_| rng.random_range(0.0..1.0)).collect())
                    }
                })
                .collect();
            let ds = dataset_from(&objs);
            match current_front(&ds) {
                Some(front) => {
                    let succ: Vec<(usize, Vec<f64>)> = objs
                        .iter()
                        .enumerate()
                        .filter_map(|(i, o)| o.clone().map(|v| (i, v)))
                        .collect();
                    let pts: Vec<Vec<f64>> = succ.iter().map(|(_, v)| v.clone()).collect();
                    let expect: Vec<usize> =
                        pareto_filter(&pts).iter().map(|&k| succ[k].0).collect();
                    assert_eq!(front.member_indices(), expect.as_slice());
                    assert!(front
                        .member_indices()
                        .iter()
                        .all(|&i| ds[i].crash_ok()));
                }
                None => assert_eq!(ds.n_successes(), 0),
            }
        }
    }
}
