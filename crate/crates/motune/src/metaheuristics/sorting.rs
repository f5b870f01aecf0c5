use crate::core::dominates_slice;
use crate::Real;

/// Domination rank per individual: rank 0 is the non-dominated set, rank r
/// the set that becomes non-dominated once ranks below r are removed.
/// `+inf` sentinel entries (crashed individuals) sink to the last ranks.
pub fn nondominated_sort<T: Real, P: AsRef<[T]>>(points: &[P]) -> Vec<usize> {
    let n = points.len();
    let mut dominated_by: Vec<usize> = vec![0; n];
    let mut dominates_list: Vec<Vec<usize>> = vec![Vec::new(); n];
    for i in 0..n {
        for j in (i + 1)..n {
            let (a, b) = (points[i].as_ref(), points[j].as_ref());
            if dominates_slice(a, b) {
                dominates_list[i].push(j);
                dominated_by[j] += 1;
            } else if dominates_slice(b, a) {
                dominates_list[j].push(i);
                dominated_by[i] += 1;
            }
        }
    }
    let mut ranks = vec![0usize; n];
    let mut current: Vec<usize> = (0..n).filter(|&i| dominated_by[i] == 0).collect();
    let mut rank = 0;
    while !current.is_empty() {
        let mut next = Vec::new();
        for &i in &current {
            ranks[i] = rank;
            for &j in &dominates_list[i] {
                dominated_by[j] -= 1;
                if dominated_by[j] == 0 {
                    next.push(j);
                }
            }
        }
        rank += 1;
        current = next;
    }
    ranks
}

/// Crowding distance of the members of one domination rank: per objective,
/// the gap between the sorted neighbors normalized by the objective range,
/// summed over objectives. Boundary members get `+inf`; an objective with
/// zero or non-finite range contributes nothing.
pub fn crowding_distance<T: Real, P: AsRef<[T]>>(members: &[P]) -> Vec<T> {
    let n = members.len();
    assert!(n >= 1);
    let m = members[0].as_ref().len();
    let mut dist = vec![T::zero(); n];
    if n <= 2 {
        return vec![T::infinity(); n];
    }
    for obj in 0..m {
        let mut order: Vec<usize> = (0..n).collect();
        order.sort_by(|&i, &j| {
            members[i].as_ref()[obj]
                .partial_cmp(&members[j].as_ref()[obj])
                .unwrap()
        });
        let lo = members[order[0]].as_ref()[obj];
        let hi = members[order[n - 1]].as_ref()[obj];
        let range = hi - lo;
        dist[order[0]] = T::infinity();
        dist[order[n - 1]] = T::infinity();
        if !(range.is_finite() && range > T::zero()) {
            continue;
        }
        for w in 1..n - 1 {
            let gap = (members[order[w + 1]].as_ref()[obj] - members[order[w - 1]].as_ref()[obj])
                / range;
            if dist[order[w]].is_finite() {
                dist[order[w]] = dist[order[w]] + gap;
            }
        }
    }
    dist
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    #[test]
    fn chain_gets_increasing_ranks() {
        let pts = vec![vec![1.0, 1.0], vec![2.0, 2.0], vec![3.0, 3.0]];
        assert_eq!(nondominated_sort(&pts), vec![0, 1, 2]);
    }

    #[test]
    fn infinite_individual_ranks_last() {
        let pts = vec![
            vec![1.0, 2.0],
            vec![f64::INFINITY, f64::INFINITY],
            vec![2.0, 1.0],
        ];
        let ranks = nondominated_sort(&pts);
        assert_eq!(ranks[0], 0);
        assert_eq!(ranks[2], 0);
        assert!(ranks[1] > 0);
    }

    /// Iterated front peeling oracle.
    fn peeling_ranks(points: &[Vec<f64>]) -> Vec<usize> {
        let mut ranks = vec![usize::MAX; points.len()];
        let mut remaining: Vec<usize> = (0..points.len()).collect();
        let mut rank = 0;
        while !remaining.is_empty() {
            let front: Vec<usize> = remaining
                .iter()
                .copied()
                .filter(|&i| {
                    !remaining
                        .iter()
                        .any(|&j| j != i && dominates_slice(&points[j], &points[i]))
                })
                .collect();
            for &i in &front {
                ranks[i] = rank;
            }
            remaining.retain(|i| !front.contains(i));
            rank += 1;
        }
        ranks
    }

    #[test]
    fn ranks_match_peeling_oracle() {
        let mut rng = ChaCha8Rng::seed_from_u64(19);
        for _ in 0..10 {
            let pts: Vec<Vec<f64>> = (0..30)
                .map(|_| (0..2).map(|_| rng.random_range(0.0..1.0)).collect())
                .collect();
            assert_eq!(nondominated_sort(&pts), peeling_ranks(&pts));
        }
    }

    #[test]
    fn rank_zero_matches_pareto_filter_on_finite_points() {
        let mut rng = ChaCha8Rng::seed_from_u64(29);
        let pts: Vec<Vec<f64>> = (0..40)
            .map(|_| (0..3).map(|_| rng.random_range(0.0..1.0)).collect())
            .collect();
        let ranks = nondominated_sort(&pts);
        let rank0: Vec<usize> = (0..pts.len()).filter(|&i| ranks[i] == 0).collect();
        assert_eq!(rank0, crate::core::pareto_filter(&pts));
    }

    #[test]
    fn two_members_are_both_boundary() {
        let d = crowding_distance::<f64, _>(&[vec![1.0, 2.0], vec![2.0, 1.0]]);
        assert!(d.iter().all(|v| v.is_infinite()));
        let d = crowding_distance::<f64, _>(&[vec![1.0, 2.0]]);
        assert!(d[0].is_infinite());
    }

    #[test]
    fn evenly_spaced_middle_point() {
        // three points on a segment: middle normalized gap is 1 per objective
        let pts: Vec<Vec<f64>> = vec![vec![0.0, 2.0], vec![1.0, 1.0], vec![2.0, 0.0]];
        let d = crowding_distance(&pts);
        assert!(d[0].is_infinite());
        assert!(d[2].is_infinite());
        assert!((d[1] - 2.0).abs() < 1e-12);
    }

    #[test]
    fn crowding_invariant_under_permutation() {
        let pts = vec![
            vec![0.1, 0.9],
            vec![0.4, 0.5],
            vec![0.2, 0.8],
            vec![0.9, 0.1],
        ];
        let d = crowding_distance(&pts);
        let perm = [2usize, 0, 3, 1];
        let permuted: Vec<Vec<f64>> = perm.iter().map(|&i| pts[i].clone()).collect();
        let dp = crowding_distance(&permuted);
        for (k, &i) in perm.iter().enumerate() {
            assert_eq!(d[i], dp[k]);
        }
    }

    #[test]
    fn zero_range_objective_contributes_nothing() {
        let pts: Vec<Vec<f64>> = vec![vec![0.0, 5.0], vec![1.0, 5.0], vec![2.0, 5.0]];
        let d = crowding_distance(&pts);
        assert!((d[1] - 1.0).abs() < 1e-12);
    }

    #[test]
    fn all_infinite_rank_is_handled() {
        let pts = vec![
            vec![f64::INFINITY, f64::INFINITY],
            vec![f64::INFINITY, f64::INFINITY],
            vec![f64::INFINITY, f64::INFINITY],
        ];
        let d = crowding_distance(&pts);
        assert_eq!(d.len(), 3);
        assert!(d.iter().all(|v| !v.is_nan()));
    }
}
