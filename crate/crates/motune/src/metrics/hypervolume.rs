use rand::Rng;

use crate::core::{pareto_filter, ObjectiveVector};
use crate::{cast, Real};

/// Exact hypervolume of `points` with respect to `reference`: the Lebesgue
/// measure of the union of the boxes `[p, reference]` over all points that
/// strictly dominate the reference. Points outside that region contribute
/// nothing. Supports two to four objectives.
pub fn hypervolume<T: Real>(points: &[ObjectiveVector<T>], reference: &ObjectiveVector<T>) -> T {
    let m = reference.len();
    assert!((2..=4).contains(&m), "hypervolume supports M in 2..=4");
    let pts: Vec<&[T]> = points.iter().map(|p| p.values()).collect();
    hv_dispatch(&pts, reference.values())
}

fn hv_dispatch<T: Real>(points: &[&[T]], reference: &[T]) -> T {
    let clipped = clip_and_filter(points, reference);
    if clipped.is_empty() {
        return T::zero();
    }
    if reference.len() == 2 {
        sweep_2d(&clipped, reference)
    } else {
        slice_recursive(&clipped, reference)
    }
}

/// 2-objective hypervolume by a plane sweep. Exposed separately because it is
/// the independent counterpart of the recursive slicing routine.
pub fn hv_sweep_2d<T: Real>(points: &[ObjectiveVector<T>], reference: &ObjectiveVector<T>) -> T {
    assert_eq!(reference.len(), 2);
    let pts: Vec<&[T]> = points.iter().map(|p| p.values()).collect();
    let clipped = clip_and_filter(&pts, reference.values());
    if clipped.is_empty() {
        return T::zero();
    }
    sweep_2d(&clipped, reference.values())
}

/// Hypervolume by recursive slicing along the last objective; works for any
/// M >= 2 and is cross-checked against the sweep for M = 2.
pub fn hv_slicing<T: Real>(points: &[ObjectiveVector<T>], reference: &ObjectiveVector<T>) -> T {
    assert!(reference.len() >= 2);
    let pts: Vec<&[T]> = points.iter().map(|p| p.values()).collect();
    let clipped = clip_and_filter(&pts, reference.values());
    if clipped.is_empty() {
        return T::zero();
    }
    slice_recursive(&clipped, reference.values())
}

/// Keeps the points strictly below the reference in every component and
/// removes dominated duplicates. The survivors are owned rows.
fn clip_and_filter<T: Real>(points: &[&[T]], reference: &[T]) -> Vec<Vec<T>> {
    let inside: Vec<Vec<T>> = points
        .iter()
        .filter(|p| {
            p.len() == reference.len() && p.iter().zip(reference).all(|(&pi, &ri)| pi < ri)
        })
        .map(|p| p.to_vec())
        .collect();
    let kept = pareto_filter(&inside);
    kept.into_iter().map(|i| inside[i].clone()).collect()
}

/// `points` are mutually non-dominated and strictly inside the reference box.
fn sweep_2d<T: Real>(points: &[Vec<T>], reference: &[T]) -> T {
    let mut sorted = points.to_vec();
    sorted.sort_by(|a, b| a[0].partial_cmp(&b[0]).unwrap());
    let mut total = T::zero();
    let mut prev_f2 = reference[1];
    for p in &sorted {
        // non-dominated + sorted ascending in f1 => f2 strictly descends,
        // except for exact duplicates which add nothing
        let width = reference[0] - p[0];
        let height = prev_f2 - p[1];
        if height > T::zero() {
            total = total + width * height;
            prev_f2 = p[1];
        }
    }
    total
}

fn slice_recursive<T: Real>(points: &[Vec<T>], reference: &[T]) -> T {
    let m = reference.len();
    if m == 1 {
        let best = points
            .iter()
            .map(|p| p[0])
            .fold(reference[0], |acc, v| acc.min(v));
        return reference[0] - best;
    }
    // slice along the last objective
    let mut order: Vec<usize> = (0..points.len()).collect();
    order.sort_by(|&i, &j| points[i][m - 1].partial_cmp(&points[j][m - 1]).unwrap());

    let mut total = T::zero();
    let mut active: Vec<Vec<T>> = Vec::with_capacity(points.len());
    for (rank, &i) in order.iter().enumerate() {
        let z_lo = points[i][m - 1];
        let z_hi = if rank + 1 < order.len() {
            points[order[rank + 1]][m - 1]
        } else {
            reference[m - 1]
        };
        active.push(points[i][..m - 1].to_vec());
        let depth = z_hi - z_lo;
        if depth > T::zero() {
            let kept = pareto_filter(&active);
            let front: Vec<Vec<T>> = kept.into_iter().map(|k| active[k].clone()).collect();
            total = total + depth * slice_area(&front, &reference[..m - 1]);
        }
    }
    total
}

fn slice_area<T: Real>(points: &[Vec<T>], reference: &[T]) -> T {
    if reference.len() == 2 {
        sweep_2d(points, reference)
    } else {
        slice_recursive(points, reference)
    }
}

/// Monte-Carlo hypervolume estimate with its binomial standard error:
/// uniform samples in the box spanned by the componentwise minimum of the
/// contributing points and the reference.
pub fn hypervolume_mc<T: Real, R: Rng>(
    points: &[ObjectiveVector<T>],
    reference: &ObjectiveVector<T>,
    n_samples: usize,
    rng: &mut R,
) -> (T, T) {
    assert!(n_samples >= 1);
    let m = reference.len();
    let pts: Vec<&[T]> = points.iter().map(|p| p.values()).collect();
    let inside: Vec<Vec<T>> = pts
        .iter()
        .filter(|p| p.iter().zip(reference.values()).all(|(&pi, &ri)| pi < ri))
        .map(|p| p.to_vec())
        .collect();
    if inside.is_empty() {
        return (T::zero(), T::zero());
    }
    let mut lo = inside[0].clone();
    for p in &inside {
        for d in 0..m {
            lo[d] = lo[d].min(p[d]);
        }
    }
    let mut box_vol = T::one();
    for d in 0..m {
        box_vol = box_vol * (reference.values()[d] - lo[d]);
    }
    if box_vol <= T::zero() {
        return (T::zero(), T::zero());
    }

    let mut hits: u64 = 0;
    let mut sample = vec![T::zero(); m];
    for _ in 0..n_samples {
        for d in 0..m {
            let u: f64 = rng.random_range(0.0..1.0);
            sample[d] = lo[d] + cast::<T>(u) * (reference.values()[d] - lo[d]);
        }
        if inside
            .iter()
            .any(|p| p.iter().zip(&sample).all(|(&pi, &si)| pi <= si))
        {
            hits += 1;
        }
    }
    let n = cast::<T>(n_samples as f64);
    let frac = cast::<T>(hits as f64) / n;
    let estimate = frac * box_vol;
    let std_error = box_vol * (frac * (T::one() - frac) / n).sqrt();
    (estimate, std_error)
}

/// Exact hypervolume improvement of adding `candidate` to `others`: the
/// volume dominated by the candidate alone, minus the part already covered.
/// Equivalent to `hv(others + candidate) - hv(others)` but computed on the
/// usually small set of overlapping neighbors.
pub fn hv_contribution<T: Real>(candidate: &[T], others: &[&[T]], reference: &[T]) -> T {
    let m = reference.len();
    debug_assert_eq!(candidate.len(), m);
    let mut own = T::one();
    for d in 0..m {
        let side = reference[d] - candidate[d];
        if side <= T::zero() {
            return T::zero();
        }
        own = own * side;
    }
    // overlap of every neighbor with the candidate's box
    let limited: Vec<Vec<T>> = others
        .iter()
        .filter_map(|p| {
            let q: Vec<T> = (0..m).map(|d| p[d].max(candidate[d])).collect();
            if q.iter().zip(reference).all(|(&qi, &ri)| qi < ri) {
                Some(q)
            } else {
                None
            }
        })
        .collect();
    if limited.is_empty() {
        return own;
    }
    let kept = pareto_filter(&limited);
    let front: Vec<Vec<T>> = kept.into_iter().map(|k| limited[k].clone()).collect();
    let covered = if m == 1 {
        let best = front.iter().map(|p| p[0]).fold(reference[0], T::min);
        reference[0] - best
    } else {
        slice_area(&front, reference)
    };
    own - covered
}
