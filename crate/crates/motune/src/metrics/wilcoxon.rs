use serde::{Deserialize, Serialize};

use crate::{cast, Real};

/// Which sample the one-sided alternative claims to be stochastically
/// smaller.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum TestDirection {
    FirstSmaller,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct StatTestResult<T> {
    pub p_value: T,
    pub significant: bool,
    pub direction: TestDirection,
}

/// One-sided Wilcoxon rank-sum test of H1: `a` is stochastically smaller
/// than `b`, at significance level `alpha`.
///
/// Ties receive midranks. Without ties and with at most 20 observations in
/// total the p-value comes from the exact null distribution of the rank sum;
/// otherwise a normal approximation with tie and continuity correction is
/// used. Two completely identical samples yield p = 1.
pub fn wilcoxon_one_sided<T: Real>(a: &[T], b: &[T], alpha: T) -> StatTestResult<T> {
    assert!(!a.is_empty() && !b.is_empty(), "samples must be non-empty");
    let na = a.len();
    let nb = b.len();
    let n = na + nb;

    // midranks of the combined sample
    let mut combined: Vec<(T, bool)> = a
        .iter()
        .map(|&v| (v, true))
        .chain(b.iter().map(|&v| (v, false)))
        .collect();
    assert!(
        combined.iter().all(|(v, _)| v.is_finite()),
        "samples must be finite"
    );
    combined.sort_by(|x, y| x.0.partial_cmp(&y.0).unwrap());

    let mut ranks = vec![T::zero(); n];
    let mut tie_sizes: Vec<usize> = Vec::new();
    let mut i = 0;
    while i < n {
        let mut j = i;
        while j + 1 < n && combined[j + 1].0 == combined[i].0 {
            j += 1;
        }
        let midrank = cast::<T>((i + j + 2) as f64 / 2.0);
        for r in ranks.iter_mut().take(j + 1).skip(i) {
            *r = midrank;
        }
        if j > i {
            tie_sizes.push(j - i + 1);
        }
        i = j + 1;
    }
    let w: T = combined
        .iter()
        .zip(&ranks)
        .filter(|((_, is_a), _)| *is_a)
        .map(|(_, &r)| r)
        .sum();

    let p_value = if tie_sizes.is_empty() && n <= 20 {
        exact_lower_tail_p(na, n, w.to_f64().unwrap().round() as u64)
    } else {
        normal_lower_tail_p(na, nb, &tie_sizes, w)
    };
    let p_value = p_value.min(T::one()).max(T::zero());
    StatTestResult {
        p_value,
        significant: p_value < alpha,
        direction: TestDirection::FirstSmaller,
    }
}

/// P(W <= w) under the exact null: W is the rank sum of a random
/// `na`-subset of the untied ranks 1..=n.
fn exact_lower_tail_p<T: Real>(na: usize, n: usize, w: u64) -> T {
    // counts[k][s]: number of k-subsets of the ranks seen so far with sum s
    let max_sum = n * (n + 1) / 2;
    let mut counts = vec![vec![0u64; max_sum + 1]; na + 1];
    counts[0][0] = 1;
    for rank in 1..=n {
        for k in (1..=na.min(rank)).rev() {
            for s in (rank..=max_sum).rev() {
                counts[k][s] += counts[k - 1][s - rank];
            }
        }
    }
    let total: u64 = counts[na].iter().sum();
    let favorable: u64 = counts[na]
        .iter()
        .take((w as usize).min(max_sum) + 1)
        .sum();
    cast::<T>(favorable as f64 / total as f64)
}

fn normal_lower_tail_p<T: Real>(na: usize, nb: usize, tie_sizes: &[usize], w: T) -> T {
    let naf = cast::<T>(na as f64);
    let nbf = cast::<T>(nb as f64);
    let nf = naf + nbf;
    let mean = naf * (nf + T::one()) / cast::<T>(2.0);
    let tie_term: T = tie_sizes
        .iter()
        .map(|&t| {
            let tf = cast::<T>(t as f64);
            tf * tf * tf - tf
        })
        .sum();
    let var = naf * nbf * (nf + T::one()) / cast::<T>(12.0)
        - naf * nbf * tie_term / (cast::<T>(12.0) * nf * (nf - T::one()));
    if var <= T::zero() {
        // every observation identical: no evidence in either direction
        return T::one();
    }
    let z = (w - mean + cast::<T>(0.5)) / var.sqrt();
    normal_cdf(z)
}

/// Standard normal CDF via a Chebyshev fit of the complementary error
/// function (fractional error below 1.2e-7).
pub fn normal_cdf<T: Real>(z: T) -> T {
    let half = cast::<T>(0.5);
    half * erfc(-z / cast::<T>(std::f64::consts::SQRT_2))
}

fn erfc<T: Real>(x: T) -> T {
    let z = x.abs();
    let t = T::one() / (T::one() + cast::<T>(0.5) * z);
    let poly = cast::<T>(-1.26551223)
        + t * (cast::<T>(1.00002368)
            + t * (cast::<T>(0.37409196)
                + t * (cast::<T>(0.09678418)
                    + t * (cast::<T>(-0.18628806)
                        + t * (cast::<T>(0.27886807)
                            + t * (cast::<T>(-1.13520398)
                                + t * (cast::<T>(1.48851587)
                                    + t * (cast::<T>(-0.82215223)
                                        + t * cast::<T>(0.17087277)))))))));
    let ans = t * (-z * z + poly).exp();
    if x >= T::zero() {
        ans
    } else {
        cast::<T>(2.0) - ans
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    #[test]
    fn identical_samples_not_significant() {
        let a = [1.0, 2.0, 3.0, 4.0];
        let r = wilcoxon_one_sided(&a, &a, 0.05);
        assert!(!r.significant);
        assert!(r.p_value > 0.4);
    }

    #[test]
    fn constant_samples_give_p_one() {
        let a = [2.0; 6];
        let b = [2.0; 6];
        let r = wilcoxon_one_sided(&a, &b, 0.05);
        assert_eq!(r.p_value, 1.0);
        assert!(!r.significant);
    }

    #[test]
    fn fully_separated_samples_significant() {
        let a: Vec<f64> = (1..=10).map(|v| v as f64).collect();
        let b: Vec<f64> = (11..=20).map(|v| v as f64).collect();
        let r = wilcoxon_one_sided(&a, &b, 0.05);
        assert!(r.significant);
        // W = 55 is the minimum possible rank sum: p = 1 / C(20, 10)
        let expect = 1.0 / 184_756.0;
        assert!((r.p_value - expect).abs() < 1e-12, "p = {}", r.p_value);
        // and the reversed direction is nowhere near significant
        let rev = wilcoxon_one_sided(&b, &a, 0.05);
        assert!(!rev.significant);
        assert!(rev.p_value > 0.99);
    }

    /// Brute-force permutation oracle: enumerate all na-subsets of the
    /// combined sample positions and count rank sums at or below the
    /// observed one.
    fn permutation_p(a: &[f64], b: &[f64]) -> f64 {
        let n = a.len() + b.len();
        let na = a.len();
        let mut values: Vec<f64> = a.iter().chain(b.iter()).copied().collect();
        let mut order: Vec<usize> = (0..n).collect();
        order.sort_by(|&i, &j| values[i].partial_cmp(&values[j]).unwrap());
        let mut ranks = vec![0.0; n];
        for (pos, &idx) in order.iter().enumerate() {
            ranks[idx] = (pos + 1) as f64;
        }
        values.sort_by(|x, y| x.partial_cmp(y).unwrap());
        let observed: f64 = ranks[..na].iter().sum();

        // iterate over all bitmasks with na bits set
        let mut favorable = 0u64;
        let mut total = 0u64;
        let all_ranks: Vec<f64> = (1..=n).map(|r| r as f64).collect();
        let mut indices: Vec<usize> = (0..na).collect();
        loop {
            let sum: f64 = indices.iter().map(|&i| all_ranks[i]).sum();
            total += 1;
            if sum <= observed + 1e-9 {
                favorable += 1;
            }
            // next combination
            let mut i = na;
            loop {
                if i == 0 {
                    return favorable as f64 / total as f64;
                }
                i -= 1;
                if indices[i] != i + n - na {
                    indices[i] += 1;
                    for j in i + 1..na {
                        indices[j] = indices[j - 1] + 1;
                    }
                    break;
                }
            }
        }
    }

    #[test]
    fn exact_p_matches_permutation_enumeration() {
        let mut rng = ChaCha8Rng::seed_from_u64(13);
        for _ in 0..20 {
            let na = rng.random_range(3..=8);
            let nb = rng.random_range(3..=(20 - na).min(10));
            let a: Vec<f64> = (0..na).map(|_| rng.random_range(0.0..1.0)).collect();
            let b: Vec<f64> = (0..nb).map(|_| rng.random_range(0.0..1.0)).collect();
            let r = wilcoxon_one_sided(&a, &b, 0.05);
            let oracle = permutation_p(&a, &b);
            assert!(
                (r.p_value - oracle).abs() < 1e-9,
                "p {} vs oracle {}",
                r.p_value,
                oracle
            );
        }
    }

    #[test]
    fn ties_fall_back_to_corrected_normal_approximation() {
        let a = [1.0, 2.0, 2.0, 3.0, 5.0, 6.0, 7.0, 1.5, 2.5, 0.5, 4.5];
        let b = [2.0, 4.0, 4.0, 5.0, 8.0, 9.0, 10.0, 3.5, 6.5, 7.5, 8.5];
        let r = wilcoxon_one_sided(&a, &b, 0.05);
        assert!(r.p_value > 0.0 && r.p_value < 1.0);
        assert!(r.significant, "clearly shifted samples, p = {}", r.p_value);
    }

    #[test]
    fn normal_cdf_reference_values() {
        assert!((normal_cdf(0.0_f64) - 0.5).abs() < 1e-7);
        assert!((normal_cdf(1.959964_f64) - 0.975).abs() < 1e-6);
        assert!((normal_cdf(-1.644854_f64) - 0.05).abs() < 1e-6);
    }
}
