use crate::error::{Error, Result};
use crate::linalg::C64;

/// Minimum-cost perfect matching on a square cost matrix (row-major,
/// `n*n` entries). Returns `assign` with row `i` matched to column
/// `assign[i]`, and the total cost.
///
/// Shortest augmenting paths with row and column potentials, O(n³).
pub fn min_cost_assignment(cost: &[f64], n: usize) -> (Vec<usize>, f64) {
    assert_eq!(cost.len(), n * n, "cost matrix must be n×n");
    if n == 0 {
        return (Vec::new(), 0.0);
    }
    // 1-based columns; column 0 is the virtual source
    let mut u = vec![0.0; n + 1];
    let mut v = vec![0.0; n + 1];
    let mut owner = vec![0usize; n + 1];
    let mut way = vec![0usize; n + 1];
    for row in 1..=n {
        owner[0] = row;
        let mut j0 = 0;
        let mut minv = vec![f64::INFINITY; n + 1];
        let mut used = vec![false; n + 1];
        loop {
            used[j0] = true;
            let i0 = owner[j0];
            let mut delta = f64::INFINITY;
            let mut j1 = 0;
            for j in 1..=n {
                if used[j] {
                    continue;
                }
                let reduced = cost[(i0 - 1) * n + (j - 1)] - u[i0] - v[j];
                if reduced < minv[j] {
                    minv[j] = reduced;
                    way[j] = j0;
                }
                if minv[j] < delta {
                    delta = minv[j];
                    j1 = j;
                }
            }
            for j in 0..=n {
                if used[j] {
                    u[owner[j]] += delta;
                    v[j] -= delta;
                } else {
                    minv[j] -= delta;
                }
            }
            j0 = j1;
            if owner[j0] == 0 {
                break;
            }
        }
        loop {
            let j1 = way[j0];
            owner[j0] = owner[j1];
            j0 = j1;
            if j0 == 0 {
                break;
            }
        }
    }
    let mut assign = vec![0; n];
    for j in 1..=n {
        assign[owner[j] - 1] = j - 1;
    }
    let total = assign.iter().enumerate().map(|(i, &j)| cost[i * n + j]).sum();
    (assign, total)
}

/// Sum of |a_i − b_π(i)| under the optimal pairing π.
pub fn eigenset_distance(a: &[C64], b: &[C64]) -> Result<f64> {
    if a.len() != b.len() {
        return Err(Error::DimensionMismatch(format!(
            "eigenvalue sets of size {} and {}",
            a.len(),
            b.len()
        )));
    }
    let n = a.len();
    let mut cost = Vec::with_capacity(n * n);
    for x in a {
        for y in b {
            cost.push((x - y).norm());
        }
    }
    Ok(min_cost_assignment(&cost, n).1)
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn brute_force(a: &[C64], b: &[C64]) -> f64 {
        fn go(a: &[C64], b: &[C64], used: &mut Vec<bool>, i: usize, acc: f64, best: &mut f64) {
            if i == a.len() {
                *best = best.min(acc);
                return;
            }
            for j in 0..b.len() {
                if !used[j] {
                    used[j] = true;
                    go(a, b, used, i + 1, acc + (a[i] - b[j]).norm(), best);
                    used[j] = false;
                }
            }
        }
        let mut best = f64::INFINITY;
        go(a, b, &mut vec![false; b.len()], 0, 0.0, &mut best);
        if a.is_empty() {
            0.0
        } else {
            best
        }
    }

    fn points(n: usize) -> impl Strategy<Value = Vec<C64>> {
        prop::collection::vec((-20.0..5.0f64, -10.0..10.0f64), n).prop_map(|v| v.into_iter().map(|(re, im)| C64::new(re, im)).collect())
    }

    fn sets() -> impl Strategy<Value = (Vec<C64>, Vec<C64>)> {
        (0usize..=8).prop_flat_map(|n| (points(n), points(n)))
    }

    #[test]
    fn small_cases() {
        let a = [C64::new(-1.0, 0.0)];
        let b = [C64::new(-2.0, 0.0)];
        assert_eq!(eigenset_distance(&a, &b).unwrap(), 1.0);
        let s = [C64::new(-1.0, 2.0), C64::new(-1.0, -2.0), C64::new(-3.0, 0.0)];
        let mut shuffled = s;
        shuffled.reverse();
        assert_eq!(eigenset_distance(&s, &shuffled).unwrap(), 0.0);
        assert!(eigenset_distance(&a, &s).is_err());
        assert_eq!(eigenset_distance(&[], &[]).unwrap(), 0.0);
    }

    #[test]
    fn assignment_picks_off_diagonal() {
        let cost = [4.0, 1.0, 3.0, 2.0, 0.0, 5.0, 3.0, 2.0, 2.0];
        let (assign, total) = min_cost_assignment(&cost, 3);
        assert_eq!(total, 5.0);
        assert_eq!(assign, vec![1, 0, 2]);
    }

    proptest! {
        #[test]
        fn matches_permutation_brute_force((a, b) in sets()) {
            let fast = eigenset_distance(&a, &b).unwrap();
            let slow = brute_force(&a, &b);
            prop_assert!((fast - slow).abs() <= 1e-9 * (1.0 + slow), "{fast} vs {slow}");
        }

        #[test]
        fn metric_axioms((a, b) in sets(), seed in 0u64..1000) {
            let n = a.len();
            let c: Vec<C64> = (0..n).map(|i| C64::new(((seed + i as u64 * 7) % 13) as f64 - 6.0, (i as f64).sin())).collect();
            let ab = eigenset_distance(&a, &b).unwrap();
            prop_assert!((ab - eigenset_distance(&b, &a).unwrap()).abs() <= 1e-9 * (1.0 + ab));
            prop_assert_eq!(eigenset_distance(&a, &a).unwrap(), 0.0);
            let via = eigenset_distance(&a, &c).unwrap() + eigenset_distance(&c, &b).unwrap();
            prop_assert!(ab <= via + 1e-9 * (1.0 + via));
        }

        #[test]
        fn zero_only_for_equal_multisets(a in points(6), k in 0usize..6, shift in 1e-6..1.0f64) {
            let mut b = a.clone();
            b.rotate_left(k);
            prop_assert_eq!(eigenset_distance(&a, &b).unwrap(), 0.0);
            b[0].re += shift;
            prop_assert!(eigenset_distance(&a, &b).unwrap() > 0.0);
        }
    }
}
