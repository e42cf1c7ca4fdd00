//! Square assignment problem via the Hungarian method with potentials,
//! O(n^3). Costs are plain `f64`; the algorithm only ever adds and
//! subtracts cost entries, so results agree with exact arithmetic to
//! machine precision at the sizes used here (n <= 64).

/// Returns `(assignment, total_cost)` where `assignment[row] = col`.
///
/// `cost` must be square and nonnegative.
pub fn solve_min(cost: &[Vec<f64>]) -> (Vec<usize>, f64) {
    let n = cost.len();
    if n == 0 {
        return (Vec::new(), 0.0);
    }
    debug_assert!(cost.iter().all(|row| row.len() == n));

    // 1-indexed working arrays; p[j] is the row matched to column j.
    let mut u = vec![0.0f64; n + 1];
    let mut v = vec![0.0f64; n + 1];
    let mut p = vec![0usize; n + 1];
    let mut way = vec![0usize; n + 1];

    for i in 1..=n {
        p[0] = i;
        let mut j0 = 0usize;
        let mut minv = vec![f64::INFINITY; n + 1];
        let mut used = vec![false; n + 1];
        loop {
            used[j0] = true;
            let i0 = p[j0];
            let mut delta = f64::INFINITY;
            let mut j1 = 0usize;
            for j in 1..=n {
                if used[j] {
                    continue;
                }
                let cur = cost[i0 - 1][j - 1] - u[i0] - v[j];
                if cur < minv[j] {
                    minv[j] = cur;
                    way[j] = j0;
                }
                if minv[j] < delta {
                    delta = minv[j];
                    j1 = j;
                }
            }
            for j in 0..=n {
                if used[j] {
                    u[p[j]] += delta;
                    v[j] -= delta;
                } else {
                    minv[j] -= delta;
                }
            }
            j0 = j1;
            if p[j0] == 0 {
                break;
            }
        }
        loop {
            let j1 = way[j0];
            p[j0] = p[j1];
            j0 = j1;
            if j0 == 0 {
                break;
            }
        }
    }

    let mut assignment = vec![0usize; n];
    for j in 1..=n {
        assignment[p[j] - 1] = j - 1;
    }
    let total = assignment
        .iter()
        .enumerate()
        .map(|(i, &j)| cost[i][j])
        .sum();
    (assignment, total)
}

/// Brute-force minimum over all permutations (Heap's algorithm). Test
/// oracle for small n; exposed so integration suites can reuse it.
pub fn brute_force_min(cost: &[Vec<f64>]) -> f64 {
    fn go(k: usize, perm: &mut Vec<usize>, cost: &[Vec<f64>], best: &mut f64) {
        if k == 1 {
            let total: f64 = perm.iter().enumerate().map(|(i, &j)| cost[i][j]).sum();
            if total < *best {
                *best = total;
            }
            return;
        }
        for i in 0..k {
            go(k - 1, perm, cost, best);
            if k % 2 == 0 {
                perm.swap(i, k - 1);
            } else {
                perm.swap(0, k - 1);
            }
        }
    }
    let n = cost.len();
    let mut perm: Vec<usize> = (0..n).collect();
    let mut best = f64::INFINITY;
    go(n, &mut perm, cost, &mut best);
    best
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::Rng;

    #[test]
    fn known_instance() {
        let cost = vec![
            vec![250.0, 400.0, 350.0],
            vec![400.0, 600.0, 350.0],
            vec![200.0, 400.0, 250.0],
        ];
        let (assignment, total) = solve_min(&cost);
        assert_eq!(total, 950.0);
        assert_eq!(assignment, vec![1, 2, 0]);
    }

    #[test]
    fn matches_brute_force_on_random_instances() {
        let mut rng = crate::rng::seeded(17);
        for n in 2..=7 {
            for _ in 0..30 {
                let cost: Vec<Vec<f64>> = (0..n)
                    .map(|_| (0..n).map(|_| rng.gen::<f64>()).collect())
                    .collect();
                let (_, total) = solve_min(&cost);
                let oracle = brute_force_min(&cost);
                assert!(
                    (total - oracle).abs() < 1e-12,
                    "n={n}: hungarian {total} vs brute force {oracle}"
                );
            }
        }
    }
}
