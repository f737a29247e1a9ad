//! Dense minimum-cost assignment on square float matrices.
//!
//! This is the standard O(n^3) shortest-augmenting-path formulation over
//! dual potentials `u`/`v`. It is fully deterministic: columns are scanned
//! in ascending index order, so cost ties resolve the same way on every
//! run, which the alternating Eve optimization relies on for reproducible
//! restarts.

/// Returns `assign` with `assign[row] = col` minimizing
/// `sum_r costs[r][assign[r]]`. `costs` must be square and finite.
pub(crate) fn solve_min_assignment(costs: &[Vec<f64>]) -> Vec<usize> {
    let n = costs.len();
    debug_assert!(costs.iter().all(|row| row.len() == n));
    if n == 0 {
        return Vec::new();
    }
    // 1-based arrays; p[col] = row matched to col, p[0] = current row.
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
                let cur = costs[i0 - 1][j - 1] - u[i0] - v[j];
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
    let mut assign = vec![0usize; n];
    for j in 1..=n {
        if p[j] > 0 {
            assign[p[j] - 1] = j - 1;
        }
    }
    assign
}

#[cfg(test)]
mod tests {
    use super::*;

    fn total(costs: &[Vec<f64>], assign: &[usize]) -> f64 {
        assign.iter().enumerate().map(|(r, &c)| costs[r][c]).sum()
    }

    #[test]
    fn solves_small_instances_exactly() {
        let costs = vec![
            vec![4.0, 1.0, 3.0],
            vec![2.0, 0.0, 5.0],
            vec![3.0, 2.0, 2.0],
        ];
        let assign = solve_min_assignment(&costs);
        assert_eq!(total(&costs, &assign), 5.0);
    }

    #[test]
    fn matches_brute_force_on_random_matrices() {
        use itertools::Itertools;
        // deterministic pseudo-random costs via a simple LCG
        let mut state = 0x2545f4914f6cdd1du64;
        let mut next = move || {
            state = state.wrapping_mul(6364136223846793005).wrapping_add(1442695040888963407);
            (state >> 11) as f64 / (1u64 << 53) as f64
        };
        for n in 1..=5usize {
            for _ in 0..20 {
                let costs: Vec<Vec<f64>> =
                    (0..n).map(|_| (0..n).map(|_| next()).collect()).collect();
                let assign = solve_min_assignment(&costs);
                let best = (0..n)
                    .permutations(n)
                    .map(|perm| {
                        perm.iter()
                            .enumerate()
                            .map(|(r, &c)| costs[r][c])
                            .sum::<f64>()
                    })
                    .fold(f64::INFINITY, f64::min);
                assert!(
                    (total(&costs, &assign) - best).abs() < 1e-9,
                    "n={}: {} vs {}",
                    n,
                    total(&costs, &assign),
                    best
                );
            }
        }
    }

    #[test]
    fn handles_ties_deterministically() {
        let costs = vec![vec![1.0, 1.0], vec![1.0, 1.0]];
        assert_eq!(solve_min_assignment(&costs), solve_min_assignment(&costs));
    }
}
