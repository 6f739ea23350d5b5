//! Minimum-cost assignment (Hungarian algorithm) for matching tracks to
//! detections.
//!
//! The solver runs the O(n^3) potential-based variant on a rectangular cost
//! matrix and returns a full assignment of the smaller side. Callers encode
//! forbidden pairs with a large finite sentinel and drop sentinel pairs from
//! the result afterwards; as long as the sentinel exceeds the sum of all real
//! costs, the solver first maximizes the number of real pairs and then
//! minimizes their total cost.

use nalgebra::DMatrix;

/// Sentinel cost for pairs that must not be matched. Keep real costs far
/// below this value (the tracker's gated costs are bounded by the gating
/// thresholds, orders of magnitude smaller).
pub const FORBIDDEN_COST: f64 = 1e7;

/// Solves min-cost assignment on an arbitrary rectangular matrix.
///
/// Returns `min(nrows, ncols)` pairs `(row, col)` minimizing the total cost,
/// sorted by row. All entries must be finite.
pub fn solve_assignment(cost: &DMatrix<f64>) -> Vec<(usize, usize)> {
    let (rows, cols) = cost.shape();
    if rows == 0 || cols == 0 {
        return Vec::new();
    }
    debug_assert!(cost.iter().all(|c| c.is_finite()), "costs must be finite");

    let mut pairs = if rows <= cols {
        hungarian(rows, cols, |i, j| cost[(i, j)])
    } else {
        hungarian(cols, rows, |i, j| cost[(j, i)])
            .into_iter()
            .map(|(j, i)| (i, j))
            .collect()
    };
    pairs.sort_unstable();
    pairs
}

/// Total cost of a pair list against a matrix; convenience for tests and
/// telemetry.
pub fn assignment_cost(cost: &DMatrix<f64>, pairs: &[(usize, usize)]) -> f64 {
    pairs.iter().map(|&(i, j)| cost[(i, j)]).sum()
}

/// Potential-based Hungarian algorithm for `n` rows and `m` columns with
/// `n <= m`; every row ends up assigned.
fn hungarian(n: usize, m: usize, cost: impl Fn(usize, usize) -> f64) -> Vec<(usize, usize)> {
    // 1-indexed arrays; column 0 is the virtual source.
    let mut row_potential = vec![0.0_f64; n + 1];
    let mut col_potential = vec![0.0_f64; m + 1];
    let mut matched_row = vec![0_usize; m + 1]; // row matched to each column
    let mut path = vec![0_usize; m + 1];

    for row in 1..=n {
        matched_row[0] = row;
        let mut j0 = 0_usize;
        let mut min_slack = vec![f64::INFINITY; m + 1];
        let mut visited = vec![false; m + 1];

        // grow an augmenting path from `row` along tight edges
        loop {
            visited[j0] = true;
            let i0 = matched_row[j0];
            let mut delta = f64::INFINITY;
            let mut j1 = 0_usize;
            for j in 1..=m {
                if visited[j] {
                    continue;
                }
                let reduced = cost(i0 - 1, j - 1) - row_potential[i0] - col_potential[j];
                if reduced < min_slack[j] {
                    min_slack[j] = reduced;
                    path[j] = j0;
                }
                if min_slack[j] < delta {
                    delta = min_slack[j];
                    j1 = j;
                }
            }
            for j in 0..=m {
                if visited[j] {
                    row_potential[matched_row[j]] += delta;
                    col_potential[j] -= delta;
                } else {
                    min_slack[j] -= delta;
                }
            }
            j0 = j1;
            if matched_row[j0] == 0 {
                break;
            }
        }

        // flip matched edges along the path
        loop {
            let j1 = path[j0];
            matched_row[j0] = matched_row[j1];
            j0 = j1;
            if j0 == 0 {
                break;
            }
        }
    }

    (1..=m)
        .filter(|&j| matched_row[j] != 0)
        .map(|j| (matched_row[j] - 1, j - 1))
        .collect()
}
