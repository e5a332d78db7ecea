//! Exact O(n³) linear assignment via the Hungarian method with potentials.

use ndarray::Array2;

use crate::error::{Error, Result};
use crate::qap::Permutation;

/// Minimum-cost perfect assignment. Returns (total cost, row → column map).
/// Deterministic: ties resolve by column scan order.
fn min_assignment(cost: &Array2<f64>) -> Result<(f64, Vec<usize>)> {
    let n = cost.nrows();
    if cost.ncols() != n || n == 0 {
        return Err(Error::Dimension(format!(
            "assignment needs a nonempty square matrix, got {}x{}",
            n,
            cost.ncols()
        )));
    }
    if cost.iter().any(|v| !v.is_finite()) {
        return Err(Error::Numerical("assignment scores must be finite".into()));
    }
    // 1-based arrays; p[j] is the row matched to column j, 0 when free
    let inf = f64::INFINITY;
    let mut u = vec![0.0; n + 1];
    let mut v = vec![0.0; n + 1];
    let mut p = vec![0usize; n + 1];
    let mut way = vec![0usize; n + 1];
    for i in 1..=n {
        p[0] = i;
        let mut j0 = 0usize;
        let mut minv = vec![inf; n + 1];
        let mut used = vec![false; n + 1];
        loop {
            used[j0] = true;
            let i0 = p[j0];
            let mut delta = inf;
            let mut j1 = 0usize;
            for j in 1..=n {
                if !used[j] {
                    let cur = cost[[i0 - 1, j - 1]] - u[i0] - v[j];
                    if cur < minv[j] {
                        minv[j] = cur;
                        way[j] = j0;
                    }
                    if minv[j] < delta {
                        delta = minv[j];
                        j1 = j;
                    }
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
    let mut image = vec![0usize; n];
    let mut total = 0.0;
    for j in 1..=n {
        image[p[j] - 1] = j - 1;
        total += cost[[p[j] - 1, j - 1]];
    }
    Ok((total, image))
}

/// Maximum-score perfect assignment: argmax over permutations p of
/// Σᵢ score[i][p(i)].
pub fn max_assignment(score: &Array2<f64>) -> Result<(f64, Permutation)> {
    let negated = score.mapv(|v| -v);
    let (neg_total, image) = min_assignment(&negated)?;
    Ok((-neg_total, Permutation::from_image(image)?))
}
