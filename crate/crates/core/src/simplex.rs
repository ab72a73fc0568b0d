//! Dense tableau simplex for matrix games.

use crate::error::{invalid, Result};

pub const MAX_ACTIONS: usize = 50;
const PIVOT_TOL: f64 = 1e-12;

#[derive(Clone, Debug, PartialEq)]
pub struct GameSolution {
    pub value: f64,
    /// Mixed strategy of the maximizing row player.
    pub row: Vec<f64>,
    /// Mixed strategy of the minimizing column player.
    pub col: Vec<f64>,
}

/// Value and optimal strategies of the zero-sum game where the row player
/// receives `payoff[i][j]`.
pub fn solve(payoff: &[Vec<f64>]) -> Result<GameSolution> {
    let m = payoff.len();
    let n = payoff.first().map(Vec::len).unwrap_or(0);
    if m == 0 || n == 0 || payoff.iter().any(|r| r.len() != n) {
        return Err(invalid("payoff matrix must be nonempty and rectangular"));
    }
    if m > MAX_ACTIONS || n > MAX_ACTIONS {
        return Err(invalid(format!(
            "matrix games are limited to {MAX_ACTIONS}×{MAX_ACTIONS}"
        )));
    }
    if payoff.iter().flatten().any(|v| !v.is_finite()) {
        return Err(invalid("payoff entries must be finite"));
    }
    if let Some(s) = pure_saddle(payoff) {
        return Ok(s);
    }

    // Shift entries to be positive, then solve max Σy s.t. A'y ≤ 1, y ≥ 0.
    let min = payoff
        .iter()
        .flatten()
        .copied()
        .fold(f64::INFINITY, f64::min);
    let shift = 1.0 - min;
    let width = n + m + 1;
    let mut t = vec![vec![0.0; width]; m + 1];
    for i in 0..m {
        for j in 0..n {
            t[i][j] = payoff[i][j] + shift;
        }
        t[i][n + i] = 1.0;
        t[i][width - 1] = 1.0;
    }
    for j in 0..n {
        t[m][j] = -1.0;
    }
    let mut basis: Vec<usize> = (n..n + m).collect();

    // Bland's rule: lowest-index improving column.
    while let Some(col) = (0..n + m).find(|&j| t[m][j] < -PIVOT_TOL) {
        let mut pivot: Option<(usize, f64)> = None;
        for i in 0..m {
            if t[i][col] > PIVOT_TOL {
                let ratio = t[i][width - 1] / t[i][col];
                pivot = match pivot {
                    None => Some((i, ratio)),
                    Some((r, best)) => {
                        if ratio < best - PIVOT_TOL
                            || (ratio <= best + PIVOT_TOL && basis[i] < basis[r])
                        {
                            Some((i, ratio))
                        } else {
                            Some((r, best))
                        }
                    }
                };
            }
        }
        // Bounded: A' > 0 so every column has a positive entry.
        let (row, _) = pivot.expect("matrix game LP is bounded");
        let p = t[row][col];
        t[row].iter_mut().for_each(|v| *v /= p);
        let pivot_row = t[row].clone();
        for (i, r) in t.iter_mut().enumerate() {
            if i != row && r[col] != 0.0 {
                let f = r[col];
                r.iter_mut()
                    .zip(&pivot_row)
                    .for_each(|(v, pv)| *v -= f * pv);
            }
        }
        basis[row] = col;
    }

    let total = t[m][width - 1];
    let vshift = 1.0 / total;
    let mut col_strategy = vec![0.0; n];
    for (i, &b) in basis.iter().enumerate() {
        if b < n {
            col_strategy[b] = t[i][width - 1] * vshift;
        }
    }
    let row_strategy: Vec<f64> = (0..m).map(|i| t[m][n + i].max(0.0) * vshift).collect();
    Ok(GameSolution {
        value: vshift - shift,
        row: renormalize(row_strategy),
        col: renormalize(col_strategy),
    })
}

fn renormalize(mut p: Vec<f64>) -> Vec<f64> {
    p.iter_mut().for_each(|v| *v = v.max(0.0));
    let s: f64 = p.iter().sum();
    p.iter_mut().for_each(|v| *v /= s);
    p
}

/// A pure saddle point, solved exactly without arithmetic.
fn pure_saddle(a: &[Vec<f64>]) -> Option<GameSolution> {
    let (m, n) = (a.len(), a[0].len());
    let row_mins: Vec<f64> = a
        .iter()
        .map(|r| r.iter().copied().fold(f64::INFINITY, f64::min))
        .collect();
    let col_maxs: Vec<f64> = (0..n)
        .map(|j| a.iter().map(|r| r[j]).fold(f64::NEG_INFINITY, f64::max))
        .collect();
    let (i, lower) =
        row_mins
            .iter()
            .copied()
            .enumerate()
            .fold(
                (0, f64::NEG_INFINITY),
                |b, (i, v)| if v > b.1 { (i, v) } else { b },
            );
    let (j, upper) = col_maxs
        .iter()
        .copied()
        .enumerate()
        .fold(
            (0, f64::INFINITY),
            |b, (j, v)| if v < b.1 { (j, v) } else { b },
        );
    if lower != upper {
        return None;
    }
    let mut row = vec![0.0; m];
    row[i] = 1.0;
    let mut col = vec![0.0; n];
    col[j] = 1.0;
    Some(GameSolution {
        value: lower,
        row,
        col,
    })
}
