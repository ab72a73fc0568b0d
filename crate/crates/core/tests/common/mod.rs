//! Independent oracles for the integration tests. Nothing here calls the
//! library's numerics: plain loops, closed forms and brute force only.
#![allow(dead_code, clippy::needless_range_loop)]

use escape_rate::games::GameSpec;
use escape_rate::linalg::Mat;
use escape_rate::operators::{MaxPlusMatrix, OperatorSpec};
use escape_rate::sampling::rng_for;
use rand::Rng;

/// Perron root by power iteration with Collatz–Wielandt bracketing.
pub fn perron_power(a: &[Vec<f64>]) -> f64 {
    let n = a.len();
    let mut v = vec![1.0; n];
    let (mut lo, mut hi) = (0.0, f64::INFINITY);
    for _ in 0..100_000 {
        let w: Vec<f64> = (0..n)
            .map(|i| (0..n).map(|j| a[i][j] * v[j]).sum())
            .collect();
        let ratios = w.iter().zip(&v).map(|(x, y)| x / y);
        lo = ratios.clone().fold(f64::INFINITY, f64::min);
        hi = ratios.fold(0.0, f64::max);
        let s: f64 = w.iter().sum();
        v = w.iter().map(|x| x / s).collect();
        if hi - lo <= 1e-15 * hi {
            break;
        }
    }
    0.5 * (lo + hi)
}

/// (a+d)/2 + √(((a−d)/2)² + bc)
pub fn perron_2x2(a: f64, b: f64, c: f64, d: f64) -> f64 {
    0.5 * (a + d) + (0.25 * (a - d) * (a - d) + b * c).sqrt()
}

/// Largest eigenvalue of a symmetric 2×2 matrix.
pub fn lambda_max_2x2(m: &Mat) -> f64 {
    let (a, b, d) = (m[(0, 0)], m[(0, 1)], m[(1, 1)]);
    0.5 * (a + d) + (0.25 * (a - d) * (a - d) + b * b).sqrt()
}

pub fn lambda_min_2x2(m: &Mat) -> f64 {
    let (a, b, d) = (m[(0, 0)], m[(0, 1)], m[(1, 1)]);
    0.5 * (a + d) - (0.25 * (a - d) * (a - d) + b * b).sqrt()
}

/// √M = (M + √det·I)/√(tr + 2√det) for 2×2 SPD M.
pub fn sqrt_spd_2x2(m: &Mat) -> Mat {
    let det = m[(0, 0)] * m[(1, 1)] - m[(0, 1)] * m[(1, 0)];
    let s = det.sqrt();
    let t = (m[(0, 0)] + m[(1, 1)] + 2.0 * s).sqrt();
    Mat::from_fn(2, |i, j| (m[(i, j)] + if i == j { s } else { 0.0 }) / t)
}

pub fn inv_2x2(m: &Mat) -> Mat {
    let det = m[(0, 0)] * m[(1, 1)] - m[(0, 1)] * m[(1, 0)];
    Mat::from_rows(&[
        vec![m[(1, 1)] / det, -m[(0, 1)] / det],
        vec![-m[(1, 0)] / det, m[(0, 0)] / det],
    ])
    .unwrap()
}

/// Z^{1/2}(Z^{-1/2} Y Z^{-1/2})^{1/2} Z^{1/2} from the closed-form roots.
pub fn geometric_midpoint_2x2(z: &Mat, y: &Mat) -> Mat {
    let zh = sqrt_spd_2x2(z);
    let zih = inv_2x2(&zh);
    let inner = zih.matmul(y).matmul(&zih).symmetrize();
    zh.matmul(&sqrt_spd_2x2(&inner)).matmul(&zh).symmetrize()
}

/// Maximum cycle mean by enumerating every simple cycle.
pub fn max_cycle_mean_brute(w: &[Vec<f64>]) -> f64 {
    fn dfs(
        w: &[Vec<f64>],
        start: usize,
        cur: usize,
        len: usize,
        sum: f64,
        seen: &mut Vec<bool>,
        best: &mut f64,
    ) {
        for next in 0..w.len() {
            let e = w[cur][next];
            if !e.is_finite() {
                continue;
            }
            if next == start {
                *best = best.max((sum + e) / (len + 1) as f64);
            } else if next > start && !seen[next] {
                seen[next] = true;
                dfs(w, start, next, len + 1, sum + e, seen, best);
                seen[next] = false;
            }
        }
    }
    let mut best = f64::NEG_INFINITY;
    for s in 0..w.len() {
        let mut seen = vec![false; w.len()];
        seen[s] = true;
        dfs(w, s, s, 0, 0.0, &mut seen, &mut best);
    }
    best
}

/// x ↦ max_j (a_ij + x_j)
pub fn max_plus_apply(a: &[Vec<f64>], x: &[f64]) -> Vec<f64> {
    a.iter()
        .map(|row| {
            row.iter()
                .zip(x)
                .map(|(w, v)| w + v)
                .fold(f64::NEG_INFINITY, f64::max)
        })
        .collect()
}

/// Value of the 2×2 game [[a,b],[c,d]] (rows maximize).
pub fn game_value_2x2(a: f64, b: f64, c: f64, d: f64) -> f64 {
    let lower = a.min(b).max(c.min(d));
    let upper = a.max(c).min(b.max(d));
    if lower == upper {
        lower
    } else {
        (a * d - b * c) / (a + d - b - c)
    }
}

fn solve_dense(mut m: Vec<Vec<f64>>, mut rhs: Vec<f64>) -> Option<Vec<f64>> {
    let n = rhs.len();
    for c in 0..n {
        let p = (c..n).max_by(|&i, &j| m[i][c].abs().total_cmp(&m[j][c].abs()))?;
        if m[p][c].abs() < 1e-12 {
            return None;
        }
        m.swap(c, p);
        rhs.swap(c, p);
        for r in 0..n {
            if r != c {
                let f = m[r][c] / m[c][c];
                for k in c..n {
                    m[r][k] -= f * m[c][k];
                }
                rhs[r] -= f * rhs[c];
            }
        }
    }
    Some((0..n).map(|i| rhs[i] / m[i][i]).collect())
}

fn subsets(n: usize, k: usize) -> Vec<Vec<usize>> {
    (0u32..1 << n)
        .filter(|m| m.count_ones() as usize == k)
        .map(|m| (0..n).filter(|i| m & (1 << i) != 0).collect())
        .collect()
}

/// Matrix game value by support enumeration: for each pair of equal-size
/// supports, solve the indifference equations and keep the first pair of
/// strategies that are optimal in the full game.
pub fn game_value_support(a: &[Vec<f64>]) -> f64 {
    let (m, n) = (a.len(), a[0].len());
    for k in 1..=m.min(n) {
        for rows in subsets(m, k) {
            for cols in subsets(n, k) {
                // Unknowns p (k) and v: Σ p_i a_ij = v for j in cols, Σ p = 1.
                let mut sys = vec![vec![0.0; k + 1]; k + 1];
                let mut rhs = vec![0.0; k + 1];
                for (r, &j) in cols.iter().enumerate() {
                    for (c, &i) in rows.iter().enumerate() {
                        sys[r][c] = a[i][j];
                    }
                    sys[r][k] = -1.0;
                }
                sys[k][..k].iter_mut().for_each(|x| *x = 1.0);
                rhs[k] = 1.0;
                let Some(ps) = solve_dense(sys, rhs) else {
                    continue;
                };
                let mut sys = vec![vec![0.0; k + 1]; k + 1];
                let mut rhs = vec![0.0; k + 1];
                for (r, &i) in rows.iter().enumerate() {
                    for (c, &j) in cols.iter().enumerate() {
                        sys[r][c] = a[i][j];
                    }
                    sys[r][k] = -1.0;
                }
                sys[k][..k].iter_mut().for_each(|x| *x = 1.0);
                rhs[k] = 1.0;
                let Some(qs) = solve_dense(sys, rhs) else {
                    continue;
                };
                if ps[..k].iter().chain(&qs[..k]).any(|x| *x < -1e-12) {
                    continue;
                }
                let v = ps[k];
                let mut p = vec![0.0; m];
                rows.iter().zip(&ps).for_each(|(&i, x)| p[i] = *x);
                let mut q = vec![0.0; n];
                cols.iter().zip(&qs).for_each(|(&j, x)| q[j] = *x);
                let row_ok =
                    (0..n).all(|j| (0..m).map(|i| p[i] * a[i][j]).sum::<f64>() >= v - 1e-10);
                let col_ok =
                    (0..m).all(|i| (0..n).map(|j| q[j] * a[i][j]).sum::<f64>() <= v + 1e-10);
                if row_ok && col_ok {
                    return v;
                }
            }
        }
    }
    panic!("no equilibrium found by support enumeration");
}

/// Random matrix with entries in (0, 1].
pub fn random_positive_matrix(seed: u64, n: usize) -> Vec<Vec<f64>> {
    let mut rng = rng_for(seed, 0);
    (0..n)
        .map(|_| (0..n).map(|_| 1.0 - rng.random_range(0.0..1.0)).collect())
        .collect()
}

pub fn nonneg(a: &[Vec<f64>]) -> OperatorSpec {
    OperatorSpec::NonnegMatrix {
        matrix: Mat::from_rows(a).unwrap(),
    }
}

pub fn max_plus(a: &[Vec<f64>]) -> OperatorSpec {
    OperatorSpec::MaxPlus {
        matrix: MaxPlusMatrix(a.to_vec()),
    }
}

/// T(X) = A + M X (I + B X)⁻¹ Mᵀ with B = e₁e₁ᵀ and M = αI.
pub fn riccati(a: Mat, alpha: f64) -> OperatorSpec {
    OperatorSpec::Riccati {
        a,
        b: Mat::outer(&[1.0, 0.0]),
        m: Mat::identity(2).scale(alpha),
    }
}

/// Random stochastic game with 1–3 actions per player and dense transitions.
pub fn random_game(seed: u64, states: usize, two_player: bool) -> GameSpec {
    let mut rng = rng_for(seed, 5);
    let a: Vec<usize> = (0..states).map(|_| rng.random_range(1..=3)).collect();
    let b: Vec<usize> = (0..states)
        .map(|_| {
            if two_player {
                rng.random_range(1..=3)
            } else {
                1
            }
        })
        .collect();
    let payoff = (0..states)
        .map(|w| {
            (0..a[w])
                .map(|_| (0..b[w]).map(|_| rng.random_range(-1.0..1.0)).collect())
                .collect()
        })
        .collect();
    let transition = (0..states)
        .map(|w| {
            (0..a[w])
                .map(|_| {
                    (0..b[w])
                        .map(|_| {
                            let mut q: Vec<f64> =
                                (0..states).map(|_| rng.random_range(0.0..1.0)).collect();
                            let s: f64 = q.iter().sum();
                            q.iter_mut().for_each(|x| *x /= s);
                            q
                        })
                        .collect()
                })
                .collect()
        })
        .collect();
    GameSpec {
        states,
        actions_a: a,
        actions_b: b,
        payoff,
        transition,
    }
}
