//! Finite zero-sum stochastic games and their Shapley operators.
//!
//! Player A maximizes, player B minimizes. States are indexed from 0.

use serde::{Deserialize, Serialize};

use crate::error::{check_dim, invalid, Error, Result};
use crate::par::{self, Execution};
use crate::simplex::{self, GameSolution};

/// Iterates kept un-normalized for certificate checks.
pub const RAW_TRACK_LIMIT: usize = 100_000;
/// Largest Cesàro window tried by the ρ̄ probes (lcm of 1..8).
pub const MAX_WINDOW: usize = 840;

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct GameSpec {
    pub states: usize,
    pub actions_a: Vec<usize>,
    pub actions_b: Vec<usize>,
    /// payoff[ω][a][b]
    pub payoff: Vec<Vec<Vec<f64>>>,
    /// transition[ω][a][b][ω′]
    pub transition: Vec<Vec<Vec<Vec<f64>>>>,
}

impl GameSpec {
    pub fn validate(&self) -> Result<()> {
        let s = self.states;
        if s == 0 {
            return Err(invalid("a game needs at least one state"));
        }
        check_dim(s, self.actions_a.len())?;
        check_dim(s, self.actions_b.len())?;
        check_dim(s, self.payoff.len())?;
        check_dim(s, self.transition.len())?;
        for w in 0..s {
            let (na, nb) = (self.actions_a[w], self.actions_b[w]);
            if na == 0 || nb == 0 {
                return Err(invalid(format!("state {w} has an empty action set")));
            }
            if na > simplex::MAX_ACTIONS || nb > simplex::MAX_ACTIONS {
                return Err(invalid(format!("state {w} exceeds the action limit")));
            }
            if self.payoff[w].len() != na || self.transition[w].len() != na {
                return Err(invalid(format!("state {w}: wrong number of A actions")));
            }
            for a in 0..na {
                if self.payoff[w][a].len() != nb || self.transition[w][a].len() != nb {
                    return Err(invalid(format!("state {w}: wrong number of B actions")));
                }
                for b in 0..nb {
                    if !self.payoff[w][a][b].is_finite() {
                        return Err(invalid(format!("state {w}: non-finite payoff")));
                    }
                    let q = &self.transition[w][a][b];
                    check_dim(s, q.len())?;
                    if q.iter().any(|p| !(*p >= 0.0)) {
                        return Err(invalid(format!("state {w}: negative probability")));
                    }
                    let total: f64 = q.iter().sum();
                    if (total - 1.0).abs() > 1e-12 {
                        return Err(invalid(format!(
                            "state {w}, actions ({a},{b}): probabilities sum to {total}"
                        )));
                    }
                }
            }
        }
        Ok(())
    }

    pub fn is_one_player(&self) -> bool {
        self.actions_b.iter().all(|&n| n == 1)
    }

    /// Deterministic transitions (every row is a unit vector).
    pub fn is_deterministic(&self) -> bool {
        self.transition
            .iter()
            .flatten()
            .flatten()
            .all(|q| q.iter().filter(|&&p| p != 0.0).count() == 1)
    }

    /// One-player deterministic game of a max-plus matrix: at state i the
    /// player picks j with a finite entry, earns a[i][j] and moves to j.
    pub fn from_max_plus(a: &[Vec<f64>]) -> Result<Self> {
        let n = a.len();
        let mut spec = GameSpec {
            states: n,
            actions_a: Vec::with_capacity(n),
            actions_b: vec![1; n],
            payoff: Vec::with_capacity(n),
            transition: Vec::with_capacity(n),
        };
        for (i, row) in a.iter().enumerate() {
            check_dim(n, row.len())?;
            let moves: Vec<usize> = (0..n).filter(|&j| row[j].is_finite()).collect();
            if moves.is_empty() {
                return Err(invalid(format!("max-plus row {i} has no finite entry")));
            }
            spec.actions_a.push(moves.len());
            spec.payoff
                .push(moves.iter().map(|&j| vec![row[j]]).collect());
            spec.transition.push(
                moves
                    .iter()
                    .map(|&j| {
                        let mut q = vec![0.0; n];
                        q[j] = 1.0;
                        vec![q]
                    })
                    .collect(),
            );
        }
        spec.validate()?;
        Ok(spec)
    }

    /// Edge weights of a one-player deterministic game: w[i][j] is the best
    /// payoff of a move from i to j, −∞ when there is none.
    pub fn max_plus_weights(&self) -> Option<Vec<Vec<f64>>> {
        if !self.is_one_player() || !self.is_deterministic() {
            return None;
        }
        let n = self.states;
        let mut w = vec![vec![f64::NEG_INFINITY; n]; n];
        for i in 0..n {
            for a in 0..self.actions_a[i] {
                let q = &self.transition[i][a][0];
                let j = q.iter().position(|&p| p != 0.0)?;
                w[i][j] = w[i][j].max(self.payoff[i][a][0]);
            }
        }
        Some(w)
    }

    /// The game whose Shapley operator is x ↦ −T(−x): players swap roles
    /// and payoffs change sign.
    pub fn negated_transposed(&self) -> GameSpec {
        let s = self.states;
        let mut payoff = Vec::with_capacity(s);
        let mut transition = Vec::with_capacity(s);
        for w in 0..s {
            let (na, nb) = (self.actions_a[w], self.actions_b[w]);
            payoff.push(
                (0..nb)
                    .map(|b| (0..na).map(|a| -self.payoff[w][a][b]).collect())
                    .collect(),
            );
            transition.push(
                (0..nb)
                    .map(|b| (0..na).map(|a| self.transition[w][a][b].clone()).collect())
                    .collect(),
            );
        }
        GameSpec {
            states: s,
            actions_a: self.actions_b.clone(),
            actions_b: self.actions_a.clone(),
            payoff,
            transition,
        }
    }

    /// The stage matrix at state ω for continuation values x.
    pub fn stage_matrix(&self, w: usize, x: &[f64]) -> Vec<Vec<f64>> {
        (0..self.actions_a[w])
            .map(|a| {
                (0..self.actions_b[w])
                    .map(|b| {
                        let q = &self.transition[w][a][b];
                        self.payoff[w][a][b]
                            + q.iter()
                                .zip(x)
                                .filter(|(p, _)| **p != 0.0)
                                .map(|(p, v)| p * v)
                                .sum::<f64>()
                    })
                    .collect()
            })
            .collect()
    }
}

/// Value and optimal strategies of a matrix game (rows maximize).
pub fn matrix_game_value(payoff: &[Vec<f64>]) -> Result<GameSolution> {
    simplex::solve(payoff)
}

fn stage_value(m: &[Vec<f64>]) -> Result<f64> {
    if m.len() == 1 {
        return Ok(m[0].iter().copied().fold(f64::INFINITY, f64::min));
    }
    if m[0].len() == 1 {
        return Ok(m.iter().map(|r| r[0]).fold(f64::NEG_INFINITY, f64::max));
    }
    Ok(simplex::solve(m)?.value)
}

/// T(x)(ω) = val[g(·,·,ω) + Σ q(ω′|·,·,ω) x(ω′)].
pub fn shapley_apply(game: &GameSpec, x: &[f64], exec: Execution) -> Result<Vec<f64>> {
    check_dim(game.states, x.len())?;
    if x.iter().any(|v| !v.is_finite()) {
        return Err(invalid("value vector must be finite"));
    }
    // Small games are not worth dispatching to the thread pool.
    let exec = if game.states < 16 {
        Execution::Sequential
    } else {
        exec
    };
    par::map_range(exec, game.states, |w| stage_value(&game.stage_matrix(w, x)))
        .into_iter()
        .collect()
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Violator {
    pub state: usize,
    /// Most negative margin over the checked horizon.
    pub violation: f64,
}

/// States passing the pumping inequality, or the least violator.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct OmegaReport {
    pub states: Vec<usize>,
    pub tol: f64,
    pub horizon: usize,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub least_violator: Option<Violator>,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct GameRateResult {
    pub rho_plus: f64,
    pub rho_minus: f64,
    /// min_k max_ω T^k(0)(ω)/k over the raw track.
    pub fekete_plus: f64,
    /// max_k min_ω T^k(0)(ω)/k over the raw track.
    pub fekete_minus: f64,
    pub omega_plus: OmegaReport,
    pub omega_minus: OmegaReport,
    pub horizon: usize,
    /// T^k(0) for k = 0..=min(K, raw limit).
    #[serde(skip)]
    pub iterates: Vec<Vec<f64>>,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct GameRateOptions {
    pub horizon: usize,
    pub local_search_passes: usize,
    #[serde(default)]
    pub execution: Execution,
}

impl Default for GameRateOptions {
    fn default() -> Self {
        GameRateOptions {
            horizon: 1000,
            local_search_passes: 200,
            execution: Execution::default(),
        }
    }
}

fn top(v: &[f64]) -> f64 {
    v.iter().copied().fold(f64::NEG_INFINITY, f64::max)
}

fn bottom(v: &[f64]) -> f64 {
    v.iter().copied().fold(f64::INFINITY, f64::min)
}

/// Value iteration from 0 with ρ₊/ρ₋ bounds and ω₊/ω₋ certificates.
pub fn game_rate(game: &GameSpec, opts: &GameRateOptions) -> Result<GameRateResult> {
    game.validate()?;
    let k_total = opts.horizon;
    if k_total == 0 {
        return Err(invalid("horizon must be at least 1"));
    }
    let exec = opts.execution;
    let raw_len = k_total.min(RAW_TRACK_LIMIT);
    let mut iterates = Vec::with_capacity(raw_len + 1);
    iterates.push(vec![0.0; game.states]);
    let (mut fekete_plus, mut fekete_minus) = (f64::INFINITY, f64::NEG_INFINITY);
    for k in 1..=raw_len {
        let next = shapley_apply(game, &iterates[k - 1], exec)?;
        fekete_plus = fekete_plus.min(top(&next) / k as f64);
        fekete_minus = fekete_minus.max(bottom(&next) / k as f64);
        iterates.push(next);
    }
    // Beyond the raw track only differences matter; renormalize by the max.
    let mut tail: Vec<Vec<f64>> = iterates[raw_len.saturating_sub(2 * MAX_WINDOW)..].to_vec();
    if k_total > raw_len {
        let mut cur = iterates[raw_len].clone();
        let shift = top(&cur);
        cur.iter_mut().for_each(|v| *v -= shift);
        tail = vec![cur.clone()];
        for _ in raw_len..k_total {
            let mut next = shapley_apply(game, &cur, exec)?;
            let s = top(&next);
            next.iter_mut().for_each(|v| *v -= s);
            cur = next;
            tail.push(cur.clone());
            if tail.len() > 2 * MAX_WINDOW {
                tail.remove(0);
            }
        }
    }

    let probes = cesaro_probes(&tail, raw_len);
    let (mut best_plus, mut best_minus) = (fekete_plus, fekete_minus);
    let mut start_plus: Option<Vec<f64>> = None;
    let mut start_minus: Option<Vec<f64>> = None;
    for y in probes {
        let d = displacement(game, &y, exec)?;
        if top(&d) < best_plus {
            best_plus = top(&d);
            start_plus = Some(y.clone());
        }
        if bottom(&d) > best_minus {
            best_minus = bottom(&d);
            start_minus = Some(y);
        }
    }
    if let Some(y) = start_plus {
        best_plus = best_plus.min(local_search(game, y, opts.local_search_passes, exec, true)?);
    }
    if let Some(y) = start_minus {
        best_minus = best_minus.max(local_search(
            game,
            y,
            opts.local_search_passes,
            exec,
            false,
        )?);
    }

    let tol = 1e-7 * raw_len as f64;
    let omega_plus = omega_report(&iterates, best_plus, tol, true);
    let omega_minus = omega_report(&iterates, best_minus, tol, false);
    Ok(GameRateResult {
        rho_plus: best_plus,
        rho_minus: best_minus,
        fekete_plus,
        fekete_minus,
        omega_plus,
        omega_minus,
        horizon: k_total,
        iterates,
    })
}

fn displacement(game: &GameSpec, y: &[f64], exec: Execution) -> Result<Vec<f64>> {
    let t = shapley_apply(game, y, exec)?;
    Ok(t.iter().zip(y).map(|(a, b)| a - b).collect())
}

/// Averages of the last w tail iterates for w = 1..=min(len/2, 840).
fn cesaro_probes(tail: &[Vec<f64>], raw_len: usize) -> Vec<Vec<f64>> {
    let n = tail.last().map(Vec::len).unwrap_or(0);
    let max_w = (raw_len / 2).clamp(1, MAX_WINDOW).min(tail.len());
    let mut out = Vec::with_capacity(max_w);
    let mut sum = vec![0.0; n];
    for w in 1..=max_w {
        let v = &tail[tail.len() - w];
        sum.iter_mut().zip(v).for_each(|(s, x)| *s += x);
        let base = top(&sum) / w as f64;
        out.push(sum.iter().map(|s| s / w as f64 - base).collect());
    }
    out
}

/// Coordinate descent on t(T(y) − y) (upper) or ascent on b(T(y) − y).
fn local_search(
    game: &GameSpec,
    mut y: Vec<f64>,
    passes: usize,
    exec: Execution,
    upper: bool,
) -> Result<f64> {
    let score = |y: &[f64]| -> Result<f64> {
        let d = displacement(game, y, exec)?;
        Ok(if upper { top(&d) } else { -bottom(&d) })
    };
    let mut best = score(&y)?;
    let mut step = 1.0;
    for _ in 0..passes {
        let mut improved = false;
        for i in 0..y.len() {
            for dir in [1.0, -1.0] {
                let old = y[i];
                y[i] = old + dir * step;
                let s = score(&y)?;
                if s < best {
                    best = s;
                    improved = true;
                } else {
                    y[i] = old;
                }
            }
        }
        if !improved {
            step *= 0.5;
            if step < 1e-12 {
                break;
            }
        }
    }
    Ok(if upper { best } else { -best })
}

fn omega_report(iterates: &[Vec<f64>], rate: f64, tol: f64, plus: bool) -> OmegaReport {
    let n = iterates[0].len();
    let margins: Vec<f64> = (0..n)
        .map(|w| {
            iterates
                .iter()
                .enumerate()
                .skip(1)
                .map(|(k, x)| {
                    let m = x[w] - k as f64 * rate;
                    if plus {
                        m
                    } else {
                        -m
                    }
                })
                .fold(f64::INFINITY, f64::min)
        })
        .collect();
    let states: Vec<usize> = (0..n).filter(|&w| margins[w] >= -tol).collect();
    let least_violator = if states.is_empty() {
        let (state, violation) =
            margins
                .iter()
                .copied()
                .enumerate()
                .fold(
                    (0, f64::NEG_INFINITY),
                    |b, (i, m)| if m > b.1 { (i, m) } else { b },
                );
        Some(Violator { state, violation })
    } else {
        None
    };
    OmegaReport {
        states,
        tol,
        horizon: iterates.len() - 1,
        least_violator,
    }
}

/// Maximum cycle mean of the weighted digraph with edge i→j of weight
/// `w[i][j]` (−∞ for no edge), by Karp's recurrence.
pub fn karp_cycle_mean(w: &[Vec<f64>]) -> Result<f64> {
    let n = w.len();
    if n == 0 || w.iter().any(|r| r.len() != n) {
        return Err(invalid("weight matrix must be square and nonempty"));
    }
    if w.iter()
        .flatten()
        .any(|v| v.is_nan() || *v == f64::INFINITY)
    {
        return Err(invalid("weights must be finite or −∞"));
    }
    // d[k][v]: heaviest walk with k edges ending at v, from any start.
    let mut d = vec![vec![f64::NEG_INFINITY; n]; n + 1];
    d[0].iter_mut().for_each(|v| *v = 0.0);
    for k in 1..=n {
        for v in 0..n {
            d[k][v] = (0..n)
                .filter(|&u| w[u][v].is_finite() && d[k - 1][u].is_finite())
                .map(|u| d[k - 1][u] + w[u][v])
                .fold(f64::NEG_INFINITY, f64::max);
        }
    }
    let mut best = f64::NEG_INFINITY;
    for v in 0..n {
        if !d[n][v].is_finite() {
            continue;
        }
        let worst = (0..n)
            .filter(|&k| d[k][v].is_finite())
            .map(|k| (d[n][v] - d[k][v]) / (n - k) as f64)
            .fold(f64::INFINITY, f64::min);
        best = best.max(worst);
    }
    if best.is_finite() {
        Ok(best)
    } else {
        Err(Error::NoCycle)
    }
}
