//! Acceptance criteria 1–9. Prints one PASS/FAIL line per criterion and
//! exits non-zero if any fails. Tolerances are pinned below.

mod common;

use std::panic::{self, AssertUnwindSafe};
use std::time::{Duration, Instant};

use common::*;
use escape_rate::certificates::{verify_dual, verify_primal, EvalForm};
use escape_rate::games::{game_rate, karp_cycle_mean, GameRateOptions, GameSpec};
use escape_rate::hemi::{
    check_geodesic_identity, check_star_shaped, check_triangle, GeodesicFamily, GeodesicKind,
    HemiMetric, MetricKind, Point, SpaceKind,
};
use escape_rate::io::{horoball_sections, run_rate, ProblemFile, Verdict};
use escape_rate::linalg::Mat;
use escape_rate::operators::{check_nonexpansive, orbit, OperatorSpec, RadialOptions};
use escape_rate::sampling::{random_spd, rng_for, SamplePlan};
use rand::Rng;

// 1
const PERRON_MATRICES: u64 = 100;
const PERRON_WIDTH: f64 = 1e-6;
const PERRON_CONTAIN: f64 = 1e-12;
const PERRON_BUDGET: Duration = Duration::from_secs(30);
// 2
const RICCATI_DUAL_SLACK: f64 = 1e-9;
const RICCATI_PRIMAL_S: f64 = 1e6;
const RICCATI_WIDTH: f64 = 1e-5;
// 3
const CONTRACTION_STEP: f64 = 1e-10;
const CONTRACTION_STEPS: usize = 200;
const CONTRACTION_RATE: f64 = 1e-8;
const GOLDEN_TOL: f64 = 1e-10;
// 4
const TORUS_ALPHA: f64 = 0.3;
const TORUS_HORIZON: usize = 10_000;
const TORUS_RATE_MAX: f64 = 1.0005;
const TORUS_INF_TOL: f64 = 1e-12;
// 5
const DUALITY_SLACK: f64 = 1e-8;
const PROPERTY_SAMPLES: usize = 10_000;
const PROPERTY_TOL: f64 = 1e-9;
// 6
const STAR_SAMPLES: usize = 10_000;
const STAR_TOL: f64 = 1e-9;
const STAR_NEGATIVE: f64 = 1e-3;
// 7
const ONE_PLAYER_GAMES: u64 = 50;
const KARP_TOL: f64 = 1e-9;
const GAME_HORIZON: usize = 1000;
const MATRIX_GAMES: u64 = 20;
const MATRIX_GAME_TOL: f64 = 1e-8;
// 8
const KN_HORIZON: usize = 1000;
// 9
const HOROBALL_SAMPLES: usize = 1000;
const HOROBALL_TOL: f64 = 1e-8;
const APEX_TOL: f64 = 1e-9;

type Check = fn() -> Result<String, String>;
type Step<'a> = Box<dyn Fn(&[f64]) -> Vec<f64> + 'a>;

fn main() {
    let checks: [(&str, Check); 9] = [
        ("Collatz–Wielandt agreement", criterion_1),
        ("Riccati escape rate", criterion_2),
        ("Riccati contraction", criterion_3),
        ("torus counterexample", criterion_4),
        ("weak duality and property suite", criterion_5),
        ("star-shaped sampling", criterion_6),
        ("game certificates", criterion_7),
        ("Kohlberg–Neyman forms", criterion_8),
        ("horoball nesting", criterion_9),
    ];
    panic::set_hook(Box::new(|_| {}));
    let mut failed = 0;
    for (i, (name, check)) in checks.into_iter().enumerate() {
        let t = Instant::now();
        let out = panic::catch_unwind(AssertUnwindSafe(check))
            .unwrap_or_else(|p| Err(format!("panicked: {}", panic_text(&p))));
        let secs = t.elapsed().as_secs_f64();
        match out {
            Ok(detail) => println!("PASS  {}  {name} ({secs:.2}s): {detail}", i + 1),
            Err(why) => {
                failed += 1;
                println!("FAIL  {}  {name} ({secs:.2}s): {why}", i + 1)
            }
        }
    }
    if failed > 0 {
        std::process::exit(1);
    }
}

fn panic_text(p: &Box<dyn std::any::Any + Send>) -> String {
    p.downcast_ref::<String>()
        .cloned()
        .or_else(|| p.downcast_ref::<&str>().map(|s| s.to_string()))
        .unwrap_or_default()
}

fn ensure(ok: bool, msg: impl FnOnce() -> String) -> Result<(), String> {
    if ok {
        Ok(())
    } else {
        Err(msg())
    }
}

fn err<E: std::fmt::Display>(e: E) -> String {
    e.to_string()
}

fn criterion_1() -> Result<String, String> {
    let start = Instant::now();
    let mut worst_width = 0.0_f64;
    for seed in 0..PERRON_MATRICES {
        let n = 2 + (seed % 5) as usize;
        let a = random_positive_matrix(seed, n);
        let r = run_rate(&ProblemFile::new(nonneg(&a))).map_err(err)?;
        let oracle = perron_power(&a).ln();
        ensure(r.interval.contains(oracle, PERRON_CONTAIN), || {
            format!("seed {seed}: {:?} misses log ρ = {oracle}", r.interval)
        })?;
        ensure(r.interval.width() <= PERRON_WIDTH, || {
            format!("seed {seed}: width {}", r.interval.width())
        })?;
        worst_width = worst_width.max(r.interval.width());
    }
    let elapsed = start.elapsed();
    ensure(elapsed <= PERRON_BUDGET, || format!("took {elapsed:?}"))?;
    Ok(format!(
        "{PERRON_MATRICES} matrices, max width {worst_width:.2e}, {:.2}s",
        elapsed.as_secs_f64()
    ))
}

/// Random SPD A with λ₁(A) in (0, 1].
fn random_a(seed: u64) -> Mat {
    let mut rng = rng_for(seed, 7);
    let a = random_spd(2, 1.0, &mut rng);
    let c: f64 = 1.0 - rng.random_range(0.0..1.0);
    a.scale(c / lambda_max_2x2(&a))
}

fn criterion_2() -> Result<String, String> {
    let u = Point::Matrix(Mat::outer(&[0.0, 1.0]));
    let mut worst_width = 0.0_f64;
    let mut cases = 0;
    for alpha in [1.5, 2.0, 3.0] {
        for seed in 0..5 {
            let a = random_a(seed);
            let l1 = lambda_max_2x2(&a);
            let t = riccati(a, alpha);
            let a2 = alpha * alpha;
            let d = verify_dual(&t, &u, a2, &RadialOptions::default()).map_err(err)?;
            ensure(
                d.status.is_verified() && d.achieved >= a2 - RICCATI_DUAL_SLACK,
                || {
                    format!(
                        "α={alpha} seed {seed}: dual {:?} achieved {}",
                        d.status, d.achieved
                    )
                },
            )?;
            let y = Point::Matrix(Mat::identity(2).scale(RICCATI_PRIMAL_S));
            let mu = a2 + 2.0 * l1 / RICCATI_PRIMAL_S;
            let p = verify_primal(&t, &y, mu).map_err(err)?;
            ensure(p.status.is_verified(), || {
                format!(
                    "α={alpha} seed {seed}: primal achieved {} > {mu}",
                    p.achieved
                )
            })?;
            let r = run_rate(&ProblemFile::new(t)).map_err(err)?;
            ensure(r.interval.width() <= RICCATI_WIDTH, || {
                format!("α={alpha} seed {seed}: width {}", r.interval.width())
            })?;
            ensure(
                r.interval.contains(2.0 * alpha.ln(), RICCATI_DUAL_SLACK),
                || format!("α={alpha} seed {seed}: {:?} misses 2 log α", r.interval),
            )?;
            worst_width = worst_width.max(r.interval.width());
            cases += 1;
        }
    }
    Ok(format!("{cases} cases, max width {worst_width:.2e}"))
}

fn criterion_3() -> Result<String, String> {
    let thompson = HemiMetric::psd(MetricKind::Thompson, 2);
    let mut slowest = 0;
    for seed in 0..10 {
        let mut rng = rng_for(seed, 3);
        let t = OperatorSpec::Riccati {
            a: random_spd(2, 1.0, &mut rng),
            b: random_spd(2, 1.0, &mut rng),
            m: random_spd(2, 0.5, &mut rng),
        };
        let tr = orbit(
            &t,
            &thompson,
            &Point::Matrix(Mat::identity(2)),
            CONTRACTION_STEPS,
        )
        .map_err(err)?;
        let k = tr.steps.iter().position(|s| *s < CONTRACTION_STEP);
        let k =
            k.ok_or_else(|| format!("seed {seed}: last step {:e}", tr.steps.last().unwrap()))?;
        slowest = slowest.max(k + 1);
        let r = run_rate(&ProblemFile::new(t)).map_err(err)?;
        let upper = r.interval.upper.unwrap_or(f64::INFINITY);
        ensure(upper <= CONTRACTION_RATE, || {
            format!("seed {seed}: rate estimate {upper}")
        })?;
    }
    let one = Mat::identity(1);
    let scalar = OperatorSpec::Riccati {
        a: one.clone(),
        b: one.clone(),
        m: one,
    };
    let tr = orbit(
        &scalar,
        &HemiMetric::psd(MetricKind::Thompson, 1),
        &Point::Matrix(Mat::identity(1)),
        100,
    )
    .map_err(err)?;
    let x = tr.last.as_matrix().map_err(err)?[(0, 0)];
    let golden = 0.5 * (1.0 + 5f64.sqrt());
    ensure((x - golden).abs() <= GOLDEN_TOL, || {
        format!("scalar fixed point {x}")
    })?;
    Ok(format!(
        "10 contractions settle within {slowest} steps; scalar fixed point {x:.15}"
    ))
}

fn criterion_4() -> Result<String, String> {
    let mut p = ProblemFile::new(OperatorSpec::TorusShift {
        alpha: TORUS_ALPHA,
        t_step: 1.0,
    });
    p.horizon = TORUS_HORIZON;
    let r = run_rate(&p).map_err(err)?;
    let rate = r.orbit.diagnostics.final_average;
    ensure((1.0..=TORUS_RATE_MAX).contains(&rate), || {
        format!("orbit rate {rate}")
    })?;
    let inf = r.displacement_inf.ok_or("no displacement reported")?;
    ensure((inf - (1.0 + TORUS_ALPHA)).abs() <= TORUS_INF_TOL, || {
        format!("displacement inf {inf}")
    })?;
    ensure(
        r.notices.iter().any(|n| n.contains("not star-shaped")),
        || "star-shaped precondition not flagged".into(),
    )?;
    let gap = r.strict_gap.ok_or("no gap reported")?;
    ensure(gap > 0.0, || format!("gap {gap}"))?;
    Ok(format!(
        "rate {rate:.6}, inf δ(p,Tp) = {inf:.15}, gap {gap:.6}"
    ))
}

fn builtin_suite() -> Vec<OperatorSpec> {
    let mut suite = Vec::new();
    for seed in 0..10 {
        suite.push(nonneg(&random_positive_matrix(
            1000 + seed,
            2 + (seed % 4) as usize,
        )));
    }
    suite.push(nonneg(&[vec![1.0, 1.0], vec![0.0, 2.0]]));
    suite.push(nonneg(&[vec![0.5, 0.0], vec![0.0, 0.25]]));
    suite.push(OperatorSpec::Composite {
        operators: vec![
            nonneg(&random_positive_matrix(7, 3)),
            nonneg(&random_positive_matrix(8, 3)),
        ],
    });
    for alpha in [0.5, 1.5, 2.0, 3.0] {
        suite.push(riccati(random_a(alpha as u64), alpha));
    }
    for seed in 0..3 {
        let mut rng = rng_for(seed, 11);
        suite.push(OperatorSpec::Riccati {
            a: random_spd(2, 1.0, &mut rng),
            b: random_spd(2, 1.0, &mut rng),
            m: random_spd(2, 1.0, &mut rng),
        });
    }
    for space in [SpaceKind::StandardConeInterior, SpaceKind::PsdConeInterior] {
        suite.push(OperatorSpec::Identity { space, dim: 3 });
    }
    suite
}

fn criterion_5() -> Result<String, String> {
    let mut pairs = 0;
    let mut worst = f64::NEG_INFINITY;
    for (i, t) in builtin_suite().into_iter().enumerate() {
        let r = run_rate(&ProblemFile::new(t)).map_err(err)?;
        if let (Some(d), Some(p)) = (&r.dual, &r.primal) {
            if d.status.is_verified() && p.status.is_verified() {
                let gap = d.bound() - p.bound();
                worst = worst.max(gap);
                ensure(gap <= DUALITY_SLACK, || {
                    format!("operator {i}: log μ_d − log μ_p = {gap}")
                })?;
                pairs += 1;
            }
        }
    }
    ensure(pairs >= 10, || {
        format!("only {pairs} verified primal/dual pairs")
    })?;

    let plan = SamplePlan::new(5, PROPERTY_SAMPLES).with_tol(PROPERTY_TOL);
    let perron = nonneg(&random_positive_matrix(3, 3));
    let ric = riccati(random_a(4), 2.0);
    let mp = max_plus(&[
        vec![0.5, -1.0, 2.0],
        vec![1.0, 0.0, f64::NEG_INFINITY],
        vec![-0.5, 0.3, 0.1],
    ]);
    let shapley = OperatorSpec::Shapley {
        game: random_game(9, 3, true),
    };
    let nonexp = [
        (perron.clone(), HemiMetric::standard(MetricKind::Rfunk, 3)),
        (
            perron.clone(),
            HemiMetric::standard(MetricKind::Thompson, 3),
        ),
        (perron, HemiMetric::standard(MetricKind::Hilbert, 3)),
        (ric.clone(), HemiMetric::psd(MetricKind::Thompson, 2)),
        (ric, HemiMetric::psd(MetricKind::RfunkPlus, 2)),
        (mp.clone(), HemiMetric::vector(MetricKind::Top, 3)),
        (mp, HemiMetric::vector(MetricKind::NormSup, 3)),
        (shapley.clone(), HemiMetric::vector(MetricKind::Top, 3)),
        (shapley, HemiMetric::vector(MetricKind::NormSup, 3)),
        (
            OperatorSpec::TorusShift {
                alpha: TORUS_ALPHA,
                t_step: 1.0,
            },
            HemiMetric::torus(),
        ),
    ];
    let mut samples = 0;
    for (t, m) in &nonexp {
        let rep = check_nonexpansive(t, m, &plan).map_err(err)?;
        ensure(rep.passed(), || {
            format!("non-expansiveness {:?} {:?}: {rep:?}", t, m.kind())
        })?;
        samples += rep.samples;
    }
    let metrics = [
        HemiMetric::standard(MetricKind::Rfunk, 3),
        HemiMetric::standard(MetricKind::RfunkPlus, 3),
        HemiMetric::standard(MetricKind::Thompson, 3),
        HemiMetric::standard(MetricKind::Hilbert, 3),
        HemiMetric::psd(MetricKind::Rfunk, 3),
        HemiMetric::psd(MetricKind::Thompson, 3),
        HemiMetric::psd(MetricKind::Hilbert, 2),
        HemiMetric::vector(MetricKind::NormSup, 4),
        HemiMetric::vector(MetricKind::NormL2, 4),
        HemiMetric::vector(MetricKind::Top, 4),
        HemiMetric::vector(MetricKind::Bottom, 4),
        HemiMetric::torus(),
    ];
    for m in &metrics {
        let rep = check_triangle(m, &plan).map_err(err)?;
        ensure(rep.passed(), || format!("triangle {:?}: {rep:?}", m))?;
        samples += rep.samples;
    }
    let geodesics = [
        (
            Point::Vector(vec![0.0; 3]),
            GeodesicKind::StraightLine,
            HemiMetric::vector(MetricKind::NormSup, 3),
        ),
        (
            Point::Matrix(Mat::identity(2)),
            GeodesicKind::GeometricMean,
            HemiMetric::psd(MetricKind::Thompson, 2),
        ),
        (
            Point::Matrix(Mat::identity(3)),
            GeodesicKind::GeometricMean,
            HemiMetric::psd(MetricKind::Rfunk, 3),
        ),
        (
            Point::Vector(vec![1.0; 3]),
            GeodesicKind::ThompsonStraight,
            HemiMetric::standard(MetricKind::Thompson, 3),
        ),
    ];
    for (c, kind, m) in geodesics {
        let g = GeodesicFamily::new(c, kind, m).map_err(err)?;
        let rep = check_geodesic_identity(&g, &plan).map_err(err)?;
        ensure(rep.passed(), || {
            format!("geodesic identity {kind:?}: {rep:?}")
        })?;
        samples += rep.samples;
    }
    Ok(format!(
        "{pairs} primal/dual pairs, worst log μ_d − log μ_p = {worst:.2e}; {samples} property samples"
    ))
}

fn criterion_6() -> Result<String, String> {
    let plan = SamplePlan::new(6, STAR_SAMPLES).with_tol(STAR_TOL);
    let mut worst = f64::NEG_INFINITY;
    for n in [2, 3] {
        for kind in [
            MetricKind::Thompson,
            MetricKind::Rfunk,
            MetricKind::RfunkPlus,
        ] {
            let m = HemiMetric::psd(kind, n);
            let g = GeodesicFamily::new(
                Point::Matrix(Mat::identity(n)),
                GeodesicKind::GeometricMean,
                m,
            )
            .map_err(err)?;
            let rep = check_star_shaped(&g, &m, &plan).map_err(err)?;
            ensure(rep.summary.passed(), || {
                format!("S{n}+ {kind:?}: {:?}", rep.summary)
            })?;
            worst = worst.max(rep.summary.max_excess);
        }
    }
    let m = HemiMetric::standard(MetricKind::Thompson, 3);
    let g = GeodesicFamily::new(
        Point::Vector(vec![1.0; 3]),
        GeodesicKind::ThompsonStraight,
        m,
    )
    .map_err(err)?;
    let rep = check_star_shaped(&g, &m, &plan).map_err(err)?;
    let neg = rep.summary.max_excess;
    ensure(neg > STAR_NEGATIVE, || {
        format!("straight Thompson geodesics: max excess only {neg}")
    })?;
    Ok(format!(
        "geometric mean worst excess {worst:.2e}; straight Thompson excess {neg:.3}"
    ))
}

fn criterion_7() -> Result<String, String> {
    let opts = GameRateOptions {
        horizon: GAME_HORIZON,
        ..Default::default()
    };
    let mut worst = 0.0_f64;
    for seed in 0..ONE_PLAYER_GAMES {
        let n = 1 + (seed % 8) as usize;
        let mut rng = rng_for(seed, 21);
        let w: Vec<Vec<f64>> = (0..n)
            .map(|_| {
                let mut row: Vec<f64> = (0..n)
                    .map(|_| {
                        if rng.random_bool(0.5) {
                            rng.random_range(-1.0..1.0)
                        } else {
                            f64::NEG_INFINITY
                        }
                    })
                    .collect();
                let j = rng.random_range(0..n);
                row[j] = rng.random_range(-1.0..1.0);
                row
            })
            .collect();
        let game = GameSpec::from_max_plus(&w).map_err(err)?;
        let res = game_rate(&game, &opts).map_err(err)?;
        let karp = karp_cycle_mean(&w).map_err(err)?;
        let brute = max_cycle_mean_brute(&w);
        ensure((karp - brute).abs() <= KARP_TOL, || {
            format!("seed {seed}: karp {karp} vs brute force {brute}")
        })?;
        let diff = (res.rho_plus - karp).abs();
        worst = worst.max(diff);
        ensure(diff <= KARP_TOL, || {
            format!("seed {seed}: ρ₊ {} vs cycle mean {karp}", res.rho_plus)
        })?;
        ensure(!res.omega_plus.states.is_empty(), || {
            format!("seed {seed}: no ω₊ state")
        })?;
        let mut x = vec![0.0; n];
        for k in 1..=GAME_HORIZON {
            x = max_plus_apply(&w, &x);
            for &s in &res.omega_plus.states {
                let margin = x[s] - k as f64 * karp;
                ensure(margin >= -res.omega_plus.tol, || {
                    format!("seed {seed}: ω₊ state {s} fails at k={k} by {margin}")
                })?;
            }
        }
    }
    for seed in 0..MATRIX_GAMES {
        let size = 2 + (seed % 2) as usize;
        let mut rng = rng_for(seed, 22);
        let a: Vec<Vec<f64>> = (0..size)
            .map(|_| (0..size).map(|_| rng.random_range(-1.0..1.0)).collect())
            .collect();
        let oracle = if size == 2 {
            game_value_2x2(a[0][0], a[0][1], a[1][0], a[1][1])
        } else {
            game_value_support(&a)
        };
        let game = GameSpec {
            states: 1,
            actions_a: vec![size],
            actions_b: vec![size],
            payoff: vec![a.clone()],
            transition: vec![vec![vec![vec![1.0]; size]; size]],
        };
        let res = game_rate(&game, &opts).map_err(err)?;
        let diff = (res.rho_plus - oracle).abs();
        ensure(diff <= MATRIX_GAME_TOL, || {
            format!("matrix game {seed}: ρ₊ {} vs oracle {oracle}", res.rho_plus)
        })?;
    }
    Ok(format!(
        "{ONE_PLAYER_GAMES} one-player games (max |ρ₊ − cycle mean| {worst:.2e}), {MATRIX_GAMES} matrix games"
    ))
}

/// Every extreme point of the dual unit ball whose pumping inequality holds
/// up to K, by direct iteration.
fn passing_forms(
    step: &dyn Fn(&[f64]) -> Vec<f64>,
    n: usize,
    norm: MetricKind,
    rate: f64,
) -> Vec<(f64, usize)> {
    let forms: Vec<(f64, usize)> = match norm {
        MetricKind::Top => (0..n).map(|i| (1.0, i)).collect(),
        _ => (0..n).flat_map(|i| [(1.0, i), (-1.0, i)]).collect(),
    };
    let mut ok = vec![true; forms.len()];
    let mut x = vec![0.0; n];
    for k in 1..=KN_HORIZON {
        x = step(&x);
        for (f, (s, i)) in forms.iter().enumerate() {
            let tol = 1e-9 * k as f64 * rate.abs().max(1.0) + 1e-9;
            if s * x[*i] < k as f64 * rate - tol {
                ok[f] = false;
            }
        }
    }
    forms
        .into_iter()
        .zip(ok)
        .filter(|(_, ok)| *ok)
        .map(|(f, _)| f)
        .collect()
}

fn criterion_8() -> Result<String, String> {
    let mut checked = 0;
    for seed in 0..20u64 {
        let n = 2 + (seed % 4) as usize;
        let mut rng = rng_for(seed, 31);
        let c: Vec<f64> = (0..n).map(|_| rng.random_range(-2.0..2.0)).collect();
        let a: Vec<Vec<f64>> = (0..n)
            .map(|_| (0..n).map(|_| rng.random_range(-1.0..2.0)).collect())
            .collect();
        for norm in [MetricKind::NormSup, MetricKind::Top] {
            let cases: [(OperatorSpec, Step); 2] = [
                (
                    OperatorSpec::Translation { c: c.clone(), norm },
                    Box::new(|x: &[f64]| x.iter().zip(&c).map(|(a, b)| a + b).collect()),
                ),
                (max_plus(&a), Box::new(|x: &[f64]| max_plus_apply(&a, x))),
            ];
            for (t, step) in cases {
                let mut p = ProblemFile::new(t.clone());
                p.metric = Some(HemiMetric::vector(norm, n));
                p.horizon = KN_HORIZON;
                let r = run_rate(&p).map_err(err)?;
                let ef = r
                    .eval_form
                    .ok_or_else(|| format!("seed {seed} {norm:?}: no evaluation form"))?;
                ensure(ef.status.is_verified() && ef.horizon == KN_HORIZON, || {
                    format!("seed {seed} {norm:?} {t:?}: {ef:?}")
                })?;
                let rho_bar = r.interval.upper.ok_or("no upper bound")?;
                ensure(
                    (ef.rate - rho_bar).abs() <= 1e-9 * rho_bar.abs().max(1.0),
                    || format!("seed {seed}: form rate {} vs ρ̄ {rho_bar}", ef.rate),
                )?;
                let form = match ef.form {
                    Some(EvalForm::Coordinate { index }) if norm == MetricKind::Top => (1.0, index),
                    Some(EvalForm::DualBall { ref phi }) if norm == MetricKind::NormSup => {
                        let nz: Vec<usize> = (0..n).filter(|&i| phi[i] != 0.0).collect();
                        ensure(nz.len() == 1 && phi[nz[0]].abs() == 1.0, || {
                            format!("{phi:?} is not extreme")
                        })?;
                        (phi[nz[0]], nz[0])
                    }
                    ref other => {
                        return Err(format!(
                            "seed {seed}: unexpected form {other:?} for {norm:?}"
                        ))
                    }
                };
                let passing = passing_forms(&*step, n, norm, ef.rate);
                ensure(passing.contains(&form), || {
                    format!("seed {seed} {norm:?}: form {form:?} not among passing {passing:?}")
                })?;
                checked += 1;
            }
        }
    }
    Ok(format!(
        "{checked} operators certified, each form confirmed by exhaustive search"
    ))
}

fn criterion_9() -> Result<String, String> {
    let mut samples = 0;
    let mut worst_apex = 0.0_f64;
    for (i, alpha) in [1.5, 2.0, 3.0].into_iter().enumerate() {
        for a in [
            Mat::from_rows(&[vec![0.5, 0.2], vec![0.2, 0.4]]).unwrap(),
            random_a(40 + i as u64),
        ] {
            let mut p = ProblemFile::new(riccati(a, alpha));
            p.samples = HOROBALL_SAMPLES;
            p.tol = HOROBALL_TOL;
            p.levels = vec![0.0, 0.5, 1.0, 2.0];
            let r = horoball_sections(&p).map_err(err)?;
            ensure(r.verdict == Verdict::Verified && r.checks.passed(), || {
                format!("α={alpha}: {:?}", r.checks)
            })?;
            let u = r.dual.u.as_matrix().map_err(err)?;
            let rf = lambda_max_2x2(u).ln();
            for l in &r.levels {
                let apex = u.scale((l.level - rf).exp());
                let want = [apex[(0, 0)], apex[(1, 1)], 2f64.sqrt() * apex[(0, 1)]];
                for (g, w) in l.apex.iter().zip(want) {
                    let e = (g - w).abs() / w.abs().max(1.0);
                    worst_apex = worst_apex.max(e);
                    ensure(e <= APEX_TOL, || {
                        format!("α={alpha} level {}: apex {:?} vs {want:?}", l.level, l.apex)
                    })?;
                }
                samples += l.samples.len();
            }
        }
    }
    ensure(samples >= 1000, || format!("only {samples} samples"))?;
    Ok(format!(
        "{samples} boundary samples, apex error {worst_apex:.1e}"
    ))
}
