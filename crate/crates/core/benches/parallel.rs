//! Sequential vs data-parallel kernels on the same inputs.

use criterion::{criterion_group, criterion_main, BenchmarkId, Criterion};
use escape_rate::certificates::{search_dual, DualSearchOptions};
use escape_rate::games::{shapley_apply, GameSpec};
use escape_rate::hemi::{
    check_star_shaped, check_triangle, GeodesicFamily, GeodesicKind, HemiMetric, MetricKind, Point,
};
use escape_rate::linalg::Mat;
use escape_rate::operators::{check_nonexpansive, OperatorSpec};
use escape_rate::sampling::{random_spd, rng_for, SamplePlan};
use escape_rate::Execution;
use rand::Rng;

const MODES: [(&str, Execution); 2] = [
    ("sequential", Execution::Sequential),
    ("parallel", Execution::Parallel),
];

fn samplers(c: &mut Criterion) {
    let mut group = c.benchmark_group("samplers");
    group.sample_size(10);
    let psd = HemiMetric::psd(MetricKind::Thompson, 4);
    let g = GeodesicFamily::new(
        Point::Matrix(Mat::identity(4)),
        GeodesicKind::GeometricMean,
        psd,
    )
    .unwrap();
    let mut rng = rng_for(1, 0);
    let ric = OperatorSpec::Riccati {
        a: random_spd(4, 1.0, &mut rng),
        b: random_spd(4, 1.0, &mut rng),
        m: random_spd(4, 1.0, &mut rng),
    };
    for (name, exec) in MODES {
        let plan = SamplePlan::new(3, 5_000).with_execution(exec);
        group.bench_with_input(BenchmarkId::new("triangle_psd4", name), &plan, |b, p| {
            b.iter(|| check_triangle(&psd, p).unwrap())
        });
        group.bench_with_input(BenchmarkId::new("star_shaped_psd4", name), &plan, |b, p| {
            b.iter(|| check_star_shaped(&g, &psd, p).unwrap())
        });
        group.bench_with_input(
            BenchmarkId::new("nonexpansive_riccati4", name),
            &plan,
            |b, p| b.iter(|| check_nonexpansive(&ric, &psd, p).unwrap()),
        );
    }
    group.finish();
}

fn dual_search(c: &mut Criterion) {
    let mut group = c.benchmark_group("search_dual");
    group.sample_size(10);
    let mut rng = rng_for(2, 0);
    let rows: Vec<Vec<f64>> = (0..12)
        .map(|_| (0..12).map(|_| rng.random_range(0.0..1.0)).collect())
        .collect();
    let t = OperatorSpec::NonnegMatrix {
        matrix: Mat::from_rows(&rows).unwrap(),
    };
    for (name, exec) in MODES {
        let opts = DualSearchOptions {
            execution: exec,
            ..Default::default()
        };
        group.bench_with_input(BenchmarkId::new("nonneg12", name), &opts, |b, o| {
            b.iter(|| search_dual(&t, &[], o).unwrap())
        });
    }
    group.finish();
}

fn large_game(states: usize, actions: usize) -> GameSpec {
    let mut rng = rng_for(3, 0);
    let mut row = || -> Vec<f64> {
        let mut q: Vec<f64> = (0..states).map(|_| rng.random_range(0.0..1.0)).collect();
        let s: f64 = q.iter().sum();
        q.iter_mut().for_each(|v| *v /= s);
        q
    };
    let transition = (0..states)
        .map(|_| {
            (0..actions)
                .map(|_| (0..actions).map(|_| row()).collect())
                .collect()
        })
        .collect();
    let payoff = (0..states)
        .map(|_| {
            (0..actions)
                .map(|_| (0..actions).map(|_| rng.random_range(-1.0..1.0)).collect())
                .collect()
        })
        .collect();
    GameSpec {
        states,
        actions_a: vec![actions; states],
        actions_b: vec![actions; states],
        payoff,
        transition,
    }
}

fn shapley(c: &mut Criterion) {
    let mut group = c.benchmark_group("shapley_apply");
    let game = large_game(200, 4);
    let x: Vec<f64> = (0..200).map(|i| (i as f64).sin()).collect();
    for (name, exec) in MODES {
        group.bench_function(BenchmarkId::new("200x4x4", name), |b| {
            b.iter(|| shapley_apply(&game, &x, exec).unwrap())
        });
    }
    group.finish();
}

criterion_group!(benches, samplers, dual_search, shapley);
criterion_main!(benches);
