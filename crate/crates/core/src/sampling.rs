//! Seeded sampling plans. Every sample draws from its own ChaCha stream
//! `(seed, index)`, so batches can be split across threads without changing
//! a single drawn value.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;
use serde::{Deserialize, Serialize};

use crate::hemi::{Point, SpaceKind};
use crate::linalg::Mat;
use crate::par::Execution;

pub const DEFAULT_SAMPLES: usize = 10_000;
pub const DEFAULT_TOL: f64 = 1e-9;

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct SamplePlan {
    pub seed: u64,
    pub count: usize,
    pub tol: f64,
    #[serde(default)]
    pub execution: Execution,
}

impl Default for SamplePlan {
    fn default() -> Self {
        SamplePlan {
            seed: 0,
            count: DEFAULT_SAMPLES,
            tol: DEFAULT_TOL,
            execution: Execution::default(),
        }
    }
}

impl SamplePlan {
    pub fn new(seed: u64, count: usize) -> Self {
        SamplePlan {
            seed,
            count,
            ..Default::default()
        }
    }

    pub fn with_tol(mut self, tol: f64) -> Self {
        self.tol = tol;
        self
    }

    pub fn with_execution(mut self, execution: Execution) -> Self {
        self.execution = execution;
        self
    }

    /// The generator for sample `index`.
    pub fn rng(&self, index: usize) -> ChaCha8Rng {
        rng_for(self.seed, index as u64)
    }
}

pub fn rng_for(seed: u64, stream: u64) -> ChaCha8Rng {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(stream);
    rng
}

/// Log-scale half width used for random cone points.
const LOG_SPREAD: f64 = 2.0;
/// Half width of the box used for points of vector spaces.
const BOX: f64 = 5.0;

/// A random point of `space`. Cone points have log-eigenvalues uniform in
/// [−2, 2]; vector-space points are uniform in a box of half width 5.
pub fn random_point<R: Rng>(space: SpaceKind, dim: usize, rng: &mut R) -> Point {
    match space {
        SpaceKind::StandardConeInterior => Point::Vector(
            (0..dim)
                .map(|_| rng.random_range(-LOG_SPREAD..LOG_SPREAD).exp())
                .collect(),
        ),
        SpaceKind::PsdConeInterior => Point::Matrix(random_spd(dim, LOG_SPREAD, rng)),
        SpaceKind::RealVectorSpace => {
            Point::Vector((0..dim).map(|_| rng.random_range(-BOX..BOX)).collect())
        }
        SpaceKind::TorusTimesLine => Point::Vector(vec![
            rng.random_range(0.0..1.0),
            rng.random_range(-BOX..BOX),
        ]),
    }
}

/// Q diag(exp(ℓ)) Qᵀ with Q Haar-ish orthogonal and ℓ uniform in [−spread, spread].
pub fn random_spd<R: Rng>(n: usize, spread: f64, rng: &mut R) -> Mat {
    let q = random_orthogonal(n, rng);
    let d: Vec<f64> = (0..n)
        .map(|_| rng.random_range(-spread..=spread).exp())
        .collect();
    let qd = Mat::from_fn(n, |i, j| q[(i, j)] * d[j]);
    qd.matmul(&q.transpose()).symmetrize()
}

/// Random PSD matrix of rank `rank` (sum of outer products of Gaussian vectors).
pub fn random_psd_rank<R: Rng>(n: usize, rank: usize, rng: &mut R) -> Mat {
    let mut m = Mat::zeros(n);
    for _ in 0..rank {
        let v: Vec<f64> = (0..n).map(|_| rng.sample(StandardNormal)).collect();
        m = m.add(&Mat::outer(&v));
    }
    m
}

/// Orthogonal matrix from Gram-Schmidt on Gaussian columns.
pub fn random_orthogonal<R: Rng>(n: usize, rng: &mut R) -> Mat {
    let mut cols: Vec<Vec<f64>> = Vec::with_capacity(n);
    while cols.len() < n {
        let mut v: Vec<f64> = (0..n).map(|_| rng.sample(StandardNormal)).collect();
        for c in &cols {
            let d: f64 = v.iter().zip(c).map(|(a, b)| a * b).sum();
            v.iter_mut().zip(c).for_each(|(a, b)| *a -= d * b);
        }
        let nv = crate::linalg::norm2(&v);
        if nv > 1e-8 {
            v.iter_mut().for_each(|a| *a /= nv);
            cols.push(v);
        }
    }
    Mat::from_fn(n, |i, j| cols[j][i])
}
