//! Small dense linear algebra for the matrix sizes this crate works with
//! (n ≤ 16): square matrices, Gauss-Jordan inversion and a cyclic Jacobi
//! eigensolver for symmetric matrices.

use serde::{Deserialize, Deserializer, Serialize, Serializer};

/// Off-diagonal threshold of the Jacobi sweeps, relative to the diagonal.
pub const JACOBI_TOL: f64 = 1e-13;
/// Maximum number of Jacobi sweeps.
pub const JACOBI_MAX_SWEEPS: usize = 100;

/// Dense square matrix stored row-major.
#[derive(Clone, Debug, PartialEq)]
pub struct Mat {
    n: usize,
    data: Vec<f64>,
}

impl Mat {
    pub fn zeros(n: usize) -> Self {
        Mat {
            n,
            data: vec![0.0; n * n],
        }
    }

    pub fn identity(n: usize) -> Self {
        let mut m = Mat::zeros(n);
        for i in 0..n {
            m[(i, i)] = 1.0;
        }
        m
    }

    pub fn diag(d: &[f64]) -> Self {
        let mut m = Mat::zeros(d.len());
        for (i, &v) in d.iter().enumerate() {
            m[(i, i)] = v;
        }
        m
    }

    /// Builds a matrix from rows; `None` when the rows do not form a square.
    pub fn from_rows(rows: &[Vec<f64>]) -> Option<Self> {
        let n = rows.len();
        if rows.iter().any(|r| r.len() != n) {
            return None;
        }
        Some(Mat {
            n,
            data: rows.iter().flatten().copied().collect(),
        })
    }

    pub fn from_fn(n: usize, f: impl Fn(usize, usize) -> f64) -> Self {
        let mut m = Mat::zeros(n);
        for i in 0..n {
            for j in 0..n {
                m[(i, j)] = f(i, j);
            }
        }
        m
    }

    /// The rank-one matrix v vᵀ.
    pub fn outer(v: &[f64]) -> Self {
        Mat::from_fn(v.len(), |i, j| v[i] * v[j])
    }

    pub fn dim(&self) -> usize {
        self.n
    }

    pub fn as_slice(&self) -> &[f64] {
        &self.data
    }

    pub fn rows(&self) -> Vec<Vec<f64>> {
        self.data
            .chunks(self.n.max(1))
            .map(|r| r.to_vec())
            .collect()
    }

    pub fn column(&self, j: usize) -> Vec<f64> {
        (0..self.n).map(|i| self[(i, j)]).collect()
    }

    pub fn transpose(&self) -> Mat {
        Mat::from_fn(self.n, |i, j| self[(j, i)])
    }

    pub fn matmul(&self, other: &Mat) -> Mat {
        assert_eq!(self.n, other.n, "matmul dimension mismatch");
        let n = self.n;
        let mut out = Mat::zeros(n);
        for i in 0..n {
            for k in 0..n {
                let a = self[(i, k)];
                if a == 0.0 {
                    continue;
                }
                for j in 0..n {
                    out.data[i * n + j] += a * other.data[k * n + j];
                }
            }
        }
        out
    }

    pub fn mul_vec(&self, v: &[f64]) -> Vec<f64> {
        assert_eq!(self.n, v.len(), "mul_vec dimension mismatch");
        (0..self.n)
            .map(|i| (0..self.n).map(|j| self[(i, j)] * v[j]).sum())
            .collect()
    }

    /// vᵀ A v.
    pub fn quad_form(&self, v: &[f64]) -> f64 {
        v.iter().zip(self.mul_vec(v)).map(|(a, b)| a * b).sum()
    }

    pub fn add(&self, other: &Mat) -> Mat {
        self.zip_with(other, |a, b| a + b)
    }

    pub fn sub(&self, other: &Mat) -> Mat {
        self.zip_with(other, |a, b| a - b)
    }

    pub fn scale(&self, s: f64) -> Mat {
        Mat {
            n: self.n,
            data: self.data.iter().map(|v| v * s).collect(),
        }
    }

    /// self + s·other
    pub fn axpy(&self, s: f64, other: &Mat) -> Mat {
        self.zip_with(other, |a, b| a + s * b)
    }

    fn zip_with(&self, other: &Mat, f: impl Fn(f64, f64) -> f64) -> Mat {
        assert_eq!(self.n, other.n, "dimension mismatch");
        Mat {
            n: self.n,
            data: self
                .data
                .iter()
                .zip(&other.data)
                .map(|(&a, &b)| f(a, b))
                .collect(),
        }
    }

    /// (A + Aᵀ)/2
    pub fn symmetrize(&self) -> Mat {
        Mat::from_fn(self.n, |i, j| 0.5 * (self[(i, j)] + self[(j, i)]))
    }

    pub fn max_abs(&self) -> f64 {
        self.data.iter().fold(0.0, |m, v| m.max(v.abs()))
    }

    pub fn frobenius(&self) -> f64 {
        self.data.iter().map(|v| v * v).sum::<f64>().sqrt()
    }

    pub fn trace(&self) -> f64 {
        (0..self.n).map(|i| self[(i, i)]).sum()
    }

    /// Frobenius inner product tr(AᵀB).
    pub fn dot(&self, other: &Mat) -> f64 {
        self.data.iter().zip(&other.data).map(|(a, b)| a * b).sum()
    }

    pub fn is_finite(&self) -> bool {
        self.data.iter().all(|v| v.is_finite())
    }

    /// Largest |A_ij − A_ji|.
    pub fn asymmetry(&self) -> f64 {
        let mut worst = 0.0_f64;
        for i in 0..self.n {
            for j in (i + 1)..self.n {
                worst = worst.max((self[(i, j)] - self[(j, i)]).abs());
            }
        }
        worst
    }

    /// Gauss-Jordan inverse with partial pivoting. `None` if a pivot
    /// vanishes relative to the matrix scale.
    pub fn inverse(&self) -> Option<Mat> {
        let n = self.n;
        let scale = self.max_abs();
        if scale == 0.0 || !self.is_finite() {
            return None;
        }
        let mut a = self.clone();
        let mut inv = Mat::identity(n);
        for col in 0..n {
            let (pivot_row, pivot_abs) =
                (col..n)
                    .map(|r| (r, a[(r, col)].abs()))
                    .fold(
                        (col, -1.0),
                        |best, cur| if cur.1 > best.1 { cur } else { best },
                    );
            if pivot_abs <= scale * 1e-300_f64.max(f64::EPSILON * 1e-3) {
                return None;
            }
            if pivot_row != col {
                for j in 0..n {
                    a.data.swap(col * n + j, pivot_row * n + j);
                    inv.data.swap(col * n + j, pivot_row * n + j);
                }
            }
            let p = a[(col, col)];
            for j in 0..n {
                a.data[col * n + j] /= p;
                inv.data[col * n + j] /= p;
            }
            for r in 0..n {
                if r == col {
                    continue;
                }
                let f = a[(r, col)];
                if f == 0.0 {
                    continue;
                }
                for j in 0..n {
                    a.data[r * n + j] -= f * a.data[col * n + j];
                    inv.data[r * n + j] -= f * inv.data[col * n + j];
                }
            }
        }
        Some(inv)
    }

    /// 1-norm condition number estimate ‖A‖₁‖A⁻¹‖₁ (infinite if singular).
    pub fn condition_number(&self) -> f64 {
        let norm1 = |m: &Mat| {
            (0..m.n)
                .map(|j| (0..m.n).map(|i| m[(i, j)].abs()).sum::<f64>())
                .fold(0.0, f64::max)
        };
        match self.inverse() {
            Some(inv) => norm1(self) * norm1(&inv),
            None => f64::INFINITY,
        }
    }
}

impl std::ops::Index<(usize, usize)> for Mat {
    type Output = f64;
    fn index(&self, (i, j): (usize, usize)) -> &f64 {
        &self.data[i * self.n + j]
    }
}

impl std::ops::IndexMut<(usize, usize)> for Mat {
    fn index_mut(&mut self, (i, j): (usize, usize)) -> &mut f64 {
        &mut self.data[i * self.n + j]
    }
}

impl Serialize for Mat {
    fn serialize<S: Serializer>(&self, s: S) -> Result<S::Ok, S::Error> {
        self.rows().serialize(s)
    }
}

impl<'de> Deserialize<'de> for Mat {
    fn deserialize<D: Deserializer<'de>>(d: D) -> Result<Self, D::Error> {
        let rows = Vec::<Vec<f64>>::deserialize(d)?;
        Mat::from_rows(&rows).ok_or_else(|| serde::de::Error::custom("matrix must be square"))
    }
}

/// Eigendecomposition of a symmetric matrix: eigenvalues ascending, the
/// matching unit eigenvectors are the columns of `vectors`.
#[derive(Clone, Debug)]
pub struct SymEigen {
    pub values: Vec<f64>,
    pub vectors: Mat,
}

impl SymEigen {
    /// Cyclic Jacobi on the symmetric part of `a`.
    pub fn new(a: &Mat) -> SymEigen {
        let n = a.dim();
        let mut m = a.symmetrize();
        let mut v = Mat::identity(n);
        let floor = m.max_abs() * 1e-300;
        for _ in 0..JACOBI_MAX_SWEEPS {
            let mut rotated = false;
            for p in 0..n {
                for q in (p + 1)..n {
                    let apq = m[(p, q)];
                    let thresh = JACOBI_TOL * (m[(p, p)].abs() * m[(q, q)].abs()).sqrt();
                    if apq.abs() <= thresh.max(floor) {
                        continue;
                    }
                    rotated = true;
                    let theta = (m[(q, q)] - m[(p, p)]) / (2.0 * apq);
                    let t = theta.signum() / (theta.abs() + (theta * theta + 1.0).sqrt());
                    let t = if theta == 0.0 { 1.0 } else { t };
                    let c = 1.0 / (t * t + 1.0).sqrt();
                    let s = t * c;
                    for k in 0..n {
                        let mkp = m[(k, p)];
                        let mkq = m[(k, q)];
                        m[(k, p)] = c * mkp - s * mkq;
                        m[(k, q)] = s * mkp + c * mkq;
                    }
                    for k in 0..n {
                        let mpk = m[(p, k)];
                        let mqk = m[(q, k)];
                        m[(p, k)] = c * mpk - s * mqk;
                        m[(q, k)] = s * mpk + c * mqk;
                    }
                    m[(p, q)] = 0.0;
                    m[(q, p)] = 0.0;
                    for k in 0..n {
                        let vkp = v[(k, p)];
                        let vkq = v[(k, q)];
                        v[(k, p)] = c * vkp - s * vkq;
                        v[(k, q)] = s * vkp + c * vkq;
                    }
                }
            }
            if !rotated {
                break;
            }
        }
        let mut order: Vec<usize> = (0..n).collect();
        order.sort_by(|&i, &j| m[(i, i)].total_cmp(&m[(j, j)]));
        let values = order.iter().map(|&i| m[(i, i)]).collect();
        let mut vectors = Mat::zeros(n);
        for (col, &src) in order.iter().enumerate() {
            let mut e = v.column(src);
            normalize_sign(&mut e);
            for (row, x) in e.into_iter().enumerate() {
                vectors[(row, col)] = x;
            }
        }
        SymEigen { values, vectors }
    }

    pub fn min(&self) -> f64 {
        self.values.first().copied().unwrap_or(0.0)
    }

    pub fn max(&self) -> f64 {
        self.values.last().copied().unwrap_or(0.0)
    }

    pub fn vector(&self, k: usize) -> Vec<f64> {
        self.vectors.column(k)
    }

    /// V diag(f(λ)) Vᵀ
    pub fn map(&self, f: impl Fn(f64) -> f64) -> Mat {
        let n = self.values.len();
        let fl: Vec<f64> = self.values.iter().map(|&l| f(l)).collect();
        let mut out = Mat::zeros(n);
        for i in 0..n {
            for j in i..n {
                let s: f64 = (0..n)
                    .map(|k| self.vectors[(i, k)] * fl[k] * self.vectors[(j, k)])
                    .sum();
                out[(i, j)] = s;
                out[(j, i)] = s;
            }
        }
        out
    }

    /// Unit eigenvector for the largest eigenvalue. Among eigenvalues tied
    /// with the maximum (relative 1e-12), the lexicographically smallest
    /// sign-normalized vector is returned.
    pub fn top_vector(&self) -> Vec<f64> {
        let top = self.max();
        let scale = self.values.iter().fold(0.0_f64, |m, v| m.max(v.abs()));
        let tied: Vec<Vec<f64>> = (0..self.values.len())
            .filter(|&k| self.values[k] >= top - 1e-12 * scale)
            .map(|k| self.vector(k))
            .collect();
        tied.into_iter()
            .min_by(|a, b| lex_cmp(a, b))
            .expect("nonempty spectrum")
    }
}

fn lex_cmp(a: &[f64], b: &[f64]) -> std::cmp::Ordering {
    for (x, y) in a.iter().zip(b) {
        match x.total_cmp(y) {
            std::cmp::Ordering::Equal => continue,
            o => return o,
        }
    }
    std::cmp::Ordering::Equal
}

/// Flips `v` so its first nonzero component is positive.
pub fn normalize_sign(v: &mut [f64]) {
    if let Some(first) = v.iter().find(|x| x.abs() > 1e-14) {
        if *first < 0.0 {
            v.iter_mut().for_each(|x| *x = -*x);
        }
    }
}

pub fn norm2(v: &[f64]) -> f64 {
    v.iter().map(|x| x * x).sum::<f64>().sqrt()
}

/// A^s for a symmetric positive definite A.
pub fn spd_pow(a: &Mat, s: f64) -> Mat {
    SymEigen::new(a).map(|l| l.max(0.0).powf(s))
}

/// A^{-1/2} for a symmetric positive definite A.
pub fn spd_inv_sqrt(a: &Mat) -> Mat {
    SymEigen::new(a).map(|l| 1.0 / l.sqrt())
}

/// Square root of the Moore-Penrose inverse; eigenvalues below
/// `cutoff · λmax` are treated as zero.
pub fn pinv_sqrt(a: &Mat, cutoff: f64) -> Mat {
    let e = SymEigen::new(a);
    let thr = cutoff * e.max();
    e.map(|l| if l > thr { 1.0 / l.sqrt() } else { 0.0 })
}

/// Orthogonal projector onto the span of eigenvectors with λ > cutoff·λmax.
pub fn range_projector(a: &Mat, cutoff: f64) -> Mat {
    let e = SymEigen::new(a);
    let thr = cutoff * e.max();
    e.map(|l| if l > thr { 1.0 } else { 0.0 })
}

/// Matrix exponential of a symmetric matrix.
pub fn sym_exp(a: &Mat) -> Mat {
    SymEigen::new(a).map(f64::exp)
}

/// Matrix logarithm of a symmetric positive definite matrix.
pub fn spd_log(a: &Mat) -> Mat {
    SymEigen::new(a).map(f64::ln)
}

/// Rank of a list of row vectors by Gaussian elimination.
pub fn rank(rows: &[Vec<f64>], tol: f64) -> usize {
    let mut a: Vec<Vec<f64>> = rows.to_vec();
    let cols = a.first().map_or(0, |r| r.len());
    let scale = a
        .iter()
        .flatten()
        .fold(0.0_f64, |m, v| m.max(v.abs()))
        .max(f64::MIN_POSITIVE);
    let mut rank = 0;
    for c in 0..cols {
        let Some(p) = (rank..a.len()).max_by(|&i, &j| a[i][c].abs().total_cmp(&a[j][c].abs()))
        else {
            break;
        };
        if a[p][c].abs() <= tol * scale {
            continue;
        }
        a.swap(rank, p);
        for r in 0..a.len() {
            if r != rank {
                let f = a[r][c] / a[rank][c];
                for k in c..cols {
                    a[r][k] -= f * a[rank][k];
                }
            }
        }
        rank += 1;
    }
    rank
}
