//! Order gauges on ℝ₊ⁿ and S_n⁺.
//!
//! M(y/x) = inf{λ > 0 : λx ⪰ y} and m(z/x) = sup{λ > 0 : λx ⪯ z}. Both
//! accept boundary arguments; an undominated y gives M = +∞.

use serde::{Deserialize, Serialize};

use crate::error::{check_dim, domain, Result};
use crate::hemi::{Point, INTERIOR_REL_TOL};
use crate::linalg::{self, Mat, SymEigen};

/// Coordinates in [−CLAMP_TOL, 0) are clamped to zero.
pub const CLAMP_TOL: f64 = 1e-12;
/// Eigenvalues below this multiple of λmax are treated as zero for
/// pseudo-inverses.
pub const PINV_CUTOFF: f64 = 1e-10;
/// Above this condition number the PSD lower gauge switches to bisection.
const WELL_CONDITIONED: f64 = 1e6;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum ConeKind {
    Standard,
    Psd,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Classification {
    Interior,
    Boundary,
    Zero,
}

/// A validated element of a closed cone.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ConePoint {
    kind: ConeKind,
    data: Point,
    classification: Classification,
}

impl ConePoint {
    pub fn standard(v: Vec<f64>) -> Result<Self> {
        Self::new(Point::Vector(v))
    }

    pub fn psd(m: Mat) -> Result<Self> {
        Self::new(Point::Matrix(m))
    }

    /// Validates `p`: small negative coordinates are clamped, matrices must
    /// be symmetric with eigenvalues ≥ −1e-10·‖p‖.
    pub fn new(p: Point) -> Result<Self> {
        if !p.is_finite() || p.dim() == 0 {
            return Err(domain("cone point must be finite and nonempty"));
        }
        match p {
            Point::Vector(mut v) => {
                for x in v.iter_mut() {
                    if *x < 0.0 {
                        if *x < -CLAMP_TOL {
                            return Err(domain(format!("negative coordinate {x}")));
                        }
                        *x = 0.0;
                    }
                }
                let max = v.iter().copied().fold(0.0, f64::max);
                let min = v.iter().copied().fold(f64::INFINITY, f64::min);
                let classification = if max == 0.0 {
                    Classification::Zero
                } else if min > INTERIOR_REL_TOL * max {
                    Classification::Interior
                } else {
                    Classification::Boundary
                };
                Ok(ConePoint {
                    kind: ConeKind::Standard,
                    data: Point::Vector(v),
                    classification,
                })
            }
            Point::Matrix(m) => {
                let scale = m.max_abs();
                if m.asymmetry() > 1e-12 * scale.max(1.0) {
                    return Err(domain("matrix is not symmetric"));
                }
                let m = m.symmetrize();
                let e = SymEigen::new(&m);
                if e.min() < -1e-10 * m.frobenius() {
                    return Err(domain(format!(
                        "matrix has negative eigenvalue {}",
                        e.min()
                    )));
                }
                let classification = if e.max() <= 0.0 || scale == 0.0 {
                    Classification::Zero
                } else if e.min() > INTERIOR_REL_TOL * e.max() {
                    Classification::Interior
                } else {
                    Classification::Boundary
                };
                Ok(ConePoint {
                    kind: ConeKind::Psd,
                    data: Point::Matrix(m),
                    classification,
                })
            }
        }
    }

    pub fn kind(&self) -> ConeKind {
        self.kind
    }

    pub fn point(&self) -> &Point {
        &self.data
    }

    pub fn into_point(self) -> Point {
        self.data
    }

    pub fn classification(&self) -> Classification {
        self.classification
    }

    pub fn is_interior(&self) -> bool {
        self.classification == Classification::Interior
    }

    pub fn dim(&self) -> usize {
        self.data.dim()
    }

    pub fn norm(&self) -> f64 {
        self.data.norm()
    }

    /// Rescaled to unit Euclidean/Frobenius norm.
    pub fn normalized(&self) -> ConePoint {
        ConePoint {
            kind: self.kind,
            data: self.data.normalized(),
            classification: self.classification,
        }
    }

    pub fn scale(&self, s: f64) -> Result<ConePoint> {
        if s <= 0.0 {
            return Err(domain("cone points can only be scaled by positive factors"));
        }
        Ok(ConePoint {
            kind: self.kind,
            data: self.data.scale(s),
            classification: self.classification,
        })
    }
}

fn nonzero(x: &ConePoint) -> Result<()> {
    if x.classification == Classification::Zero {
        Err(domain("gauge of the zero vector"))
    } else {
        Ok(())
    }
}

fn same_cone(x: &ConePoint, y: &ConePoint) -> Result<()> {
    if x.kind != y.kind {
        return Err(domain("points belong to different cones"));
    }
    check_dim(x.dim(), y.dim())
}

/// M(y/x); `f64::INFINITY` when no multiple of x dominates y.
pub fn gauge_max(x: &ConePoint, y: &ConePoint) -> Result<f64> {
    nonzero(x)?;
    nonzero(y)?;
    same_cone(x, y)?;
    match (&x.data, &y.data) {
        (Point::Vector(a), Point::Vector(b)) => {
            let mut best = 0.0_f64;
            for (p, q) in a.iter().zip(b) {
                if *p > 0.0 {
                    best = best.max(q / p);
                } else if *q > 0.0 {
                    return Ok(f64::INFINITY);
                }
            }
            Ok(best)
        }
        (Point::Matrix(a), Point::Matrix(b)) => Ok(psd_gauge_max(a, b)),
        _ => unreachable!("kinds checked"),
    }
}

/// m(z/x); zero when no positive multiple of x lies below z.
pub fn gauge_min(x: &ConePoint, z: &ConePoint) -> Result<f64> {
    nonzero(x)?;
    nonzero(z)?;
    same_cone(x, z)?;
    match (&x.data, &z.data) {
        (Point::Vector(a), Point::Vector(b)) => Ok(a
            .iter()
            .zip(b)
            .filter(|(p, _)| **p > 0.0)
            .map(|(p, q)| q / p)
            .fold(f64::INFINITY, f64::min)),
        (Point::Matrix(a), Point::Matrix(b)) => Ok(psd_gauge_min(a, b)),
        _ => unreachable!("kinds checked"),
    }
}

fn psd_gauge_max(x: &Mat, y: &Mat) -> f64 {
    let ex = SymEigen::new(x);
    let cutoff = PINV_CUTOFF * ex.max();
    if ex.min() <= cutoff {
        // y must live in range(x)
        let p = linalg::range_projector(x, PINV_CUTOFF);
        let q = Mat::identity(x.dim()).sub(&p);
        let outside = q.matmul(y).matmul(&q);
        if SymEigen::new(&outside).max() > 1e-10 * y.max_abs() {
            return f64::INFINITY;
        }
    }
    let r = linalg::pinv_sqrt(x, PINV_CUTOFF);
    SymEigen::new(&r.matmul(y).matmul(&r).symmetrize())
        .max()
        .max(0.0)
}

fn psd_gauge_min(x: &Mat, z: &Mat) -> f64 {
    let ex = SymEigen::new(x);
    if ex.min() > 0.0 && ex.max() / ex.min() <= WELL_CONDITIONED {
        let r = linalg::spd_inv_sqrt(x);
        return SymEigen::new(&r.matmul(z).matmul(&r).symmetrize())
            .min()
            .max(0.0);
    }
    // Largest λ with z − λx ⪰ 0, bracketed by the Rayleigh quotient along
    // the top eigenvector of x.
    let w = ex.top_vector();
    let hi0 = z.quad_form(&w) / x.quad_form(&w);
    let eta = 1e-13 * z.max_abs().max(hi0 * x.max_abs());
    let feasible = |l: f64| SymEigen::new(&z.axpy(-l, x)).min() >= -eta;
    let (mut lo, mut hi) = (0.0, hi0);
    if feasible(hi) {
        return hi;
    }
    for _ in 0..200 {
        let mid = 0.5 * (lo + hi);
        if feasible(mid) {
            lo = mid;
        } else {
            hi = mid;
        }
        if hi - lo <= 1e-16 * hi {
            break;
        }
    }
    lo
}

/// A representative of an extreme ray: a basis vector of ℝ₊ⁿ or a unit
/// vector v standing for the projector vvᵀ.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "cone", rename_all = "kebab-case")]
pub enum ExtremeRay {
    Standard { index: usize, dim: usize },
    Psd { v: Vec<f64> },
}

impl ExtremeRay {
    pub fn psd(mut v: Vec<f64>) -> Result<Self> {
        let n = linalg::norm2(&v);
        if !(n > 0.0) || !n.is_finite() {
            return Err(domain("extreme ray needs a nonzero vector"));
        }
        v.iter_mut().for_each(|a| *a /= n);
        linalg::normalize_sign(&mut v);
        Ok(ExtremeRay::Psd { v })
    }

    pub fn kind(&self) -> ConeKind {
        match self {
            ExtremeRay::Standard { .. } => ConeKind::Standard,
            ExtremeRay::Psd { .. } => ConeKind::Psd,
        }
    }

    /// ⟨w, x⟩: the coordinate xᵢ or the quadratic form vᵀxv.
    pub fn pair(&self, x: &Point) -> Result<f64> {
        match (self, x) {
            (ExtremeRay::Standard { index, dim }, Point::Vector(v)) => {
                check_dim(*dim, v.len())?;
                Ok(v[*index])
            }
            (ExtremeRay::Psd { v }, Point::Matrix(m)) => {
                check_dim(v.len(), m.dim())?;
                Ok(m.quad_form(v))
            }
            _ => Err(domain("extreme ray and point belong to different cones")),
        }
    }

    /// The ray as an element of the cone.
    pub fn as_point(&self) -> Point {
        match self {
            ExtremeRay::Standard { index, dim } => {
                let mut e = vec![0.0; *dim];
                e[*index] = 1.0;
                Point::Vector(e)
            }
            ExtremeRay::Psd { v } => Point::Matrix(Mat::outer(v)),
        }
    }
}

/// An extreme ray w attaining ⟨w,y⟩/⟨w,x⟩ = M(y/x).
pub fn maximizing_extreme_ray(x: &ConePoint, y: &ConePoint) -> Result<ExtremeRay> {
    if !x.is_interior() {
        return Err(domain("maximizing extreme ray needs an interior x"));
    }
    nonzero(y)?;
    same_cone(x, y)?;
    match (&x.data, &y.data) {
        (Point::Vector(a), Point::Vector(b)) => {
            let mut best = (0, f64::NEG_INFINITY);
            for (i, (p, q)) in a.iter().zip(b).enumerate() {
                let r = q / p;
                if r > best.1 {
                    best = (i, r);
                }
            }
            Ok(ExtremeRay::Standard {
                index: best.0,
                dim: a.len(),
            })
        }
        (Point::Matrix(a), Point::Matrix(b)) => {
            let r = linalg::spd_inv_sqrt(a);
            let e = SymEigen::new(&r.matmul(b).matmul(&r).symmetrize()).top_vector();
            ExtremeRay::psd(r.mul_vec(&e))
        }
        _ => unreachable!("kinds checked"),
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum MartinVariant {
    Rfunk,
    RfunkPlus,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum MartinKind {
    Horofunction,
    InternalMartinPoint,
}

/// h(x) = −δ(x,u) + δ(x̄,u) with δ = RFunk or RFunk⁺.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ConeMartinFunction {
    u: ConePoint,
    basepoint: ConePoint,
    variant: MartinVariant,
    offset: f64,
}

impl ConeMartinFunction {
    pub fn new(u: ConePoint, basepoint: ConePoint, variant: MartinVariant) -> Result<Self> {
        nonzero(&u)?;
        if !basepoint.is_interior() {
            return Err(domain("Martin basepoint must be interior"));
        }
        same_cone(&u, &basepoint)?;
        let offset = variant_delta(variant, &basepoint, &u)?;
        Ok(ConeMartinFunction {
            u,
            basepoint,
            variant,
            offset,
        })
    }

    pub fn u(&self) -> &ConePoint {
        &self.u
    }

    pub fn basepoint(&self) -> &ConePoint {
        &self.basepoint
    }

    pub fn variant(&self) -> MartinVariant {
        self.variant
    }

    pub fn kind(&self) -> MartinKind {
        if self.u.is_interior() {
            MartinKind::InternalMartinPoint
        } else {
            MartinKind::Horofunction
        }
    }

    pub fn is_horofunction(&self) -> bool {
        self.kind() == MartinKind::Horofunction
    }

    pub fn value(&self, x: &ConePoint) -> Result<f64> {
        if !x.is_interior() {
            return Err(domain("Martin functions are evaluated at interior points"));
        }
        if x == &self.basepoint {
            return Ok(0.0);
        }
        Ok(-variant_delta(self.variant, x, &self.u)? + self.offset)
    }
}

fn variant_delta(variant: MartinVariant, x: &ConePoint, u: &ConePoint) -> Result<f64> {
    let r = gauge_max(x, u)?.ln();
    Ok(match variant {
        MartinVariant::Rfunk => r,
        MartinVariant::RfunkPlus => r.max(0.0),
    })
}
