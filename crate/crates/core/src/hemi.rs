//! Hemi-metrics, hemi-norms and geodesic families.
//!
//! A hemi-metric satisfies δ(x,x) = 0 and the triangle inequality but may be
//! asymmetric or negative. Every cone metric here is a symmetric gauge ν of
//! the log-spectrum of x⁻¹y: RFunk takes the max, RFunk⁺ the positive part of
//! the max, Thompson the max modulus and Hilbert the spread. Hilbert vanishes
//! on rays, so it is only a pseudo-hemi-metric and separation checks skip it.

use serde::{Deserialize, Serialize};

use crate::error::{check_dim, domain, invalid, Error, Result};
use crate::linalg::{self, Mat, SymEigen};
use crate::par;
use crate::sampling::{random_point, SamplePlan};
use rand::Rng;

/// Relative threshold separating the interior of a cone from its boundary.
pub const INTERIOR_REL_TOL: f64 = 1e-10;

/// A point of one of the supported spaces: a coordinate vector (standard
/// cone, real vector space, torus × line as `[x, t]`) or a symmetric matrix.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum Point {
    Vector(Vec<f64>),
    Matrix(Mat),
}

impl Point {
    pub fn dim(&self) -> usize {
        match self {
            Point::Vector(v) => v.len(),
            Point::Matrix(m) => m.dim(),
        }
    }

    pub fn as_vector(&self) -> Result<&[f64]> {
        match self {
            Point::Vector(v) => Ok(v),
            Point::Matrix(_) => Err(domain("expected a vector, found a matrix")),
        }
    }

    pub fn as_matrix(&self) -> Result<&Mat> {
        match self {
            Point::Matrix(m) => Ok(m),
            Point::Vector(_) => Err(domain("expected a matrix, found a vector")),
        }
    }

    pub fn is_finite(&self) -> bool {
        match self {
            Point::Vector(v) => v.iter().all(|x| x.is_finite()),
            Point::Matrix(m) => m.is_finite(),
        }
    }

    /// Euclidean (vectors) or Frobenius (matrices) norm.
    pub fn norm(&self) -> f64 {
        match self {
            Point::Vector(v) => linalg::norm2(v),
            Point::Matrix(m) => m.frobenius(),
        }
    }

    pub fn scale(&self, s: f64) -> Point {
        match self {
            Point::Vector(v) => Point::Vector(v.iter().map(|x| x * s).collect()),
            Point::Matrix(m) => Point::Matrix(m.scale(s)),
        }
    }

    /// a·self + b·other
    pub fn combine(&self, a: f64, other: &Point, b: f64) -> Result<Point> {
        check_dim(self.dim(), other.dim())?;
        match (self, other) {
            (Point::Vector(x), Point::Vector(y)) => Ok(Point::Vector(
                x.iter().zip(y).map(|(p, q)| a * p + b * q).collect(),
            )),
            (Point::Matrix(x), Point::Matrix(y)) => Ok(Point::Matrix(x.scale(a).axpy(b, y))),
            _ => Err(domain("cannot combine a vector with a matrix")),
        }
    }

    pub fn sub(&self, other: &Point) -> Result<Point> {
        self.combine(1.0, other, -1.0)
    }

    /// Rescaled to unit norm; the zero point is returned unchanged.
    pub fn normalized(&self) -> Point {
        let n = self.norm();
        if n > 0.0 {
            self.scale(1.0 / n)
        } else {
            self.clone()
        }
    }

    /// Euclidean distance between the coordinate representations.
    pub fn euclidean_distance(&self, other: &Point) -> Result<f64> {
        Ok(self.sub(other)?.norm())
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum SpaceKind {
    StandardConeInterior,
    PsdConeInterior,
    RealVectorSpace,
    TorusTimesLine,
}

impl SpaceKind {
    pub fn is_cone(self) -> bool {
        matches!(
            self,
            SpaceKind::StandardConeInterior | SpaceKind::PsdConeInterior
        )
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum MetricKind {
    NormSup,
    NormL2,
    Top,
    Bottom,
    Rfunk,
    RfunkPlus,
    Thompson,
    Hilbert,
    DeltaNu,
    /// d_T(x,x') + |t − t'| on the torus × line.
    Torus,
}

impl MetricKind {
    pub fn is_cone_metric(self) -> bool {
        matches!(
            self,
            MetricKind::Rfunk
                | MetricKind::RfunkPlus
                | MetricKind::Thompson
                | MetricKind::Hilbert
                | MetricKind::DeltaNu
        )
    }

    /// Whether δ(x,y) = δ(y,x) always holds.
    pub fn is_symmetric(self) -> bool {
        matches!(
            self,
            MetricKind::NormSup
                | MetricKind::NormL2
                | MetricKind::Thompson
                | MetricKind::Hilbert
                | MetricKind::Torus
        )
    }
}

/// Symmetric gauge ν applied to the log-spectrum of x⁻¹y.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum SpectralGauge {
    /// max |μᵢ| (Thompson)
    MaxAbs,
    /// max μᵢ − min μᵢ (Hilbert)
    Spread,
    /// max μᵢ (RFunk)
    Max,
    /// max(max μᵢ, 0) (RFunk⁺)
    MaxPositive,
    /// ‖μ‖₂ (invariant Riemannian metric)
    Euclidean,
}

impl SpectralGauge {
    pub fn apply(self, mu: &[f64]) -> f64 {
        let max = mu.iter().copied().fold(f64::NEG_INFINITY, f64::max);
        let min = mu.iter().copied().fold(f64::INFINITY, f64::min);
        match self {
            SpectralGauge::MaxAbs => max.max(-min),
            SpectralGauge::Spread => max - min,
            SpectralGauge::Max => max,
            SpectralGauge::MaxPositive => max.max(0.0),
            SpectralGauge::Euclidean => linalg::norm2(mu),
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
struct MetricDescriptor {
    space: SpaceKind,
    kind: MetricKind,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    nu: Option<SpectralGauge>,
    dim: usize,
}

/// A named hemi-metric on a declared space.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "MetricDescriptor", into = "MetricDescriptor")]
pub struct HemiMetric {
    space: SpaceKind,
    kind: MetricKind,
    nu: Option<SpectralGauge>,
    dim: usize,
}

impl TryFrom<MetricDescriptor> for HemiMetric {
    type Error = Error;
    fn try_from(d: MetricDescriptor) -> Result<Self> {
        HemiMetric::new(d.space, d.kind, d.nu, d.dim)
    }
}

impl From<HemiMetric> for MetricDescriptor {
    fn from(m: HemiMetric) -> Self {
        MetricDescriptor {
            space: m.space,
            kind: m.kind,
            nu: m.nu,
            dim: m.dim,
        }
    }
}

impl HemiMetric {
    pub fn new(
        space: SpaceKind,
        kind: MetricKind,
        nu: Option<SpectralGauge>,
        dim: usize,
    ) -> Result<Self> {
        if dim == 0 {
            return Err(invalid("dimension must be positive"));
        }
        let ok = match kind {
            MetricKind::NormSup | MetricKind::NormL2 | MetricKind::Top | MetricKind::Bottom => {
                space == SpaceKind::RealVectorSpace
            }
            MetricKind::Torus => space == SpaceKind::TorusTimesLine && dim == 2,
            _ => space.is_cone(),
        };
        if !ok {
            return Err(invalid(format!(
                "metric {kind:?} is not defined on {space:?} (dim {dim})"
            )));
        }
        if (kind == MetricKind::DeltaNu) != nu.is_some() {
            return Err(invalid("a gauge ν is required exactly for delta-nu"));
        }
        Ok(HemiMetric {
            space,
            kind,
            nu,
            dim,
        })
    }

    pub fn standard(kind: MetricKind, dim: usize) -> Self {
        Self::new(SpaceKind::StandardConeInterior, kind, None, dim).expect("cone metric")
    }

    pub fn psd(kind: MetricKind, dim: usize) -> Self {
        Self::new(SpaceKind::PsdConeInterior, kind, None, dim).expect("cone metric")
    }

    pub fn vector(kind: MetricKind, dim: usize) -> Self {
        Self::new(SpaceKind::RealVectorSpace, kind, None, dim).expect("vector-space metric")
    }

    pub fn torus() -> Self {
        Self::new(SpaceKind::TorusTimesLine, MetricKind::Torus, None, 2).expect("torus metric")
    }

    pub fn delta_nu(space: SpaceKind, nu: SpectralGauge, dim: usize) -> Result<Self> {
        Self::new(space, MetricKind::DeltaNu, Some(nu), dim)
    }

    pub fn space(&self) -> SpaceKind {
        self.space
    }

    pub fn kind(&self) -> MetricKind {
        self.kind
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn nu(&self) -> Option<SpectralGauge> {
        self.nu
    }

    /// The same metric kind on another space/dimension.
    pub fn with_kind(&self, kind: MetricKind) -> Result<Self> {
        Self::new(self.space, kind, None, self.dim)
    }

    /// The gauge realizing a cone metric on log-spectra.
    pub fn spectral_gauge(&self) -> Option<SpectralGauge> {
        match self.kind {
            MetricKind::Rfunk => Some(SpectralGauge::Max),
            MetricKind::RfunkPlus => Some(SpectralGauge::MaxPositive),
            MetricKind::Thompson => Some(SpectralGauge::MaxAbs),
            MetricKind::Hilbert => Some(SpectralGauge::Spread),
            MetricKind::DeltaNu => self.nu,
            _ => None,
        }
    }

    /// Verifies that `x` belongs to the space (interior for cones).
    pub fn check_point(&self, x: &Point) -> Result<()> {
        check_dim(self.dim, x.dim())?;
        if !x.is_finite() {
            return Err(domain("point has non-finite coordinates"));
        }
        match self.space {
            SpaceKind::StandardConeInterior => {
                let v = x.as_vector()?;
                if !is_standard_interior(v) {
                    return Err(domain("point is not in the interior of the standard cone"));
                }
            }
            SpaceKind::PsdConeInterior => {
                let m = x.as_matrix()?;
                if !is_psd_interior(m) {
                    return Err(domain("matrix is not positive definite"));
                }
            }
            SpaceKind::RealVectorSpace | SpaceKind::TorusTimesLine => {
                x.as_vector()?;
            }
        }
        Ok(())
    }

    pub fn delta(&self, x: &Point, y: &Point) -> Result<f64> {
        self.check_point(x)?;
        self.check_point(y)?;
        if x == y {
            return Ok(0.0);
        }
        match self.kind {
            MetricKind::NormSup | MetricKind::NormL2 | MetricKind::Top | MetricKind::Bottom => {
                let (x, y) = (x.as_vector()?, y.as_vector()?);
                let diff: Vec<f64> = y.iter().zip(x).map(|(a, b)| a - b).collect();
                Ok(match self.kind {
                    MetricKind::NormSup => HemiNorm::sup(self.dim).eval(&diff),
                    MetricKind::Top => HemiNorm::top(self.dim).eval(&diff),
                    MetricKind::Bottom => HemiNorm::bottom(self.dim).eval(&diff),
                    _ => linalg::norm2(&diff),
                })
            }
            MetricKind::Torus => {
                let (p, q) = (x.as_vector()?, y.as_vector()?);
                Ok(torus_distance(p[0], q[0]) + (p[1] - q[1]).abs())
            }
            _ => {
                let gauge = self.spectral_gauge().expect("cone metric has a gauge");
                Ok(gauge.apply(&log_spectrum_unchecked(x, y)?))
            }
        }
    }

    /// δ(eᵃx, eᵇy) for cone metrics, without forming the rescaled points.
    pub fn delta_scaled(&self, x: &Point, a: f64, y: &Point, b: f64) -> Result<f64> {
        if a == 0.0 && b == 0.0 {
            return self.delta(x, y);
        }
        let gauge = self
            .spectral_gauge()
            .ok_or_else(|| domain("log-scaled points only exist on cones"))?;
        self.check_point(x)?;
        self.check_point(y)?;
        let mut mu = if x == y {
            vec![0.0; self.dim]
        } else {
            log_spectrum_unchecked(x, y)?
        };
        mu.iter_mut().for_each(|m| *m += b - a);
        Ok(gauge.apply(&mu))
    }

    /// The associated metric d(x,y) = max(δ(x,y), δ(y,x)).
    pub fn induced(&self, x: &Point, y: &Point) -> Result<f64> {
        Ok(self.delta(x, y)?.max(self.delta(y, x)?))
    }
}

/// Canonical distance on ℝ/ℤ.
pub fn torus_distance(a: f64, b: f64) -> f64 {
    let d = (a - b).rem_euclid(1.0);
    d.min(1.0 - d)
}

pub fn is_standard_interior(v: &[f64]) -> bool {
    let max = v.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    let min = v.iter().copied().fold(f64::INFINITY, f64::min);
    max > 0.0 && min > INTERIOR_REL_TOL * max
}

pub fn is_psd_interior(m: &Mat) -> bool {
    if m.asymmetry() > 1e-12 * m.max_abs().max(1.0) {
        return false;
    }
    let e = SymEigen::new(m);
    e.max() > 0.0 && e.min() > INTERIOR_REL_TOL * e.max()
}

/// log λᵢ(x⁻¹y), computed as log(yᵢ/xᵢ) on the standard cone and from
/// x^{-1/2} y x^{-1/2} on the PSD cone. Both points must be interior.
pub fn log_spectrum(x: &Point, y: &Point) -> Result<Vec<f64>> {
    check_dim(x.dim(), y.dim())?;
    match (x, y) {
        (Point::Vector(a), Point::Vector(b)) => {
            if !is_standard_interior(a) || !is_standard_interior(b) {
                return Err(domain("log-spectrum needs interior points"));
            }
        }
        (Point::Matrix(a), Point::Matrix(b)) => {
            if !is_psd_interior(a) || !is_psd_interior(b) {
                return Err(domain("log-spectrum needs positive definite matrices"));
            }
        }
        _ => return Err(domain("points of different kinds")),
    }
    log_spectrum_unchecked(x, y)
}

fn log_spectrum_unchecked(x: &Point, y: &Point) -> Result<Vec<f64>> {
    match (x, y) {
        (Point::Vector(a), Point::Vector(b)) => {
            Ok(a.iter().zip(b).map(|(p, q)| (q / p).ln()).collect())
        }
        (Point::Matrix(a), Point::Matrix(b)) => {
            let r = linalg::spd_inv_sqrt(a);
            let c = r.matmul(b).matmul(&r);
            Ok(SymEigen::new(&c).values.iter().map(|l| l.ln()).collect())
        }
        _ => Err(domain("points of different kinds")),
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum HemiNormKind {
    Sup,
    Top,
    Bottom,
    CustomFiniteE,
}

/// p(z) = max over a finite set E of linear forms φ(z).
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct HemiNorm {
    kind: HemiNormKind,
    forms: Vec<Vec<f64>>,
    dim: usize,
}

impl HemiNorm {
    /// ‖z‖∞, with E = {±eᵢ}.
    pub fn sup(dim: usize) -> Self {
        let mut forms = Vec::with_capacity(2 * dim);
        for i in 0..dim {
            forms.push(unit(dim, i, 1.0));
            forms.push(unit(dim, i, -1.0));
        }
        HemiNorm {
            kind: HemiNormKind::Sup,
            forms,
            dim,
        }
    }

    /// max zᵢ, with E = {eᵢ}.
    pub fn top(dim: usize) -> Self {
        HemiNorm {
            kind: HemiNormKind::Top,
            forms: (0..dim).map(|i| unit(dim, i, 1.0)).collect(),
            dim,
        }
    }

    /// −min zᵢ, with E = {−eᵢ}.
    pub fn bottom(dim: usize) -> Self {
        HemiNorm {
            kind: HemiNormKind::Bottom,
            forms: (0..dim).map(|i| unit(dim, i, -1.0)).collect(),
            dim,
        }
    }

    pub fn custom(forms: Vec<Vec<f64>>) -> Result<Self> {
        let dim = forms.first().map(Vec::len).unwrap_or(0);
        if dim == 0 || forms.iter().any(|f| f.len() != dim) {
            return Err(invalid("forms must be nonempty and of equal length"));
        }
        Ok(HemiNorm {
            kind: HemiNormKind::CustomFiniteE,
            forms,
            dim,
        })
    }

    pub fn kind(&self) -> HemiNormKind {
        self.kind
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    /// The finite set E.
    pub fn forms(&self) -> &[Vec<f64>] {
        &self.forms
    }

    pub fn eval(&self, z: &[f64]) -> f64 {
        match self.kind {
            HemiNormKind::Sup => z.iter().fold(0.0, |m, v| m.max(v.abs())),
            HemiNormKind::Top => z.iter().copied().fold(f64::NEG_INFINITY, f64::max),
            HemiNormKind::Bottom => -z.iter().copied().fold(f64::INFINITY, f64::min),
            HemiNormKind::CustomFiniteE => self
                .forms
                .iter()
                .map(|f| dot(f, z))
                .fold(f64::NEG_INFINITY, f64::max),
        }
    }

    /// p(z) = p(−z) = 0 forces z = 0 exactly when E spans the dual space.
    pub fn is_separating(&self) -> bool {
        linalg::rank(&self.forms, 1e-12) == self.dim
    }

    /// Sampled check of separation: returns the smallest max(p(z), p(−z))
    /// observed over unit vectors z (positive for a separating hemi-norm).
    pub fn min_symmetrized_on_sphere(&self, plan: &SamplePlan) -> f64 {
        let vals = par::map_range(plan.execution, plan.count, |i| {
            let mut rng = plan.rng(i);
            let mut z: Vec<f64> = (0..self.dim).map(|_| rng.random_range(-1.0..1.0)).collect();
            let n = linalg::norm2(&z).max(1e-300);
            z.iter_mut().for_each(|v| *v /= n);
            let neg: Vec<f64> = z.iter().map(|v| -v).collect();
            self.eval(&z).max(self.eval(&neg))
        });
        vals.into_iter().fold(f64::INFINITY, f64::min)
    }
}

fn unit(dim: usize, i: usize, sign: f64) -> Vec<f64> {
    let mut v = vec![0.0; dim];
    v[i] = sign;
    v
}

pub(crate) fn dot(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum GeodesicKind {
    StraightLine,
    ThompsonStraight,
    GeometricMean,
}

/// A family of geodesics γ_y from a common centre to every point y.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct GeodesicFamily {
    pub center: Point,
    pub kind: GeodesicKind,
    pub metric: HemiMetric,
}

impl GeodesicFamily {
    pub fn new(center: Point, kind: GeodesicKind, metric: HemiMetric) -> Result<Self> {
        metric.check_point(&center)?;
        let ok = match kind {
            GeodesicKind::StraightLine => metric.space() != SpaceKind::TorusTimesLine,
            GeodesicKind::ThompsonStraight | GeodesicKind::GeometricMean => {
                metric.space().is_cone()
            }
        };
        if !ok {
            return Err(invalid(format!(
                "{kind:?} geodesics are not available on {:?}",
                metric.space()
            )));
        }
        Ok(GeodesicFamily {
            center,
            kind,
            metric,
        })
    }

    /// γ_y(s).
    pub fn point(&self, y: &Point, s: f64) -> Result<Point> {
        if !(0.0..=1.0).contains(&s) {
            return Err(invalid(format!("geodesic parameter {s} outside [0,1]")));
        }
        self.metric.check_point(y)?;
        if s == 0.0 {
            return Ok(self.center.clone());
        }
        match self.kind {
            GeodesicKind::StraightLine => self.center.combine(1.0 - s, y, s),
            GeodesicKind::ThompsonStraight => {
                let rfunk = self.metric.with_kind(MetricKind::Rfunk)?;
                let beta = rfunk.delta(&self.center, y)?.exp();
                let alpha = (-rfunk.delta(y, &self.center)?).exp();
                let (c_center, c_y) = thompson_straight_coefficients(beta, alpha, s);
                self.center.combine(c_center, y, c_y)
            }
            GeodesicKind::GeometricMean => match (&self.center, y) {
                (Point::Vector(z), Point::Vector(v)) => Ok(Point::Vector(
                    z.iter()
                        .zip(v)
                        .map(|(a, b)| a.powf(1.0 - s) * b.powf(s))
                        .collect(),
                )),
                (Point::Matrix(z), Point::Matrix(v)) => {
                    Ok(Point::Matrix(geometric_mean_point(z, v, s)))
                }
                _ => Err(domain("points of different kinds")),
            },
        }
    }
}

/// Z^{1/2} (Z^{-1/2} Y Z^{-1/2})^s Z^{1/2}
pub fn geometric_mean_point(z: &Mat, y: &Mat, s: f64) -> Mat {
    let ez = SymEigen::new(z);
    let half = ez.map(f64::sqrt);
    let inv_half = ez.map(|l| 1.0 / l.sqrt());
    let inner = inv_half.matmul(y).matmul(&inv_half);
    let powered = linalg::spd_pow(&inner, s);
    half.matmul(&powered).matmul(&half).symmetrize()
}

/// Coefficients (c_centre, c_y) of the straight-line Thompson geodesic
/// γ(s) = c_centre·x̄ + c_y·y, where β = M(y/x̄) and α = m(y/x̄):
/// c_y = (βˢ − αˢ)/(β − α), c_centre = (βαˢ − αβˢ)/(β − α).
/// For β = α the geodesic is βˢ·x̄.
pub fn thompson_straight_coefficients(beta: f64, alpha: f64, s: f64) -> (f64, f64) {
    if (beta - alpha).abs() <= 1e-12 * beta.abs().max(alpha.abs()) {
        return (beta.powf(s), 0.0);
    }
    let denom = beta - alpha;
    let c_y = (beta.powf(s) - alpha.powf(s)) / denom;
    let c_center = (beta * alpha.powf(s) - alpha * beta.powf(s)) / denom;
    (c_center, c_y)
}

/// Outcome of a sampled inequality check.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SampleReport {
    pub samples: usize,
    pub violations: usize,
    pub max_excess: f64,
    pub tol: f64,
}

impl SampleReport {
    pub fn from_excesses(excesses: &[f64], tol: f64) -> Self {
        SampleReport {
            samples: excesses.len(),
            violations: excesses.iter().filter(|&&e| e > tol).count(),
            max_excess: excesses.iter().copied().fold(f64::NEG_INFINITY, f64::max),
            tol,
        }
    }

    pub fn passed(&self) -> bool {
        self.violations == 0
    }
}

/// A sampled pair (y,z,s) where δ(γ_y(s),γ_z(s)) exceeds s·δ(y,z) by more than tol.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct StarViolation {
    pub y: Point,
    pub z: Point,
    pub s: f64,
    pub excess: f64,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct StarShapedReport {
    pub summary: SampleReport,
    /// The first violations found, in sample order (at most 32).
    pub violations: Vec<StarViolation>,
}

const MAX_REPORTED_VIOLATIONS: usize = 32;

/// Samples the convexity inequality δ(γ_y(s), γ_z(s)) ≤ s·δ(y,z).
pub fn check_star_shaped(
    g: &GeodesicFamily,
    m: &HemiMetric,
    plan: &SamplePlan,
) -> Result<StarShapedReport> {
    if g.metric.space() != m.space() || g.metric.dim() != m.dim() {
        return Err(invalid(
            "geodesic family and metric live on different spaces",
        ));
    }
    let rows = par::map_range(plan.execution, plan.count, |i| -> Result<StarViolation> {
        let mut rng = plan.rng(i);
        let y = random_point(m.space(), m.dim(), &mut rng);
        let z = random_point(m.space(), m.dim(), &mut rng);
        let s: f64 = rng.random_range(0.0..=1.0);
        let lhs = m.delta(&g.point(&y, s)?, &g.point(&z, s)?)?;
        let excess = lhs - s * m.delta(&y, &z)?;
        Ok(StarViolation { y, z, s, excess })
    });
    let rows: Vec<StarViolation> = rows.into_iter().collect::<Result<_>>()?;
    let excesses: Vec<f64> = rows.iter().map(|r| r.excess).collect();
    let violations = rows
        .into_iter()
        .filter(|r| r.excess > plan.tol)
        .take(MAX_REPORTED_VIOLATIONS)
        .collect();
    Ok(StarShapedReport {
        summary: SampleReport::from_excesses(&excesses, plan.tol),
        violations,
    })
}

/// Samples the triangle inequality δ(x,z) ≤ δ(x,y) + δ(y,z).
pub fn check_triangle(m: &HemiMetric, plan: &SamplePlan) -> Result<SampleReport> {
    let ex = par::map_range(plan.execution, plan.count, |i| -> Result<f64> {
        let mut rng = plan.rng(i);
        let x = random_point(m.space(), m.dim(), &mut rng);
        let y = random_point(m.space(), m.dim(), &mut rng);
        let z = random_point(m.space(), m.dim(), &mut rng);
        Ok(m.delta(&x, &z)? - m.delta(&x, &y)? - m.delta(&y, &z)?)
    });
    let ex: Vec<f64> = ex.into_iter().collect::<Result<_>>()?;
    Ok(SampleReport::from_excesses(&ex, plan.tol))
}

/// Samples |δ(γ(s),γ(t)) − (t−s)·δ(x̄,y)| for 0 ≤ s ≤ t ≤ 1 together with
/// the endpoint conditions γ(0) = x̄ and γ(1) = y.
pub fn check_geodesic_identity(g: &GeodesicFamily, plan: &SamplePlan) -> Result<SampleReport> {
    let m = g.metric;
    let ex = par::map_range(plan.execution, plan.count, |i| -> Result<f64> {
        let mut rng = plan.rng(i);
        let y = random_point(m.space(), m.dim(), &mut rng);
        let a: f64 = rng.random_range(0.0..=1.0);
        let b: f64 = rng.random_range(0.0..=1.0);
        let (s, t) = if a <= b { (a, b) } else { (b, a) };
        let full = m.delta(&g.center, &y)?;
        let part = m.delta(&g.point(&y, s)?, &g.point(&y, t)?)?;
        let end = g.point(&y, 1.0)?.euclidean_distance(&y)? / y.norm().max(1.0);
        Ok((part - (t - s) * full).abs().max(end))
    });
    let ex: Vec<f64> = ex.into_iter().collect::<Result<_>>()?;
    Ok(SampleReport::from_excesses(&ex, plan.tol))
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_abs_diff_eq;

    fn v(x: &[f64]) -> Point {
        Point::Vector(x.to_vec())
    }

    #[test]
    fn rfunk_example() {
        let m = HemiMetric::standard(MetricKind::Rfunk, 2);
        assert_abs_diff_eq!(
            m.delta(&v(&[1.0, 2.0]), &v(&[3.0, 4.0])).unwrap(),
            3f64.ln()
        );
    }

    #[test]
    fn top_example() {
        let m = HemiMetric::vector(MetricKind::Top, 2);
        assert_eq!(m.delta(&v(&[0.0, 0.0]), &v(&[1.0, -5.0])).unwrap(), 1.0);
    }

    #[test]
    fn thompson_example() {
        let m = HemiMetric::standard(MetricKind::Thompson, 2);
        assert_abs_diff_eq!(
            m.delta(&v(&[1.0, 1.0]), &v(&[2.0, 0.5])).unwrap(),
            2f64.ln(),
            epsilon = 1e-15
        );
    }

    #[test]
    fn torus_example() {
        let m = HemiMetric::torus();
        assert_abs_diff_eq!(
            m.delta(&v(&[0.1, 0.0]), &v(&[0.3, 2.0])).unwrap(),
            2.2,
            epsilon = 1e-15
        );
        // wrap-around
        assert_abs_diff_eq!(
            m.delta(&v(&[0.95, 0.0]), &v(&[0.05, 0.0])).unwrap(),
            0.1,
            epsilon = 1e-15
        );
    }

    #[test]
    fn induced_metric_examples() {
        let m = HemiMetric::standard(MetricKind::Rfunk, 2);
        let e = std::f64::consts::E;
        assert_abs_diff_eq!(m.induced(&v(&[1.0, 1.0]), &v(&[e, 1.0])).unwrap(), 1.0);
        let x = v(&[1.0, 2.0]);
        assert_eq!(m.induced(&x, &x).unwrap(), 0.0);
        // both directions by direct evaluation: log 3 and log max(1/3, 2/4)
        let fwd = (3.0f64 / 1.0).max(4.0 / 2.0).ln();
        let bwd = (1.0f64 / 3.0).max(2.0 / 4.0).ln();
        assert_abs_diff_eq!(
            m.induced(&x, &v(&[3.0, 4.0])).unwrap(),
            fwd.max(bwd),
            epsilon = 1e-15
        );
    }

    #[test]
    fn cone_metric_rejects_boundary_points() {
        let m = HemiMetric::standard(MetricKind::Rfunk, 2);
        assert!(matches!(
            m.delta(&v(&[1.0, 0.0]), &v(&[1.0, 1.0])),
            Err(Error::Domain(_))
        ));
        assert!(matches!(
            m.delta(&v(&[1.0, -1.0]), &v(&[1.0, 1.0])),
            Err(Error::Domain(_))
        ));
        assert!(matches!(
            m.delta(&v(&[1.0, 1.0, 1.0]), &v(&[1.0, 1.0])),
            Err(Error::DimensionMismatch { .. })
        ));
    }

    #[test]
    fn rejects_mismatched_metric_and_space() {
        assert!(HemiMetric::new(SpaceKind::RealVectorSpace, MetricKind::Rfunk, None, 2).is_err());
        assert!(
            HemiMetric::new(SpaceKind::StandardConeInterior, MetricKind::Top, None, 2).is_err()
        );
        assert!(HemiMetric::new(SpaceKind::PsdConeInterior, MetricKind::DeltaNu, None, 2).is_err());
    }

    #[test]
    fn metric_descriptor_json() {
        let m: HemiMetric = serde_json::from_str(
            r#"{"space":"psd-cone-interior","kind":"delta-nu","nu":"spread","dim":3}"#,
        )
        .unwrap();
        assert_eq!(m.spectral_gauge(), Some(SpectralGauge::Spread));
        let bad = serde_json::from_str::<HemiMetric>(
            r#"{"space":"real-vector-space","kind":"thompson","dim":3}"#,
        );
        assert!(bad.is_err());
    }

    #[test]
    fn geometric_mean_examples() {
        let metric = HemiMetric::psd(MetricKind::Thompson, 2);
        let g = GeodesicFamily::new(
            Point::Matrix(Mat::identity(2)),
            GeodesicKind::GeometricMean,
            metric,
        )
        .unwrap();
        let y = Point::Matrix(Mat::diag(&[4.0, 9.0]));
        let mid = g.point(&y, 0.5).unwrap();
        assert!(
            mid.sub(&Point::Matrix(Mat::diag(&[2.0, 3.0])))
                .unwrap()
                .norm()
                < 1e-14
        );
        assert_eq!(g.point(&y, 0.0).unwrap(), g.center);
        assert!(g.point(&y, 1.5).is_err());

        // Z = diag(1,4), Y = diag(4,4): Z^{-1/2} Y Z^{-1/2} = diag(4,1) by
        // eigendecomposition, so the midpoint is diag(1,2)·diag(2,1)·diag(1,2).
        let z = Mat::diag(&[1.0, 4.0]);
        let g = GeodesicFamily::new(Point::Matrix(z), GeodesicKind::GeometricMean, metric).unwrap();
        let mid = g
            .point(&Point::Matrix(Mat::diag(&[4.0, 4.0])), 0.5)
            .unwrap();
        assert!(
            mid.sub(&Point::Matrix(Mat::diag(&[2.0, 4.0])))
                .unwrap()
                .norm()
                < 1e-14
        );
    }

    #[test]
    fn thompson_straight_coefficients_hit_both_endpoints() {
        for &(beta, alpha) in &[(3.0, 0.5), (2.0, 1.5), (5.0, 5.0), (0.7, 0.2)] {
            let (c0, y0) = thompson_straight_coefficients(beta, alpha, 0.0);
            assert_abs_diff_eq!(c0, 1.0, epsilon = 1e-15);
            assert_abs_diff_eq!(y0, 0.0, epsilon = 1e-15);
            let (c1, y1) = thompson_straight_coefficients(beta, alpha, 1.0);
            if beta != alpha {
                assert_abs_diff_eq!(c1, 0.0, epsilon = 1e-14);
                assert_abs_diff_eq!(y1, 1.0, epsilon = 1e-14);
            }
        }
    }

    #[test]
    fn printed_coefficient_pair_misses_the_endpoint() {
        // Using the same coefficient for both the centre and y gives
        // γ(1) = (x̄ + y)·(β−α)/(β−α) ≠ y.
        let (beta, alpha, s) = (3.0_f64, 0.5_f64, 1.0_f64);
        let denom = beta * alpha.powf(s) - alpha * beta.powf(s) + beta.powf(s) - alpha.powf(s);
        let c = (beta.powf(s) - alpha.powf(s)) / denom;
        assert_abs_diff_eq!(c, 1.0, epsilon = 1e-15);
        let (c_center, _) = thompson_straight_coefficients(beta, alpha, s);
        assert!((c - c_center).abs() > 0.5);
    }

    #[test]
    fn heminorm_examples() {
        let z = [1.0, -3.0, 2.0];
        assert_eq!(HemiNorm::sup(3).eval(&z), 3.0);
        assert_eq!(HemiNorm::top(3).eval(&z), 2.0);
        assert_eq!(HemiNorm::bottom(3).eval(&z), 3.0);
        let custom = HemiNorm::custom(vec![vec![1.0, 1.0, 0.0], vec![0.0, 0.0, -1.0]]).unwrap();
        assert_eq!(custom.eval(&z), -2.0);
        assert!(!custom.is_separating());
        assert!(HemiNorm::top(3).is_separating());
        assert!(HemiNorm::top(3).min_symmetrized_on_sphere(&SamplePlan::new(1, 500)) > 0.0);
    }
}
