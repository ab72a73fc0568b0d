//! Upper bounds on the escape rate from orbits and one-step displacements,
//! the fixed points y_α of T∘r^α, and Martin kernels.

use serde::{Deserialize, Serialize};

use crate::cone::{gauge_max, ConeMartinFunction, ConePoint, MartinVariant};
use crate::error::{invalid, Result};
use crate::hemi::{GeodesicFamily, HemiMetric, Point, SpaceKind};
use crate::linalg::{self, Mat};
use crate::operators::{orbit, OperatorSpec, OrbitTrace};

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct OrbitDiagnostics {
    /// Largest violation of subadditivity of k ↦ δ(x, T^k x).
    pub subadditivity_excess: f64,
    /// Largest increase between consecutive step displacements.
    pub step_increase: f64,
    /// δ(x, T^K x)/K.
    pub final_average: f64,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct RateEstimate {
    /// min_{1≤k≤K} δ(x, T^k x)/k
    pub upper_from_orbit: f64,
    /// min over probed y of δ(y, T(y))
    pub upper_from_point: f64,
    /// `None` stands for −∞.
    pub lower_from_certificate: Option<f64>,
    pub horizon: usize,
    pub diagnostics: OrbitDiagnostics,
}

/// Fekete bound from the orbit of x, with the orbit steps as ρ̄ probes.
pub fn orbit_rate(
    t: &OperatorSpec,
    m: &HemiMetric,
    x: &Point,
    horizon: usize,
) -> Result<(RateEstimate, OrbitTrace)> {
    let trace = orbit(t, m, x, horizon)?;
    let upper_from_orbit = *trace.running_min.last().expect("horizon ≥ 1");
    let upper_from_point = trace.steps.iter().copied().fold(f64::INFINITY, f64::min);
    let est = RateEstimate {
        upper_from_orbit,
        upper_from_point,
        lower_from_certificate: None,
        horizon,
        diagnostics: OrbitDiagnostics {
            subadditivity_excess: trace.subadditivity_excess(),
            step_increase: trace.step_increase(),
            final_average: trace.cumulative[horizon - 1] / horizon as f64,
        },
    };
    Ok((est, trace))
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum FixedPointStatus {
    Converged,
    BudgetExceeded,
    NonContracting,
    Overflow,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct YAlphaStep {
    pub alpha: f64,
    pub y: Point,
    /// d(T(r^α(y)), y) at termination.
    pub residual: f64,
    /// δ(y, T(y)).
    pub displacement: f64,
    /// y/‖y‖ on cones.
    #[serde(skip_serializing_if = "Option::is_none")]
    pub direction: Option<Point>,
    pub iterations: usize,
    pub status: FixedPointStatus,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct YAlphaPath {
    pub center: Point,
    pub steps: Vec<YAlphaStep>,
}

impl YAlphaPath {
    /// The converged step with the smallest displacement.
    pub fn best(&self) -> Option<&YAlphaStep> {
        self.steps
            .iter()
            .filter(|s| s.status == FixedPointStatus::Converged)
            .min_by(|a, b| a.displacement.total_cmp(&b.displacement))
    }

    /// The last converged step.
    pub fn last_converged(&self) -> Option<&YAlphaStep> {
        self.steps
            .iter()
            .rev()
            .find(|s| s.status == FixedPointStatus::Converged)
    }

    pub fn min_displacement(&self) -> f64 {
        self.best().map_or(f64::INFINITY, |s| s.displacement)
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct YAlphaOptions {
    pub alphas: Vec<f64>,
    pub stop_tol: f64,
    /// Iteration budget per α.
    pub budget: usize,
}

impl Default for YAlphaOptions {
    fn default() -> Self {
        YAlphaOptions {
            alphas: default_alphas(20),
            stop_tol: 1e-9,
            budget: 20_000,
        }
    }
}

/// α_j = 1 − 2⁻ʲ for j = 1..=n.
pub fn default_alphas(n: usize) -> Vec<f64> {
    (1..=n).map(|j| 1.0 - 0.5_f64.powi(j as i32)).collect()
}

/// Points beyond this norm are treated as an overflow of the path.
const OVERFLOW_NORM: f64 = 1e150;

/// For each α, the fixed point of y ↦ T(γ_y(α)), warm-started from the
/// previous one. The schedule stops at the first α that fails.
pub fn y_alpha_path(
    t: &OperatorSpec,
    m: &HemiMetric,
    g: &GeodesicFamily,
    opts: &YAlphaOptions,
) -> Result<YAlphaPath> {
    if g.metric.space() != m.space() || m.space() != t.space() || m.dim() != t.dim() {
        return Err(invalid("operator, metric and geodesics must share a space"));
    }
    if opts.alphas.iter().any(|a| !(0.0..1.0).contains(a)) {
        return Err(invalid("α must lie in [0,1)"));
    }
    let mut y = g.center.clone();
    let mut steps = Vec::with_capacity(opts.alphas.len());
    for &alpha in &opts.alphas {
        let step = fixed_point(t, m, g, alpha, y.clone(), opts)?;
        let ok = step.status == FixedPointStatus::Converged;
        if ok {
            y = step.y.clone();
        }
        steps.push(step);
        if !ok {
            break;
        }
    }
    Ok(YAlphaPath {
        center: g.center.clone(),
        steps,
    })
}

fn noise_floor(m: &HemiMetric, y: &Point) -> f64 {
    if m.space().is_cone() {
        1e-13
    } else {
        let max = match y {
            Point::Vector(v) => v.iter().fold(0.0_f64, |a, b| a.max(b.abs())),
            Point::Matrix(x) => x.max_abs(),
        };
        16.0 * f64::EPSILON * max.max(1.0)
    }
}

fn fixed_point(
    t: &OperatorSpec,
    m: &HemiMetric,
    g: &GeodesicFamily,
    alpha: f64,
    mut y: Point,
    opts: &YAlphaOptions,
) -> Result<YAlphaStep> {
    let mut residual = f64::INFINITY;
    let mut status = FixedPointStatus::BudgetExceeded;
    let mut iterations = 0;
    for it in 1..=opts.budget {
        iterations = it;
        let next = match g.point(&y, alpha).and_then(|r| t.apply(&r)) {
            Ok(p) if p.is_finite() && p.norm() < OVERFLOW_NORM => p,
            _ => {
                status = FixedPointStatus::Overflow;
                break;
            }
        };
        let d = match m.induced(&next, &y) {
            Ok(d) if d.is_finite() => d,
            _ => {
                status = FixedPointStatus::Overflow;
                break;
            }
        };
        let floor = noise_floor(m, &next);
        if d > residual * (1.0 + 1e-3) && d > 10.0 * floor {
            residual = d;
            status = FixedPointStatus::NonContracting;
            break;
        }
        residual = d;
        y = next;
        if d <= opts.stop_tol * (1.0 - alpha) + floor {
            status = FixedPointStatus::Converged;
            break;
        }
    }
    let displacement = t
        .apply(&y)
        .and_then(|ty| m.delta(&y, &ty))
        .unwrap_or(f64::INFINITY);
    let direction = m.space().is_cone().then(|| y.normalized());
    Ok(YAlphaStep {
        alpha,
        y,
        residual,
        displacement,
        direction,
        iterations,
        status,
    })
}

/// Coordinate search minimizing δ(y, T(y)): log coordinates on the
/// standard cone, the symmetric logarithm on the PSD cone, plain
/// coordinates otherwise. Returns the best point and its displacement.
pub fn local_search(
    t: &OperatorSpec,
    m: &HemiMetric,
    start: &Point,
    passes: usize,
) -> Result<(Point, f64)> {
    let param = Param::new(m.space(), start)?;
    let objective = |p: &[f64]| -> f64 {
        let y = param.point(p);
        t.apply(&y)
            .and_then(|ty| m.delta(&y, &ty))
            .ok()
            .filter(|v| v.is_finite())
            .unwrap_or(f64::INFINITY)
    };
    let mut p = param.coords(start);
    let mut best = objective(&p);
    let mut step = 0.5;
    for _ in 0..passes {
        let mut improved = false;
        for i in 0..p.len() {
            for dir in [1.0, -1.0] {
                let old = p[i];
                p[i] = old + dir * step;
                let v = objective(&p);
                if v < best {
                    best = v;
                    improved = true;
                } else {
                    p[i] = old;
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
    Ok((param.point(&p), best))
}

enum Param {
    LogVector,
    LogMatrix(usize),
    Plain,
}

impl Param {
    fn new(space: SpaceKind, start: &Point) -> Result<Self> {
        Ok(match space {
            SpaceKind::StandardConeInterior => Param::LogVector,
            SpaceKind::PsdConeInterior => Param::LogMatrix(start.as_matrix()?.dim()),
            _ => Param::Plain,
        })
    }

    fn coords(&self, y: &Point) -> Vec<f64> {
        match (self, y) {
            (Param::LogVector, Point::Vector(v)) => v.iter().map(|a| a.ln()).collect(),
            (Param::LogMatrix(n), Point::Matrix(x)) => {
                let l = linalg::spd_log(x);
                let mut out = Vec::with_capacity(n * (n + 1) / 2);
                for i in 0..*n {
                    for j in i..*n {
                        out.push(l[(i, j)]);
                    }
                }
                out
            }
            (_, Point::Vector(v)) => v.clone(),
            (_, Point::Matrix(x)) => x.as_slice().to_vec(),
        }
    }

    fn point(&self, p: &[f64]) -> Point {
        match self {
            Param::LogVector => Point::Vector(p.iter().map(|a| a.exp()).collect()),
            Param::LogMatrix(n) => {
                let mut l = Mat::zeros(*n);
                let mut k = 0;
                for i in 0..*n {
                    for j in i..*n {
                        l[(i, j)] = p[k];
                        l[(j, i)] = p[k];
                        k += 1;
                    }
                }
                Point::Matrix(linalg::sym_exp(&l))
            }
            Param::Plain => Point::Vector(p.to_vec()),
        }
    }
}

/// v ↦ δ(x̄, y) − δ(v, y).
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct MartinKernel {
    pub metric: HemiMetric,
    pub basepoint: Point,
    pub y: Point,
    offset: f64,
}

impl MartinKernel {
    pub fn eval(&self, v: &Point) -> Result<f64> {
        if v == &self.basepoint {
            return Ok(0.0);
        }
        Ok(self.offset - self.metric.delta(v, &self.y)?)
    }
}

pub fn martin_kernel_snapshot(
    m: &HemiMetric,
    basepoint: &Point,
    y: &Point,
) -> Result<MartinKernel> {
    Ok(MartinKernel {
        metric: *m,
        basepoint: basepoint.clone(),
        y: y.clone(),
        offset: m.delta(basepoint, y)?,
    })
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct PumpingProfile {
    pub rate: f64,
    /// h(T^k x) − h(x) − k·rate for k = 1..K.
    pub margins: Vec<f64>,
    pub min_margin: f64,
}

impl PumpingProfile {
    /// Whether every margin is at least −(slope·k + floor).
    pub fn holds(&self, slope: f64, floor: f64) -> bool {
        self.margins
            .iter()
            .enumerate()
            .all(|(i, m)| *m >= -(slope * (i + 1) as f64 + floor))
    }
}

/// Margins of the pumping inequality h(T^k x) ≥ h(x) + k·r along an orbit.
/// Homogeneous maps are iterated on the unit sphere with a log scale.
pub fn pumping_profile(
    t: &OperatorSpec,
    h: &ConeMartinFunction,
    x: &ConePoint,
    rate: f64,
    horizon: usize,
) -> Result<PumpingProfile> {
    let h0 = h.value(x)?;
    let homogeneous = t.is_positively_homogeneous();
    let u = h.u();
    let offset = h0 + martin_delta(h.variant(), x, 0.0, u)?;
    let mut cur = x.clone();
    let mut scale = 0.0;
    let mut margins = Vec::with_capacity(horizon);
    for k in 1..=horizon {
        let mut next = ConePoint::new(t.apply(cur.point())?)?;
        if homogeneous {
            let n = next.norm();
            next = next.scale(1.0 / n)?;
            scale += n.ln();
        }
        // h(e^s p) = offset − δ(e^s p, u), offset = h(x) + δ(x, u).
        let hk = offset - martin_delta(h.variant(), &next, scale, u)?;
        margins.push(hk - h0 - k as f64 * rate);
        cur = next;
    }
    let min_margin = margins.iter().copied().fold(f64::INFINITY, f64::min);
    Ok(PumpingProfile {
        rate,
        margins,
        min_margin,
    })
}

/// δ(e^s p, u) for the Martin variant.
fn martin_delta(variant: MartinVariant, p: &ConePoint, s: f64, u: &ConePoint) -> Result<f64> {
    let r = gauge_max(p, u)?.ln() - s;
    Ok(match variant {
        MartinVariant::Rfunk => r,
        MartinVariant::RfunkPlus => r.max(0.0),
    })
}
