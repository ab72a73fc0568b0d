//! The catalogue of non-expansive maps, their radial extensions T̂ to the
//! closed cone and their recession maps T̂_r(u) = lim γ⁻¹T̂(γu).

use serde::{Deserialize, Deserializer, Serialize, Serializer};

use crate::cone::{gauge_max, ConePoint};
use crate::error::{check_dim, domain, invalid, Error, Result};
use crate::games::{shapley_apply, GameSpec};
use crate::hemi::{HemiMetric, MetricKind, Point, SampleReport, SpaceKind};
use crate::linalg::{self, Mat, SymEigen};
use crate::par::{self, Execution};
use crate::sampling::{random_point, SamplePlan};

/// A square matrix over ℝ ∪ {−∞}; `null` encodes −∞ in JSON.
#[derive(Clone, Debug, PartialEq)]
pub struct MaxPlusMatrix(pub Vec<Vec<f64>>);

impl Serialize for MaxPlusMatrix {
    fn serialize<S: Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        let rows: Vec<Vec<Option<f64>>> = self
            .0
            .iter()
            .map(|r| r.iter().map(|v| v.is_finite().then_some(*v)).collect())
            .collect();
        rows.serialize(s)
    }
}

impl<'de> Deserialize<'de> for MaxPlusMatrix {
    fn deserialize<D: Deserializer<'de>>(d: D) -> std::result::Result<Self, D::Error> {
        let rows: Vec<Vec<Option<f64>>> = Vec::deserialize(d)?;
        Ok(MaxPlusMatrix(
            rows.into_iter()
                .map(|r| {
                    r.into_iter()
                        .map(|v| v.unwrap_or(f64::NEG_INFINITY))
                        .collect()
                })
                .collect(),
        ))
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case", deny_unknown_fields)]
pub enum OperatorSpec {
    NonnegMatrix {
        matrix: Mat,
    },
    MaxPlus {
        matrix: MaxPlusMatrix,
    },
    Shapley {
        game: GameSpec,
    },
    /// T(X) = A + M(B + X⁻¹)⁻¹Mᵀ
    Riccati {
        a: Mat,
        b: Mat,
        m: Mat,
    },
    Translation {
        c: Vec<f64>,
        norm: MetricKind,
    },
    /// (x, t) ↦ (x + α mod 1, t + t_step)
    TorusShift {
        alpha: f64,
        t_step: f64,
    },
    Composite {
        operators: Vec<OperatorSpec>,
    },
    Identity {
        space: SpaceKind,
        dim: usize,
    },
}

impl OperatorSpec {
    pub fn validate(&self) -> Result<()> {
        match self {
            OperatorSpec::NonnegMatrix { matrix } => {
                if matrix.dim() == 0 {
                    return Err(invalid("empty matrix"));
                }
                for (i, row) in matrix.rows().iter().enumerate() {
                    if row.iter().any(|v| !(*v >= 0.0) || !v.is_finite()) {
                        return Err(invalid(format!("row {i} has a negative entry")));
                    }
                    if row.iter().all(|v| *v == 0.0) {
                        return Err(invalid(format!("row {i} is zero")));
                    }
                }
            }
            OperatorSpec::MaxPlus { matrix } => {
                let n = matrix.0.len();
                if n == 0 {
                    return Err(invalid("empty matrix"));
                }
                for (i, row) in matrix.0.iter().enumerate() {
                    check_dim(n, row.len())?;
                    if row.iter().any(|v| v.is_nan() || *v == f64::INFINITY) {
                        return Err(invalid(format!("row {i} has an invalid entry")));
                    }
                    if row.iter().all(|v| !v.is_finite()) {
                        return Err(invalid(format!("row {i} has no finite entry")));
                    }
                }
            }
            OperatorSpec::Shapley { game } => game.validate()?,
            OperatorSpec::Riccati { a, b, m } => {
                let n = a.dim();
                check_dim(n, b.dim())?;
                check_dim(n, m.dim())?;
                for (name, x) in [("A", a), ("B", b)] {
                    ConePoint::psd(x.clone())
                        .map_err(|e| invalid(format!("{name} must be PSD: {e}")))?;
                }
                if m.inverse().is_none() || !m.condition_number().is_finite() {
                    return Err(invalid("M must be invertible"));
                }
            }
            OperatorSpec::Translation { c, norm } => {
                if c.is_empty() || c.iter().any(|v| !v.is_finite()) {
                    return Err(invalid("translation vector must be finite and nonempty"));
                }
                HemiMetric::new(SpaceKind::RealVectorSpace, *norm, None, c.len())?;
            }
            OperatorSpec::TorusShift { alpha, t_step } => {
                if !alpha.is_finite() || !t_step.is_finite() {
                    return Err(invalid("torus shift parameters must be finite"));
                }
            }
            OperatorSpec::Composite { operators } => {
                let first = operators
                    .first()
                    .ok_or_else(|| invalid("composite of no operators"))?;
                for op in operators {
                    op.validate()?;
                    if op.space() != first.space() || op.dim() != first.dim() {
                        return Err(invalid("composite operators act on different spaces"));
                    }
                }
            }
            OperatorSpec::Identity { dim, .. } => {
                if *dim == 0 {
                    return Err(invalid("dimension must be positive"));
                }
            }
        }
        Ok(())
    }

    pub fn space(&self) -> SpaceKind {
        match self {
            OperatorSpec::NonnegMatrix { .. } => SpaceKind::StandardConeInterior,
            OperatorSpec::MaxPlus { .. }
            | OperatorSpec::Shapley { .. }
            | OperatorSpec::Translation { .. } => SpaceKind::RealVectorSpace,
            OperatorSpec::Riccati { .. } => SpaceKind::PsdConeInterior,
            OperatorSpec::TorusShift { .. } => SpaceKind::TorusTimesLine,
            OperatorSpec::Composite { operators } => operators[0].space(),
            OperatorSpec::Identity { space, .. } => *space,
        }
    }

    pub fn dim(&self) -> usize {
        match self {
            OperatorSpec::NonnegMatrix { matrix } => matrix.dim(),
            OperatorSpec::MaxPlus { matrix } => matrix.0.len(),
            OperatorSpec::Shapley { game } => game.states,
            OperatorSpec::Riccati { a, .. } => a.dim(),
            OperatorSpec::Translation { c, .. } => c.len(),
            OperatorSpec::TorusShift { .. } => 2,
            OperatorSpec::Composite { operators } => operators[0].dim(),
            OperatorSpec::Identity { dim, .. } => *dim,
        }
    }

    pub fn is_cone_operator(&self) -> bool {
        self.space().is_cone()
    }

    /// T(λx) = λT(x) for λ > 0 (cone operators only).
    pub fn is_positively_homogeneous(&self) -> bool {
        match self {
            OperatorSpec::NonnegMatrix { .. } | OperatorSpec::Identity { .. } => {
                self.is_cone_operator()
            }
            OperatorSpec::Riccati { .. } => false,
            OperatorSpec::Composite { operators } => {
                operators.iter().all(|o| o.is_positively_homogeneous())
            }
            _ => false,
        }
    }

    /// The hemi-metrics in which T is non-expansive by construction.
    pub fn natural_metrics(&self) -> Vec<MetricKind> {
        match self {
            OperatorSpec::NonnegMatrix { .. } => vec![MetricKind::Rfunk],
            OperatorSpec::MaxPlus { .. } | OperatorSpec::Shapley { .. } => vec![MetricKind::Top],
            OperatorSpec::Riccati { .. } => vec![MetricKind::Thompson, MetricKind::RfunkPlus],
            OperatorSpec::Translation { norm, .. } => vec![*norm],
            OperatorSpec::TorusShift { .. } => vec![MetricKind::Torus],
            OperatorSpec::Identity { space, .. } => match space {
                SpaceKind::StandardConeInterior | SpaceKind::PsdConeInterior => vec![
                    MetricKind::Rfunk,
                    MetricKind::RfunkPlus,
                    MetricKind::Thompson,
                    MetricKind::Hilbert,
                ],
                SpaceKind::RealVectorSpace => vec![
                    MetricKind::NormSup,
                    MetricKind::NormL2,
                    MetricKind::Top,
                    MetricKind::Bottom,
                ],
                SpaceKind::TorusTimesLine => vec![MetricKind::Torus],
            },
            OperatorSpec::Composite { operators } => {
                let mut kinds = operators[0].natural_metrics();
                for op in &operators[1..] {
                    let other = op.natural_metrics();
                    kinds.retain(|k| other.contains(k));
                }
                kinds
            }
        }
    }

    /// The first declared metric, on T's space.
    pub fn natural_metric(&self) -> Result<HemiMetric> {
        let kind = *self
            .natural_metrics()
            .first()
            .ok_or_else(|| invalid("operator has no common natural metric"))?;
        HemiMetric::new(self.space(), kind, None, self.dim())
    }

    /// T(x) for x in the domain (interior points for cone operators).
    pub fn apply(&self, x: &Point) -> Result<Point> {
        self.apply_with(x, Execution::Sequential)
    }

    pub fn apply_with(&self, x: &Point, exec: Execution) -> Result<Point> {
        check_dim(self.dim(), x.dim())?;
        if !x.is_finite() {
            return Err(domain("point has non-finite coordinates"));
        }
        match self.space() {
            SpaceKind::StandardConeInterior | SpaceKind::PsdConeInterior => {
                let c = ConePoint::new(x.clone())?;
                if !c.is_interior() {
                    return Err(domain("cone operators are applied to interior points"));
                }
            }
            _ => {
                x.as_vector()?;
            }
        }
        let y = self.eval(x, exec)?;
        if !y.is_finite() {
            return Err(domain("operator value is not finite"));
        }
        Ok(y)
    }

    /// Evaluation without the interior test, used on the closed cone by
    /// operators whose formula extends continuously.
    fn eval(&self, x: &Point, exec: Execution) -> Result<Point> {
        match self {
            OperatorSpec::NonnegMatrix { matrix } => {
                Ok(Point::Vector(matrix.mul_vec(x.as_vector()?)))
            }
            OperatorSpec::MaxPlus { matrix } => {
                let x = x.as_vector()?;
                Ok(Point::Vector(
                    matrix
                        .0
                        .iter()
                        .map(|row| {
                            row.iter()
                                .zip(x)
                                .filter(|(a, _)| a.is_finite())
                                .map(|(a, v)| a + v)
                                .fold(f64::NEG_INFINITY, f64::max)
                        })
                        .collect(),
                ))
            }
            OperatorSpec::Shapley { game } => {
                Ok(Point::Vector(shapley_apply(game, x.as_vector()?, exec)?))
            }
            OperatorSpec::Riccati { a, b, m } => {
                Ok(Point::Matrix(riccati_closed(a, b, m, x.as_matrix()?)?))
            }
            OperatorSpec::Translation { c, .. } => Ok(Point::Vector(
                x.as_vector()?.iter().zip(c).map(|(v, c)| v + c).collect(),
            )),
            OperatorSpec::TorusShift { alpha, t_step } => {
                let p = x.as_vector()?;
                Ok(Point::Vector(vec![
                    (p[0] + alpha).rem_euclid(1.0),
                    p[1] + t_step,
                ]))
            }
            OperatorSpec::Composite { operators } => {
                let mut cur = x.clone();
                for op in operators {
                    cur = op.eval(&cur, exec)?;
                }
                Ok(cur)
            }
            OperatorSpec::Identity { .. } => Ok(x.clone()),
        }
    }

    /// Whether `eval` is already continuous on the closed cone, so that
    /// T̂ needs no limit.
    fn has_closed_form(&self) -> bool {
        match self {
            OperatorSpec::NonnegMatrix { .. }
            | OperatorSpec::Riccati { .. }
            | OperatorSpec::Identity { .. } => true,
            OperatorSpec::Composite { operators } => operators.iter().all(|o| o.has_closed_form()),
            _ => false,
        }
    }
}

/// A + M X(I + BX)⁻¹ Mᵀ, which equals A + M(B + X⁻¹)⁻¹Mᵀ on the interior
/// and stays defined on the boundary.
pub fn riccati_closed(a: &Mat, b: &Mat, m: &Mat, x: &Mat) -> Result<Mat> {
    let n = a.dim();
    check_dim(n, x.dim())?;
    let inner = Mat::identity(n).add(&b.matmul(x));
    let inv = inner
        .inverse()
        .ok_or_else(|| domain("Riccati: I + BX is singular"))?;
    let core = x.matmul(&inv);
    Ok(a.add(&m.matmul(&core).matmul(&m.transpose())).symmetrize())
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct Schedule {
    /// Number of geometric steps.
    pub steps: usize,
    /// Relative change (Euclidean norm) at which the net is deemed converged.
    pub rel_tol: f64,
}

impl Default for Schedule {
    fn default() -> Self {
        Schedule {
            steps: 40,
            rel_tol: 1e-10,
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct LimitResult {
    /// The limit; `None` when the schedule did not converge.
    pub value: Option<Point>,
    pub converged: bool,
    pub steps: usize,
    pub last_change: f64,
    /// Relative disagreement with the second direction (radial extension)
    /// or whether the net decreased in the cone order (recession map).
    pub check: f64,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub reason: Option<String>,
}

impl LimitResult {
    fn exact(p: Point) -> Self {
        LimitResult {
            value: Some(p),
            converged: true,
            steps: 0,
            last_change: 0.0,
            check: 0.0,
            reason: None,
        }
    }

    pub fn value(&self) -> Result<&Point> {
        self.value.as_ref().ok_or_else(|| {
            domain(format!(
                "limit did not converge: {}",
                self.reason.as_deref().unwrap_or("unknown")
            ))
        })
    }
}

#[derive(Clone, Copy, Debug, Default, PartialEq, Serialize, Deserialize)]
pub struct RadialOptions {
    pub schedule: Schedule,
    /// Evaluate the ε-net even when a closed-cone formula exists.
    pub force_numeric: bool,
}

fn require_cone(t: &OperatorSpec) -> Result<()> {
    if t.is_cone_operator() {
        Ok(())
    } else {
        Err(domain(
            "radial extension and recession map are defined on cones only",
        ))
    }
}

/// T̂(x) = lim_{ε→0⁺} T(x + εz), along ε = 2⁻ʲ‖x‖.
pub fn radial_extension(
    t: &OperatorSpec,
    x: &ConePoint,
    z: &ConePoint,
    opts: &RadialOptions,
) -> Result<LimitResult> {
    require_cone(t)?;
    check_dim(t.dim(), x.dim())?;
    check_dim(t.dim(), z.dim())?;
    if !z.is_interior() {
        return Err(domain("radial direction z must be interior"));
    }
    if x.is_interior() {
        return Ok(LimitResult::exact(t.apply(x.point())?));
    }
    if t.has_closed_form() && !opts.force_numeric {
        return Ok(LimitResult::exact(
            t.eval(x.point(), Execution::Sequential)?,
        ));
    }
    let first = radial_net(t, x.point(), z.point(), &opts.schedule)?;
    let Some(v) = first.value.clone() else {
        return Ok(first);
    };
    let z2 = second_direction(z.point());
    let second = radial_net(t, x.point(), &z2, &opts.schedule)?;
    let mut out = first;
    match second.value {
        Some(w) => {
            let diff = v.euclidean_distance(&w)? / v.norm().max(1e-300);
            out.check = diff;
            if diff > 1e-6 {
                out.converged = false;
                out.value = None;
                out.reason = Some(format!("limit depends on the direction (gap {diff:.3e})"));
            }
        }
        None => {
            out.converged = false;
            out.value = None;
            out.reason = Some("second direction did not converge".into());
        }
    }
    Ok(out)
}

/// A different interior direction: z with its coordinates reweighted.
fn second_direction(z: &Point) -> Point {
    match z {
        Point::Vector(v) => Point::Vector(
            v.iter()
                .enumerate()
                .map(|(i, a)| a * (1.0 + i as f64))
                .collect(),
        ),
        Point::Matrix(m) => {
            let n = m.dim();
            let d = Mat::diag(&(0..n).map(|i| 1.0 + i as f64).collect::<Vec<_>>());
            Point::Matrix(d.matmul(m).matmul(&d).symmetrize())
        }
    }
}

fn radial_net(t: &OperatorSpec, x: &Point, z: &Point, s: &Schedule) -> Result<LimitResult> {
    let scale = x.norm() / z.norm();
    let mut prev: Option<Point> = None;
    let mut change = f64::INFINITY;
    for j in 1..=s.steps {
        let eps = scale * 0.5_f64.powi(j as i32);
        let v = t.eval(&x.combine(1.0, z, eps)?, Execution::Sequential)?;
        if !v.is_finite() {
            break;
        }
        if let Some(p) = &prev {
            change = v.euclidean_distance(p)? / v.norm().max(1e-300);
            if change < s.rel_tol {
                return Ok(LimitResult {
                    value: Some(v),
                    converged: true,
                    steps: j,
                    last_change: change,
                    check: 0.0,
                    reason: None,
                });
            }
        }
        prev = Some(v);
    }
    Ok(LimitResult {
        value: None,
        converged: false,
        steps: s.steps,
        last_change: change,
        check: 0.0,
        reason: Some(format!("ε-net did not settle (last change {change:.3e})")),
    })
}

/// T̂_r(u) = lim_{γ→∞} γ⁻¹T̂(γu), along γ = 2ʲ. For positively homogeneous
/// maps this is T̂(u).
pub fn recession_map(t: &OperatorSpec, u: &ConePoint, opts: &RadialOptions) -> Result<LimitResult> {
    require_cone(t)?;
    if u.classification() == crate::cone::Classification::Zero {
        return Err(domain("recession map of the zero vector"));
    }
    let z = interior_direction(t.dim(), u);
    if t.is_positively_homogeneous() {
        return radial_extension(t, u, &z, opts);
    }
    let mut prev: Option<Point> = None;
    let mut change = f64::INFINITY;
    let mut worst_order = 0.0_f64;
    for j in 0..=opts.schedule.steps {
        let gamma = 2.0_f64.powi(j as i32);
        let r = radial_extension(t, &u.scale(gamma)?, &z, opts)?;
        let Some(v) = r.value else {
            return Ok(LimitResult {
                reason: Some(format!("T̂(γu) failed at γ = 2^{j}")),
                ..r
            });
        };
        let v = v.scale(1.0 / gamma);
        if let Some(p) = &prev {
            // The net decreases: v ⪯ p.
            if let (Ok(pc), Ok(vc)) = (ConePoint::new(p.clone()), ConePoint::new(v.clone())) {
                if let Ok(g) = gauge_max(&pc, &vc) {
                    worst_order = worst_order.max(g - 1.0);
                }
            }
            change = v.euclidean_distance(p)? / v.norm().max(1e-300);
            if change < opts.schedule.rel_tol {
                // The bias of γ⁻¹T̂(γu) is O(1/γ); one Richardson step
                // removes it unless it leaves the cone.
                let value = v
                    .combine(2.0, p, -1.0)
                    .ok()
                    .filter(|w| ConePoint::new(w.clone()).is_ok())
                    .unwrap_or(v);
                return Ok(LimitResult {
                    value: Some(value),
                    converged: true,
                    steps: j,
                    last_change: change,
                    check: worst_order,
                    reason: (worst_order > 1e-9)
                        .then(|| format!("net not monotone (excess {worst_order:.3e})")),
                });
            }
        }
        prev = Some(v);
    }
    Ok(LimitResult {
        value: None,
        converged: false,
        steps: opts.schedule.steps,
        last_change: change,
        check: worst_order,
        reason: Some(format!("γ-net did not settle (last change {change:.3e})")),
    })
}

/// The all-ones vector or the identity matrix.
pub fn unit_interior(space: SpaceKind, dim: usize) -> Result<ConePoint> {
    match space {
        SpaceKind::StandardConeInterior => ConePoint::standard(vec![1.0; dim]),
        SpaceKind::PsdConeInterior => ConePoint::psd(Mat::identity(dim)),
        _ => Err(domain("not a cone")),
    }
}

fn interior_direction(dim: usize, u: &ConePoint) -> ConePoint {
    match u.kind() {
        crate::cone::ConeKind::Standard => ConePoint::standard(vec![1.0; dim]),
        crate::cone::ConeKind::Psd => ConePoint::psd(Mat::identity(dim)),
    }
    .expect("unit interior point")
}

/// The orbit x, Tx, …, T^K x summarized by its displacements.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct OrbitTrace {
    pub start: Point,
    pub horizon: usize,
    /// δ(T^k x, T^{k+1} x) for k = 0..K−1.
    pub steps: Vec<f64>,
    /// δ(x, T^k x) for k = 1..K.
    pub cumulative: Vec<f64>,
    /// min_{j≤k} δ(x, T^j x)/j for k = 1..K.
    pub running_min: Vec<f64>,
    /// T^K x up to the factor exp(log_scale).
    pub last: Point,
    /// T^K x = exp(log_scale)·last; homogeneous cone maps are rescaled when
    /// the iterates leave [1e-100, 1e100] in norm.
    pub log_scale: f64,
}

impl OrbitTrace {
    /// The largest violation of δ(x,T^{k+l}x) ≤ δ(x,T^k x) + δ(x,T^l x)
    /// over stored k, l with k + l ≤ K (checked on a stride for long orbits).
    pub fn subadditivity_excess(&self) -> f64 {
        let u = &self.cumulative;
        let n = u.len();
        let stride = (n / 200).max(1);
        let mut worst = f64::NEG_INFINITY;
        for k in (1..=n).step_by(stride) {
            for l in (1..=n - k).step_by(stride) {
                worst = worst.max(u[k + l - 1] - u[k - 1] - u[l - 1]);
            }
        }
        worst
    }

    /// Largest increase between consecutive step displacements.
    pub fn step_increase(&self) -> f64 {
        self.steps
            .windows(2)
            .map(|w| w[1] - w[0])
            .fold(f64::NEG_INFINITY, f64::max)
    }
}

const RESCALE_ABOVE: f64 = 1e100;
const RESCALE_BELOW: f64 = 1e-100;

/// Iterates T from x for K steps, measuring displacements in `m`.
pub fn orbit(t: &OperatorSpec, m: &HemiMetric, x: &Point, horizon: usize) -> Result<OrbitTrace> {
    if horizon == 0 {
        return Err(invalid("horizon must be at least 1"));
    }
    if m.space() != t.space() || m.dim() != t.dim() {
        return Err(invalid("metric and operator live on different spaces"));
    }
    m.check_point(x)?;
    let log_track = t.is_positively_homogeneous() && m.spectral_gauge().is_some();
    let mut steps = Vec::with_capacity(horizon);
    let mut cumulative = Vec::with_capacity(horizon);
    let mut running_min = Vec::with_capacity(horizon);
    let mut best = f64::INFINITY;
    let (mut cur, mut scale) = (x.clone(), 0.0);
    let escape = |k: usize, e: Error| Error::DomainEscape {
        k,
        reason: e.to_string(),
    };
    for k in 1..=horizon {
        let mut next = t.apply(&cur).map_err(|e| escape(k, e))?;
        let mut next_scale = scale;
        if log_track {
            let n = next.norm();
            if !(n > 0.0) || !n.is_finite() {
                return Err(escape(k, domain("iterate lost its scale")));
            }
            // Rescale lazily so that exact orbits stay exact.
            if !(RESCALE_BELOW..=RESCALE_ABOVE).contains(&n) {
                next = next.scale(1.0 / n);
                next_scale += n.ln();
            }
        }
        m.check_point(&next).map_err(|e| escape(k, e))?;
        let (step, cum) = if log_track {
            (
                m.delta_scaled(&cur, scale, &next, next_scale)?,
                m.delta_scaled(x, 0.0, &next, next_scale)?,
            )
        } else {
            (m.delta(&cur, &next)?, m.delta(x, &next)?)
        };
        if !step.is_finite() || !cum.is_finite() {
            return Err(escape(k, domain("displacement is not finite")));
        }
        steps.push(step);
        cumulative.push(cum);
        best = best.min(cum / k as f64);
        running_min.push(best);
        cur = next;
        scale = next_scale;
    }
    Ok(OrbitTrace {
        start: x.clone(),
        horizon,
        steps,
        cumulative,
        running_min,
        last: cur,
        log_scale: if log_track { scale } else { 0.0 },
    })
}

/// Rayleigh-quotient power iteration for the Perron root of a nonnegative
/// matrix; used as an independent cross-check of certified intervals.
pub fn perron_root_power(m: &Mat, iters: usize) -> f64 {
    let n = m.dim();
    let mut v = vec![1.0 / (n as f64).sqrt(); n];
    let mut lambda = 0.0;
    for _ in 0..iters {
        let w = m.mul_vec(&v);
        let nw = linalg::norm2(&w);
        lambda = w.iter().zip(&v).map(|(a, b)| a * b).sum::<f64>();
        v = w.into_iter().map(|a| a / nw).collect();
    }
    lambda
}

/// λmax of a symmetric matrix.
pub fn lambda_max(a: &Mat) -> f64 {
    SymEigen::new(a).max()
}

/// Samples δ(T(x), T(y)) ≤ δ(x, y) on random pairs of T's space.
pub fn check_nonexpansive(
    t: &OperatorSpec,
    m: &HemiMetric,
    plan: &SamplePlan,
) -> Result<SampleReport> {
    if m.space() != t.space() || m.dim() != t.dim() {
        return Err(invalid("metric and operator live on different spaces"));
    }
    let ex = par::map_range(plan.execution, plan.count, |i| -> Result<f64> {
        let mut rng = plan.rng(i);
        let x = random_point(m.space(), m.dim(), &mut rng);
        let y = random_point(m.space(), m.dim(), &mut rng);
        Ok(m.delta(
            &t.apply_with(&x, Execution::Sequential)?,
            &t.apply_with(&y, Execution::Sequential)?,
        )? - m.delta(&x, &y)?)
    });
    let ex: Vec<f64> = ex.into_iter().collect::<Result<_>>()?;
    Ok(SampleReport::from_excesses(&ex, plan.tol))
}
