//! Collatz–Wielandt certificates for the escape rate.
//!
//! A primal certificate y with T(y) ⪯ μy shows ρ ≤ log μ. A dual
//! certificate u with T̂_r(u) ⪰ μu shows ρ ≥ log μ. Evaluation-form
//! certificates exhibit a coordinate, linear form or extreme ray along
//! which the orbit grows at the claimed rate.

use serde::{Deserialize, Serialize};

use crate::cone::{gauge_max, gauge_min, ConeKind, ConePoint, ExtremeRay};
use crate::error::{domain, invalid, Result};
use crate::hemi::{MetricKind, Point};
use crate::linalg::{Mat, SymEigen};
use crate::operators::{recession_map, unit_interior, OperatorSpec, RadialOptions};
use crate::par::{self, Execution};

/// Relative slack allowed on μ.
pub const MU_REL_TOL: f64 = 1e-9;
/// Number of pumping steps checked for dual certificates.
pub const PUMPING_STEPS: usize = 20;

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "status", content = "reason", rename_all = "kebab-case")]
pub enum Status {
    Verified,
    Falsified,
    Inconclusive(String),
}

impl Status {
    pub fn is_verified(&self) -> bool {
        matches!(self, Status::Verified)
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct PrimalCertificate {
    pub y: Point,
    pub mu: f64,
    /// M(T(y)/y)
    pub achieved: f64,
    /// μ − M(T(y)/y)
    pub slack: f64,
    pub status: Status,
}

impl PrimalCertificate {
    /// log μ, the upper bound on ρ.
    pub fn bound(&self) -> f64 {
        self.mu.ln()
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct DualCertificate {
    pub u: Point,
    pub mu: f64,
    /// m(T̂_r(u)/u)
    pub achieved: f64,
    /// m(T̂_r(u)/u) − μ
    pub slack: f64,
    /// log m(T̂_r^k(u)/u) − k log μ for k = 1..=20.
    pub pumping: Vec<f64>,
    pub status: Status,
}

impl DualCertificate {
    /// log μ, the lower bound on ρ.
    pub fn bound(&self) -> f64 {
        self.mu.ln()
    }

    fn trivial(u: Point, reason: &str) -> Self {
        DualCertificate {
            u,
            mu: 0.0,
            achieved: 0.0,
            slack: 0.0,
            pumping: Vec::new(),
            status: Status::Inconclusive(reason.into()),
        }
    }
}

fn cone_point(p: &Point) -> Result<ConePoint> {
    ConePoint::new(p.clone())
}

/// Verified iff M(T(y)/y) ≤ μ(1 + 1e-9).
pub fn verify_primal(t: &OperatorSpec, y: &Point, mu: f64) -> Result<PrimalCertificate> {
    if !t.is_cone_operator() {
        return Err(domain("primal certificates are defined for cone operators"));
    }
    if !(mu > 0.0) || !mu.is_finite() {
        return Err(invalid("μ must be positive and finite"));
    }
    let yc = cone_point(y)?;
    if !yc.is_interior() {
        return Err(domain("primal certificate point must be interior"));
    }
    let ty = cone_point(&t.apply(y)?)?;
    let achieved = gauge_max(&yc, &ty)?;
    let status = if achieved <= mu * (1.0 + MU_REL_TOL) {
        Status::Verified
    } else {
        Status::Falsified
    };
    Ok(PrimalCertificate {
        y: y.clone(),
        mu,
        achieved,
        slack: mu - achieved,
        status,
    })
}

/// m(T̂_r(u)/u), or an explanation when the recession map does not settle.
pub fn dual_value(
    t: &OperatorSpec,
    u: &ConePoint,
    opts: &RadialOptions,
) -> Result<std::result::Result<(f64, ConePoint), String>> {
    let r = recession_map(t, u, opts)?;
    let Some(v) = r.value else {
        return Ok(Err(r
            .reason
            .unwrap_or_else(|| "recession map did not converge".into())));
    };
    let rc = ConePoint::new(v)?;
    if rc.classification() == crate::cone::Classification::Zero {
        return Ok(Ok((0.0, rc)));
    }
    Ok(Ok((gauge_min(u, &rc)?, rc)))
}

/// Verified iff m(T̂_r(u)/u) ≥ μ(1 − 1e-9) and the k-step pumping
/// inequalities hold for k ≤ 20.
pub fn verify_dual(
    t: &OperatorSpec,
    u: &Point,
    mu: f64,
    opts: &RadialOptions,
) -> Result<DualCertificate> {
    if !t.is_cone_operator() {
        return Err(domain("dual certificates are defined for cone operators"));
    }
    if !(mu > 0.0) || !mu.is_finite() {
        return Err(invalid("μ must be positive and finite"));
    }
    let uc = cone_point(u)?;
    if uc.classification() == crate::cone::Classification::Zero {
        return Err(domain("dual certificate direction must be nonzero"));
    }
    let (achieved, first) = match dual_value(t, &uc, opts)? {
        Ok(v) => v,
        Err(reason) => {
            return Ok(DualCertificate {
                u: u.clone(),
                mu,
                achieved: 0.0,
                slack: -mu,
                pumping: Vec::new(),
                status: Status::Inconclusive(reason),
            })
        }
    };
    let mut out = DualCertificate {
        u: u.clone(),
        mu,
        achieved,
        slack: achieved - mu,
        pumping: Vec::with_capacity(PUMPING_STEPS),
        status: Status::Verified,
    };
    if achieved < mu * (1.0 - MU_REL_TOL) {
        out.status = Status::Falsified;
        return Ok(out);
    }
    // T̂_r is positively homogeneous, so R_k may be renormalized; the
    // dropped scale is carried in `log_scale`.
    let log_mu = mu.ln();
    let mut r = first;
    let mut log_scale = 0.0;
    for k in 1..=PUMPING_STEPS {
        if k > 1 {
            let n = r.norm();
            log_scale += n.ln();
            let rn = r.scale(1.0 / n)?;
            match dual_step(t, &rn, opts)? {
                Ok(next) => r = next,
                Err(reason) => {
                    out.status = Status::Inconclusive(format!("pumping step {k}: {reason}"));
                    return Ok(out);
                }
            }
        }
        let g = gauge_min(&uc, &r)?;
        let margin = g.ln() + log_scale - k as f64 * log_mu;
        out.pumping.push(margin);
        let tol = 1e-9 * k as f64 * log_mu.abs().max(1.0);
        if !(margin >= -tol) {
            out.status = Status::Falsified;
            return Ok(out);
        }
    }
    Ok(out)
}

fn dual_step(
    t: &OperatorSpec,
    r: &ConePoint,
    opts: &RadialOptions,
) -> Result<std::result::Result<ConePoint, String>> {
    let res = recession_map(t, r, opts)?;
    match res.value {
        Some(v) => Ok(Ok(ConePoint::new(v)?)),
        None => Ok(Err(res.reason.unwrap_or_default())),
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct DualSearchOptions {
    /// Orbit length for candidate directions.
    pub orbit_steps: usize,
    pub radial: RadialOptions,
    #[serde(default)]
    pub execution: Execution,
}

impl Default for DualSearchOptions {
    fn default() -> Self {
        DualSearchOptions {
            orbit_steps: 60,
            radial: RadialOptions::default(),
            execution: Execution::default(),
        }
    }
}

/// Relative thresholds at which candidates are snapped to the boundary.
pub const SNAP_LEVELS: [f64; 3] = [1e-4, 1e-8, 1e-12];

/// Best dual certificate over normalized orbit iterates, the given seeds and
/// their boundary snaps. Ties go to the earliest candidate.
pub fn search_dual(
    t: &OperatorSpec,
    seeds: &[Point],
    opts: &DualSearchOptions,
) -> Result<DualCertificate> {
    if !t.is_cone_operator() {
        return Ok(DualCertificate::trivial(
            Point::Vector(vec![0.0; t.dim()]),
            "not a cone operator: no recession certificate",
        ));
    }
    let candidates = dual_candidates(t, seeds, opts.orbit_steps)?;
    if candidates.is_empty() {
        return Ok(DualCertificate::trivial(
            unit_interior(t.space(), t.dim())?.into_point(),
            "no candidate directions",
        ));
    }
    let values = par::map_slice(opts.execution, &candidates, |c| {
        match dual_value(t, c, &opts.radial) {
            Ok(Ok((mu, _))) if mu.is_finite() => mu,
            _ => f64::NEG_INFINITY,
        }
    });
    let (best, mu) =
        values
            .iter()
            .copied()
            .enumerate()
            .fold(
                (0, f64::NEG_INFINITY),
                |b, (i, v)| if v > b.1 { (i, v) } else { b },
            );
    let u = candidates[best].point().clone();
    if !(mu > 0.0) {
        return Ok(DualCertificate::trivial(
            u,
            "no candidate gives a positive μ",
        ));
    }
    verify_dual(t, &u, mu, &opts.radial)
}

/// Candidate directions: the orbit of the unit interior point (and, for
/// linear maps, its iterates T^(2^j) by repeated squaring), the seeds, and
/// every candidate snapped to the boundary at each level in `SNAP_LEVELS`.
pub fn dual_candidates(
    t: &OperatorSpec,
    seeds: &[Point],
    orbit_steps: usize,
) -> Result<Vec<ConePoint>> {
    let mut base: Vec<ConePoint> = Vec::new();
    let x0 = unit_interior(t.space(), t.dim())?;
    let mut cur = x0.clone();
    base.push(x0.normalized());
    // Rescaling the running point is only harmless for homogeneous maps.
    let homogeneous = t.is_positively_homogeneous();
    for _ in 0..orbit_steps {
        let Ok(next) = t.apply(cur.point()).and_then(ConePoint::new) else {
            break;
        };
        if !next.norm().is_finite() || next.classification() == crate::cone::Classification::Zero {
            break;
        }
        base.push(next.normalized());
        if !next.is_interior() {
            break;
        }
        cur = if homogeneous { next.normalized() } else { next };
    }
    if let Some(m) = linear_matrix(t) {
        let mut p = m.scale(1.0 / m.max_abs());
        for _ in 0..40 {
            p = p.matmul(&p);
            let s = p.max_abs();
            if !(s > 0.0) || !s.is_finite() {
                break;
            }
            p = p.scale(1.0 / s);
            if let Ok(c) = ConePoint::standard(p.mul_vec(&vec![1.0; p.dim()])) {
                if c.classification() != crate::cone::Classification::Zero {
                    base.push(c.normalized());
                }
            }
        }
    }
    for s in seeds {
        if let Ok(c) = ConePoint::new(s.clone()) {
            if c.classification() != crate::cone::Classification::Zero && c.dim() == t.dim() {
                base.push(c.normalized());
            }
        }
    }
    let mut out = base.clone();
    for c in &base {
        for tau in SNAP_LEVELS {
            if let Some(s) = snap(c, tau) {
                out.push(s);
            }
        }
    }
    Ok(out)
}

/// The matrix of a linear cone operator (nonnegative matrices, the identity
/// and their composites).
pub fn linear_matrix(t: &OperatorSpec) -> Option<Mat> {
    match t {
        OperatorSpec::NonnegMatrix { matrix } => Some(matrix.clone()),
        OperatorSpec::Identity { space, dim }
            if *space == crate::hemi::SpaceKind::StandardConeInterior =>
        {
            Some(Mat::identity(*dim))
        }
        OperatorSpec::Composite { operators } => {
            let mut acc: Option<Mat> = None;
            for op in operators {
                let m = linear_matrix(op)?;
                acc = Some(match acc {
                    None => m,
                    Some(a) => m.matmul(&a),
                });
            }
            acc
        }
        _ => None,
    }
}

/// Drops coordinates (or eigenvalues) below τ·max; `None` if nothing changes.
pub fn snap(c: &ConePoint, tau: f64) -> Option<ConePoint> {
    match c.point() {
        Point::Vector(v) => {
            let max = v.iter().copied().fold(0.0, f64::max);
            if !v.iter().any(|x| *x > 0.0 && *x < tau * max) {
                return None;
            }
            let w: Vec<f64> = v
                .iter()
                .map(|x| if *x < tau * max { 0.0 } else { *x })
                .collect();
            ConePoint::standard(w).ok().map(|p| p.normalized())
        }
        Point::Matrix(m) => {
            let e = SymEigen::new(m);
            let max = e.max();
            if !e.values.iter().any(|l| *l < tau * max && *l != 0.0) {
                return None;
            }
            let kept = e.map(|l| if l < tau * max { 0.0 } else { l });
            ConePoint::psd(kept.symmetrize())
                .ok()
                .map(|p| p.normalized())
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "kebab-case")]
pub enum EvalForm {
    /// x ↦ x(ω)
    Coordinate { index: usize },
    /// x ↦ φ(x) with φ on the unit sphere of the dual norm.
    DualBall { phi: Vec<f64> },
    /// x ↦ ⟨w, x⟩, compared on the log scale.
    ExtremeRay { ray: ExtremeRay },
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct EvalFormCertificate {
    #[serde(skip_serializing_if = "Option::is_none")]
    pub form: Option<EvalForm>,
    pub rate: f64,
    pub horizon: usize,
    /// min_k of the margin, over the certified form (or the best violator).
    pub min_margin: f64,
    pub status: Status,
}

fn kn_tol(k: usize, r: f64) -> f64 {
    1e-9 * k as f64 * r.abs().max(1.0) + 1e-9
}

/// Searches the extreme points of the dual unit ball (±eᵢ for the sup norm,
/// eᵢ for the top hemi-norm) for φ with φ(T^k x) ≥ φ(x) + k·r − tol_k for
/// all k ≤ K.
pub fn kohlberg_neyman_form(
    t: &OperatorSpec,
    norm: MetricKind,
    x: &[f64],
    rate: f64,
    horizon: usize,
) -> Result<EvalFormCertificate> {
    if !matches!(norm, MetricKind::NormSup | MetricKind::Top) {
        return Err(invalid(
            "evaluation forms are enumerated for the sup norm and top hemi-norm",
        ));
    }
    let n = t.dim();
    if x.len() != n {
        return Err(crate::error::Error::DimensionMismatch {
            expected: n,
            found: x.len(),
        });
    }
    let forms: Vec<(f64, usize)> = match norm {
        MetricKind::NormSup => (0..n).flat_map(|i| [(1.0, i), (-1.0, i)]).collect(),
        _ => (0..n).map(|i| (1.0, i)).collect(),
    };
    let mut margins = vec![f64::INFINITY; forms.len()];
    let mut cur = Point::Vector(x.to_vec());
    for k in 1..=horizon {
        cur = t.apply(&cur)?;
        let v = cur.as_vector()?;
        for (f, (sign, i)) in forms.iter().enumerate() {
            let m = sign * (v[*i] - x[*i]) - k as f64 * rate + kn_tol(k, rate);
            margins[f] = margins[f].min(m);
        }
    }
    let (best, margin) =
        margins
            .iter()
            .copied()
            .enumerate()
            .fold(
                (0, f64::NEG_INFINITY),
                |b, (i, m)| if m > b.1 { (i, m) } else { b },
            );
    // Lowest-index form that passes.
    let pick = margins.iter().position(|m| *m >= 0.0).unwrap_or(best);
    let (sign, i) = forms[pick];
    let form = match norm {
        MetricKind::Top => EvalForm::Coordinate { index: i },
        _ => {
            let mut phi = vec![0.0; n];
            phi[i] = sign;
            EvalForm::DualBall { phi }
        }
    };
    Ok(EvalFormCertificate {
        form: Some(form),
        rate,
        horizon,
        min_margin: if margins[pick] >= 0.0 {
            margins[pick]
        } else {
            margin
        },
        status: if margins[pick] >= 0.0 {
            Status::Verified
        } else {
            Status::Falsified
        },
    })
}

/// Searches extreme rays w with log⟨w, T^k x⟩ ≥ log⟨w, x⟩ + k·r − tol_k
/// for k ≤ K. Candidates: the coordinate rays, plus on the PSD cone the
/// eigenvectors of `hint` (typically a dual certificate) and of T^K x.
/// For maps that are only sub-homogeneous the guarantee needs ρ > 0, so the
/// search refuses to run when `known_lower` is not positive. The reported
/// horizon shrinks if the orbit leaves the numerical interior.
pub fn extreme_ray_certificate(
    t: &OperatorSpec,
    x: &Point,
    rate: f64,
    horizon: usize,
    hint: Option<&Point>,
    known_lower: Option<f64>,
) -> Result<EvalFormCertificate> {
    if !t.is_cone_operator() {
        return Err(domain(
            "extreme-ray certificates are defined for cone operators",
        ));
    }
    let homogeneous = t.is_positively_homogeneous();
    if !homogeneous && known_lower.is_none_or(|l| l <= 0.0) {
        return Ok(EvalFormCertificate {
            form: None,
            rate,
            horizon,
            min_margin: f64::NAN,
            status: Status::Inconclusive(
                "sub-homogeneous map without a positive lower bound on the rate".into(),
            ),
        });
    }
    let xc = cone_point(x)?;
    if !xc.is_interior() {
        return Err(domain("orbit start must be interior"));
    }
    // Orbit on the log scale, truncated if it leaves the numerical interior.
    let mut orbit = Vec::with_capacity(horizon);
    let mut cur = xc.clone();
    let mut scale = 0.0;
    for _ in 0..horizon {
        let Ok(mut next) = t.apply(cur.point()).and_then(|p| cone_point(&p)) else {
            break;
        };
        if !next.is_interior() {
            break;
        }
        if homogeneous {
            let n = next.norm();
            next = next.scale(1.0 / n)?;
            scale += n.ln();
        }
        orbit.push((next.clone(), scale));
        cur = next;
    }
    let mut rays: Vec<ExtremeRay> = Vec::new();
    match xc.kind() {
        ConeKind::Standard => rays.extend((0..t.dim()).map(|index| ExtremeRay::Standard {
            index,
            dim: t.dim(),
        })),
        ConeKind::Psd => {
            let mut sources: Vec<Mat> = Vec::new();
            if let Some(Point::Matrix(h)) = hint {
                sources.push(h.clone());
            }
            if let Some((last, _)) = orbit.last() {
                sources.push(last.point().as_matrix()?.clone());
            }
            for s in &sources {
                let e = SymEigen::new(s);
                for k in (0..s.dim()).rev() {
                    rays.push(ExtremeRay::psd(e.vector(k))?);
                }
            }
            for i in 0..t.dim() {
                let mut v = vec![0.0; t.dim()];
                v[i] = 1.0;
                rays.push(ExtremeRay::psd(v)?);
            }
        }
    }
    let margins: Vec<f64> = rays
        .iter()
        .map(|w| {
            let base = w.pair(x).map(f64::ln).unwrap_or(f64::NAN);
            orbit
                .iter()
                .enumerate()
                .map(|(i, (p, s))| {
                    let k = i + 1;
                    let v = w.pair(p.point()).map(f64::ln).unwrap_or(f64::NAN) + s;
                    v - base - k as f64 * rate + kn_tol(k, rate)
                })
                .fold(f64::INFINITY, |a, b| {
                    if b.is_nan() {
                        f64::NEG_INFINITY
                    } else {
                        a.min(b)
                    }
                })
        })
        .collect();
    if orbit.is_empty() {
        return Err(domain("orbit left the interior at the first step"));
    }
    let horizon = orbit.len();
    let pick = margins.iter().position(|m| *m >= 0.0);
    let idx = pick.unwrap_or_else(|| {
        margins
            .iter()
            .copied()
            .enumerate()
            .fold(
                (0, f64::NEG_INFINITY),
                |b, (i, m)| if m > b.1 { (i, m) } else { b },
            )
            .0
    });
    Ok(EvalFormCertificate {
        form: Some(EvalForm::ExtremeRay {
            ray: rays[idx].clone(),
        }),
        rate,
        horizon,
        min_margin: margins[idx],
        status: if pick.is_some() {
            Status::Verified
        } else {
            Status::Falsified
        },
    })
}
