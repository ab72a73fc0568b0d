//! Problem files, reports, and the pipelines behind the `escrate` tool.
//!
//! Every report embeds the problem with all defaults filled in, so a report
//! can be re-run from its own `problem` field. Reports are reproducible from
//! (problem, seed) except for `generated_at`.

use std::io::{self, Write};
use std::time::{SystemTime, UNIX_EPOCH};

use serde::ser::Serialize;
use serde::{Deserialize, Serialize as SerializeDerive};
use serde_json::ser::{Formatter, PrettyFormatter};

use crate::certificates::{
    dual_candidates, extreme_ray_certificate, kohlberg_neyman_form, search_dual, verify_dual,
    verify_primal, DualCertificate, DualSearchOptions, EvalFormCertificate, PrimalCertificate,
    Status,
};
use crate::cone::{gauge_max, ConeMartinFunction, ConePoint, MartinVariant};
use crate::error::{check_dim, invalid, Error, Result};
use crate::escape::{
    orbit_rate, y_alpha_path, FixedPointStatus, RateEstimate, YAlphaOptions, YAlphaPath,
};
use crate::games::{game_rate, karp_cycle_mean, GameRateOptions, GameRateResult, GameSpec};
use crate::hemi::{
    check_geodesic_identity, check_star_shaped, check_triangle, GeodesicFamily, GeodesicKind,
    HemiMetric, MetricKind, Point, SampleReport, SpaceKind, StarShapedReport,
};
use crate::linalg::{Mat, SymEigen};
use crate::operators::{check_nonexpansive, unit_interior, OperatorSpec, RadialOptions};
use crate::par::{self, Execution};
use crate::sampling::{random_spd, rng_for, SamplePlan};

pub const TOOL: &str = "escrate";
pub const VERSION: &str = env!("CARGO_PKG_VERSION");

/// Lower bounds may exceed upper bounds by this much before the interval
/// counts as empty.
pub const INTERVAL_SLACK: f64 = 1e-8;

fn default_horizon() -> usize {
    1000
}
fn default_tol() -> f64 {
    1e-9
}
fn default_samples() -> usize {
    1000
}
fn default_orbit_steps() -> usize {
    60
}
fn default_passes() -> usize {
    200
}
fn default_levels() -> Vec<f64> {
    vec![0.0, 1.0, 2.0]
}

/// A user-supplied certificate: a point and the claimed μ.
#[derive(Clone, Debug, PartialEq, SerializeDerive, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Claim {
    pub point: Point,
    pub mu: f64,
}

#[derive(Clone, Debug, Default, PartialEq, SerializeDerive, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Claims {
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub primal: Option<Claim>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub dual: Option<Claim>,
}

#[derive(Clone, Debug, PartialEq, SerializeDerive, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ProblemFile {
    pub operator: OperatorSpec,
    /// Defaults to the operator's first natural metric.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub metric: Option<HemiMetric>,
    /// Orbit start and geodesic center. Defaults to 1, I or 0.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub start: Option<Point>,
    #[serde(default = "default_horizon")]
    pub horizon: usize,
    #[serde(default)]
    pub seed: u64,
    #[serde(default = "default_tol")]
    pub tol: f64,
    /// Samples per check (check-space) or per level (horoballs).
    #[serde(default = "default_samples")]
    pub samples: usize,
    /// Declares a star-shaped setup; enables the y_α path.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub geodesics: Option<GeodesicKind>,
    #[serde(default)]
    pub radial: RadialOptions,
    #[serde(default)]
    pub y_alpha: YAlphaOptions,
    #[serde(default = "default_orbit_steps")]
    pub dual_orbit_steps: usize,
    #[serde(default = "default_passes")]
    pub local_search_passes: usize,
    /// Extra candidate points for the certificate searches.
    #[serde(default)]
    pub seeds: Vec<Point>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub certificates: Option<Claims>,
    #[serde(default = "default_levels")]
    pub levels: Vec<f64>,
    #[serde(default)]
    pub execution: Execution,
}

impl ProblemFile {
    /// A problem with every optional field at its default.
    pub fn new(operator: OperatorSpec) -> Self {
        ProblemFile {
            operator,
            metric: None,
            start: None,
            horizon: default_horizon(),
            seed: 0,
            tol: default_tol(),
            samples: default_samples(),
            geodesics: None,
            radial: RadialOptions::default(),
            y_alpha: YAlphaOptions::default(),
            dual_orbit_steps: default_orbit_steps(),
            local_search_passes: default_passes(),
            seeds: Vec::new(),
            certificates: None,
            levels: default_levels(),
            execution: Execution::default(),
        }
    }

    pub fn validate(&self) -> Result<()> {
        let t = &self.operator;
        t.validate()?;
        if let Some(m) = &self.metric {
            if m.space() != t.space() {
                return Err(Error::Schema(format!(
                    "metric: space {:?} does not match the operator's {:?}",
                    m.space(),
                    t.space()
                )));
            }
            check_dim(t.dim(), m.dim()).map_err(|e| Error::Schema(format!("metric: {e}")))?;
        }
        if let Some(x) = &self.start {
            self.metric_or_natural()?
                .check_point(x)
                .map_err(|e| Error::Schema(format!("start: {e}")))?;
        }
        if self.horizon == 0 {
            return Err(Error::Schema("horizon: must be at least 1".into()));
        }
        if !(self.tol > 0.0) || !self.tol.is_finite() {
            return Err(Error::Schema("tol: must be positive and finite".into()));
        }
        if self.samples == 0 {
            return Err(Error::Schema("samples: must be at least 1".into()));
        }
        if self.levels.iter().any(|l| !l.is_finite()) {
            return Err(Error::Schema("levels: must be finite".into()));
        }
        for (i, s) in self.seeds.iter().enumerate() {
            check_dim(t.dim(), s.dim()).map_err(|e| Error::Schema(format!("seeds[{i}]: {e}")))?;
        }
        Ok(())
    }

    fn metric_or_natural(&self) -> Result<HemiMetric> {
        match self.metric {
            Some(m) => Ok(m),
            None => self.operator.natural_metric(),
        }
    }

    /// The problem with metric and start filled in.
    pub fn resolved(&self) -> Result<ProblemFile> {
        self.validate()?;
        let mut p = self.clone();
        let m = self.metric_or_natural()?;
        p.metric = Some(m);
        if p.start.is_none() {
            p.start = Some(default_start(&self.operator)?);
        }
        Ok(p)
    }

    pub fn metric(&self) -> Result<HemiMetric> {
        self.metric_or_natural()
    }

    pub fn start(&self) -> Result<Point> {
        match &self.start {
            Some(x) => Ok(x.clone()),
            None => default_start(&self.operator),
        }
    }

    fn dual_options(&self) -> DualSearchOptions {
        DualSearchOptions {
            orbit_steps: self.dual_orbit_steps,
            radial: self.radial,
            execution: self.execution,
        }
    }

    fn sample_plan(&self) -> SamplePlan {
        SamplePlan::new(self.seed, self.samples)
            .with_tol(self.tol)
            .with_execution(self.execution)
    }
}

fn default_start(t: &OperatorSpec) -> Result<Point> {
    let space = t.space();
    if space.is_cone() {
        Ok(unit_interior(space, t.dim())?.into_point())
    } else {
        Ok(Point::Vector(vec![0.0; t.dim()]))
    }
}

/// Parses and validates a problem file. Errors name the offending line,
/// column or field.
pub fn parse_problem(text: &str) -> Result<ProblemFile> {
    let p: ProblemFile = serde_json::from_str(text).map_err(|e| Error::Schema(e.to_string()))?;
    p.validate()?;
    Ok(p)
}

/// Formats floats with 17 significant digits, which round-trip exactly.
struct Precise<F>(F);

macro_rules! forward {
    ($($name:ident($($arg:ident: $ty:ty),*);)*) => {
        $(
            fn $name<W: ?Sized + Write>(&mut self, w: &mut W $(, $arg: $ty)*) -> io::Result<()> {
                self.0.$name(w $(, $arg)*)
            }
        )*
    };
}

impl<F: Formatter> Formatter for Precise<F> {
    fn write_f64<W: ?Sized + Write>(&mut self, w: &mut W, v: f64) -> io::Result<()> {
        write!(w, "{v:.16e}")
    }

    fn write_f32<W: ?Sized + Write>(&mut self, w: &mut W, v: f32) -> io::Result<()> {
        self.write_f64(w, v as f64)
    }

    forward! {
        begin_array();
        end_array();
        begin_array_value(first: bool);
        end_array_value();
        begin_object();
        end_object();
        begin_object_key(first: bool);
        begin_object_value();
        end_object_value();
    }
}

/// Pretty JSON with 17-significant-digit floats. Non-finite floats become
/// `null`.
pub fn to_json<T: Serialize>(value: &T) -> Result<String> {
    let mut buf = Vec::new();
    let mut ser = serde_json::Serializer::with_formatter(
        &mut buf,
        Precise(PrettyFormatter::with_indent(b"  ")),
    );
    value.serialize(&mut ser)?;
    buf.push(b'\n');
    Ok(String::from_utf8(buf).expect("serde_json writes UTF-8"))
}

pub fn emit_problem(p: &ProblemFile) -> Result<String> {
    to_json(p)
}

fn now() -> u64 {
    SystemTime::now()
        .duration_since(UNIX_EPOCH)
        .map(|d| d.as_secs())
        .unwrap_or(0)
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, SerializeDerive, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Verdict {
    Verified,
    Falsified,
    Inconclusive,
}

impl Verdict {
    pub fn exit_code(self) -> i32 {
        match self {
            Verdict::Verified => 0,
            Verdict::Falsified => 2,
            Verdict::Inconclusive => 3,
        }
    }

    fn of(status: &Status) -> Self {
        match status {
            Status::Verified => Verdict::Verified,
            Status::Falsified => Verdict::Falsified,
            Status::Inconclusive(_) => Verdict::Inconclusive,
        }
    }

    /// Falsified dominates inconclusive, which dominates verified.
    fn and(self, other: Verdict) -> Verdict {
        match (self, other) {
            (Verdict::Falsified, _) | (_, Verdict::Falsified) => Verdict::Falsified,
            (Verdict::Inconclusive, _) | (_, Verdict::Inconclusive) => Verdict::Inconclusive,
            _ => Verdict::Verified,
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, SerializeDerive, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Units {
    /// log μ, for cone operators.
    Log,
    Additive,
}

/// `None` stands for −∞ (lower) or +∞ (upper).
#[derive(Clone, Copy, Debug, PartialEq, SerializeDerive, Deserialize)]
pub struct Interval {
    pub lower: Option<f64>,
    pub upper: Option<f64>,
}

impl Interval {
    pub fn exact(v: f64) -> Self {
        Interval {
            lower: Some(v),
            upper: Some(v),
        }
    }

    pub fn width(&self) -> f64 {
        match (self.lower, self.upper) {
            (Some(l), Some(u)) => u - l,
            _ => f64::INFINITY,
        }
    }

    pub fn contains(&self, v: f64, tol: f64) -> bool {
        self.lower.is_none_or(|l| v >= l - tol) && self.upper.is_none_or(|u| v <= u + tol)
    }

    pub fn is_nonempty(&self) -> bool {
        match (self.lower, self.upper) {
            (Some(l), Some(u)) => l <= u + INTERVAL_SLACK,
            _ => true,
        }
    }

    fn verdict(&self) -> Verdict {
        if !self.is_nonempty() {
            Verdict::Falsified
        } else if self.lower.is_some() && self.upper.is_some() {
            Verdict::Verified
        } else {
            Verdict::Inconclusive
        }
    }
}

fn min_opt(a: Option<f64>, b: f64) -> Option<f64> {
    if !b.is_finite() {
        return a;
    }
    Some(a.map_or(b, |a| a.min(b)))
}

#[derive(Clone, Debug, PartialEq, SerializeDerive, Deserialize)]
pub struct YAlphaSummary {
    pub steps: usize,
    pub converged: usize,
    pub min_displacement: f64,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub best_alpha: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub final_status: Option<FixedPointStatus>,
}

impl YAlphaSummary {
    fn of(path: &YAlphaPath) -> Self {
        YAlphaSummary {
            steps: path.steps.len(),
            converged: path
                .steps
                .iter()
                .filter(|s| s.status == FixedPointStatus::Converged)
                .count(),
            min_displacement: path.min_displacement(),
            best_alpha: path.best().map(|s| s.alpha),
            final_status: path.steps.last().map(|s| s.status),
        }
    }
}

#[derive(Clone, Debug, PartialEq, SerializeDerive, Deserialize)]
pub struct RateReport {
    pub tool: String,
    pub version: String,
    /// Seconds since the Unix epoch; the only field that varies between runs.
    pub generated_at: u64,
    pub seed: u64,
    pub problem: ProblemFile,
    pub units: Units,
    /// The hemi-metric the interval refers to.
    pub interval_metric: MetricKind,
    pub interval: Interval,
    pub orbit: RateEstimate,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub y_alpha: Option<YAlphaSummary>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub primal: Option<PrimalCertificate>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub dual: Option<DualCertificate>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub eval_form: Option<EvalFormCertificate>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub game: Option<GameRateResult>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub cycle_mean: Option<f64>,
    /// inf_y δ(y, T(y)) when it is reported separately from the rate.
    #[serde(skip_serializing_if = "Option::is_none")]
    pub displacement_inf: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub strict_gap: Option<f64>,
    pub notices: Vec<String>,
    pub verdict: Verdict,
}

fn kind_name(k: MetricKind) -> String {
    serde_json::to_value(k)
        .ok()
        .and_then(|v| v.as_str().map(str::to_owned))
        .unwrap_or_else(|| format!("{k:?}"))
}

/// The orbit estimate, retried with a shorter horizon if the orbit leaves
/// the domain.
fn orbit_estimate(
    t: &OperatorSpec,
    m: &HemiMetric,
    x: &Point,
    horizon: usize,
    notices: &mut Vec<String>,
) -> Result<RateEstimate> {
    match orbit_rate(t, m, x, horizon) {
        Ok((est, _)) => Ok(est),
        Err(Error::DomainEscape { k, reason }) if k > 1 => {
            notices.push(format!(
                "orbit left the domain at iteration {k} ({reason}); horizon cut to {}",
                k - 1
            ));
            Ok(orbit_rate(t, m, x, k - 1)?.0)
        }
        Err(e) => Err(e),
    }
}

/// Certified escape-rate interval with the supporting certificates.
pub fn run_rate(problem: &ProblemFile) -> Result<RateReport> {
    let p = problem.resolved()?;
    let t = &p.operator;
    let m = p.metric()?;
    let x0 = p.start()?;
    let mut notices = Vec::new();
    let orbit = orbit_estimate(t, &m, &x0, p.horizon, &mut notices)?;
    let orbit_upper = orbit.upper_from_orbit.min(orbit.upper_from_point);

    let mut path = None;
    if let Some(kind) = p.geodesics {
        match GeodesicFamily::new(x0.clone(), kind, m)
            .and_then(|g| y_alpha_path(t, &m, &g, &p.y_alpha))
        {
            Ok(y) => path = Some(y),
            Err(e) => notices.push(format!("y_alpha path skipped: {e}")),
        }
    }
    let path_upper = path
        .as_ref()
        .map_or(f64::INFINITY, YAlphaPath::min_displacement);

    let mut r = RateReport {
        tool: TOOL.into(),
        version: VERSION.into(),
        generated_at: now(),
        seed: p.seed,
        problem: p.clone(),
        units: Units::Additive,
        interval_metric: m.kind(),
        interval: Interval {
            lower: None,
            upper: None,
        },
        orbit,
        y_alpha: path.as_ref().map(YAlphaSummary::of),
        primal: None,
        dual: None,
        eval_form: None,
        game: None,
        cycle_mean: None,
        displacement_inf: None,
        strict_gap: None,
        notices: Vec::new(),
        verdict: Verdict::Inconclusive,
    };

    if t.is_cone_operator() && !matches!(t, OperatorSpec::Identity { .. }) {
        cone_rate(
            &p,
            &m,
            &x0,
            path.as_ref(),
            orbit_upper.min(path_upper),
            &mut r,
            &mut notices,
        )?;
    } else {
        r.interval = match t {
            OperatorSpec::Identity { .. } => Interval::exact(0.0),
            OperatorSpec::Translation { c, .. } => {
                let rate = m.delta(
                    &Point::Vector(vec![0.0; c.len()]),
                    &Point::Vector(c.clone()),
                )?;
                if matches!(m.kind(), MetricKind::NormSup | MetricKind::Top) {
                    r.eval_form = Some(kohlberg_neyman_form(
                        t,
                        m.kind(),
                        x0.as_vector()?,
                        rate,
                        p.horizon,
                    )?);
                }
                Interval::exact(rate)
            }
            OperatorSpec::MaxPlus { .. } | OperatorSpec::Shapley { .. } => {
                let (iv, g, cycle) = game_interval(&p, &m)?;
                if let (Some(rate), MetricKind::NormSup | MetricKind::Top) = (iv.lower, m.kind()) {
                    r.eval_form = Some(kohlberg_neyman_form(
                        t,
                        m.kind(),
                        x0.as_vector()?,
                        rate,
                        p.horizon,
                    )?);
                }
                r.game = Some(g);
                r.cycle_mean = cycle;
                Interval {
                    lower: iv.lower,
                    upper: min_opt(iv.upper, orbit_upper),
                }
            }
            OperatorSpec::TorusShift { t_step, .. } => {
                let inf = r.orbit.upper_from_point;
                let upper = r.orbit.upper_from_orbit;
                notices.push("not star-shaped: maximin not applicable".into());
                r.displacement_inf = Some(inf);
                r.strict_gap = Some(inf - upper);
                Interval {
                    lower: Some(t_step.abs()),
                    upper: Some(upper),
                }
            }
            _ => {
                notices.push("no lower-bound certificate for this operator".into());
                Interval {
                    lower: None,
                    upper: min_opt(None, orbit_upper.min(path_upper)),
                }
            }
        };
        if t.is_cone_operator() {
            r.units = Units::Log;
        }
    }
    if let Some(ef) = &r.eval_form {
        if !ef.status.is_verified() {
            notices.push("no evaluation form verified at the reported rate".into());
        }
    }
    r.verdict = r.interval.verdict();
    if r.verdict == Verdict::Falsified {
        notices.push("certified bounds cross: lower exceeds upper".into());
    }
    r.notices = notices;
    Ok(r)
}

/// M(T(y)/y), or +∞ when y is unusable.
fn primal_value(t: &OperatorSpec, y: &Point) -> f64 {
    let value = || -> Result<f64> {
        let yc = ConePoint::new(y.clone())?;
        if !yc.is_interior() {
            return Ok(f64::INFINITY);
        }
        let ty = ConePoint::new(t.apply_with(y, Execution::Sequential)?)?;
        gauge_max(&yc, &ty)
    };
    value()
        .ok()
        .filter(|v| v.is_finite())
        .unwrap_or(f64::INFINITY)
}

fn cone_rate(
    p: &ProblemFile,
    m: &HemiMetric,
    x0: &Point,
    path: Option<&YAlphaPath>,
    orbit_upper: f64,
    r: &mut RateReport,
    notices: &mut Vec<String>,
) -> Result<()> {
    let t = &p.operator;
    r.units = Units::Log;
    let interval_metric = if m.kind() == MetricKind::Rfunk {
        MetricKind::Rfunk
    } else {
        MetricKind::RfunkPlus
    };
    r.interval_metric = interval_metric;
    if interval_metric != m.kind() {
        notices.push(format!(
            "certified interval is for the {} hemi-metric",
            kind_name(interval_metric)
        ));
    }

    // Primal: the least M(T(y)/y) over the start, its large multiples, the
    // y_α path, the seeds and the interior dual candidates.
    let mut cands: Vec<Point> = vec![x0.clone()];
    cands.extend([1e3, 1e6, 1e9].map(|s| x0.scale(s)));
    if let Some(path) = path {
        cands.extend(path.steps.iter().map(|s| s.y.clone()));
    }
    cands.extend(p.seeds.iter().cloned());
    cands.extend(
        dual_candidates(t, &p.seeds, p.dual_orbit_steps)?
            .into_iter()
            .filter(ConePoint::is_interior)
            .map(ConePoint::into_point),
    );
    let values = par::map_slice(p.execution, &cands, |y| primal_value(t, y));
    let (best, mu_p) = values
        .iter()
        .copied()
        .enumerate()
        .fold(
            (0, f64::INFINITY),
            |b, (i, v)| if v < b.1 { (i, v) } else { b },
        );
    let primal = if mu_p.is_finite() && mu_p > 0.0 {
        Some(verify_primal(t, &cands[best], mu_p)?)
    } else {
        notices.push("no primal candidate gives a finite μ".into());
        None
    };

    let mut seeds = p.seeds.clone();
    if let Some(pc) = &primal {
        seeds.push(pc.y.clone());
    }
    let dual = search_dual(t, &seeds, &p.dual_options())?;
    if let Status::Inconclusive(reason) = &dual.status {
        notices.push(format!("dual search inconclusive: {reason}"));
    }

    let lower_rf = Some(&dual)
        .filter(|d| d.status.is_verified())
        .map(DualCertificate::bound);
    let upper_rf = primal
        .as_ref()
        .filter(|c| c.status.is_verified())
        .map(PrimalCertificate::bound);
    // The orbit bound only transfers when the orbit metric dominates.
    let orbit_transfers = match interval_metric {
        MetricKind::Rfunk => m.kind() == MetricKind::Rfunk,
        _ => matches!(m.kind(), MetricKind::RfunkPlus | MetricKind::Thompson),
    };
    r.interval = if interval_metric == MetricKind::Rfunk {
        Interval {
            lower: lower_rf,
            upper: if orbit_transfers {
                min_opt(upper_rf, orbit_upper)
            } else {
                upper_rf
            },
        }
    } else {
        let upper = upper_rf.map(|u| u.max(0.0));
        Interval {
            lower: Some(lower_rf.unwrap_or(0.0).max(0.0)),
            upper: if orbit_transfers {
                min_opt(upper, orbit_upper)
            } else {
                upper
            },
        }
    };

    if let Some(rate) = lower_rf {
        let ef = extreme_ray_certificate(t, x0, rate, p.horizon, Some(&dual.u), Some(rate))?;
        if ef.status.is_verified() {
            r.eval_form = Some(ef);
        }
    }
    r.primal = primal;
    r.dual = Some(dual);
    Ok(())
}

/// Interval for the rate of a game operator under `m`, the game result,
/// and the maximum cycle mean when the game is one-player deterministic.
fn game_interval(
    p: &ProblemFile,
    m: &HemiMetric,
) -> Result<(Interval, GameRateResult, Option<f64>)> {
    let game = match &p.operator {
        OperatorSpec::MaxPlus { matrix } => GameSpec::from_max_plus(&matrix.0)?,
        OperatorSpec::Shapley { game } => game.clone(),
        _ => return Err(invalid("not a game operator")),
    };
    let opts = GameRateOptions {
        horizon: p.horizon,
        local_search_passes: p.local_search_passes,
        execution: p.execution,
    };
    let g = game_rate(&game, &opts)?;
    let cycle = game
        .max_plus_weights()
        .map(|w| karp_cycle_mean(&w))
        .transpose()?;
    let k = g.omega_plus.horizon.max(1) as f64;
    // Bounds on ρ₊ = lim max T^k(0)/k and ρ₋ = lim min T^k(0)/k.
    let plus = match cycle {
        Some(c) => (c, c),
        None if g.omega_plus.least_violator.is_none() => {
            (g.rho_plus - g.omega_plus.tol / k, g.rho_plus)
        }
        None => (g.fekete_minus, g.rho_plus),
    };
    let minus = if g.omega_minus.least_violator.is_none() {
        (g.rho_minus, g.rho_minus + g.omega_minus.tol / k)
    } else {
        (g.rho_minus, g.fekete_plus)
    };
    let iv = match m.kind() {
        MetricKind::Top => Interval {
            lower: Some(plus.0),
            upper: Some(plus.1),
        },
        MetricKind::Bottom => Interval {
            lower: Some(-minus.1),
            upper: Some(-minus.0),
        },
        MetricKind::NormSup => Interval {
            lower: Some(plus.0.max(-minus.1)),
            upper: Some(plus.1.max(-minus.0)),
        },
        _ => Interval {
            lower: None,
            upper: None,
        },
    };
    Ok((iv, g, cycle))
}

#[derive(Clone, Debug, PartialEq, SerializeDerive, Deserialize)]
pub struct CertifyReport {
    pub tool: String,
    pub version: String,
    pub generated_at: u64,
    pub problem: ProblemFile,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub primal: Option<PrimalCertificate>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub dual: Option<DualCertificate>,
    pub verdict: Verdict,
}

/// Verifies the certificates supplied in the problem file.
pub fn certify(problem: &ProblemFile) -> Result<CertifyReport> {
    let p = problem.resolved()?;
    let claims = p
        .certificates
        .clone()
        .filter(|c| c.primal.is_some() || c.dual.is_some())
        .ok_or_else(|| invalid("missing certificate: the problem has no certificates to verify"))?;
    let t = &p.operator;
    let primal = claims
        .primal
        .as_ref()
        .map(|c| verify_primal(t, &c.point, c.mu))
        .transpose()?;
    let dual = claims
        .dual
        .as_ref()
        .map(|c| verify_dual(t, &c.point, c.mu, &p.radial))
        .transpose()?;
    let verdict = [
        primal.as_ref().map(|c| &c.status),
        dual.as_ref().map(|c| &c.status),
    ]
    .into_iter()
    .flatten()
    .fold(Verdict::Verified, |v, s| v.and(Verdict::of(s)));
    Ok(CertifyReport {
        tool: TOOL.into(),
        version: VERSION.into(),
        generated_at: now(),
        problem: p,
        primal,
        dual,
        verdict,
    })
}

#[derive(Clone, Debug, PartialEq, SerializeDerive, Deserialize)]
pub struct SpaceReport {
    pub tool: String,
    pub version: String,
    pub generated_at: u64,
    pub problem: ProblemFile,
    pub triangle: SampleReport,
    pub nonexpansive: SampleReport,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub geodesic: Option<SampleReport>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub star_shaped: Option<StarShapedReport>,
    pub verdict: Verdict,
}

/// Samples the triangle inequality, non-expansiveness of the operator and,
/// when geodesics are declared, the geodesic identity and star-shapedness.
pub fn check_space(problem: &ProblemFile) -> Result<SpaceReport> {
    let p = problem.resolved()?;
    let m = p.metric()?;
    let plan = p.sample_plan();
    let triangle = check_triangle(&m, &plan)?;
    let nonexpansive = check_nonexpansive(&p.operator, &m, &plan)?;
    let (mut geodesic, mut star_shaped) = (None, None);
    if let Some(kind) = p.geodesics {
        let g = GeodesicFamily::new(p.start()?, kind, m)?;
        geodesic = Some(check_geodesic_identity(&g, &plan)?);
        star_shaped = Some(check_star_shaped(&g, &m, &plan)?);
    }
    let passed = triangle.passed()
        && nonexpansive.passed()
        && geodesic.as_ref().is_none_or(SampleReport::passed)
        && star_shaped.as_ref().is_none_or(|s| s.summary.passed());
    Ok(SpaceReport {
        tool: TOOL.into(),
        version: VERSION.into(),
        generated_at: now(),
        problem: p,
        triangle,
        nonexpansive,
        geodesic,
        star_shaped,
        verdict: if passed {
            Verdict::Verified
        } else {
            Verdict::Falsified
        },
    })
}

#[derive(Clone, Debug, PartialEq, SerializeDerive, Deserialize)]
pub struct GameReport {
    pub tool: String,
    pub version: String,
    pub generated_at: u64,
    pub problem: ProblemFile,
    pub result: GameRateResult,
    pub interval: Interval,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub cycle_mean: Option<f64>,
    /// |ρ₊ − maximum cycle mean|
    #[serde(skip_serializing_if = "Option::is_none")]
    pub cycle_mean_gap: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub eval_form: Option<EvalFormCertificate>,
    pub verdict: Verdict,
}

/// Game rates with ω certificates, cross-checked against Karp's cycle mean
/// for one-player deterministic games.
pub fn game(problem: &ProblemFile) -> Result<GameReport> {
    let p = problem.resolved()?;
    if !matches!(
        p.operator,
        OperatorSpec::MaxPlus { .. } | OperatorSpec::Shapley { .. }
    ) {
        return Err(invalid(
            "the game command needs a max_plus or shapley operator",
        ));
    }
    let m = p.metric()?;
    let (interval, result, cycle_mean) = game_interval(&p, &m)?;
    let gap = cycle_mean.map(|c| (result.rho_plus - c).abs());
    let eval_form = match (interval.lower, m.kind()) {
        (Some(rate), MetricKind::NormSup | MetricKind::Top) => Some(kohlberg_neyman_form(
            &p.operator,
            m.kind(),
            p.start()?.as_vector()?,
            rate,
            p.horizon,
        )?),
        _ => None,
    };
    let omega_ok =
        result.omega_plus.least_violator.is_none() && result.omega_minus.least_violator.is_none();
    let verdict = match gap {
        Some(g) if g > p.tol * cycle_mean.unwrap_or(0.0).abs().max(1.0) => Verdict::Falsified,
        _ if !omega_ok => Verdict::Inconclusive,
        _ => interval.verdict(),
    };
    Ok(GameReport {
        tool: TOOL.into(),
        version: VERSION.into(),
        generated_at: now(),
        problem: p,
        result,
        interval,
        cycle_mean,
        cycle_mean_gap: gap,
        eval_form,
        verdict,
    })
}

/// (x₁₁, x₂₂, √2·x₁₂): an isometric chart of 2×2 symmetric matrices.
pub fn sym2_coordinates(x: &Mat) -> [f64; 3] {
    [x[(0, 0)], x[(1, 1)], std::f64::consts::SQRT_2 * x[(0, 1)]]
}

#[derive(Clone, Debug, PartialEq, SerializeDerive, Deserialize)]
pub struct HoroballLevel {
    pub level: f64,
    pub apex: [f64; 3],
    /// Boundary points of {h ≥ level}.
    pub samples: Vec<[f64; 3]>,
}

/// Worst margins of the horoball checks; each is verified when ≥ −tol.
#[derive(Clone, Debug, PartialEq, SerializeDerive, Deserialize)]
pub struct HoroballChecks {
    /// Both inclusions between {h ≥ λ} and apex + S₂⁺.
    pub apex: f64,
    /// −|h(X) − λ| over the sampled boundary points.
    pub boundary: f64,
    /// −|λ_min(I − apex₀)|: the basepoint lies on the boundary of level 0.
    pub basepoint: f64,
    /// λ_min(X − apex_λ₁) for samples X of every higher level λ₂.
    pub nesting: f64,
    /// h(T(X)) − λ − ρ over the samples.
    pub mapping: f64,
    pub tol: f64,
}

impl HoroballChecks {
    pub fn passed(&self) -> bool {
        [
            self.apex,
            self.boundary,
            self.basepoint,
            self.nesting,
            self.mapping,
        ]
        .iter()
        .all(|m| *m >= -self.tol)
    }
}

#[derive(Clone, Debug, PartialEq, SerializeDerive, Deserialize)]
pub struct HoroballReport {
    pub tool: String,
    pub version: String,
    pub generated_at: u64,
    pub problem: ProblemFile,
    pub dual: DualCertificate,
    /// log μ of the dual certificate.
    pub rho: f64,
    /// RFunk(I, U)
    pub rfunk_basepoint: f64,
    pub levels: Vec<HoroballLevel>,
    pub checks: HoroballChecks,
    pub verdict: Verdict,
}

/// Samples the horoballs {h ≥ λ} of h(X) = RFunk(I,U) − RFunk(X,U), where U
/// is a verified dual certificate of a 2×2 PSD-cone operator.
pub fn horoball_sections(problem: &ProblemFile) -> Result<HoroballReport> {
    let p = problem.resolved()?;
    let t = &p.operator;
    if t.space() != SpaceKind::PsdConeInterior || t.dim() != 2 {
        return Err(invalid(
            "horoball sections need an operator on the 2×2 PSD cone",
        ));
    }
    let dual = match p.certificates.as_ref().and_then(|c| c.dual.as_ref()) {
        Some(c) => verify_dual(t, &c.point, c.mu, &p.radial)?,
        None => search_dual(t, &p.seeds, &p.dual_options())?,
    };
    if !dual.status.is_verified() {
        return Err(invalid(
            "missing certificate: no verified dual certificate for this operator",
        ));
    }
    let rho = dual.bound();
    let u = ConePoint::new(dual.u.clone())?;
    let id = ConePoint::psd(Mat::identity(2))?;
    let h = ConeMartinFunction::new(u.clone(), id, MartinVariant::Rfunk)?;
    let umat = u.point().as_matrix()?.clone();
    let rf_iu = SymEigen::new(&umat).max().ln();
    let apex = |level: f64| umat.scale((level - rf_iu).exp());
    let h_at = |x: &Mat| -> Result<f64> { h.value(&ConePoint::psd(x.clone())?) };
    let tol = p.tol;

    let mut checks = HoroballChecks {
        apex: f64::INFINITY,
        boundary: f64::INFINITY,
        basepoint: -SymEigen::new(&Mat::identity(2).sub(&apex(0.0))).min().abs(),
        nesting: f64::INFINITY,
        mapping: f64::INFINITY,
        tol,
    };
    let mut levels = Vec::with_capacity(p.levels.len());
    let mut boundary_points: Vec<(f64, Vec<Mat>)> = Vec::with_capacity(p.levels.len());
    for (li, &level) in p.levels.iter().enumerate() {
        let a = apex(level);
        let scale = a.max_abs();
        let mut rng = rng_for(p.seed, li as u64);
        let mut pts = Vec::with_capacity(p.samples);
        while pts.len() < p.samples {
            use rand::Rng;
            let theta: f64 = rng.random_range(0.0..std::f64::consts::PI);
            let r: f64 = rng.random_range(-2.0_f64..2.0).exp() * scale;
            let w = [theta.cos(), theta.sin()];
            let x = a.add(&Mat::outer(&w).scale(r));
            // Skip directions too close to the apex ray to be interior.
            if ConePoint::psd(x.clone()).is_ok_and(|c| c.is_interior()) {
                pts.push(x);
            }
        }
        for x in &pts {
            let hx = h_at(x)?;
            checks.boundary = checks.boundary.min(-(hx - level).abs());
            let tx = t.apply(&Point::Matrix(x.clone()))?;
            let htx = h_at(tx.as_matrix()?)?;
            checks.mapping = checks.mapping.min(htx - level - rho);
        }
        // apex + S₂⁺ ⊆ {h ≥ λ}, and {h ≥ λ} ⊆ apex + S₂⁺ on random points.
        for i in 0..p.samples {
            let mut rng = rng_for(p.seed ^ 0x5eed, (li * p.samples + i) as u64);
            let q = random_spd(2, 2.0, &mut rng).scale(scale);
            checks.apex = checks.apex.min(h_at(&a.add(&q))? - level);
            let y = q.scale(2.0);
            if h_at(&y)? >= level {
                let e = SymEigen::new(&y.sub(&a)).min() / y.max_abs();
                checks.apex = checks.apex.min(e);
            }
        }
        levels.push(HoroballLevel {
            level,
            apex: sym2_coordinates(&a),
            samples: pts.iter().map(sym2_coordinates).collect(),
        });
        boundary_points.push((level, pts));
    }
    for (l1, _) in &boundary_points {
        let a1 = apex(*l1);
        for (l2, pts) in &boundary_points {
            if l2 > l1 {
                for x in pts {
                    let e = SymEigen::new(&x.sub(&a1)).min() / x.max_abs();
                    checks.nesting = checks.nesting.min(e);
                }
            }
        }
    }
    let verdict = if checks.passed() {
        Verdict::Verified
    } else {
        Verdict::Falsified
    };
    Ok(HoroballReport {
        tool: TOOL.into(),
        version: VERSION.into(),
        generated_at: now(),
        problem: p,
        dual,
        rho,
        rfunk_basepoint: rf_iu,
        levels,
        checks,
        verdict,
    })
}

/// One row per sampled boundary point: `level,x11,x22,sqrt2_x12`.
pub fn write_horoball_csv<W: Write>(report: &HoroballReport, mut w: W) -> Result<()> {
    writeln!(w, "level,kind,x11,x22,sqrt2_x12")?;
    for l in &report.levels {
        let rows =
            std::iter::once(("apex", &l.apex)).chain(l.samples.iter().map(|s| ("boundary", s)));
        for (kind, c) in rows {
            writeln!(
                w,
                "{:.16e},{kind},{:.16e},{:.16e},{:.16e}",
                l.level, c[0], c[1], c[2]
            )?;
        }
    }
    Ok(())
}
