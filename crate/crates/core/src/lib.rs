//! Certified linear escape rates of non-expansive maps.

// NaN-rejecting comparisons and index loops over dense matrices are the house style.
#![allow(clippy::neg_cmp_op_on_partial_ord, clippy::needless_range_loop)]

pub mod certificates;
pub mod cone;
pub mod error;
pub mod escape;
pub mod games;
pub mod hemi;
pub mod io;
pub mod linalg;
pub mod operators;
pub mod par;
pub mod sampling;
pub mod simplex;

pub use certificates::{DualCertificate, EvalFormCertificate, PrimalCertificate, Status};
pub use cone::{ConeMartinFunction, ConePoint, ExtremeRay};
pub use error::{Error, Result};
pub use escape::{orbit_rate, RateEstimate};
pub use games::{game_rate, karp_cycle_mean, GameSpec};
pub use hemi::{GeodesicFamily, GeodesicKind, HemiMetric, MetricKind, Point, SpaceKind};
pub use io::{ProblemFile, RateReport, Verdict};
pub use linalg::Mat;
pub use operators::OperatorSpec;
pub use par::Execution;
