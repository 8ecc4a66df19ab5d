//! Margin-reporting checks of the structural properties of boundary flags:
//! singular-value gap decay, the directness properties `H_k`, maximality,
//! transversality inside `x^n`, tangent directions of chart curves,
//! collinearity and cyclic order in `Sp(4, R)`, hyperconvexity, and limit
//! behaviour of chart curves.

mod curve;
mod gap;
mod scan;
mod suite;
mod triple;

use std::collections::BTreeMap;

use serde::Serialize;

use crate::error::{Error, Result};
use crate::flags::{FlagSample, veronese_flag_in};
use crate::rep::SymPowerFrame;
use crate::symplectic::Subspace;
use crate::tolerance;

pub use curve::{chart_curve, cone_boundary, ConeRow, CurveRow};
pub use gap::{gap_profile, least_squares, log_gap_ratios, split_singular_values, GapProfile};
pub use scan::{limit_checks, psi_variation, tangent_check, tangent_consistency, TangentResiduals};
pub use suite::{equivalence_suite, run_checks, sample_triples, sample_tuples, CheckConfig, Report, CHECK_NAMES};
pub use triple::{
    check_hk, check_hyperconvex, check_transversality, check_collinearity, check_cyclic_order, check_maximal,
    hyperconvex_abc, collinearity_points, cyclic_order_lines, psi_line,
};

/// Whether a check passes when its margin is above or below the tolerance.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum Sense {
    Above,
    Below,
}

/// Outcome of one named check: `pass` is decided by `margin` against
/// `tolerance` in the direction given by `sense`.
#[derive(Debug, Clone, Serialize)]
pub struct CheckResult {
    pub name: String,
    pub pass: bool,
    pub margin: f64,
    pub tolerance: f64,
    pub sense: Sense,
    /// Worst-case input: boundary angles (and witness words if any).
    pub witness: Vec<f64>,
    pub details: BTreeMap<String, f64>,
}

impl CheckResult {
    pub fn above(name: &str, margin: f64, tolerance: f64) -> Self {
        CheckResult {
            name: name.to_string(),
            pass: margin > tolerance,
            margin,
            tolerance,
            sense: Sense::Above,
            witness: Vec::new(),
            details: BTreeMap::new(),
        }
    }

    pub fn below(name: &str, margin: f64, tolerance: f64) -> Self {
        CheckResult {
            name: name.to_string(),
            pass: margin < tolerance,
            margin,
            tolerance,
            sense: Sense::Below,
            witness: Vec::new(),
            details: BTreeMap::new(),
        }
    }

    pub fn with_witness(mut self, witness: Vec<f64>) -> Self {
        self.witness = witness;
        self
    }

    pub fn detail(mut self, key: &str, value: f64) -> Self {
        self.details.insert(key.to_string(), value);
        self
    }

    /// Whether `self` is a worse outcome than `other` for the same check.
    fn worse_than(&self, other: &CheckResult) -> bool {
        match self.sense {
            Sense::Above => self.margin < other.margin,
            Sense::Below => self.margin > other.margin,
        }
    }

    /// Folds per-sample results of one check into the worst case, recording
    /// how many samples passed.
    pub fn aggregate(name: &str, results: Vec<CheckResult>) -> Option<CheckResult> {
        let total = results.len();
        let passed = results.iter().filter(|r| r.pass).count();
        let mut worst = results.into_iter().reduce(|a, b| if b.worse_than(&a) { b } else { a })?;
        worst.name = name.to_string();
        worst.pass = passed == total;
        worst.details.insert("samples".into(), total as f64);
        worst.details.insert("passed".into(), passed as f64);
        Some(worst)
    }
}

/// A source of boundary flags at arbitrary angles.
pub trait FlagSource: Sync {
    fn flag(&self, theta: f64) -> Result<FlagSample>;
}

impl FlagSource for SymPowerFrame {
    fn flag(&self, theta: f64) -> Result<FlagSample> {
        veronese_flag_in(theta, self)
    }
}

/// Rejects points closer than `δ_θ` on the circle.
pub(crate) fn require_distinct(flags: &[&FlagSample]) -> Result<()> {
    let sep = tolerance::current().theta_sep;
    for i in 0..flags.len() {
        for j in (i + 1)..flags.len() {
            if flags[i].point.separation(&flags[j].point) < sep {
                return Err(Error::InvalidArgument(format!(
                    "boundary points must be distinct (angles {} and {})",
                    flags[i].theta(),
                    flags[j].theta()
                )));
            }
        }
    }
    Ok(())
}

/// Intersection of the expected dimension; a poorly defined dimension is a
/// flag-quality failure rather than a property failure.
pub(crate) fn meet(a: &Subspace, b: &Subspace, dim: usize) -> Result<Subspace> {
    let rank = tolerance::current().rank;
    let (s, (inside, next)) = a.intersection_of_dim(b, dim);
    if inside > 1e3 * rank {
        return Err(Error::FlagQuality(format!(
            "expected a {dim}-dimensional intersection, but its defect is {inside:.3e}"
        )));
    }
    if next < rank {
        return Err(Error::FlagQuality(format!(
            "intersection is larger than the expected dimension {dim} (next singular value {next:.3e})"
        )));
    }
    Ok(s)
}
