//! Numerical tolerances shared by every module.
//!
//! The values live in a process-wide table so the CLI can override them with
//! `--tol name=value`. Reads take a cheap snapshot.

use std::sync::RwLock;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Tolerances {
    /// Column orthonormality of stored bases.
    pub orth: f64,
    /// Rank cut for singular values (transversality, directness, intersections).
    pub rank: f64,
    /// Largest principal-angle sine for two subspaces to count as equal.
    pub angle: f64,
    /// Isotropy and singular-subspace residual.
    pub iso: f64,
    /// Relative symmetry residual of chart maps and forms.
    pub sym: f64,
    /// Smallest transversality margin still accepted as inside a chart domain.
    pub chart: f64,
    pub rel: f64,
    pub sp: f64,
    pub det: f64,
    pub dedup: f64,
    pub same: f64,
    pub gap: f64,
    pub col: f64,
    pub tan: f64,
    pub alpha_min: f64,
    pub theta_sep: f64,
}

impl Default for Tolerances {
    fn default() -> Self {
        Tolerances {
            orth: 1e-10,
            rank: 1e-8,
            angle: 1e-8,
            iso: 1e-8,
            sym: 1e-8,
            chart: 1e-14,
            rel: 1e-8,
            sp: 1e-8,
            det: 1e-10,
            dedup: 1e-6,
            same: 1e-9,
            gap: 1e-3,
            col: 1e-6,
            tan: 1e-3,
            alpha_min: 0.1,
            theta_sep: 1e-4,
        }
    }
}

impl Tolerances {
    pub const NAMES: [&'static str; 16] = [
        "orth", "rank", "angle", "iso", "sym", "chart", "rel", "sp", "det", "dedup", "same",
        "gap", "col", "tan", "alpha_min", "theta_sep",
    ];

    pub fn set(&mut self, name: &str, value: f64) -> Result<()> {
        if !(value.is_finite() && value > 0.0) {
            return Err(Error::InvalidArgument(format!(
                "tolerance `{name}` must be positive and finite, got {value}"
            )));
        }
        let slot = match name {
            "orth" => &mut self.orth,
            "rank" => &mut self.rank,
            "angle" => &mut self.angle,
            "iso" => &mut self.iso,
            "sym" => &mut self.sym,
            "chart" => &mut self.chart,
            "rel" => &mut self.rel,
            "sp" => &mut self.sp,
            "det" => &mut self.det,
            "dedup" => &mut self.dedup,
            "same" => &mut self.same,
            "gap" => &mut self.gap,
            "col" => &mut self.col,
            "tan" => &mut self.tan,
            "alpha_min" => &mut self.alpha_min,
            "theta_sep" => &mut self.theta_sep,
            other => {
                return Err(Error::InvalidArgument(format!(
                    "unknown tolerance `{other}` (known: {})",
                    Self::NAMES.join(", ")
                )))
            }
        };
        *slot = value;
        Ok(())
    }

    /// Parses `name=value`.
    pub fn apply_override(&mut self, entry: &str) -> Result<()> {
        let (name, value) = entry.split_once('=').ok_or_else(|| {
            Error::InvalidArgument(format!("tolerance override `{entry}` is not name=value"))
        })?;
        let value: f64 = value.trim().parse().map_err(|_| {
            Error::InvalidArgument(format!("tolerance override `{entry}` has a non-numeric value"))
        })?;
        self.set(name.trim(), value)
    }
}

static GLOBAL: RwLock<Option<Tolerances>> = RwLock::new(None);

/// Snapshot of the process-wide tolerances.
pub fn current() -> Tolerances {
    GLOBAL
        .read()
        .map(|g| g.unwrap_or_default())
        .unwrap_or_default()
}

pub fn install(tol: Tolerances) {
    if let Ok(mut g) = GLOBAL.write() {
        *g = Some(tol);
    }
}

pub fn reset() {
    if let Ok(mut g) = GLOBAL.write() {
        *g = None;
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn defaults_match_documented_values() {
        let t = Tolerances::default();
        assert_eq!(t.orth, 1e-10);
        assert_eq!(t.rank, 1e-8);
        assert_eq!(t.dedup, 1e-6);
        assert_eq!(t.same, 1e-9);
        assert_eq!(t.tan, 1e-3);
    }

    #[test]
    fn override_parsing() {
        let mut t = Tolerances::default();
        t.apply_override("rank=1e-9").unwrap();
        assert_eq!(t.rank, 1e-9);
        assert!(t.apply_override("bogus=1").is_err());
        assert!(t.apply_override("rank").is_err());
        assert!(t.apply_override("rank=-1").is_err());
    }
}
