//! Sampled chart curve `θ_y ↦ q_{x,z}^{y}` in the fixed chart `Q(x²)`,
//! together with the boundary of the cone of semi-definite forms, for
//! plotting.

use std::f64::consts::{PI, TAU};

use crate::charts::{chart_q, form_coordinates};
use crate::error::{Error, Result};
use crate::linalg::{Mat, Vector};
use crate::tolerance;

use super::FlagSource;

/// One sample of the chart curve.
#[derive(Debug, Clone, PartialEq)]
pub struct CurveRow {
    pub theta_y: f64,
    /// `(q11, q22, √2 q12)` in the basis of `x²` carried by the flag.
    pub coords: [f64; 3],
    pub min_eigenvalue: f64,
}

/// A point on the boundary of the semi-definite cone: the form `v vᵀ` for
/// `v = r (cos a, sin a)`.
#[derive(Debug, Clone, PartialEq)]
pub struct ConeRow {
    pub angle: f64,
    pub coords: [f64; 3],
}

/// `samples` values of `q_{x²,z²}^{y²}` for `θ_y` running counterclockwise
/// from `θ_x` (inclusive) towards `θ_z` (exclusive), in equal steps.
pub fn chart_curve(source: &dyn FlagSource, theta_x: f64, theta_z: f64, samples: usize) -> Result<Vec<CurveRow>> {
    if samples == 0 {
        return Err(Error::InvalidArgument("need at least one curve sample".into()));
    }
    let arc = (theta_z - theta_x).rem_euclid(TAU);
    if arc < tolerance::current().theta_sep || TAU - arc < tolerance::current().theta_sep {
        return Err(Error::InvalidArgument("theta_x and theta_z must be distinct".into()));
    }
    let x = source.flag(theta_x)?;
    let z = source.flag(theta_z)?;
    if x.dim() != 4 {
        return Err(Error::Precondition(format!(
            "chart curves are drawn in Sp(4, R); flag dimension is {}",
            x.dim()
        )));
    }
    (0..samples)
        .map(|i| {
            let theta_y = (theta_x + arc * i as f64 / samples as f64).rem_euclid(TAU);
            let y = source.flag(theta_y)?;
            let q = chart_q(x.space(2)?, z.space(2)?, y.space(2)?)?;
            let c = form_coordinates(q.matrix());
            Ok(CurveRow {
                theta_y,
                coords: [c[0], c[1], c[2]],
                min_eigenvalue: q.min_eigenvalue(),
            })
        })
        .collect()
}

/// `samples` rays of the cone boundary `{det q = 0, q ⪰ 0}`, scaled to
/// `radius` in coordinate norm.
pub fn cone_boundary(samples: usize, radius: f64) -> Vec<ConeRow> {
    (0..samples)
        .map(|i| {
            let angle = PI * i as f64 / samples as f64;
            let v = Vector::from_vec(vec![angle.cos(), angle.sin()]);
            let form: Mat = &v * v.transpose() * radius;
            let c = form_coordinates(&form);
            ConeRow {
                angle,
                coords: [c[0], c[1], c[2]],
            }
        })
        .collect()
}
