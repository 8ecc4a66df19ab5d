//! Checks that move a boundary point continuously: finite-difference
//! tangents of chart curves, limits of chart curves at the endpoints, and
//! non-constancy of `ψ(w) = (w^{n-1} ⊕ z^n) ∩ x^n`.

use std::f64::consts::TAU;

use serde::Serialize;

use crate::charts::{self, ProjPoint};
use crate::error::{Error, Result};
use crate::linalg::{self, Mat};
use crate::symplectic::Subspace;
use crate::tolerance;

use super::triple::{check_hk, psi_line};
use super::{meet, CheckResult, FlagSource};

/// Residuals of the tangent law for one finite difference.
#[derive(Debug, Clone, Copy, Serialize)]
pub struct TangentResiduals {
    /// `σ_2(Δu) / σ_1(Δu)`.
    pub rank: f64,
    /// Angle between `Ker Δu` and `(y^{n-1} ⊕ z^n) ∩ x^n`.
    pub kernel: f64,
    /// Angle between `Im Δu` and `y^{n+1} ∩ z^n`.
    pub image: f64,
    /// `|λ_2(Δq)| / |λ_1(Δq)|`.
    pub signature: f64,
    /// Sign of the dominant eigenvalue of `Δq`.
    pub sign: f64,
}

impl TangentResiduals {
    pub fn worst(&self) -> f64 {
        self.rank.max(self.kernel).max(self.image).max(self.signature)
    }
}

/// Unit eigenvector of the largest eigenvalue of a symmetric matrix.
fn dominant_eigenvector(s: &Mat) -> Mat {
    let eig = s.clone().symmetric_eigen();
    let top = eig.eigenvalues.imax();
    eig.eigenvectors.columns(top, 1).into_owned()
}

fn ccw_gap(from: f64, to: f64) -> f64 {
    (to - from).rem_euclid(TAU)
}

/// Finite difference of the chart curve `θ ↦ u_{x^n, z^n}^{y(θ)^n}` at
/// `θ_y`, step `δ`.
pub fn tangent_check(
    source: &dyn FlagSource,
    theta_x: f64,
    theta_z: f64,
    theta_y: f64,
    delta: f64,
) -> Result<(CheckResult, TangentResiduals)> {
    if !(delta > 0.0) {
        return Err(Error::InvalidArgument("finite-difference step must be positive".into()));
    }
    let sep = tolerance::current().theta_sep;
    let x = source.flag(theta_x)?;
    let z = source.flag(theta_z)?;
    let y0 = source.flag(theta_y)?;
    let y1 = source.flag(theta_y + delta)?;
    for y in [&y0, &y1] {
        if y.point.separation(&x.point) < sep || y.point.separation(&z.point) < sep {
            return Err(Error::InvalidArgument(
                "moving point must stay away from x and z".into(),
            ));
        }
    }
    let big_n = x.dim();
    if big_n % 2 != 0 {
        return Err(Error::Precondition("tangent check needs symplectic flags".into()));
    }
    let n = big_n / 2;
    let (xn, zn) = (x.space(n)?, z.space(n)?);
    let u0 = charts::chart_u(xn, zn, y0.space(n)?)?;
    let u1 = charts::chart_u(xn, zn, y1.space(n)?)?;
    let du = u1.matrix() - u0.matrix();
    let svd = linalg::svd_sorted(&du);
    let rank = if n > 1 { svd.sigma[1] / svd.sigma[0] } else { 0.0 };
    let kernel = if n > 1 {
        let ker = Subspace::new(xn.basis() * svd.v.columns(1, n - 1))?;
        ker.distance(&psi_line(&x, &y0, &z)?)
    } else {
        0.0
    };
    let image = Subspace::new(zn.basis() * dominant_eigenvector(&(&du * du.transpose())))?;
    let target = meet(y0.space(n + 1)?, zn, 1)?;
    let image_res = image.distance(&target);
    let dq: Mat = u1.pairing_matrix() - u0.pairing_matrix();
    let sym = (&dq + dq.transpose()) * 0.5;
    let mut ev: Vec<f64> = sym.symmetric_eigenvalues().iter().copied().collect();
    ev.sort_by(|a, b| b.abs().total_cmp(&a.abs()));
    let signature = if n > 1 { ev[1].abs() / ev[0].abs() } else { 0.0 };
    let res = TangentResiduals {
        rank,
        kernel,
        image: image_res,
        signature,
        sign: ev[0].signum(),
    };
    let check = CheckResult::below("tangent", res.worst(), tolerance::current().tan)
        .with_witness(vec![theta_x, theta_y, theta_z])
        .detail("rank", res.rank)
        .detail("kernel", res.kernel)
        .detail("image", res.image)
        .detail("signature", res.signature)
        .detail("sign", res.sign)
        .detail("delta", delta);
    Ok((check, res))
}

/// Ratios of the tangent residuals at `δ` to those at `δ / 2`; a
/// first-order finite difference gives ratios near 2. The margin is the
/// largest `|ratio - 2|` over the worst, kernel and image residuals,
/// passing below `0.5`. The rank and signature residuals are second order
/// in `δ` (ratio near 4); their ratios are reported in the details only.
pub fn tangent_consistency(
    source: &dyn FlagSource,
    theta_x: f64,
    theta_z: f64,
    theta_y: f64,
    delta: f64,
) -> Result<CheckResult> {
    let (_, full) = tangent_check(source, theta_x, theta_z, theta_y, delta)?;
    let (_, half) = tangent_check(source, theta_x, theta_z, theta_y, delta / 2.0)?;
    let ratios = [
        ("rank", full.rank / half.rank),
        ("kernel", full.kernel / half.kernel),
        ("image", full.image / half.image),
        ("signature", full.signature / half.signature),
    ];
    let ratio = full.worst() / half.worst();
    let deviation = [ratio, ratios[1].1, ratios[2].1]
        .iter()
        .map(|r| if r.is_finite() { (r - 2.0).abs() } else { f64::INFINITY })
        .fold(0.0, f64::max);
    let mut check = CheckResult::below("tangent_halving", deviation, 0.5)
        .detail("ratio", ratio)
        .with_witness(vec![theta_x, theta_y, theta_z])
        .detail("delta", delta);
    for (name, r) in ratios {
        check = check.detail(name, r);
    }
    Ok(check)
}

fn form_point_and_targets(
    source: &dyn FlagSource,
    theta_x: f64,
    theta_y: f64,
    theta_z: f64,
) -> Result<(ProjPoint, ProjPoint, ProjPoint)> {
    let x = source.flag(theta_x)?;
    let y = source.flag(theta_y)?;
    let z = source.flag(theta_z)?;
    if x.dim() != 4 {
        return Err(Error::Precondition("limit checks are specific to Sp(4, R)".into()));
    }
    let x2 = x.space(2)?;
    let q = charts::chart_q(x2, z.space(2)?, y.space(2)?)?.point()?;
    let at_x = charts::iota(&charts::line_in(x2, x.space(1)?)?)?;
    let at_z = charts::iota(&charts::line_in(x2, &meet(z.space(3)?, x2, 1)?)?)?;
    Ok((q, at_x, at_z))
}

/// Limits of `[q_{x,z}^y]` as `y` approaches `x` (towards `ι(x¹)`) and `z`
/// (towards `ι(z³ ∩ x²)`) along the counterclockwise arc, evaluated at
/// circle distance `distance`. The approach to `z` is reported both
/// unconditionally and gated on `H_1` holding for the triple.
pub fn limit_checks(
    source: &dyn FlagSource,
    theta_x: f64,
    theta_z: f64,
    distance: f64,
) -> Result<Vec<CheckResult>> {
    let arc = ccw_gap(theta_x, theta_z);
    if !(distance > 0.0 && 2.0 * distance < arc) {
        return Err(Error::InvalidArgument(format!(
            "limit distance {distance} does not fit in the arc of length {arc}"
        )));
    }
    let tol = tolerance::current().tan;
    let near_x = theta_x + distance;
    let (q, at_x, _) = form_point_and_targets(source, theta_x, near_x, theta_z)?;
    let first = CheckResult::below("limit_x", q.distance(&at_x), tol)
        .with_witness(vec![theta_x, near_x, theta_z])
        .detail("distance", distance);
    let near_z = theta_z - distance;
    let (q, _, at_z) = form_point_and_targets(source, theta_x, near_z, theta_z)?;
    let d = q.distance(&at_z);
    let second = CheckResult::below("limit_z", d, tol)
        .with_witness(vec![theta_x, near_z, theta_z])
        .detail("distance", distance);
    let h1 = check_hk(&source.flag(theta_x)?, &source.flag(near_z)?, &source.flag(theta_z)?, 1)?;
    let gated = if h1.pass {
        CheckResult::below("limit_z_gated", d, tol)
    } else {
        CheckResult::below("limit_z_gated", 0.0, tol)
    }
    .with_witness(vec![theta_x, near_z, theta_z])
    .detail("h1_margin", h1.margin)
    .detail("gate_open", if h1.pass { 1.0 } else { 0.0 });
    Ok(vec![first, second, gated])
}

/// Splits the open counterclockwise arc from `x` to `z` into windows of
/// width `width` and reports the smallest variation of
/// `ψ(w) = (w^{n-1} ⊕ z^n) ∩ x^n` across any window (largest pairwise
/// distance between `ψ` at the window ends and midpoint).
pub fn psi_variation(source: &dyn FlagSource, theta_x: f64, theta_z: f64, width: f64) -> Result<CheckResult> {
    let arc = ccw_gap(theta_x, theta_z);
    let margin_end = 10.0 * tolerance::current().theta_sep;
    let usable = arc - 2.0 * margin_end;
    if !(width > 0.0 && width <= usable) {
        return Err(Error::InvalidArgument(format!(
            "window width {width} does not fit in the arc of length {arc}"
        )));
    }
    let x = source.flag(theta_x)?;
    let z = source.flag(theta_z)?;
    let windows = (usable / width).floor() as usize;
    let psi_at = |t: f64| -> Result<Subspace> { psi_line(&x, &source.flag(t)?, &z) };
    let mut worst = f64::INFINITY;
    let mut witness = vec![];
    for i in 0..windows {
        let a = theta_x + margin_end + i as f64 * width;
        let pts = [psi_at(a)?, psi_at(a + width / 2.0)?, psi_at(a + width)?];
        let var = pts[0]
            .distance(&pts[1])
            .max(pts[0].distance(&pts[2]))
            .max(pts[1].distance(&pts[2]));
        if var < worst {
            worst = var;
            witness = vec![theta_x, a, a + width, theta_z];
        }
    }
    Ok(CheckResult::above("psi_nonconstant", worst, tolerance::current().rank)
        .with_witness(witness)
        .detail("windows", windows as f64)
        .detail("width", width))
}
