//! Boundary flags of a representation.
//!
//! The boundary circle of the surface group is modelled through the base
//! Fuchsian representation: the angle `θ ∈ [0, 2π)` labels the line of
//! `R²` with direction angle `θ / 2`, and counterclockwise order in `θ`
//! defines positive triples. Flags are computed exactly as osculating flags
//! of the Veronese curve for symmetric-power representations, or
//! dynamically as attracting subspaces of group elements.

use std::f64::consts::TAU;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::Serialize;

use crate::error::{Error, Result};
use crate::group::{enumerate_ball, Word};
use crate::linalg::{self, Mat, Vector};
use crate::rep::{sym_power_frame, Kind, Representation, SymPowerFrame};
use crate::symplectic::{Subspace, SymplecticSpace};
use crate::tolerance;

/// A point of the boundary circle.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct BoundaryPoint {
    theta: f64,
    witness: Option<String>,
}

impl BoundaryPoint {
    /// Reduces `theta` into `[0, 2π)`.
    pub fn new(theta: f64) -> Result<Self> {
        if !theta.is_finite() {
            return Err(Error::InvalidArgument("boundary angle must be finite".into()));
        }
        let mut t = theta.rem_euclid(TAU);
        if t >= TAU {
            t = 0.0;
        }
        Ok(BoundaryPoint { theta: t, witness: None })
    }

    pub fn with_witness(mut self, w: &Word) -> Self {
        self.witness = Some(w.to_string());
        self
    }

    pub fn theta(&self) -> f64 {
        self.theta
    }

    pub fn witness(&self) -> Option<&str> {
        self.witness.as_deref()
    }

    /// Unit vector of `R²` spanning the line labelled by this point.
    pub fn line(&self) -> Vector {
        let (s, c) = (self.theta / 2.0).sin_cos();
        Vector::from_vec(vec![c, s])
    }

    /// The point labelled by the line through `v`.
    pub fn from_line(v: &Vector) -> Result<Self> {
        BoundaryPoint::new(2.0 * v[1].atan2(v[0]))
    }

    /// `g · x` for the projective action of a 2x2 matrix.
    pub fn act(&self, g: &Mat) -> Result<Self> {
        BoundaryPoint::from_line(&(g * self.line()))
    }

    /// Distance along the circle.
    pub fn separation(&self, other: &BoundaryPoint) -> f64 {
        let d = (self.theta - other.theta).rem_euclid(TAU);
        d.min(TAU - d)
    }
}

/// Whether `(x, y, z)` are distinct and in counterclockwise order.
pub fn is_positive_triple(x: &BoundaryPoint, y: &BoundaryPoint, z: &BoundaryPoint) -> bool {
    let dy = (y.theta - x.theta).rem_euclid(TAU);
    let dz = (z.theta - x.theta).rem_euclid(TAU);
    dy > 0.0 && dz > 0.0 && dy < dz
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum FlagMethod {
    Veronese,
    Attracting,
}

/// The flag spaces `x^k` at a boundary point. `spaces[k]` has dimension
/// `k`; `spaces[0]` is `{0}` and `spaces[N]` the whole space. Attracting
/// flags may leave some intermediate spaces unset when the witness lacks
/// the corresponding eigenvalue gap.
#[derive(Debug, Clone)]
pub struct FlagSample {
    pub point: BoundaryPoint,
    spaces: Vec<Option<Subspace>>,
    pub method: FlagMethod,
    /// Per `k`: realized eigenvalue-modulus ratio for attracting flags, zero
    /// for Veronese flags; `NaN` where the space is unset.
    pub quality: Vec<f64>,
}

impl FlagSample {
    /// Checks the nesting and, for symplectic ambient spaces, the duality
    /// `x^{N-k} = (x^k)^ω` to `10 τ_angle`.
    pub fn new(
        point: BoundaryPoint,
        inner: Vec<Option<Subspace>>,
        method: FlagMethod,
        quality: Vec<f64>,
        symplectic: bool,
    ) -> Result<Self> {
        let big_n = inner.len() + 1;
        let mut spaces = Vec::with_capacity(big_n + 1);
        spaces.push(Some(Subspace::zero(big_n)));
        spaces.extend(inner);
        spaces.push(Some(Subspace::whole(big_n)));
        let mut quality_full = vec![0.0];
        quality_full.extend(quality);
        quality_full.push(0.0);
        let flag = FlagSample {
            point,
            spaces,
            method,
            quality: quality_full,
        };
        flag.verify(symplectic)?;
        Ok(flag)
    }

    fn verify(&self, symplectic: bool) -> Result<()> {
        let big_n = self.dim();
        let tol = 10.0 * tolerance::current().angle;
        for (k, s) in self.spaces.iter().enumerate() {
            if let Some(s) = s {
                if s.dim() != k || s.ambient_dim() != big_n {
                    return Err(Error::FlagQuality(format!(
                        "space {k} has dimension {} in R^{}",
                        s.dim(),
                        s.ambient_dim()
                    )));
                }
            }
        }
        let present: Vec<usize> = (0..=big_n).filter(|&k| self.spaces[k].is_some()).collect();
        for w in present.windows(2) {
            let (a, b) = (self.spaces[w[0]].as_ref().unwrap(), self.spaces[w[1]].as_ref().unwrap());
            let defect = b.containment_defect(a);
            if defect > tol {
                return Err(Error::FlagQuality(format!(
                    "space {} not contained in space {} (defect {defect:.3e})",
                    w[0], w[1]
                )));
            }
        }
        if symplectic {
            let space = SymplecticSpace::standard(big_n / 2)?;
            for &k in &present {
                if let Some(dual) = &self.spaces[big_n - k] {
                    let orth = space.omega_orthogonal(self.spaces[k].as_ref().unwrap())?;
                    let d = orth.distance(dual);
                    if d > tol {
                        return Err(Error::FlagQuality(format!(
                            "space {} is not the symplectic orthogonal of space {k} (distance {d:.3e})",
                            big_n - k
                        )));
                    }
                }
            }
        }
        Ok(())
    }

    /// Ambient dimension `N`.
    pub fn dim(&self) -> usize {
        self.spaces.len() - 1
    }

    pub fn theta(&self) -> f64 {
        self.point.theta
    }

    pub fn has(&self, k: usize) -> bool {
        self.spaces.get(k).is_some_and(|s| s.is_some())
    }

    /// `x^k`; errors when the flag does not carry it.
    pub fn space(&self, k: usize) -> Result<&Subspace> {
        self.spaces
            .get(k)
            .and_then(|s| s.as_ref())
            .ok_or_else(|| Error::FlagQuality(format!("flag has no space of dimension {k}")))
    }

    /// `ρ(g) · flag`, relabelled by the base action on the circle.
    pub fn transform(&self, g: &Mat, base: &Mat) -> Result<FlagSample> {
        let spaces = self
            .spaces
            .iter()
            .map(|s| s.as_ref().map(|s| s.image(g)).transpose())
            .collect::<Result<Vec<_>>>()?;
        Ok(FlagSample {
            point: self.point.act(base)?,
            spaces,
            method: self.method,
            quality: self.quality.clone(),
        })
    }
}

/// Coefficients (indexed by the power of `sin`) of the `d`-th derivative
/// in `φ` of `cos^{m-j} φ sin^j φ`.
fn monomial_derivative(m: usize, j: usize, d: usize) -> Vec<f64> {
    let mut p = vec![0.0; m + 1];
    p[j] = 1.0;
    for _ in 0..d {
        let mut q = vec![0.0; m + 1];
        for (b, &c) in p.iter().enumerate() {
            if c == 0.0 {
                continue;
            }
            let a = m - b;
            if a > 0 {
                q[b + 1] -= a as f64 * c;
            }
            if b > 0 {
                q[b - 1] += b as f64 * c;
            }
        }
        p = q;
    }
    p
}

/// The `d`-th derivative of the Veronese curve `φ ↦ (cos^{m-j} φ sin^j φ)_j`
/// in monomial coordinates.
pub fn veronese_derivative(phi: f64, big_n: usize, d: usize) -> Vector {
    let m = big_n - 1;
    let (s, c) = phi.sin_cos();
    Vector::from_iterator(
        big_n,
        (0..big_n).map(|j| {
            monomial_derivative(m, j, d)
                .iter()
                .enumerate()
                .map(|(b, coef)| coef * c.powi((m - b) as i32) * s.powi(b as i32))
                .sum()
        }),
    )
}

/// Osculating flag of the Veronese curve at `θ`, expressed in the corrected
/// basis of `frame`.
pub fn veronese_flag_in(theta: f64, frame: &SymPowerFrame) -> Result<FlagSample> {
    let big_n = frame.big_n;
    let point = BoundaryPoint::new(theta)?;
    let to_corrected = frame.to_corrected();
    let cols: Vec<Vector> = (0..big_n)
        .map(|d| &to_corrected * veronese_derivative(point.theta / 2.0, big_n, d))
        .collect();
    let mut inner = Vec::with_capacity(big_n - 1);
    for k in 1..big_n {
        let s = Subspace::span(big_n, &cols[..k]).map_err(|e| {
            Error::FlagQuality(format!("osculating span of dimension {k} is degenerate: {e}"))
        })?;
        inner.push(Some(s));
    }
    FlagSample::new(
        point,
        inner,
        FlagMethod::Veronese,
        vec![0.0; big_n - 1],
        big_n.is_multiple_of(2),
    )
}

/// Osculating flag of the `N`-dimensional Veronese curve at `θ`.
pub fn veronese_flag(theta: f64, big_n: usize) -> Result<FlagSample> {
    veronese_flag_in(theta, &sym_power_frame(big_n)?)
}

/// Eigenvalue moduli of `M` in decreasing order, taking the lower half
/// from `M⁻¹` for accuracy on badly scaled matrices.
pub fn split_eigenvalue_moduli(m: &Mat, m_inv: &Mat) -> Vec<f64> {
    let big_n = m.nrows();
    let top = linalg::eigenvalue_moduli(m);
    let bottom = linalg::eigenvalue_moduli(m_inv);
    let half = big_n.div_ceil(2);
    (0..big_n)
        .map(|i| if i < half { top[i] } else { 1.0 / bottom[big_n - 1 - i] })
        .collect()
}

fn invariance_defect(m: &Mat, q: &Mat) -> f64 {
    let image = m * q;
    linalg::containment_defect(q, &image)
}

/// Dominant `k`-dimensional invariant subspace of `m` by orthonormalized
/// subspace iteration, squaring the iteration matrix while the dominant
/// block stays well conditioned.
fn dominant_subspace(m: &Mat, k: usize, moduli: &[f64]) -> Mat {
    let big_n = m.nrows();
    let mut rng = ChaCha8Rng::seed_from_u64(0x5eed);
    let mut q = Mat::from_fn(big_n, k, |_, _| rng.random_range(-1.0..1.0));
    let start = m * &q;
    let spread = moduli[0] / moduli[k - 1].max(f64::MIN_POSITIVE);
    let scale = m.amax().max(f64::MIN_POSITIVE);
    let mut a = m / scale;
    let mut power = 1.0f64;
    let mut previous = f64::INFINITY;
    if let Some(o) = linalg::orthonormal_columns(&start, 0.0) {
        q = o;
    }
    for _ in 0..200 {
        let next = &a * &q;
        q = match linalg::orthonormal_columns(&next, 0.0) {
            Some(o) => o,
            None => linalg::svd_sorted(&next).u.columns(0, k).into_owned(),
        };
        let defect = invariance_defect(m, &q);
        if defect < 1e-12 || defect > 0.5 * previous {
            break;
        }
        previous = defect;
        if spread.powf(2.0 * power) < 1e6 {
            let sq = &a * &a;
            a = &sq / sq.amax().max(f64::MIN_POSITIVE);
            power *= 2.0;
        }
    }
    q
}

/// Dominant `k`-dimensional invariant subspace of `M`, with `M⁻¹` supplied.
/// Returns the subspace and the ratio `|λ_{k+1}| / |λ_k|`.
pub fn attracting_subspace_with_inverse(m: &Mat, m_inv: &Mat, k: usize) -> Result<(Subspace, f64)> {
    let big_n = m.nrows();
    if m.shape() != (big_n, big_n) || m_inv.shape() != (big_n, big_n) {
        return Err(Error::DimensionMismatch("attracting subspace needs square matrices".into()));
    }
    if k == 0 || k >= big_n {
        return Err(Error::InvalidArgument(format!(
            "attracting subspace dimension {k} must lie in 1..{big_n}"
        )));
    }
    attracting_with_moduli(m, m_inv, k, &split_eigenvalue_moduli(m, m_inv))
}

fn attracting_with_moduli(m: &Mat, m_inv: &Mat, k: usize, moduli: &[f64]) -> Result<(Subspace, f64)> {
    let big_n = m.nrows();
    let ratio = moduli[k] / moduli[k - 1];
    let gap = 1.0 - ratio;
    if !(gap > tolerance::current().gap) {
        return Err(Error::NoAttractingPoint { k, gap });
    }
    let basis = if 2 * k <= big_n {
        dominant_subspace(m, k, moduli)
    } else {
        let inv_t = m_inv.transpose();
        let inv_moduli: Vec<f64> = moduli.iter().rev().map(|x| 1.0 / x).collect();
        let repelling = dominant_subspace(&inv_t, big_n - k, &inv_moduli);
        linalg::complement(&repelling)
    };
    Ok((Subspace::new(basis)?, ratio))
}

/// Dominant `k`-dimensional invariant subspace of `M`.
pub fn attracting_subspace(m: &Mat, k: usize) -> Result<(Subspace, f64)> {
    let m_inv = m
        .clone()
        .try_inverse()
        .ok_or_else(|| Error::Degenerate("matrix is singular".into()))?;
    attracting_subspace_with_inverse(m, &m_inv, k)
}

/// Attracting fixed point on the circle of a 2x2 matrix.
pub fn attracting_point(g: &Mat, g_inv: &Mat) -> Result<BoundaryPoint> {
    let (line, _) = attracting_subspace_with_inverse(g, g_inv, 1)?;
    BoundaryPoint::from_line(&line.basis().column(0).into_owned())
}

/// Attracting flag of `ρ(w)` for the requested dimensions (all of
/// `1..N` when `ks` is `None`), labelled by the attracting fixed point of
/// the base image of `w`.
pub fn flag_from_witness_for(rep: &Representation, w: &Word, ks: Option<&[usize]>) -> Result<FlagSample> {
    let base = rep
        .base()
        .ok_or_else(|| Error::Precondition("representation has no base Fuchsian images".into()))?;
    let point = attracting_point(&base.word_value(w), &base.word_value(&w.inverse()))?.with_witness(w);
    let m = rep.word_value(w);
    let m_inv = rep.word_value(&w.inverse());
    flag_from_matrices(rep, point, &m, &m_inv, ks, false)
}

fn flag_from_matrices(
    rep: &Representation,
    point: BoundaryPoint,
    m: &Mat,
    m_inv: &Mat,
    ks: Option<&[usize]>,
    best_effort: bool,
) -> Result<FlagSample> {
    let big_n = rep.dim();
    let all: Vec<usize> = (1..big_n).collect();
    let ks = ks.unwrap_or(&all);
    let mut inner = vec![None; big_n - 1];
    let mut quality = vec![f64::NAN; big_n - 1];
    if m.shape() != (big_n, big_n) || m_inv.shape() != (big_n, big_n) {
        return Err(Error::DimensionMismatch("attracting flag needs square matrices".into()));
    }
    let moduli = split_eigenvalue_moduli(m, m_inv);
    for &k in ks {
        if k == 0 || k >= big_n {
            return Err(Error::InvalidArgument(format!(
                "attracting subspace dimension {k} must lie in 1..{big_n}"
            )));
        }
        match attracting_with_moduli(m, m_inv, k, &moduli) {
            Ok((s, ratio)) => {
                inner[k - 1] = Some(s);
                quality[k - 1] = ratio;
            }
            Err(Error::NoAttractingPoint { .. }) if best_effort => {}
            Err(e) => return Err(e),
        }
    }
    if inner.iter().all(|s| s.is_none()) {
        return Err(Error::NoAttractingPoint {
            k: ks.first().copied().unwrap_or(0),
            gap: 0.0,
        });
    }
    FlagSample::new(point, inner, FlagMethod::Attracting, quality, rep.is_symplectic())
}

/// Attracting flag of `ρ(w)` in every dimension.
pub fn flag_from_witness(rep: &Representation, w: &Word) -> Result<FlagSample> {
    flag_from_witness_for(rep, w, None)
}

/// Veronese flag for symmetric-power and Fuchsian representations.
pub fn exact_flag(rep: &Representation, theta: f64) -> Result<FlagSample> {
    match rep.kind() {
        Kind::SymPower | Kind::FuchsianBase => veronese_flag(theta, rep.dim()),
        other => Err(Error::Precondition(format!(
            "exact flags exist only for symmetric powers, not {other}"
        ))),
    }
}

#[derive(Debug, Clone, PartialEq)]
pub enum Strategy {
    /// Equispaced angles with seeded jitter of up to a fifth of the spacing.
    Veronese { seed: u64 },
    /// Attracting flags of non-trivial ball elements up to `radius`, in
    /// the dimensions `ks`. With `None`, every dimension in which the
    /// element has an eigenvalue gap is filled and the others are left
    /// unset.
    Attracting { radius: usize, ks: Option<Vec<usize>> },
}

#[derive(Debug, Clone)]
pub struct BoundarySample {
    /// Sorted by angle, pairwise separated by at least `δ_θ`.
    pub flags: Vec<FlagSample>,
    /// Fewer usable points than requested were found.
    pub partial: bool,
}

/// Equispaced angles with seeded jitter.
pub fn jittered_thetas(count: usize, seed: u64) -> Vec<f64> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let step = TAU / count as f64;
    let mut out: Vec<f64> = (0..count)
        .map(|i| (i as f64 * step + rng.random_range(-0.2..0.2) * step).rem_euclid(TAU))
        .collect();
    out.sort_by(|a, b| a.total_cmp(b));
    out
}

/// Samples `count` boundary flags of `rep`.
pub fn sample_boundary(rep: &Representation, count: usize, strategy: &Strategy) -> Result<BoundarySample> {
    if count < 3 {
        return Err(Error::InvalidArgument(format!(
            "need at least 3 boundary samples, got {count}"
        )));
    }
    let sep = tolerance::current().theta_sep;
    match strategy {
        Strategy::Veronese { seed } => {
            let frame = match rep.kind() {
                Kind::SymPower | Kind::FuchsianBase => sym_power_frame(rep.dim())?,
                other => {
                    return Err(Error::Precondition(format!(
                        "Veronese sampling needs a symmetric power, not {other}"
                    )))
                }
            };
            let flags = jittered_thetas(count, *seed)
                .par_iter()
                .map(|&t| veronese_flag_in(t, &frame))
                .collect::<Result<Vec<_>>>()?;
            Ok(BoundarySample { flags, partial: false })
        }
        Strategy::Attracting { radius, ks } => {
            let ball = enumerate_ball(rep, *radius)?;
            if rep.base().is_none() {
                return Err(Error::Precondition(
                    "representation has no base Fuchsian images".into(),
                ));
            }
            let mut found: Vec<FlagSample> = ball.elements[1..]
                .par_iter()
                .filter_map(|e| {
                    let b = e.base.as_ref()?;
                    let point = attracting_point(b, &adjugate(b)).ok()?.with_witness(&e.word);
                    flag_from_matrices(rep, point, &e.matrix, &e.inverse, ks.as_deref(), ks.is_none()).ok()
                })
                .collect();
            found.sort_by(|a, b| a.theta().total_cmp(&b.theta()));
            let mut kept: Vec<FlagSample> = Vec::new();
            for f in found {
                if kept.last().is_none_or(|l| f.point.separation(&l.point) >= sep) {
                    kept.push(f);
                }
            }
            if kept.len() > 1 && kept[0].point.separation(&kept[kept.len() - 1].point) < sep {
                kept.pop();
            }
            let partial = kept.len() < count;
            let flags = if partial {
                kept
            } else {
                (0..count).map(|i| kept[i * kept.len() / count].clone()).collect()
            };
            Ok(BoundarySample { flags, partial })
        }
    }
}

fn adjugate(m: &Mat) -> Mat {
    Mat::from_row_slice(2, 2, &[m[(1, 1)], -m[(0, 1)], -m[(1, 0)], m[(0, 0)]])
}

/// Angle halfway along the counterclockwise arc from `a` to `b`.
pub fn arc_midpoint(a: f64, b: f64) -> f64 {
    (a + (b - a).rem_euclid(TAU) / 2.0).rem_euclid(TAU)
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::f64::consts::PI;

    #[test]
    fn angles_are_canonical() {
        assert_eq!(BoundaryPoint::new(-0.5).unwrap().theta(), TAU - 0.5);
        assert!((BoundaryPoint::new(7.0).unwrap().theta() - (7.0 - TAU)).abs() < 1e-15);
        assert!(BoundaryPoint::new(f64::NAN).is_err());
        let p = |t| BoundaryPoint::new(t).unwrap();
        assert!(is_positive_triple(&p(0.1), &p(1.0), &p(3.0)));
        assert!(is_positive_triple(&p(3.0), &p(0.1), &p(1.0)));
        assert!(!is_positive_triple(&p(3.0), &p(1.0), &p(0.1)));
    }

    #[test]
    fn veronese_at_zero_is_coordinate_flag() {
        let f = veronese_flag(0.0, 4).unwrap();
        assert!(f.space(1).unwrap().distance(&Subspace::coordinate(4, &[0]).unwrap()) < 1e-12);
        assert!(f.space(2).unwrap().distance(&Subspace::coordinate(4, &[0, 1]).unwrap()) < 1e-12);
    }

    #[test]
    fn veronese_middle_space_is_lagrangian() {
        let s = SymplecticSpace::standard(2).unwrap();
        for t in [0.0, 0.7, 2.0, 4.5, 6.1] {
            let f = veronese_flag(t, 4).unwrap();
            assert!(s.is_lagrangian(f.space(2).unwrap()).unwrap());
        }
    }

    #[test]
    fn veronese_line_for_two_dimensions() {
        let f = veronese_flag(1.2, 2).unwrap();
        let line = Subspace::span(2, &[Vector::from_vec(vec![0.6f64.cos(), 0.6f64.sin()])]).unwrap();
        assert!(f.space(1).unwrap().distance(&line) < 1e-12);
    }

    #[test]
    fn diagonal_attracting_subspace() {
        let m = Mat::from_diagonal(&Vector::from_vec(vec![8.0, 2.0, 0.5, 0.125]));
        let (s, gap) = attracting_subspace(&m, 2).unwrap();
        assert!(s.distance(&Subspace::coordinate(4, &[0, 1]).unwrap()) < 1e-12);
        assert!((gap - 0.25).abs() < 1e-12);
        let (s3, _) = attracting_subspace(&m, 3).unwrap();
        assert!(s3.distance(&Subspace::coordinate(4, &[0, 1, 2]).unwrap()) < 1e-12);
    }

    #[test]
    fn rotation_has_no_attracting_line() {
        let (s, c) = (PI / 3.0).sin_cos();
        let r = Mat::from_row_slice(2, 2, &[c, -s, s, c]);
        assert!(matches!(
            attracting_subspace(&r, 1),
            Err(Error::NoAttractingPoint { k: 1, .. })
        ));
    }

    #[test]
    fn conjugated_attracting_subspace() {
        let c = Mat::from_row_slice(
            4,
            4,
            &[1.0, 0.3, -0.2, 0.5, 0.1, 1.2, 0.4, -0.3, 0.7, -0.5, 0.9, 0.2, -0.4, 0.6, 0.1, 1.1],
        );
        let d = Mat::from_diagonal(&Vector::from_vec(vec![8.0, 2.0, 0.5, 0.125]));
        let ci = c.clone().try_inverse().unwrap();
        let m = &c * d * &ci;
        let (s, _) = attracting_subspace(&m, 2).unwrap();
        let expected = Subspace::new(c.columns(0, 2).into_owned()).unwrap();
        assert!(s.distance(&expected) < 1e-10);
    }

    #[test]
    fn sample_count_is_validated() {
        let rho = crate::rep::fuchsian_genus2().unwrap();
        assert!(sample_boundary(&rho, 0, &Strategy::Veronese { seed: 1 }).is_err());
        let s = sample_boundary(&rho, 3, &Strategy::Veronese { seed: 1 }).unwrap();
        assert_eq!(s.flags.len(), 3);
    }
}
