//! Linear charts of the Lagrangian Grassmannian.
//!
//! For transverse Lagrangians `P`, `Q`, every Lagrangian `R` transverse to
//! `Q` is the graph `{v + u(v) : v ∈ P}` of a unique symmetric map
//! `u : P → Q`, and `q(v, w) = ω(v, u(w))` is the corresponding symmetric
//! bilinear form on `P`. A triple `(P, R, Q)` is maximal when that form is
//! positive definite.
//!
//! Maps are stored as matrices in the orthonormal bases of `P` and `Q`;
//! forms as matrices in the orthonormal basis of `P`. For `dim P = 2` the
//! three-dimensional space of forms uses the fixed orthonormal coordinates
//! `(E11, E22, (E12 + E21)/√2)`.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::linalg::{self, Mat, Vector};
use crate::symplectic::{transverse, Margin, Residual, Subspace, SymplecticSpace};
use crate::tolerance;

fn space_of(s: &Subspace) -> Result<SymplecticSpace> {
    let d = s.ambient_dim();
    if !d.is_multiple_of(2) {
        return Err(Error::DimensionMismatch(format!(
            "odd ambient dimension {d} carries no symplectic form"
        )));
    }
    SymplecticSpace::standard(d / 2)
}

/// `max |A - Aᵀ|`, relative to `max(1, max |A|)`.
pub fn relative_asymmetry(a: &Mat) -> f64 {
    let scale = linalg::max_abs(a).max(1.0);
    linalg::max_abs(&(a - a.transpose())) / scale
}

/// A symmetric map `u : P → Q` between transverse Lagrangians.
#[derive(Debug, Clone)]
pub struct SymMap {
    p: Subspace,
    q: Subspace,
    matrix: Mat,
}

impl SymMap {
    /// `matrix` sends P-coordinates to Q-coordinates. Rejects non-symmetric
    /// maps with the residual of `ω(v, u(w)) - ω(w, u(v))`.
    pub fn new(p: Subspace, q: Subspace, matrix: Mat) -> Result<Self> {
        let space = space_of(&p)?;
        space.require_lagrangian(&p)?;
        space.require_lagrangian(&q)?;
        let m = transverse(&p, &q)?;
        if !m.pass {
            return Err(Error::NotTransverse { margin: m.value });
        }
        let n = space.n();
        if matrix.shape() != (n, n) {
            return Err(Error::DimensionMismatch(format!(
                "map matrix is {:?}, expected {n}x{n}",
                matrix.shape()
            )));
        }
        let u = SymMap { p, q, matrix };
        let residual = relative_asymmetry(&u.pairing_matrix());
        if residual > tolerance::current().sym {
            return Err(Error::NotSymmetric { residual });
        }
        Ok(u)
    }

    pub fn p(&self) -> &Subspace {
        &self.p
    }

    pub fn q(&self) -> &Subspace {
        &self.q
    }

    pub fn matrix(&self) -> &Mat {
        &self.matrix
    }

    /// Entry `(i, j)` is `ω(p_i, u(p_j))` for the stored basis of `P`.
    pub fn pairing_matrix(&self) -> Mat {
        let j = crate::symplectic::standard_omega(self.p.ambient_dim() / 2);
        self.p.basis().transpose() * j * self.q.basis() * &self.matrix
    }

    /// Ambient image `u(v)` of an ambient vector `v ∈ P`.
    pub fn apply(&self, v: &Vector) -> Vector {
        self.q.basis() * (&self.matrix * self.p.coordinates(v))
    }

    pub fn kernel(&self) -> Subspace {
        let n = self.matrix.ncols();
        let svd = linalg::svd_sorted(&self.matrix);
        let tol = tolerance::current().rank * svd.sigma.first().copied().unwrap_or(1.0).max(1.0);
        let rank = svd.sigma.iter().filter(|&&s| s > tol).count();
        let coords = svd.v.columns(rank, n - rank).into_owned();
        Subspace::from_orthonormal(self.p.basis() * coords)
    }
}

/// A symmetric bilinear form on a Lagrangian `P`, in `P`'s stored basis.
#[derive(Debug, Clone)]
pub struct SymForm {
    p: Subspace,
    matrix: Mat,
}

impl SymForm {
    pub fn new(p: Subspace, matrix: Mat) -> Result<Self> {
        if matrix.shape() != (p.dim(), p.dim()) {
            return Err(Error::DimensionMismatch(format!(
                "form matrix is {:?} on a {}-dimensional space",
                matrix.shape(),
                p.dim()
            )));
        }
        let residual = relative_asymmetry(&matrix);
        if residual > tolerance::current().sym {
            return Err(Error::NotSymmetric { residual });
        }
        Ok(SymForm { p, matrix })
    }

    pub fn p(&self) -> &Subspace {
        &self.p
    }

    pub fn matrix(&self) -> &Mat {
        &self.matrix
    }

    /// Eigenvalues of the symmetric part, ascending.
    pub fn eigenvalues(&self) -> Vec<f64> {
        let sym = (&self.matrix + self.matrix.transpose()) * 0.5;
        let mut ev: Vec<f64> = sym.symmetric_eigenvalues().iter().copied().collect();
        ev.sort_by(|a, b| a.total_cmp(b));
        ev
    }

    pub fn min_eigenvalue(&self) -> f64 {
        self.eigenvalues().first().copied().unwrap_or(0.0)
    }

    /// Evaluates `q(v, w)` on ambient vectors of `P`.
    pub fn eval(&self, v: &Vector, w: &Vector) -> f64 {
        self.p.coordinates(v).dot(&(&self.matrix * self.p.coordinates(w)))
    }

    /// The projective class of the form in the fixed coordinates of `Q(P)`
    /// (only for `dim P = 2`).
    pub fn point(&self) -> Result<ProjPoint> {
        if self.p.dim() != 2 {
            return Err(Error::InvalidArgument(
                "form coordinates are fixed for two-dimensional P only".into(),
            ));
        }
        ProjPoint::new(form_coordinates(&self.matrix))
    }
}

/// `(q11, q22, √2 q12)` for a 2x2 symmetric matrix.
pub fn form_coordinates(m: &Mat) -> Vector {
    let off = 0.5 * (m[(0, 1)] + m[(1, 0)]);
    Vector::from_vec(vec![m[(0, 0)], m[(1, 1)], std::f64::consts::SQRT_2 * off])
}

/// Inverse of [`form_coordinates`].
pub fn form_from_coordinates(c: &Vector) -> Mat {
    let off = c[2] / std::f64::consts::SQRT_2;
    Mat::from_row_slice(2, 2, &[c[0], off, off, c[1]])
}

/// A point of a projective space: a unit vector whose first non-negligible
/// coordinate is positive.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ProjPoint {
    coords: Vec<f64>,
}

impl ProjPoint {
    pub fn new(v: Vector) -> Result<Self> {
        let norm = v.norm();
        if !(norm > 0.0) || !norm.is_finite() {
            return Err(Error::Degenerate("projective point needs a nonzero vector".into()));
        }
        let mut u = v / norm;
        if let Some(first) = u.iter().find(|x| x.abs() > 1e-12) {
            if *first < 0.0 {
                u.neg_mut();
            }
        }
        Ok(ProjPoint {
            coords: u.iter().copied().collect(),
        })
    }

    pub fn from_slice(c: &[f64]) -> Result<Self> {
        ProjPoint::new(Vector::from_column_slice(c))
    }

    pub fn ambient_dim(&self) -> usize {
        self.coords.len()
    }

    pub fn coords(&self) -> Vector {
        Vector::from_column_slice(&self.coords)
    }

    pub fn as_slice(&self) -> &[f64] {
        &self.coords
    }

    /// Sine of the angle between the two lines.
    pub fn distance(&self, other: &ProjPoint) -> f64 {
        let a = self.coords();
        let b = other.coords();
        let along = a.dot(&b);
        (a - b * along).norm().min(1.0)
    }
}

/// Coordinates of a line of `P` in `P`'s stored basis.
pub fn line_in(p: &Subspace, line: &Subspace) -> Result<ProjPoint> {
    if line.dim() != 1 {
        return Err(Error::InvalidArgument(format!(
            "expected a line, got a {}-dimensional subspace",
            line.dim()
        )));
    }
    let defect = p.containment_defect(line);
    if defect > tolerance::current().angle.max(1e-6) {
        return Err(Error::NotContained { distance: defect });
    }
    ProjPoint::new(p.coordinates(&line.basis().column(0).into_owned()))
}

fn lagrangian_triple_checks(p: &Subspace, q: &Subspace, r: &Subspace) -> Result<SymplecticSpace> {
    let space = space_of(p)?;
    space.require_lagrangian(p)?;
    space.require_lagrangian(q)?;
    space.require_lagrangian(r)?;
    let pq = transverse(p, q)?;
    if !pq.pass {
        return Err(Error::NotTransverse { margin: pq.value });
    }
    Ok(space)
}

/// The symmetric map `u : P → Q` whose graph is `R`.
pub fn chart_u(p: &Subspace, q: &Subspace, r: &Subspace) -> Result<SymMap> {
    let space = lagrangian_triple_checks(p, q, r)?;
    let n = space.n();
    let rq = transverse(r, q)?;
    if rq.value <= tolerance::current().chart {
        return Err(Error::ChartDomain { margin: rq.value });
    }
    let frame = linalg::hcat(&[p.basis(), q.basis()]);
    let coeffs = frame
        .lu()
        .solve(r.basis())
        .ok_or(Error::NotTransverse { margin: 0.0 })?;
    let a = coeffs.rows(0, n).into_owned();
    let b = coeffs.rows(n, n).into_owned();
    // u = b a⁻¹, computed as the solution of aᵀ uᵀ = bᵀ.
    let ut = a
        .transpose()
        .lu()
        .solve(&b.transpose())
        .ok_or(Error::ChartDomain { margin: rq.value })?;
    let u = SymMap {
        p: p.clone(),
        q: q.clone(),
        matrix: ut.transpose(),
    };
    let residual = relative_asymmetry(&u.pairing_matrix());
    if residual > tolerance::current().sym {
        return Err(Error::NotSymmetric { residual });
    }
    Ok(u)
}

/// The graph `{v + u(v) : v ∈ P}`.
pub fn graph_lagrangian(u: &SymMap) -> Result<Subspace> {
    let cols = u.p.basis() + u.q.basis() * &u.matrix;
    Subspace::new(cols)
}

/// The form `q(v, w) = ω(v, u(w))` on `P` attached to `R`.
pub fn chart_q(p: &Subspace, q: &Subspace, r: &Subspace) -> Result<SymForm> {
    let u = chart_u(p, q, r)?;
    SymForm::new(p.clone(), u.pairing_matrix())
}

/// Whether `(P, R, Q)` is a maximal triple; returns the smallest eigenvalue
/// of `q_{P,Q}^R` as the margin.
pub fn is_maximal_triple(p: &Subspace, r: &Subspace, q: &Subspace) -> Result<(bool, f64)> {
    lagrangian_triple_checks(p, q, r)?;
    for (a, b) in [(p, r), (r, q)] {
        let m: Margin = transverse(a, b)?;
        if !m.pass {
            return Err(Error::NotTransverse { margin: m.value });
        }
    }
    let form = chart_q(p, q, r)?;
    let min = form.min_eigenvalue();
    Ok((min > 0.0, min))
}

/// `max |q(u_i, u_j)|` over a basis of `U ⊆ P`; `U` is singular for `q`
/// when the residual passes.
pub fn singular_subspace_check(q: &SymForm, u: &Subspace) -> Result<Residual> {
    let defect = q.p.containment_defect(u);
    if defect > tolerance::current().angle.max(1e-6) {
        return Err(Error::NotContained { distance: defect });
    }
    let c = q.p.basis().transpose() * u.basis();
    let restricted = c.transpose() * &q.matrix * c;
    Ok(Residual::new(linalg::max_abs(&restricted), tolerance::current().iso))
}

/// `ι(ℓ)`: the rank-one semi-definite form `φ ⊗ φ` where `φ` vanishes on
/// the line `ℓ` of a two-dimensional `P` (given in `P`-coordinates).
pub fn iota(ell: &ProjPoint) -> Result<ProjPoint> {
    if ell.ambient_dim() != 2 {
        return Err(Error::InvalidArgument(
            "iota is defined for lines of a two-dimensional Lagrangian".into(),
        ));
    }
    let l = ell.as_slice();
    let phi = Vector::from_vec(vec![-l[1], l[0]]);
    let f = &phi * phi.transpose();
    ProjPoint::new(form_coordinates(&f))
}

fn wedge(a: &[f64], b: &[f64]) -> f64 {
    a[0] * b[1] - a[1] * b[0]
}

/// `cr(a, b; c, d) = (a∧b)/(c∧b) · (c∧d)/(a∧d)` for points of a projective
/// line.
pub fn cross_ratio(a: &ProjPoint, b: &ProjPoint, c: &ProjPoint, d: &ProjPoint) -> Result<f64> {
    for p in [a, b, c, d] {
        if p.ambient_dim() != 2 {
            return Err(Error::InvalidArgument(
                "cross ratio needs points of a projective line".into(),
            ));
        }
    }
    let tol = tolerance::current().rank;
    let ab = wedge(a.as_slice(), b.as_slice());
    let cb = wedge(c.as_slice(), b.as_slice());
    let cd = wedge(c.as_slice(), d.as_slice());
    let ad = wedge(a.as_slice(), d.as_slice());
    for (which, value) in [("a∧b", ab), ("c∧b", cb), ("c∧d", cd), ("a∧d", ad)] {
        if value.abs() <= tol {
            return Err(Error::DegenerateQuadruple { which, value });
        }
    }
    Ok(ab / cb * (cd / ad))
}

/// `b` and `d` separate `a` and `c` on the projective line.
pub fn is_cyclically_ordered(
    a: &ProjPoint,
    b: &ProjPoint,
    c: &ProjPoint,
    d: &ProjPoint,
) -> Result<bool> {
    Ok(cross_ratio(a, b, c, d)? < 0.0)
}

/// Smallest singular value of the 3x3 matrix of unit coordinate rows;
/// collinear in `P(Q(P))` when below `τ_rank`.
pub fn collinear_in_pq(p1: &ProjPoint, p2: &ProjPoint, p3: &ProjPoint) -> Result<Residual> {
    let mut m = Mat::zeros(3, 3);
    for (i, p) in [p1, p2, p3].iter().enumerate() {
        if p.ambient_dim() != 3 {
            return Err(Error::InvalidArgument(
                "collinearity test needs points of P(Q(P)) with dim P = 2".into(),
            ));
        }
        m.set_row(i, &p.coords().transpose());
    }
    let s = linalg::smallest_singular_value(&m);
    Ok(Residual::new(s, tolerance::current().rank))
}
