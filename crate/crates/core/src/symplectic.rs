//! Real symplectic vector spaces and their subspaces.
//!
//! Every [`Subspace`] is held through an orthonormal basis, so the margins
//! reported here (smallest singular values of concatenated bases) are
//! independent of the particular basis chosen.

use std::fmt;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::linalg::{self, Mat, Vector};
use crate::tolerance;

/// A quantity that must stay *above* a tolerance (transversality,
/// directness, definiteness).
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Margin {
    pub value: f64,
    pub tolerance: f64,
    pub pass: bool,
}

impl Margin {
    pub fn new(value: f64, tolerance: f64) -> Self {
        Margin {
            value,
            tolerance,
            pass: value > tolerance,
        }
    }
}

/// A quantity that must stay *below* a tolerance (isotropy defects,
/// collinearity residuals, singularity of a form on a subspace).
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Residual {
    pub value: f64,
    pub tolerance: f64,
    pub pass: bool,
}

impl Residual {
    pub fn new(value: f64, tolerance: f64) -> Self {
        Residual {
            value,
            tolerance,
            pass: value < tolerance,
        }
    }
}

/// A linear subspace of `R^d` stored as a `d x k` matrix with orthonormal
/// columns.
#[derive(Clone)]
pub struct Subspace {
    basis: Mat,
}

impl fmt::Debug for Subspace {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "Subspace(dim {} in R^{})", self.dim(), self.ambient_dim())
    }
}

impl PartialEq for Subspace {
    fn eq(&self, other: &Self) -> bool {
        self.dim() == other.dim()
            && self.ambient_dim() == other.ambient_dim()
            && self.distance(other) < tolerance::current().angle
    }
}

impl Subspace {
    /// Builds a subspace from spanning columns, re-orthonormalizing them.
    /// Zero or (numerically) repeated columns are rejected.
    pub fn new(columns: Mat) -> Result<Self> {
        let tol = tolerance::current();
        for (j, col) in columns.column_iter().enumerate() {
            if col.norm() <= tol.rank {
                return Err(Error::Degenerate(format!("column {j} is zero")));
            }
        }
        linalg::orthonormal_columns(&columns, tol.rank)
            .map(|basis| Subspace { basis })
            .ok_or_else(|| Error::Degenerate("columns are linearly dependent".into()))
    }

    pub fn span(ambient: usize, vectors: &[Vector]) -> Result<Self> {
        let mut m = Mat::zeros(ambient, vectors.len());
        for (j, v) in vectors.iter().enumerate() {
            if v.len() != ambient {
                return Err(Error::DimensionMismatch(format!(
                    "vector of length {} in R^{ambient}",
                    v.len()
                )));
            }
            m.set_column(j, v);
        }
        Subspace::new(m)
    }

    /// Span of standard basis vectors (0-based indices).
    pub fn coordinate(ambient: usize, indices: &[usize]) -> Result<Self> {
        let mut seen = indices.to_vec();
        seen.sort_unstable();
        seen.dedup();
        if seen.len() == indices.len() && indices.iter().all(|&i| i < ambient) {
            let mut basis = Mat::zeros(ambient, indices.len());
            for (c, &i) in indices.iter().enumerate() {
                basis[(i, c)] = 1.0;
            }
            return Ok(Subspace { basis });
        }
        let vs: Vec<Vector> = indices
            .iter()
            .map(|&i| {
                let mut v = Vector::zeros(ambient);
                if i < ambient {
                    v[i] = 1.0;
                }
                v
            })
            .collect();
        Subspace::span(ambient, &vs)
    }

    pub fn zero(ambient: usize) -> Self {
        Subspace {
            basis: Mat::zeros(ambient, 0),
        }
    }

    pub fn whole(ambient: usize) -> Self {
        Subspace {
            basis: Mat::identity(ambient, ambient),
        }
    }

    /// Wraps a matrix whose columns are already orthonormal.
    pub(crate) fn from_orthonormal(basis: Mat) -> Self {
        debug_assert!(
            basis.ncols() == 0
                || (basis.transpose() * &basis - Mat::identity(basis.ncols(), basis.ncols()))
                    .amax()
                    < 1e-8
        );
        Subspace { basis }
    }

    pub fn dim(&self) -> usize {
        self.basis.ncols()
    }

    pub fn ambient_dim(&self) -> usize {
        self.basis.nrows()
    }

    pub fn basis(&self) -> &Mat {
        &self.basis
    }

    /// Largest deviation of `BᵀB` from the identity.
    pub fn orthonormality_defect(&self) -> f64 {
        let k = self.dim();
        if k == 0 {
            return 0.0;
        }
        (self.basis.transpose() * &self.basis - Mat::identity(k, k)).amax()
    }

    /// Largest principal-angle sine to `other` (1 when dimensions differ).
    pub fn distance(&self, other: &Subspace) -> f64 {
        linalg::subspace_distance(&self.basis, &other.basis)
    }

    /// How far `other` is from lying inside `self`.
    pub fn containment_defect(&self, other: &Subspace) -> f64 {
        linalg::containment_defect(&self.basis, &other.basis)
    }

    pub fn contains(&self, other: &Subspace) -> bool {
        self.containment_defect(other) < tolerance::current().angle
    }

    /// Numerical sum, rank cut at the rank tolerance.
    pub fn sum(&self, other: &Subspace) -> Subspace {
        let m = linalg::hcat(&[&self.basis, &other.basis]);
        Subspace::from_orthonormal(linalg::range_basis(&m, tolerance::current().rank))
    }

    /// Numerical intersection with dimension `dim A + dim B - rank([A|B])`.
    pub fn intersection(&self, other: &Subspace) -> Subspace {
        let d = intersection_dim(self, other);
        self.intersection_of_dim(other, d).0
    }

    /// Intersection assuming it has dimension `dim`. Returns the subspace and
    /// the pair `(largest discarded singular value, next singular value)`
    /// which measures how well-defined that dimension is.
    pub fn intersection_of_dim(&self, other: &Subspace, dim: usize) -> (Subspace, (f64, f64)) {
        let n = self.ambient_dim();
        if dim == 0 {
            let m = linalg::hcat(&[&self.basis, &other.basis]);
            return (Subspace::zero(n), (0.0, linalg::smallest_singular_value(&m)));
        }
        let a = &self.basis;
        let b = &other.basis;
        let ka = a.ncols();
        let kb = b.ncols();
        let m = linalg::hcat(&[a, &(-b)]);
        let (v, sigma) = linalg::null_vectors(&m, dim);
        let mut vecs = Mat::zeros(n, dim);
        for j in 0..dim {
            let x = v.column(j).rows(0, ka).into_owned();
            let y = v.column(j).rows(ka, kb).into_owned();
            let w = (a * x + b * y) * 0.5;
            vecs.set_column(j, &w);
        }
        let total = ka + kb;
        // Singular values of the wide matrix beyond its row count are zero.
        let mut full = sigma.clone();
        full.resize(total, 0.0);
        let worst_inside = full[total - dim];
        let next = if total > dim { full[total - dim - 1] } else { f64::INFINITY };
        let basis = linalg::svd_sorted(&vecs).u.columns(0, dim).into_owned();
        (Subspace::from_orthonormal(basis), (worst_inside, next))
    }

    /// Image under a linear map (re-orthonormalized).
    pub fn image(&self, m: &Mat) -> Result<Subspace> {
        if m.ncols() != self.ambient_dim() {
            return Err(Error::DimensionMismatch(format!(
                "{}x{} map on R^{}",
                m.nrows(),
                m.ncols(),
                self.ambient_dim()
            )));
        }
        if self.dim() == 0 {
            return Ok(Subspace::zero(m.nrows()));
        }
        let img = m * &self.basis;
        let scale = img.norm().max(f64::MIN_POSITIVE);
        linalg::orthonormal_columns(&(img / scale), 1e-14)
            .map(Subspace::from_orthonormal)
            .ok_or_else(|| Error::Degenerate("map is not injective on the subspace".into()))
    }

    /// Euclidean orthogonal complement.
    pub fn orthogonal_complement(&self) -> Subspace {
        Subspace::from_orthonormal(linalg::complement(&self.basis))
    }

    /// Coordinates of an ambient vector in the stored basis.
    pub fn coordinates(&self, v: &Vector) -> Vector {
        self.basis.transpose() * v
    }
}

/// `R^{2n}` with the standard form `ω(e_i, e_{n+i}) = 1`.
#[derive(Debug, Clone, PartialEq)]
pub struct SymplecticSpace {
    n: usize,
    omega: Mat,
}

/// The standard symplectic matrix `[[0, I], [-I, 0]]`.
pub fn standard_omega(n: usize) -> Mat {
    let mut j = Mat::zeros(2 * n, 2 * n);
    for i in 0..n {
        j[(i, n + i)] = 1.0;
        j[(n + i, i)] = -1.0;
    }
    j
}

impl SymplecticSpace {
    pub fn standard(n: usize) -> Result<Self> {
        if n == 0 {
            return Err(Error::InvalidArgument(
                "symplectic half-dimension must be at least 1".into(),
            ));
        }
        Ok(SymplecticSpace {
            n,
            omega: standard_omega(n),
        })
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn dim(&self) -> usize {
        2 * self.n
    }

    pub fn omega(&self) -> &Mat {
        &self.omega
    }

    /// `ω(v, w) = vᵀ Ω w`.
    pub fn pair(&self, v: &Vector, w: &Vector) -> f64 {
        v.dot(&(&self.omega * w))
    }

    fn check(&self, v: &Subspace) -> Result<()> {
        if v.ambient_dim() != self.dim() {
            return Err(Error::DimensionMismatch(format!(
                "subspace of R^{} in a symplectic space of dimension {}",
                v.ambient_dim(),
                self.dim()
            )));
        }
        Ok(())
    }

    /// `V^⊥ = {w : ω(v, w) = 0 for all v in V}`, the Euclidean complement of
    /// `ΩV` (Ω is orthogonal, so `ΩV` keeps orthonormal columns).
    pub fn omega_orthogonal(&self, v: &Subspace) -> Result<Subspace> {
        self.check(v)?;
        let jv = &self.omega * v.basis();
        Ok(Subspace::from_orthonormal(linalg::complement(&jv)))
    }

    /// Largest `|ω(v_i, v_j)|` over basis pairs; passes when below `τ_iso`.
    pub fn isotropy(&self, v: &Subspace) -> Result<Residual> {
        self.check(v)?;
        let g = v.basis().transpose() * &self.omega * v.basis();
        Ok(Residual::new(linalg::max_abs(&g), tolerance::current().iso))
    }

    pub fn is_isotropic(&self, v: &Subspace) -> Result<bool> {
        Ok(self.isotropy(v)?.pass)
    }

    pub fn is_lagrangian(&self, v: &Subspace) -> Result<bool> {
        Ok(v.dim() == self.n && self.is_isotropic(v)?)
    }

    pub fn require_lagrangian(&self, v: &Subspace) -> Result<()> {
        let r = self.isotropy(v)?;
        if v.dim() != self.n || !r.pass {
            return Err(Error::NotLagrangian {
                residual: r.value,
                dim: v.dim(),
            });
        }
        Ok(())
    }
}

fn same_ambient(parts: &[&Subspace]) -> Result<usize> {
    let n = parts.first().map(|p| p.ambient_dim()).unwrap_or(0);
    if parts.iter().any(|p| p.ambient_dim() != n) {
        return Err(Error::DimensionMismatch(
            "subspaces live in different ambient spaces".into(),
        ));
    }
    Ok(n)
}

/// Smallest singular value of `[A|B]`; `A` and `B` are transverse (trivial
/// intersection) when it exceeds `τ_rank`.
pub fn transverse(a: &Subspace, b: &Subspace) -> Result<Margin> {
    direct_sum_margin(&[a, b])
}

/// Smallest singular value of the concatenation of all bases; the sum is
/// direct when it exceeds `τ_rank`. The empty sum is direct with margin 1.
pub fn direct_sum_margin(parts: &[&Subspace]) -> Result<Margin> {
    let tol = tolerance::current().rank;
    if parts.is_empty() {
        return Ok(Margin::new(1.0, tol));
    }
    let ambient = same_ambient(parts)?;
    let total: usize = parts.iter().map(|p| p.dim()).sum();
    if total > ambient {
        return Err(Error::DimensionOverflow { total, ambient });
    }
    if total == 0 {
        return Ok(Margin::new(1.0, tol));
    }
    let bases: Vec<&Mat> = parts.iter().map(|p| p.basis()).collect();
    let m = linalg::hcat(&bases);
    Ok(Margin::new(linalg::smallest_singular_value(&m), tol))
}

/// Numerical rank of `[A|B]` with cut `τ_rank`.
pub fn sum_rank(a: &Subspace, b: &Subspace) -> usize {
    let tol = tolerance::current().rank;
    let m = linalg::hcat(&[a.basis(), b.basis()]);
    linalg::singular_values(&m)
        .iter()
        .filter(|&&s| s > tol)
        .count()
}

/// `dim A + dim B - rank([A|B])`.
pub fn intersection_dim(a: &Subspace, b: &Subspace) -> usize {
    a.dim() + b.dim() - sum_rank(a, b)
}
