//! Dense helpers on top of nalgebra: sorted SVDs, null spaces, complements
//! and principal-angle sines.

use nalgebra::{DMatrix, DVector};

pub type Mat = DMatrix<f64>;
pub type Vector = DVector<f64>;

/// Thin SVD with singular values sorted in decreasing order.
///
/// Wide matrices are padded with zero rows so that `v` is always a full
/// `cols x cols` orthogonal matrix; this makes null spaces available.
pub struct SortedSvd {
    pub u: Mat,
    pub sigma: Vec<f64>,
    pub v: Mat,
}

pub fn svd_sorted(m: &Mat) -> SortedSvd {
    let (r, c) = m.shape();
    if c == 0 {
        return SortedSvd {
            u: Mat::zeros(r, 0),
            sigma: vec![],
            v: Mat::zeros(0, 0),
        };
    }
    let padded = if r < c {
        let mut p = Mat::zeros(c, c);
        p.view_mut((0, 0), (r, c)).copy_from(m);
        p
    } else {
        m.clone()
    };
    let svd = padded.svd(true, true);
    let u_raw = svd.u.expect("u requested");
    let vt_raw = svd.v_t.expect("v_t requested");
    let k = svd.singular_values.len();
    let mut order: Vec<usize> = (0..k).collect();
    order.sort_by(|&a, &b| svd.singular_values[b].total_cmp(&svd.singular_values[a]));
    let rows_u = r.min(u_raw.nrows());
    let mut u = Mat::zeros(rows_u, k);
    let mut v = Mat::zeros(c, k);
    let mut sigma = Vec::with_capacity(k);
    for (dst, &src) in order.iter().enumerate() {
        sigma.push(svd.singular_values[src]);
        u.set_column(dst, &u_raw.column(src).rows(0, rows_u));
        v.set_column(dst, &vt_raw.row(src).transpose());
    }
    SortedSvd { u, sigma, v }
}

/// Singular values in decreasing order.
pub fn singular_values(m: &Mat) -> Vec<f64> {
    if m.ncols() == 0 || m.nrows() == 0 {
        return vec![];
    }
    let mut s: Vec<f64> = m.singular_values().iter().copied().collect();
    s.sort_by(|a, b| b.total_cmp(a));
    s
}

/// Smallest singular value of a tall (or square) matrix; 0 when the matrix
/// has more columns than rows.
pub fn smallest_singular_value(m: &Mat) -> f64 {
    if m.ncols() == 0 {
        return f64::INFINITY;
    }
    if m.ncols() > m.nrows() {
        return 0.0;
    }
    singular_values(m).last().copied().unwrap_or(0.0)
}

/// Horizontal concatenation.
pub fn hcat(parts: &[&Mat]) -> Mat {
    let rows = parts.first().map(|p| p.nrows()).unwrap_or(0);
    let cols: usize = parts.iter().map(|p| p.ncols()).sum();
    let mut out = Mat::zeros(rows, cols);
    let mut at = 0;
    for p in parts {
        debug_assert_eq!(p.nrows(), rows);
        out.view_mut((0, at), (rows, p.ncols())).copy_from(*p);
        at += p.ncols();
    }
    out
}

/// Orthonormal basis of the column span of a full-column-rank matrix, via
/// Householder QR (column `j` of the result spans the same flag as the first
/// `j + 1` input columns). Returns `None` when the columns are dependent
/// relative to `rank_tol`.
pub fn orthonormal_columns(m: &Mat, rank_tol: f64) -> Option<Mat> {
    let (r, c) = m.shape();
    if c == 0 {
        return Some(Mat::zeros(r, 0));
    }
    if c > r {
        return None;
    }
    let sv = singular_values(m);
    let top = sv[0];
    if top == 0.0 || sv[c - 1] <= rank_tol * top {
        return None;
    }
    let qr = m.clone().qr();
    let q = qr.q();
    let rr = qr.r();
    let mut q = q.columns(0, c).into_owned();
    // Fix signs so that R has a positive diagonal: the basis then does not
    // depend on Householder sign choices.
    for j in 0..c {
        if rr[(j, j)] < 0.0 {
            q.column_mut(j).neg_mut();
        }
    }
    Some(q)
}

/// Orthonormal basis of the numerical range of `m` (singular values above
/// `tol` in absolute terms).
pub fn range_basis(m: &Mat, tol: f64) -> Mat {
    if m.ncols() == 0 {
        return Mat::zeros(m.nrows(), 0);
    }
    let svd = svd_sorted(m);
    let rank = svd.sigma.iter().filter(|&&s| s > tol).count();
    svd.u.columns(0, rank).into_owned()
}

/// The `count` right singular vectors with the smallest singular values,
/// plus the full sorted singular-value list.
pub fn null_vectors(m: &Mat, count: usize) -> (Mat, Vec<f64>) {
    let svd = svd_sorted(m);
    let c = m.ncols();
    let count = count.min(c);
    (svd.v.columns(c - count, count).into_owned(), svd.sigma)
}

/// Orthonormal basis of the Euclidean orthogonal complement of the span of
/// the orthonormal columns of `b`.
pub fn complement(b: &Mat) -> Mat {
    let n = b.nrows();
    let k = b.ncols();
    if k == 0 {
        return Mat::identity(n, n);
    }
    if k >= n {
        return Mat::zeros(n, 0);
    }
    let (v, _) = null_vectors(&b.transpose(), n - k);
    v
}

/// Sines of the principal angles between two subspaces given by orthonormal
/// columns, in decreasing order. Uses the projection onto the complement of
/// `a`, which stays accurate for tiny angles.
pub fn principal_angle_sines(a: &Mat, b: &Mat) -> Vec<f64> {
    let proj = b - a * (a.transpose() * b);
    singular_values(&proj)
}

/// Largest principal-angle sine; `1.0` for subspaces of different dimension.
pub fn subspace_distance(a: &Mat, b: &Mat) -> f64 {
    if a.ncols() != b.ncols() || a.nrows() != b.nrows() {
        return 1.0;
    }
    if a.ncols() == 0 {
        return 0.0;
    }
    principal_angle_sines(a, b)
        .first()
        .copied()
        .unwrap_or(0.0)
        .min(1.0)
}

/// Distance of the span of `b` from being contained in the span of `a`
/// (largest sine of the angle between a vector of `b` and `a`).
pub fn containment_defect(a: &Mat, b: &Mat) -> f64 {
    if b.ncols() == 0 {
        return 0.0;
    }
    let proj = b - a * (a.transpose() * b);
    singular_values(&proj).first().copied().unwrap_or(0.0)
}

pub fn max_abs(m: &Mat) -> f64 {
    m.iter().fold(0.0f64, |acc, x| acc.max(x.abs()))
}

/// Moduli of the (complex) eigenvalues, in decreasing order.
pub fn eigenvalue_moduli(m: &Mat) -> Vec<f64> {
    let mut out: Vec<f64> = m
        .clone()
        .complex_eigenvalues()
        .iter()
        .map(|z| z.norm())
        .collect();
    out.sort_by(|a, b| b.total_cmp(a));
    out
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn svd_sorted_handles_wide_matrices() {
        let m = Mat::from_row_slice(1, 3, &[1.0, 0.0, 0.0]);
        let svd = svd_sorted(&m);
        assert_eq!(svd.v.shape(), (3, 3));
        assert!((svd.sigma[0] - 1.0).abs() < 1e-15);
        assert!(svd.sigma[1].abs() < 1e-15);
    }

    #[test]
    fn complement_of_coordinate_plane() {
        let b = Mat::from_column_slice(3, 1, &[1.0, 0.0, 0.0]);
        let c = complement(&b);
        assert_eq!(c.ncols(), 2);
        assert!((b.transpose() * &c).norm() < 1e-14);
    }

    #[test]
    fn small_angles_are_resolved() {
        let eps = 1e-11;
        let a = Mat::from_column_slice(2, 1, &[1.0, 0.0]);
        let b = Mat::from_column_slice(2, 1, &[1.0, eps]).normalize();
        let d = subspace_distance(&a, &b);
        assert!((d - eps).abs() < 1e-20);
    }

    #[test]
    fn orthonormal_columns_rejects_dependent_input() {
        let m = Mat::from_column_slice(3, 2, &[1.0, 0.0, 0.0, 2.0, 0.0, 0.0]);
        assert!(orthonormal_columns(&m, 1e-8).is_none());
        let z = Mat::zeros(3, 1);
        assert!(orthonormal_columns(&z, 1e-8).is_none());
    }
}
