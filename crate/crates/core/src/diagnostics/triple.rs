//! Checks on triples (and tuples) of boundary flags.

use crate::charts::{self, ProjPoint};
use crate::error::{Error, Result};
use crate::flags::{is_positive_triple, FlagSample};
use crate::linalg::{self, Mat};
use crate::symplectic::{direct_sum_margin, Margin, Subspace};
use crate::tolerance;

use super::{meet, require_distinct, CheckResult};

fn half_dim(x: &FlagSample) -> Result<usize> {
    let big_n = x.dim();
    if !big_n.is_multiple_of(2) {
        return Err(Error::Precondition(format!(
            "check needs an even-dimensional symplectic flag, got dimension {big_n}"
        )));
    }
    Ok(big_n / 2)
}

fn same_dims(flags: &[&FlagSample]) -> Result<usize> {
    let big_n = flags[0].dim();
    if flags.iter().any(|f| f.dim() != big_n) {
        return Err(Error::DimensionMismatch("flags live in different dimensions".into()));
    }
    Ok(big_n)
}

fn thetas(flags: &[&FlagSample]) -> Vec<f64> {
    flags.iter().map(|f| f.theta()).collect()
}

/// `(x^k ∩ z^{N+1-k}) ⊕ (y^k ∩ z^{N+1-k}) ⊕ z^{N-1-k}` together with the
/// variant `x^k ⊕ (y^k ∩ z^{N+1-k}) ⊕ z^{N-1-k}`; the margin is the smaller
/// of the two directness margins and `agree` records whether both sums have
/// the same verdict.
pub fn check_hk(x: &FlagSample, y: &FlagSample, z: &FlagSample, k: usize) -> Result<CheckResult> {
    let big_n = same_dims(&[x, y, z])?;
    if k == 0 || k >= big_n {
        return Err(Error::InvalidArgument(format!("H_k needs 1 <= k < {big_n}, got {k}")));
    }
    require_distinct(&[x, y, z])?;
    let zk = z.space(big_n + 1 - k)?;
    let line = |f: &FlagSample| -> Result<Subspace> {
        if zk.dim() == big_n {
            Ok(f.space(k)?.clone())
        } else {
            meet(f.space(k)?, zk, 1)
        }
    };
    let a = line(x)?;
    let b = line(y)?;
    let c = z.space(big_n - 1 - k)?;
    let first = direct_sum_margin(&[&a, &b, c])?;
    let second = direct_sum_margin(&[x.space(k)?, &b, c])?;
    let agree = first.pass == second.pass;
    Ok(
        CheckResult::above(&format!("H{k}"), first.value.min(second.value), first.tolerance)
            .with_witness(thetas(&[x, y, z]))
            .detail("sum", first.value)
            .detail("variant", second.value)
            .detail("agree", if agree { 1.0 } else { 0.0 }),
    )
}

/// Definiteness of `q_{x^n, z^n}^{y^n}`: positive definite for
/// counterclockwise triples, negative definite for clockwise ones.
pub fn check_maximal(x: &FlagSample, y: &FlagSample, z: &FlagSample) -> Result<CheckResult> {
    same_dims(&[x, y, z])?;
    let n = half_dim(x)?;
    require_distinct(&[x, y, z])?;
    let form = charts::chart_q(x.space(n)?, z.space(n)?, y.space(n)?)?;
    let ev = form.eigenvalues();
    let (lo, hi) = (ev[0], ev[ev.len() - 1]);
    let positive = is_positive_triple(&x.point, &y.point, &z.point);
    let margin = if positive { lo } else { -hi };
    Ok(CheckResult::above("maximal", margin, 0.0)
        .with_witness(thetas(&[x, y, z]))
        .detail("min_eigenvalue", lo)
        .detail("max_eigenvalue", hi)
        .detail("orientation", if positive { 1.0 } else { -1.0 }))
}

/// `(y^{n-1} ⊕ z^n) ∩ x^n`, of dimension `n - 1`.
pub fn psi_line(x: &FlagSample, y: &FlagSample, z: &FlagSample) -> Result<Subspace> {
    let n = half_dim(x)?;
    let sum = y.space(n - 1)?.sum(z.space(n)?);
    if sum.dim() != 2 * n - 1 {
        return Err(Error::FlagQuality(format!(
            "y^(n-1) + z^n has dimension {} instead of {}",
            sum.dim(),
            2 * n - 1
        )));
    }
    meet(&sum, x.space(n)?, n - 1)
}

/// Transversality inside `x^n` of (i) `x^{n-1}` and `z^{n+1} ∩ x^n`,
/// (ii) `x^{n-1}` and `y^{n+1} ∩ x^n`, (iii) `ψ` and `z^{n+1} ∩ x^n`,
/// (iv) `ψ` and `y^{n+1} ∩ x^n`, where `ψ = (y^{n-1} ⊕ z^n) ∩ x^n`.
/// Item (iv) is asserted only when `H_n` holds for the triple.
pub fn check_transversality(x: &FlagSample, y: &FlagSample, z: &FlagSample) -> Result<CheckResult> {
    same_dims(&[x, y, z])?;
    let n = half_dim(x)?;
    require_distinct(&[x, y, z])?;
    let xn = x.space(n)?;
    let xn1 = x.space(n - 1)?;
    let zx = meet(z.space(n + 1)?, xn, 1)?;
    let yx = meet(y.space(n + 1)?, xn, 1)?;
    let psi = psi_line(x, y, z)?;
    let items = [
        direct_sum_margin(&[xn1, &zx])?,
        direct_sum_margin(&[xn1, &yx])?,
        direct_sum_margin(&[&psi, &zx])?,
        direct_sum_margin(&[&psi, &yx])?,
    ];
    let hn = check_hk(x, y, z, n)?;
    let asserted = if hn.pass { 4 } else { 3 };
    let margin = items[..asserted]
        .iter()
        .map(|m| m.value)
        .fold(f64::INFINITY, f64::min);
    Ok(CheckResult::above("transversality", margin, items[0].tolerance)
        .with_witness(thetas(&[x, y, z]))
        .detail("i", items[0].value)
        .detail("ii", items[1].value)
        .detail("iii", items[2].value)
        .detail("iv", items[3].value)
        .detail("iv_asserted", if hn.pass { 1.0 } else { 0.0 }))
}

fn require_sp4(x: &FlagSample) -> Result<()> {
    if x.dim() != 4 {
        return Err(Error::Precondition(format!(
            "check is specific to Sp(4, R); flag dimension is {}",
            x.dim()
        )));
    }
    Ok(())
}

/// `[q_{x,z}^y]`, `ι(y³ ∩ x²)` and `ι((y¹ ⊕ z²) ∩ x²)` in `P(Q(x²))`.
pub fn collinearity_points(x: &FlagSample, y: &FlagSample, z: &FlagSample) -> Result<[ProjPoint; 3]> {
    require_sp4(x)?;
    same_dims(&[x, y, z])?;
    require_distinct(&[x, y, z])?;
    let x2 = x.space(2)?;
    let q = charts::chart_q(x2, z.space(2)?, y.space(2)?)?.point()?;
    let yx = meet(y.space(3)?, x2, 1)?;
    let psi = psi_line(x, y, z)?;
    Ok([
        q,
        charts::iota(&charts::line_in(x2, &yx)?)?,
        charts::iota(&charts::line_in(x2, &psi)?)?,
    ])
}

/// Collinearity residual of [`collinearity_points`], below `τ_col` to pass.
pub fn check_collinearity(x: &FlagSample, y: &FlagSample, z: &FlagSample) -> Result<CheckResult> {
    let [q, a, b] = collinearity_points(x, y, z)?;
    let residual = charts::collinear_in_pq(&q, &a, &b)?;
    Ok(CheckResult::below("collinearity", residual.value, tolerance::current().col)
        .with_witness(thetas(&[x, y, z])))
}

/// The lines `z³ ∩ x²`, `(y¹ ⊕ z²) ∩ x²`, `y³ ∩ x²`, `x¹` of `x²`, in
/// `x²`-coordinates.
pub fn cyclic_order_lines(x: &FlagSample, y: &FlagSample, z: &FlagSample) -> Result<[ProjPoint; 4]> {
    require_sp4(x)?;
    same_dims(&[x, y, z])?;
    require_distinct(&[x, y, z])?;
    let x2 = x.space(2)?;
    Ok([
        charts::line_in(x2, &meet(z.space(3)?, x2, 1)?)?,
        charts::line_in(x2, &psi_line(x, y, z)?)?,
        charts::line_in(x2, &meet(y.space(3)?, x2, 1)?)?,
        charts::line_in(x2, x.space(1)?)?,
    ])
}

/// Cross ratio of [`cyclic_order_lines`]; the quadruple is cyclically ordered
/// when it is negative. A vanishing wedge is an error (a transversality
/// violation, not an order failure).
pub fn check_cyclic_order(x: &FlagSample, y: &FlagSample, z: &FlagSample) -> Result<CheckResult> {
    let [a, b, c, d] = cyclic_order_lines(x, y, z)?;
    let cr = charts::cross_ratio(&a, &b, &c, &d)?;
    let wedge = |p: &ProjPoint, q: &ProjPoint| {
        let (p, q) = (p.as_slice(), q.as_slice());
        (p[0] * q[1] - p[1] * q[0]).abs()
    };
    Ok(CheckResult::below("cyclic_order", cr, 0.0)
        .with_witness(thetas(&[x, y, z]))
        .detail("wedge_ab", wedge(&a, &b))
        .detail("wedge_cb", wedge(&c, &b))
        .detail("wedge_cd", wedge(&c, &d))
        .detail("wedge_ad", wedge(&a, &d)))
}

/// Directness of `x^a + y^b + z^c`.
pub fn hyperconvex_abc(
    x: &FlagSample,
    y: &FlagSample,
    z: &FlagSample,
    a: usize,
    b: usize,
    c: usize,
) -> Result<Margin> {
    require_distinct(&[x, y, z])?;
    direct_sum_margin(&[x.space(a)?, y.space(b)?, z.space(c)?])
}

/// Smallest singular value of the matrix of first lines of `N` distinct
/// flags in `R^N`.
pub fn check_hyperconvex(flags: &[&FlagSample]) -> Result<CheckResult> {
    let big_n = same_dims(flags)?;
    if flags.len() != big_n {
        return Err(Error::InvalidArgument(format!(
            "hyperconvexity needs exactly {big_n} points, got {}",
            flags.len()
        )));
    }
    require_distinct(flags)?;
    let cols: Vec<&Mat> = flags
        .iter()
        .map(|f| f.space(1).map(|s| s.basis()))
        .collect::<Result<Vec<_>>>()?;
    let m = linalg::hcat(&cols);
    Ok(CheckResult::above(
        "hyperconvex",
        linalg::smallest_singular_value(&m),
        tolerance::current().rank,
    )
    .with_witness(thetas(flags)))
}
