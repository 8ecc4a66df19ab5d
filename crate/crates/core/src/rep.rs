//! Example representations of the genus-2 surface group: a Fuchsian base
//! into `SL(2, R)`, its irreducible symmetric-power lifts (conjugated into
//! `Sp(2n, R)` for even dimension), direct sums, and bending along the
//! separating curve `[a_1, b_1]`.

use std::f64::consts::PI;
use std::fmt;
use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::group::{Letter, Presentation, Word};
use crate::linalg::{self, Mat};
use crate::symplectic::standard_omega;
use crate::tolerance;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Kind {
    FuchsianBase,
    SymPower,
    DirectSum,
    Bent,
}

impl fmt::Display for Kind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let s = match self {
            Kind::FuchsianBase => "fuchsian_base",
            Kind::SymPower => "sym_power",
            Kind::DirectSum => "direct_sum",
            Kind::Bent => "bent",
        };
        f.write_str(s)
    }
}

/// Generator images together with their inverses.
#[derive(Debug, Clone)]
pub struct Generators {
    images: Vec<Mat>,
    inverses: Vec<Mat>,
}

impl Generators {
    fn new(images: Vec<Mat>, symplectic: bool) -> Result<Self> {
        let inverses = images
            .iter()
            .map(|m| invert(m, symplectic))
            .collect::<Result<Vec<_>>>()?;
        Ok(Generators { images, inverses })
    }

    pub fn images(&self) -> &[Mat] {
        &self.images
    }

    pub fn letter_image(&self, l: Letter) -> &Mat {
        if l.is_inverse() {
            &self.inverses[l.index()]
        } else {
            &self.images[l.index()]
        }
    }

    pub fn word_value(&self, w: &Word) -> Mat {
        let d = self.images[0].nrows();
        w.letters()
            .iter()
            .fold(Mat::identity(d, d), |acc, &l| acc * self.letter_image(l))
    }
}

/// Adjugate for 2x2, `-J Mᵀ J` for symplectic matrices, LU otherwise.
fn invert(m: &Mat, symplectic: bool) -> Result<Mat> {
    if m.nrows() == 2 {
        return Ok(Mat::from_row_slice(
            2,
            2,
            &[m[(1, 1)], -m[(0, 1)], -m[(1, 0)], m[(0, 0)]],
        ));
    }
    if symplectic {
        let j = standard_omega(m.nrows() / 2);
        return Ok(-(&j * m.transpose() * &j));
    }
    m.clone()
        .try_inverse()
        .ok_or_else(|| Error::Degenerate("generator image is singular".into()))
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Residuals {
    /// `‖ρ(relator) - I‖_F`.
    pub relator: f64,
    /// `max ‖gᵀ J g - J‖_F` over generators; absent for non-symplectic
    /// representations.
    pub symplectic: Option<f64>,
    /// `max |det g - 1|` over generators.
    pub det: f64,
}

/// A representation of the surface group given by generator images.
#[derive(Debug, Clone)]
pub struct Representation {
    presentation: Presentation,
    dim: usize,
    kind: Kind,
    symplectic: bool,
    gens: Generators,
    base: Option<Generators>,
    residuals: Residuals,
}

impl Representation {
    /// Builds and verifies the relator, determinant and symplectic gates.
    pub fn new(
        presentation: Presentation,
        kind: Kind,
        images: Vec<Mat>,
        base: Option<Vec<Mat>>,
        symplectic: bool,
    ) -> Result<Self> {
        let rep = Representation::unchecked(presentation, kind, images, base, symplectic)?;
        rep.verify()?;
        Ok(rep)
    }

    /// Builds without the residual gates (residuals are still computed).
    pub fn unchecked(
        presentation: Presentation,
        kind: Kind,
        images: Vec<Mat>,
        base: Option<Vec<Mat>>,
        symplectic: bool,
    ) -> Result<Self> {
        if images.len() != presentation.generator_count() {
            return Err(Error::DimensionMismatch(format!(
                "{} generator images for {} generators",
                images.len(),
                presentation.generator_count()
            )));
        }
        let dim = images[0].nrows();
        if dim == 0 || images.iter().any(|m| m.shape() != (dim, dim)) {
            return Err(Error::DimensionMismatch(
                "generator images must be square of one common size".into(),
            ));
        }
        if symplectic && !dim.is_multiple_of(2) {
            return Err(Error::DimensionMismatch(format!(
                "odd dimension {dim} cannot be symplectic"
            )));
        }
        if images.iter().flat_map(|m| m.iter()).any(|x| !x.is_finite()) {
            return Err(Error::InvalidArgument("non-finite generator entry".into()));
        }
        let base = match base {
            Some(b) => {
                if b.len() != presentation.generator_count() || b.iter().any(|m| m.shape() != (2, 2)) {
                    return Err(Error::DimensionMismatch(
                        "base images must be 2x2, one per generator".into(),
                    ));
                }
                Some(Generators::new(b, true)?)
            }
            None => None,
        };
        let gens = Generators::new(images, symplectic)?;
        let relator = presentation.relator();
        let relator_res = (gens.word_value(&relator) - Mat::identity(dim, dim)).norm();
        let det = gens
            .images
            .iter()
            .map(|m| (m.determinant() - 1.0).abs())
            .fold(0.0, f64::max);
        let sp = symplectic.then(|| {
            let j = standard_omega(dim / 2);
            gens.images
                .iter()
                .map(|g| (g.transpose() * &j * g - &j).norm())
                .fold(0.0, f64::max)
        });
        Ok(Representation {
            presentation,
            dim,
            kind,
            symplectic,
            gens,
            base,
            residuals: Residuals {
                relator: relator_res,
                symplectic: sp,
                det,
            },
        })
    }

    /// Checks the stored residuals against `τ_rel`, `τ_det` and `τ_sp`.
    pub fn verify(&self) -> Result<()> {
        let t = tolerance::current();
        let r = &self.residuals;
        if !(r.relator < t.rel) {
            return Err(Error::Construction {
                what: "relator residual".into(),
                residual: r.relator,
                tolerance: t.rel,
            });
        }
        if !(r.det < t.det) {
            return Err(Error::Construction {
                what: "determinant residual".into(),
                residual: r.det,
                tolerance: t.det,
            });
        }
        if let Some(sp) = r.symplectic {
            if !(sp < t.sp) {
                return Err(Error::Construction {
                    what: "symplectic residual".into(),
                    residual: sp,
                    tolerance: t.sp,
                });
            }
        }
        Ok(())
    }

    pub fn presentation(&self) -> &Presentation {
        &self.presentation
    }

    pub fn genus(&self) -> usize {
        self.presentation.genus()
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    /// Half the dimension (rounded down).
    pub fn n(&self) -> usize {
        self.dim / 2
    }

    pub fn kind(&self) -> Kind {
        self.kind
    }

    pub fn is_symplectic(&self) -> bool {
        self.symplectic
    }

    pub fn residuals(&self) -> &Residuals {
        &self.residuals
    }

    pub fn images(&self) -> &[Mat] {
        &self.gens.images
    }

    pub fn generators(&self) -> &Generators {
        &self.gens
    }

    /// The base Fuchsian images, which fix the circle model of the boundary.
    pub fn base(&self) -> Option<&Generators> {
        self.base.as_ref()
    }

    pub fn letter_image(&self, l: Letter) -> &Mat {
        self.gens.letter_image(l)
    }

    pub fn word_value(&self, w: &Word) -> Mat {
        self.gens.word_value(w)
    }

    pub fn base_word_value(&self, w: &Word) -> Option<Mat> {
        self.base.as_ref().map(|b| b.word_value(w))
    }

    /// Inverse of a matrix in the image (symplectic formula when available).
    pub fn invert(&self, m: &Mat) -> Result<Mat> {
        invert(m, self.symplectic)
    }

    /// Largest `‖gᵀ J g - J‖_F / ‖g‖_F²` over the given matrices.
    pub fn relative_symplectic_residual(mats: &[Mat]) -> f64 {
        mats.iter()
            .map(|g| {
                let j = standard_omega(g.nrows() / 2);
                (g.transpose() * &j * g - &j).norm() / g.norm_squared().max(1.0)
            })
            .fold(0.0, f64::max)
    }
}

fn rotation(phi: f64) -> Mat {
    let (s, c) = (phi / 2.0).sin_cos();
    Mat::from_row_slice(2, 2, &[c, s, -s, c])
}

fn translation(s: f64) -> Mat {
    Mat::from_row_slice(2, 2, &[(s / 2.0).exp(), 0.0, 0.0, (-s / 2.0).exp()])
}

fn adjugate(m: &Mat) -> Mat {
    Mat::from_row_slice(2, 2, &[m[(1, 1)], -m[(0, 1)], -m[(1, 0)], m[(0, 0)]])
}

/// The regular octagon group: all eight vertices of the
/// regular hyperbolic octagon with interior angles `π/4` are identified,
/// and adjacent-pair side pairings `1→3, 2→4, 5→7, 6→8` give the standard
/// generators. Matrices act on the upper half-plane model.
pub fn fuchsian_genus2() -> Result<Representation> {
    let d = (1.0 + 2f64.sqrt()).acosh();
    let side = |j: usize| j as f64 * PI / 4.0;
    let pair = |j: usize, k: usize| rotation(side(k)) * translation(2.0 * d) * rotation(PI - side(j));
    let images = vec![
        -adjugate(&pair(0, 2)),
        -pair(1, 3),
        -adjugate(&pair(4, 6)),
        -pair(5, 7),
    ];
    let presentation = Presentation::new(2)?;
    Representation::new(
        presentation,
        Kind::FuchsianBase,
        images.clone(),
        Some(images),
        true,
    )
}

fn binomial(m: usize, j: usize) -> f64 {
    (0..j).fold(1.0, |acc, i| acc * (m - i) as f64 / (i + 1) as f64)
}

fn poly_mul(a: &[f64], b: &[f64]) -> Vec<f64> {
    let mut out = vec![0.0; a.len() + b.len() - 1];
    for (i, x) in a.iter().enumerate() {
        for (j, y) in b.iter().enumerate() {
            out[i + j] += x * y;
        }
    }
    out
}

fn poly_pow(a: &[f64], k: usize) -> Vec<f64> {
    (0..k).fold(vec![1.0], |acc, _| poly_mul(&acc, a))
}

/// Degree-`(N-1)` symmetric power of a 2x2 matrix on the monomial basis
/// `x^{N-1}, x^{N-2} y, …, y^{N-1}`: row `i` holds the coefficients of
/// `(a x + b y)^{N-1-i} (c x + d y)^i`.
pub fn sym_power_monomial(g: &Mat, big_n: usize) -> Mat {
    let m = big_n - 1;
    let mut out = Mat::zeros(big_n, big_n);
    for i in 0..big_n {
        let row = poly_mul(
            &poly_pow(&[g[(0, 0)], g[(0, 1)]], m - i),
            &poly_pow(&[g[(1, 0)], g[(1, 1)]], i),
        );
        for (j, v) in row.into_iter().enumerate() {
            out[(i, j)] = v;
        }
    }
    out
}

/// Basis data turning the monomial symmetric power into a symplectic (even
/// `N`) or orthogonally balanced (odd `N`) representation.
#[derive(Debug, Clone)]
pub struct SymPowerFrame {
    pub big_n: usize,
    /// `diag(√C(N-1, j))`: monomial coordinates to balanced coordinates, in
    /// which rotations act orthogonally.
    pub weights: Mat,
    /// Darboux basis (columns) of the invariant form in balanced
    /// coordinates; the identity for odd `N`.
    pub darboux: Mat,
    pub darboux_inverse: Mat,
    /// The invariant antisymmetric form in balanced coordinates (even `N`).
    pub form: Option<Mat>,
}

impl SymPowerFrame {
    /// Matrix taking monomial coordinates to the corrected basis.
    pub fn to_corrected(&self) -> Mat {
        &self.darboux_inverse * &self.weights
    }

    /// `S⁻¹ W η(g) W⁻¹ S`.
    pub fn lift(&self, g: &Mat) -> Mat {
        let w_inv = Mat::from_diagonal(&self.weights.diagonal().map(|x| 1.0 / x));
        self.to_corrected() * sym_power_monomial(g, self.big_n) * w_inv * &self.darboux
    }
}

fn balanced(g: &Mat, weights: &Mat) -> Mat {
    let w_inv = Mat::from_diagonal(&weights.diagonal().map(|x| 1.0 / x));
    weights * sym_power_monomial(g, weights.nrows()) * w_inv
}

/// Solves `η(h)ᵀ X η(h) = X` for antisymmetric `X` over three fixed
/// generic elements of `SL(2, R)`, normalizes `‖X‖_F² = N` with
/// `(-1)^{n+1} X[0, N-1] > 0`, and builds a Darboux basis by symplectic
/// Gram-Schmidt over the standard basis.
pub fn sym_power_frame(big_n: usize) -> Result<SymPowerFrame> {
    if big_n < 2 {
        return Err(Error::InvalidArgument(format!(
            "symmetric power dimension must be at least 2, got {big_n}"
        )));
    }
    let weights = Mat::from_diagonal(&nalgebra::DVector::from_iterator(
        big_n,
        (0..big_n).map(|j| binomial(big_n - 1, j).sqrt()),
    ));
    if big_n % 2 == 1 {
        return Ok(SymPowerFrame {
            big_n,
            weights,
            darboux: Mat::identity(big_n, big_n),
            darboux_inverse: Mat::identity(big_n, big_n),
            form: None,
        });
    }
    let n = big_n / 2;
    let samples = [
        rotation(1.4),
        translation(2.0 * 1.3f64.ln()),
        Mat::from_row_slice(2, 2, &[1.0, 0.4, 0.0, 1.0]),
    ];
    let mats: Vec<Mat> = samples.iter().map(|h| balanced(h, &weights)).collect();
    let pairs: Vec<(usize, usize)> = (0..big_n)
        .flat_map(|a| ((a + 1)..big_n).map(move |b| (a, b)))
        .collect();
    let mut system = Mat::zeros(mats.len() * big_n * big_n, pairs.len());
    for (col, &(a, b)) in pairs.iter().enumerate() {
        let mut e = Mat::zeros(big_n, big_n);
        e[(a, b)] = 1.0;
        e[(b, a)] = -1.0;
        for (s, h) in mats.iter().enumerate() {
            let r = h.transpose() * &e * h - &e;
            for (k, v) in r.iter().enumerate() {
                system[(s * big_n * big_n + k, col)] = *v;
            }
        }
    }
    let (null, sigmas) = linalg::null_vectors(&system, 1);
    let scale = sigmas.iter().copied().fold(1.0, f64::max);
    let residual = sigmas.last().copied().unwrap_or(0.0) / scale;
    let tol = tolerance::current().sp;
    if !(residual < tol) {
        return Err(Error::Construction {
            what: "invariant symplectic form".into(),
            residual,
            tolerance: tol,
        });
    }
    let sv = linalg::singular_values(&system);
    if sv.len() >= 2 && sv[sv.len() - 2] / scale < 1e3 * tol {
        return Err(Error::Construction {
            what: "invariant symplectic form is not unique".into(),
            residual: sv[sv.len() - 2] / scale,
            tolerance: 1e3 * tol,
        });
    }
    let mut x = Mat::zeros(big_n, big_n);
    for (col, &(a, b)) in pairs.iter().enumerate() {
        x[(a, b)] = null[(col, 0)];
        x[(b, a)] = -null[(col, 0)];
    }
    x *= (big_n as f64).sqrt() / x.norm();
    let parity = if n % 2 == 1 { 1.0 } else { -1.0 };
    if parity * x[(0, big_n - 1)] < 0.0 {
        x = -x;
    }
    let darboux = darboux_basis(&x)?;
    let darboux_inverse = darboux
        .clone()
        .try_inverse()
        .ok_or_else(|| Error::Degenerate("Darboux basis is singular".into()))?;
    let j = standard_omega(n);
    let residual = (darboux.transpose() * &x * &darboux - &j).amax();
    if !(residual < tol) {
        return Err(Error::Construction {
            what: "Darboux basis".into(),
            residual,
            tolerance: tol,
        });
    }
    Ok(SymPowerFrame {
        big_n,
        weights,
        darboux,
        darboux_inverse,
        form: Some(x),
    })
}

/// Columns `e_1, …, e_n, f_1, …, f_n` with `eᵢᵀ X fⱼ = δᵢⱼ` and all other
/// pairings zero.
fn darboux_basis(x: &Mat) -> Result<Mat> {
    let big_n = x.nrows();
    let n = big_n / 2;
    let omega = |v: &nalgebra::DVector<f64>, w: &nalgebra::DVector<f64>| v.dot(&(x * w));
    let project = |mut v: nalgebra::DVector<f64>, es: &[nalgebra::DVector<f64>], fs: &[nalgebra::DVector<f64>]| {
        for (e, f) in es.iter().zip(fs) {
            let (vf, ve) = (omega(&v, f), omega(&v, e));
            v = v - e * vf + f * ve;
        }
        v
    };
    let mut es = Vec::new();
    let mut fs = Vec::new();
    for i in 0..big_n {
        if es.len() == n {
            break;
        }
        let mut v = nalgebra::DVector::zeros(big_n);
        v[i] = 1.0;
        let v = project(v, &es, &fs);
        if v.norm() < 1e-8 {
            continue;
        }
        let e = &v / v.norm();
        let w = project(x.transpose() * &e, &es, &fs);
        let pairing = omega(&e, &w);
        if pairing.abs() < 1e-8 {
            continue;
        }
        fs.push(w / pairing);
        es.push(e);
    }
    if es.len() != n {
        return Err(Error::Construction {
            what: "Darboux basis".into(),
            residual: 1.0,
            tolerance: 0.0,
        });
    }
    let cols: Vec<_> = es.into_iter().chain(fs).collect();
    Ok(Mat::from_columns(&cols))
}

/// The irreducible `N`-dimensional lift of a representation into
/// `SL(2, R)`; for even `N` it lands in `Sp(N, R)` for the standard form.
pub fn sym_power_lift(rho0: &Representation, big_n: usize) -> Result<Representation> {
    if rho0.dim() != 2 {
        return Err(Error::InvalidArgument(
            "symmetric power lift needs a representation into SL(2, R)".into(),
        ));
    }
    if big_n < 2 {
        return Err(Error::InvalidArgument(format!(
            "symmetric power dimension must be at least 2, got {big_n}"
        )));
    }
    let base = rho0.base().map(|b| b.images().to_vec());
    if big_n == 2 {
        return Representation::new(
            *rho0.presentation(),
            Kind::SymPower,
            rho0.images().to_vec(),
            base,
            true,
        );
    }
    let frame = sym_power_frame(big_n)?;
    let images = rho0.images().iter().map(|g| frame.lift(g)).collect();
    Representation::new(
        *rho0.presentation(),
        Kind::SymPower,
        images,
        base,
        big_n.is_multiple_of(2),
    )
}

/// Block-diagonal sum. Two symplectic factors are interleaved so the sum
/// preserves the standard form: the first factor occupies coordinates
/// `0..p` and `n..n+p`, the second the remaining ones.
pub fn direct_sum(a: &Representation, b: &Representation) -> Result<Representation> {
    if a.presentation() != b.presentation() {
        return Err(Error::InvalidArgument(
            "direct sum needs representations of the same group".into(),
        ));
    }
    let symplectic = a.is_symplectic() && b.is_symplectic();
    let dim = a.dim() + b.dim();
    let (index_a, index_b): (Vec<usize>, Vec<usize>) = if symplectic {
        let (p, q, n) = (a.n(), b.n(), dim / 2);
        (
            (0..p).chain(n..n + p).collect(),
            (p..p + q).chain(n + p..n + p + q).collect(),
        )
    } else {
        ((0..a.dim()).collect(), (a.dim()..dim).collect())
    };
    let images = a
        .images()
        .iter()
        .zip(b.images())
        .map(|(ga, gb)| {
            let mut m = Mat::zeros(dim, dim);
            for (i, &ri) in index_a.iter().enumerate() {
                for (j, &cj) in index_a.iter().enumerate() {
                    m[(ri, cj)] = ga[(i, j)];
                }
            }
            for (i, &ri) in index_b.iter().enumerate() {
                for (j, &cj) in index_b.iter().enumerate() {
                    m[(ri, cj)] = gb[(i, j)];
                }
            }
            m
        })
        .collect();
    let base = a.base().or(b.base()).map(|g| g.images().to_vec());
    Representation::new(*a.presentation(), Kind::DirectSum, images, base, symplectic)
}

/// Dominant eigenvector of `m` by normalized power iteration.
fn dominant_vector(m: &Mat) -> nalgebra::DVector<f64> {
    let d = m.nrows();
    let mut v = nalgebra::DVector::from_iterator(d, (0..d).map(|i| 1.0 + 0.1 * i as f64));
    v /= v.norm();
    for _ in 0..2000 {
        let mut w = m * &v;
        w /= w.norm();
        if w.dot(&v) < 0.0 {
            w = -w;
        }
        let change = (&w - &v).norm();
        v = w;
        if change < 1e-15 {
            break;
        }
    }
    v
}

fn spectral_projector(m: &Mat) -> Mat {
    let r = dominant_vector(m);
    let l = dominant_vector(&m.transpose());
    (&r * l.transpose()) / l.dot(&r)
}

/// Conjugates `a_1`, `b_1` by `c(t) = exp(t (P_top - P_bottom))`, where the
/// projectors are the spectral projectors onto the top and bottom
/// eigenlines of `ρ([a_1, b_1])`. `c(t)` commutes with `ρ([a_1, b_1])`, so
/// the relator still holds.
pub fn bend(rep: &Representation, curve: &Word, t: f64) -> Result<Representation> {
    let expected: Word = "a1 b1 A1 B1".parse()?;
    if rep.genus() != 2 || *curve != expected {
        return Err(Error::InvalidArgument(format!(
            "bending is implemented along a1 b1 A1 B1 in genus 2, got {curve}"
        )));
    }
    if !t.is_finite() {
        return Err(Error::InvalidArgument("bending parameter must be finite".into()));
    }
    let c = rep.word_value(curve);
    let c_inv = rep.word_value(&curve.inverse());
    let moduli = linalg::eigenvalue_moduli(&c);
    let d = moduli.len();
    let gap_tol = tolerance::current().gap;
    let top_gap = 1.0 - moduli[1] / moduli[0];
    let bottom_gap = 1.0 - moduli[d - 1] / moduli[d - 2];
    if top_gap < gap_tol || bottom_gap < gap_tol {
        return Err(Error::Precondition(format!(
            "curve image has no simple extreme eigenvalues (gaps {top_gap:.3e}, {bottom_gap:.3e}); no one-parameter centralizer found"
        )));
    }
    let p_top = spectral_projector(&c);
    let p_bottom = spectral_projector(&c_inv);
    let id = Mat::identity(d, d);
    let conj = |s: f64| &id + &p_top * (s.exp() - 1.0) + &p_bottom * ((-s).exp() - 1.0);
    let (ct, ct_inv) = (conj(t), conj(-t));
    let mut images = rep.images().to_vec();
    for g in images.iter_mut().take(2) {
        *g = &ct * &*g * &ct_inv;
    }
    let base = rep.base().map(|b| b.images().to_vec());
    Representation::new(*rep.presentation(), Kind::Bent, images, base, rep.is_symplectic())
}

const FILE_VERSION: u32 = 1;

#[derive(Debug, Serialize, Deserialize)]
struct RepFile {
    version: u32,
    n: usize,
    dim: usize,
    genus: usize,
    kind: Kind,
    symplectic: bool,
    generators: Vec<Vec<f64>>,
    relator: String,
    residuals: Residuals,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    base_generators: Option<Vec<Vec<f64>>>,
}

fn row_major(m: &Mat) -> Vec<f64> {
    (0..m.nrows())
        .flat_map(|i| (0..m.ncols()).map(move |j| m[(i, j)]))
        .collect()
}

fn from_row_major(data: &[f64], dim: usize) -> Result<Mat> {
    if data.len() != dim * dim {
        return Err(Error::Format(format!(
            "generator has {} entries, expected {}",
            data.len(),
            dim * dim
        )));
    }
    Ok(Mat::from_row_slice(dim, dim, data))
}

impl Representation {
    pub fn to_json(&self) -> Result<String> {
        let file = RepFile {
            version: FILE_VERSION,
            n: self.n(),
            dim: self.dim,
            genus: self.genus(),
            kind: self.kind,
            symplectic: self.symplectic,
            generators: self.images().iter().map(row_major).collect(),
            relator: self.presentation.relator().to_string(),
            residuals: self.residuals,
            base_generators: self.base().map(|b| b.images().iter().map(row_major).collect()),
        };
        Ok(serde_json::to_string_pretty(&file)?)
    }

    /// Parses a representation file, recomputes every residual and applies
    /// the construction gates.
    pub fn from_json(text: &str) -> Result<Self> {
        let file: RepFile = serde_json::from_str(text)?;
        if file.version != FILE_VERSION {
            return Err(Error::Format(format!("unsupported version {}", file.version)));
        }
        let presentation = Presentation::new(file.genus)?;
        if file.relator.parse::<Word>()? != presentation.relator() {
            return Err(Error::Format(format!(
                "relator `{}` is not the standard genus-{} relator",
                file.relator, file.genus
            )));
        }
        if file.n != file.dim / 2 {
            return Err(Error::Format(format!(
                "n = {} does not match dimension {}",
                file.n, file.dim
            )));
        }
        let images = file
            .generators
            .iter()
            .map(|g| from_row_major(g, file.dim))
            .collect::<Result<Vec<_>>>()?;
        let base = file
            .base_generators
            .map(|b| b.iter().map(|g| from_row_major(g, 2)).collect::<Result<Vec<_>>>())
            .transpose()?;
        Representation::new(presentation, file.kind, images, base, file.symplectic)
    }

    pub fn save(&self, path: &Path) -> Result<()> {
        std::fs::write(path, self.to_json()?)?;
        Ok(())
    }

    pub fn load(path: &Path) -> Result<Self> {
        Representation::from_json(&std::fs::read_to_string(path)?)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn fuchsian_generators_are_hyperbolic_and_satisfy_relator() {
        let rho0 = fuchsian_genus2().unwrap();
        assert!(rho0.residuals().relator < 1e-9);
        for g in rho0.images() {
            assert!(g.trace().abs() > 2.0);
            assert!((g.determinant() - 1.0).abs() < 1e-12);
        }
    }

    #[test]
    fn monomial_symmetric_power_examples() {
        let u = Mat::from_row_slice(2, 2, &[1.0, 1.0, 0.0, 1.0]);
        let e = sym_power_monomial(&u, 4);
        let row: Vec<f64> = e.row(0).iter().copied().collect();
        assert_eq!(row, vec![1.0, 3.0, 3.0, 1.0]);
        for i in 0..4 {
            for j in 0..i {
                assert_eq!(e[(i, j)], 0.0);
            }
        }
        let a = 1.7;
        let d = sym_power_monomial(&Mat::from_row_slice(2, 2, &[a, 0.0, 0.0, 1.0 / a]), 4);
        let expect = [a.powi(3), a, 1.0 / a, a.powi(-3)];
        for i in 0..4 {
            for j in 0..4 {
                let target = if i == j { expect[i] } else { 0.0 };
                assert!((d[(i, j)] - target).abs() < 1e-14);
            }
        }
    }

    #[test]
    fn frame_is_symplectic_for_even_dimensions() {
        for big_n in [2, 4, 6] {
            let f = sym_power_frame(big_n).unwrap();
            let j = standard_omega(big_n / 2);
            let x = f.form.unwrap();
            assert!((f.darboux.transpose() * &x * &f.darboux - &j).amax() < 1e-12);
        }
    }

    #[test]
    fn lift_of_two_is_identity_construction() {
        let rho0 = fuchsian_genus2().unwrap();
        let l = sym_power_lift(&rho0, 2).unwrap();
        for (a, b) in l.images().iter().zip(rho0.images()) {
            assert_eq!(a, b);
        }
    }

    #[test]
    fn direct_sum_rejects_mismatched_groups() {
        let rho0 = fuchsian_genus2().unwrap();
        let p3 = Presentation::new(3).unwrap();
        let mut images = rho0.images().to_vec();
        images.extend(rho0.images()[..2].iter().cloned());
        let other = Representation::unchecked(p3, Kind::FuchsianBase, images, None, true).unwrap();
        assert!(direct_sum(&rho0, &other).is_err());
    }

    #[test]
    fn json_round_trip_recomputes_residuals() {
        let rho = sym_power_lift(&fuchsian_genus2().unwrap(), 4).unwrap();
        let text = rho.to_json().unwrap();
        let back = Representation::from_json(&text).unwrap();
        assert_eq!(back.kind(), Kind::SymPower);
        assert!((back.residuals().relator - rho.residuals().relator).abs() < 1e-12);
        let tampered = text.replacen("\"genus\": 2", "\"genus\": 3", 1);
        assert!(Representation::from_json(&tampered).is_err());
    }
}
