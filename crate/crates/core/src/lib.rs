//! Numerical toolkit for symplectic linear algebra and Anosov diagnostics
//! of surface group representations into `Sp(2n, R)` and `SL(N, R)`.

// `!(x < tol)` comparisons are deliberate: a NaN residual must fail.
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod charts;
pub mod diagnostics;
pub mod error;
pub mod flags;
pub mod group;
pub mod linalg;
pub mod rep;
pub mod symplectic;
pub mod tolerance;

pub use error::{Error, Result};
