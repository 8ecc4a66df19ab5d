use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    #[error("invalid argument: {0}")]
    InvalidArgument(String),

    #[error("degenerate input: {0}")]
    Degenerate(String),

    #[error("dimension mismatch: {0}")]
    DimensionMismatch(String),

    /// `dim A + dim B` exceeds the ambient dimension, so a transversality or
    /// directness question is ill-posed.
    #[error("ill-posed: total dimension {total} exceeds ambient dimension {ambient}")]
    DimensionOverflow { total: usize, ambient: usize },

    #[error("subspace is not Lagrangian (isotropy residual {residual:.3e}, dim {dim})")]
    NotLagrangian { residual: f64, dim: usize },

    #[error("subspaces are not transverse (margin {margin:.3e})")]
    NotTransverse { margin: f64 },

    #[error("chart domain error: R is not transverse to Q (margin {margin:.3e})")]
    ChartDomain { margin: f64 },

    #[error("linear map is not symmetric (residual {residual:.3e})")]
    NotSymmetric { residual: f64 },

    #[error("subspace is not contained in the Lagrangian (distance {distance:.3e})")]
    NotContained { distance: f64 },

    #[error("degenerate quadruple: wedge {which} vanishes ({value:.3e})")]
    DegenerateQuadruple { which: &'static str, value: f64 },

    #[error("word is not freely reduced at position {position}")]
    NotReduced { position: usize },

    #[error("unknown letter `{0}`")]
    UnknownLetter(String),

    #[error("ambiguous ball element at depth {depth}: distance {distance:.3e} lies between the identity and dedup tolerances")]
    AmbiguousElement { depth: usize, distance: f64 },

    #[error("construction failed: {what} (residual {residual:.3e}, tolerance {tolerance:.1e})")]
    Construction { what: String, residual: f64, tolerance: f64 },

    #[error("no attracting fixed point: relative eigenvalue-modulus gap {gap:.3e} at k = {k}")]
    NoAttractingPoint { k: usize, gap: f64 },

    #[error("flag quality: {0}")]
    FlagQuality(String),

    #[error("precondition failed: {0}")]
    Precondition(String),

    #[error("i/o: {0}")]
    Io(String),

    #[error("format: {0}")]
    Format(String),
}

impl From<std::io::Error> for Error {
    fn from(e: std::io::Error) -> Self {
        Error::Io(e.to_string())
    }
}

impl From<serde_json::Error> for Error {
    fn from(e: serde_json::Error) -> Self {
        Error::Format(e.to_string())
    }
}

impl Error {
    /// Stable snake_case name of the variant, for machine-readable output.
    pub fn kind(&self) -> &'static str {
        match self {
            Error::InvalidArgument(_) => "invalid_argument",
            Error::Degenerate(_) => "degenerate",
            Error::DimensionMismatch(_) => "dimension_mismatch",
            Error::DimensionOverflow { .. } => "dimension_overflow",
            Error::NotLagrangian { .. } => "not_lagrangian",
            Error::NotTransverse { .. } => "not_transverse",
            Error::ChartDomain { .. } => "chart_domain",
            Error::NotSymmetric { .. } => "not_symmetric",
            Error::NotContained { .. } => "not_contained",
            Error::DegenerateQuadruple { .. } => "degenerate_quadruple",
            Error::NotReduced { .. } => "not_reduced",
            Error::UnknownLetter(_) => "unknown_letter",
            Error::AmbiguousElement { .. } => "ambiguous_element",
            Error::Construction { .. } => "construction",
            Error::NoAttractingPoint { .. } => "no_attracting_point",
            Error::FlagQuality(_) => "flag_quality",
            Error::Precondition(_) => "precondition",
            Error::Io(_) => "io",
            Error::Format(_) => "format",
        }
    }
}
