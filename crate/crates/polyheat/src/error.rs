use thiserror::Error;

/// Errors produced by profile construction, estimation and solving.
#[derive(Debug, Error)]
pub enum Error {
    #[error("invalid parameter: {0}")]
    InvalidParameter(String),
    #[error("quadrature did not converge: successive refinements differ by {delta:e} (tol {tol:e})")]
    QuadratureNonConvergence { delta: f64, tol: f64 },
    #[error("dimension {0} unsupported by the shipped quadrature (N <= 3)")]
    UnsupportedDimension(usize),
    #[error("time must be positive, got {0}")]
    NonPositiveTime(f64),
    #[error("box too small: estimated tail mass {tail:e} exceeds {limit:e}")]
    BoxTooSmall { tail: f64, limit: f64 },
    #[error("grid convolution and closed semigroup reduction differ by {0:e}")]
    SemigroupMismatch(f64),
    #[error("constant estimate grows without saturation: {0:?}")]
    EstimateDiverging(Vec<f64>),
    #[error("initial data is flagged non-sigma-finite; ball masses are undefined")]
    NonSigmaFinite,
    #[error("need at least 4 dyadic scales, got {0}")]
    InsufficientSigmas(usize),
    #[error("criterion requires {expected}, got p = {got}")]
    WrongRegime { expected: &'static str, got: f64 },
    #[error("alpha must satisfy 1 < alpha < p, got {0}")]
    AlphaOutOfRange(f64),
    #[error("pointwise evaluation unavailable for atomic initial data")]
    PointwiseUnavailable,
    #[error("all sampled ball masses are zero")]
    DegenerateMeasure,
    #[error("weight function U vanishes identically")]
    WeightDegenerate,
    #[error("contraction condition fails (nu = {nu}); pass force to iterate anyway")]
    NoContraction { nu: f64 },
    #[error("increment norm increased for {0} consecutive iterations")]
    IterationDiverged(usize),
    #[error("NaN detected at iteration {0}")]
    NaNDetected(usize),
    #[error("rescaled argument leaves the box and the field is not negligible there")]
    OutOfBox,
    #[error("cutoff support leaves the solver box for R = {0}")]
    SupportMismatch(f64),
    #[error("cache file rejected: {0}")]
    CacheFormat(String),
    #[error("config error: {0}")]
    Config(String),
    #[error(transparent)]
    Io(#[from] std::io::Error),
}

pub type Result<T> = std::result::Result<T, Error>;

impl Error {
    /// Process exit code buckets used by the command-line front end.
    pub fn exit_code(&self) -> i32 {
        match self {
            Error::InvalidParameter(_)
            | Error::UnsupportedDimension(_)
            | Error::NonPositiveTime(_)
            | Error::NonSigmaFinite
            | Error::InsufficientSigmas(_)
            | Error::WrongRegime { .. }
            | Error::AlphaOutOfRange(_)
            | Error::PointwiseUnavailable
            | Error::Config(_) => 2,
            Error::NoContraction { .. } => 4,
            _ => 3,
        }
    }

    /// Single-line machine-parsable category, stable across releases.
    pub fn category(&self) -> &'static str {
        match self {
            Error::InvalidParameter(_) => "invalid-parameter",
            Error::QuadratureNonConvergence { .. } => "quadrature-non-convergence",
            Error::UnsupportedDimension(_) => "unsupported-dimension",
            Error::NonPositiveTime(_) => "non-positive-time",
            Error::BoxTooSmall { .. } => "box-too-small",
            Error::SemigroupMismatch(_) => "semigroup-mismatch",
            Error::EstimateDiverging(_) => "estimate-diverging",
            Error::NonSigmaFinite => "non-sigma-finite",
            Error::InsufficientSigmas(_) => "insufficient-sigmas",
            Error::WrongRegime { .. } => "wrong-regime",
            Error::AlphaOutOfRange(_) => "alpha-out-of-range",
            Error::PointwiseUnavailable => "pointwise-unavailable",
            Error::DegenerateMeasure => "degenerate-measure",
            Error::WeightDegenerate => "weight-degenerate",
            Error::NoContraction { .. } => "no-contraction",
            Error::IterationDiverged(_) => "iteration-diverged",
            Error::NaNDetected(_) => "nan-detected",
            Error::OutOfBox => "out-of-box",
            Error::SupportMismatch(_) => "support-mismatch",
            Error::CacheFormat(_) => "cache-format",
            Error::Config(_) => "config",
            Error::Io(_) => "io",
        }
    }
}
