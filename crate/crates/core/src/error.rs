use thiserror::Error;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    #[error("invalid parameter: {0}")]
    InvalidParameter(String),
    #[error("non-finite input: {0}")]
    Domain(String),
    #[error("degenerate input: {0}")]
    Degenerate(String),
    #[error("unsupported: {0}")]
    Unsupported(String),
    #[error("step size underflow at t = {t}")]
    StepUnderflow { t: f64 },
    #[error("solution left the finite range at t = {t}")]
    NonFinite { t: f64 },
    #[error("trajectory escaped at parameter {at}")]
    Escape { at: f64 },
    #[error("no decaying branch at s_max (Re kappa = {re_kappa:e})")]
    NoDecay { re_kappa: f64 },
    #[error("ray alpha = {alpha} lies within the collar of a Stokes asymptote")]
    BoundaryIndeterminate { alpha: f64 },
    #[error("contour passes within {distance:e} of a branch point")]
    BranchPoint { distance: f64 },
    #[error("classification mismatch: analytic {analytic}, numeric {numeric}")]
    ClassificationMismatch { analytic: String, numeric: String },
    #[error("ray is not in a discrete sector: {0}")]
    NotDiscrete(String),
    #[error("level count dropped by an odd number between g = {g_hi} and g = {g_lo}")]
    GridTooCoarse { g_hi: f64, g_lo: f64 },
    #[error("bracket precondition failed: {0}")]
    Bracket(String),
    #[error("root-count predicate is not monotone over the bracket: {0}")]
    NonMonotone(String),
    #[error("failed to converge: {0}")]
    NoConvergence(String),
}

pub type Result<T> = std::result::Result<T, Error>;
