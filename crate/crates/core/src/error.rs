use thiserror::Error;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    #[error("domain error: {0}")]
    Domain(String),

    #[error("invalid operator parameters: {0}")]
    InvalidParams(String),

    #[error("Bezier exponent must satisfy alpha >= 1, got {0}")]
    Alpha(f64),

    #[error("series truncation failed: tail mass {residual:e} still above tolerance at k_max = {k_max}")]
    Truncation { k_max: u64, residual: f64 },

    #[error("function of growth order {growth} is not integrable against the kernel (needs growth < {limit})")]
    Integrability { growth: f64, limit: f64 },

    #[error("moment order {0} is not supported")]
    UnsupportedOrder(usize),

    #[error("asymptotic bound requested below its threshold: n = {n} < n0 = {n0}")]
    NotAsymptotic { n: u64, n0: u64 },

    #[error("function `{function}` lacks the `{required}` class")]
    ClassMismatch { function: String, required: &'static str },

    #[error("function `{function}` has no {what}")]
    MissingMetadata { function: String, what: String },

    #[error("empty or invalid window [{0}, {1}]")]
    EmptyWindow(f64, f64),

    #[error("inconsistent variation profile: {0}")]
    InconsistentProfile(String),

    #[error("degenerate convergence fit: {0}")]
    DegenerateFit(String),

    #[error("catalogue error: {0}")]
    Catalogue(String),

    #[error("unknown test function `{0}`")]
    UnknownFunction(String),

    #[error("invalid numerical setting: {0}")]
    Setting(String),
}

pub type Result<T> = std::result::Result<T, Error>;
