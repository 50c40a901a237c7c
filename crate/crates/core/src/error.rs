use thiserror::Error;

/// Errors raised by the spectral solver.
#[derive(Debug, Error)]
pub enum Error {
    /// Inconsistent or out-of-range configuration (grid/order mismatch, bad kernel parameters).
    #[error("configuration error: {0}")]
    Config(String),

    /// An argument violates an operation precondition.
    #[error("invalid argument: {0}")]
    Argument(String),

    /// Moments describe no physical gas (non-positive density or temperature).
    #[error("non-physical state: {0}")]
    NonPhysical(String),

    /// The Maxwellian carries non-negligible mass at the box boundary.
    #[error("support violation: boundary mass {boundary_mass:e} exceeds {limit:e}")]
    SupportViolation { boundary_mass: f64, limit: f64 },

    /// Kernel quadrature failed the node-doubling refinement check.
    #[error(
        "kernel quadrature not converged at l={l:?}, m={m:?}: discrepancy {discrepancy:e} > {tolerance:e}"
    )]
    Quadrature {
        l: Vec<i64>,
        m: Vec<i64>,
        discrepancy: f64,
        tolerance: f64,
    },

    /// A collision evaluation produced non-finite coefficients.
    #[error("non-finite collision output")]
    Overflow,

    /// Time integration produced a non-finite state.
    #[error("solution blew up at t = {t}")]
    BlowUp { t: f64 },

    /// A cache file exists but belongs to another configuration.
    #[error("kernel cache invalid: {0}")]
    CacheInvalid(String),

    /// A cache file is truncated or corrupted.
    #[error("kernel cache format error: {0}")]
    Format(String),

    #[error(transparent)]
    Io(#[from] std::io::Error),
}

pub type Result<T> = std::result::Result<T, Error>;
