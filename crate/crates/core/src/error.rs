use alloc::string::String;

/// Errors raised by the numerical core.
#[allow(missing_docs)]
#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum Error {
    #[error("grid size {0} must be a power of two and at least 16")]
    InvalidGridSize(usize),
    #[error("half length must be positive and finite, got {0}")]
    InvalidHalfLength(f64),
    #[error("field has {got} values but the grid has {expected} nodes")]
    LengthMismatch { expected: usize, got: usize },
    #[error("field contains a non-finite value at node {0}")]
    NonFiniteValue(usize),
    #[error("derivative order {0} is not one of 1, 2, 3")]
    InvalidDerivativeOrder(u32),
    #[error("fields are defined on different grids")]
    GridMismatch,
    #[error("datum support [{lo}, {hi}] plus 4 mollification widths leaves the domain [-{half_length}, {half_length})")]
    SupportTooClose { lo: f64, hi: f64, half_length: f64 },
    #[error("invalid parameter: {0}")]
    InvalidParameter(String),
    #[error("non-finite value in the `{term}` term at t = {time}")]
    Overflow { term: &'static str, time: f64 },
    #[error("solution blew up at t = {time}")]
    BlowUp { time: f64 },
    #[error("coefficients are not energy preserving (A - B + C = 0, B + 2C = 0, D = 0 required)")]
    NotEnergyPreserving,
    #[error("g(X0) > 0: no real root of g, the two-root certificate fails")]
    CertificateFailed,
    #[error("bracket expansion exceeded {0} iterations without a sign change")]
    BracketExpansion(usize),
    #[error("advection coefficient A must be nonzero")]
    DegenerateTransport,
    #[error("test function support is not inside the space-time window")]
    SupportViolation,
    #[error("test function must be nonnegative")]
    SignViolation,
    #[error("window [{t_start}, {t_end}] is not covered by common snapshots")]
    WindowNotCovered { t_start: f64, t_end: f64 },
    #[error("need at least {needed} successful rows, got {got}")]
    TooFewRows { needed: usize, got: usize },
    #[error("L^p exponent {0} is outside [1, 4)")]
    InvalidExponent(f64),
}

/// Result alias for the core crate.
pub type Result<T, E = Error> = core::result::Result<T, E>;
