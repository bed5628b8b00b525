use thiserror::Error;

/// Errors raised by the numerical core.
#[derive(Error, Debug, Clone, PartialEq)]
pub enum LandauError {
    #[error("soft potential range requires -3 < gamma < 0, got {0}")]
    GammaOutOfRange(f64),

    #[error("invalid grid: {0}")]
    InvalidGrid(String),

    #[error("kernel evaluated at the singular point v = 0")]
    SingularPoint,

    #[error("fields live on different grids")]
    GridMismatch,

    #[error("quadrature did not converge: entry changed by {change:.3e} (rtol {rtol:.1e}) at |v| = {radius:.4}")]
    QuadratureNonConvergence { change: f64, rtol: f64, radius: f64 },

    #[error("quadrature order too low: {0}")]
    QuadratureOrder(String),

    #[error("c2 cross-check failed: relative L2 difference {rel:.3e} exceeds {tol:.3e}")]
    CrossCheck { rel: f64, tol: f64 },

    #[error("non-finite value produced by {0}")]
    NonFinite(&'static str),

    #[error("unsupported source derivative order {order} (max {max})")]
    UnsupportedOrder { order: usize, max: usize },

    #[error("instability: ||f|| grew from {before:.3e} to {after:.3e} in one step at t = {t:.4e}")]
    Instability { before: f64, after: f64, t: f64 },

    #[error("ladder overflow at depth {depth}: norm {norm:.3e}")]
    LadderOverflow { depth: usize, norm: f64 },

    #[error("degenerate denominator {value:.3e} in {context}")]
    Degenerate { context: String, value: f64 },

    #[error("fit degenerate: a_{k} = 0 (exact-solution special case)")]
    FitDegenerate { k: usize },

    #[error("invalid argument: {0}")]
    InvalidArgument(String),

    #[error("format error: {0}")]
    Format(String),

    #[error("io error: {0}")]
    Io(String),
}

impl From<std::io::Error> for LandauError {
    fn from(e: std::io::Error) -> Self {
        LandauError::Io(e.to_string())
    }
}

pub type Result<T> = std::result::Result<T, LandauError>;
