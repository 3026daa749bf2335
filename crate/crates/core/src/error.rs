use thiserror::Error;

/// Errors raised by the simulator library.
#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    #[error("invalid parameter `{name}`: {reason}")]
    InvalidParameter { name: &'static str, reason: String },

    #[error("radius must be positive, got {0}")]
    NonPositiveRadius(f64),

    #[error("unsupported cutoff derivative order {0} (max 2)")]
    DerivativeOrder(usize),

    #[error("grid has {nodes} nodes, at least {needed} required")]
    GridTooSmall { nodes: usize, needed: usize },

    #[error("fields live on different grids")]
    GridMismatch,

    #[error("operation requires an even-parity field")]
    ParityMismatch,

    #[error("Sobolev index {0} out of range 0..=4")]
    SobolevIndex(usize),

    #[error("non-finite integrand sample at y = {0}")]
    NonFiniteIntegrand(f64),

    #[error("boundary condition violated: u(t, 0) = {value}, expected pi")]
    BoundaryViolation { value: f64 },

    #[error("residual region r < {requested} exceeds the cutoff-free zone r < 1/2")]
    RegionViolation { requested: f64 },

    #[error("time window has {got} levels, {needed} required")]
    InsufficientTimeLevels { needed: usize, got: usize },

    #[error("time window levels are not uniformly spaced")]
    NonUniformWindow,

    #[error("time step {dt} exceeds the CFL limit {limit}")]
    CflViolation { dt: f64, limit: f64 },

    #[error("non-finite value encountered: {0}")]
    NonFinite(String),

    #[error("config error: {0}")]
    Config(String),

    #[error("i/o error on {path}: {message}")]
    Io { path: String, message: String },
}

pub type Result<T> = std::result::Result<T, Error>;

impl Error {
    pub(crate) fn param(name: &'static str, reason: impl Into<String>) -> Self {
        Error::InvalidParameter {
            name,
            reason: reason.into(),
        }
    }

    pub(crate) fn io(path: &std::path::Path, err: std::io::Error) -> Self {
        Error::Io {
            path: path.display().to_string(),
            message: err.to_string(),
        }
    }
}
