use thiserror::Error;

/// Errors reported by the bound toolbox.
#[derive(Debug, Error)]
pub enum Error {
    #[error("channel parse error: {0}")]
    Parse(String),

    #[error("kernel entry w[{x1}][{x2}][{y}] = {value} is outside [0, 1]")]
    BadEntry {
        x1: usize,
        x2: usize,
        y: usize,
        value: f64,
    },

    #[error("kernel row (x1={x1}, x2={x2}) sums to {sum:.12}, expected 1 within 1e-9")]
    RowSum { x1: usize, x2: usize, sum: f64 },

    #[error("dimension mismatch: {0}")]
    DimensionMismatch(String),

    #[error("invalid distribution: {0}")]
    InvalidDistribution(String),

    #[error("invalid parameter: {0}")]
    InvalidParameter(String),

    #[error(
        "tail target {target:.6} exceeds 1: epsilon(1 + 2 beta) is infeasible for {component}; \
         use a larger n or switch tail mode"
    )]
    InfeasibleTarget { component: &'static str, target: f64 },

    #[error("{what} guard exceeded: {actual:.3e} > {guard:.3e}")]
    GuardExceeded {
        what: &'static str,
        actual: f64,
        guard: f64,
    },

    #[error("variance must be positive for the Berry-Esseen path (got {0})")]
    ZeroVariance(f64),

    #[error("io error: {0}")]
    Io(#[from] std::io::Error),
}

pub type Result<T> = std::result::Result<T, Error>;
