use thiserror::Error;

/// Crate-wide error type.
#[derive(Debug, Error)]
pub enum Error {
    /// Configuration rejected; names the offending key.
    #[error("invalid config value for `{key}`: {message}")]
    Config { key: String, message: String },

    /// Sample vector length does not match the grid.
    #[error("length mismatch: expected {expected}, got {got}")]
    ShapeMismatch { expected: usize, got: usize },

    /// The elliptic problem degenerates when the gap closes.
    #[error("membrane gap {min_gap:.3e} below touchdown threshold at t = {t:.6e}")]
    NearTouchdown { min_gap: f64, t: f64 },

    /// Linear solve did not reach the requested residual.
    #[error("linear solver failed at t = {t:.6e}: {message}")]
    SolverFailure { message: String, t: f64 },

    /// Zero pivot in the banded factorization.
    #[error("singular linear system at row {row}")]
    SingularMatrix { row: usize },

    /// Time step produced u > 0 beyond the clipping tolerance.
    #[error("positivity overshoot {overshoot:.3e} exceeds tolerance at t = {t:.6e}")]
    StepOvershoot { overshoot: f64, t: f64 },

    /// Step-size control drove dt below its floor.
    #[error("time step underflow at t = {t:.6e}")]
    DtUnderflow { t: f64 },

    /// Pseudo-arclength continuation could not advance.
    #[error("continuation stalled at s = {s:.4e}, lambda = {lambda:.6e}")]
    ContinuationStall { s: f64, lambda: f64 },

    /// A state violated its runtime invariants.
    #[error("invalid state: {0}")]
    InvalidState(String),

    #[error(transparent)]
    Io(#[from] std::io::Error),
}

impl Error {
    pub fn config(key: &str, message: impl Into<String>) -> Self {
        Error::Config {
            key: key.to_string(),
            message: message.into(),
        }
    }
}

pub type Result<T> = std::result::Result<T, Error>;
