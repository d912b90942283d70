use thiserror::Error;

/// Errors raised by the scaling transforms and the solvers.
#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    #[error("coordinate {value} outside profile domain [{lo}, {hi}]")]
    Domain { value: f64, lo: f64, hi: f64 },

    #[error(
        "time {query} outside reference range [{first}, {last}]; \
         extend the reference to cover lambda_range of the profile"
    )]
    Range { query: f64, first: f64, last: f64 },

    #[error("shape mismatch: {0}")]
    Shape(String),

    #[error("invalid parameter: {0}")]
    Parameter(String),

    /// A transform needs 1/α and the speed factor vanished.
    #[error("speed factor is zero: {0}")]
    ZeroSpeed(&'static str),

    #[error("metric error: {0}")]
    Metric(String),

    #[error("CFL violation: dt = {dt} exceeds the stable limit {max_dt}")]
    Cfl { dt: f64, max_dt: f64 },

    #[error("numerical instability at step {step}: {reason}")]
    Instability { step: usize, reason: String },

    #[error("weak-field approximation violated: max |g00 + 1| = {deviation} > {threshold}")]
    WeakField { deviation: f64, threshold: f64 },
}

pub type Result<T> = std::result::Result<T, Error>;
