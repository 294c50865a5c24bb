use thiserror::Error;

/// Errors raised by the physics and integration layers.
#[derive(Debug, Error)]
pub enum Error {
    #[error("configuration error: {0}")]
    Configuration(String),

    #[error("domain error: {0}")]
    Domain(String),

    /// ε(iξ) diverges as ξ → 0; the caller must take the analytic limit.
    #[error("static divergence: response requested at xi = 0")]
    StaticDivergence,

    #[error("integration did not converge (last estimate {last:e}, previous {previous:e})")]
    NonConvergence { last: f64, previous: f64 },

    #[error("non-finite integrand value at {coordinates:?}")]
    NonFinite { coordinates: Vec<f64> },

    #[error("relative imaginary residue {residue:e} exceeds 1e-10")]
    ImaginaryResidue { residue: f64 },

    #[error(transparent)]
    Io(#[from] std::io::Error),

    #[error(transparent)]
    Json(#[from] serde_json::Error),
}

pub type Result<T, E = Error> = std::result::Result<T, E>;
