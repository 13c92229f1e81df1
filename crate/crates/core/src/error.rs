use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("domain error: {0}")]
    Domain(String),

    #[error("invalid parameter `{name}`: {reason}")]
    InvalidParameter { name: &'static str, reason: String },

    #[error("degenerate distribution: {0}")]
    Degenerate(String),

    #[error("quadrature did not converge on [{lo}, {hi}]: estimate {estimate}, error {error:e}")]
    Quadrature {
        lo: f64,
        hi: f64,
        estimate: f64,
        error: f64,
    },

    #[error("covariance factorization failed for q = {q}, lambda0 = {lambda0}, grid dt = {dt}, n = {n}")]
    Factorization { q: f64, lambda0: f64, dt: f64, n: usize },

    #[error("step size too large: {0}")]
    StepSize(String),

    #[error("grid mismatch: {0}")]
    GridMismatch(String),

    #[error("singular per-step solve at node {node}")]
    SingularStep { node: usize },

    #[error("argument {p} is within 1e-12 of a pole")]
    NearPole { p: num_complex::Complex64 },

    #[error("fixed-point iteration diverged at p = {p} after {iterations} iterations")]
    Divergence {
        p: num_complex::Complex64,
        iterations: usize,
    },

    #[error("Laplace inversion not converged at t = {t}: {coarse} vs {fine}")]
    Inversion { t: f64, coarse: f64, fine: f64 },

    #[error("pointwise evaluation of a white-noise kernel; use its integral weight")]
    Distributional,

    #[error("configuration error at `{path}`: {reason}")]
    Config { path: String, reason: String },

    #[error(transparent)]
    Io(#[from] std::io::Error),

    #[error(transparent)]
    Json(#[from] serde_json::Error),
}

pub(crate) fn invalid(name: &'static str, reason: impl Into<String>) -> Error {
    Error::InvalidParameter {
        name,
        reason: reason.into(),
    }
}
