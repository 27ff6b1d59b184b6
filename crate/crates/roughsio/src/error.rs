use thiserror::Error;

/// Errors shared by all modules.
#[derive(Debug, Error)]
pub enum Error {
    /// Pointwise evaluation landed exactly on a power-spike endpoint.
    #[error("evaluation at a spike singularity (x = {0})")]
    SingularPoint(f64),

    /// Adaptive refinement stalled before reaching the requested tolerance.
    #[error("quadrature failure: achieved error {achieved:.3e} > requested {requested:.3e}")]
    QuadratureFailure { achieved: f64, requested: f64 },

    /// A moment integral exceeded the configured overflow cap.
    #[error("divergent moment: integral exceeds cap {cap:.3e}")]
    DivergentMoment { cap: f64 },

    /// A condition integral exceeded the configured overflow cap.
    #[error("condition integral overflow: value exceeds cap {cap:.3e}")]
    Overflow { cap: f64 },

    #[error("domain error: {0}")]
    Domain(String),

    /// The Schwartz bump amplitude does not cancel the symbol at the origin.
    #[error("bump calibration failed: |mu_hat(0)| = {0:.3e} > 1e-10")]
    Calibration(f64),

    /// A grid supremum kept moving under refinement.
    #[error("grid too coarse: sup moved by {delta:.3e} > tolerance {tol:.3e}")]
    GridTooCoarse { delta: f64, tol: f64 },

    /// Truncation radius not resolvable on the grid.
    #[error("resolution error: inner radius {eps} < grid spacing {h}")]
    Resolution { eps: f64, h: f64 },

    #[error("i/o error: {0}")]
    Io(#[from] std::io::Error),

    #[error("serialization error: {0}")]
    Json(#[from] serde_json::Error),
}

pub type Result<T> = std::result::Result<T, Error>;
