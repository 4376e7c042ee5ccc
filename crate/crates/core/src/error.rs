//! Error types for the chain engine and the Picard solvers.

use thiserror::Error;

/// Errors raised by the generic chain engine.
#[derive(Debug, Clone, Error)]
pub enum ChainError {
    /// A metric evaluation reported that a point (or a pair) does not belong
    /// to the requested chain level. Distinct from divergence: the distance
    /// is not merely large, it is undefined at this level.
    #[error("point pair is not a member of chain level {level}")]
    NotInLevel { level: usize },

    /// Level indices passed in the wrong order (`j > n`).
    #[error("invalid level range: j = {j} exceeds n = {n}")]
    LevelRange { j: usize, n: usize },

    /// The declared tail model could not certify `limsup α_j κ_j < 1`.
    #[error(
        "tail model cannot certify limsup(alpha_j * kappa_j) < 1 (probed up to level {probed})"
    )]
    LimsupNotCertified { probed: usize },

    /// A sequence value violated positivity.
    #[error("sequence value at level {level} is not positive: {value}")]
    NonPositiveSequence { level: usize, value: f64 },

    /// An iterate left the chain level it should belong to.
    #[error("iterate {step} is not a member of chain level {level}")]
    LeftChain { step: usize, level: usize },

    /// Map or metric evaluation failed for a backend-specific reason.
    #[error("evaluation failed: {0}")]
    Eval(String),
}

/// Errors raised by the real- and complex-time Picard solvers.
#[derive(Debug, Clone, Error)]
pub enum PicardError {
    /// An input violated its domain requirement (positivity, dimension, …).
    #[error("domain error: {0}")]
    Domain(String),

    /// Two sampled curves do not live on the same grid.
    #[error("grid mismatch: {0}")]
    GridMismatch(String),

    /// The right-hand side produced a non-finite value.
    #[error("right-hand side evaluation failed at t = {t}: {detail}")]
    RhsEval { t: f64, detail: String },

    /// The requested operation needs a polynomial right-hand side.
    #[error("operation requires a polynomial right-hand side")]
    PolynomialRequired,

    /// A curve (or a pair) is not a member of the requested weighted level.
    #[error("curve pair is not a member of level {level}")]
    NotInLevel { level: usize },

    /// A curve left the radius-`b` ball around the initial value.
    #[error("curve escaped the b-ball: {0}")]
    BallViolation(String),

    /// Step size does not evenly subdivide the half-interval.
    #[error("step {h} does not divide the half-width {half_width}")]
    StepMisaligned { h: f64, half_width: f64 },

    /// Error propagated from the chain engine.
    #[error(transparent)]
    Chain(#[from] ChainError),
}

impl From<PicardError> for ChainError {
    fn from(err: PicardError) -> Self {
        match err {
            PicardError::NotInLevel { level } => ChainError::NotInLevel { level },
            PicardError::Chain(e) => e,
            other => ChainError::Eval(other.to_string()),
        }
    }
}
