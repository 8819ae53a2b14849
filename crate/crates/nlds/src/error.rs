//! Crate-wide error type.

use thiserror::Error;

/// Convenience alias used throughout the crate.
pub type Result<T> = std::result::Result<T, Error>;

/// All failure modes surfaced by the library.
///
/// Algorithmic outcomes that the estimators are specified to survive
/// (near-singular Gram matrix, truncation events, diverging iterates) are
/// *not* errors; they are reported through
/// [`FitStatus`](crate::offline::FitStatus). `Error` covers precondition
/// violations, malformed inputs, and I/O.
#[derive(Debug, Error)]
pub enum Error {
    /// A link function was constructed or parsed with an invalid parameter.
    #[error("invalid link function: {0}")]
    InvalidLink(String),

    /// A solver that needs expansivity `zeta > 0` was handed a link without it.
    #[error("link `{link}` is non-expansive (zeta = 0); {solver} requires zeta > 0")]
    NonExpansiveLink { link: String, solver: &'static str },

    /// A noise model was constructed with invalid parameters.
    #[error("invalid noise model: {0}")]
    InvalidNoise(String),

    /// A system specification is inconsistent (dimensions, stability, ...).
    #[error("invalid system: {0}")]
    InvalidSystem(String),

    /// The state left the finite floats during simulation.
    ///
    /// `step` counts simulated transitions from the start of the run,
    /// burn-in included.
    #[error("state became non-finite at simulation step {step}")]
    SimDiverged { step: usize },

    /// A hyperparameter violates a solver precondition.
    #[error("invalid parameter: {0}")]
    InvalidParam(String),

    /// A buffer layout does not match the stream it is applied to.
    #[error("buffer layout mismatch: {0}")]
    LayoutMismatch(String),

    /// An operation needed the trajectory's stored noise sequence.
    #[error("trajectory has no stored noise sequence; required by {0}")]
    MissingNoise(&'static str),

    /// No finite decorrelation gap exists for this spectral radius.
    #[error("no finite mixing gap: rho = {rho} is not inside (0, 1)")]
    NoMixingGap { rho: f64 },

    /// Every median-of-means segment fit ended with a non-ok status.
    #[error("all {0} median-of-means segment fits failed")]
    AllSegmentsFailed(usize),

    /// An experiment configuration failed validation.
    #[error("config error: {0}")]
    Config(String),

    /// A data file did not match its expected format.
    #[error("malformed file `{path}`: {msg}")]
    FileFormat { path: String, msg: String },

    /// Underlying I/O failure.
    #[error(transparent)]
    Io(#[from] std::io::Error),
}
