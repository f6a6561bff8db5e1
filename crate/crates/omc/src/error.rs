//! Error types shared across the crate.

use thiserror::Error;

#[derive(Debug, Error)]
pub enum Error {
    /// Input dimensions do not match the simulator's schema.
    #[error("schema mismatch: {0}")]
    Schema(String),

    /// The simulator does not expose an analytic Jacobian and no fallback is enabled.
    #[error("capability missing: {0}")]
    Capability(String),

    /// Every output dimension was masked off; the masked distance is undefined.
    #[error("no informative output dimensions remain after masking")]
    NoInformativeDimensions,

    /// An operation that needs accepted optimization records received none.
    #[error("no accepted optimization records")]
    EmptyAccepted,

    /// A proposal mixture needs at least one component.
    #[error("proposal mixture has no components")]
    EmptyProposal,

    /// All importance weights are zero; no posterior sample can be drawn.
    #[error("all importance weights are zero; increase epsilon or the candidate count")]
    AllZeroWeights,

    /// A proposal draw evaluated to zero proposal density (internal inconsistency).
    #[error("proposal density is zero at a drawn sample (internal inconsistency)")]
    InconsistentProposal,

    /// A numeric quantity that must be finite was not.
    #[error("non-finite value: {0}")]
    NonFinite(String),

    /// Ground truth oracle is not available for this problem.
    #[error("no ground-truth oracle for problem '{0}'")]
    OracleUnavailable(String),

    /// An MCMC reference run failed its convergence diagnostic.
    #[error("MCMC reference did not converge: {0}")]
    McmcDiagnostic(String),

    /// Invalid experiment configuration.
    #[error("configuration error: {0}")]
    Config(String),

    #[error(transparent)]
    Io(#[from] std::io::Error),

    #[error("malformed file: {0}")]
    Format(String),
}

pub type Result<T> = std::result::Result<T, Error>;
