//! Error type shared by all modules.

use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Clone, Error)]
pub enum Error {
    /// A parameter is outside its mathematical domain (non-finite, wrong sign, ...).
    #[error("domain error: {0}")]
    Domain(String),

    /// The requested solution branch has no root for these parameters.
    #[error("no solution on the requested branch: {0}")]
    NoSolution(String),

    /// Argument outside the interval on which the operation is defined.
    #[error("out of range: {0}")]
    OutOfRange(String),

    /// Problem size exceeds the configured cap.
    #[error("resource limit: {what} = {n} exceeds cap {cap}")]
    ResourceLimit {
        what: &'static str,
        n: usize,
        cap: usize,
    },

    /// The phase is ambiguous (effective field vanishes below the critical
    /// temperature), so a single magnetization branch cannot be selected.
    #[error("ambiguous phase: {0}")]
    AmbiguousPhase(String),

    /// A numerical procedure failed to reach its tolerance.
    #[error("numeric error: {0}")]
    Numeric(String),

    /// Invalid sampler or run configuration.
    #[error("invalid configuration: {0}")]
    Config(String),
}
