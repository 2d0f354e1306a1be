//! Crate-wide error type.

use thiserror::Error;

#[derive(Debug, Error)]
pub enum Error {
    /// A configuration is internally inconsistent: mismatched universes,
    /// unsupported kind pairings, malformed parameters.
    #[error("configuration error: {0}")]
    Config(String),

    /// An exact computation would visit more states than the cap allows.
    /// Exact modes never fall back to sampling; callers must raise the cap
    /// explicitly or switch to estimation.
    #[error("instance too large for exact mode: needs {needed} states, cap is {cap}")]
    CapExceeded { needed: u128, cap: u64 },
}

impl Error {
    pub fn config(msg: impl Into<String>) -> Self {
        Error::Config(msg.into())
    }
}

pub type Result<T> = std::result::Result<T, Error>;
