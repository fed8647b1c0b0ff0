use alloc::string::String;
use alloc::vec::Vec;

/// Failure modes. Hypothesis errors mean the input is well formed but
/// outside the range where the theory applies.
#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
pub enum Error {
    #[error("contract violation: {0}")]
    Contract(String),
    #[error("hypothesis violation: {0}")]
    Hypothesis(String),
    #[error("hard Lefschetz fails in degrees {failures:?}")]
    HardLefschetz { failures: Vec<i32> },
    #[error("not homologically trivial: {0}")]
    NotHomologicallyTrivial(String),
    #[error("internal inconsistency: {0}")]
    Internal(String),
}

impl Error {
    pub fn contract(msg: impl Into<String>) -> Self {
        Error::Contract(msg.into())
    }

    pub fn hypothesis(msg: impl Into<String>) -> Self {
        Error::Hypothesis(msg.into())
    }

    pub fn internal(msg: impl Into<String>) -> Self {
        Error::Internal(msg.into())
    }

    /// True for the errors that say "the theorem does not apply here".
    pub fn is_hypothesis(&self) -> bool {
        matches!(
            self,
            Error::Hypothesis(_) | Error::HardLefschetz { .. } | Error::NotHomologicallyTrivial(_)
        )
    }
}

pub type Result<T> = core::result::Result<T, Error>;
