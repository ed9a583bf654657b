use thiserror::Error;

use crate::profile::ProfileError;
use crate::sequence::EvalError;
use crate::statistical::LacunaryError;

/// Failures of the numerical methods. Verdicts such as `Inconclusive` are not
/// errors.
#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    #[error(transparent)]
    Eval(#[from] EvalError),
    #[error("invalid tolerance profile: {0}")]
    Profile(#[from] ProfileError),
    #[error("invalid lacunary sequence: {0}")]
    Lacunary(#[from] LacunaryError),
    #[error("invalid argument: {0}")]
    InvalidArgument(String),
    #[error("precondition failed: {0}")]
    Precondition(String),
}

pub type Result<T, E = Error> = std::result::Result<T, E>;
