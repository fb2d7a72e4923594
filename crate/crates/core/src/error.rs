use thiserror::Error;

use crate::format::ParseError;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    /// A path, polarization or port that the registry does not know about.
    #[error("configuration error: {0}")]
    Config(String),

    #[error("validation error: {0}")]
    Validation(String),

    #[error("registry mismatch: {0}")]
    RegistryMismatch(String),

    #[error(transparent)]
    Parse(#[from] ParseError),

    /// A physics contract was broken, e.g. a herald spec that lets through
    /// branches with the wrong photon number in an output path.
    #[error("contract violation: {0}")]
    Contract(String),

    #[error("degenerate circuit: {0}")]
    Degenerate(String),

    #[error("coherence loss: {0}")]
    CoherenceLoss(String),

    #[error("infeasible visibilities: Gram matrix has eigenvalue {min_eigenvalue:.3e}")]
    InfeasibleVisibilities { min_eigenvalue: f64 },

    #[error("fidelity undefined: {0}")]
    UndefinedFidelity(String),
}

impl Error {
    /// Process exit code used by the command-line front end.
    ///
    /// 1 validation, 2 parse, 3 physics-contract violation.
    pub fn exit_code(&self) -> i32 {
        match self {
            Error::Parse(_) => 2,
            Error::Contract(_) | Error::Degenerate(_) | Error::CoherenceLoss(_) => 3,
            _ => 1,
        }
    }
}
