use thiserror::Error;

/// Errors raised by the library. The CLI maps each variant onto an exit code
/// through [`Error::class`].
#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    #[error("invalid input: {0}")]
    Input(String),
    #[error("graph is disconnected")]
    DisconnectedGraph,
    #[error("edge `{0}` has non-positive length")]
    NonPositiveLength(String),
    #[error("graph has no vertices")]
    EmptyVertexSet,
    #[error("unknown vertex `{0}`")]
    UnknownVertex(String),
    #[error("unknown edge `{0}`")]
    UnknownEdge(String),
    #[error("duplicate id `{0}`")]
    DuplicateId(String),
    #[error("genus {0} is too small for this operation")]
    GenusTooSmall(u32),
    #[error("vertex `{0}` violates the polarization inequality v(p) - 2 + 2q(p) >= 0")]
    NotPolarized(String),
    #[error("graph is not stable")]
    NotStable,
    #[error("graph has a bridge")]
    HasBridge,
    #[error("measure has total mass {0}, expected 1")]
    MassNotOne(String),
    #[error("green diagonal is not constant: {0}")]
    NonConstantDiagonal(String),
    #[error("admissibility check failed: {0}")]
    AdmissibilityCheckFailed(String),
    #[error("graph is a tree; its jacobian is trivial")]
    TreeGraph,
    #[error("dimension {0} is too large (maximum {1})")]
    DimensionTooLarge(usize, usize),
    #[error("matrix is not symmetric positive definite")]
    NotPositiveDefinite,
    #[error("voronoi cell volume {0} differs from 1")]
    VolumeMismatch(String),
    #[error("theta series did not converge: {0}")]
    NonConvergent(String),
    #[error("identity violated: {0}")]
    IdentityViolation(String),
}

/// Coarse classification used for process exit codes.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ErrorClass {
    Input,
    Numerical,
    Identity,
}

impl Error {
    pub fn class(&self) -> ErrorClass {
        match self {
            Error::NonConvergent(_) | Error::VolumeMismatch(_) => ErrorClass::Numerical,
            Error::IdentityViolation(_)
            | Error::NonConstantDiagonal(_)
            | Error::AdmissibilityCheckFailed(_) => ErrorClass::Identity,
            _ => ErrorClass::Input,
        }
    }
}

pub type Result<T, E = Error> = std::result::Result<T, E>;
