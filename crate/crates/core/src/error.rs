use thiserror::Error;

use crate::protocol::Phase;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum Error {
    #[error("degree mismatch: expected {expected}, found {found}")]
    DegreeMismatch { expected: usize, found: usize },

    #[error("point {point} out of range for degree {degree}")]
    PointOutOfRange { point: usize, degree: usize },

    #[error("not a bijection on 0..{degree}: {reason}")]
    NotABijection { degree: usize, reason: String },

    #[error("generators {0} and {1} do not commute")]
    NonCommutingGenerators(usize, usize),

    #[error("expected {expected} exponents, found {found}")]
    ArityMismatch { expected: usize, found: usize },

    #[error("enumeration exceeded cap of {0} elements")]
    CapExceeded(usize),

    #[error("point {point} is not in the orbit of {base}")]
    NotInOrbit { point: usize, base: usize },

    #[error("{operation} is not allowed in phase {phase:?}")]
    PhaseViolation { operation: &'static str, phase: Phase },

    #[error("transcript belongs to group `{found}`, expected `{expected}`")]
    GroupMismatch { expected: String, found: String },

    #[error("line {line}: {message}")]
    Parse { line: usize, message: String },
}
