use alloc::string::String;

pub type Result<T, E = Error> = core::result::Result<T, E>;

#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum Error {
    #[error("axis is not a unit vector (norm = {norm})")]
    InvalidAxis { norm: f64 },
    #[error("twist is neither a unit revolute nor a unit prismatic joint twist")]
    InvalidTwist,
    #[error("{field}: {message}")]
    Validation { field: String, message: String },
    #[error("{what}: expected length {expected}, got {actual}")]
    DimensionMismatch {
        what: &'static str,
        expected: usize,
        actual: usize,
    },
    #[error("body {body} out of range 1..={dof}")]
    BodyOutOfRange { body: usize, dof: usize },
    #[error("mass matrix is singular or ill-conditioned (condition number {condition:e})")]
    SingularInertia { condition: f64 },
    #[error("invalid parameter: {0}")]
    InvalidParameter(String),
    #[error("state became non-finite at step {step}")]
    NonFiniteState { step: usize },
}

impl Error {
    pub(crate) fn validation(field: impl Into<String>, message: impl Into<String>) -> Self {
        Error::Validation {
            field: field.into(),
            message: message.into(),
        }
    }

    pub(crate) fn check_len(what: &'static str, expected: usize, actual: usize) -> Result<()> {
        if expected == actual {
            Ok(())
        } else {
            Err(Error::DimensionMismatch {
                what,
                expected,
                actual,
            })
        }
    }
}
