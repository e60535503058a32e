use alloc::string::String;
use core::fmt;

pub type Result<T> = core::result::Result<T, Error>;

#[derive(Debug, Clone, PartialEq)]
pub enum Error {
    /// Two operands live in spaces of different dimension.
    DimensionMismatch { expected: usize, found: usize },
    IndexOutOfRange { index: usize, dim: usize },
    /// A constructor argument violates the documented invariant; `field`
    /// names the offending parameter.
    InvalidParameter { field: &'static str, reason: String },
    /// The product space needs at least two blocks.
    TooFewBlocks(usize),
    EmptySequence,
    /// A linear solve hit a singular system. Cannot happen for operators
    /// built through the checked constructors.
    Singular,
    /// The pair (C, D) handed to a certificate is not an orthogonal pair.
    NotOrthogonalPair { worst_cross: f64, dims: (usize, usize, usize) },
    /// A certificate precondition failed on the recorded data.
    PreconditionFailed { name: String, value: f64 },
}

impl fmt::Display for Error {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Error::DimensionMismatch { expected, found } => {
                write!(f, "dimension mismatch: expected {expected}, found {found}")
            }
            Error::IndexOutOfRange { index, dim } => {
                write!(f, "index {index} out of range for dimension {dim}")
            }
            Error::InvalidParameter { field, reason } => {
                write!(f, "invalid `{field}`: {reason}")
            }
            Error::TooFewBlocks(m) => write!(f, "product space needs m >= 2 blocks, got {m}"),
            Error::EmptySequence => f.write_str("empty sequence"),
            Error::Singular => f.write_str("singular linear system"),
            Error::NotOrthogonalPair { worst_cross, dims } => write!(
                f,
                "C and D are not an orthogonal pair: dim V = {}, dim W = {}, ambient {}, worst cross product {worst_cross:e}",
                dims.0, dims.1, dims.2
            ),
            Error::PreconditionFailed { name, value } => {
                write!(f, "precondition `{name}` failed (tail {value:e})")
            }
        }
    }
}

impl core::error::Error for Error {}

pub(crate) fn check_dim(expected: usize, found: usize) -> Result<()> {
    if expected == found {
        Ok(())
    } else {
        Err(Error::DimensionMismatch { expected, found })
    }
}

pub(crate) fn invalid(field: &'static str, reason: impl Into<String>) -> Error {
    Error::InvalidParameter {
        field,
        reason: reason.into(),
    }
}
