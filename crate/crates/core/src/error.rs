use thiserror::Error;

/// Errors raised by the numerical kernels.
///
/// The variants map onto the CLI exit-code contract through
/// [`Error::is_runtime_precondition`]: everything that signals a lost
/// runtime precondition (positivity of the dual weight, CFL bound, strict
/// positivity of the reference solution) exits with 3.
#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    #[error("negative input {value} at index {index}")]
    NegativeInput { index: usize, value: f64 },

    #[error("non-finite input {value} at index {index}")]
    NonFinite { index: usize, value: f64 },

    #[error("dimension mismatch: expected {expected}, got {got}")]
    DimensionMismatch { expected: usize, got: usize },

    #[error("0 * (+inf) is undefined")]
    ZeroTimesInfinity,

    #[error("invalid convex generator: {0}")]
    InvalidEta(String),

    #[error("tangent minorant needs at least one sample point")]
    EmptySampleSet,

    #[error("invalid sample points: {0}")]
    InvalidSamples(String),

    #[error("operator is {found} but {required} is required")]
    NotStochastic {
        required: &'static str,
        found: &'static str,
    },

    #[error("invalid measure: {0}")]
    InvalidMeasure(String),

    #[error("invalid fragmentation kernel: column {column} has no mass-carrying daughters but B = {rate}")]
    InvalidKernel { column: usize, rate: f64 },

    #[error("CFL bound violated: {0}")]
    CflViolation(String),

    #[error("dual weight lost positivity at step {step} (cell {cell}, value {value})")]
    DualPositivityLost { step: usize, cell: usize, value: f64 },

    #[error("dual solve failed at step {step}: singular update matrix")]
    SingularDual { step: usize },

    #[error("reference solution lost strict positivity at step {step} (index {index}, value {value})")]
    NonPositiveG { step: usize, index: usize, value: f64 },

    #[error("invalid configuration: {0}")]
    Config(String),

    #[error("parse error: {0}")]
    Parse(String),

    #[error("i/o error: {0}")]
    Io(String),
}

impl Error {
    /// True for errors that mean a runtime precondition of a simulation was lost.
    pub fn is_runtime_precondition(&self) -> bool {
        matches!(
            self,
            Error::CflViolation(_)
                | Error::DualPositivityLost { .. }
                | Error::SingularDual { .. }
                | Error::NonPositiveG { .. }
        )
    }
}

impl From<std::io::Error> for Error {
    fn from(e: std::io::Error) -> Self {
        Error::Io(e.to_string())
    }
}

impl From<csv::Error> for Error {
    fn from(e: csv::Error) -> Self {
        Error::Io(e.to_string())
    }
}

pub type Result<T> = std::result::Result<T, Error>;

pub(crate) fn check_nonnegative(values: &[f64]) -> Result<()> {
    for (index, &value) in values.iter().enumerate() {
        if !value.is_finite() {
            return Err(Error::NonFinite { index, value });
        }
        if value < 0.0 {
            return Err(Error::NegativeInput { index, value });
        }
    }
    Ok(())
}

pub(crate) fn check_len(expected: usize, got: usize) -> Result<()> {
    if expected != got {
        return Err(Error::DimensionMismatch { expected, got });
    }
    Ok(())
}
