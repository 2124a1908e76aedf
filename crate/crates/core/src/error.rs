use thiserror::Error;

/// Errors raised by selection routines and their inputs.
#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    #[error("candidate index {index} out of range for {n} candidates")]
    IndexOutOfRange { index: usize, n: usize },

    #[error("sensor index {0} appears more than once")]
    DuplicateIndex(usize),

    #[error("cannot select {p} sensors from {n} candidates")]
    TooManySensors { p: usize, n: usize },

    #[error("matrix contains a non-finite entry at ({row}, {col})")]
    NonFinite { row: usize, col: usize },

    #[error("invalid argument: {0}")]
    InvalidArgument(String),

    #[error("exhaustive search over {combinations} subsets exceeds the budget of {budget}")]
    BudgetExceeded { combinations: u128, budget: u128 },
}

pub type Result<T> = std::result::Result<T, Error>;
