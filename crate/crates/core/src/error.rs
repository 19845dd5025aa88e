use thiserror::Error;

/// Errors raised across the toolkit.
#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum Error {
    #[error("division by zero")]
    DivisionByZero,
    #[error("operands belong to different field contexts")]
    ContextMismatch,
    #[error("dimension mismatch: {0}")]
    Dimension(String),
    #[error("partition mismatch: {0}")]
    Partition(String),
    #[error("precondition violated: {0}")]
    Precondition(String),
    #[error("invariant violated: {0}")]
    InvariantViolation(String),
    #[error("search budget of {budget} exceeded")]
    BudgetExceeded { budget: u64 },
    /// The syndrome matched no weight-one coset leader: at least two
    /// sum-rank errors were detected.
    #[error("decoding failure: no single-block error explains the syndrome")]
    DecodingFailure { syndrome: Vec<u32> },
    #[error("local repair impossible in group {group}: {erasures} erasures, local distance {local_distance}")]
    LocalRepairImpossible {
        group: usize,
        erasures: usize,
        local_distance: usize,
    },
    #[error("erasure pattern not certified correctable")]
    NotCorrectable,
    #[error("parse error: {0}")]
    Parse(String),
}

impl Error {
    /// Short machine-readable name of the variant.
    pub fn kind(&self) -> &'static str {
        match self {
            Error::DivisionByZero => "division_by_zero",
            Error::ContextMismatch => "context_mismatch",
            Error::Dimension(_) => "dimension",
            Error::Partition(_) => "partition",
            Error::Precondition(_) => "precondition",
            Error::InvariantViolation(_) => "invariant_violation",
            Error::BudgetExceeded { .. } => "budget_exceeded",
            Error::DecodingFailure { .. } => "decoding_failure",
            Error::LocalRepairImpossible { .. } => "local_repair_impossible",
            Error::NotCorrectable => "not_correctable",
            Error::Parse(_) => "parse",
        }
    }
}

pub type Result<T> = std::result::Result<T, Error>;
