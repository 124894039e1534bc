use thiserror::Error;

use crate::dist::Label;
use crate::rat::Rat;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum QifError {
    #[error("masses sum to {sum}, not 1")]
    NotNormalized { sum: Rat },
    #[error("negative mass {mass} on label {label:?}")]
    NegativeMass { label: Label, mass: Rat },
    #[error("duplicate label {0:?}")]
    DuplicateLabel(Label),
    #[error("unknown label {0:?}")]
    UnknownLabel(Label),
    #[error("shape mismatch: {0}")]
    ShapeMismatch(String),
    #[error("row {row:?} sums to {sum}, not 1")]
    NotStochastic { row: Label, sum: Rat },
    #[error("negative entry {value} at ({row:?}, {col:?})")]
    NegativeEntry { row: Label, col: Label, value: Rat },
    #[error("output {0:?} has zero probability")]
    ZeroProbabilityObservation(Label),
    #[error("strategy enumeration would produce {count} strategies (limit {limit})")]
    EnumerationTooLarge { count: u128, limit: u128 },
    #[error("unknown person {0:?}")]
    UnknownPerson(String),
    #[error("unknown scenario {0:?}")]
    UnknownScenario(String),
    #[error("invalid adversary model: {0}")]
    InvalidModel(String),
    #[error("difference of two infinite values is undefined")]
    IndeterminateDifference,
    #[error("parse error: {0}")]
    Parse(String),
}

pub type Result<T> = std::result::Result<T, QifError>;
