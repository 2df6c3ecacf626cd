//! Crate-wide error type.

use thiserror::Error;

#[derive(Debug, Error)]
pub enum DedError {
    #[error("invalid instance: {0}")]
    InvalidInstance(String),

    #[error("output out of range for unit {unit} at period {period}: {value} not in [{lo}, {hi}]")]
    OutputOutOfRange {
        unit: usize,
        period: usize,
        value: f64,
        lo: f64,
        hi: f64,
    },

    #[error("configuration error: {0}")]
    Config(String),

    #[error("model build error: {0}")]
    Build(String),

    #[error("solution decode error: {0}")]
    Decode(String),

    #[error("parse error at line {line}: {msg}")]
    Parse { line: usize, msg: String },

    #[error("problem is infeasible: {0}")]
    Infeasible(String),

    #[error("solver error: {0}")]
    Solver(String),

    #[error(transparent)]
    Io(#[from] std::io::Error),
}
