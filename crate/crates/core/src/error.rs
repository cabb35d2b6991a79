use thiserror::Error;

use crate::grammar::SymbolId;
use crate::validate::ValidationReport;

/// Largest dimension (height, width or area) any grammar may derive.
pub const DIM_LIMIT: u64 = 1 << 62;

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum Error {
    #[error("dimension overflow at symbol {symbol}: {detail}")]
    Overflow { symbol: SymbolId, detail: String },

    #[error("expansion of {symbol} has {cells} cells, limit is {limit}")]
    AreaLimitExceeded { symbol: SymbolId, cells: u128, limit: u64 },

    #[error("position ({row}, {col}) outside {height}x{width}")]
    OutOfBounds { row: u64, col: u64, height: u64, width: u64 },

    #[error("dimension mismatch: {0}")]
    DimensionMismatch(String),

    #[error("query landed on the unfilled hole of {symbol}")]
    InternalHoleHit { symbol: SymbolId },

    #[error("symbol {symbol} has height {height}, expected a one-dimensional grammar")]
    NotOneDimensional { symbol: SymbolId, height: u64 },

    #[error("invalid parameter: {0}")]
    Parameter(String),

    #[error("line {line}: {message}")]
    Parse { line: usize, message: String },

    #[error("grammar is not well-formed: {0}")]
    Invalid(ValidationReport),
}

pub type Result<T, E = Error> = std::result::Result<T, E>;
