use thiserror::Error;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    #[error("dimension mismatch: expected {expected}, found {found}")]
    DimensionMismatch { expected: usize, found: usize },

    #[error("matrix is not square ({rows}x{cols})")]
    NotSquare { rows: usize, cols: usize },

    #[error("matrix is numerically singular (condition estimate {cond:e})")]
    NotInvertible { cond: f64 },

    #[error("subspaces are not complementary ({context})")]
    NotComplementary { context: String },

    #[error("gap {gap} is not below 1 - margin")]
    GapTooLarge { gap: f64 },

    #[error("operator is not in the required group: {reason}")]
    InvalidGroupElement { reason: String },

    #[error("point lies outside the chart domain (gap {gap})")]
    OutsideChartDomain { gap: f64 },

    #[error("pair lies outside the trivialization neighbourhood ({reason})")]
    OutsideTrivializationDomain { reason: String },

    #[error("pair has no common complement: dim S = {dim_s}, dim T = {dim_t}")]
    NotInDelta { dim_s: usize, dim_t: usize },

    #[error("common complement search exhausted its budget (best margins {best_margin_s}, {best_margin_t})")]
    SearchFailed {
        best_margin_s: f64,
        best_margin_t: f64,
    },

    #[error("invalid input: {0}")]
    InvalidInput(String),
}

pub type Result<T> = std::result::Result<T, Error>;
