use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    #[error("index {0} does not fit below 2^63")]
    IndexOverflow(u64),

    #[error("block exponent {n} outside the supported range 0..={max}")]
    ExponentOutOfRange { n: u32, max: u32 },

    #[error("unknown ordering name `{0}`")]
    UnknownOrdering(String),

    #[error("singular matrix: kernel contains {kernel:#b}")]
    SingularMatrix { kernel: u64 },

    #[error("matrix row {row} has entries beyond dimension {dim}")]
    MatrixShape { row: usize, dim: u32 },

    #[error("piecewise block {k} has dimension {got}, expected {k}")]
    BlockDimension { k: usize, got: u32 },

    #[error("table has {len} entries, expected {expected}")]
    TableLength { len: usize, expected: usize },

    #[error("table value {value} at position {position} is outside [0, {len})")]
    TableValueOutOfRange { value: u64, position: usize, len: usize },

    #[error("table is not a bijection: value {value} repeated at position {position}")]
    NotBijective { value: u64, position: usize },

    #[error("block exponents differ: {left} vs {right}")]
    MismatchedExponent { left: u32, right: u32 },

    #[error("ordering on [2^{have}] does not cover [2^{need}]")]
    DomainMismatch { have: u32, need: u32 },

    #[error("offset {v} outside [0, {bound})")]
    OffsetOutOfDomain { v: u64, bound: u64 },

    #[error("bit position {bit} is not below n = {n}")]
    BitOutOfRange { bit: u32, n: u32 },

    #[error("point {0} outside [0, 1)")]
    PointOutOfRange(f64),

    #[error("invalid exponent p = {0}")]
    InvalidExponent(f64),

    #[error("{axis} grid too coarse: {have} < {need}")]
    GridTooCoarse {
        axis: &'static str,
        have: usize,
        need: usize,
    },

    #[error("t grid must be a power-of-two number of dyadic cells, got {0}")]
    GridNotDyadic(usize),

    #[error("exact quadrature needs an even integer exponent, got p = {0}")]
    NotExact(f64),

    #[error("exhaustive search supports n <= {max}, got {n}")]
    TooLargeForExhaustive { n: u32, max: u32 },

    #[error("line {line}: {message}")]
    Parse { line: usize, message: String },

    #[error("checkpoint: {0}")]
    Checkpoint(String),
}
