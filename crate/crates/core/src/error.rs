use thiserror::Error;

#[derive(Debug, Error)]
pub enum Error {
    #[error("size limit exceeded: {what} = {value} (limit {limit})")]
    Size {
        what: &'static str,
        value: usize,
        limit: usize,
    },
    #[error("precondition violated: {0}")]
    Precondition(String),
    #[error("degenerate geometry: {0}")]
    Geometry(String),
    #[error("malformed OFF file (line {line}): {msg}")]
    OffFormat { line: usize, msg: String },
    #[error("dimension mismatch: expected {expected}, got {actual}")]
    Dimension { expected: usize, actual: usize },
    #[error("rank range {from}..{to} outside 0..={rank}")]
    RankRange { from: usize, to: usize, rank: usize },
    #[error(transparent)]
    Io(#[from] std::io::Error),
}

pub type Result<T, E = Error> = std::result::Result<T, E>;
